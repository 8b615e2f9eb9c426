"""Scenario construction, runs, parameter sweeps and file output."""
from __future__ import annotations

import dataclasses
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .beam import BeamParams, build_vertex_fields, potential_exponential, vertex_offset
from .dirac import initial_x_polarized, project_x
from .engine import AmplitudeGrid, Scenario, accumulate
from .grid import (GridError, MomentumOffset, dft_forward, make_grid,
                   momentum_axes, position_axes, position_points)

log = logging.getLogger(__name__)

LOG_FLOOR = 1e-12


class ConfigError(ValueError):
    """Invalid or unreadable configuration."""


@dataclass(frozen=True)
class SimConfig:
    """Run parameters. Box widths are in laser wavelengths, everything else natural units."""

    n_x: int = 15
    n_y: int = 15
    x_w: float = 20.0
    y_w: float = 20.0
    k_L: float = 0.1
    eps: float = 0.1
    g0: float = 1.0
    T: float = 1000.0
    k0: float = 1.0
    include_longitudinal: bool = True
    compute_negative_final: bool = False
    workers: int = 1
    out: str | None = None

    @property
    def wavelength(self) -> float:
        return 2.0 * np.pi / self.k_L

    def replace(self, **changes) -> SimConfig:
        return dataclasses.replace(self, **changes)


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(SimConfig)}


def _coerce(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    raw = raw.strip()
    if kind == "bool":
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    if kind == "int":
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None
    if kind == "float":
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{key}: expected a number, got {raw!r}") from None
    return raw or None


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _coerce(key, raw)
    return values


def load_config(path, **overrides) -> SimConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    values = parse_config_text(text)
    values.update({k: v for k, v in overrides.items() if v is not None})
    return SimConfig(**values)


def format_config(config: SimConfig) -> str:
    lines = []
    for f in dataclasses.fields(config):
        value = getattr(config, f.name)
        if value is None:
            value = ""
        elif isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, float):
            value = repr(value)
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"


def beam_params(config: SimConfig) -> BeamParams:
    return BeamParams(g0=config.g0, k_L=config.k_L, eps=config.eps, T=config.T,
                      include_longitudinal=config.include_longitudinal)


def build_scenario(config: SimConfig) -> tuple[Scenario, BeamParams]:
    """Grid centred on the beam focus and the offset chain kappa -> kappa' -> kappa''."""
    if config.x_w <= 0 or config.y_w <= 0:
        raise GridError("box widths must be positive")
    lam = config.wavelength
    spec = make_grid(config.n_x, config.n_y, -0.5 * config.x_w * lam, -0.5 * config.y_w * lam,
                     config.x_w * lam, config.y_w * lam)
    beam = beam_params(config)
    kappa = MomentumOffset(-config.k_L, config.k0)
    kappa1 = MomentumOffset(-0.5 * spec.kx_width, -0.5 * spec.ky_width + config.k0)
    kappa2 = MomentumOffset(-spec.kx_width + config.k_L, -spec.ky_width + config.k0)
    K = vertex_offset(spec, beam)
    scenario = Scenario(spec=spec, beam=beam, kappa=kappa, kappa1=kappa1, kappa2=kappa2, K=K,
                        compute_negative_final=config.compute_negative_final)
    return scenario, beam


def count_iterations(n_D: int, n_p: int, n_I: int, dims) -> int:
    """Number of summation elements of an n_p-photon calculation in n_D dimensions."""
    if n_D < 1 or n_p < 1 or n_I < 0 or len(dims) != n_D or min(dims) < 1:
        raise ValueError("invalid iteration-count arguments")
    return 4 * (4 * n_D) ** n_p * int(np.prod(dims, dtype=object)) ** (n_p + n_I)


def scenario_count(config: SimConfig) -> int:
    """Contributions visited by one run: 2^7 Nx^2 Ny^2, doubled with negative final states."""
    n = 2 ** 7 * config.n_x ** 2 * config.n_y ** 2
    return 2 * n if config.compute_negative_final else n


@dataclass
class RunReport:
    max_up: float
    max_down: float
    iterations: int
    expected_iterations: int
    wall_time: float
    guard_activations: int
    gamma_totals: dict
    # maxima multiplied by (NxNy)^4, the scale of un-normalized transform sums
    max_up_raw: float = 0.0
    max_down_raw: float = 0.0
    config: dict = field(default_factory=dict)

    @property
    def ratio(self) -> float:
        return self.max_down / self.max_up if self.max_up > 0 else float("inf")

    @property
    def time_per_contribution(self) -> float:
        return self.wall_time / self.iterations if self.iterations else 0.0

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["gamma_totals"] = {str(k): v for k, v in self.gamma_totals.items()}
        out["ratio_down_up"] = self.ratio
        out["time_per_contribution_us"] = 1e6 * self.time_per_contribution
        return out


@dataclass
class RunResult:
    config: SimConfig
    scenario: Scenario
    grid: AmplitudeGrid
    up: np.ndarray
    down: np.ndarray
    report: RunReport

    @property
    def prob_up(self) -> np.ndarray:
        return np.abs(self.up) ** 2

    @property
    def prob_down(self) -> np.ndarray:
        return np.abs(self.down) ** 2

    def final_axes(self) -> tuple[np.ndarray, np.ndarray]:
        spec = self.scenario.spec
        k2 = self.scenario.kappa2
        return (k2.kappa_x + np.arange(2 * spec.n_x - 1) * spec.dkx,
                k2.kappa_y + np.arange(2 * spec.n_y - 1) * spec.dky)


def run(config: SimConfig, *, write: bool = True) -> RunResult:
    """Propagate the x-polarized initial state and project onto the x spin axis."""
    scenario, beam = build_scenario(config)
    vertices = build_vertex_fields(scenario.spec, beam)
    start = time.perf_counter()
    grid = accumulate(scenario, vertices, workers=config.workers)
    elapsed = time.perf_counter() - start

    c = grid.combine(initial_x_polarized())[:, :, grid.gamma_index(1)]
    up, down = project_x(c[..., 0], c[..., 1])
    p_up, p_down = np.abs(up) ** 2, np.abs(down) ** 2
    raw = float(config.n_x * config.n_y) ** 4
    report = RunReport(
        max_up=float(p_up.max()), max_down=float(p_down.max()),
        iterations=grid.iterations, expected_iterations=scenario_count(config),
        wall_time=elapsed, guard_activations=grid.guard_activations,
        gamma_totals=grid.channel_totals,
        max_up_raw=float(p_up.max()) * raw, max_down_raw=float(p_down.max()) * raw,
        config=dataclasses.asdict(config),
    )
    if report.iterations != report.expected_iterations:
        raise RuntimeError("iteration count does not match the scenario count")
    log.info("run nx=%d ny=%d: max up %.6g, max down %.6g, %.2f s",
             config.n_x, config.n_y, report.max_up, report.max_down, elapsed)
    result = RunResult(config, scenario, grid, up, down, report)
    if write and config.out:
        write_outputs(result, Path(config.out))
    return result


# ---------------------------------------------------------------- output

_RAMP = np.array([[0, 0, 0], [80, 0, 120], [200, 30, 60], [250, 150, 0], [255, 255, 200]],
                 dtype=float)


def _colorize(values: np.ndarray) -> np.ndarray:
    t = np.clip(values, 0.0, 1.0) * (len(_RAMP) - 1)
    lo = np.minimum(t.astype(int), len(_RAMP) - 2)
    frac = (t - lo)[..., None]
    return np.round(_RAMP[lo] * (1 - frac) + _RAMP[lo + 1] * frac).astype(np.uint8)


def write_ppm(path: Path, table: np.ndarray, *, log_scale: bool = False, scale: int = 1):
    """Binary PPM heatmap. First index runs along the image x axis, second upward."""
    table = np.asarray(table, dtype=float)
    top = table.max()
    if log_scale:
        floor = LOG_FLOOR * top if top > 0 else LOG_FLOOR
        norm = np.log10(np.maximum(table, floor) / floor) / max(np.log10(top / floor), 1e-300) \
            if top > 0 else np.zeros_like(table)
    else:
        norm = table / top if top > 0 else np.zeros_like(table)
    image = np.flipud(norm.T)
    if scale > 1:
        image = np.kron(image, np.ones((scale, scale)))
    pixels = _colorize(image)
    h, w = pixels.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode())
        fh.write(pixels.tobytes())


def write_pattern_csv(path: Path, kx, ky, amp: np.ndarray):
    A, B = np.meshgrid(np.arange(len(kx)), np.arange(len(ky)), indexing="ij")
    KX, KY = np.meshgrid(kx, ky, indexing="ij")
    rows = np.column_stack([A.ravel(), B.ravel(), KX.ravel(), KY.ravel(),
                            amp.real.ravel(), amp.imag.ravel(), (np.abs(amp) ** 2).ravel()])
    with open(path, "w") as fh:
        fh.write("a'',b'',k_x,k_y,re,im,prob\n")
        for r in rows.tolist():
            fh.write(f"{int(r[0])},{int(r[1])},{r[2]!r},{r[3]!r},{r[4]!r},{r[5]!r},{r[6]!r}\n")


def write_pattern_bin(path: Path, prob_up: np.ndarray, prob_down: np.ndarray):
    data = np.stack([prob_up, prob_down]).astype("<f8")
    shape = " ".join(str(s) for s in data.shape)
    with open(path, "wb") as fh:
        fh.write(f"float64 little-endian row-major shape {shape} [up,down][a''][b'']\n".encode())
        fh.write(np.ascontiguousarray(data).tobytes())


def read_pattern_bin(path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.readline().decode()
        shape = tuple(int(s) for s in header.split("shape", 1)[1].split("[", 1)[0].split())
        return np.frombuffer(fh.read(), dtype="<f8").reshape(shape)


def write_outputs(result: RunResult, out: Path):
    out.mkdir(parents=True, exist_ok=True)
    kx, ky = result.final_axes()
    (out / "config.resolved").write_text(format_config(result.config))
    write_pattern_csv(out / "pattern_up.csv", kx, ky, result.up)
    write_pattern_csv(out / "pattern_down.csv", kx, ky, result.down)
    write_pattern_bin(out / "pattern.bin", result.prob_up, result.prob_down)
    with open(out / "report.json", "w") as fh:
        json.dump(result.report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    for name, table in (("up", result.prob_up), ("down", result.prob_down)):
        write_ppm(out / f"pattern_{name}_linear.ppm", table, scale=8)
        write_ppm(out / f"pattern_{name}_log.ppm", table, log_scale=True, scale=8)


# ---------------------------------------------------------------- sweeps

def _subdir(config: SimConfig, name: str) -> str | None:
    return str(Path(config.out) / name) if config.out else None


def _check_odd(values):
    for v in values:
        if v < 3 or v % 2 == 0:
            raise GridError(f"grid counts must be odd and >= 3, got {v}")


def window_deviation(base: RunResult, other: RunResult) -> tuple[float, float]:
    """Largest bin-wise difference of peak-normalized patterns on the base k_y window.

    The other pattern is linearly interpolated along k_y onto the base
    bins; both runs must share the k_x grid.
    """
    kx0, ky0 = base.final_axes()
    kx1, ky1 = other.final_axes()
    if len(kx0) != len(kx1) or not np.allclose(kx0, kx1):
        raise ValueError("runs do not share the k_x grid")
    devs = []
    for p0, p1 in ((base.prob_up, other.prob_up), (base.prob_down, other.prob_down)):
        resampled = np.array([np.interp(ky0, ky1, row) for row in p1])
        devs.append(float(np.abs(p0 / p0.max() - resampled / resampled.max()).max()))
    return devs[0], devs[1]


def _write_sweep_table(config: SimConfig, name: str, header: str, rows):
    if not config.out:
        return
    path = Path(config.out)
    path.mkdir(parents=True, exist_ok=True)
    with open(path / name, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)
                              for v in row) + "\n")


def sweep_y_position(config: SimConfig, n_y_values=(15, 31, 63, 127)) -> list[RunResult]:
    """Refine the y position grid at fixed box width."""
    _check_odd(n_y_values)
    results = [run(config.replace(n_y=n, out=_subdir(config, f"ny_{n}"))) for n in n_y_values]
    rows = []
    for r in results:
        dev_up, dev_down = window_deviation(results[0], r)
        rows.append((r.config.n_y, r.config.y_w, r.report.max_up, r.report.max_down,
                     r.report.max_up_raw, r.report.max_down_raw, dev_up, dev_down))
    _write_sweep_table(config, "sweep_y_position.csv",
                       "n_y,y_w,max_up,max_down,max_up_raw,max_down_raw,"
                       "window_dev_up,window_dev_down", rows)
    return results


def sweep_y_momentum(config: SimConfig, n_y_values=(15, 31, 63, 127),
                     y_w_values=(20.0, 40.0, 80.0, 160.0)) -> list[RunResult]:
    """Refine the y momentum grid: grid count and box width grow together."""
    _check_odd(n_y_values)
    if len(n_y_values) != len(y_w_values):
        raise ConfigError("n_y and y_w lists must have equal length")
    results = [run(config.replace(n_y=n, y_w=w, out=_subdir(config, f"ny_{n}_yw_{w:g}")))
               for n, w in zip(n_y_values, y_w_values)]
    rows = [(r.config.n_y, r.config.y_w, r.report.max_up, r.report.max_down,
             r.report.max_up_raw, r.report.max_down_raw) for r in results]
    _write_sweep_table(config, "sweep_y_momentum.csv",
                       "n_y,y_w,max_up,max_down,max_up_raw,max_down_raw", rows)
    return results


def sweep_x_layout(levels=(4, 5, 6, 7)) -> list[tuple[int, int, int, float]]:
    """``(row, column, n_x, x_w)`` of the triangular x study.

    Row g uses n_x = 2^g - 1; the right-most column has x_w = 10 * 2^(g-3)
    wavelengths and every step to the left halves x_w.
    """
    n_cols = len(levels)
    layout = []
    for row, g in enumerate(levels):
        width = 10.0 * 2 ** (g - 3)
        for step in range(row + 1):
            layout.append((row, n_cols - 1 - step, 2 ** g - 1, width / 2 ** step))
    return layout


def sweep_x(config: SimConfig, levels=(4, 5, 6, 7)) -> dict[tuple[int, int], RunResult]:
    results = {}
    for row, col, n_x, x_w in sweep_x_layout(levels):
        sub = _subdir(config, f"nx_{n_x}_xw_{x_w:g}")
        results[(row, col)] = run(config.replace(n_x=n_x, x_w=x_w, out=sub))
    rows = [(row, col, r.config.n_x, r.config.x_w, r.report.max_up, r.report.max_down,
             r.report.max_up_raw, r.report.max_down_raw) for (row, col), r in results.items()]
    _write_sweep_table(config, "sweep_x.csv",
                       "row,column,n_x,x_w,max_up,max_down,max_up_raw,max_down_raw", rows)
    return results


def ablate_longitudinal(config: SimConfig) -> tuple[RunResult, RunResult]:
    """Same run with and without the longitudinal field component."""
    with_l = run(config.replace(include_longitudinal=True, out=_subdir(config, "with_longitudinal")))
    without = run(config.replace(include_longitudinal=False,
                                 out=_subdir(config, "without_longitudinal")))
    rows = [(name, r.report.max_up, r.report.max_down, r.report.max_up_raw, r.report.max_down_raw)
            for name, r in (("with", with_l), ("without", without))]
    _write_sweep_table(config, "ablation.csv",
                       "longitudinal,max_up,max_down,max_up_raw,max_down_raw", rows)
    return with_l, without


# ---------------------------------------------------------------- field dump

def _write_table_csv(path: Path, ax0, ax1, table, names):
    A0, A1 = np.meshgrid(ax0, ax1, indexing="ij")
    with open(path, "w") as fh:
        fh.write(",".join(names) + "\n")
        for a, b, v in zip(A0.ravel().tolist(), A1.ravel().tolist(), table.ravel().tolist()):
            fh.write(f"{a!r},{b!r},{v!r}\n")


def field_dump(config: SimConfig, *, n_x: int = 1024, n_y: int = 128,
               half_width: float = 20.0) -> dict[str, np.ndarray]:
    """Position- and momentum-space tables of the d = 1, o = -1 beam exponentials.

    The high-resolution grid spans +-``half_width`` wavelengths with a
    symmetric momentum frame; the second set uses the run grid of
    ``config`` with the frame centred on +k_L e_x.
    """
    beam = beam_params(config)
    lam = config.wavelength
    width = 2.0 * half_width * lam
    spec = make_grid(n_x, n_y, -0.5 * width, -0.5 * width, width, width, odd_only=False)
    pts = position_points(spec)
    sym = MomentumOffset(-0.5 * spec.kx_width, -0.5 * spec.ky_width)
    tables = {}
    for j in ("x", "y"):
        a = potential_exponential(j, 1, -1, pts[..., 0], pts[..., 1], beam)
        tables[f"position_{j}"] = a.real
        tables[f"momentum_{j}"] = np.abs(dft_forward(a, spec, sym))

    scenario, _ = build_scenario(config)
    small = scenario.spec
    spts = position_points(small)
    for j in ("x", "y"):
        a = potential_exponential(j, 1, -1, spts[..., 0], spts[..., 1], beam)
        tables[f"grid_momentum_{j}"] = np.abs(dft_forward(a, small, scenario.K))

    if config.out:
        out = Path(config.out)
        out.mkdir(parents=True, exist_ok=True)
        xs, ys = position_axes(spec)
        kxs, kys = momentum_axes(spec, sym)
        gkx, gky = momentum_axes(small, scenario.K)
        for j in ("x", "y"):
            _write_table_csv(out / f"position_{j}.csv", xs, ys, tables[f"position_{j}"],
                             ("x", "y", "re_A"))
            _write_table_csv(out / f"momentum_{j}.csv", kxs, kys, tables[f"momentum_{j}"],
                             ("k_x", "k_y", "abs_A"))
            _write_table_csv(out / f"grid_momentum_{j}.csv", gkx, gky,
                             tables[f"grid_momentum_{j}"], ("k_x", "k_y", "abs_A"))
            write_ppm(out / f"position_{j}.ppm", tables[f"position_{j}"] - tables[f"position_{j}"].min())
            write_ppm(out / f"momentum_{j}.ppm", tables[f"momentum_{j}"])
            write_ppm(out / f"grid_momentum_{j}.ppm", tables[f"grid_momentum_{j}"], scale=16)
    return tables
