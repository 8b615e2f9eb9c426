import json

from kapitza_dirac.cli import main


def test_count(capsys):
    assert main(["count"]) == 0
    out = capsys.readouterr().out
    assert "scenario_count=6480000" in out
    assert "general_count=12960000" in out


def test_run_writes_outputs(tmp_path, capsys):
    assert main(["run", "--nx", "3", "--ny", "3", "--out", str(tmp_path)]) == 0
    assert "max_up=" in capsys.readouterr().out
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["config"]["n_x"] == 3


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("n_x = 3\nn_y = 5\n")
    assert main(["count", "--config", str(cfg), "--ny", "3"]) == 0
    assert f"scenario_count={2 ** 7 * 81}" in capsys.readouterr().out


def test_error_exit_codes(tmp_path, capsys):
    assert main(["count", "--nx", "4"]) == 2
    assert main(["count", "--config", str(tmp_path / "nope.cfg")]) == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = red\n")
    assert main(["run", "--config", str(bad)]) == 2
    assert main(["run", "--nx", "3", "--ny", "3", "--workers", "0"]) == 2
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 4 and all(line.startswith("error: ") for line in err)


def test_ablation_subcommand(tmp_path, capsys):
    assert main(["ablate-longitudinal", "--nx", "3", "--ny", "3", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert out.startswith("with:") and "without:" in out
    assert (tmp_path / "ablation.csv").exists()
