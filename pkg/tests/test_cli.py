import json

import numpy as np

from lcsense import coeffio
from lcsense.cli import main
from lcsense.sampling import LCEventStream

TINY = {"n_max": 20, "omega0": 10.0, "duration": 1.99, "sample_period": 0.01}


def _config(tmp_path, **kw):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"spec": TINY, **kw}))
    return str(path)


def test_gen_then_solve_every_solver(tmp_path, capsys):
    cfg = _config(tmp_path, K_list=[2], L_list=[4])
    assert main(["gen", "--config", cfg, "--seed", "4", "--out", str(tmp_path / "lc")]) == 0
    assert main(["gen", "--config", cfg, "--seed", "4", "--zc", "--out", str(tmp_path / "zc")]) == 0
    truth = coeffio.load(tmp_path / "lc" / "coeffs.csv")
    assert np.array_equal(coeffio.load(tmp_path / "lc" / "coeffs.json", truth.size), truth)
    assert len(LCEventStream.load(tmp_path / "lc" / "events.lcs").levels) == 5
    assert LCEventStream.load(tmp_path / "zc" / "events.lcs").levels.tolist() == [0.0]
    for solver, d in [("bsl0", "zc"), ("biht", "zc"), ("biht_lc", "lc"), ("bsl0_lc", "lc"), ("omp", "lc")]:
        src = tmp_path / d
        code = main(["solve", "--config", str(src / "config.json"), "--stream", str(src / "events.lcs"),
                     "--solver", solver, "--reference", str(src / "coeffs.csv"), "--out", str(src)])
        assert code == 0
        trace = json.loads((src / f"trace_{solver}.json").read_text())
        assert len(trace["estimate"]) == 21 and "snr_db" in trace
    out = capsys.readouterr().out
    assert "biht_lc: SNR" in out


def test_zc_solver_rejects_multilevel_stream(tmp_path):
    cfg = _config(tmp_path, K_list=[2], L_list=[2])
    main(["gen", "--config", cfg, "--out", str(tmp_path)])
    code = main(["solve", "--config", str(tmp_path / "config.json"), "--stream", str(tmp_path / "events.lcs"),
                 "--solver", "biht", "--out", str(tmp_path)])
    assert code == 2


def test_experiment_and_report(tmp_path, capsys):
    cfg = _config(tmp_path, mode="fig1", K_list=[1, 2], trials=2, solvers=["biht"])
    out = tmp_path / "exp"
    assert main(["experiment", "--config", cfg, "--seed", "9", "--out", str(out)]) == 0
    lines = (out / "results.csv").read_text().splitlines()
    assert len(lines) == 1 + 4
    assert (out / "results.svg").exists()
    first = (out / "results.csv").read_bytes()
    assert main(["experiment", "--config", cfg, "--seed", "9", "--out", str(out)]) == 0
    assert (out / "results.csv").read_bytes() == first
    assert main(["report", str(out / "results.csv"), "--mode", "fig3", "--out", str(tmp_path / "rep")]) == 0
    assert (tmp_path / "rep" / "results.svg").exists()
    assert main(["report", str(out / "results.csv"), "--out", str(tmp_path / "fig.png")]) == 0
    assert (tmp_path / "fig.png").stat().st_size > 0
    assert "P(SNR>20dB)" in capsys.readouterr().out


def test_mode_flag_overrides_config(tmp_path):
    cfg = _config(tmp_path, mode="single", K_list=[1], L_list=[2], trials=1, solvers=["biht_lc"])
    assert main(["experiment", "--config", cfg, "--mode", "fig2", "--out", str(tmp_path / "o")]) == 0
    saved = json.loads((tmp_path / "o" / "config.json").read_text())
    assert saved["mode"] == "fig2_lc_sweep"


def test_exit_codes(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"trials": 0}))
    assert main(["experiment", "--config", str(bad), "--out", str(tmp_path)]) == 2
    bad.write_text("{not json")
    assert main(["experiment", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert main(["experiment", "--config", str(tmp_path / "missing.json")]) == 3
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    cfg = _config(tmp_path, K_list=[1])
    assert main(["gen", "--config", cfg, "--out", str(blocker / "sub")]) == 3
    stream = tmp_path / "corrupt.lcs"
    stream.write_text("levels=0\nT=0.01\nM=200\ninit=1\n500,0,-1\n")
    assert main(["solve", "--config", cfg, "--stream", str(stream), "--solver", "omp"]) == 2
