import csv
import json

import pytest

from qgrad.cli import build_parser, resolve_config, run_command


def write(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return p


def test_unknown_subcommand():
    with pytest.raises(SystemExit) as exc:
        build_parser().parse_args(["fly"])
    assert exc.value.code != 0


def test_validate_non_square_side(tmp_path, capsys):
    p = write(tmp_path, {"problem": {"matrix": [[1, 2, 3], [4, 5, 6], [7, 8, 9]], "p": 2}})
    assert run_command(["validate", "--config", str(p)]) == 2
    assert "problem.matrix" in capsys.readouterr().err


def test_schema_errors_name_the_field(tmp_path, capsys):
    p = write(tmp_path, {"optimizer": {"xi": "fast"}})
    assert run_command(["validate", "--config", str(p)]) == 2
    assert "optimizer.xi" in capsys.readouterr().err
    p = write(tmp_path, {"noise": {"trails": 3}})
    assert run_command(["validate", "--config", str(p)]) == 2
    assert "trails" in capsys.readouterr().err


def test_unreadable_config(tmp_path, capsys):
    assert run_command(["validate", "--config", str(tmp_path / "nope.json")]) == 2
    assert "cannot read" in capsys.readouterr().err
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert run_command(["validate", "--config", str(bad)]) == 2


def test_qubit_cap(tmp_path, capsys):
    assert run_command(["run", "--mode", "circuit", "--ne", "22", "--out", str(tmp_path)]) == 2
    assert "capped at 24" in capsys.readouterr().err


def test_resolved_config_has_no_hidden_defaults():
    cfg = resolve_config({"problem": {"preset": "f1"}}, {"xi": 0.2, "mode": "exact"})
    assert cfg["optimizer"]["xi"] == 0.2
    assert cfg["optimizer"]["mode"] == "exact_matrix"
    assert cfg["starts"] == [[4.0], [14.0]]
    for key in ("xi", "max_iters", "stop_tol", "mode", "n_e", "margin", "postselect"):
        assert key in cfg["optimizer"]


def test_inline_matrix_needs_starts():
    with pytest.raises(ValueError, match="starts"):
        resolve_config({"problem": {"matrix": [[1, 0, 0, 0]] * 4, "p": 2}})


def test_zero_iteration_trace(tmp_path):
    p = write(tmp_path, {"starts": [[5, 5]], "optimizer": {"max_iters": 0}})
    assert run_command(["run", "--config", str(p), "--out", str(tmp_path / "o")]) == 0
    rows = list(csv.reader(open(tmp_path / "o" / "trace_0.csv")))
    assert rows[0] == ["iter", "x_0", "x_1", "f", "grad_norm", "p_succ", "cos_gamma"]
    assert len(rows) == 2
    assert rows[1][0] == "0" and rows[1][5] == "nan"


def test_run_outputs(tmp_path):
    p = write(tmp_path, {"starts": [[5, 5]], "optimizer": {"max_iters": 50}})
    out = tmp_path / "o"
    assert run_command(["run", "--config", str(p), "--out", str(out)]) == 0
    summary = json.load(open(out / "trace_0.json"))
    for key in ("config", "termination", "final_x", "final_f", "min_p_succ", "iterations"):
        assert key in summary
    rows = list(csv.reader(open(out / "trace_0.csv")))
    assert len(rows) == summary["iterations"] + 2
    # floats carry 17 significant digits
    assert len(rows[2][1].replace("-", "").replace(".", "").lstrip("0")) >= 15


def test_sweep_noise_and_register(tmp_path):
    p = write(
        tmp_path,
        {"starts": [[5, 5]], "optimizer": {"max_iters": 5}, "noise": {"init_amplitude": 0.05, "register_sizes": [4]}},
    )
    assert run_command(["sweep-noise", "--config", str(p), "--trials", "3", "--out", str(tmp_path / "n")]) == 0
    assert len(list((tmp_path / "n").glob("start0_trial*.csv"))) == 3
    assert run_command(["sweep-register", "--config", str(p), "--out", str(tmp_path / "r")]) == 0
    assert (tmp_path / "r" / "start0_ne4.csv").exists()


def test_byte_identical_reruns(tmp_path):
    p = write(tmp_path, {"optimizer": {"max_iters": 40}, "noise": {"init_amplitude": 0.05, "d_strength": 0.02}})
    for name in ("a", "b"):
        args = ["sweep-noise", "--config", str(p), "--trials", "2", "--seed", "17", "--workers", "2"]
        assert run_command(args + ["--out", str(tmp_path / name)]) == 0
    files = sorted(f.name for f in (tmp_path / "a").iterdir())
    assert files == sorted(f.name for f in (tmp_path / "b").iterdir())
    assert "summary.json" in files
    for f in files:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
