"""Command-line harness: config loading, presets, batch runs, CSV/JSON output.

Config files are JSON. Every field is optional; anything left out is
filled from the preset (or the generic defaults for inline matrices) and
the fully resolved config is echoed into every summary file.

    {
      "label": "f2-demo",
      "problem": {"preset": "f2"}  |  {"matrix": [[...]], "p": 2},
      "direction": "minimize",
      "starts": [[5, 5], [-5, 5]],
      "seed": 0,
      "workers": 1,
      "optimizer": {"xi": 0.1, "max_iters": 600, "stop_tol": 1e-8,
                    "mode": "exact", "n_e": 12, "margin": 0.03125,
                    "postselect": "exact"},
      "noise": {"init_amplitude": 0.05, "d_strength": 0.0, "trials": 20,
                "register_sizes": [5, 7, 9, 11, 12], "resample_d": true}
    }
"""

from __future__ import annotations

import argparse
import copy
import json
import sys
from pathlib import Path

import jsonschema
import numpy as np

from .encoding import n_qubits_for
from .hhl import PhaseEstimateConfig
from .noise import NoiseConfig, run_trials, sweep_register_sizes
from .optimizer import IterationTrace, OptimizerConfig, run
from .poly_core import PolynomialProblem, make_problem
from .presets import PRESETS, preset_problem
from .statevector import MAX_QUBITS

# ancilla qubits k, up, d besides the e and v registers
FIXED_QUBITS = 3

_number = {"type": "number"}
_vector = {"type": "array", "items": _number, "minItems": 1}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "label": {"type": "string", "minLength": 1},
        "problem": {
            "oneOf": [
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["preset"],
                    "properties": {"preset": {"enum": sorted(PRESETS)}},
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["matrix", "p"],
                    "properties": {
                        "matrix": {"type": "array", "items": _vector, "minItems": 1},
                        "p": {"type": "integer", "minimum": 1},
                    },
                },
            ]
        },
        "direction": {"enum": ["minimize", "maximize"]},
        "starts": {"type": "array", "items": _vector, "minItems": 1},
        "seed": {"type": "integer", "minimum": 0},
        "workers": {"type": "integer", "minimum": 1},
        "optimizer": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "xi": {"type": "number", "exclusiveMinimum": 0},
                "max_iters": {"type": "integer", "minimum": 0},
                "stop_tol": {"type": "number", "exclusiveMinimum": 0},
                "mode": {"enum": ["exact", "exact_matrix", "circuit"]},
                "n_e": {"type": "integer", "minimum": 1},
                "margin": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 0.5},
                "postselect": {"enum": ["exact", "sampled"]},
            },
        },
        "noise": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "init_amplitude": {"type": "number", "minimum": 0},
                "d_strength": {"type": "number", "minimum": 0},
                "trials": {"type": "integer", "minimum": 1},
                "register_sizes": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
                "resample_d": {"type": "boolean"},
            },
        },
    },
}

GENERIC_DEFAULTS = {"xi": 0.1, "max_iters": 200, "register_sizes": [5, 7, 9, 11, 12], "direction": "minimize"}


class ConfigError(ValueError):
    pass


def _where(path) -> str:
    parts = [str(p) for p in path]
    return ".".join(parts) if parts else "<root>"


def load_config(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    validate_config(raw, str(path))
    return raw


def validate_config(raw: dict, source: str = "<config>") -> None:
    """Schema check; the first violation is reported with its path and field."""
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise ConfigError(f"{source}: {_where(err.absolute_path)}: {err.message}")
    prob = raw.get("problem", {})
    if "matrix" in prob:
        rows = prob["matrix"]
        if any(len(r) != len(rows) for r in rows):
            raise ConfigError(f"{source}: problem.matrix: matrix is not square")
        try:
            make_problem(np.array(rows, dtype=float), prob["p"])
        except ValueError as exc:
            raise ConfigError(f"{source}: problem.matrix: {exc}") from None


def resolve_config(raw: dict | None = None, overrides: dict | None = None) -> dict:
    """Merge file values and command-line overrides over the defaults."""
    raw = copy.deepcopy(raw or {})
    overrides = overrides or {}
    prob = raw.get("problem", {"preset": "f2"})
    base = PRESETS[prob["preset"]] if "preset" in prob else GENERIC_DEFAULTS
    opt = raw.get("optimizer", {})
    noise = raw.get("noise", {})
    starts = raw.get("starts", base.get("starts"))
    if starts is None:
        raise ConfigError("starts: required for an inline matrix problem")
    cfg = {
        "label": raw.get("label", prob.get("preset", "custom")),
        "problem": prob,
        "direction": raw.get("direction", base["direction"]),
        "starts": [[float(v) for v in s] for s in starts],
        "seed": raw.get("seed", 0),
        "workers": raw.get("workers", 1),
        "optimizer": {
            "xi": opt.get("xi", base["xi"]),
            "max_iters": opt.get("max_iters", base["max_iters"]),
            "stop_tol": opt.get("stop_tol", 1e-8),
            "mode": opt.get("mode", "exact_matrix"),
            "n_e": opt.get("n_e", 12),
            "margin": opt.get("margin", 1.0 / 32),
            "postselect": opt.get("postselect", "exact"),
        },
        "noise": {
            "init_amplitude": noise.get("init_amplitude", 0.0),
            "d_strength": noise.get("d_strength", 0.0),
            "trials": noise.get("trials", 1),
            "register_sizes": list(noise.get("register_sizes", base["register_sizes"])),
            "resample_d": noise.get("resample_d", True),
        },
    }
    for key in ("seed", "workers"):
        if overrides.get(key) is not None:
            cfg[key] = overrides[key]
    for key in ("mode", "n_e", "xi"):
        if overrides.get(key) is not None:
            cfg["optimizer"][key] = overrides[key]
    if overrides.get("trials") is not None:
        cfg["noise"]["trials"] = overrides["trials"]
    if cfg["optimizer"]["mode"] == "exact":
        cfg["optimizer"]["mode"] = "exact_matrix"
    validate_config({k: v for k, v in cfg.items()}, "<resolved>")
    return cfg


def build_problem(cfg: dict) -> PolynomialProblem:
    prob = cfg["problem"]
    if "preset" in prob:
        return preset_problem(prob["preset"], cfg["direction"])
    return make_problem(np.array(prob["matrix"], dtype=float), prob["p"], cfg["direction"])


def check_budget(problem: PolynomialProblem, n_e: int) -> None:
    total = FIXED_QUBITS + n_e + n_qubits_for(problem.d)
    if total > MAX_QUBITS:
        raise ConfigError(f"optimizer.n_e: {total} qubits needed, dense simulation is capped at {MAX_QUBITS}")


def optimizer_config(cfg: dict, n_e: int | None = None) -> OptimizerConfig:
    o = cfg["optimizer"]
    return OptimizerConfig(
        xi=o["xi"],
        max_iters=o["max_iters"],
        stop_tol=o["stop_tol"],
        mode=o["mode"],
        phase_config=PhaseEstimateConfig(chi=n_e or o["n_e"]),
        direction=cfg["direction"],
        seed=cfg["seed"],
        margin=o["margin"],
        postselect=o["postselect"],
    )


def noise_config(cfg: dict) -> NoiseConfig:
    n = cfg["noise"]
    return NoiseConfig(
        init_amplitude=n["init_amplitude"],
        d_strength=n["d_strength"],
        trials=n["trials"],
        register_sizes=tuple(n["register_sizes"]),
        seed=cfg["seed"],
        resample_d=n["resample_d"],
    )


def _fmt(v: float) -> str:
    return "%.17g" % v


def emit_trace(trace: IterationTrace, problem: PolynomialProblem, path) -> None:
    d = problem.d
    header = ["iter"] + [f"x_{i}" for i in range(d)] + ["f", "grad_norm", "p_succ", "cos_gamma"]
    x0 = trace.x0
    rows = [[0, *x0, trace.f0, trace.grad_norm0, float("nan"), 1.0 / np.sqrt(1.0 + float(x0 @ x0))]]
    for i, s in enumerate(trace.steps, start=1):
        rows.append([i, *s.x_next, s.f_next, s.grad_norm, s.p_succ_measured, s.cos_gamma])
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for r in rows:
            fh.write(",".join([str(r[0])] + [_fmt(float(v)) for v in r[1:]]) + "\n")


def trace_summary(trace: IterationTrace, cfg: dict, **extra) -> dict:
    out = {
        "config": cfg,
        "termination": trace.termination,
        "final_x": [float(v) for v in trace.final_x],
        "final_f": float(trace.final_f),
        "min_p_succ": float(trace.min_p_succ),
        "iterations": trace.iterations,
    }
    out.update(extra)
    return out


def write_json(obj, path) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")


def _write_run(out: Path, stem: str, trace, problem, cfg, **extra) -> dict:
    emit_trace(trace, problem, out / f"{stem}.csv")
    summary = trace_summary(trace, cfg, csv=f"{stem}.csv", **extra)
    write_json(summary, out / f"{stem}.json")
    return summary


def _run_starts(cfg, problem, out: Path, prefix: str, mode: str | None = None) -> list[dict]:
    from concurrent.futures import ThreadPoolExecutor

    c = copy.deepcopy(cfg)
    if mode:
        c["optimizer"]["mode"] = mode
    oc = optimizer_config(c)
    if oc.mode == "circuit":
        check_budget(problem, oc.phase_config.chi)

    def one(x0):
        return run(problem, x0, oc)

    with ThreadPoolExecutor(max_workers=c["workers"]) as pool:
        traces = list(pool.map(one, c["starts"]))
    return [_write_run(out, f"{prefix}{i}", tr, problem, c, start=s) for i, (s, tr) in enumerate(zip(c["starts"], traces))]


def cmd_run(cfg, out: Path) -> dict:
    problem = build_problem(cfg)
    return {"config": cfg, "runs": _run_starts(cfg, problem, out, "trace_")}


def cmd_sweep_noise(cfg, out: Path) -> dict:
    problem = build_problem(cfg)
    oc = optimizer_config(cfg)
    if oc.mode == "circuit":
        check_budget(problem, oc.phase_config.chi)
    noise = noise_config(cfg)
    runs = []
    for si, x0 in enumerate(cfg["starts"]):
        results = run_trials(problem, x0, oc, noise, workers=cfg["workers"])
        for ti, (start, tr) in enumerate(results):
            runs.append(_write_run(out, f"start{si}_trial{ti}", tr, problem, cfg, start=[float(v) for v in start]))
    return {"config": cfg, "runs": runs}


def cmd_sweep_register(cfg, out: Path) -> dict:
    problem = build_problem(cfg)
    sizes = cfg["noise"]["register_sizes"]
    for n in sizes:
        check_budget(problem, n)
    oc = optimizer_config(cfg)
    runs = []
    for si, x0 in enumerate(cfg["starts"]):
        traces = sweep_register_sizes(problem, x0, oc, sizes, workers=cfg["workers"])
        for n, tr in traces.items():
            runs.append(_write_run(out, f"start{si}_ne{n}", tr, problem, cfg, start=x0, n_e=n))
    return {"config": cfg, "runs": runs}


def cmd_reproduce_f1(cfg, out: Path) -> dict:
    """Both start points, then the e-register sweep from the first start."""
    problem = build_problem(cfg)
    runs = _run_starts(cfg, problem, out, "trace_")
    sweep_cfg = copy.deepcopy(cfg)
    sweep_cfg["starts"] = cfg["starts"][:1]
    sweep = cmd_sweep_register(sweep_cfg, out)["runs"]
    return {"config": cfg, "runs": runs, "register_sweep": sweep}


def cmd_reproduce_f2(cfg, out: Path) -> dict:
    problem = build_problem(cfg)
    return {"config": cfg, "runs": _run_starts(cfg, problem, out, "trace_")}


def cmd_validate(cfg, out: Path | None) -> dict:
    problem = build_problem(cfg)
    if cfg["optimizer"]["mode"] == "circuit":
        check_budget(problem, cfg["optimizer"]["n_e"])
    return {"config": cfg, "d": problem.d, "p": problem.p, "scale_factor": problem.scale_factor}


COMMANDS = {
    "run": cmd_run,
    "sweep-noise": cmd_sweep_noise,
    "sweep-register": cmd_sweep_register,
    "reproduce-f1": cmd_reproduce_f1,
    "reproduce-f2": cmd_reproduce_f2,
    "validate": cmd_validate,
}

PRESET_FOR = {"reproduce-f1": "f1", "reproduce-f2": "f2"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qgrad", description="Dressed-state quantum gradient experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="JSON experiment file")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", type=Path, default=Path("out"))
        p.add_argument("--mode", choices=["exact", "circuit"])
        p.add_argument("--ne", type=int, help="e-register width")
        p.add_argument("--xi", type=float, help="learning rate tan^2(eta)")
        p.add_argument("--trials", type=int)
        p.add_argument("--workers", type=int)
    return parser


def run_command(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ConfigError("--seed: must fit in an unsigned 64-bit integer")
        raw = load_config(args.config) if args.config else {}
        if args.command in PRESET_FOR:
            raw.setdefault("problem", {"preset": PRESET_FOR[args.command]})
        overrides = {
            "seed": args.seed,
            "mode": args.mode,
            "n_e": args.ne,
            "xi": args.xi,
            "trials": args.trials,
            "workers": args.workers,
        }
        cfg = resolve_config(raw, overrides)
        if args.command == "validate":
            print(json.dumps(cmd_validate(cfg, None), indent=2, sort_keys=True))
            return 0
        args.out.mkdir(parents=True, exist_ok=True)
        summary = COMMANDS[args.command](cfg, args.out)
        write_json(summary, args.out / "summary.json")
    except (ConfigError, jsonschema.ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for r in summary.get("runs", []) + summary.get("register_sweep", []):
        print(f"{r['csv']}: {r['termination']} after {r['iterations']} steps, x = {r['final_x']}")
    return 0


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
