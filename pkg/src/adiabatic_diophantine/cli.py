"""Command-line front end.

Subcommands: ``decide``, ``spectral``, ``twolevel``, ``sample``, ``oracle``.
``decide`` exits 0 when a solution exists, 1 when none does, 2 when the run
is inconclusive and 3 on any error.

A run can be described by a YAML file; command-line flags override it::

    equation: "x1 - 2"
    alphas: [1.0]
    cutoff: 16
    gamma: 0
    seed: 0
    schedule: {t0: 1, doublings: 12, margin: 0.02}
    steps: {per_unit: 100, min: 64, max: 2000}
    tolerances: {extrapolation: 1.0e-3, truncation: 1.0e-4, coherent: 1.0e-5}
    sampling: {enabled: false, epsilon: 0.1, delta: 0.05}
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .diophantine import ParseError, parse, search_box
from .evolve import EvolutionConfig, evolve, spectral_diameter, suggested_steps
from .fock import BasisIndexer, CoherentParams, build_HI, build_HP, coherent_state
from .protocol import (
    INCONCLUSIVE,
    NO_SOLUTION,
    SOLUTION,
    ProblemConfig,
    decide,
    plan_repetitions,
    simulate_measurements,
)
from .spectral import default_grid, gap_profile, spectral_flow, write_spectral_csv
from .twolevel import FIG1_PRESETS, TwoLevelProblem, check_condition, sweep_T

EXIT_CODES = {SOLUTION: 0, NO_SOLUTION: 1, INCONCLUSIVE: 2}
EXIT_ERROR = 3

log = logging.getLogger("adiabatic_diophantine")


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"config error at {path}: {message}")


# key path in the YAML file -> ProblemConfig field
_CONFIG_FIELDS = {
    "alphas": "alphas",
    "cutoff": "cutoff",
    "gamma": "gamma",
    "gamma_mode": "gamma_mode",
    "seed": "seed",
    "gap_points": "gap_points",
    "schedule.t0": "t0",
    "schedule.doublings": "doublings",
    "schedule.margin": "margin",
    "steps.fixed": "steps",
    "steps.per_unit": "steps_per_unit",
    "steps.min": "min_steps",
    "steps.max": "max_steps",
    "tolerances.extrapolation": "extrapolation_tol",
    "tolerances.truncation": "truncation_tol",
    "tolerances.coherent": "coherent_tol",
    "truncation.cutoffs": "truncation_cutoffs",
    "sampling.enabled": "sampling",
    "sampling.epsilon": "epsilon",
    "sampling.delta": "delta",
}
_EXTRA_KEYS = {"equation", "arity", "mixing", "bound", "T", "preset"}


def _flatten(tree, prefix=""):
    for key, value in tree.items():
        path = f"{prefix}{key}"
        if isinstance(value, dict):
            yield from _flatten(value, path + ".")
        else:
            yield path, value


def _parse_complex(text, path):
    if isinstance(text, (list, tuple)) and len(text) == 2:
        return complex(float(text[0]), float(text[1]))
    try:
        return complex(str(text).replace(" ", ""))
    except ValueError:
        raise ConfigError(path, f"not a complex number: {text!r}") from None


def load_config(path) -> dict:
    """Read a YAML run file into a flat ``{key path: value}`` dict."""
    try:
        tree = yaml.safe_load(Path(path).read_text()) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError("<file>", str(exc)) from None
    if not isinstance(tree, dict):
        raise ConfigError("<root>", "expected a mapping")
    flat = dict(_flatten(tree))
    for key in flat:
        if key not in _CONFIG_FIELDS and key not in _EXTRA_KEYS:
            raise ConfigError(key, "unknown key")
    return flat


def _problem_config(flat: dict) -> ProblemConfig:
    kwargs = {}
    for key, value in flat.items():
        name = _CONFIG_FIELDS.get(key)
        if name is None or value is None:
            continue
        try:
            if name == "alphas":
                values = value if isinstance(value, list) else [value]
                kwargs[name] = tuple(_parse_complex(v, f"{key}[{i}]") for i, v in enumerate(values))
            elif name == "gamma":
                kwargs[name] = _parse_complex(value, key)
            elif name in {"cutoff", "gamma_mode", "seed", "gap_points", "doublings", "steps", "min_steps", "max_steps"}:
                kwargs[name] = _strict_int(value, key)
            elif name == "truncation_cutoffs":
                kwargs[name] = tuple(_strict_int(v, f"{key}[{i}]") for i, v in enumerate(value))
            elif name == "sampling":
                kwargs[name] = bool(value)
            else:
                kwargs[name] = float(value)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(key, str(exc)) from None
    checks = {
        "cutoff": ("cutoff", lambda v: v >= 1, "must be >= 1"),
        "t0": ("schedule.t0", lambda v: v > 0, "must be > 0"),
        "doublings": ("schedule.doublings", lambda v: v >= 0, "must be >= 0"),
        "margin": ("schedule.margin", lambda v: 0 <= v < 0.5, "must lie in [0, 0.5)"),
        "epsilon": ("sampling.epsilon", lambda v: 0 < v < 1, "must lie in (0, 1)"),
        "delta": ("sampling.delta", lambda v: 0 < v < 1, "must lie in (0, 1)"),
    }
    for name, (path, ok, msg) in checks.items():
        if name in kwargs and not ok(kwargs[name]):
            raise ConfigError(path, msg)
    return ProblemConfig(**kwargs)


def _strict_int(value, path):
    if isinstance(value, bool) or not isinstance(value, int):
        try:
            as_float = float(value)
        except (TypeError, ValueError):
            raise ConfigError(path, f"expected an integer, got {value!r}") from None
        if not as_float.is_integer():
            raise ConfigError(path, f"expected an integer, got {value!r}")
        return int(as_float)
    return value


def _merge_flags(flat: dict, args) -> dict:
    flat = dict(flat)
    overrides = {
        "equation": getattr(args, "equation", None),
        "alphas": getattr(args, "alpha", None),
        "cutoff": getattr(args, "cutoff", None),
        "gamma": getattr(args, "gamma", None),
        "schedule.t0": getattr(args, "t0", None),
        "schedule.doublings": getattr(args, "doublings", None),
        "schedule.margin": getattr(args, "margin", None),
        "seed": getattr(args, "seed", None),
        "sampling.epsilon": getattr(args, "epsilon", None),
        "sampling.delta": getattr(args, "delta", None),
        "mixing": getattr(args, "mixing", None),
        "bound": getattr(args, "bound", None),
        "T": getattr(args, "T", None),
        "preset": getattr(args, "preset", None),
    }
    for key, value in overrides.items():
        if value is None:
            continue
        if key == "alphas":
            value = [v for v in value.split(",") if v.strip()]
        flat[key] = value
    return flat


def _require_equation(flat):
    if "equation" not in flat:
        raise ConfigError("equation", "missing (use --equation or the config file)")
    arity = flat.get("arity")
    return parse(str(flat["equation"]), arity=None if arity is None else _strict_int(arity, "arity"))


def _instance_id(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _write_manifest(out_dir: Path, command: str, config: dict, seed, outputs: dict, started: str) -> Path:
    manifest = {
        "tool": "adiabatic_diophantine",
        "version": __version__,
        "command": command,
        "config": config,
        "seed": seed,
        "instance_id": _instance_id({"command": command, "config": config, "seed": seed}),
        "outputs": outputs,
        "timestamps": {"started": started, "finished": _now()},
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")
    return path


def _now():
    return datetime.now(timezone.utc).isoformat()


def _out_dir(args) -> Path | None:
    if args.out_dir is None:
        return None
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


# --- subcommands ---------------------------------------------------------


def cmd_decide(args, flat) -> int:
    started = _now()
    p = _require_equation(flat)
    cfg = _problem_config(flat)
    verdict = decide(p, cfg)
    text = verdict.to_json(indent=2, sort_keys=True)
    print(text)
    out = _out_dir(args)
    if out is not None:
        (out / "verdict.json").write_text(text + "\n")
        _write_manifest(out, "decide", {"equation": str(p), **verdict.config}, verdict.seed,
                        {"verdict": "verdict.json"}, started)
    return EXIT_CODES[verdict.decision]


def cmd_spectral(args, flat) -> int:
    started = _now()
    p = _require_equation(flat)
    cfg = _problem_config(flat).resolved(p.arity)
    indexer = BasisIndexer.uniform(p.arity, cfg.cutoff)
    params = CoherentParams(cfg.alphas)
    HI, HP = build_HI(indexer, params), build_HP(indexer, p)
    samples = spectral_flow(HI, HP, default_grid(cfg.gap_points))
    gap_min, gap_at = gap_profile(samples)
    summary = {
        "equation": str(p),
        "rows": len(samples),
        "gap_min": gap_min,
        "gap_argmin": gap_at,
        "min_spacing": min(s.min_spacing for s in samples if s.s < 1),
        "degenerate_below_1": [s.s for s in samples if s.s < 1 and s.degenerate],
    }
    out = _out_dir(args) or Path(".")
    write_spectral_csv(out / "spectral.csv", samples)
    summary["csv"] = "spectral.csv"
    print(json.dumps(summary, indent=2, sort_keys=True))
    _write_manifest(out, "spectral", {"equation": str(p), **cfg.to_dict()}, cfg.seed,
                    {"spectral": "spectral.csv"}, started)
    return 0


def cmd_twolevel(args, flat) -> int:
    started = _now()
    preset = flat.get("preset")
    if preset is not None:
        if preset != "fig1":
            raise ConfigError("preset", f"unknown preset {preset!r} (known: fig1)")
        problems = {f"fig1_{k}": pb for k, pb in FIG1_PRESETS.items()}
    else:
        if "mixing" not in flat:
            raise ConfigError("mixing", "missing (use --mixing or --preset fig1)")
        problems = {"twolevel": TwoLevelProblem(mixing=float(flat["mixing"]))}
    out = _out_dir(args) or Path(".")
    summary, outputs = {}, {}
    for name, pb in problems.items():
        res = sweep_T(pb)
        res.write_csv(out / f"{name}.csv")
        outputs[name] = f"{name}.csv"
        summary[name] = {
            "mixing": pb.mixing,
            "condition_holds": check_condition(pb),
            "max_excited": float(res.excited.max()),
            "crosses_half": bool(np.any(res.excited > 0.5)),
            "excited_at_largest_T": float(res.excited[-1]),
        }
    print(json.dumps(summary, indent=2, sort_keys=True))
    _write_manifest(out, "twolevel", {n: pb.__dict__ for n, pb in problems.items()}, None, outputs, started)
    return 0


def cmd_sample(args, flat) -> int:
    started = _now()
    p = _require_equation(flat)
    cfg = _problem_config(flat).resolved(p.arity)
    indexer = BasisIndexer.uniform(p.arity, cfg.cutoff)
    params = CoherentParams(cfg.alphas)
    psi, _ = coherent_state(indexer, params, tol=cfg.coherent_tol)
    T = float(flat.get("T") or 0.0)
    if T > 0:
        HI, HP = build_HI(indexer, params), build_HP(indexer, p)
        n = suggested_steps(T, spectral_diameter(HI, HP), cfg.steps_per_unit, cfg.min_steps, cfg.max_steps)
        psi = evolve(HI, HP, psi, EvolutionConfig(T, n, checkpoints=1)).final_state
    plan = plan_repetitions(cfg.epsilon, cfg.delta)
    result = simulate_measurements(psi, indexer, plan, seed=cfg.seed)
    occ, freq = result.dominant
    report = {
        "equation": str(p),
        "T": T,
        "epsilon": plan.epsilon,
        "delta": plan.delta,
        "repetitions": plan.repetitions,
        "seed": cfg.seed,
        "histogram": [{"occupation": list(k), "count": v} for k, v in sorted(result.counts.items())],
        "dominant": list(occ),
        "frequency": freq,
        "exceeds_half": result.exceeds(0.5),
    }
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    out = _out_dir(args)
    if out is not None:
        (out / "sample.json").write_text(text + "\n")
        _write_manifest(out, "sample", {"equation": str(p), **cfg.to_dict(), "T": T}, cfg.seed,
                        {"sample": "sample.json"}, started)
    return 0


def cmd_oracle(args, flat) -> int:
    p = _require_equation(flat)
    bound = _strict_int(flat.get("bound", 20), "bound")
    if bound < 0:
        raise ConfigError("bound", "must be >= 0")
    witness = search_box(p, bound)
    print(json.dumps({"equation": str(p), "bound": bound,
                      "witness": list(witness) if witness is not None else None}))
    return 0 if witness is not None else 1


COMMANDS = {
    "decide": cmd_decide,
    "spectral": cmd_spectral,
    "twolevel": cmd_twolevel,
    "sample": cmd_sample,
    "oracle": cmd_oracle,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adiabatic-diophantine", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, problem=True):
        p.add_argument("config", nargs="?", help="YAML run file")
        p.add_argument("--out-dir")
        p.add_argument("--seed", type=int)
        p.add_argument("--log-level", default="WARNING")
        if problem:
            p.add_argument("--equation")
            p.add_argument("--alpha", help="comma-separated coherent amplitudes, e.g. 1,1+0.5j")
            p.add_argument("--cutoff", type=int)
        return p

    p = common(sub.add_parser("decide", help="run the adiabatic decision procedure"))
    p.add_argument("--gamma")
    p.add_argument("--t0", type=float)
    p.add_argument("--doublings", type=int)
    p.add_argument("--margin", type=float)

    common(sub.add_parser("spectral", help="eigenvalue flow and gap CSV"))

    p = common(sub.add_parser("twolevel", help="two-state T sweep"), problem=False)
    p.add_argument("--preset", choices=["fig1"])
    p.add_argument("--mixing", type=float)

    p = common(sub.add_parser("sample", help="finite-sample measurement histogram"))
    p.add_argument("--epsilon", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--T", type=float, help="evolve for this time before sampling")

    p = common(sub.add_parser("oracle", help="brute-force zero search"))
    p.add_argument("--bound", type=int)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        flat = load_config(args.config) if args.config else {}
        flat = _merge_flags(flat, args)
        return COMMANDS[args.command](args, flat)
    except ParseError as exc:
        print(json.dumps({"error": "parse", "position": exc.position, "expected": exc.expected,
                          "message": str(exc)}), file=sys.stderr)
        return EXIT_ERROR
    except ConfigError as exc:
        print(json.dumps({"error": "config", "field": exc.path, "message": str(exc)}), file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, OverflowError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
