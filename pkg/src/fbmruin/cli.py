"""Command-line front end: resolve a config, run one experiment, write artifacts.

Every run writes three files into ``--out``:

    config.json   the fully resolved configuration (config file + flag overrides)
    results.json  tool version, master_seed, a ``timestamp`` field and the results
    results.csv   the flat table used for plotting

Exit codes: 0 success, 1 configuration error, 2 statistical infeasibility
(no ruins or too few conditional hits), 3 internal invariant breach.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import Constants, Intermediate, Long, Short, psi_gamma
from .constants import (
    alpha2_quadrature,
    pickands_closed_form,
    pickands_estimate,
    piterbarg_closed_form,
    piterbarg_estimate,
    tilde_piterbarg_closed_form,
    tilde_piterbarg_estimate,
)
from .errors import ConfigError, FbmRuinError, InfeasibleRareEvent, InvariantBreach, MissingConstant, TooFewObservations
from .field import (
    FieldParams,
    certify_slope_negativity,
    correlation_residuals,
    expansion_residuals,
    locate_variance_max,
    write_landscape_csv,
)
from .montecarlo import (
    ExperimentSpec,
    brownian_ruin_probability,
    compare_mc_vs_asymptotic,
    estimate_ruin_prob,
    gamma_ratio_ladder,
    ks_statistic,
    long_horizon_phi_ladder,
    sample_conditional_losses,
    sample_conditional_ruin_times,
)
from .reflection import ModelParams

COMMANDS = ("ruin-prob", "ruin-time", "losses", "constants", "field", "compare")

_MODEL_DEFAULTS = {
    "hurst": 0.5,
    "drift": 1.0,
    "gamma": 0.0,
    "u": 1.0,
    "scenario": "long",
    "s0": 0.5,
    "x": "inf",
    "horizon_scale": 1.0,
    "horizon_power": 0.0,
    "grid_n": 4096,
    "horizon": None,
    "reps": 10000,
    "pickands": None,
    "piterbarg": None,
}

DEFAULTS = {
    "ruin-prob": dict(_MODEL_DEFAULTS),
    "ruin-time": dict(_MODEL_DEFAULTS),
    "losses": dict(_MODEL_DEFAULTS),
    "constants": {"kind": "pickands", "alpha": [2.0], "b": [1.0], "S": 20.0, "step": 0.01,
                  "reps": 2000, "method": "shifted"},
    "field": {"task": "sweep", "hurst": 0.5, "gamma": 0.5, "drift": 1.0, "fraction": 0.5, "resolution": 200,
              "radius": 0.05, "hurst_grid": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9],
              "gamma_grid": [round(0.05 * k, 2) for k in range(1, 20)],
              "fraction_grid": [0.1, 0.25, 0.5, 0.75, 0.9, 0.99], "s_points": 1000},
    "compare": dict(_MODEL_DEFAULTS, ladder="brownian", u_values=[0.5, 1.0, 1.5],
                    x_values=[-1.0, 0.0, 1.0]),
}
_COMMON = {"seed": 0, "threads": 1}

_LIST_KEYS = {"alpha", "b", "u_values", "x_values", "hurst_grid", "gamma_grid", "fraction_grid", "reps_list"}


def _parse_list(text):
    return [float(v) for v in str(text).split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fbmruin", description="Ruin experiments for reflected fractional Brownian motion.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="JSON config; flags override its entries")
        p.add_argument("--seed", type=int)
        p.add_argument("--threads", type=int)
        p.add_argument("--out", type=Path, default=Path("runs") / name)
        if name in ("constants",):
            p.add_argument("--kind", choices=["pickands", "piterbarg", "tilde_piterbarg"])
            p.add_argument("--alpha", type=_parse_list, help="comma-separated alpha values")
            p.add_argument("--b", type=_parse_list, help="comma-separated b values")
            p.add_argument("--S", type=float, dest="S")
            p.add_argument("--step", type=float)
            p.add_argument("--reps", type=int)
            p.add_argument("--method", choices=["shifted", "direct"])
            continue
        p.add_argument("--hurst", type=float)
        p.add_argument("--drift", type=float)
        p.add_argument("--gamma", type=float)
        if name == "field":
            p.add_argument("--task", choices=["sweep", "landscape", "residuals", "max"])
            p.add_argument("--fraction", type=float, help="d as a fraction of H/(1-H)")
            p.add_argument("--resolution", type=int)
            p.add_argument("--radius", type=float)
            p.add_argument("--s-points", type=int, dest="s_points")
            continue
        p.add_argument("--u", type=float)
        p.add_argument("--scenario", choices=["short", "intermediate", "long"])
        p.add_argument("--s0", type=float)
        p.add_argument("--x", type=str, help="real number or 'inf'")
        p.add_argument("--horizon-scale", type=float, dest="horizon_scale")
        p.add_argument("--horizon-power", type=float, dest="horizon_power")
        p.add_argument("--grid-n", type=int, dest="grid_n")
        p.add_argument("--horizon", type=float, help="grid horizon; defaults to the realised T_u")
        p.add_argument("--reps", type=int)
        p.add_argument("--pickands", type=float)
        p.add_argument("--piterbarg", type=float)
        if name == "compare":
            p.add_argument("--ladder", choices=["brownian", "gamma-ratio", "phi"])
            p.add_argument("--u-values", type=_parse_list, dest="u_values")
            p.add_argument("--x-values", type=_parse_list, dest="x_values")
    return parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"config error: {message}", file=sys.stderr)
        sys.exit(1)


def resolve_config(args) -> dict:
    """Defaults, then the JSON config file, then explicit flags."""
    cfg = dict(_COMMON, **DEFAULTS[args.command])
    if args.config is not None:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("config", f"cannot read {args.config}: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError("config", "top level must be a JSON object")
        loaded.pop("command", None)
        loaded.pop("version", None)
        for key, value in loaded.items():
            if key not in cfg:
                raise ConfigError(key, f"unknown key for command {args.command!r}")
            cfg[key] = value
    for key, value in vars(args).items():
        if key in cfg and value is not None:
            cfg[key] = value
    for key in _LIST_KEYS & cfg.keys():
        if not isinstance(cfg[key], list):
            cfg[key] = [cfg[key]]
    cfg["command"] = args.command
    cfg["version"] = __version__
    _check_types(cfg)
    return cfg


def _check_types(cfg):
    for key in ("seed", "threads", "grid_n", "reps", "resolution", "s_points"):
        if key in cfg and cfg[key] is not None:
            v = cfg[key]
            if isinstance(v, bool) or not isinstance(v, int):
                raise ConfigError(key, f"must be an integer, got {v!r}")
    if not 0 <= cfg["seed"] < 1 << 64:
        raise ConfigError("seed", "master seed must be a 64-bit unsigned integer")
    if cfg["threads"] < 1:
        raise ConfigError("threads", "need at least one thread")


def _x_value(v):
    try:
        x = float(v)
    except (TypeError, ValueError):
        raise ConfigError("x", f"expected a number or 'inf', got {v!r}") from None
    return x


def _model(cfg):
    params = ModelParams(float(cfg["hurst"]), float(cfg["drift"]), float(cfg["gamma"]))
    kind = cfg["scenario"]
    if kind == "short":
        scenario = Short(float(cfg["horizon_scale"]), float(cfg["horizon_power"]))
    elif kind == "intermediate":
        scenario = Intermediate(float(cfg["s0"]))
    elif kind == "long":
        scenario = Long(_x_value(cfg["x"]))
    else:
        raise ConfigError("scenario", f"unknown scenario {kind!r} (short, intermediate, long)")
    consts = Constants(cfg.get("pickands"), cfg.get("piterbarg"))
    return params, scenario, consts


def _spec(cfg, params, scenario):
    return ExperimentSpec.build(params, float(cfg["u"]), scenario, cfg["grid_n"], cfg["reps"], cfg["seed"],
                                horizon=cfg["horizon"])


def _asymptotic(params, u, scenario, consts):
    try:
        return psi_gamma(params, u, scenario, consts).to_dict()
    except MissingConstant as exc:
        return {"unavailable": str(exc)}


def cmd_ruin_prob(cfg):
    params, scenario, consts = _model(cfg)
    spec = _spec(cfg, params, scenario)
    est = estimate_ruin_prob(spec, cfg["threads"])
    result = {"spec": spec.to_dict(), "estimate": est.to_dict(),
              "asymptotic": _asymptotic(params, spec.u, scenario, consts)}
    row = dict(est.to_dict(), u=spec.u, horizon=spec.horizon, step=spec.grid.step)
    if params.hurst == 0.5 and params.gamma == 0:
        exact = brownian_ruin_probability(params, spec.u, scenario.horizon(params, spec.u))
        result["exact"] = exact
        row["exact"] = exact
    return result, [row]


def _conditional(cfg, sampler):
    params, scenario, _ = _model(cfg)
    spec = _spec(cfg, params, scenario)
    sample = sampler(spec, cfg["threads"])
    if len(sample.values) == 0:
        raise InfeasibleRareEvent(spec.replications)
    ks = ks_statistic(sample)
    qs = np.linspace(0.05, 0.95, 19)
    ys = np.quantile(sample.values, qs)
    law_cdf = sample.law_expected.cdf(ys)
    rows = [{"y": float(y), "empirical_cdf": float(np.mean(sample.values <= y)), "law_cdf": float(f)}
            for y, f in zip(ys, law_cdf)]
    result = {"spec": spec.to_dict(), "sample": sample.to_dict(), "n_hits": int(len(sample.values)),
              "ks": ks, "law": sample.law_expected.to_dict()}
    return result, rows


def cmd_ruin_time(cfg):
    return _conditional(cfg, sample_conditional_ruin_times)


def cmd_losses(cfg):
    return _conditional(cfg, sample_conditional_losses)


_ESTIMATORS = {
    "pickands": (pickands_estimate, pickands_closed_form),
    "piterbarg": (piterbarg_estimate, piterbarg_closed_form),
    "tilde_piterbarg": (tilde_piterbarg_estimate, tilde_piterbarg_closed_form),
}
_QUAD_KIND = {"pickands": "Pickands", "piterbarg": "Piterbarg", "tilde_piterbarg": "TildePiterbarg"}


def cmd_constants(cfg):
    kind = cfg["kind"]
    if kind not in _ESTIMATORS:
        raise ConfigError("kind", f"unknown constant {kind!r}")
    estimate, closed = _ESTIMATORS[kind]
    b_values = [None] if kind == "pickands" else cfg["b"]
    rows = []
    for alpha in cfg["alpha"]:
        for b in b_values:
            extra = {} if b is None else {"b": float(b)}
            est = estimate(float(alpha), S=float(cfg["S"]), grid_step=float(cfg["step"]),
                           replications=cfg["reps"], seed=cfg["seed"], method=cfg["method"], **extra)
            row = est.to_dict()
            try:
                row["closed_form"] = closed(float(alpha), *extra.values())
            except MissingConstant:
                row["closed_form"] = None
            if alpha == 2:
                row["quadrature_at_S"] = alpha2_quadrature(_QUAD_KIND[kind], b or 0.0, float(cfg["S"]))
            ref = row.get("quadrature_at_S") or row["closed_form"]
            row["relative_error"] = None if ref is None else est.value / ref - 1
            rows.append(row)
    return {"estimates": rows}, rows


def cmd_field(cfg, out_dir):
    task = cfg["task"]
    if task == "sweep":
        report = certify_slope_negativity(cfg["hurst_grid"], cfg["gamma_grid"], cfg["fraction_grid"],
                                          cfg["s_points"])
        summary = {"status": "PASS" if report.passed else "FAIL", **report.to_dict()}
        return summary, [{"status": summary["status"], "max_f_d": report.max_value,
                          "evaluations": report.evaluations, "out_of_scope": len(report.out_of_scope)}]
    fp = FieldParams.from_fraction(float(cfg["hurst"]), float(cfg["gamma"]), float(cfg["fraction"]),
                                   float(cfg["drift"]))
    if task == "landscape":
        write_landscape_csv(fp, out_dir / "results.csv", cfg["resolution"])
        return {"d": fp.d, "resolution": cfg["resolution"], "csv": "results.csv"}, None
    if task == "max":
        vm = locate_variance_max(fp, cfg["resolution"])
        row = {"s": vm.s, "t": vm.t, "v": vm.v, "expected_v": vm.expected_v, "status": "PASS" if vm.passed else "FAIL"}
        return dict(row, d=fp.d), [row]
    if task == "residuals":
        sig = expansion_residuals(fp, float(cfg["radius"]))
        cor = correlation_residuals(fp, float(cfg["radius"]))
        rows = [{"radius": r, "sigma_ratio": a, "correlation_relative_error": b}
                for r, a, b in zip(sig["radii"], sig["ratios"], cor["relative_errors"])]
        return {"d": fp.d, "sigma": sig, "correlation": cor}, rows
    raise ConfigError("task", f"unknown field task {task!r}")


def cmd_compare(cfg):
    params, scenario, consts = _model(cfg)
    ladder = cfg["ladder"]
    u_values = [float(u) for u in cfg["u_values"]]
    if ladder == "brownian":
        report = compare_mc_vs_asymptotic(params, u_values, scenario, cfg["grid_n"], cfg["reps"],
                                          cfg["seed"], consts, cfg["threads"])
    elif ladder == "gamma-ratio":
        report = gamma_ratio_ladder(params, u_values, scenario, cfg["grid_n"], cfg["reps"],
                                    cfg["seed"], consts, cfg["threads"])
    elif ladder == "phi":
        report = long_horizon_phi_ladder(params, float(cfg["u"]), [float(x) for x in cfg["x_values"]],
                                         cfg["grid_n"], cfg["reps"], cfg["seed"], cfg["threads"])
    else:
        raise ConfigError("ladder", f"unknown ladder {ladder!r}")
    return report.to_dict(), report.rows


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return None if math.isnan(v) else v
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def _write_csv(path, rows):
    keys = []
    for row in rows:
        keys += [k for k in row if k not in keys]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=keys, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _csv_cell(row.get(k)) for k in keys})


def _csv_cell(v):
    v = _jsonable(v)
    if isinstance(v, float):
        return f"{v:.17g}"
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True)
    return "" if v is None else v


def run(cfg, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.json").write_text(json.dumps(_jsonable(cfg), indent=2, sort_keys=True) + "\n")
    command = cfg["command"]
    if command == "field":
        result, rows = cmd_field(cfg, out_dir)
    else:
        handler = {"ruin-prob": cmd_ruin_prob, "ruin-time": cmd_ruin_time, "losses": cmd_losses,
                   "constants": cmd_constants, "compare": cmd_compare}[command]
        result, rows = handler(cfg)
    payload = {"version": __version__, "command": command, "master_seed": cfg["seed"],
               "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"), "results": result}
    (out_dir / "results.json").write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")
    if rows is not None:
        _write_csv(out_dir / "results.csv", rows)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        run(cfg, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (InfeasibleRareEvent, TooFewObservations) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 2
    except InvariantBreach as exc:
        print(f"invariant breach: {exc}", file=sys.stderr)
        return 3
    except FbmRuinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
