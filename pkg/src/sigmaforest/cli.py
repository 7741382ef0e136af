"""Command-line entry point.

Subcommands: verify, sample, compare-pinning, ladder-decay, independence.
Exit codes: 0 success, 1 scientific check failure, 2 usage/config error,
3 numerical failure.  Identical config (including seed) produces
byte-identical output files; every CSV/JSON/JSONL file starts with a
header block echoing the config and the artifact version.
"""

from __future__ import annotations

import argparse
import json
import sys

from pathlib import Path

import numpy as np

from . import __version__
from .experiments import compare_pinning_sweep, independence_test, ladder_decay
from .graphs import (GraphError, Pinning, PinningError, augment, build_ladder,
                     ladder_spec, read_graph_file)
from .linalg import NumericalError
from .mcmc import McmcConfig, SamplerError, run_chain, write_jsonl
from .oracle import run_verification

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class ConfigError(ValueError):
    pass


def _float_fmt(v: float) -> str:
    return repr(float(v))


def _read_config_file(path: str) -> dict[str, str]:
    """Optional `key = value` file with `#` comments; flags override it."""
    out: dict[str, str] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"bad config line: {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _add_shared_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value config file, overridden by flags")
    p.add_argument("--graph", help="graph file: `n m` then `i j beta` lines")
    p.add_argument("--ladder-base", help="graph file for the ladder base G0")
    p.add_argument("--ladder-L", help="MINUS,PLUS ladder extents")
    p.add_argument("--beta-vertical", type=float, default=1.0)
    p.add_argument("--beta-horizontal", type=float, default=1.0)
    p.add_argument("--pi", default="1.0",
                   help="pinning profile: uniform value, `delta:X`, or comma list")
    p.add_argument("--eps", default="0.1", help="epsilon or comma list, decreasing")
    p.add_argument("--pair", action="append", default=None,
                   help="X,Y vertex pair (repeatable)")
    p.add_argument("--samples", type=int, default=20000)
    p.add_argument("--burn-in", type=int, default=4000)
    p.add_argument("--thin", type=int, default=1)
    p.add_argument("--step-size", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".", help="output directory")


def _apply_config_file(args: argparse.Namespace, parser_defaults: dict) -> None:
    if not getattr(args, "config", None):
        return
    file_vals = _read_config_file(args.config)
    for key, value in file_vals.items():
        if not hasattr(args, key):
            raise ConfigError(f"unknown config key {key!r}")
        # Flags win: only take the file value where the flag kept its default.
        if getattr(args, key) != parser_defaults.get(key):
            continue
        current = parser_defaults.get(key)
        if isinstance(current, bool):
            value = value.lower() in ("1", "true", "yes")
        elif isinstance(current, int):
            value = int(value)
        elif isinstance(current, float):
            value = float(value)
        setattr(args, key, value)


def _load_graph(args) -> tuple:
    """Returns (graph, ladder_spec_or_None)."""
    if args.graph and args.ladder_base:
        raise ConfigError("give either --graph or --ladder-base, not both")
    if args.graph:
        return read_graph_file(args.graph), None
    if args.ladder_base:
        if not args.ladder_L:
            raise ConfigError("--ladder-base requires --ladder-L MINUS,PLUS")
        base = read_graph_file(args.ladder_base)
        try:
            lm, lp = (int(v) for v in args.ladder_L.split(","))
        except ValueError as exc:
            raise ConfigError(f"bad --ladder-L {args.ladder_L!r}") from exc
        spec = ladder_spec(base, lm, lp, args.beta_vertical, args.beta_horizontal)
        return build_ladder(spec), spec
    raise ConfigError("no graph source: give --graph or --ladder-base")


def _parse_pi(spec: str, n: int) -> tuple[float, ...]:
    spec = spec.strip()
    if spec.startswith("delta:"):
        x = int(spec.split(":", 1)[1])
        if not (1 <= x <= n):
            raise ConfigError(f"delta pinning vertex {x} out of range")
        return tuple(1.0 if i == x - 1 else 0.0 for i in range(n))
    parts = [float(v) for v in spec.split(",")]
    if len(parts) == 1:
        return (parts[0],) * n
    if len(parts) != n:
        raise ConfigError(f"pi list has {len(parts)} entries, graph has {n}")
    return tuple(parts)


def _parse_eps(spec: str) -> list[float]:
    eps = [float(v) for v in spec.split(",")]
    if any(e <= 0 for e in eps):
        raise ConfigError("epsilon values must be positive")
    return eps


def _parse_pairs(args, n: int) -> list[tuple[int, int]]:
    if not args.pair:
        raise ConfigError("need at least one --pair X,Y")
    pairs = []
    for item in args.pair:
        try:
            x, y = (int(v) for v in item.split(","))
        except ValueError as exc:
            raise ConfigError(f"bad --pair {item!r}") from exc
        if not (1 <= x <= n and 1 <= y <= n):
            raise ConfigError(f"pair {item} out of range")
        pairs.append((x, y))
    return pairs


def _mcmc_config(args) -> McmcConfig:
    return McmcConfig(step_size=args.step_size, n_samples=args.samples,
                      burn_in=args.burn_in, thinning=args.thin, seed=args.seed)


def _config_echo(args) -> dict:
    skip = {"config", "func", "out"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _header_lines(args) -> list[str]:
    lines = [f"# sigmaforest {__version__}"]
    for k, v in _config_echo(args).items():
        lines.append(f"# {k} = {v}")
    return lines


def _json_default(obj):
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _write_json(path: Path, args, payload: dict) -> None:
    doc = {"version": __version__, "config": _config_echo(args)}
    doc.update(payload)
    path.write_text(json.dumps(doc, sort_keys=True, indent=2,
                               default=_json_default) + "\n")


def _est_dict(est) -> dict:
    return {"mean": est.mean, "std_error": est.std_error,
            "n_effective": est.n_effective}


def cmd_verify(args) -> int:
    results = run_verification(max_vertices=args.max_vertices, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = [r.to_dict() for r in results]
    _write_json(out / "verify_report.json", args,
                {"results": report, "n_checks": len(report),
                 "n_failed": sum(not r.passed for r in results)})
    n_failed = sum(not r.passed for r in results)
    print(f"verify: {len(results)} identity checks, {n_failed} failed")
    return EXIT_OK if n_failed == 0 else EXIT_CHECK_FAILED


def cmd_sample(args) -> int:
    g, _ = _load_graph(args)
    pi = _parse_pi(args.pi, g.n)
    eps = _parse_eps(args.eps)
    if len(eps) != 1:
        raise ConfigError("sample takes a single --eps value")
    ag = augment(g, Pinning(pi=pi, epsilon=eps[0]))
    batch = run_chain(ag, _mcmc_config(args))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_jsonl(batch, out / "batch.jsonl",
                extra_header={"version": __version__, "cli_config": _config_echo(args)})
    from .report import plot_trace
    plot_trace(batch, out / "trace.png")
    print(f"sample: {len(batch)} draws, acceptance {batch.acceptance_rate:.3f}, "
          f"min ESS {min(len(batch) / batch.iact):.0f}")
    return EXIT_OK


def cmd_compare_pinning(args) -> int:
    g, _ = _load_graph(args)
    pi = _parse_pi(args.pi, g.n)
    pairs = _parse_pairs(args, g.n)
    if len(pairs) != 1:
        raise ConfigError("compare-pinning takes exactly one --pair")
    x, y = pairs[0]
    eps_list = _parse_eps(args.eps)
    sweep = compare_pinning_sweep(g, pi, x, y, eps_list, _mcmc_config(args))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cols = ("epsilon,eps_green_mean,eps_green_se,singlepin_x_mean,singlepin_x_se,"
            "singlepin_y_mean,singlepin_y_se,one_root_mean,one_root_se,"
            "multi_root_mean,multi_root_se,ess_min")
    lines = _header_lines(args) + [cols]
    for r in sweep.rows:
        vals = [r.epsilon, r.eps_green.mean, r.eps_green.std_error,
                r.single_pin_x.mean, r.single_pin_x.std_error,
                r.single_pin_y.mean, r.single_pin_y.std_error,
                r.one_root.mean, r.one_root.std_error,
                r.multi_root.mean, r.multi_root.std_error, r.ess_min]
        lines.append(",".join(_float_fmt(v) for v in vals))
    (out / "compare_pinning.csv").write_text("\n".join(lines) + "\n")
    _write_json(out / "compare_pinning.json", args, {
        "rows": [{"epsilon": r.epsilon,
                  "eps_green": _est_dict(r.eps_green),
                  "single_pin_x": _est_dict(r.single_pin_x),
                  "single_pin_y": _est_dict(r.single_pin_y),
                  "one_root": _est_dict(r.one_root),
                  "multi_root": _est_dict(r.multi_root),
                  "ess_min": r.ess_min} for r in sweep.rows],
        "comparison_holds_3se": sweep.comparison_holds(),
    })
    from .report import plot_sweep
    plot_sweep(sweep, out / "compare_pinning.png")
    print(f"compare-pinning: {len(sweep.rows)} epsilon cells; "
          f"theorem inequality at smallest eps: "
          f"{'holds' if sweep.comparison_holds() else 'VIOLATED'}")
    return EXIT_OK if sweep.comparison_holds() else EXIT_CHECK_FAILED


def cmd_ladder_decay(args) -> int:
    if not args.ladder_base:
        raise ConfigError("ladder-decay requires --ladder-base/--ladder-L")
    _, spec = _load_graph(args)
    eps = _parse_eps(args.eps)
    if len(eps) != 1:
        raise ConfigError("ladder-decay takes a single --eps value")
    g = build_ladder(spec)
    pairs = _parse_pairs(args, g.n)
    pi_vals = set(_parse_pi(args.pi, g.n))
    if len(pi_vals) != 1:
        raise ConfigError("ladder-decay uses a uniform pi profile")
    fit = ladder_decay(spec, pi_vals.pop(), eps[0], pairs, _mcmc_config(args))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lines = _header_lines(args) + ["x,y,distance,eps_green_mean,eps_green_se"]
    for (x, y), d, est in zip(fit.pairs, fit.distances, fit.estimates):
        lines.append(",".join([str(x), str(y), str(d),
                               _float_fmt(est.mean), _float_fmt(est.std_error)]))
    (out / "ladder_decay.csv").write_text("\n".join(lines) + "\n")
    lo, hi = fit.slope_ci()
    _write_json(out / "ladder_decay.json", args, {
        "slope": fit.slope, "slope_se": fit.slope_se,
        "slope_ci99": [lo, hi], "intercept": fit.intercept,
        "residual": fit.residual, "c3": fit.c3,
        "decay_confirmed": hi < 0.0,
    })
    from .report import plot_decay
    plot_decay(fit, out / "ladder_decay.png")
    print(f"ladder-decay: slope {fit.slope:.4f} (99% CI [{lo:.4f}, {hi:.4f}])")
    return EXIT_OK if hi < 0.0 else EXIT_CHECK_FAILED


def cmd_independence(args) -> int:
    g, _ = _load_graph(args)
    pi = _parse_pi(args.pi, g.n)
    positive = [i + 1 for i, p in enumerate(pi) if p > 0]
    if len(positive) != 1:
        raise ConfigError("independence requires pinning at exactly one vertex "
                          "(`--pi delta:X`)")
    x = positive[0]
    eps = _parse_eps(args.eps)
    report = independence_test(g, x, eps[0] * pi[x - 1], _mcmc_config(args))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "independence.json", args, {
        "correlation_pvalues": report.correlation_pvalues,
        "ks_pvalue_tx": report.ks_pvalue_tx,
        "ks_pvalues_gradients": report.ks_pvalues_gradients,
        "ward": _est_dict(report.ward_estimate),
        "level": report.level,
        "all_pass": report.all_pass,
    })
    from .report import plot_independence
    plot_independence(report, out / "independence.png")
    print(f"independence: {'all statistics pass' if report.all_pass else 'REJECTED'} "
          f"at level {report.level}")
    return EXIT_OK if report.all_pass else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sigmaforest",
        description="Rooted-spanning-forest laboratory for the pinned "
                    "hyperbolic sigma model")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run the exact-identity oracle suite")
    p.add_argument("--max-vertices", type=int, default=7)
    p.add_argument("--seed", type=int, default=1234)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_verify)

    for name, fn, doc in (
        ("sample", cmd_sample, "draw a decorated MCMC batch"),
        ("compare-pinning", cmd_compare_pinning, "pinning-comparison sweep"),
        ("ladder-decay", cmd_ladder_decay, "correlation decay on a ladder"),
        ("independence", cmd_independence, "single-pin product-structure test"),
    ):
        p = sub.add_parser(name, help=doc)
        _add_shared_flags(p)
        p.set_defaults(func=fn)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    defaults = {a.dest: a.default for a in parser._subparsers._group_actions[0]
                .choices[args.command]._actions}
    try:
        _apply_config_file(args, defaults)
        return args.func(args)
    except (ConfigError, GraphError, PinningError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, SamplerError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
