"""Command-line entry point.

Exit codes: 0 when every check passed, 1 on a verification failure, 2 on a
usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import circle_method as cm
from . import representation_counts as rc
from . import restricted_primes as rp
from . import singular_series as ss
from ._arith import factor, primes_upto
from .reports import (
    ConfigError,
    ExperimentConfig,
    StageError,
    atomic_write,
    config_from_mapping,
    load_config,
    render_csv,
    render_json,
    run_experiment,
    write_report,
)
from .residue_system import MIN_U, ConstructionParams, build_cover, build_system, parse_prime_list
from .triple_decomposition import cover_check, decompose

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _basis_from_args(args) -> tuple[int, ...] | None:
    if getattr(args, "basis", None) and getattr(args, "q0", None):
        raise ConfigError("give either --basis or --q0, not both")
    if getattr(args, "basis", None):
        return parse_prime_list(args.basis)
    if getattr(args, "q0", None):
        q0 = args.q0
        if q0 < 2:
            raise ConfigError("--q0 must be >= 2")
        fac = factor(q0)
        if any(e > 1 for _, e in fac):
            raise ConfigError(f"q0 = {q0} is not squarefree")
        return tuple(p for p, _ in fac)
    return None


def _config(args) -> ExperimentConfig:
    """Config file first, then command-line overrides."""
    cfg = load_config(args.config) if getattr(args, "config", None) else ExperimentConfig()
    raw: dict[str, str] = {}
    basis = _basis_from_args(args)
    if basis is not None:
        raw["basis_override"] = ",".join(map(str, basis))
    for key in ("u", "A", "B", "cutoff", "nodes", "seed", "samples", "threads"):
        val = getattr(args, key, None)
        if val is not None:
            raw[key] = str(val)
    if getattr(args, "m_range", None):
        raw["m_range"] = args.m_range
    if getattr(args, "out", None):
        raw["output_path"] = args.out
    return config_from_mapping(raw, cfg)


def _system(cfg: ExperimentConfig):
    params = ConstructionParams(A=cfg.A, u=max(cfg.u, MIN_U), basis_override=cfg.basis_override, B=cfg.B)
    return build_system(params)


def _emit(text: str, out: str | None) -> None:
    if out:
        atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cmd_construct(args) -> int:
    cfg = _config(args)
    system = _system(cfg)
    primes = rp.restricted_set(system, cfg.u)
    _emit("".join(f"{p}\n" for p in primes), cfg.output_path)
    if args.stats:
        sys.stderr.write(_dump(rp.sparsity_report(system, cfg.u, primes).to_dict()))
    if args.system_json:
        atomic_write(args.system_json, system.to_json() + "\n")
    return EXIT_OK


def cmd_verify_lemma(args) -> int:
    failures = []
    checked = 0
    for p in primes_upto(args.pmax).tolist():
        cover = build_cover(p)
        checked += 1
        try:
            for n in range(p):
                decompose(n, cover)
        except AssertionError as err:
            failures.append({"p": p, "error": str(err)})
            continue
        if not cover_check(cover):
            failures.append({"p": p, "error": "triple sums miss a class"})
    _emit(_dump({"pmax": args.pmax, "primes_checked": checked, "failures": failures}), args.out)
    return EXIT_FAIL if failures else EXIT_OK


def cmd_count(args) -> int:
    cfg = _config(args)
    u = cfg.u
    lo, hi = cfg.m_bounds
    if lo <= hi and not (4 * u <= lo and hi <= 5 * u):
        raise ConfigError(f"m range [{lo}, {hi}] must lie inside [{4 * u}, {5 * u}]")
    system = _system(cfg)
    window = rp.weighted_window(system, u)
    primes = rp.restricted_set(system, u)
    profile = rc.build_profile(window, primes, workers=cfg.threads)
    lines = ["m,unweighted,weighted,H,main_term,ratio"]
    for m in range(lo, hi + 1):
        main = u * u * ss.sigma_prime(m, u, system, cfg.cutoff)
        w = profile.weighted_at(m)
        ratio = repr(w / main) if main else ""
        lines.append(
            f"{m},{profile.unweighted_at(m)},{w!r},{rc.profile_H(m, u)!r},{main!r},{ratio}"
        )
    _emit("\n".join(lines) + "\n", cfg.output_path)
    return EXIT_OK


def cmd_arcs(args) -> int:
    cfg = _config(args)
    system = _system(cfg)
    window = rp.weighted_window(system, cfg.u)
    report = cm.minor_arc_diagnostic(cfg.u, cfg.B, window, cfg.samples, cfg.seed)
    _emit(_dump(report.to_dict()), cfg.output_path)
    return EXIT_OK


def cmd_quadrature(args) -> int:
    cfg = _config(args)
    system = _system(cfg)
    window = rp.weighted_window(system, cfg.u)
    integral = cm.integral_R(args.m, window, cfg.nodes)
    weighted, err = rc.count_weighted(window)
    i = args.m - 3 * cfg.u
    conv = float(weighted[i]) if 0 <= i < len(weighted) else 0.0
    diff = abs(integral - conv)
    ok = diff <= 1e-6 * abs(conv) if conv else diff <= 1e-8
    _emit(
        _dump(
            {
                "u": cfg.u,
                "m": args.m,
                "nodes": cfg.nodes or cm.exactness_nodes(cfg.u),
                "integral": integral,
                "convolution": conv,
                "abs_diff": diff,
                "ok": ok,
            }
        ),
        cfg.output_path,
    )
    return EXIT_OK if ok else EXIT_FAIL


def _num(x: Fraction, exact: bool):
    return str(x) if exact else float(x)


def cmd_singular_series(args) -> int:
    cfg = _config(args)
    system = _system(cfg)
    m = args.m
    G = {str(c.p): _num(ss.G_prime(c.p, m, c, args.raw), args.exact) for c in system.covers}
    hs = ss.hsum(m, system.q0, cfg.cutoff)
    out = {
        "q0": system.q0,
        "m": m,
        "G_p": G,
        "G_q0": _num(ss.G_product(m, system, args.raw), args.exact),
        "hsum": hs.value,
        "hsum_radius": hs.radius,
    }
    if not args.raw:
        sig = ss.sigma(m, system, cfg.cutoff)
        out["sigma"] = sig.value
        out["sigma_radius"] = sig.radius
        if args.u is not None and 4 * args.u <= m <= 5 * args.u:
            out["sigma_prime"] = ss.sigma_prime(m, args.u, system, cfg.cutoff)
    status = EXIT_OK
    if args.check_convolution:
        worst = ss.convolution_check(m, system, args.check_convolution)
        out["convolution_qmax"] = args.check_convolution
        out["convolution_max_error"] = worst
        if not worst < 1e-9:
            status = EXIT_FAIL
    _emit(_dump(out), cfg.output_path)
    return status


def cmd_report(args) -> int:
    cfg = _config(args)
    report = run_experiment(cfg)
    if cfg.output_path:
        write_report(report, cfg.output_path)
    else:
        sys.stdout.write(render_json(report) if not args.csv else render_csv(report))
    if report.failing_m:
        sys.stderr.write(f"{len(report.failing_m)} odd m without a representation\n")
    return EXIT_OK if report.ok else EXIT_FAIL


def _globals(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", metavar="PATH", default=default, help="key=value config file")
    parser.add_argument("--out", metavar="PATH", default=default, help="output file (default stdout)")
    parser.add_argument("--threads", type=int, metavar="N", default=default)


def _system_args(p: argparse.ArgumentParser, u_required: bool = False) -> None:
    p.add_argument("--u", type=int, required=u_required)
    p.add_argument("--A", type=int)
    p.add_argument("--B", type=int)
    p.add_argument("--basis", help="comma-separated primes, e.g. 2,3,5")
    p.add_argument("--q0", type=int, help="squarefree modulus; its primes form the basis")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sparse-goldbach", description=__doc__.splitlines()[0])
    _globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    _globals(common, suppress=True)

    p = sub.add_parser("construct", parents=[common], help="list the restricted primes in [u, 2u]")
    _system_args(p)
    p.add_argument("--stats", action="store_true", help="sparsity report as JSON on stderr")
    p.add_argument("--system-json", metavar="PATH", help="also dump the residue system")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("verify-lemma", parents=[common], help="check the triple cover for p <= PMAX")
    p.add_argument("--pmax", type=int, default=97)
    p.set_defaults(func=cmd_verify_lemma)

    p = sub.add_parser("count", parents=[common], help="representation counts as CSV")
    _system_args(p)
    p.add_argument("--m-range", metavar="LO:HI")
    p.add_argument("--cutoff", type=int)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("arcs", parents=[common], help="minor-arc diagnostics as JSON")
    _system_args(p)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_arcs)

    p = sub.add_parser("quadrature", parents=[common], help="orthogonality integral vs convolution")
    _system_args(p)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--nodes", type=int)
    p.set_defaults(func=cmd_quadrature)

    p = sub.add_parser("singular-series", parents=[common], help="local factors and the series")
    _system_args(p)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--exact", action="store_true", help="print rationals as num/den")
    p.add_argument("--raw", action="store_true", help="count over raw cover residues")
    p.add_argument("--cutoff", type=int)
    p.add_argument("--check-convolution", type=int, metavar="QMAX")
    p.set_defaults(func=cmd_singular_series)

    p = sub.add_parser("report", parents=[common], help="full experiment report")
    _system_args(p)
    p.add_argument("--m-range", metavar="LO:HI")
    p.add_argument("--cutoff", type=int)
    p.add_argument("--nodes", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--csv", action="store_true", help="print the CSV table instead of JSON")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as err:
        sys.stderr.write(f"error: {err}\n")
        return EXIT_USAGE
    except StageError as err:
        sys.stderr.write(f"error: {err}\n")
        return EXIT_USAGE if isinstance(err.cause, ValueError) else EXIT_FAIL
    except (AssertionError, ArithmeticError) as err:
        sys.stderr.write(f"verification failed: {err}\n")
        return EXIT_FAIL
    except OSError as err:
        sys.stderr.write(f"error: {err}\n")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
