"""Command-line front end.

Exit codes: 0 = property upheld / suite passed, 2 = falsified with witness
(an expected outcome, not a crash), 1 = usage or evaluation error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time

import numpy as np

from .core import (
    DomainSpecError,
    DualLine,
    EvaluationError,
    TolerancePolicy,
    as_point,
    parse_domain,
)
from .expr import ExprSyntaxError
from .jacobian import (
    contradiction_probe,
    estimate_clarke,
    fd_jacobian,
    mvt_inclusion,
    psd_check,
)
from .monotonicity import StrongParams, falsify, hierarchy_check
from .registry import MapFileError, lookup, registry, resolve_map
from .report import build_report, dump_report, jsonable, write_report
from .translation import (
    TraceError,
    counterexample_suite,
    proof_trace,
    proposition1_crosscheck,
    sweep,
    theorem1_check,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FALSIFIED = 2


class CliError(Exception):
    pass


def _say(message: str) -> None:
    # human-readable progress goes to stderr; stdout carries only the report
    print(message, file=sys.stderr)


def _default_seed() -> int:
    env = os.environ.get("MONOCERT_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise CliError(f"MONOCERT_SEED is not an integer: {env!r}")
    return 0


def _parse_line(spec: str, dim: int, lambda_spec: str) -> DualLine:
    fields = {}
    for item in spec.split(";"):
        key, _, val = item.partition("=")
        fields[key.strip()] = val.strip()
    if "v" not in fields:
        raise CliError(f"line spec {spec!r} must provide v=<csv>")
    v = _csv_vector(fields["v"], "line v")
    u = _csv_vector(fields["u"], "line u") if "u" in fields else np.zeros(v.size)
    return DualLine(u=u, v=v, lambda_grid=_parse_lambda(lambda_spec))


def _parse_lambda(spec: str) -> np.ndarray:
    parts = spec.split(":")
    if len(parts) != 3:
        raise CliError(f"lambda grid {spec!r} must be lo:hi:count")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise CliError(f"bad lambda grid {spec!r}")
    if count < 1 or (count > 1 and hi <= lo):
        raise CliError(f"bad lambda grid {spec!r}")
    return np.linspace(lo, hi, count)


def _csv_vector(text: str, what: str) -> np.ndarray:
    try:
        return as_point([float(t) for t in text.split(",")])
    except ValueError:
        raise CliError(f"bad {what} {text!r}")


def _parse_property(text: str):
    if text.startswith("strong"):
        _, eq, val = text.partition("=")
        if eq:
            try:
                return "strong", StrongParams(float(val))
            except ValueError:
                raise CliError(f"bad strong modulus in {text!r}")
        return "strong", None
    if text in ("monotone", "strict", "pseudo", "quasi"):
        return text, None
    raise CliError(f"unknown property {text!r}")


def _resolve(args):
    try:
        F, default_domain = resolve_map(args.map)
    except (KeyError, MapFileError, ExprSyntaxError) as exc:
        raise CliError(str(exc))
    domain_spec = getattr(args, "domain", None)
    if domain_spec:
        try:
            domain = parse_domain(domain_spec)
        except DomainSpecError as exc:
            raise CliError(str(exc))
    else:
        domain = default_domain
    if domain is None:
        raise CliError(f"map {args.map!r} carries no default domain; "
                       "pass --domain")
    return F, domain


def _tolerances(args) -> TolerancePolicy:
    tol = TolerancePolicy()
    if getattr(args, "fd_step", None):
        tol = TolerancePolicy(fd_step=args.fd_step)
    return tol


def _emit(args, argv, seed, tol, payload, started, exit_code):
    report = build_report(argv, seed, tol, payload,
                          (time.perf_counter() - started) * 1000.0)
    if getattr(args, "json", None):
        write_report(args.json, report)
    else:
        sys.stdout.write(dump_report(report))
    return exit_code


def _cmd_maps(args, argv, started):
    rows = []
    for entry in registry():
        rows.append({
            "name": entry.name,
            "dim": entry.map.dim_in,
            "known_class": sorted(entry.known_class),
            "provenance": entry.provenance,
        })
        _say(f"{entry.name:22s} dim={entry.map.dim_in}  "
              f"class={{{', '.join(sorted(entry.known_class)) or '-'}}}")
    return _emit(args, argv, 0, TolerancePolicy(), {"maps": rows}, started,
                 EXIT_OK)


def _cmd_check(args, argv, started):
    F, domain = _resolve(args)
    prop, strong = _parse_property(args.property)
    seed = args.seed if args.seed is not None else _default_seed()
    tol = _tolerances(args)
    verdict = falsify(F, domain, prop, args.budget, seed, tol=tol,
                      strong=strong)
    _say(f"{F.name}: {prop} -> {verdict.status} "
          f"({verdict.samples_used} samples)")
    code = EXIT_FALSIFIED if verdict.falsified else EXIT_OK
    return _emit(args, argv, seed, tol, {"verdict": verdict}, started, code)


def _cmd_hierarchy(args, argv, started):
    F, domain = _resolve(args)
    seed = args.seed if args.seed is not None else _default_seed()
    tol = _tolerances(args)
    report = hierarchy_check(F, domain, args.budget, seed, tol=tol,
                             strong_modulus=args.strong_modulus)
    for prop, verdict in report.verdicts.items():
        _say(f"{prop:10s} {verdict.status}")
    for flag in report.inversions:
        _say(f"INVERSION: {flag}")
    code = EXIT_OK if report.consistent else EXIT_FALSIFIED
    payload = {"hierarchy": report, "holding": sorted(report.holding),
               "consistent": report.consistent}
    return _emit(args, argv, seed, tol, payload, started, code)


def _cmd_sweep(args, argv, started):
    F, domain = _resolve(args)
    seed = args.seed if args.seed is not None else _default_seed()
    tol = _tolerances(args)
    line = _parse_line(args.line, F.dim_out, args.lambda_grid)
    prop, _ = _parse_property(args.property)
    if prop not in ("pseudo", "quasi", "monotone"):
        raise CliError("sweep property must be pseudo, quasi, or monotone")
    result = sweep(F, domain, line, prop, args.budget, seed, tol=tol)
    for lam, verdict in result.rows:
        _say(f"lambda={lam:+.4f}  {verdict.status}")
    if args.csv:
        _write_sweep_csv(args.csv, result)
    code = EXIT_OK if result.all_pass else EXIT_FALSIFIED
    return _emit(args, argv, seed, tol, {"sweep": result}, started, code)


def _write_sweep_csv(path, result):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lambda", "status", "witness_x", "witness_y", "margin"])
        for lam, verdict in result.rows:
            w = verdict.witness
            writer.writerow([
                repr(lam), verdict.status,
                "" if w is None else ";".join(repr(v) for v in w.x),
                "" if w is None else ";".join(repr(v) for v in w.y),
                "" if w is None else repr(w.margin)])


def _cmd_theorem1(args, argv, started):
    F, domain = _resolve(args)
    seed = args.seed if args.seed is not None else _default_seed()
    tol = _tolerances(args)
    line = _parse_line(args.line, F.dim_out, args.lambda_grid)
    report = theorem1_check(F, domain, line, args.budget, seed, tol=tol,
                            psd_points=args.psd_points)
    _say(f"sweep all-pass: {report.sweep_result.all_pass}; "
          f"min eigenvalue: {report.psd_side.min_eigenvalue:.3e}; "
          f"agree: {report.agree}")
    _say(report.note)
    code = EXIT_OK if report.agree else EXIT_FALSIFIED
    return _emit(args, argv, seed, tol, {"theorem1": report}, started, code)


def _cmd_prop1(args, argv, started):
    F, domain = _resolve(args)
    seed = args.seed if args.seed is not None else _default_seed()
    tol = _tolerances(args)
    line = _parse_line(args.line, F.dim_out, args.lambda_grid)
    report = proposition1_crosscheck(F, domain, line, args.budget, seed,
                                     tol=tol)
    _say(f"(monotone, pseudo, quasi) = {report.outcome}")
    for flag in report.flags:
        _say(flag)
    code = EXIT_OK if not report.flags else EXIT_FALSIFIED
    return _emit(args, argv, seed, tol, {"proposition1": report}, started, code)


def _cmd_trace(args, argv, started):
    F, domain = _resolve(args)
    seed = args.seed if args.seed is not None else _default_seed()
    tol = _tolerances(args)
    line = _parse_line(args.line, F.dim_out, args.lambda_grid)
    x = _csv_vector(args.x, "--x")
    y = _csv_vector(args.y, "--y")
    traces, summary = proof_trace(F, domain, line, x, y, seed=seed, tol=tol)
    _say(f"traces: {len(traces)}; conforms: {summary.conforms}; "
          f"limit estimate max: {summary.max_limit_estimate:.3e}")
    code = EXIT_OK if summary.conforms else EXIT_FALSIFIED
    return _emit(args, argv, seed, tol,
                 {"traces": traces, "summary": summary}, started, code)


def _cmd_jacobian(args, argv, started):
    F, domain = _resolve(args)
    seed = args.seed if args.seed is not None else _default_seed()
    tol = _tolerances(args)
    point = _csv_vector(args.point, "--point")
    payload = {}
    code = EXIT_OK
    if args.samples > 1 or args.psd or args.probe:
        hull = estimate_clarke(F, point, args.radius, args.samples,
                               args.fd_step, seed, domain=domain)
        payload["hull"] = hull
        _say(f"{len(hull.generators)} generator(s)")
        if args.psd or args.probe:
            report = psd_check(hull, tol)
            payload["psd"] = report
            _say(f"psd verdict: {report.verdict} "
                  f"(min eigenvalue {report.min_eigenvalue:.3e})")
            if report.verdict == "indefinite":
                code = EXIT_FALSIFIED
        if args.probe:
            witness = contradiction_probe(F, point, hull, tol, domain=domain)
            payload["probe_witness"] = witness
            if witness is not None:
                _say(f"monotonicity witness with margin {witness.margin:.3e}")
    else:
        jac = fd_jacobian(F, point, args.fd_step, domain=domain)
        payload["jacobian"] = jac
        _say(np.array2string(jac, precision=6))
    return _emit(args, argv, seed, tol, payload, started, code)


def _cmd_mvt(args, argv, started):
    F, domain = _resolve(args)
    seed = args.seed if args.seed is not None else _default_seed()
    tol = _tolerances(args)
    x = _csv_vector(args.x, "--x")
    y = _csv_vector(args.y, "--y")
    report = mvt_inclusion(F, x, y, args.segments, tol=tol, domain=domain,
                           seed=seed)
    _say(f"hull distance {report.distance:.3e} "
          f"(threshold {report.threshold:.3e}): "
          f"{'included' if report.included else 'NOT included'}")
    code = EXIT_OK if report.included else EXIT_FALSIFIED
    return _emit(args, argv, seed, tol, {"mvt": report}, started, code)


def _cmd_counterexample(args, argv, started):
    seed = args.seed if args.seed is not None else _default_seed()
    tol = TolerancePolicy()
    report = counterexample_suite(truncation=args.radius, budget=args.budget,
                                  seed=seed, tol=tol)
    _say(report.narrative)
    code = EXIT_OK if report.passed else EXIT_FALSIFIED
    return _emit(args, argv, seed, tol, {"counterexample": report}, started,
                 code)


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="monocert",
        description="Certify or falsify generalized monotonicity properties "
                    "of vector fields on convex domains.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, domain=True, budget=True):
        p.add_argument("--map", required=True,
                       help="registry name or file:<path>")
        if domain:
            p.add_argument("--domain", help="domain spec, e.g. box:-1,-1:1,1")
        if budget:
            p.add_argument("--budget", type=int, default=1000)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--json", help="write the JSON report here")

    p = sub.add_parser("maps", help="list the built-in map registry")
    p.add_argument("--json")
    p.set_defaults(func=_cmd_maps)

    p = sub.add_parser("check", help="falsify one property")
    common(p)
    p.add_argument("--property", required=True,
                   help="monotone|strict|strong=<modulus>|pseudo|quasi")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("hierarchy", help="all five properties, one stream")
    common(p)
    p.add_argument("--strong-modulus", type=float, default=None)
    p.set_defaults(func=_cmd_hierarchy)

    def line_args(p):
        p.add_argument("--line", required=True, help='"u=<csv>;v=<csv>"')
        p.add_argument("--lambda", dest="lambda_grid", default="-2:2:17",
                       help="lo:hi:count (default -2:2:17)")

    p = sub.add_parser("sweep", help="translation-family sweep over lambda")
    common(p)
    line_args(p)
    p.add_argument("--property", required=True)
    p.add_argument("--csv", help="write the sweep table as CSV")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("theorem1", help="sweep vs PSD-side consistency")
    common(p)
    line_args(p)
    p.add_argument("--psd-points", type=int, default=25)
    p.set_defaults(func=_cmd_theorem1)

    p = sub.add_parser("prop1", help="monotone/pseudo/quasi three-way check")
    common(p)
    line_args(p)
    p.set_defaults(func=_cmd_prop1)

    p = sub.add_parser("trace", help="averaged-point proof trace")
    common(p, budget=False)
    line_args(p)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.set_defaults(func=_cmd_trace)

    p = sub.add_parser("jacobian", help="finite-difference Jacobian / hull")
    common(p, budget=False)
    p.add_argument("--point", required=True)
    p.add_argument("--radius", type=float, default=1e-4)
    p.add_argument("--fd-step", type=float, default=1e-6)
    p.add_argument("--samples", type=int, default=1)
    p.add_argument("--psd", action="store_true")
    p.add_argument("--probe", action="store_true")
    p.set_defaults(func=_cmd_jacobian)

    p = sub.add_parser("mvt", help="mean-value hull inclusion check")
    common(p, budget=False)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--segments", type=int, default=5)
    p.set_defaults(func=_cmd_mvt)

    p = sub.add_parser("counterexample", help="bundled necessity suite")
    p.add_argument("--radius", type=float, default=5.0)
    p.add_argument("--budget", type=int, default=2000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--json")
    p.set_defaults(func=_cmd_counterexample)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code not in (0, None) else EXIT_OK
    started = time.perf_counter()
    try:
        return args.func(args, argv, started)
    except (CliError, DomainSpecError, MapFileError, ExprSyntaxError,
            EvaluationError, TraceError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
