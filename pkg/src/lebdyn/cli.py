"""Command-line front end.

Commands build a system bundle from a spec (file or --family/--param flags),
run the library estimators, and emit deterministic JSON or CSV. Exit codes:
0 success (and every verified row passed), 1 at least one verify row failed,
2 usage error, 3 numeric failure (underflow guards, exhausted budgets).

Reports never embed wall-clock time or anything else nondeterministic;
identical invocations produce byte-identical output. Timing goes to stderr.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time

import numpy as np

from . import report as rp
from .cover_calc import cover_diam, join, lebesgue_number
from .dynamics import delta_sequence, iterated_cover, iterate_rate, \
    lipschitz_constant, map_power, pullback_cover
from .errors import BudgetError, NumericError, UsageError
from .metric_core import box_dim_estimate
from .rates import VerifyConfig, cover_entropy, hl_estimates, rate_bounds, \
    sep_entropy, verify_inequalities
from .systems import SystemSpec, estimate_bundle, generate_system, \
    list_families

EXIT_PASS = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3

# identity checks join whole iterated covers; past these sizes the joins are
# the dominant cost of a verify run, so they degrade to skipped rows instead
IDENTITY_POINT_LIMIT = 2048
IDENTITY_MEMBER_LIMIT = 2048


def _parse_param_value(text: str):
    """k=v values: int, then float, comma list of those, else the raw string."""
    if "," in text:
        return tuple(_parse_param_value(t) for t in text.split(","))
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            continue
    return text


def _parse_window(text: str) -> tuple[int, int]:
    a, sep, b = text.partition(":")
    if not sep:
        raise UsageError("--window expects a:b")
    try:
        return int(a), int(b)
    except ValueError:
        raise UsageError("--window bounds must be integers") from None


def _resolve_spec(args) -> SystemSpec:
    if args.spec and args.family:
        raise UsageError("give either --spec or --family, not both")
    if args.spec:
        spec = rp.spec_from_obj(rp.load_json(args.spec))
    elif args.family:
        params = {}
        for kv in args.param or ():
            k, sep, v = kv.partition("=")
            if not sep:
                raise UsageError(f"--param expects k=v, got {kv!r}")
            params[k] = _parse_param_value(v)
        spec = SystemSpec(family=args.family, params=params)
    else:
        raise UsageError("a system is required: --spec PATH or --family NAME")
    if args.mesh:
        try:
            radii = tuple(float(r) for r in args.mesh.split(","))
        except ValueError:
            raise UsageError("--mesh expects comma-separated radii") from None
        spec = SystemSpec(spec.family, spec.params, radii, spec.horizon)
    if args.horizon is not None:
        if args.horizon < 1:
            raise UsageError("--horizon must be positive")
        spec = SystemSpec(spec.family, spec.params, spec.mesh_radii,
                          args.horizon)
    return spec


def _budget(args) -> int | None:
    env = os.environ.get("LEBDYN_BUDGET")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"LEBDYN_BUDGET must be an integer, got {env!r}") \
                from None
    return None


def _config_echo(args, bundle) -> dict:
    cfg = {
        "spec": rp.spec_to_obj(bundle.spec),
        "format": args.format,
    }
    if getattr(args, "tolerance", None) is not None:
        cfg["tolerance"] = args.tolerance
    if getattr(args, "window", None) is not None:
        cfg["window"] = list(args.window)
    if getattr(args, "exact_limit", None) is not None:
        cfg["exact_limit"] = args.exact_limit
    budget = _budget(args)
    if budget is not None:
        cfg["budget"] = budget
    return cfg


def _exact_mode(args, space) -> str | None:
    if getattr(args, "exact_limit", None) is None:
        return None
    return "exact" if space.point_count <= args.exact_limit else "greedy"


def _emit(args, command: str, config: dict, json_body: dict,
          csv_table: tuple[tuple, list] | None) -> None:
    if args.format == "json":
        doc = {"schema_version": rp.SCHEMA_VERSION, "command": command,
               "config": config}
        doc.update(json_body)
        rp.write_text(args.out, rp.json_text(doc) + "\n")
    else:
        if csv_table is None:
            raise UsageError(f"{command} has no CSV form; use --format json")
        columns, rows = csv_table
        rp.write_text(args.out, rp.csv_text(columns, rows))


# -- fragments ---------------------------------------------------------------

def _frag_delta(bundle):
    covers = []
    rows = []
    for cover_id, cover in bundle.covers:
        seq = delta_sequence(bundle.space, bundle.map, cover,
                             bundle.spec.horizon)
        a = seq.a_n
        covers.append({
            "cover_id": cover_id,
            "rows": [{"n": i + 1, "delta_n": seq.values[i], "a_n": a[i],
                      "capped": bool(seq.capped[i])}
                     for i in range(seq.horizon)],
        })
        rows.extend(rp.rate_sequence_rows(bundle.spec.family, cover_id, seq))
    return {"delta_table": covers}, (rp.RATE_COLUMNS, rows)


_RATE_COLUMNS = ("source", "radius", "window_lo", "window_hi",
                 "lower_rate", "upper_rate", "slope", "method")


def _frag_rates(bundle, window):
    space, f, spec = bundle.space, bundle.map, bundle.spec
    per_radius = []
    csv_rows = []
    if window is None:
        hl = hl_estimates(space, f, spec.mesh_radii, spec.horizon)
        pairs = hl.per_radius
        summary = {"h_l_lower": hl.lower, "h_l_upper": hl.upper}
    else:
        pairs = []
        for cover_id, cover in bundle.covers:
            seq = delta_sequence(space, f, cover, spec.horizon)
            r = float(cover_id.partition(":")[2])
            pairs.append((r, rate_bounds(seq, window=window)))
        last = pairs[-1][1]
        summary = {"h_l_lower": last.lower_rate, "h_l_upper": last.upper_rate}
    for r, est in pairs:
        per_radius.append({"radius": r, "window": list(est.window),
                           "lower_rate": est.lower_rate,
                           "upper_rate": est.upper_rate,
                           "slope": est.slope, "method": est.method})
        csv_rows.append(("mesh", rp.fmt_float(r), str(est.window[0]),
                         str(est.window[1]), rp.fmt_float(est.lower_rate),
                         rp.fmt_float(est.upper_rate), rp.fmt_float(est.slope),
                         est.method))
    ir = iterate_rate(space, f, min(spec.horizon, 12))
    L = lipschitz_constant(space, f)
    body = {"rates": {"per_radius": per_radius, **summary,
                      "l": {"estimate": ir.l_estimate,
                            "per_n": [[n, v] for n, v in ir.per_n]},
                      "lipschitz": L}}
    csv_rows.append(("iterate_rate", "", "", "", "", "",
                     rp.fmt_float(ir.l_estimate), "exact"))
    csv_rows.append(("lipschitz", "", "", "", "", "", rp.fmt_float(L),
                     "exact"))
    return body, (_RATE_COLUMNS, csv_rows)


_ENTROPY_COLUMNS = ("estimator", "param", "window_lo", "window_hi",
                    "estimate", "exact")


def _frag_entropy(bundle, args, budget):
    space, f, spec = bundle.space, bundle.map, bundle.spec
    mode = _exact_mode(args, space)
    out = {}
    csv_rows = []
    N = max(2, min(spec.horizon, 6))
    try:
        ce = cover_entropy(space, f, bundle.covers[0][1], N, mode=mode,
                           budget=budget)
        out["cover"] = {"cover_id": bundle.covers[0][0],
                        "window": list(ce.window), "estimate": ce.estimate,
                        "exact": ce.exact,
                        "per_n": [{"n": n, "count": c, "rate": r,
                                   "exact": ex} for n, c, r, ex in ce.per_n]}
        csv_rows.append(("cover", bundle.covers[0][0], str(ce.window[0]),
                         str(ce.window[1]), rp.fmt_float(ce.estimate),
                         "true" if ce.exact else "false"))
    except BudgetError as e:
        out["cover"] = {"skipped": str(e)}
    eps_list = sorted({float(r) for r in spec.mesh_radii}, reverse=True)
    se = sep_entropy(space, f, eps_list, spec.horizon, mode=mode,
                     budget=budget)
    out["separated"] = []
    for eps, est, exact, win in se.per_eps:
        out["separated"].append({"eps": eps, "window": list(win),
                                 "estimate": est, "exact": exact})
        csv_rows.append(("separated", rp.fmt_float(eps), str(win[0]),
                         str(win[1]), rp.fmt_float(est),
                         "true" if exact else "false"))
    return {"entropy": out}, (_ENTROPY_COLUMNS, csv_rows)


_DIM_COLUMNS = ("gamma", "count", "provenance", "slope")


def _frag_dims(bundle, args, budget):
    gammas = list(bundle.spec.mesh_radii)
    while len(set(gammas)) < 3:
        gammas.append(min(gammas) / 2.0)
    dim = box_dim_estimate(bundle.space, gammas,
                           mode=_exact_mode(args, bundle.space), budget=budget)
    body = {"dims": {"slope": dim.slope,
                     "scale_window": list(dim.scale_window),
                     "per_scale": [{"gamma": g, "count": c, "provenance": p}
                                   for g, c, p in dim.per_scale]}}
    rows = [(rp.fmt_float(g), str(c), p, rp.fmt_float(dim.slope))
            for g, c, p in dim.per_scale]
    return body, (_DIM_COLUMNS, rows)


def _identity_rows(bundle):
    """Exact finite-n checks: join formula, running-min, power identity,
    and the Lipschitz floor. Equalities compare to 1e-12 relative."""
    space, f, spec = bundle.space, bundle.map, bundle.spec
    cover = bundle.covers[0][1]
    rows = []

    def close(a, b):
        return abs(a - b) <= 1e-12 * max(1.0, abs(a), abs(b))

    def row(name, lhs, rhs, passed, note=""):
        rows.append({"name": name, "lhs": lhs, "rhs": rhs,
                     "pass": passed, "lhs_src": "exact", "rhs_src": "exact",
                     "note": note})

    if (space.point_count > IDENTITY_POINT_LIMIT
            or len(cover.masks) > IDENTITY_MEMBER_LIMIT):
        row("identity_suite", None, None, None,
            f"skipped: {space.point_count} points / {len(cover.masks)} members "
            "exceed the identity-suite size limits")
        return rows

    def guarded(name, check):
        try:
            check()
        except BudgetError as e:
            row(name, None, None, None, f"skipped: {e}")

    def join_formula():
        pull = pullback_cover(space, f, cover)
        lhs = lebesgue_number(space, join(cover, pull)).delta
        rhs = min(lebesgue_number(space, cover).delta,
                  lebesgue_number(space, pull).delta)
        row("join_formula", lhs, rhs, close(lhs, rhs))

    guarded("join_formula", join_formula)

    # direct joins grow like |U|^n before pruning; keep the depth shallow
    # on dense covers and let the cap turn deeper ones into skipped rows
    n_id = min(spec.horizon, 3 if len(cover.masks) <= 256 else 2)

    def running_min():
        fast = delta_sequence(space, f, cover, n_id, method="pullback")
        slow = delta_sequence(space, f, cover, n_id, method="direct")
        worst = float(np.max(np.abs(fast.values - slow.values)))
        row("running_min_vs_direct", worst, 0.0, worst == 0.0,
            f"max |pullback - direct| over n<={n_id}")

    guarded("running_min_vs_direct", running_min)

    def power_identity():
        u22 = iterated_cover(space, f, cover, 2)
        lhs = delta_sequence(space, map_power(f, 2), u22, 2).values[1]
        rhs = delta_sequence(space, f, cover, 4).values[3]
        row("power_identity", lhs, rhs, close(lhs, rhs))
        lhs2 = delta_sequence(space, map_power(f, 2), cover, 2).values[1]
        row("power_inequality", lhs2, rhs, lhs2 >= rhs - 1e-12 * max(1.0, rhs))

    if spec.horizon >= 4:
        guarded("power_identity", power_identity)

    seq = delta_sequence(space, f, cover, spec.horizon)
    L = max(lipschitz_constant(space, f), 1.0)
    d0 = lebesgue_number(space, cover).delta
    floor = d0 * L ** (-(seq.n_values - 1.0))
    ok = bool(np.all(seq.values >= floor * (1.0 - 1e-12)))
    row("lipschitz_floor", float(np.min(seq.values - floor)), 0.0, ok,
        "min slack of delta_n >= delta(U) * max(L,1)^-(n-1)")
    return rows


def _frag_verify(bundle, args, budget):
    est = estimate_bundle(bundle, budget=budget)
    for kv in args.known or ():
        k, sep, v = kv.partition("=")
        if not sep:
            raise UsageError(f"--known expects k=v, got {kv!r}")
        try:
            est.analytic[k] = float(v)
        except ValueError:
            raise UsageError(f"--known value for {k!r} must be a number") \
                from None
    cfg = VerifyConfig(tolerance=args.tolerance) \
        if args.tolerance is not None else None
    rep = verify_inequalities(est, cfg)
    identities = _identity_rows(bundle)

    ineq_rows = []
    for r in rep.rows:
        ineq_rows.append({"name": r.name, "lhs": r.lhs, "rhs": r.rhs,
                          "slack": r.slack, "tol": r.tol, "pass": r.passed,
                          "lhs_src": r.lhs_src, "rhs_src": r.rhs_src,
                          "note": r.note})
    failed = list(rep.failed)
    failed += [f"{r['name']}[identity]" for r in identities
               if r["pass"] is False]
    body = {
        "estimates": {
            "measured": {k: est.measured[k] for k in sorted(est.measured)},
            "analytic": {k: est.analytic[k] for k in sorted(est.analytic)},
            "bound_tags": {k: est.bound_tags[k]
                           for k in sorted(est.bound_tags)},
        },
        "inequalities": ineq_rows,
        "identities": identities,
        "failed": failed,
        "all_pass": not failed,
    }
    csv_rows = rp.inequality_rows(rep)
    for r in identities:
        csv_rows.append((r["name"],
                         "" if r["lhs"] is None else rp.fmt_float(r["lhs"]),
                         "" if r["rhs"] is None else rp.fmt_float(r["rhs"]),
                         "", rp.fmt_float(0.0),
                         "skip" if r["pass"] is None
                         else ("true" if r["pass"] else "false"),
                         r["lhs_src"], r["rhs_src"]))
    return body, (rp.INEQUALITY_COLUMNS, csv_rows), not failed


# -- commands ----------------------------------------------------------------

def _cmd_list(args) -> int:
    fams = list_families()
    if args.format == "json":
        doc = {"schema_version": rp.SCHEMA_VERSION, "command": "list",
               "families": [{
                   "name": fi.name, "summary": fi.summary,
                   "params": dict(fi.params), "defaults": dict(fi.defaults),
                   "mesh_radii": list(fi.mesh_radii), "horizon": fi.horizon,
                   "basis": fi.basis} for fi in fams]}
        rp.write_text(args.out, rp.json_text(doc) + "\n")
    else:
        width = max(len(fi.name) for fi in fams)
        lines = [f"{fi.name:<{width}}  {fi.summary}" for fi in fams]
        rp.write_text(args.out, "\n".join(lines) + "\n")
    return EXIT_PASS


def _cmd_fragment(args, command: str) -> int:
    spec = _resolve_spec(args)
    budget = _budget(args)
    bundle = generate_system(spec)
    config = _config_echo(args, bundle)
    passed = True
    if command == "delta-table":
        body, table = _frag_delta(bundle)
    elif command == "rates":
        body, table = _frag_rates(bundle, getattr(args, "window", None))
    elif command == "entropy":
        body, table = _frag_entropy(bundle, args, budget)
    elif command == "dims":
        body, table = _frag_dims(bundle, args, budget)
    elif command == "verify":
        body, table, passed = _frag_verify(bundle, args, budget)
    else:  # report: every fragment, json only
        body, _ = _frag_delta(bundle)
        part, _ = _frag_rates(bundle, getattr(args, "window", None))
        body.update(part)
        part, _ = _frag_entropy(bundle, args, budget)
        body.update(part)
        part, _ = _frag_dims(bundle, args, budget)
        body.update(part)
        part, _, passed = _frag_verify(bundle, args, budget)
        body.update(part)
        table = None
    _emit(args, command, config, body, table)
    if command in ("verify", "report") and not passed:
        return EXIT_VIOLATION
    return EXIT_PASS


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="lebdyn",
        description="Lebesgue numbers of covers under iteration: tables, "
                    "decay rates, entropy estimates and inequality checks.")
    sub = top.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", help="path to a system spec JSON file")
    common.add_argument("--family", help="family name (see `lebdyn list`)")
    common.add_argument("--param", action="append", metavar="K=V",
                        help="family parameter override, repeatable")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--horizon", type=int, help="iteration horizon N")
    common.add_argument("--mesh", help="comma-separated mesh radii")
    common.add_argument("--exact-limit", dest="exact_limit", type=int,
                        help="point count up to which exact solvers are forced")

    sub.add_parser("list", parents=[common],
                   help="catalog of system families")
    sub.add_parser("delta-table", parents=[common],
                   help="delta_1..delta_N per cover")
    p = sub.add_parser("rates", parents=[common],
                       help="Lebesgue decay rates and the iterate rate l(f)")
    p.add_argument("--window", type=_parse_window, metavar="A:B",
                   help="rate window override")
    sub.add_parser("entropy", parents=[common],
                   help="cover entropy and separated-set entropy")
    sub.add_parser("dims", parents=[common], help="box dimension estimate")
    for name in ("verify", "report"):
        p = sub.add_parser(name, parents=[common],
                           help="inequality + identity checks"
                           if name == "verify" else "every fragment in one "
                           "JSON document")
        p.add_argument("--tolerance", type=float,
                       help="measured-row tolerance override")
        p.add_argument("--window", type=_parse_window, metavar="A:B")
        p.add_argument("--known", action="append", metavar="K=V",
                       help="override an analytic value (negative controls)")
    return top


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        if args.command == "list":
            code = _cmd_list(args)
        else:
            code = _cmd_fragment(args, args.command)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericError, BudgetError) as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    print(f"[{args.command}] {time.perf_counter() - t0:.2f}s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
