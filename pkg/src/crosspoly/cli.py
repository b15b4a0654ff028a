"""Command-line surface: data generation, named inequality checks, the
two-regime parameter sweep, and the distance estimator.

Reports are versioned JSON (schema 1) or plot-ready CSV. Every report
echoes the command, the run-defining config, the seed, and the package
version; timed commands add wall_time. The matrix artifact written by
`gen` carries no wall_time so identical seeds give identical bytes.

Exit status: 0 pass, 1 check failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__, gauss_mc, gluskin, maurey, sparse_l1, suppression
from . import params as param_engine
from .errors import CrossPolyError, InputError, MaureyFailure
from .geometry import (
    CrossPolytope,
    ThickenedPolytope,
    hull_contains,
    minkowski_absorb_check,
    project_polytope,
)
from .rand import l1_ball_point, substream

SCHEMA = 1
DEFAULT_SWEEP_GRID = (1e4, 1e5, 1e6, 1e7, 1e8)


def _count(text: str) -> int:
    """Integer flag that accepts scientific notation like 1e6."""
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if value < 0 or value != int(value):
        raise argparse.ArgumentTypeError(f"need a nonnegative integer: {text!r}")
    return int(value)


def _derived_seed(seed: int, *path) -> int:
    """Stable 62-bit sub-seed so nested checks never share substreams."""
    return int(substream(seed, *path).integers(2**62))


def _resolve_constants_path(args) -> str | None:
    env = os.environ.get("CROSSPOLY_CONSTANTS")
    return env if env else args.constants


# ---------------------------------------------------------------------------
# named checks


def _run_l1_sparse(args, seed):
    trials = args.trials if args.trials is not None else 50
    shapes = ((3, 6), (4, 8))
    max_gap = 0.0
    max_support = 0
    violations = 0
    for i in range(trials):
        rows, cols = shapes[i % 2]
        M = substream(seed, i, 0).standard_normal((rows, cols))
        y = substream(seed, i, 1).standard_normal(rows)
        rep = sparse_l1.min_l1_representation(M, y)
        oracle_tau, _, _ = sparse_l1.brute_force_min_l1(M, y)
        gap = abs(rep.tau - oracle_tau) / max(1.0, oracle_tau)
        max_gap = max(max_gap, gap)
        max_support = max(max_support, len(rep.support))
        ok = gap <= 1e-7 and len(rep.support) <= np.linalg.matrix_rank(M)
        # vertex structure: support entries are the only nonzeros, columns
        # on the support are independent, tau has no cancellation slack
        ok = ok and np.count_nonzero(rep.coefficients) == len(rep.support)
        ok = ok and abs(np.abs(rep.coefficients).sum() - rep.tau) <= 1e-12 * max(1.0, rep.tau)
        if rep.support:
            sv = np.linalg.svd(M[:, list(rep.support)], compute_uv=False)
            ok = ok and sv[-1] > sv[0] * 1e-10
        if not ok:
            violations += 1
    return {
        "trials": trials,
        "shapes": [list(s) for s in shapes],
        "max_tau_gap": max_gap,
        "max_support_size": max_support,
        "violations": violations,
        "holds": violations == 0,
    }


def _run_l1_decomp(args, seed):
    M = substream(seed, 0).standard_normal((4, 8))
    return sparse_l1.l1_decomposition_cover_check(
        M, samples=args.trials if args.trials is not None else 100,
        rng_seed=_derived_seed(seed, 1))


def _run_maurey(args, seed):
    trials = args.trials if args.trials is not None else 100
    slack = args.slack if args.slack is not None else 2.0
    t = 25
    X = substream(seed, 0).standard_normal((100, 30))
    X /= np.linalg.norm(X, axis=1, keepdims=True)  # L = 1
    squared = []
    failures = 0
    best_failed = math.inf
    max_attempts = 0
    for i in range(trials):
        a = l1_ball_point(substream(seed, 1, i), 100)
        try:
            res = maurey.maurey_sparsify(X, a, t, slack=slack,
                                         rng_seed=_derived_seed(seed, 2, i))
            squared.append(res.achieved_distance**2)
            max_attempts = max(max_attempts, res.attempts)
        except MaureyFailure as exc:
            failures += 1
            best_failed = min(best_failed, exc.best_distance)
    mean_sq = float(np.mean(squared)) if squared else None
    threshold = 1.0 / t * 1.05
    payload = {
        "trials": trials,
        "t": t,
        "slack": slack,
        "failures": failures,
        "mean_square_distance": mean_sq,
        "mean_threshold": threshold,
        "max_attempts": max_attempts,
        "holds": failures == 0 and mean_sq is not None and mean_sq <= threshold,
    }
    if failures:
        payload["best_failed_distance"] = best_failed
    return payload


def _run_maurey_union(args, seed):
    X = substream(seed, 0).standard_normal((40, 6))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    return maurey.union_inclusion_check(
        X, k=12, t=6, trials=args.trials if args.trials is not None else 50,
        slack=args.slack if args.slack is not None else 2.0,
        rng_seed=_derived_seed(seed, 1))


def _run_suppression(args, seed):
    gens = substream(seed, 0).standard_normal((4, 4))
    return suppression.verify_suppression_inequality(
        CrossPolytope(gens), p=2, r=1, t=1.0,
        mc_samples=args.samples if args.samples is not None else 200_000,
        rng_seed=_derived_seed(seed, 1))


def _run_block_tail(args, seed):
    n = p = 8
    r, tau = 2, 4.0
    trials = args.trials if args.trials is not None else 200
    Q, _ = np.linalg.qr(substream(seed, 11).standard_normal((p, p)))
    reports = suppression.block_tail_experiment(
        n, p, r, tau, Q, J=(6, 7), trials=trials,
        rng_seed=_derived_seed(seed, 1))
    good = sum(1 for rep in reports if rep.event)
    freq = good / trials
    bound = suppression.block_tail_failure_bound(tau, reports[0].N, r)
    se = math.sqrt(bound * (1.0 - bound) / trials)
    return {
        "n": n, "p": p, "r": r, "tau": tau, "trials": trials,
        "frequency": freq,
        "failure_rate": 1.0 - freq,
        "failure_bound": bound,
        "holds": freq >= 0.999 and (1.0 - freq) <= bound + 3.0 * se,
    }


def _run_det_shrink(args, seed):
    n = args.n if args.n is not None else 3
    return gauss_mc.det_shrink_check(
        n, d=min(n, 3), h=0.5,
        mc_samples=args.samples if args.samples is not None else 200_000,
        rng_seed=_derived_seed(seed, 1), workers=args.workers)


def _run_crosspoly_measure(args, seed):
    d = args.n if args.n is not None else 2
    rho = args.rho if args.rho is not None else 1.0
    samples = args.samples if args.samples is not None else 200_000
    cases = []
    for j in range(3):
        G = substream(seed, j, 0).standard_normal((d, d))
        R = float(np.linalg.norm(G, axis=1).max())
        body = CrossPolytope(G, scale=rho)
        est = gauss_mc.mc_measure(
            lambda pts, body=body: hull_contains(body, pts), d, samples,
            rng_seed=_derived_seed(seed, j, 1), workers=args.workers)
        bound = gauss_mc.crosspoly_measure_bound(rho, R, d)
        cases.append({
            "R": R, "measure": est.point, "se": est.se, "bound": bound,
            "holds": bound >= est.point + 3.0 * est.se,
        })
    return {"d": d, "rho": rho, "samples": samples, "cases": cases,
            "holds": all(c["holds"] for c in cases)}


def _run_thickening(args, seed):
    d = args.n if args.n is not None else 2
    rho = args.rho if args.rho is not None else 1.0
    eta = 0.1
    ell = d + 1
    samples = args.samples if args.samples is not None else 200_000
    X = substream(seed, 0).standard_normal((ell, d))
    R = float(np.linalg.norm(X, axis=1).max())
    body = ThickenedPolytope(CrossPolytope(X, scale=rho), eta=rho * eta)
    est = gauss_mc.mc_measure(
        lambda pts: hull_contains(body, pts), d, samples,
        rng_seed=_derived_seed(seed, 1), workers=args.workers)
    bound = gauss_mc.thickening_bound(rho, R, eta, d, ell)
    return {
        "d": d, "ell": ell, "rho": rho, "eta": eta, "R": R,
        "samples": samples, "measure": est.point, "se": est.se,
        "bound": bound, "holds": bound >= est.point + 3.0 * est.se,
    }


def _run_gauss_tail(args, seed):
    return gauss_mc.gaussian_norm_tail_check(
        args.n if args.n is not None else 10, (2.0, 3.0),
        samples=args.samples if args.samples is not None else 1_000_000,
        rng_seed=_derived_seed(seed, 1), workers=args.workers)


def _run_chi2_tail(args, seed):
    return gauss_mc.chi_square_tail_check(
        args.n if args.n is not None else 10, (1.0, 2.0, 3.0),
        samples=args.samples if args.samples is not None else 1_000_000,
        rng_seed=_derived_seed(seed, 1), workers=args.workers)


def _run_proj_monotone(args, seed):
    dim = args.n if args.n is not None else 3
    P = CrossPolytope(substream(seed, 0).standard_normal((dim, dim)))
    basis = np.eye(dim)[:, : dim - 1]
    Pproj = project_polytope(P, basis)
    return gauss_mc.projection_monotonicity_check(
        lambda pts: hull_contains(P, pts),
        lambda pts: hull_contains(Pproj, pts),
        basis, dim,
        samples=args.samples if args.samples is not None else 200_000,
        rng_seed=_derived_seed(seed, 1), workers=args.workers)


def _run_absorb(args, seed):
    K = CrossPolytope(substream(seed, 0).standard_normal((4, 3)))
    L = CrossPolytope(substream(seed, 1).standard_normal((4, 3)))
    return minkowski_absorb_check(
        K, L, delta=0.3,
        num_directions=args.samples if args.samples is not None else 10_000,
        rng_seed=_derived_seed(seed, 2))


def _run_bridge(args, seed):
    n = args.n if args.n is not None else 4
    m = args.m if args.m is not None else 8
    A = gluskin.random_coefficient_matrix(m, n, rng_seed=_derived_seed(seed, 0))
    Gamma = substream(seed, 1).standard_normal((n, m))
    return gluskin.bridge_check(
        A, Gamma, rho=args.rho if args.rho is not None else 2.0, s=2,
        samples=args.samples if args.samples is not None else 200,
        rng_seed=_derived_seed(seed, 2))


def _run_powering(args, seed):
    n = args.n if args.n is not None else 3
    m = args.m if args.m is not None else 6
    A = gluskin.random_coefficient_matrix(
        m, n, rng_seed=_derived_seed(seed, 0),
        support_rows=range(min(m, 4)))
    payload = gluskin.powering_check(
        n, m, rho=args.rho if args.rho is not None else 1.5, A=A,
        outer_trials=args.trials if args.trials is not None else 400,
        inner_samples=args.samples if args.samples is not None else 100_000,
        rng_seed=_derived_seed(seed, 1))
    payload["holds"] = payload["agree"]
    return payload


def _run_u_norm(args, seed):
    return gluskin.u_norm_event_check(
        n=args.n if args.n is not None else 8,
        m=args.m if args.m is not None else 24,
        s=2, epsilon=0.05,
        rho=args.rho if args.rho is not None else 4.0,
        trials=args.trials if args.trials is not None else 100,
        rng_seed=_derived_seed(seed, 0))


def _run_entropy_tk(args, seed):
    return param_engine.entropy_tk_check([50, 60], [2, 4])


def _run_binom(args, seed):
    return gauss_mc.binom_bound_check(n_max=60)


LEMMA_RUNNERS = {
    "l1-sparse": _run_l1_sparse,
    "l1-decomp": _run_l1_decomp,
    "maurey": _run_maurey,
    "maurey-union": _run_maurey_union,
    "suppression": _run_suppression,
    "block-tail": _run_block_tail,
    "det-shrink": _run_det_shrink,
    "crosspoly-measure": _run_crosspoly_measure,
    "thickening": _run_thickening,
    "gauss-tail": _run_gauss_tail,
    "chi2-tail": _run_chi2_tail,
    "proj-monotone": _run_proj_monotone,
    "absorb": _run_absorb,
    "bridge": _run_bridge,
    "powering": _run_powering,
    "u-norm": _run_u_norm,
    "entropy-tk": _run_entropy_tk,
    "binom": _run_binom,
}


# ---------------------------------------------------------------------------
# report plumbing


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        obj = float(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, float):
        if math.isnan(obj):
            return None
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
    return obj


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, dict)):
        return json.dumps(value, separators=(",", ":"))
    return str(value)


def _flatten(payload, prefix=""):
    out = {}
    for key, value in payload.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            out.update(_flatten(value, prefix=f"{name}."))
        else:
            out[name] = value
    return out


def _csv_table(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _emit(args, command, config, seed, payload, wall_time=None,
          csv_rows=None) -> None:
    """Write the report in the requested format to --out or stdout.

    csv_rows, when given, is (header, list of rows) for tabular payloads;
    otherwise the payload is flattened to a single CSV row.
    """
    if args.format == "json":
        doc = {"schema": SCHEMA, "command": command, "config": config,
               "seed": seed, "version": __version__}
        if wall_time is not None:
            doc["wall_time"] = wall_time
        doc["report"] = _jsonable(payload)
        text = json.dumps(doc, indent=2) + "\n"
    else:
        lines = [
            f"# schema: {SCHEMA}",
            f"# command: {command}",
            f"# config: {json.dumps(_jsonable(config), separators=(',', ':'))}",
            f"# seed: {seed}",
            f"# version: {__version__}",
        ]
        if wall_time is not None:
            lines.append(f"# wall_time: {wall_time!r}")
        if csv_rows is None:
            flat = _flatten(_jsonable(payload))
            csv_rows = (list(flat), [list(flat.values())])
        lines.append(_csv_table(*csv_rows))
        text = "\n".join(lines)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config_echo(args, keys) -> dict:
    """Run-defining flags only: worker count and output path are execution
    plumbing and results must not depend on them."""
    return {key: getattr(args, key) for key in keys}


# ---------------------------------------------------------------------------
# commands


def _cmd_gen(args, seed):
    if args.n is None or args.m is None:
        raise InputError("gen requires -n and -m")
    Gamma, _ = gluskin.gen_gluskin(args.n, args.m, rng_seed=seed)
    config = _config_echo(args, ("n", "m", "format"))
    header = [f"c{j}" for j in range(args.m)]
    rows = [list(map(float, row)) for row in Gamma]
    _emit(args, "gen", config, seed, {"n": args.n, "m": args.m,
                                      "matrix": rows},
          csv_rows=(header, rows))
    return 0


def _cmd_verify(args, seed):
    runner = LEMMA_RUNNERS[args.lemma]
    start = time.perf_counter()
    payload = runner(args, seed)
    wall = time.perf_counter() - start
    payload = dict(payload)
    payload["lemma"] = args.lemma
    holds = bool(payload.get("holds"))
    config = _config_echo(args, ("lemma", "samples", "trials", "n", "m",
                                 "rho", "slack", "format"))
    _emit(args, "verify", config, seed, payload, wall_time=wall)
    return 0 if holds else 1


def _cmd_sweep(args, seed):
    constants_path = _resolve_constants_path(args)
    consts = param_engine.load_constants(constants_path)
    grid = [float(args.n)] if args.n is not None else list(DEFAULT_SWEEP_GRID)
    start = time.perf_counter()
    fit = param_engine.exponent_fit(grid)
    legacy_fit = (param_engine.exponent_fit(grid, legacy=True)
                  if args.legacy_exponent else None)
    rows = []
    for idx, row in enumerate(fit.rows):
        pset = param_engine.derive_params(int(row.n), constants=consts)
        report = param_engine.check_constraints(pset)
        entry = {
            "n": row.n,
            "s_tilde_star": row.s_tilde_star,
            "rho_star": row.rho_star,
            "Lambda_star": row.Lambda_star,
            "balance_ratio": row.balance_ratio,
        }
        for group, names in param_engine.CONSTRAINT_GROUPS.items():
            margin = min(report.entries[name].margin for name in names)
            entry[f"margin_{group.replace('-', '_')}"] = margin
        entry["all_hold"] = report.all_hold
        entry["slope_so_far"] = (None if math.isnan(row.slope_so_far)
                                 else row.slope_so_far)
        entry["slope_raw_so_far"] = (None if math.isnan(row.slope_raw_so_far)
                                     else row.slope_raw_so_far)
        if legacy_fit is not None:
            legacy_slope = legacy_fit.rows[idx].slope_so_far
            entry["legacy_slope_so_far"] = (None if math.isnan(legacy_slope)
                                            else legacy_slope)
        rows.append(entry)
    wall = time.perf_counter() - start
    summary = None
    if len(grid) >= 2:
        summary = {
            "slope": fit.slope,
            "slope_uncorrected": fit.slope_uncorrected,
            "correction_exponent": fit.correction_exponent,
            "target": fit.target,
        }
        if legacy_fit is not None:
            summary["legacy_slope"] = legacy_fit.slope
            summary["legacy_target"] = legacy_fit.target
    payload = {"rows": rows, "fit": summary}
    config = _config_echo(args, ("n", "legacy_exponent", "format"))
    config["constants"] = constants_path
    header = list(rows[0])
    _emit(args, "sweep", config, seed, payload, wall_time=wall,
          csv_rows=(header, [[r[k] for k in header] for r in rows]))
    return 0


def _cmd_bm_estimate(args, seed):
    if args.n is None:
        raise InputError("bm-estimate requires -n")
    start = time.perf_counter()
    if args.m is not None:
        _, body = gluskin.gen_gluskin(args.n, args.m, rng_seed=seed)
    else:
        body = CrossPolytope(np.eye(args.n))
    result = gluskin.bm_estimate(body, restarts=args.restarts,
                                 rng_seed=_derived_seed(seed, 1),
                                 workers=args.workers)
    wall = time.perf_counter() - start
    payload = {"n": args.n, "m": args.m, **result}
    config = _config_echo(args, ("n", "m", "restarts", "format"))
    _emit(args, "bm-estimate", config, seed, payload, wall_time=wall)
    return 0


def _cmd_params(args, seed):
    if args.n is None:
        raise InputError("params requires -n")
    constants_path = _resolve_constants_path(args)
    consts = param_engine.load_constants(constants_path)
    start = time.perf_counter()
    pset = param_engine.derive_params(args.n, constants=consts)
    report = param_engine.check_constraints(pset)
    wall = time.perf_counter() - start
    payload = {
        "params": {
            "n": pset.n, "m": pset.m, "rho": pset.rho,
            "Lambda": pset.Lambda, "s_tilde": pset.s_tilde, "r": pset.r,
            "s": pset.s, "L": pset.L, "epsilon": pset.epsilon,
            "rho_below_one": pset.rho_below_one,
            "pre_asymptotic": pset.pre_asymptotic,
            "constants": pset.constants,
        },
        "constraints": {
            name: {"lhs": e.lhs, "rhs": e.rhs, "holds": e.holds,
                   "margin": e.margin}
            for name, e in report.entries.items()
        },
        "groups": report.group_holds,
        "aux": report.aux,
        "all_hold": report.all_hold,
    }
    config = _config_echo(args, ("n", "format"))
    config["constants"] = constants_path
    _emit(args, "params", config, seed, payload, wall_time=wall)
    return 0 if report.all_hold else 1


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(parser):
    parser.add_argument("--seed", type=int, default=None,
                        help="RNG seed; drawn from entropy and echoed if absent")
    parser.add_argument("--samples", type=_count, default=None,
                        help="Monte Carlo sample count (accepts 1e6)")
    parser.add_argument("--trials", type=_count, default=None,
                        help="trial count for repeated-draw checks")
    parser.add_argument("-n", "--n", dest="n", type=_count, default=None,
                        help="dimension / grid point")
    parser.add_argument("-m", "--m", dest="m", type=_count, default=None,
                        help="generator count")
    parser.add_argument("--rho", type=float, default=None,
                        help="scale factor where a check takes one")
    parser.add_argument("--constants", default=None, metavar="FILE",
                        help="JSON constants file (CROSSPOLY_CONSTANTS wins)")
    parser.add_argument("--out", default=None, metavar="FILE",
                        help="write the report here instead of stdout")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--workers", type=int, default=1,
                        help="worker threads; results never depend on this")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crosspoly",
        description="cross-polytope toolkit: generation, named checks, "
                    "parameter sweeps, distance estimation")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="write an n x m Gaussian generator matrix")
    _add_common(p_gen)

    p_verify = sub.add_parser("verify", help="run one named check")
    p_verify.add_argument("lemma", choices=sorted(LEMMA_RUNNERS),
                          help="check to run")
    _add_common(p_verify)
    p_verify.add_argument("--slack", type=float, default=None,
                          help="sparsifier distance slack (maurey checks)")

    p_sweep = sub.add_parser(
        "sweep", help="envelope optimization and constraint margins over an n grid")
    _add_common(p_sweep)
    p_sweep.add_argument("--legacy-exponent", action="store_true",
                         dest="legacy_exponent",
                         help="add the shallow-branch comparison column")

    p_bm = sub.add_parser("bm-estimate",
                          help="heuristic sandwiching factor for a body")
    _add_common(p_bm)
    p_bm.add_argument("--restarts", type=int, default=4)

    p_params = sub.add_parser(
        "params", help="derive the parameter chain at one n and check it")
    _add_common(p_params)
    return parser


COMMANDS = {
    "gen": _cmd_gen,
    "verify": _cmd_verify,
    "sweep": _cmd_sweep,
    "bm-estimate": _cmd_bm_estimate,
    "params": _cmd_params,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    seed = args.seed
    if seed is None:
        seed = int.from_bytes(os.urandom(8), "big") >> 1
    try:
        return COMMANDS[args.command](args, seed)
    except InputError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except CrossPolyError as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
