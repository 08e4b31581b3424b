"""Command-line front end; the only module with side effects.

Subcommands: entropy, metric, chi2, battery, detect, examples, sweep.
Reports are deterministic: the seed fixes every random draw and numbers
are emitted through repr, so identical configurations produce
byte-identical output. Exit codes: 0 success, 2 input validation failure,
3 hypothesis violation, 4 numerical anomaly or scenario mismatch.
Errors are written to stderr as one JSON object. QLAB_THREADS caps the
sweep worker pool (results are merged in index order either way).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import channels as ch
from .entropy import quasi_entropy, standard_f_divergence
from .equality import CONDITION_TAGS, dpi_check, run_battery
from .errors import (
    CalibrationFailureError,
    FactorizationFailedError,
    HypothesisViolatedError,
    NotAFactorError,
    NotDensityError,
    NotInvertibleError,
    NotRecoverableError,
    NotSchwarzError,
    NotUnitalError,
    QlabError,
    QuadratureFailureError,
    ScenarioMismatchError,
    SupportViolationError,
    ValidationError,
)
from .functions import QuadratureConfig, make_function, parse_function_spec
from .linalg import PositiveOperator
from .metrics import chi2_divergence, monotone_metric, monotone_metric_quadrature
from .rand import random_invertible_psd, rng_from
from .scenarios import SCENARIO_IDS, run_scenario
from .serialize import channel_from_json, dumps, jsonable, matrix_from_json
from .structure import detect_full_multiplicative_domain, \
    detect_tensor_embed, factorize_embed_partial_trace

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_HYPOTHESIS = 3
EXIT_ANOMALY = 4

_HYPOTHESIS_ERRORS = (HypothesisViolatedError, NotUnitalError, NotSchwarzError,
                      NotInvertibleError, NotDensityError, SupportViolationError)
_ANOMALY_ERRORS = (ScenarioMismatchError, QuadratureFailureError,
                   CalibrationFailureError, FactorizationFailedError)


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read JSON from {path}: {exc}") from exc


def _load_matrix(path: str) -> np.ndarray:
    return matrix_from_json(_load_json(path))


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text + ("" if text.endswith("\n") else "\n"))


def _condition_rows(conditions: dict) -> list[dict]:
    order = {cid: i for i, cid in enumerate(CONDITION_TAGS)}
    rows = []
    for cid in sorted(conditions, key=lambda c: order.get(c, 99)):
        rep = conditions[cid]
        rows.append({"id": rep.id, "lhs": rep.lhs, "rhs": rep.rhs,
                     "gap": rep.gap, "verdict": rep.verdict,
                     "tolerance": rep.tolerance, "witness": rep.witness,
                     "marginal": rep.marginal})
    return rows


def cmd_entropy(args) -> int:
    f = parse_function_spec(args.f)
    rho = PositiveOperator(_load_matrix(args.rho))
    sigma = PositiveOperator(_load_matrix(args.sigma))
    k = _load_matrix(args.K) if args.K else None
    if k is None:
        val = standard_f_divergence(f, rho, sigma)
    else:
        val = quasi_entropy(f, rho, sigma, k)
    _emit(dumps({"value": val.value, "fc_term": val.fc_term,
                 "boundary_term": val.boundary_term,
                 "decomposition_valid": val.decomposition_valid}), args.out)
    return EXIT_OK


def cmd_metric(args) -> int:
    h = parse_function_spec(args.h)
    rho = PositiveOperator(_load_matrix(args.rho))
    sigma = PositiveOperator(_load_matrix(args.sigma))
    x = _load_matrix(args.X)
    y = _load_matrix(args.Y) if args.Y else None
    val = monotone_metric(h, rho, sigma, x, y)
    report = {"value": {"re": val.real, "im": val.imag}}
    if h.reciprocal_omd_measure is not None:
        cfg = QuadratureConfig(rel_tol=args.quad_rel_tol, limit=args.quad_max_depth)
        qval = monotone_metric_quadrature(h, rho, sigma, x, y, cfg)
        report["quadrature_value"] = {"re": qval.real, "im": qval.imag}
        report["quadrature_gap"] = abs(val - qval)
    _emit(dumps(report), args.out)
    return EXIT_OK


def cmd_chi2(args) -> int:
    k = parse_function_spec(args.k)
    rho = PositiveOperator(_load_matrix(args.rho))
    sigma = PositiveOperator(_load_matrix(args.sigma))
    val = chi2_divergence(k, rho, sigma, tol=args.tol)
    _emit(dumps({"value": val.value, "via_form": val.via_form,
                 "via_metric": val.via_metric,
                 "routes_agree": val.routes_agree}), args.out)
    return EXIT_OK


def cmd_battery(args) -> int:
    phi = channel_from_json(_load_json(args.channel))
    rho = _load_matrix(args.rho)
    sigma = _load_matrix(args.sigma)
    k = _load_matrix(args.K)
    rep = run_battery(phi, rho, sigma, k, tol=args.tol, alpha=args.alpha,
                      beta=args.beta, seed=args.seed)
    payload = {"conditions": _condition_rows(rep.conditions),
               "regime": rep.regime,
               "equivalence_class": list(rep.equivalence_class),
               "k_in_mult_domain": rep.k_in_mult_domain,
               "k_distance": rep.k_distance,
               "equal_supports": rep.equal_supports,
               "boundary_ok": rep.boundary_ok,
               "anomalies": rep.anomalies}
    _emit(dumps(payload), args.out)
    return EXIT_ANOMALY if rep.anomalies else EXIT_OK


def cmd_detect(args) -> int:
    phi = channel_from_json(_load_json(args.channel))
    if args.sigma:
        sigma = PositiveOperator(_load_matrix(args.sigma))
        try:
            cert = detect_tensor_embed(phi, sigma)
        except (NotRecoverableError, NotAFactorError, FactorizationFailedError) as exc:
            _emit(dumps({"form": "none", "reason": str(exc)}), args.out)
            return EXIT_OK
        payload = {"form": cert.form, "dims": list(cert.split_dims),
                   "residual": cert.residual,
                   "eta": [float(v) for v in cert.eta.eigenvalues],
                   "Q_rank": int(round(np.trace(cert.q_projection).real))}
        _emit(dumps(payload), args.out)
        return EXIT_OK
    det = detect_full_multiplicative_domain(phi)
    if not det.full:
        _emit(dumps({"form": "none", "Q_rank": det.q_rank,
                     "reason": "compressed adjoint not fully multiplicative"}),
              args.out)
        return EXIT_OK
    try:
        cert = factorize_embed_partial_trace(phi)
    except (NotAFactorError, FactorizationFailedError) as exc:
        _emit(dumps({"form": "none", "Q_rank": det.q_rank, "reason": str(exc)}),
              args.out)
        return EXIT_OK
    payload = {"form": cert.form, "dims": list(cert.split_dims),
               "residual": cert.residual,
               "Q_rank": int(round(np.trace(cert.q_projection).real))}
    _emit(dumps(payload), args.out)
    return EXIT_OK


def cmd_examples(args) -> int:
    rep = run_scenario(args.which, seed=args.seed, tol=args.tol)
    _emit(dumps({"which": rep.which, "ok": rep.ok, "checks": rep.items}),
          args.out)
    return EXIT_OK


# -- sweeps -------------------------------------------------------------------

_DPI_MONOTONE = (("power", 0.25), ("power", 0.5), ("power", 0.75), ("phi_t", 1.0))
_DPI_CONVEX = (("xlogx",), ("power", 2.0), ("power", 1.5), ("psi_t", 1.0))


def _dpi_instance(index: int, seed: int, dim: int, tol: float) -> dict:
    child = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    rng = np.random.default_rng(child)
    phi = ch.random_tpcp(dim, dim, seed=np.random.default_rng(child.spawn(1)[0]))
    domain = ch.multiplicative_domain(phi)
    rho = random_invertible_psd(rng, dim)
    sigma = random_invertible_psd(rng, dim)
    k = domain.sample(rng)
    min_gap = float("inf")
    violations = 0
    for spec in _DPI_MONOTONE:
        rep = dpi_check("monotone", make_function(*spec), phi, rho, sigma, k,
                        tol=tol, domain=domain)
        if rep.gap < min_gap:
            min_gap = rep.gap
        violations += rep.verdict == "fail"
    for spec in _DPI_CONVEX:
        rep = dpi_check("convex", make_function(*spec), phi, rho, sigma, k,
                        tol=tol, domain=domain)
        if rep.verdict == "not-applicable":
            continue
        if rep.gap < min_gap:
            min_gap = rep.gap
        violations += rep.verdict == "fail"
    return {"index": index, "min_gap": min_gap, "violations": violations}


def _convexity_instance(index: int, seed: int, dim: int, tol: float) -> dict:
    child = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    rng = np.random.default_rng(child)
    lam = float(rng.uniform(0.2, 0.8))
    pairs = [(random_invertible_psd(rng, dim), random_invertible_psd(rng, dim))
             for _ in range(2)]
    min_gap = float("inf")
    violations = 0
    for spec in _DPI_CONVEX:
        f = make_function(*spec)
        mix_r = PositiveOperator(lam * pairs[0][0].matrix
                                 + (1 - lam) * pairs[1][0].matrix)
        mix_s = PositiveOperator(lam * pairs[0][1].matrix
                                 + (1 - lam) * pairs[1][1].matrix)
        split = lam * standard_f_divergence(f, *pairs[0]).value \
            + (1 - lam) * standard_f_divergence(f, *pairs[1]).value
        mixed = standard_f_divergence(f, mix_r, mix_s).value
        gap = split - mixed
        if gap < min_gap:
            min_gap = gap
        violations += gap < -tol * (1.0 + abs(split) + abs(mixed))
    return {"index": index, "min_gap": min_gap, "violations": violations}


def _battery_instance(index: int, seed: int, dim: int, tol: float) -> dict:
    child = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    rng = np.random.default_rng(child)
    env = 2
    phi = ch.partial_trace_channel(dim, env, which="second")
    r1 = random_invertible_psd(rng, dim)
    s1 = random_invertible_psd(rng, dim)
    om = random_invertible_psd(rng, env)
    om = PositiveOperator(om.matrix / om.trace())
    rho = np.kron(r1.matrix, om.matrix)
    sigma = np.kron(s1.matrix, om.matrix)
    k = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
    rep = run_battery(phi, rho, sigma, k, tol=tol)
    return {"index": index,
            "all_pass": rep.all_pass(tuple(rep.conditions)),
            "violations": 0 if rep.all_pass(tuple(rep.conditions)) else 1,
            "anomalies": len(rep.anomalies)}


def cmd_sweep(args) -> int:
    if args.dim > 6:
        raise ValidationError("sweep dimension capped at 6")
    worker = {"dpi": _dpi_instance, "convexity": _convexity_instance,
              "battery": _battery_instance}[args.kind]
    threads = int(os.environ.get("QLAB_THREADS", "0") or 0)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(
                lambda i: worker(i, args.seed, args.dim, args.tol),
                range(args.n)))
    else:
        rows = [worker(i, args.seed, args.dim, args.tol) for i in range(args.n)]
    rows.sort(key=lambda r: r["index"])
    total_violations = int(sum(r["violations"] for r in rows))
    if args.format == "csv":
        cols = sorted(rows[0]) if rows else ["index"]
        lines = ["# qlab-report v1", ",".join(cols)]
        for r in rows:
            lines.append(",".join(repr(r[c]) if isinstance(r[c], float)
                                  else str(r[c]) for c in cols))
        lines.append(f"# summary violations={total_violations} n={args.n} "
                     f"seed={args.seed} kind={args.kind}")
        _emit("\n".join(lines) + "\n", args.out)
    else:
        _emit(dumps({"kind": args.kind, "n": args.n, "seed": args.seed,
                     "rows": rows, "violations": total_violations}), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qlab",
        description="quasi-entropies, monotone metrics and equality batteries")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--tol", type=float, default=1e-8)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--quad-rel-tol", type=float, default=1e-7,
                       dest="quad_rel_tol")
        p.add_argument("--quad-max-depth", type=int, default=200,
                       dest="quad_max_depth")
        p.add_argument("--out", default=None)
        p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("entropy", help="quasi-entropy / standard f-divergence")
    p.add_argument("--f", required=True, help="function spec, e.g. power:0.5")
    p.add_argument("--rho", required=True)
    p.add_argument("--sigma", required=True)
    p.add_argument("--K", default=None)
    common(p)
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("metric", help="two-point monotone metric")
    p.add_argument("--h", required=True)
    p.add_argument("--rho", required=True)
    p.add_argument("--sigma", required=True)
    p.add_argument("--X", required=True)
    p.add_argument("--Y", default=None)
    common(p)
    p.set_defaults(func=cmd_metric)

    p = sub.add_parser("chi2", help="chi-square divergence")
    p.add_argument("--k", required=True)
    p.add_argument("--rho", required=True)
    p.add_argument("--sigma", required=True)
    common(p)
    p.set_defaults(func=cmd_chi2)

    p = sub.add_parser("battery", help="equality-condition battery")
    p.add_argument("--channel", required=True)
    p.add_argument("--rho", required=True)
    p.add_argument("--sigma", required=True)
    p.add_argument("--K", required=True)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--beta", type=float, default=1.5)
    common(p)
    p.set_defaults(func=cmd_battery)

    p = sub.add_parser("detect", help="divergence-preserving form detection")
    p.add_argument("--channel", required=True)
    p.add_argument("--sigma", default=None)
    common(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("examples", help="packaged worked scenarios")
    p.add_argument("--which", required=True, choices=SCENARIO_IDS)
    common(p)
    p.set_defaults(func=cmd_examples)

    p = sub.add_parser("sweep", help="randomized property sweeps")
    p.add_argument("--kind", required=True,
                   choices=("dpi", "convexity", "battery"))
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--dim", type=int, default=3)
    common(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        _error(exc)
        return EXIT_VALIDATION
    except _HYPOTHESIS_ERRORS as exc:
        _error(exc)
        return EXIT_HYPOTHESIS
    except _ANOMALY_ERRORS as exc:
        _error(exc)
        return EXIT_ANOMALY
    except QlabError as exc:
        _error(exc)
        return EXIT_VALIDATION


def _error(exc: Exception) -> None:
    sys.stderr.write(json.dumps({"error": type(exc).__name__,
                                 "message": str(exc)}) + "\n")


if __name__ == "__main__":
    sys.exit(main())
