"""Two-point monotone metrics and chi-square divergences.

The metric pairs two invertible feet (rho, sigma) with a positive
operator-monotone weight h through the inverse of the two-variable
functional calculus; spectrally

    gamma_h(X, Y) = sum over eigenpairs (a, P), (b, Q) of
                    Tr(X* P Y Q) / (b h(a/b)).

It is dual to a quasi-entropy at the inverted feet with the adjoint
weight, monotone under trace-preserving maps with Schwarz adjoints, and
its equality cases form a battery parallel to the divergence one.  The
chi-square divergence is the same metric at equal feet applied to the
difference of two densities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channels import Channel, petz_recovery, schwarz_check
from .entropy import quasi_entropy, relative_entropy
from .equality import ConditionReport, _scalar_condition, _verdict, _worst, \
    group_ratios, ratio_grouped_equality
from .errors import (
    GridTooCoarseError,
    HypothesisViolatedError,
    NoMeasureError,
    NonPositiveFunctionError,
    NotDensityError,
    NotInvertibleError,
    ParamOutOfClassRangeError,
    SupportViolationError,
)
from .functions import (
    OMD,
    QuadratureConfig,
    DEFAULT_QUAD,
    SpectralFunction,
    _integrate_half_line,
    adjoint_star,
    make_function,
)
from .linalg import (
    PositiveOperator,
    as_matrix,
    as_positive_operator,
    dagger,
    frob,
)

INF = float("inf")


def _require_invertible(op: PositiveOperator, name: str) -> None:
    if not op.is_invertible():
        raise NotInvertibleError(f"{name} must be invertible (metric feet)")


def monotone_metric(h: SpectralFunction, rho, sigma, x, y=None) -> complex:
    """gamma_h(X, Y) at invertible feet; sesquilinear, positive at X = Y."""
    if not h.is_positive:
        raise NonPositiveFunctionError(f"{h.name} is not positive on (0, inf)")
    r = as_positive_operator(rho)
    s = as_positive_operator(sigma)
    _require_invertible(r, "rho")
    _require_invertible(s, "sigma")
    xm = as_matrix(x)
    ym = xm if y is None else as_matrix(y)
    total = 0.0 + 0.0j
    for a, p in r.positive_clusters:
        for b, q in s.positive_clusters:
            w = complex(np.trace(dagger(xm) @ p @ ym @ q))
            total += w / (b * h(a / b))
    return total


def monotone_metric_quadrature(h: SpectralFunction, rho, sigma, x, y=None,
                               cfg: QuadratureConfig = DEFAULT_QUAD) -> complex:
    """The same metric through the resolvent integral of 1/h:

        J_h^{-1} = a R_sigma^{-1} + b L_rho^{-1}
                   + integral (Delta + t)^{-1} R_sigma^{-1} (1+t) dlambda(t)

    using the stored omd representation of 1/h; the independent numerical
    route used to validate the spectral one."""
    lam = h.reciprocal_omd_measure
    if lam is None:
        raise NoMeasureError(f"{h.name} has no stored reciprocal representation")
    r = as_positive_operator(rho)
    s = as_positive_operator(sigma)
    _require_invertible(r, "rho")
    _require_invertible(s, "sigma")
    xm = as_matrix(x)
    ym = xm if y is None else as_matrix(y)
    pairs = [(a, b, complex(np.trace(dagger(xm) @ p @ ym @ q)))
             for a, p in r.positive_clusters
             for b, q in s.positive_clusters]
    total = 0.0 + 0.0j
    total += lam.a * sum(w / b for a, b, w in pairs)
    total += lam.b * sum(w / a for a, b, w in pairs)

    def resolvent(t: float) -> complex:
        return sum(w / (a + t * b) for a, b, w in pairs)

    for t, wgt in lam.point_masses:
        total += wgt * (1.0 + t) * resolvent(t)
    if lam.density is not None:
        re_val, re_err = _integrate_half_line(
            lambda t: lam.density(t) * (1.0 + t) * resolvent(t).real, cfg)
        im_val, _ = _integrate_half_line(
            lambda t: lam.density(t) * (1.0 + t) * resolvent(t).imag, cfg)
        total += re_val + 1j * im_val
    return total


def metric_duality_gap(h: SpectralFunction, rho, sigma, x) -> float:
    """|gamma_h(X, X) - S_{h*}^X(rho^{-1} || sigma^{-1})|, the duality
    identity connecting metrics and quasi-entropies."""
    r = as_positive_operator(rho)
    s = as_positive_operator(sigma)
    _require_invertible(r, "rho")
    _require_invertible(s, "sigma")
    lhs = monotone_metric(h, r, s, x).real
    star = adjoint_star(h)
    rhs = quasi_entropy(star, PositiveOperator(r.gen_inverse()),
                        PositiveOperator(s.gen_inverse()), x).value
    return abs(lhs - rhs)


# -- chi-square divergences ---------------------------------------------------

@dataclass(frozen=True)
class Chi2Value:
    """Chi-square divergence with its two defining routes: the quadratic
    form in rho - sigma, and the equal-feet metric of rho minus one."""
    value: float
    via_form: float
    via_metric: float
    routes_agree: bool


def chi2_divergence(k: SpectralFunction, rho, sigma, tol: float = 1e-9) -> Chi2Value:
    """Chi-square divergence of two densities with rho^0 <= sigma^0,
    computed on the support of sigma."""
    if OMD not in k.tags or not k.is_positive:
        raise ParamOutOfClassRangeError(
            f"{k.name} is not positive operator monotone decreasing")
    if abs(k(1.0) - 1.0) > 1e-12:
        raise ParamOutOfClassRangeError("k(1) = 1 normalization required")
    r = as_positive_operator(rho)
    s = as_positive_operator(sigma)
    if abs(r.trace() - 1.0) > 1e-10 or abs(s.trace() - 1.0) > 1e-10:
        raise NotDensityError("chi-square needs unit-trace states")
    d = r.dim
    s0 = s.support()
    if frob((np.eye(d) - s0) @ r.support()) > 1e-9 * d:
        raise SupportViolationError("rho support exceeds sigma support")
    w = s.eigenvectors[:, s.eigenvalues > 0]
    sh = PositiveOperator(dagger(w) @ s.matrix @ w)
    rh = dagger(w) @ r.matrix @ w
    delta = rh - sh.matrix

    def omega_form(xm: np.ndarray, ym: np.ndarray) -> float:
        tot = 0.0
        for a, p in sh.positive_clusters:
            for b, q in sh.positive_clusters:
                tot += float(np.real(np.trace(dagger(xm) @ p @ ym @ q))
                             * k(a / b) / b)
        return tot

    via_form = omega_form(delta, delta)
    via_metric = omega_form(rh, rh) - 1.0
    agree = abs(via_form - via_metric) <= tol * (1.0 + abs(via_form) + abs(via_metric))
    return Chi2Value(value=via_form, via_form=via_form, via_metric=via_metric,
                     routes_agree=agree)


def chi2_alpha(alpha: float, rho, sigma) -> float:
    """The power-weight special case Tr rho sigma^{-alpha} rho sigma^{alpha-1} - 1."""
    r = as_positive_operator(rho)
    s = as_positive_operator(sigma)
    m = r.matrix @ s.power(-alpha) @ r.matrix @ s.power(alpha - 1.0)
    return float(np.real(np.trace(m))) - 1.0


# -- equality batteries -------------------------------------------------------

@dataclass
class MetricBatteryReport:
    """Condition reports for one metric-preservation instance; under the
    standing hypotheses every listed condition is equivalent, so the audit
    is a single class."""
    conditions: dict[str, ConditionReport]
    equivalence_class: tuple[str, ...]
    anomalies: list[str]


@dataclass
class _MetricSetup:
    phi: Channel
    rho: PositiveOperator
    sigma: PositiveOperator
    k: np.ndarray
    k_out: np.ndarray
    rho_out: PositiveOperator      # compressed to the output support
    sigma_out: PositiveOperator
    k_out_hat: np.ndarray
    iso_out: np.ndarray
    tol: float

    @classmethod
    def build(cls, phi: Channel, rho, sigma, k, tol: float) -> "_MetricSetup":
        r = as_positive_operator(rho)
        s = as_positive_operator(sigma)
        _require_invertible(r, "rho")
        _require_invertible(s, "sigma")
        km = as_matrix(k)
        k_out = phi.apply(km)
        q_supp = PositiveOperator(phi.apply(np.eye(phi.dim_in, dtype=complex)))
        w = q_supp.eigenvectors[:, q_supp.eigenvalues > 0]
        r_out = PositiveOperator(dagger(w) @ phi.apply(r.matrix) @ w)
        s_out = PositiveOperator(dagger(w) @ phi.apply(s.matrix) @ w)
        if not (r_out.is_invertible() and s_out.is_invertible()):
            raise NotInvertibleError(
                "channel images are singular on the output support")
        return cls(phi=phi, rho=r, sigma=s, k=km, k_out=k_out,
                   rho_out=r_out, sigma_out=s_out,
                   k_out_hat=dagger(w) @ k_out @ w, iso_out=w, tol=tol)

    def metric_pair(self, h: SpectralFunction) -> tuple[float, float]:
        lhs = monotone_metric(h, self.rho_out, self.sigma_out, self.k_out_hat).real
        rhs = monotone_metric(h, self.rho, self.sigma, self.k).real
        return lhs, rhs

    def power_pair(self, alpha: float) -> tuple[float, float]:
        lhs = float(np.real(np.trace(
            dagger(self.k_out_hat) @ self.rho_out.power(-alpha) @ self.k_out_hat
            @ self.sigma_out.power(alpha - 1.0))))
        rhs = float(np.real(np.trace(
            dagger(self.k) @ self.rho.power(-alpha) @ self.k
            @ self.sigma.power(alpha - 1.0))))
        return lhs, rhs

    def resolvent_grid(self) -> list[float]:
        ratios = [a / b for a, _ in self.rho.positive_clusters
                  for b, _ in self.sigma.positive_clusters]
        ratios += [a / b for a, _ in self.rho_out.positive_clusters
                   for b, _ in self.sigma_out.positive_clusters]
        m = len(group_ratios([(r, 1.0) for r in ratios]).classes)
        center = math.exp(float(np.mean([math.log(r) for r in ratios])))
        return [center * 2.0 ** (j - (m - 1) / 2.0) for j in range(m)]


def metric_equality_battery(phi: Channel, rho, sigma, k, tol: float = 1e-8,
                            alpha: float = 0.5, samples: int = 64,
                            seed=0) -> MetricBatteryReport:
    """Equality battery for metric preservation under the channel.

    Conditions: i  (every weight, via the resolvent family),
    ii (the sqrt weight, whose reciprocal measure has full support),
    iii/iv (the dual quasi-entropy family at inverted feet),
    v  (all complex powers, decided by ratio grouping),
    vi (one fractional power), vii (the operator form for all powers),
    viii (recovery-map fixation, applicable at equal feet)."""
    if not phi.tp:
        raise HypothesisViolatedError("channel is not trace preserving",
                                      hypothesis="trace-preserving")
    if schwarz_check(phi, samples=samples, seed=seed).status == "fail":
        raise HypothesisViolatedError("adjoint is not a Schwarz map",
                                      hypothesis="schwarz-adjoint")
    st = _MetricSetup.build(phi, rho, sigma, k, tol)
    conditions: dict[str, ConditionReport] = {}

    parts = []
    grid = st.resolvent_grid()
    for label, h in [("1", make_function("const", 1.0)),
                     ("x", make_function("power", 1.0))] + \
                    [(f"x+{t:.4g}", make_function("affine", t, 1.0)) for t in grid]:
        lhs, rhs = st.metric_pair(h)
        parts.append(_scalar_condition(f"i[{label}]", lhs, rhs, tol, witness=label))
    conditions["i"] = _worst("i", parts, tol)

    lhs, rhs = st.metric_pair(make_function("power", 0.5))
    conditions["ii"] = _scalar_condition("ii", lhs, rhs, tol, witness="h=sqrt")

    inv_r = PositiveOperator(st.rho.gen_inverse())
    inv_s = PositiveOperator(st.sigma.gen_inverse())
    inv_r_out = PositiveOperator(st.rho_out.gen_inverse())
    inv_s_out = PositiveOperator(st.sigma_out.gen_inverse())
    parts = []
    for label, h in [("1", make_function("const", 1.0)),
                     ("x", make_function("power", 1.0))] + \
                    [(f"phi_{t:.4g}", make_function("phi_t", t)) for t in grid]:
        l = quasi_entropy(h, inv_r_out, inv_s_out, st.k_out_hat).value
        r_ = quasi_entropy(h, inv_r, inv_s, st.k).value
        parts.append(_scalar_condition(f"iii[{label}]", l, r_, tol, witness=label))
    conditions["iii"] = _worst("iii", parts, tol)
    l = quasi_entropy(make_function("power", 0.5), inv_r_out, inv_s_out,
                      st.k_out_hat).value
    r_ = quasi_entropy(make_function("power", 0.5), inv_r, inv_s, st.k).value
    conditions["iv"] = _scalar_condition("iv", l, r_, tol, witness="h=sqrt")

    lhs_terms = [(b / a, complex(np.trace(dagger(st.k_out_hat) @ p
                                          @ st.k_out_hat @ q)) / b)
                 for a, p in st.rho_out.positive_clusters
                 for b, q in st.sigma_out.positive_clusters]
    rhs_terms = [(b / a, complex(np.trace(dagger(st.k) @ p @ st.k @ q)) / b)
                 for a, p in st.rho.positive_clusters
                 for b, q in st.sigma.positive_clusters]
    conditions["v"] = ratio_grouped_equality(lhs_terms, rhs_terms, tol, cid="v")

    if not 0.0 < alpha < 1.0:
        raise ParamOutOfClassRangeError("alpha must lie in (0, 1)")
    lhs, rhs = st.power_pair(alpha)
    conditions["vi"] = _scalar_condition("vi", lhs, rhs, tol,
                                         witness=f"alpha={alpha}")

    r_out_full = PositiveOperator(st.phi.apply(st.rho.matrix))
    s_out_full = PositiveOperator(st.phi.apply(st.sigma.matrix))
    lhs_terms = [(b / a, st.phi.adjoint_apply(p @ st.k_out @ q) / b)
                 for a, p in r_out_full.positive_clusters
                 for b, q in s_out_full.positive_clusters]
    rhs_terms = [(b / a, p @ st.k @ q / b)
                 for a, p in st.rho.positive_clusters
                 for b, q in st.sigma.positive_clusters]
    conditions["vii"] = ratio_grouped_equality(lhs_terms, rhs_terms, tol, cid="vii")

    eq_class = ["i", "ii", "iii", "iv", "v", "vi", "vii"]
    if frob(st.rho.matrix - st.sigma.matrix) <= 1e-12 * st.rho.dim:
        rec = petz_recovery(phi, st.sigma)
        res = rec.apply(st.k_out) - st.k
        conditions["viii"] = _verdict("viii", frob(st.k), frob(rec.apply(st.k_out)),
                                      frob(res), tol)
        eq_class.append("viii")

    verdicts = {}
    for cid in eq_class:
        rep = conditions[cid]
        if not rep.marginal:
            verdicts.setdefault(rep.verdict, []).append(cid)
    anomalies = []
    if len(verdicts) > 1:
        anomalies.append("equivalence class split: " + "; ".join(
            f"{v}: {','.join(ids)}" for v, ids in sorted(verdicts.items())))
    return MetricBatteryReport(conditions=conditions,
                               equivalence_class=tuple(eq_class),
                               anomalies=anomalies)


def chi2_equality_battery(phi: Channel, rho, sigma, tol: float = 1e-8,
                          alpha: float = 0.5, samples: int = 64,
                          seed=0) -> MetricBatteryReport:
    """Equality battery for chi-square preservation: the every-weight
    family (i'), one full-support weight (ii'), the power special case
    (vi'), and the operator condition over all powers (vii')."""
    if not phi.tp:
        raise HypothesisViolatedError("channel is not trace preserving",
                                      hypothesis="trace-preserving")
    if schwarz_check(phi, samples=samples, seed=seed).status == "fail":
        raise HypothesisViolatedError("adjoint is not a Schwarz map",
                                      hypothesis="schwarz-adjoint")
    r = as_positive_operator(rho)
    s = as_positive_operator(sigma)
    r_out = PositiveOperator(phi.apply(r.matrix))
    s_out = PositiveOperator(phi.apply(s.matrix))
    conditions: dict[str, ConditionReport] = {}

    ratios = [a / b for a, _ in s.positive_clusters for b, _ in s.positive_clusters]
    ratios += [a / b for a, _ in s_out.positive_clusters
               for b, _ in s_out.positive_clusters]
    m = len(group_ratios([(x, 1.0) for x in ratios]).classes)
    center = math.exp(float(np.mean([math.log(x) for x in ratios])))
    grid = [center * 2.0 ** (j - (m - 1) / 2.0) for j in range(m)]

    def resolvent_weight(t: float) -> SpectralFunction:
        g = make_function("affine", t, 1.0)  # x + t
        return SpectralFunction(
            name=f"g_{t:.4g}", params=(t,),
            fn=lambda x, t=t: (1.0 + t) / (x + t),
            f_zero_plus=(1.0 + t) / t, f_prime_inf=0.0,
            tags=frozenset({OMD, "positive", "operator-convex"}))

    parts = []
    family = [("1", make_function("const", 1.0))]
    family += [(f"g_{t:.4g}", resolvent_weight(t)) for t in grid]
    inv = SpectralFunction(name="1/x", params=(), fn=lambda x: 1.0 / x,
                           f_zero_plus=INF, f_prime_inf=0.0,
                           tags=frozenset({OMD, "positive", "operator-convex"}))
    family.append(("1/x", inv))
    for label, kf in family:
        l = chi2_divergence(kf, r_out, s_out, tol).value
        r_ = chi2_divergence(kf, r, s, tol).value
        parts.append(_scalar_condition(f"i_prime[{label}]", l, r_, tol,
                                       witness=label))
    conditions["i_prime"] = _worst("i_prime", parts, tol)

    k_half = make_function("kalpha", 0.5)
    l = chi2_divergence(k_half, r_out, s_out, tol).value
    r_ = chi2_divergence(k_half, r, s, tol).value
    conditions["ii_prime"] = _scalar_condition("ii_prime", l, r_, tol,
                                               witness="k=kalpha(0.5)")

    conditions["vi_prime"] = _scalar_condition(
        "vi_prime", chi2_alpha(alpha, r_out, s_out), chi2_alpha(alpha, r, s),
        tol, witness=f"alpha={alpha}")

    lhs_terms = [(b / a, phi.adjoint_apply(p @ r_out.matrix @ q) / b)
                 for a, p in s_out.positive_clusters
                 for b, q in s_out.positive_clusters]
    rhs_terms = [(b / a, p @ r.matrix @ q / b)
                 for a, p in s.positive_clusters
                 for b, q in s.positive_clusters]
    conditions["vii_prime"] = ratio_grouped_equality(lhs_terms, rhs_terms, tol,
                                                     cid="vii_prime")

    eq_class = ("i_prime", "ii_prime", "vi_prime", "vii_prime")
    verdicts = {}
    for cid in eq_class:
        rep = conditions[cid]
        if not rep.marginal:
            verdicts.setdefault(rep.verdict, []).append(cid)
    anomalies = []
    if len(verdicts) > 1:
        anomalies.append("equivalence class split: " + "; ".join(
            f"{v}: {','.join(ids)}" for v, ids in sorted(verdicts.items())))
    return MetricBatteryReport(conditions=conditions, equivalence_class=eq_class,
                               anomalies=anomalies)


# -- Hessian cross-check ------------------------------------------------------

@dataclass(frozen=True)
class HessianCheckReport:
    """Finite-difference Hessian of the relative entropy against the
    logarithmic-mean metric value."""
    metric_value: float
    hessian_value: float
    difference: float
    step: float


def kubo_mori_hessian_check(sigma, x, y=None, step: Optional[float] = None,
                            tol: float = 1e-4) -> HessianCheckReport:
    """Validate that the logarithmic-mean weight reproduces minus the mixed
    second derivative of the relative entropy at equal arguments.

    Uses a 4-point central mixed difference with one Richardson step; the
    default step is 1e-3 times the smallest eigenvalue of sigma."""
    s = as_positive_operator(sigma)
    _require_invertible(s, "sigma")
    xm = as_matrix(x)
    ym = xm if y is None else as_matrix(y)
    for m, nm in ((xm, "X"), (ym, "Y")):
        if frob(m - dagger(m)) > 1e-10 * max(1.0, frob(m)):
            raise GridTooCoarseError(f"{nm} must be Hermitian")
        if abs(np.trace(m)) > 1e-10 * max(1.0, frob(m)):
            raise GridTooCoarseError(f"{nm} must be traceless")
    lo = float(np.min(s.eigenvalues))
    h = step if step is not None else 1e-3 * lo
    scale_x = max(1.0, frob(xm))
    scale_y = max(1.0, frob(ym))

    def entropy_at(a: float, b: float) -> float:
        left = s.matrix + a * xm
        right = s.matrix + b * ym
        wl = np.linalg.eigvalsh((left + dagger(left)) / 2.0)
        wr = np.linalg.eigvalsh((right + dagger(right)) / 2.0)
        if wl[0] <= 0 or wr[0] <= 0:
            raise GridTooCoarseError("step leaves the positive cone")
        return relative_entropy(PositiveOperator(left), PositiveOperator(right))

    def mixed(hh: float) -> float:
        sx, sy = hh / scale_x, hh / scale_y
        val = (entropy_at(sx, sy) - entropy_at(sx, -sy)
               - entropy_at(-sx, sy) + entropy_at(-sx, -sy)) / (4.0 * sx * sy)
        return val

    coarse, fine = mixed(h), mixed(h / 2.0)
    hess = -(4.0 * fine - coarse) / 3.0
    metric = monotone_metric(make_function("kubo_mori"), s, s, xm, ym).real
    return HessianCheckReport(metric_value=metric, hessian_value=hess,
                              difference=abs(metric - hess), step=h)
