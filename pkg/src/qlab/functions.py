"""Scalar function catalog with operator-class metadata.

Each catalog entry records the boundary data f(0+) and f'(inf) (extended
reals, +inf is an in-band value), operator-class tags, and, where known in
closed form, the representing measure of one of three integral shapes:

* kind ``om``:  h(x) = a + b*x + integral of x(1+t)/(x+t) dmu(t)
* kind ``oc``:  f(x) = f0 + a*x + b*x^2 + integral of (x/(1+t) - x/(x+t)) dnu(t)
* kind ``omd``: k(x) = a + b/x + integral of (1+t)/(x+t) dlambda(t)

The boundary-weighted evaluation b*f(a/b) implements the closure
conventions used by the divergences: f(0+)*b when a = 0, f'(inf)*a when
b = 0, and inf*0 = 0 on those paths only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .errors import (
    NoMeasureError,
    NonPositiveFunctionError,
    ParamOutOfClassRangeError,
    QuadratureFailureError,
    UnknownNameError,
)

OM = "operator-monotone"
OMD = "operator-monotone-decreasing"
OC = "operator-convex"
OCV = "operator-concave"
POS = "positive"

INF = float("inf")


@dataclass(frozen=True)
class QuadratureConfig:
    """Adaptive quadrature settings for measure reconstructions."""
    rel_tol: float = 1e-7
    limit: int = 200


DEFAULT_QUAD = QuadratureConfig()


@dataclass(frozen=True)
class RepresentingMeasure:
    """Measure data for one of the three integral shapes above.

    ``density`` is a nonnegative function of t > 0 (or None), point masses
    are (t, weight) pairs; (a, b) are the kind-specific affine parts and
    ``f0`` the constant used by the ``oc`` kind.
    """
    kind: str
    a: float = 0.0
    b: float = 0.0
    f0: float = 0.0
    density: Optional[Callable[[float], float]] = None
    point_masses: tuple[tuple[float, float], ...] = ()

    def kernel(self, x: float, t: float) -> float:
        if self.kind == "om":
            return x * (1.0 + t) / (x + t)
        if self.kind == "oc":
            return x / (1.0 + t) - x / (x + t)
        if self.kind == "omd":
            return (1.0 + t) / (x + t)
        raise ValueError(f"unknown measure kind {self.kind!r}")

    def affine_part(self, x: float) -> float:
        if self.kind == "om":
            return self.a + self.b * x
        if self.kind == "oc":
            return self.f0 + self.a * x + self.b * x * x
        if self.kind == "omd":
            return self.a + self.b / x
        raise ValueError(f"unknown measure kind {self.kind!r}")


def _integrate_half_line(g: Callable[[float], float], cfg: QuadratureConfig) -> tuple[float, float]:
    """Integrate g over (0, inf), split at t = 1 with the upper half mapped
    back to (0, 1] by inversion.

    Returns (value, error estimate); the split leaves only integrable
    endpoint singularities, which the adaptive rule resolves.
    """
    def lower(t: float) -> float:
        if t <= 0.0:
            return 0.0
        v = g(t)
        return v if math.isfinite(v) else 0.0

    def upper(s: float) -> float:
        if s <= 0.0:
            return 0.0
        v = g(1.0 / s) / (s * s)
        return v if math.isfinite(v) else 0.0

    lo, e1 = integrate.quad(lower, 0.0, 1.0, epsrel=cfg.rel_tol,
                            epsabs=0.0, limit=cfg.limit)
    hi, e2 = integrate.quad(upper, 0.0, 1.0, epsrel=cfg.rel_tol,
                            epsabs=0.0, limit=cfg.limit)
    return lo + hi, e1 + e2


def representing_measure_eval(f: "SpectralFunction", x: float,
                              cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Reconstruct f(x) from its representing measure."""
    if x <= 0:
        raise ValueError("reconstruction point must be positive")
    m = f.measure
    if m is None:
        raise NoMeasureError(f"{f.name} carries no representing measure")
    total = m.affine_part(x)
    for t, w in m.point_masses:
        total += w * m.kernel(x, t)
    if m.density is not None:
        val, err = _integrate_half_line(lambda t: m.density(t) * m.kernel(x, t), cfg)
        if err > 10.0 * cfg.rel_tol * (abs(val) + 1.0):
            raise QuadratureFailureError(
                f"quadrature residual {err:.2e} too large", residual=err)
        total += val
    return total


def measure_total_mass(f: "SpectralFunction", cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Total mass of the representing measure (density plus point masses)."""
    m = f.measure
    if m is None:
        raise NoMeasureError(f"{f.name} carries no representing measure")
    total = sum(w for _, w in m.point_masses)
    if m.density is not None:
        val, err = _integrate_half_line(m.density, cfg)
        if err > 10.0 * cfg.rel_tol * (abs(val) + 1.0):
            raise QuadratureFailureError(
                f"quadrature residual {err:.2e} too large", residual=err)
        total += val
    return float(total)


@dataclass(frozen=True)
class SpectralFunction:
    """Scalar function on (0, inf) with boundary values and class tags.

    ``f_zero_plus`` and ``f_prime_inf`` are extended reals; ``measure`` is
    the function's own representation, ``reciprocal_omd_measure`` the
    ``omd`` representation of 1/f when known (used by metric quadrature and
    to transport measures through the adjoint transform).
    """
    name: str
    params: tuple[float, ...]
    fn: Callable[[float], float]
    f_zero_plus: float
    f_prime_inf: float
    tags: frozenset[str]
    measure: Optional[RepresentingMeasure] = None
    reciprocal_omd_measure: Optional[RepresentingMeasure] = None

    def __call__(self, x: float) -> float:
        return float(self.fn(float(x)))

    @property
    def is_operator_monotone(self) -> bool:
        return OM in self.tags

    @property
    def is_operator_convex(self) -> bool:
        return OC in self.tags

    @property
    def is_operator_concave(self) -> bool:
        return OCV in self.tags

    @property
    def is_positive(self) -> bool:
        return POS in self.tags

    @property
    def is_convex_or_concave(self) -> bool:
        return bool(self.tags & {OC, OCV})

    def key(self) -> str:
        """Canonical 'name:p1:p2' spelling (CLI and report format)."""
        return ":".join([self.name] + [repr(float(p)) for p in self.params])


def boundary_weighted_eval(f: SpectralFunction, a: float, b: float) -> float:
    """The closure b*f(a/b) of the perspective, with boundary conventions.

    a = 0, b >= 0  ->  f(0+) * b        (inf * 0 = 0)
    a > 0, b = 0   ->  f'(inf) * a      (inf * a = inf)
    a, b > 0       ->  b * f(a/b)
    """
    if a < 0 or b < 0:
        raise ValueError("boundary_weighted_eval needs nonnegative arguments")
    if a == 0.0:
        if b == 0.0:
            return 0.0
        c = f.f_zero_plus
        return c * b if math.isfinite(c) else c
    if b == 0.0:
        c = f.f_prime_inf
        return c * a if math.isfinite(c) else c
    return b * f(a / b)


def _positive_on_grid(f: SpectralFunction) -> bool:
    xs = np.geomspace(1e-6, 1e6, 25)
    return all(f(x) > 0.0 for x in xs)


def adjoint_star(h: SpectralFunction) -> SpectralFunction:
    """The adjoint transform h*(x) = 1 / h(1/x), an involution on the
    positive operator-monotone functions."""
    if h.name == "power":
        return h  # (x^-a)^-1 = x^a
    if h.name == "const":
        return make_function("const", 1.0 / h.params[0])
    if not _positive_on_grid(h):
        raise NonPositiveFunctionError(f"{h.name} is not positive on (0, inf)")

    def star(x: float) -> float:
        return 1.0 / h.fn(1.0 / x)

    zero_plus = _limit_at_zero(star)
    prime_inf = _limit_slope_at_inf(star)
    tags = frozenset({OM, OCV, POS}) if (OM in h.tags and POS in h.tags) else frozenset({POS})
    measure = None
    if h.reciprocal_omd_measure is not None:
        measure = _omd_to_om_inverted(h.reciprocal_omd_measure)
    return SpectralFunction(
        name=f"star({h.key()})", params=(), fn=star,
        f_zero_plus=zero_plus, f_prime_inf=prime_inf,
        tags=tags, measure=measure)


def _omd_to_om_inverted(lam: RepresentingMeasure) -> RepresentingMeasure:
    """Push an omd measure lambda through t -> 1/t to get the om measure of
    the adjoint: mu_{h*}(t) = lambda_{1/h}(1/t)."""
    dens = None
    if lam.density is not None:
        g = lam.density
        dens = lambda t: g(1.0 / t) / (t * t)
    pms = tuple((1.0 / t, w) for t, w in lam.point_masses)
    return RepresentingMeasure(kind="om", a=lam.a, b=lam.b,
                               density=dens, point_masses=pms)


def _limit_at_zero(fn: Callable[[float], float]) -> float:
    vals = [fn(x) for x in np.geomspace(1e-8, 1e-5, 4)]
    v = vals[0]
    if abs(v) > 1e12:
        return INF if v > 0 else -INF
    return float(v)


def _limit_slope_at_inf(fn: Callable[[float], float]) -> float:
    vals = [fn(x) / x for x in np.geomspace(1e5, 1e8, 4)]
    v = vals[-1]
    if abs(v) > 1e12:
        return INF if v > 0 else -INF
    if abs(v) < 1e-12:
        return 0.0
    return float(v)


def scale(f: SpectralFunction, c: float) -> SpectralFunction:
    """c * f for c > 0; preserves every class tag."""
    if c <= 0:
        raise ValueError("scale factor must be positive")
    meas = None
    if f.measure is not None:
        m = f.measure
        dens = (lambda t, g=m.density: c * g(t)) if m.density is not None else None
        meas = replace(m, a=c * m.a, b=c * m.b, f0=c * m.f0, density=dens,
                       point_masses=tuple((t, c * w) for t, w in m.point_masses))
    return SpectralFunction(
        name=f"scaled({c}*{f.key()})", params=(),
        fn=lambda x: c * f.fn(x),
        f_zero_plus=c * f.f_zero_plus, f_prime_inf=c * f.f_prime_inf,
        tags=f.tags, measure=meas)


def _kubo_mori_eval(x: float) -> float:
    # (x-1)/log(x) with a stable series around x = 1
    u = x - 1.0
    if abs(u) < 1e-6:
        return 1.0 + u / 2.0 - u * u / 12.0
    return u / math.log(x)


def _power_om_measure(alpha: float) -> RepresentingMeasure:
    c = math.sin(alpha * math.pi) / math.pi
    return RepresentingMeasure(
        kind="om", density=lambda t: c * t ** (alpha - 1.0) / (1.0 + t))


def _power_reciprocal_omd_measure(alpha: float) -> RepresentingMeasure:
    # omd representation of x^(-alpha) for alpha in (0, 1)
    c = math.sin(alpha * math.pi) / math.pi
    return RepresentingMeasure(
        kind="omd", density=lambda t: c * t ** (-alpha) / (1.0 + t))


def make_function(name: str, *params: float, allow_untagged: bool = False) -> SpectralFunction:
    """Build a catalog function.

    Raises UnknownNameError for unknown names and ParamOutOfClassRangeError
    when the parameter leaves every class-valid range (pass
    ``allow_untagged=True`` to construct it anyway with empty tags).
    """
    if name in ("x", "identity"):
        return make_function("power", 1.0)
    if name == "one":
        return make_function("const", 1.0)

    if name == "const":
        (c,) = params
        tags = {OM, OMD, OC, OCV}
        if c > 0:
            tags.add(POS)
        return SpectralFunction("const", (float(c),), lambda x, c=c: float(c),
                                f_zero_plus=float(c), f_prime_inf=0.0,
                                tags=frozenset(tags),
                                measure=RepresentingMeasure(kind="om", a=float(c)))

    if name == "affine":
        c, d = params
        tags = {OC, OCV}
        if d >= 0:
            tags |= {OM}
            if c > 0 or (c >= 0 and d > 0):
                tags.add(POS)
        return SpectralFunction("affine", (float(c), float(d)),
                                lambda x, c=c, d=d: float(c + d * x),
                                f_zero_plus=float(c),
                                f_prime_inf=float(d),
                                tags=frozenset(tags),
                                measure=RepresentingMeasure(kind="om", a=float(c), b=float(d)))

    if name == "power":
        (alpha,) = params
        alpha = float(alpha)
        fn = lambda x, a=alpha: x ** a
        zero_plus = 1.0 if alpha == 0.0 else (0.0 if alpha > 0 else INF)
        prime_inf = 0.0 if alpha < 1 else (1.0 if alpha == 1.0 else INF)
        tags: set[str] = set()
        measure = None
        recip = None
        if 0.0 <= alpha <= 1.0:
            tags |= {OM, OCV, POS}
            if alpha in (0.0, 1.0):
                tags |= {OC}
            if 0.0 < alpha < 1.0:
                measure = _power_om_measure(alpha)
                recip = _power_reciprocal_omd_measure(alpha)
        elif -1.0 <= alpha < 0.0 or 1.0 < alpha <= 2.0:
            tags |= {OC}
            if alpha < 0:
                tags |= {OMD, POS}
            else:
                tags |= {POS}
                c = abs(math.sin(alpha * math.pi)) / math.pi
                measure = RepresentingMeasure(
                    kind="oc", a=1.0,
                    density=lambda t, c=c, a=alpha: c * t ** (a - 1.0))
        elif not allow_untagged:
            raise ParamOutOfClassRangeError(
                f"power exponent {alpha} outside [-1, 2]; no operator class applies")
        return SpectralFunction("power", (alpha,), fn, zero_plus, prime_inf,
                                frozenset(tags), measure, recip)

    if name == "xlogx":
        return SpectralFunction(
            "xlogx", (), lambda x: x * math.log(x),
            f_zero_plus=0.0, f_prime_inf=INF,
            tags=frozenset({OC}),
            measure=RepresentingMeasure(kind="oc", density=lambda t: 1.0))

    if name == "phi_t":
        (t0,) = params
        t0 = float(t0)
        if t0 <= 0:
            raise ParamOutOfClassRangeError("phi_t needs t > 0")
        return SpectralFunction(
            "phi_t", (t0,), lambda x, t=t0: x / (x + t),
            f_zero_plus=0.0, f_prime_inf=0.0,
            tags=frozenset({OM, OCV, POS}),
            measure=RepresentingMeasure(kind="om",
                                        point_masses=((t0, 1.0 / (1.0 + t0)),)))

    if name == "psi_t":
        (t0,) = params
        t0 = float(t0)
        if t0 <= 0:
            raise ParamOutOfClassRangeError("psi_t needs t > 0")
        return SpectralFunction(
            "psi_t", (t0,), lambda x, t=t0: x / (1.0 + t) - x / (x + t),
            f_zero_plus=0.0, f_prime_inf=1.0 / (1.0 + t0),
            tags=frozenset({OC}),
            measure=RepresentingMeasure(kind="oc", point_masses=((t0, 1.0),)))

    if name in ("kubo_mori", "h0"):
        return SpectralFunction(
            "kubo_mori", (), _kubo_mori_eval,
            f_zero_plus=0.0, f_prime_inf=0.0,
            tags=frozenset({OM, OCV, POS}))

    if name == "kalpha":
        (alpha,) = params
        alpha = float(alpha)
        if not 0.0 < alpha < 1.0:
            raise ParamOutOfClassRangeError("kalpha needs alpha in (0, 1)")
        c = math.sin(alpha * math.pi) / math.pi
        dens = lambda t, c=c, a=alpha: 0.5 * c * (t ** (-a) + t ** (a - 1.0)) / (1.0 + t)
        return SpectralFunction(
            "kalpha", (alpha,),
            lambda x, a=alpha: 0.5 * (x ** (-a) + x ** (a - 1.0)),
            f_zero_plus=INF, f_prime_inf=0.0,
            tags=frozenset({OMD, OC, POS}),
            measure=RepresentingMeasure(kind="omd", density=dens))

    raise UnknownNameError(f"unknown catalog function {name!r}")


def parse_function_spec(spec: str) -> SpectralFunction:
    """Parse the 'name:p1:p2' spelling used on the command line."""
    parts = spec.split(":")
    name, raw = parts[0], parts[1:]
    return make_function(name, *[float(p) for p in raw])


def normalized_at_one(f: SpectralFunction) -> SpectralFunction:
    """Optional f(1) = 1 normalization helper."""
    v = f(1.0)
    if v <= 0:
        raise NonPositiveFunctionError("cannot normalize: f(1) <= 0")
    return scale(f, 1.0 / v)
