import math

import numpy as np
import pytest

from qlab.entropy import _oracle_basis
from qlab.errors import NoMeasureError, ParamOutOfClassRangeError, UnknownNameError
from qlab.functions import (
    OC,
    OCV,
    OM,
    adjoint_star,
    boundary_weighted_eval,
    make_function,
    measure_total_mass,
    normalized_at_one,
    parse_function_spec,
    representing_measure_eval,
    scale,
)
from qlab.linalg import PositiveOperator, matrix_function
from qlab.rand import random_psd, rng_from

INF = float("inf")

OM_CATALOG = [("power", 0.25), ("power", 0.5), ("power", 0.75), ("power", 1.0),
              ("phi_t", 0.7), ("phi_t", 2.5), ("kubo_mori",), ("affine", 0.3, 1.2)]
OC_CATALOG = [("xlogx",), ("power", 2.0), ("power", 1.5), ("power", -0.5),
              ("psi_t", 0.7), ("psi_t", 2.0)]


class TestCatalog:
    def test_sqrt(self):
        f = make_function("power", 0.5)
        assert f(4.0) == pytest.approx(2.0)
        assert f.f_zero_plus == 0.0 and f.f_prime_inf == 0.0
        assert f.is_operator_monotone and f.is_operator_concave and f.is_positive

    def test_xlogx(self):
        f = make_function("xlogx")
        assert f(1.0) == pytest.approx(0.0)
        assert f.f_zero_plus == 0.0 and f.f_prime_inf == INF
        assert f.is_operator_convex

    def test_phi_t(self):
        f = make_function("phi_t", 1.0)
        assert f(1.0) == pytest.approx(0.5)
        assert f.f_prime_inf == 0.0

    def test_psi_decomposition(self):
        t = 2.0
        f = make_function("psi_t", t)
        phi = make_function("phi_t", t)
        for x in (0.3, 1.0, 4.7):
            assert f(x) == pytest.approx(x / (1 + t) - phi(x))
        assert f.f_prime_inf == pytest.approx(1.0 / (1 + t))

    def test_kubo_mori_stable_near_one(self):
        f = make_function("kubo_mori")
        assert f(1.0) == pytest.approx(1.0)
        assert f(1.0 + 1e-9) == pytest.approx(1.0 + 5e-10, abs=1e-12)
        assert f(2.0) == pytest.approx(1.0 / math.log(2.0))

    def test_kalpha(self):
        f = make_function("kalpha", 0.5)
        assert f(1.0) == pytest.approx(1.0)
        assert f(4.0) == pytest.approx(0.5 * (0.5 + 4 ** -0.5))

    def test_unknown_name(self):
        with pytest.raises(UnknownNameError):
            make_function("nope")

    def test_param_out_of_class_range(self):
        with pytest.raises(ParamOutOfClassRangeError):
            make_function("power", 3.0)
        f = make_function("power", 3.0, allow_untagged=True)
        assert not f.tags

    def test_parse_spec(self):
        f = parse_function_spec("power:0.5")
        assert f.name == "power" and f.params == (0.5,)

    def test_normalize(self):
        f = normalized_at_one(make_function("affine", 1.0, 1.0))
        assert f(1.0) == pytest.approx(1.0)


class TestBoundaryWeightedEval:
    def test_xlogx_zero_side(self):
        f = make_function("xlogx")
        assert boundary_weighted_eval(f, 0.0, 1.0) == 0.0

    def test_xlogx_infinite_slope(self):
        f = make_function("xlogx")
        assert boundary_weighted_eval(f, 1.0, 0.0) == INF

    def test_sqrt_vanishing_slope(self):
        f = make_function("power", 0.5)
        assert boundary_weighted_eval(f, 1.0, 0.0) == 0.0

    def test_zero_zero(self):
        assert boundary_weighted_eval(make_function("xlogx"), 0.0, 0.0) == 0.0

    def test_interior(self):
        f = make_function("power", 2.0)
        assert boundary_weighted_eval(f, 3.0, 2.0) == pytest.approx(4.5)

    @pytest.mark.parametrize("spec,a,b", [
        (("xlogx",), 0.0, 1.0), (("xlogx",), 2.0, 3.0),
        (("power", 0.5), 1.0, 0.0), (("power", 0.5), 0.0, 2.0),
        (("power", 0.25), 0.0, 1.5), (("psi_t", 1.0), 2.0, 0.0),
        (("phi_t", 1.0), 1.0, 0.0), (("power", 1.5), 0.0, 1.0),
    ])
    def test_matches_regularized_limit(self, spec, a, b):
        # b f(a/b) must agree with the extrapolated limit of
        # (b+eps) f((a+eps)/(b+eps)) whenever the limit is finite
        f = make_function(*spec)
        want = boundary_weighted_eval(f, a, b)
        assert math.isfinite(want)
        grid = [10.0 ** -p for p in (2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0)]
        basis = _oracle_basis(f, len(grid))
        vals = [(b + e) * f((a + e) / (b + e)) for e in grid]
        m = np.array([[phi(e) for phi in basis] for e in grid])
        coef, *_ = np.linalg.lstsq(m, np.array(vals), rcond=None)
        assert coef[0] == pytest.approx(want, abs=1e-6)


class TestAdjointTransform:
    def test_power_fixed_point(self):
        f = make_function("power", 0.7)
        assert adjoint_star(f) is f

    def test_resolvent_example(self):
        # h(x) = 2x/(x+1) has adjoint (x+1)/2
        h = scale(make_function("phi_t", 1.0), 2.0)
        star = adjoint_star(h)
        for x in (0.2, 1.0, 5.0):
            assert star(x) == pytest.approx((x + 1.0) / 2.0)

    def test_constant(self):
        star = adjoint_star(make_function("const", 4.0))
        assert star(3.0) == pytest.approx(0.25)

    @pytest.mark.parametrize("spec", OM_CATALOG)
    def test_involution(self, spec):
        h = make_function(*spec)
        if not h.is_positive:
            pytest.skip("adjoint needs positivity")
        again = adjoint_star(adjoint_star(h))
        for x in np.geomspace(0.01, 100.0, 17):
            assert again(x) == pytest.approx(h(x), abs=1e-12 * (1 + h(x)))


class TestRepresentingMeasures:
    def test_sqrt_reconstruction(self):
        f = make_function("power", 0.5)
        for x in np.geomspace(0.1, 10.0, 9):
            assert representing_measure_eval(f, x) == pytest.approx(
                math.sqrt(x), abs=1e-6)

    def test_sqrt_total_mass(self):
        # h(1) - h(0) - h'(inf) = 1 for the square root
        assert measure_total_mass(make_function("power", 0.5)) == pytest.approx(
            1.0, abs=1e-6)

    def test_point_mass_reconstruction(self):
        f = make_function("phi_t", 3.0)
        assert representing_measure_eval(f, 3.0) == pytest.approx(0.5)

    def test_affine_exact(self):
        f = make_function("affine", 1.5, 0.25)
        assert representing_measure_eval(f, 7.0) == pytest.approx(1.5 + 0.25 * 7.0)

    @pytest.mark.parametrize("spec,x", [
        (("xlogx",), 3.0), (("power", 1.5), 2.0), (("power", 1.9), 3.0),
        (("psi_t", 2.0), 3.0), (("kalpha", 0.5), 4.0), (("power", 0.25), 0.3),
    ])
    def test_catalog_reconstructions(self, spec, x):
        f = make_function(*spec)
        assert representing_measure_eval(f, x) == pytest.approx(f(x), abs=2e-6)

    def test_no_measure(self):
        with pytest.raises(NoMeasureError):
            representing_measure_eval(make_function("kubo_mori"), 1.0)


class TestOperatorClassProperties:
    @pytest.mark.parametrize("spec", OM_CATALOG)
    def test_operator_monotonicity(self, spec):
        f = make_function(*spec)
        assert OM in f.tags
        rng = rng_from(hash(spec) % (2 ** 32))
        for _ in range(25):
            d = int(rng.integers(2, 5))
            a = random_psd(rng, d)
            b = PositiveOperator(a.matrix + random_psd(rng, d).matrix)
            fa = matrix_function(a, f)
            fb = matrix_function(b, f)
            low = np.linalg.eigvalsh(fb - fa)[0]
            assert low >= -1e-8

    @pytest.mark.parametrize("spec", OC_CATALOG)
    def test_operator_midpoint_convexity(self, spec):
        f = make_function(*spec)
        assert OC in f.tags
        rng = rng_from((hash(spec) + 1) % (2 ** 32))
        for _ in range(25):
            d = int(rng.integers(2, 5))
            a = PositiveOperator(random_psd(rng, d).matrix + 0.2 * np.eye(d))
            b = PositiveOperator(random_psd(rng, d).matrix + 0.2 * np.eye(d))
            mid = PositiveOperator((a.matrix + b.matrix) / 2.0)
            lhs = matrix_function(mid, f)
            rhs = (matrix_function(a, f) + matrix_function(b, f)) / 2.0
            low = np.linalg.eigvalsh(rhs - lhs)[0]
            assert low >= -1e-8

    @pytest.mark.parametrize("spec", OM_CATALOG)
    def test_monotone_implies_concave_tag(self, spec):
        f = make_function(*spec)
        assert OCV in f.tags

    @pytest.mark.parametrize("spec", OM_CATALOG + OC_CATALOG)
    def test_boundary_metadata_consistent(self, spec):
        # values on a geometric grid must converge toward the stored limits
        f = make_function(*spec)
        if math.isfinite(f.f_zero_plus):
            errs = [abs(f(x) - f.f_zero_plus) for x in (1e-4, 1e-6, 1e-8)]
            assert errs[2] <= errs[0] + 1e-12 and errs[2] < 0.1
        if math.isfinite(f.f_prime_inf):
            errs = [abs(f(x) / x - f.f_prime_inf) for x in (1e4, 1e6, 1e8)]
            assert errs[2] <= errs[0] + 1e-12 and errs[2] < 0.1
