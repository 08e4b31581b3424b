import math

import numpy as np
import pytest

from qlab.entropy import (
    epsilon_oracle,
    epsilon_regularized,
    j_superoperator,
    quasi_entropy,
    relative_entropy,
    relative_modular,
    standard_f_divergence,
    support_term_equivalence,
)
from qlab.errors import IndeterminateFormError, InfiniteWeightError
from qlab.functions import make_function
from qlab.linalg import PositiveOperator, hs_inner, matrix_units, vec
from qlab.rand import random_density, random_matrix, random_psd, rng_from

INF = float("inf")


class TestRelativeModular:
    def test_identity_pair(self):
        delta = relative_modular(np.eye(2), np.eye(2))
        assert np.allclose(delta.matrix, np.eye(4))

    def test_scalar_pair(self):
        delta = relative_modular(np.diag([2.0, 2.0]), np.diag([1.0, 1.0]))
        assert np.allclose(delta.matrix, 2 * np.eye(4))

    def test_entrywise_action(self):
        delta = relative_modular(np.diag([1.0, 2.0]), np.diag([3.0, 4.0]))
        e12 = np.array([[0.0, 1.0], [0.0, 0.0]])
        assert np.allclose(delta.apply(e12), e12 / 4.0)

    def test_psd_and_support(self):
        rng = rng_from(0)
        r = random_psd(rng, 3, rank=2)
        s = random_psd(rng, 3, rank=2)
        delta = relative_modular(r, s)
        w = np.linalg.eigvalsh((delta.matrix + delta.matrix.conj().T) / 2)
        assert w[0] >= -1e-10
        # support projection is L_{r^0} R_{s^0}
        supp = np.kron(s.support().T, r.support())
        z = PositiveOperator(delta.matrix)
        assert np.allclose(z.support(), supp, atol=1e-8)


class TestJSuperoperator:
    def test_identity_function_gives_left_mult(self):
        rng = rng_from(1)
        r = random_psd(rng, 3)
        s = random_psd(rng, 3)
        j = j_superoperator(make_function("power", 1.0), r, s)
        for e in matrix_units(3):
            assert np.allclose(j.apply(e), r.matrix @ e, atol=1e-10)

    def test_constant_function_gives_right_mult(self):
        rng = rng_from(2)
        r, s = random_psd(rng, 3), random_psd(rng, 3)
        j = j_superoperator(make_function("const", 1.0), r, s)
        for e in matrix_units(3):
            assert np.allclose(j.apply(e), e @ s.matrix, atol=1e-10)

    def test_sqrt_geometric_action(self):
        r = PositiveOperator(np.diag([1.0, 4.0]))
        s = PositiveOperator(np.diag([1.0, 1.0]))
        j = j_superoperator(make_function("power", 0.5), r, s)
        e12 = np.array([[0.0, 1.0], [0.0, 0.0]])
        e21 = e12.T
        assert np.allclose(j.apply(e12), e12)
        assert np.allclose(j.apply(e21), 2 * e21)

    def test_hermitian_on_hs_space(self):
        rng = rng_from(3)
        r, s = random_psd(rng, 3), random_psd(rng, 3)
        j = j_superoperator(make_function("power", 0.5), r, s).matrix
        assert np.linalg.norm(j - j.conj().T) < 1e-10

    def test_infinite_weight_rejected(self):
        r = PositiveOperator(np.diag([1.0, 1.0]))
        s = PositiveOperator(np.diag([1.0, 0.0]))
        with pytest.raises(InfiniteWeightError):
            j_superoperator(make_function("xlogx"), r, s)


class TestQuasiEntropyValues:
    def test_equal_states_any_function(self):
        rng = rng_from(4)
        rho = random_psd(rng, 3)
        for spec in (("xlogx",), ("power", 0.5), ("power", 2.0)):
            f = make_function(*spec)
            got = standard_f_divergence(f, rho, rho).value
            assert got == pytest.approx(f(1.0) * rho.trace(), abs=1e-10)

    def test_classical_kl(self):
        rho = np.diag([0.5, 0.5])
        sigma = np.diag([0.75, 0.25])
        got = standard_f_divergence(make_function("xlogx"), rho, sigma)
        assert got.value == pytest.approx(0.5 * math.log(4.0 / 3.0))
        assert got.decomposition_valid
        assert got.value == pytest.approx(got.fc_term + got.boundary_term)

    def test_support_violation_infinite(self):
        rho = np.diag([1.0, 0.0])
        sigma = np.diag([0.0, 1.0])
        got = standard_f_divergence(make_function("xlogx"), rho, sigma)
        assert got.value == INF
        assert got.boundary_term == INF

    def test_power_trace_formula(self):
        rng = rng_from(5)
        rho = PositiveOperator(random_psd(rng, 3).matrix + 0.3 * np.eye(3))
        sig = PositiveOperator(random_psd(rng, 3).matrix + 0.3 * np.eye(3))
        k = random_matrix(rng, 3)
        for alpha in (0.3, 0.5, 1.5):
            f = make_function("power", alpha)
            want = np.trace(k.conj().T
                            @ rho.power(alpha) @ k @ sig.power(1 - alpha)).real
            got = quasi_entropy(f, rho, sig, k).value
            assert got == pytest.approx(float(want), rel=1e-9)

    def test_functional_calculus_agreement_invertible(self):
        # <K sigma^(1/2), f(Delta)(K sigma^(1/2))> route for invertible states
        rng = rng_from(6)
        rho = PositiveOperator(random_psd(rng, 3).matrix + 0.3 * np.eye(3))
        sig = PositiveOperator(random_psd(rng, 3).matrix + 0.3 * np.eye(3))
        k = random_matrix(rng, 3)
        f = make_function("power", 0.5)
        delta = relative_modular(rho, sig).matrix
        w, u = np.linalg.eigh((delta + delta.conj().T) / 2)
        fd = (u * np.sqrt(np.maximum(w, 0))) @ u.conj().T
        veck = vec(k @ sig.sqrt())
        want = float(np.real(veck.conj() @ (fd @ veck)))
        got = quasi_entropy(f, rho, sig, k).value
        assert got == pytest.approx(want, rel=1e-9)

    def test_chi2_style_diagonal(self):
        p = np.diag([0.2, 0.8])
        q = np.diag([0.5, 0.5])
        got = standard_f_divergence(make_function("power", 2.0), p, q).value
        assert got == pytest.approx(0.04 / 0.5 + 0.64 / 0.5)

    def test_constant_function(self):
        rng = rng_from(7)
        sig = random_psd(rng, 3)
        got = standard_f_divergence(make_function("const", 1.0),
                                    random_psd(rng, 3), sig).value
        assert got == pytest.approx(sig.trace())

    def test_rejects_unclassified_function(self):
        f = make_function("power", 3.0, allow_untagged=True)
        with pytest.raises(IndeterminateFormError):
            standard_f_divergence(f, np.eye(2), np.eye(2))


class TestDecomposition:
    def test_split_identity_rank_deficient(self):
        rng = rng_from(8)
        for _ in range(20):
            rho = random_psd(rng, 4, rank=3)
            sig = random_psd(rng, 4, rank=3)
            k = random_matrix(rng, 4)
            for spec in (("power", 0.5), ("phi_t", 1.0), ("psi_t", 2.0)):
                v = quasi_entropy(make_function(*spec), rho, sig, k)
                assert v.decomposition_valid
                assert v.value == pytest.approx(v.fc_term + v.boundary_term,
                                                abs=1e-9 * (1 + abs(v.value)))


class TestEpsilonRegularization:
    def test_equal_states(self):
        rng = rng_from(9)
        sig = random_psd(rng, 3)
        f = make_function("xlogx")
        got = epsilon_regularized(f, sig, sig, None, eps=1e-3)
        want = f(1.0) * (sig.trace() + 3e-3)
        assert got == pytest.approx(want, abs=1e-12)

    def test_orthogonal_supports_sqrt_limit_zero(self):
        rho = np.diag([1.0, 0.0])
        sig = np.diag([0.0, 1.0])
        f = make_function("power", 0.5)
        spectral = standard_f_divergence(f, rho, sig).value
        assert spectral == pytest.approx(0.0, abs=1e-12)
        assert epsilon_oracle(f, rho, sig) == pytest.approx(0.0, abs=1e-5)

    def test_monotone_in_eps_for_normalized_convex(self):
        # f operator convex with f(1) = 0: regularized values decrease in eps
        rng = rng_from(10)
        rho = random_psd(rng, 3, rank=2)
        sig = random_psd(rng, 3, rank=2)
        f = make_function("xlogx")
        v_small = epsilon_regularized(f, rho, sig, None, eps=1e-3)
        v_large = epsilon_regularized(f, rho, sig, None, eps=1e-2)
        assert v_small >= v_large - 1e-12


class TestSupportTermEquivalence:
    def test_invertible_sigma_all_zero(self):
        rng = rng_from(11)
        rep = support_term_equivalence(
            random_psd(rng, 3), PositiveOperator(np.eye(3)), random_matrix(rng, 3))
        assert rep.all_zero and rep.consistent

    def test_cross_unit_all_nonzero(self):
        rho = np.diag([1.0, 0.0])
        sig = np.diag([1.0, 0.0])
        x = np.array([[0.0, 1.0], [0.0, 0.0]])
        rep = support_term_equivalence(rho, sig, x)
        assert rep.trace_term == pytest.approx(1.0)
        assert not rep.all_zero and rep.consistent

    def test_compatible_x_all_zero(self):
        rng = rng_from(12)
        rho = random_psd(rng, 3, rank=2)
        sig = PositiveOperator(rho.matrix + np.eye(3) * 0.0)
        x = rho.support() @ random_matrix(rng, 3) @ sig.support()
        rep = support_term_equivalence(rho, sig, x)
        assert rep.all_zero and rep.consistent


class TestScalingAndConvexity:
    def test_positive_homogeneity(self):
        rng = rng_from(13)
        rho, sig = random_psd(rng, 3, rank=2), random_psd(rng, 3, rank=2)
        k = random_matrix(rng, 3)
        f = make_function("power", 0.5)
        base = quasi_entropy(f, rho, sig, k).value
        for lam in (0.5, 2.0):
            got = quasi_entropy(f, PositiveOperator(lam * rho.matrix),
                                PositiveOperator(lam * sig.matrix), k).value
            assert got == pytest.approx(lam * base, rel=1e-10)

    @pytest.mark.parametrize("spec,convex", [
        (("xlogx",), True), (("power", 2.0), True), (("psi_t", 1.0), True),
        (("power", 0.5), False), (("phi_t", 1.0), False),
    ])
    def test_joint_convexity_or_concavity(self, spec, convex):
        f = make_function(*spec)
        rng = rng_from(abs(hash(spec)) % (2 ** 32))
        for _ in range(15):
            lam = float(rng.uniform(0.2, 0.8))
            r1, r2 = random_psd(rng, 3), random_psd(rng, 3)
            s1, s2 = random_psd(rng, 3), random_psd(rng, 3)
            k = random_matrix(rng, 3)
            mix_r = PositiveOperator(lam * r1.matrix + (1 - lam) * r2.matrix)
            mix_s = PositiveOperator(lam * s1.matrix + (1 - lam) * s2.matrix)
            mixed = quasi_entropy(f, mix_r, mix_s, k).value
            split = lam * quasi_entropy(f, r1, s1, k).value \
                + (1 - lam) * quasi_entropy(f, r2, s2, k).value
            slack = 1e-8 * (1 + abs(mixed) + abs(split))
            if convex:
                assert mixed <= split + slack
            else:
                assert mixed >= split - slack

    def test_lower_semicontinuity_spot_check(self):
        rng = rng_from(14)
        f = make_function("xlogx")
        rho = random_psd(rng, 3, rank=2)
        sig = PositiveOperator(rho.matrix + random_psd(rng, 3, rank=1).matrix)
        base = standard_f_divergence(f, rho, sig).value
        assert math.isfinite(base)
        bump = random_density(rng, 3)
        deficits = []
        for n in (1e2, 1e5, 1e8):
            rho_n = PositiveOperator((1 - 1.0 / n) * rho.matrix
                                     + (1.0 / n) * bump.matrix)
            val = standard_f_divergence(f, rho_n, sig).value
            deficits.append(max(0.0, base - val))
        # deficits shrink along the sequence and vanish in the limit
        assert deficits[2] <= deficits[0] + 1e-12
        assert deficits[2] <= 1e-6
