import numpy as np
import pytest

from qlab.errors import NotHermitianError, ShapeMismatchError
from qlab.linalg import (
    PositiveOperator,
    SuperOperator,
    complex_power,
    generalized_inverse,
    hermitian_eig,
    hs_inner,
    left_multiplication,
    matrix_function,
    matrix_units,
    multiplication_superoperator,
    partial_trace,
    right_multiplication,
    support_projection,
    unvec,
    vec,
)
from qlab.functions import make_function
from qlab.rand import random_hermitian, random_matrix, random_psd, rng_from


class TestHermitianEig:
    def test_identity(self):
        w, u = hermitian_eig(np.eye(2))
        assert np.allclose(w, [1.0, 1.0])
        assert np.allclose(u @ u.conj().T, np.eye(2))

    def test_diagonal(self):
        w, _ = hermitian_eig(np.diag([3.0, 1.0]))
        assert np.allclose(w, [1.0, 3.0])

    def test_two_by_two(self):
        # characteristic polynomial of [[2,1],[1,2]] gives 1 and 3
        w, u = hermitian_eig([[2.0, 1.0], [1.0, 2.0]])
        assert np.allclose(w, [1.0, 3.0])
        assert abs(abs(u[0, 0]) - 1 / np.sqrt(2)) < 1e-12

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitianError):
            hermitian_eig([[0.0, 1.0], [0.0, 0.0]])

    def test_reconstruction_residual(self):
        rng = rng_from(0)
        for d in range(2, 7):
            a = random_hermitian(rng, d)
            w, u = hermitian_eig(a)
            recon = (u * w) @ u.conj().T
            assert np.linalg.norm(recon - a) <= 1e-10 * max(1, np.linalg.norm(a))
            gram = u.conj().T @ u
            assert np.linalg.norm(gram - np.eye(d)) <= 1e-10


class TestSupportsAndInverses:
    def test_support_of_singular_diagonal(self):
        assert np.allclose(support_projection(np.diag([2.0, 0.0])), np.diag([1.0, 0.0]))

    def test_support_of_invertible(self):
        rng = rng_from(1)
        a = random_psd(rng, 3)
        a = PositiveOperator(a.matrix + 0.5 * np.eye(3))
        assert np.allclose(a.support(), np.eye(3))

    def test_rank_one_support(self):
        v = np.array([1.0, 1.0]) / np.sqrt(2)
        p = support_projection(np.outer(v, v))
        assert np.allclose(p, [[0.5, 0.5], [0.5, 0.5]])
        assert np.linalg.norm(p @ p - p) < 1e-12

    def test_generalized_inverse(self):
        assert np.allclose(generalized_inverse(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]))
        assert np.allclose(generalized_inverse(np.eye(2)), np.eye(2))
        a = PositiveOperator([[2.0, 1.0], [1.0, 2.0]])
        inv = a.gen_inverse()
        assert np.allclose(inv @ a.matrix, a.support())
        assert np.allclose(a.matrix @ inv, a.support())


class TestFunctionalCalculus:
    def test_square(self):
        out = matrix_function(np.diag([1.0, 2.0]), lambda x: x * x)
        assert np.allclose(out, np.diag([1.0, 4.0]))

    def test_sqrt_eigenvalues(self):
        out = matrix_function([[2.0, 1.0], [1.0, 2.0]], make_function("power", 0.5))
        w = np.linalg.eigvalsh(out)
        assert np.allclose(w, [1.0, np.sqrt(3.0)])

    def test_xlogx_at_one_and_e(self):
        out = matrix_function(np.diag([1.0, np.e]), make_function("xlogx"))
        assert np.allclose(out, np.diag([0.0, np.e]))

    def test_complex_power(self):
        assert np.allclose(complex_power(np.diag([4.0, 0.0]), 0.5), np.diag([2.0, 0.0]))
        out = complex_power(np.diag([np.e, 1.0]), 1j)
        assert np.allclose(out, np.diag([np.exp(1j), 1.0]))

    def test_power_zero_is_support(self):
        rng = rng_from(2)
        a = random_psd(rng, 4, rank=2)
        assert np.allclose(a.power(0.0), a.support())

    def test_power_additivity_on_support(self):
        rng = rng_from(3)
        for _ in range(10):
            a = random_psd(rng, 4, rank=3)
            z1 = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
            z2 = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
            prod = a.power(z1) @ a.power(z2)
            assert np.linalg.norm(prod - a.power(z1 + z2)) <= 1e-10 * max(
                1, np.linalg.norm(prod))


class TestHsInner:
    def test_identity(self):
        assert hs_inner(np.eye(2), np.eye(2)) == pytest.approx(2.0)

    def test_orthogonal_units(self):
        e = matrix_units(2)
        assert hs_inner(e[0], e[3]) == 0

    def test_antilinear_first_slot(self):
        x = np.array([[0.0, 1.0], [0.0, 0.0]])
        y = np.array([[0.0, 2.0j], [0.0, 0.0]])
        assert hs_inner(x, y) == pytest.approx(2.0j)
        assert hs_inner(y, x) == pytest.approx(np.conj(hs_inner(x, y)))

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            hs_inner(np.eye(2), np.eye(3))


class TestPartialTrace:
    def test_identity_factors(self):
        assert np.allclose(partial_trace(np.eye(4), (2, 2), which=1), 2 * np.eye(2))

    def test_tensor_identity(self):
        a, b = np.diag([1.0, 2.0]), np.diag([3.0, 4.0])
        assert np.allclose(partial_trace(np.kron(a, b), (2, 2), which=1), 7 * a)

    def test_entangled_state(self):
        psi = np.array([1.0, 0, 0, 1.0]) / np.sqrt(2)
        out = partial_trace(np.outer(psi, psi), (2, 2), which=1)
        assert np.allclose(out, np.eye(2) / 2)

    def test_trace_preserved(self):
        rng = rng_from(4)
        x = random_matrix(rng, 6)
        assert np.trace(partial_trace(x, (2, 3), which=0)) == pytest.approx(
            np.trace(x))

    @pytest.mark.parametrize("dh,dk", [(2, 2), (2, 3), (3, 3)])
    def test_adjoint_of_tensoring(self, dh, dk):
        # <Tr_2 X, A> = <X, A (x) I> on full bases
        for a in matrix_units(dh):
            for x_idx in range(min(dh * dk, 4)):
                rng = rng_from(100 + x_idx)
                x = random_matrix(rng, dh * dk)
                lhs = hs_inner(a, partial_trace(x, (dh, dk), which=1))
                rhs = hs_inner(np.kron(a, np.eye(dk)), x)
                assert lhs == pytest.approx(rhs, abs=1e-12)


class TestSuperOperators:
    def test_identity_multiplication(self):
        sup = multiplication_superoperator(np.eye(2), "left")
        assert np.allclose(sup.matrix, np.eye(4))

    def test_left_action_on_unit(self):
        sup = left_multiplication(np.diag([1.0, 2.0]))
        e21 = np.array([[0.0, 0.0], [1.0, 0.0]])
        assert np.allclose(sup.apply(e21), 2 * e21)

    def test_left_right_commute(self):
        rng = rng_from(5)
        a, b = random_matrix(rng, 3), random_matrix(rng, 3)
        la, rb = left_multiplication(a), right_multiplication(b)
        assert np.allclose((la @ rb).matrix, (rb @ la).matrix)

    def test_sandwich_composition(self):
        rng = rng_from(6)
        a, b = random_matrix(rng, 3), random_matrix(rng, 3)
        comp = left_multiplication(a) @ right_multiplication(b)
        for e in matrix_units(3):
            assert np.allclose(comp.apply(e), a @ e @ b)

    def test_from_apply_matches_columns(self):
        rng = rng_from(7)
        a = random_matrix(rng, 3)
        sup = SuperOperator.from_apply(lambda x: a @ x @ a.conj().T, 3)
        x = random_matrix(rng, 3)
        assert np.allclose(sup.apply(x), a @ x @ a.conj().T)

    def test_vec_convention(self):
        rng = rng_from(8)
        a, x, b = (random_matrix(rng, 3) for _ in range(3))
        assert np.allclose(np.kron(b.T, a) @ vec(x), vec(a @ x @ b))
        assert np.allclose(unvec(vec(x)), x)
