"""Dense complex matrix kernels.

Hermitian eigendecompositions with eigenvalue snapping and clustering,
support projections, generalized inverses and powers, the functional
calculus, tensor / partial-trace operations, and the column-stacking
vectorization of operators into C^(d^2).

Conventions fixed here and used everywhere else:

* ``vec`` stacks columns, so ``vec(AXB) = kron(B.T, A) @ vec(X)``.
* Left multiplication by ``A`` is the superoperator ``kron(I, A)``;
  right multiplication by ``B`` is ``kron(B.T, I)``.
* Eigenvalues within ``zero_tol * max(1, lambda_max)`` of zero are stored
  as exact zeros so that support projections are exact idempotents.
* Eigenvalues within ``cluster_tol * max(1, lambda_max)`` of each other
  share one spectral projection; spectral sums run over these clusters.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np

from .errors import (
    DimensionMismatchError,
    DomainError,
    NonFiniteError,
    NotHermitianError,
    NotPositiveSemidefiniteError,
    ShapeMismatchError,
)

DEFAULT_ZERO_TOL = 1e-10
DEFAULT_CLUSTER_TOL = 1e-9
HERMITICITY_TOL = 1e-12


def as_matrix(a) -> np.ndarray:
    """Validate and return a finite complex 2-d array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ShapeMismatchError(f"expected a 2-d matrix, got shape {m.shape}")
    if not (np.all(np.isfinite(m.real)) and np.all(np.isfinite(m.imag))):
        raise NonFiniteError("matrix has NaN/Inf entries")
    return m


def dagger(x: np.ndarray) -> np.ndarray:
    return np.conj(np.transpose(x))


def frob(x: np.ndarray) -> float:
    return float(np.linalg.norm(x))


def hermitian_eig(a, zero_tol: float = DEFAULT_ZERO_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns ascending eigenvalues (values within ``zero_tol * max(1, |lambda|_max)``
    of zero snapped to exact 0) and orthonormal eigenvectors as columns.

    Raises NotHermitianError if the symmetry residual exceeds
    ``1e-12 * max(1, max|A|)``, NonFiniteError on NaN/Inf.
    """
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise ShapeMismatchError("hermitian_eig requires a square matrix")
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if float(np.max(np.abs(m - dagger(m)))) > HERMITICITY_TOL * scale:
        raise NotHermitianError("symmetry residual exceeds Hermiticity tolerance")
    w, u = np.linalg.eigh((m + dagger(m)) / 2.0)
    bound = zero_tol * max(1.0, float(np.max(np.abs(w))))
    w = np.where(np.abs(w) <= bound, 0.0, w)
    return w, u


def cluster_eigenvalues(w: np.ndarray, cluster_tol: float = DEFAULT_CLUSTER_TOL) -> list[tuple[float, np.ndarray]]:
    """Group ascending eigenvalues into clusters of near-equal values.

    Returns a list of (representative value, index array); the representative
    is the cluster mean (exact 0 for the zero cluster).
    """
    if len(w) == 0:
        return []
    gap = cluster_tol * max(1.0, float(np.max(np.abs(w))))
    groups: list[list[int]] = [[0]]
    for i in range(1, len(w)):
        if w[i] - w[groups[-1][0]] <= gap:
            groups[-1].append(i)
        else:
            groups.append([i])
    out = []
    for idx in groups:
        vals = w[idx]
        rep = 0.0 if np.all(vals == 0.0) else float(np.mean(vals))
        out.append((rep, np.asarray(idx, dtype=int)))
    return out


class PositiveOperator:
    """Hermitian PSD matrix with cached spectral decomposition and supports.

    Eigenvalues are ascending with sub-threshold values snapped to exact 0;
    ``clusters`` groups near-degenerate eigenvalues and is what all spectral
    double sums iterate over.
    """

    def __init__(self, matrix, zero_tol: float = DEFAULT_ZERO_TOL,
                 cluster_tol: float = DEFAULT_CLUSTER_TOL):
        w, u = hermitian_eig(matrix, zero_tol=zero_tol)
        floor = -zero_tol * max(1.0, float(np.max(np.abs(w))) if len(w) else 1.0)
        if np.any(w < floor):
            raise NotPositiveSemidefiniteError(
                f"eigenvalue {w.min():.3e} below -zero_threshold")
        w = np.maximum(w, 0.0)
        self.matrix = as_matrix(matrix)
        self.eigenvalues = w
        self.eigenvectors = u
        self.zero_threshold = zero_tol
        self.cluster_tol = cluster_tol
        self.support_rank = int(np.count_nonzero(w > 0.0))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def clusters(self) -> tuple[tuple[float, np.ndarray], ...]:
        """Distinct spectral values with their projections, ascending."""
        out = []
        for val, idx in cluster_eigenvalues(self.eigenvalues, self.cluster_tol):
            vecs = self.eigenvectors[:, idx]
            out.append((val, vecs @ dagger(vecs)))
        return tuple(out)

    @cached_property
    def positive_clusters(self) -> tuple[tuple[float, np.ndarray], ...]:
        return tuple((v, p) for v, p in self.clusters if v > 0.0)

    def support(self) -> np.ndarray:
        """Orthogonal projection onto the range."""
        mask = self.eigenvalues > 0.0
        vecs = self.eigenvectors[:, mask]
        return vecs @ dagger(vecs)

    def kernel_projection(self) -> np.ndarray:
        return np.eye(self.dim) - self.support()

    def gen_inverse(self) -> np.ndarray:
        """Inverse on the support, zero on the kernel."""
        return self.apply_scalar(lambda x: 1.0 / x)

    def sqrt(self) -> np.ndarray:
        return self.apply_scalar(np.sqrt, zero_value=0.0)

    def inv_sqrt(self) -> np.ndarray:
        """Generalized inverse square root."""
        return self.apply_scalar(lambda x: x ** -0.5)

    def power(self, z: complex) -> np.ndarray:
        """Generalized complex power: sum over positive eigenvalues of
        lambda^z times the spectral projection. ``z = 0`` returns the
        support projection (lambda^0 = 1 on the support)."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for val, proj in self.positive_clusters:
            out += np.exp(z * np.log(val)) * proj
        return out

    def apply_scalar(self, fn, zero_value: float | None = None) -> np.ndarray:
        """Functional calculus with an explicit value at eigenvalue 0.

        ``zero_value=None`` means "apply fn only on the support" (kernel
        contributes 0), which is the generalized-inverse convention.
        """
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for val, proj in self.clusters:
            if val == 0.0:
                if zero_value is not None and zero_value != 0.0:
                    out += zero_value * proj
            else:
                out += complex(fn(val)) * proj
        return out

    def trace(self) -> float:
        return float(np.sum(self.eigenvalues))

    def is_invertible(self) -> bool:
        return self.support_rank == self.dim

    def add_scalar(self, eps: float) -> "PositiveOperator":
        """Return the regularized operator A + eps*I."""
        return PositiveOperator(self.matrix + eps * np.eye(self.dim),
                                zero_tol=self.zero_threshold,
                                cluster_tol=self.cluster_tol)


def as_positive_operator(a, zero_tol: float = DEFAULT_ZERO_TOL) -> PositiveOperator:
    return a if isinstance(a, PositiveOperator) else PositiveOperator(a, zero_tol=zero_tol)


def support_projection(a) -> np.ndarray:
    """Projection onto the range of a PSD operator; idempotent to 1e-12."""
    return as_positive_operator(a).support()


def generalized_inverse(a) -> np.ndarray:
    return as_positive_operator(a).gen_inverse()


def complex_power(a, z: complex) -> np.ndarray:
    """Support-restricted power A^z (zero eigenvalues contribute 0)."""
    return as_positive_operator(a).power(z)


def matrix_function(a, f) -> np.ndarray:
    """U diag(f(lambda)) U* with f evaluated through the functional calculus.

    ``f`` may be a plain callable or a SpectralFunction; for a singular
    operator the value at 0 is taken from ``f.f_zero_plus`` metadata and a
    DomainError is raised when that boundary value is infinite.
    """
    op = as_positive_operator(a)
    f0 = getattr(f, "f_zero_plus", None)
    if op.support_rank < op.dim:
        if f0 is None:
            try:
                f0 = float(f(0.0))
            except Exception as exc:
                raise DomainError(f"function undefined at eigenvalue 0: {exc}") from exc
        if not np.isfinite(f0):
            raise DomainError("function has infinite boundary value at 0 "
                              "but 0 is in the spectrum")
    out = np.zeros((op.dim, op.dim), dtype=complex)
    for val, proj in op.clusters:
        fv = f0 if val == 0.0 else float(f(val))
        if not np.isfinite(fv):
            raise DomainError(f"function value at eigenvalue {val} is not finite")
        out += fv * proj
    return out


def hs_inner(x, y) -> complex:
    """Hilbert-Schmidt inner product Tr X*Y (antilinear in the first slot)."""
    xm, ym = as_matrix(x), as_matrix(y)
    if xm.shape != ym.shape:
        raise ShapeMismatchError(f"hs_inner shapes {xm.shape} != {ym.shape}")
    return complex(np.sum(np.conj(xm) * ym))


def hs_norm(x) -> float:
    return frob(as_matrix(x))


def partial_trace(x, dims: tuple[int, int], which: int = 1) -> np.ndarray:
    """Partial trace on a bipartite space of dimensions ``dims = (d0, d1)``.

    ``which`` selects the factor to trace out (0 = first, 1 = second).
    """
    d0, d1 = dims
    m = as_matrix(x)
    if m.shape != (d0 * d1, d0 * d1):
        raise DimensionMismatchError(
            f"matrix of size {m.shape} does not match factors {dims}")
    t = m.reshape(d0, d1, d0, d1)
    if which == 1:
        return np.einsum("ikjk->ij", t)
    if which == 0:
        return np.einsum("kikj->ij", t)
    raise DimensionMismatchError("which must be 0 or 1")


def vec(x) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(x, dtype=complex).reshape(-1, order="F")


def unvec(v, shape: tuple[int, int] | None = None) -> np.ndarray:
    """Inverse of ``vec``; square by default."""
    v = np.asarray(v, dtype=complex).reshape(-1)
    if shape is None:
        d = int(round(np.sqrt(v.size)))
        if d * d != v.size:
            raise ShapeMismatchError("unvec of non-square length needs a shape")
        shape = (d, d)
    return v.reshape(shape, order="F")


class SuperOperator:
    """Linear operator on the Hilbert-Schmidt space, stored as a
    d_out^2 x d_in^2 matrix in the column-stacking convention."""

    def __init__(self, matrix: np.ndarray, dim_in: int, dim_out: int | None = None):
        dim_out = dim_in if dim_out is None else dim_out
        m = as_matrix(matrix)
        if m.shape != (dim_out * dim_out, dim_in * dim_in):
            raise DimensionMismatchError(
                f"superoperator matrix {m.shape} does not match dims "
                f"({dim_out}^2, {dim_in}^2)")
        self.matrix = m
        self.dim_in = dim_in
        self.dim_out = dim_out

    @classmethod
    def from_apply(cls, fn, dim_in: int, dim_out: int | None = None) -> "SuperOperator":
        """Build the matrix by applying ``fn`` to the matrix-unit basis."""
        dim_out = dim_in if dim_out is None else dim_out
        cols = []
        for j in range(dim_in):
            for i in range(dim_in):
                e = np.zeros((dim_in, dim_in), dtype=complex)
                e[i, j] = 1.0
                cols.append(vec(fn(e)))
        return cls(np.stack(cols, axis=1), dim_in, dim_out)

    @classmethod
    def identity(cls, dim: int) -> "SuperOperator":
        return cls(np.eye(dim * dim, dtype=complex), dim)

    def apply(self, x) -> np.ndarray:
        xm = as_matrix(x)
        if xm.shape != (self.dim_in, self.dim_in):
            raise DimensionMismatchError(
                f"operand {xm.shape} does not match dim_in {self.dim_in}")
        return unvec(self.matrix @ vec(xm), (self.dim_out, self.dim_out))

    def adjoint(self) -> "SuperOperator":
        """Adjoint for the HS inner product: the conjugate transpose."""
        return SuperOperator(dagger(self.matrix), self.dim_out, self.dim_in)

    def __matmul__(self, other: "SuperOperator") -> "SuperOperator":
        if self.dim_in != other.dim_out:
            raise DimensionMismatchError("superoperator composition dims mismatch")
        return SuperOperator(self.matrix @ other.matrix, other.dim_in, self.dim_out)

    def __add__(self, other: "SuperOperator") -> "SuperOperator":
        return SuperOperator(self.matrix + other.matrix, self.dim_in, self.dim_out)

    def __sub__(self, other: "SuperOperator") -> "SuperOperator":
        return SuperOperator(self.matrix - other.matrix, self.dim_in, self.dim_out)

    def __mul__(self, c) -> "SuperOperator":
        return SuperOperator(self.matrix * c, self.dim_in, self.dim_out)

    __rmul__ = __mul__

    def min_eig(self) -> float:
        """Smallest eigenvalue of the Hermitian part."""
        h = (self.matrix + dagger(self.matrix)) / 2.0
        return float(np.linalg.eigvalsh(h)[0])


def left_multiplication(a, dim: int | None = None) -> SuperOperator:
    """Superoperator X -> AX."""
    am = as_matrix(a)
    d = am.shape[0] if dim is None else dim
    return SuperOperator(np.kron(np.eye(d), am), d)


def right_multiplication(a, dim: int | None = None) -> SuperOperator:
    """Superoperator X -> XA."""
    am = as_matrix(a)
    d = am.shape[0] if dim is None else dim
    return SuperOperator(np.kron(am.T, np.eye(d)), d)


def multiplication_superoperator(a, side: str, dim: int | None = None) -> SuperOperator:
    if side == "left":
        return left_multiplication(a, dim)
    if side == "right":
        return right_multiplication(a, dim)
    raise ShapeMismatchError("side must be 'left' or 'right'")


def matrix_units(d: int) -> list[np.ndarray]:
    """The d^2 matrix units E_ij in row-major (i, j) order."""
    out = []
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1.0
            out.append(e)
    return out
