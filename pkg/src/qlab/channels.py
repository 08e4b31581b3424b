"""Linear maps between matrix algebras, with positivity certificates.

A Channel stores the d_out^2 x d_in^2 superoperator matrix (column-stacking
convention); the Hilbert-Schmidt adjoint is its conjugate transpose, so
adjoint duality is exact by construction.  Certificates:

* ``tp``      -- trace preserving, equivalently the adjoint is unital;
* ``cp``      -- 'certified' (a stored Kraus set reproduces the matrix),
                 or 'no' (Choi matrix has a negative eigenvalue);
* Schwarz status of the adjoint -- 'certified' when provenance implies
  2-positivity (CP / Kraus-built), else a seeded sampled verdict that is
  recorded as such and never upgraded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidDensityError,
    InvalidIsometryError,
    NotSchwarzError,
    NotUnitalError,
    ShapeMismatchError,
    SupportViolationError,
)
from .linalg import (
    PositiveOperator,
    as_matrix,
    as_positive_operator,
    dagger,
    frob,
    hs_inner,
    matrix_units,
    unvec,
    vec,
)
from .rand import haar_isometry, random_matrix, rng_from

ADJOINT_TOL = 1e-10
CHOI_PSD_TOL = 1e-9


class Channel:
    """Linear map Phi: B(C^dim_in) -> B(C^dim_out)."""

    def __init__(self, smat: np.ndarray, dim_in: int, dim_out: int,
                 kraus: Optional[list[np.ndarray]] = None,
                 provenance: str = "superop"):
        m = as_matrix(smat)
        if m.shape != (dim_out * dim_out, dim_in * dim_in):
            raise DimensionMismatchError(
                f"superoperator {m.shape} does not match dims ({dim_in},{dim_out})")
        self.smat = m
        self.dim_in = dim_in
        self.dim_out = dim_out
        self.kraus = None if kraus is None else [as_matrix(v) for v in kraus]
        self.provenance = provenance

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_kraus(cls, ops: Sequence[np.ndarray]) -> "Channel":
        ops = [as_matrix(v) for v in ops]
        if not ops:
            raise ShapeMismatchError("empty Kraus list")
        d_out, d_in = ops[0].shape
        if any(v.shape != (d_out, d_in) for v in ops):
            raise ShapeMismatchError("Kraus operators must share one shape")
        smat = np.zeros((d_out * d_out, d_in * d_in), dtype=complex)
        for v in ops:
            smat += np.kron(np.conj(v), v)
        return cls(smat, d_in, d_out, kraus=ops, provenance="kraus")

    @classmethod
    def from_superop(cls, matrix: np.ndarray, dims: tuple[int, int]) -> "Channel":
        d_in, d_out = dims
        return cls(as_matrix(matrix), d_in, d_out, provenance="superop")

    @classmethod
    def from_apply(cls, fn, dim_in: int, dim_out: int,
                   provenance: str = "composed") -> "Channel":
        cols = []
        for e in matrix_units(dim_in):
            cols.append(vec(fn(e)))
        return cls(np.stack(cols, axis=1) @ _unit_order_fix(dim_in),
                   dim_in, dim_out, provenance=provenance)

    # -- action ------------------------------------------------------------

    def apply(self, x) -> np.ndarray:
        xm = as_matrix(x)
        if xm.shape != (self.dim_in, self.dim_in):
            raise DimensionMismatchError("operand does not match dim_in")
        return unvec(self.smat @ vec(xm), (self.dim_out, self.dim_out))

    def adjoint_apply(self, y) -> np.ndarray:
        ym = as_matrix(y)
        if ym.shape != (self.dim_out, self.dim_out):
            raise DimensionMismatchError("operand does not match dim_out")
        return unvec(self.adjoint_smat @ vec(ym), (self.dim_in, self.dim_in))

    @cached_property
    def adjoint_smat(self) -> np.ndarray:
        return dagger(self.smat)

    def compose(self, other: "Channel") -> "Channel":
        """self after other."""
        if self.dim_in != other.dim_out:
            raise DimensionMismatchError("composition dimension mismatch")
        kraus = None
        if self.kraus is not None and other.kraus is not None \
                and len(self.kraus) * len(other.kraus) <= 256:
            kraus = [a @ b for a in self.kraus for b in other.kraus]
        return Channel(self.smat @ other.smat, other.dim_in, self.dim_out,
                       kraus=kraus, provenance="composed")

    __matmul__ = compose

    # -- certificates --------------------------------------------------------

    @cached_property
    def tp(self) -> bool:
        """Trace preserving == adjoint unital, within 1e-10."""
        res = self.adjoint_apply(np.eye(self.dim_out)) - np.eye(self.dim_in)
        return frob(res) <= ADJOINT_TOL * max(1.0, math.sqrt(self.dim_in))

    @cached_property
    def unital(self) -> bool:
        res = self.apply(np.eye(self.dim_in)) - np.eye(self.dim_out)
        return frob(res) <= ADJOINT_TOL * max(1.0, math.sqrt(self.dim_out))

    @cached_property
    def choi(self) -> np.ndarray:
        """sum_ij E_ij (x) Phi(E_ij); PSD iff the map is CP."""
        d = self.dim_in
        c = np.zeros((d * self.dim_out, d * self.dim_out), dtype=complex)
        for i in range(d):
            for j in range(d):
                e = np.zeros((d, d), dtype=complex)
                e[i, j] = 1.0
                block = self.apply(e)
                c[i * self.dim_out:(i + 1) * self.dim_out,
                  j * self.dim_out:(j + 1) * self.dim_out] = block
        return c

    @cached_property
    def cp(self) -> str:
        """'certified' (Kraus set stored and reproducing) or 'no'."""
        if self.kraus is not None and self._kraus_reproduces():
            return "certified"
        c = self.choi
        w = np.linalg.eigvalsh((c + dagger(c)) / 2.0)
        scale = max(1.0, float(np.max(np.abs(w))))
        if frob(c - dagger(c)) > 1e-9 * scale or w[0] < -CHOI_PSD_TOL * scale:
            return "no"
        self.kraus = choi_to_kraus(c, self.dim_in, self.dim_out)
        if self._kraus_reproduces():
            return "certified"
        return "no"

    def _kraus_reproduces(self) -> bool:
        smat = np.zeros_like(self.smat)
        for v in self.kraus:
            smat += np.kron(np.conj(v), v)
        return frob(smat - self.smat) <= ADJOINT_TOL * max(1.0, frob(self.smat))

    @property
    def is_cp(self) -> bool:
        return self.cp == "certified"

    def certificates(self, samples: int = 64, seed: int = 0) -> dict:
        sw = schwarz_check(self, samples=samples, seed=seed)
        return {"tp": self.tp, "unital": self.unital, "cp": self.cp,
                "schwarz_adjoint": sw.status}


def _unit_order_fix(d: int) -> np.ndarray:
    # matrix_units enumerates row-major (i, j); superoperator columns are
    # indexed by vec order (column-major). This permutation reconciles them.
    perm = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            perm[i * d + j, j * d + i] = 1.0
    return perm


def choi_matrix(phi: Channel) -> np.ndarray:
    return phi.choi


def is_cp(phi: Channel, tol: float = CHOI_PSD_TOL) -> bool:
    c = phi.choi
    w = np.linalg.eigvalsh((c + dagger(c)) / 2.0)
    scale = max(1.0, float(np.max(np.abs(w))))
    return frob(c - dagger(c)) <= 1e-9 * scale and w[0] >= -tol * scale


def choi_to_kraus(choi: np.ndarray, dim_in: int, dim_out: int,
                  tol: float = 1e-12) -> list[np.ndarray]:
    """Kraus operators from the eigendecomposition of a PSD Choi matrix."""
    c = as_matrix(choi)
    w, u = np.linalg.eigh((c + dagger(c)) / 2.0)
    cut = tol * max(1.0, float(np.max(np.abs(w))))
    ops = []
    for k in range(len(w)):
        if w[k] > cut:
            v = u[:, k].reshape(dim_in, dim_out)
            ops.append(math.sqrt(w[k]) * v.T)
    return ops


@dataclass(frozen=True)
class SchwarzReport:
    """Verdict on the operator-Schwarz inequality for the adjoint map."""
    status: str                      # 'certified' | 'sampled-pass' | 'fail'
    min_eig: float
    witness: Optional[np.ndarray] = None
    samples: int = 0


def schwarz_check(phi: Channel, samples: int = 64, seed: int = 0,
                  tol: float = 1e-9) -> SchwarzReport:
    """Check that Psi = Phi* satisfies Psi(X)* Psi(X) <= Psi(X*X).

    Certified when the provenance implies 2-positivity (CP / Kraus-built);
    otherwise a seeded random search for violations, whose passing verdict
    is recorded as 'sampled-pass' only.
    """
    if not phi.tp:
        raise NotUnitalError("adjoint map is not unital (channel not TP)")
    if phi.cp == "certified":
        return SchwarzReport(status="certified", min_eig=0.0)
    rng = rng_from(seed)
    worst = np.inf
    witness = None
    for _ in range(samples):
        x = random_matrix(rng, phi.dim_out)
        x /= frob(x)
        px = phi.adjoint_apply(x)
        gap = phi.adjoint_apply(dagger(x) @ x) - dagger(px) @ px
        low = float(np.linalg.eigvalsh((gap + dagger(gap)) / 2.0)[0])
        if low < worst:
            worst, witness = low, x
    if worst < -tol:
        return SchwarzReport(status="fail", min_eig=worst, witness=witness,
                             samples=samples)
    return SchwarzReport(status="sampled-pass", min_eig=worst, samples=samples)


@dataclass(frozen=True)
class MultiplicativeDomain:
    """Orthonormal basis (Hilbert-Schmidt) of the multiplicative domain of
    the adjoint map: the operators on which it is multiplicative both ways."""
    basis: tuple[np.ndarray, ...]
    gram_kernel_threshold: float
    dim_space: int

    @property
    def dim(self) -> int:
        return len(self.basis)

    def distance(self, k) -> float:
        """Hilbert-Schmidt distance from K to the span of the basis."""
        km = as_matrix(k)
        sq = frob(km) ** 2 - sum(abs(hs_inner(b, km)) ** 2 for b in self.basis)
        return math.sqrt(max(0.0, sq))

    def contains(self, k, rel_tol: float = 1e-8) -> bool:
        km = as_matrix(k)
        return self.distance(km) <= rel_tol * max(1.0, frob(km))

    def project(self, k) -> np.ndarray:
        km = as_matrix(k)
        out = np.zeros_like(km)
        for b in self.basis:
            out += hs_inner(b, km) * b
        return out

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        coef = rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim)
        out = sum(c * b for c, b in zip(coef, self.basis))
        return out / max(1.0, frob(out))


def multiplicative_domain(phi: Channel, tol: float = 1e-9) -> MultiplicativeDomain:
    """Compute the multiplicative domain of Phi* as the joint kernel of the
    two PSD Gram forms Tr[Psi(X*X) - Psi(X)*Psi(X)] and its X X* twin.

    Valid because each form is PSD for a Schwarz map, so a zero trace pins
    the whole defect operator to zero.
    """
    d = phi.dim_out
    units = matrix_units(d)
    psi = [phi.adjoint_apply(e) for e in units]
    # Tr Psi(E_(i1,j1)* E_(i2,j2)) = delta_(i1,i2) Tr Psi(E_(j1,j2))
    tr_of_unit = np.array([np.trace(p) for p in psi]).reshape(d, d)
    g1 = np.zeros((d * d, d * d), dtype=complex)
    g2 = np.zeros((d * d, d * d), dtype=complex)
    for m in range(d * d):
        i1, j1 = divmod(m, d)
        for n in range(d * d):
            i2, j2 = divmod(n, d)
            t1 = tr_of_unit[j1, j2] if i1 == i2 else 0.0
            g1[m, n] = t1 - np.trace(dagger(psi[m]) @ psi[n])
            t2 = tr_of_unit[i2, i1] if j1 == j2 else 0.0
            g2[m, n] = t2 - np.trace(psi[n] @ dagger(psi[m]))
    g = g1 + g2
    g = (g + dagger(g)) / 2.0
    w, u = np.linalg.eigh(g)
    scale = max(1.0, float(np.max(np.abs(w))))
    if w[0] < -100 * tol * scale:
        bad = unvec_unit(u[:, 0], d)
        raise NotSchwarzError("multiplicative-domain forms are not PSD; "
                              "adjoint is not a Schwarz map", witness=bad)
    cut = max(tol * scale, 1e-12)
    basis = tuple(unvec_unit(u[:, k], d) for k in range(len(w)) if w[k] <= cut)
    return MultiplicativeDomain(basis=basis, gram_kernel_threshold=cut, dim_space=d)


def unvec_unit(v: np.ndarray, d: int) -> np.ndarray:
    """Vector in matrix-unit coordinates (row-major (i,j)) back to a matrix."""
    return np.asarray(v, dtype=complex).reshape(d, d)


# -- Petz recovery and support restriction ----------------------------------

def petz_forward(phi: Channel, sigma) -> Channel:
    """The normalized companion map X -> s~^{-1/2} Phi(s^{1/2} X s^{1/2}) s~^{-1/2}."""
    s = as_positive_operator(sigma)
    st = PositiveOperator(phi.apply(s.matrix))
    s_half = s.sqrt()
    st_ih = st.inv_sqrt()
    if phi.kraus is not None:
        return Channel.from_kraus([st_ih @ v @ s_half for v in phi.kraus])
    return Channel.from_apply(
        lambda x: st_ih @ phi.apply(s_half @ x @ s_half) @ st_ih,
        phi.dim_in, phi.dim_out)


def petz_recovery(phi: Channel, sigma) -> Channel:
    """The recovery map Y -> s^{1/2} Phi*(s~^{-1/2} Y s~^{-1/2}) s^{1/2},
    the Hilbert-Schmidt adjoint of ``petz_forward``; it maps Phi(sigma)
    back to sigma and is trace preserving on the output support."""
    s = as_positive_operator(sigma)
    if s.dim != phi.dim_in:
        raise DimensionMismatchError("sigma does not match the channel input")
    st = PositiveOperator(phi.apply(s.matrix))
    s_half = s.sqrt()
    st_ih = st.inv_sqrt()
    if phi.kraus is not None:
        return Channel.from_kraus([s_half @ dagger(v) @ st_ih for v in phi.kraus])
    return Channel.from_apply(
        lambda y: s_half @ phi.adjoint_apply(st_ih @ y @ st_ih) @ s_half,
        phi.dim_out, phi.dim_in)


@dataclass(frozen=True)
class RestrictedChannel:
    """Channel compressed to the supports of sigma and Phi(sigma).

    ``iso_in``/``iso_out`` are the isometries embedding the compressed
    spaces; ``support_order_ok`` reports the caller obligation
    rho^0 <= sigma^0 when a rho was supplied (the restriction is computed
    either way)."""
    channel: Channel
    k_hat: Optional[np.ndarray]
    iso_in: np.ndarray
    iso_out: np.ndarray
    support_order_ok: Optional[bool]

    def compress_in(self, x) -> np.ndarray:
        return dagger(self.iso_in) @ as_matrix(x) @ self.iso_in

    def compress_out(self, y) -> np.ndarray:
        return dagger(self.iso_out) @ as_matrix(y) @ self.iso_out


def restricted_channel(phi: Channel, sigma, k=None, rho=None) -> RestrictedChannel:
    """Restrict the channel to B(supp sigma) -> B(supp Phi(sigma)), with the
    compressed reference operator."""
    s = as_positive_operator(sigma)
    st = PositiveOperator(phi.apply(s.matrix))
    w_in = s.eigenvectors[:, s.eigenvalues > 0]
    w_out = st.eigenvectors[:, st.eigenvalues > 0]
    r_in, r_out = w_in.shape[1], w_out.shape[1]
    if phi.kraus is not None:
        hat = Channel.from_kraus([dagger(w_out) @ v @ w_in for v in phi.kraus])
    else:
        hat = Channel.from_apply(
            lambda xh: dagger(w_out) @ phi.apply(w_in @ xh @ dagger(w_in)) @ w_out,
            r_in, r_out)
    k_hat = None if k is None else dagger(w_out) @ as_matrix(k) @ w_out
    order_ok = None
    if rho is not None:
        r = as_positive_operator(rho)
        order_ok = frob((np.eye(s.dim) - s.support()) @ r.support()) <= 1e-9 * s.dim
    return RestrictedChannel(channel=hat, k_hat=k_hat, iso_in=w_in,
                             iso_out=w_out, support_order_ok=order_ok)


# -- constructor zoo ---------------------------------------------------------

def unitary_channel(u) -> Channel:
    um = as_matrix(u)
    _require_isometry(um)
    if um.shape[0] != um.shape[1]:
        raise InvalidIsometryError("unitary_channel needs a square unitary")
    return Channel.from_kraus([um])


def partial_trace_channel(d_keep: int, d_traced: int, which: str = "second") -> Channel:
    """Partial trace on C^(d_keep) (x) C^(d_traced) (or the swapped order)."""
    ops = []
    for i in range(d_traced):
        row = np.zeros((1, d_traced), dtype=complex)
        row[0, i] = 1.0
        if which == "second":
            ops.append(np.kron(np.eye(d_keep), row))
        elif which == "first":
            ops.append(np.kron(row, np.eye(d_keep)))
        else:
            raise ShapeMismatchError("which must be 'first' or 'second'")
    return Channel.from_kraus(ops)


def pinching_channel(projections: Sequence[np.ndarray]) -> Channel:
    """X -> sum_i P_i X P_i for an orthogonal resolution of the identity."""
    projs = [as_matrix(p) for p in projections]
    d = projs[0].shape[0]
    total = sum(projs)
    for p in projs:
        if frob(p @ p - p) > 1e-10 * d or frob(p - dagger(p)) > 1e-10 * d:
            raise ShapeMismatchError("pinching needs orthogonal projections")
    if frob(total - np.eye(d)) > 1e-10 * d:
        raise ShapeMismatchError("pinching projections must sum to the identity")
    return Channel.from_kraus(projs)


def diagonal_pinching(d: int) -> Channel:
    eye = np.eye(d, dtype=complex)
    return pinching_channel([np.outer(eye[:, i], eye[:, i]) for i in range(d)])


def direct_sum_channel(d: int, n: int) -> Channel:
    """Block sum B(C^n (x) C^d) -> B(C^d): the n x n block matrix goes to the
    sum of its diagonal blocks. Used to express joint convexity/concavity
    equality as a channel equality."""
    return partial_trace_channel(d, n, which="first")


def embed_partial_trace(v, split: tuple[int, int]) -> Channel:
    """X -> V (Tr over the second factor of X) V* for an isometry V on the
    first factor; the canonical divergence-preserving form."""
    d1, d2 = split
    vm = as_matrix(v)
    if vm.shape[1] != d1:
        raise InvalidIsometryError("isometry columns must match the first factor")
    _require_isometry(vm)
    ops = []
    for i in range(d2):
        row = np.zeros((1, d2), dtype=complex)
        row[0, i] = 1.0
        ops.append(vm @ np.kron(np.eye(d1), row))
    return Channel.from_kraus(ops)


def tensor_embed(u, eta, embed: Optional[np.ndarray] = None) -> Channel:
    """X -> embed (U X U* (x) eta) embed* for a unitary U, an invertible
    unit-trace eta, and an isometric embedding of the tensor product into
    the output space (identity embedding by default)."""
    um = as_matrix(u)
    _require_isometry(um)
    if um.shape[0] != um.shape[1]:
        raise InvalidIsometryError("tensor_embed needs a square unitary")
    e = as_positive_operator(eta)
    if abs(e.trace() - 1.0) > 1e-10 or not e.is_invertible():
        raise InvalidDensityError("eta must be invertible with unit trace")
    d1, d2 = um.shape[0], e.dim
    if embed is None:
        embed = np.eye(d1 * d2, dtype=complex)
    else:
        embed = as_matrix(embed)
        if embed.shape[1] != d1 * d2:
            raise InvalidIsometryError("embedding must accept the tensor product")
        _require_isometry(embed)
    ops = []
    for j in range(e.dim):
        s_j = e.eigenvalues[j]
        if s_j <= 0:
            raise InvalidDensityError("eta must be strictly positive")
        g = e.eigenvectors[:, j:j + 1]
        ops.append(math.sqrt(s_j) * (embed @ np.kron(um, g)))
    return Channel.from_kraus(ops)


def smoothing(phi: Channel, delta: float) -> Channel:
    """(1-delta) Phi + delta * (completely depolarizing); keeps the output
    strictly positive on regularized inputs."""
    if not 0.0 < delta < 1.0:
        raise ShapeMismatchError("delta must lie in (0, 1)")
    d_out = phi.dim_out
    if phi.kraus is not None:
        ops = [math.sqrt(1.0 - delta) * v for v in phi.kraus]
        # X -> (Tr X) I/d_out has Kraus set |r><s| / sqrt(d_out)
        for r in range(d_out):
            for s in range(phi.dim_in):
                m = np.zeros((d_out, phi.dim_in), dtype=complex)
                m[r, s] = math.sqrt(delta / d_out)
                ops.append(m)
        return Channel.from_kraus(ops)
    return Channel.from_apply(
        lambda x: (1.0 - delta) * phi.apply(x)
        + delta * (np.trace(x) / d_out) * np.eye(d_out),
        phi.dim_in, d_out)


def random_tpcp(d_in: int, d_out: int, env_dim: Optional[int] = None,
                seed=0) -> Channel:
    """Random channel from a Haar isometry into output (x) environment,
    followed by tracing out the environment."""
    env = d_in * d_out if env_dim is None else env_dim
    rng = rng_from(seed)
    v = haar_isometry(rng, d_out * env, d_in)
    ops = []
    for e in range(env):
        rows = v[np.arange(d_out) * env + e, :]
        ops.append(rows)
    return Channel.from_kraus(ops)


def transpose_map(d: int) -> Channel:
    """X -> X^T; positive and TP but not CP (the standard non-example)."""
    smat = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            smat[j * d + i, i * d + j] = 1.0
    return Channel(smat, d, d, provenance="superop")


def _require_isometry(v: np.ndarray, tol: float = 1e-10) -> None:
    g = dagger(v) @ v
    if frob(g - np.eye(v.shape[1])) > tol * max(1.0, v.shape[1]):
        raise InvalidIsometryError("V*V = I fails beyond tolerance")
