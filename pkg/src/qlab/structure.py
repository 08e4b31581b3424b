"""Detection and factorization of divergence-preserving channel forms.

Two canonical forms are recognized:

* embed-partial-trace: Phi(X) = V (Tr over a hidden second factor of X) V*
  for an isometry V onto the output support. Characterized by the adjoint
  being multiplicative on the whole compressed output algebra.
* tensor-embed: Phi(X) = embed (U X U* (x) eta) embed*. Characterized by
  the recovery map composed with the channel being the identity for some
  invertible reference state.

Both detectors work by pushing matrix units through the adjoint
*-homomorphism, which yields the hidden tensor factorization
deterministically; certificates are gauge-fixed only up to a unitary on
the recovered factor, so verification is by reconstruction residual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channels import Channel, MultiplicativeDomain, multiplicative_domain, petz_recovery
from .errors import (
    FactorizationFailedError,
    HypothesisViolatedError,
    NotAFactorError,
    NotRecoverableError,
)
from .linalg import (
    PositiveOperator,
    as_matrix,
    as_positive_operator,
    dagger,
    frob,
    hs_inner,
    matrix_units,
)

UNIT_RELATION_TOL = 1e-8
RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class DomainDetection:
    """Whether the adjoint restricted to the output support is
    multiplicative on everything, plus the supporting data."""
    full: bool
    q_rank: int
    q_projection: np.ndarray
    compressed_domain: MultiplicativeDomain
    full_domain: MultiplicativeDomain
    block_form_ok: bool


@dataclass(frozen=True)
class FactorizationCertificate:
    """Recovered form of a divergence-preserving channel.

    ``residual`` is the worst Frobenius error of the reconstruction over a
    full input basis; recovered unitaries carry a phase/basis gauge, so
    equality claims are residual-based only. ``input_basis`` (when present)
    is the unitary exhibiting the hidden tensor split of the input space.
    """
    form: str                                 # 'embed-partial-trace' | 'tensor-embed'
    isometry_or_unitary: np.ndarray
    split_dims: tuple[int, int]
    eta: Optional[PositiveOperator]
    q_projection: np.ndarray
    residual: float
    input_basis: Optional[np.ndarray] = None

    def reconstruct(self, x) -> np.ndarray:
        xm = as_matrix(x)
        if self.form == "embed-partial-trace":
            d1, d2 = self.split_dims
            t = dagger(self.input_basis) @ xm @ self.input_basis
            t = t.reshape(d1, d2, d1, d2)
            reduced = np.einsum("ikjk->ij", t)
            return self.isometry_or_unitary @ reduced @ dagger(self.isometry_or_unitary)
        if self.form == "tensor-embed":
            inner = np.kron(xm, self.eta.matrix)
            return self.isometry_or_unitary @ inner @ dagger(self.isometry_or_unitary)
        raise ValueError(f"unknown form {self.form!r}")


def _output_support_isometry(phi: Channel) -> tuple[np.ndarray, PositiveOperator]:
    q_op = PositiveOperator(phi.apply(np.eye(phi.dim_in, dtype=complex)))
    w = q_op.eigenvectors[:, q_op.eigenvalues > 0]
    return w, q_op


def _compressed_channel(phi: Channel, w_q: np.ndarray) -> Channel:
    if phi.kraus is not None:
        return Channel.from_kraus([dagger(w_q) @ v for v in phi.kraus])
    r = w_q.shape[1]
    return Channel.from_apply(
        lambda x: dagger(w_q) @ phi.apply(x) @ w_q, phi.dim_in, r)


def detect_full_multiplicative_domain(phi: Channel) -> DomainDetection:
    """Decide whether the adjoint, restricted to the output support, is
    multiplicative on the whole algebra there, and whether the global
    multiplicative domain is the two-block commutant of the support."""
    if not phi.tp:
        raise HypothesisViolatedError("channel is not trace preserving",
                                      hypothesis="trace-preserving")
    w_q, q_op = _output_support_isometry(phi)
    r = w_q.shape[1]
    hat = _compressed_channel(phi, w_q)
    md_hat = multiplicative_domain(hat)
    full = md_hat.dim == r * r
    md_full = multiplicative_domain(phi)
    d_k = phi.dim_out
    expected = r * r + (d_k - r) * (d_k - r)
    q = w_q @ dagger(w_q)
    block_ok = md_full.dim == expected and all(
        frob(q @ b - b @ q) <= 1e-8 for b in md_full.basis)
    return DomainDetection(full=full, q_rank=r, q_projection=q,
                           compressed_domain=md_hat, full_domain=md_full,
                           block_form_ok=block_ok if full else False)


def _matrix_units_through(apply_unit, r: int, dim: int) -> list[list[np.ndarray]]:
    """Images of the r x r matrix units under a claimed *-homomorphism into
    B(C^dim), with the unit relations verified."""
    units = [[None] * r for _ in range(r)]
    eye = np.eye(r, dtype=complex)
    for i in range(r):
        for j in range(r):
            e = np.outer(eye[:, i], eye[:, j])
            units[i][j] = apply_unit(e)
    scale = max(1.0, max(frob(units[i][j]) for i in range(r) for j in range(r)))
    total = sum(units[i][i] for i in range(r))
    if frob(total - np.eye(dim)) > UNIT_RELATION_TOL * dim:
        raise NotAFactorError("unit images do not resolve the identity")
    for i in range(r):
        for j in range(r):
            for k_ in range(r):
                for l_ in range(r):
                    prod = units[i][j] @ units[k_][l_]
                    want = units[i][l_] if j == k_ else 0.0
                    if frob(prod - (want if j == k_ else np.zeros_like(prod))) \
                            > UNIT_RELATION_TOL * scale * 10:
                        raise NotAFactorError(
                            "matrix-unit relations fail: image algebra is "
                            "not a factor represented with uniform multiplicity")
    return units


def _factor_basis(units: list[list[np.ndarray]], r: int, dim: int) -> np.ndarray:
    """Unitary W with columns indexed (i, k) spanning the joint structure:
    W e_(i,k) = units[i][0] u_k for an orthonormal basis u_k of the range
    of the first diagonal unit. Exhibits B(C^dim) = B(C^r) (x) B(C^(dim/r))."""
    if dim % r != 0:
        raise NotAFactorError(f"multiplicity {dim}/{r} is not integral")
    d2 = dim // r
    w0, u0 = np.linalg.eigh((units[0][0] + dagger(units[0][0])) / 2.0)
    if np.any(np.abs(np.sort(w0)[-d2:] - 1.0) > 1e-6) :
        raise NotAFactorError("first diagonal unit is not a clean projection")
    u_k = u0[:, np.argsort(w0)[-d2:]]
    cols = []
    for i in range(r):
        block = units[i][0] @ u_k
        for k_ in range(d2):
            cols.append(block[:, k_])
    w = np.stack(cols, axis=1)
    # polish to an exact unitary; the residual check validates the result
    uu, _, vv = np.linalg.svd(w)
    w = uu @ vv
    return w


def factorize_embed_partial_trace(phi: Channel) -> FactorizationCertificate:
    """Recover the isometry and hidden input split of an embed-partial-trace
    channel; requires a fully multiplicative compressed adjoint."""
    det = detect_full_multiplicative_domain(phi)
    if not det.full:
        raise NotAFactorError(
            "compressed adjoint is not multiplicative on the full output "
            "algebra; no single-factor form exists")
    w_q, _ = _output_support_isometry(phi)
    r = det.q_rank
    d_h = phi.dim_in
    units = _matrix_units_through(
        lambda e: phi.adjoint_apply(w_q @ e @ dagger(w_q)), r, d_h)
    w = _factor_basis(units, r, d_h)
    d2 = d_h // r
    cert = FactorizationCertificate(
        form="embed-partial-trace", isometry_or_unitary=w_q,
        split_dims=(r, d2), eta=None, q_projection=det.q_projection,
        residual=0.0, input_basis=w)
    residual = _reconstruction_residual(phi, cert)
    if residual > RESIDUAL_TOL:
        raise FactorizationFailedError("reconstruction residual too large",
                                       residual=residual)
    return FactorizationCertificate(
        form=cert.form, isometry_or_unitary=cert.isometry_or_unitary,
        split_dims=cert.split_dims, eta=None, q_projection=cert.q_projection,
        residual=residual, input_basis=w)


def detect_tensor_embed(phi: Channel, sigma_probe) -> FactorizationCertificate:
    """Detect the tensor-embed form by checking that the recovery map for
    the probe state undoes the channel, then factorizing the adjoint side."""
    if not phi.tp:
        raise HypothesisViolatedError("channel is not trace preserving",
                                      hypothesis="trace-preserving")
    if phi.cp != "certified":
        raise HypothesisViolatedError("2-positivity (CP certificate) required",
                                      hypothesis="2-positive")
    s = as_positive_operator(sigma_probe)
    if not s.is_invertible():
        raise HypothesisViolatedError("probe state must be invertible",
                                      hypothesis="invertible probe")
    rec = petz_recovery(phi, s)
    worst = 0.0
    for e in matrix_units(phi.dim_in):
        worst = max(worst, frob(rec.apply(phi.apply(e)) - e))
    if worst > RESIDUAL_TOL:
        raise NotRecoverableError(
            f"recovery composed with channel differs from identity "
            f"(residual {worst:.3e})")

    w_q, _ = _output_support_isometry(phi)
    r_q = w_q.shape[1]
    d1 = phi.dim_in
    if r_q % d1 != 0:
        raise FactorizationFailedError(
            f"output support rank {r_q} not a multiple of input dim {d1}",
            residual=float("inf"))
    d2 = r_q // d1
    hat = _compressed_channel(phi, w_q)
    md_hat = multiplicative_domain(hat)
    if md_hat.dim != d1 * d1:
        raise FactorizationFailedError(
            "compressed multiplicative domain has unexpected dimension",
            residual=float("inf"))

    def project_onto_domain(m: np.ndarray) -> np.ndarray:
        out = np.zeros_like(m)
        for b in md_hat.basis:
            out += hs_inner(b, m) * b
        return out

    units = _matrix_units_through(
        lambda e: d2 * project_onto_domain(dagger(w_q) @ phi.apply(e) @ w_q),
        d1, r_q)
    w = _factor_basis(units, d1, r_q)
    # in the w coordinates the compressed image of X is X (x) eta
    eye_in = np.eye(d1, dtype=complex)
    t_eye = dagger(w) @ (dagger(w_q) @ phi.apply(eye_in) @ w_q) @ w
    eta_mat = np.einsum("ikil->kl", t_eye.reshape(d1, d2, d1, d2)) / d1
    eta = PositiveOperator(eta_mat)
    v_cert = w_q @ w
    cert = FactorizationCertificate(
        form="tensor-embed", isometry_or_unitary=v_cert,
        split_dims=(d1, d2), eta=eta,
        q_projection=w_q @ dagger(w_q), residual=0.0)
    residual = _reconstruction_residual(phi, cert)
    if residual > RESIDUAL_TOL:
        raise FactorizationFailedError("reconstruction residual too large",
                                       residual=residual)
    det = detect_full_multiplicative_domain(phi)
    md_full_expected = d1 * d1 + (phi.dim_out - r_q) ** 2
    if det.full_domain.dim != md_full_expected:
        raise FactorizationFailedError(
            "multiplicative domain does not match the tensor-embed block form",
            residual=residual)
    return FactorizationCertificate(
        form=cert.form, isometry_or_unitary=v_cert, split_dims=(d1, d2),
        eta=eta, q_projection=cert.q_projection, residual=residual)


def _reconstruction_residual(phi: Channel, cert: FactorizationCertificate) -> float:
    worst = 0.0
    for e in matrix_units(phi.dim_in):
        worst = max(worst, frob(phi.apply(e) - cert.reconstruct(e)))
    return worst


# -- single generator ---------------------------------------------------------

def single_generator(d: int) -> np.ndarray:
    """Bidiagonal matrix with strictly increasing diagonal 1..d and unit
    superdiagonal; generates the full matrix algebra on its own."""
    if d < 1:
        raise ValueError("dimension must be at least 1")
    m = np.diag(np.arange(1.0, d + 1.0)).astype(complex)
    for i in range(d - 1):
        m[i, i + 1] = 1.0
    return m


def generated_algebra_dim(k, max_rounds: Optional[int] = None) -> int:
    """Dimension of the unital *-algebra generated by K: closes the span of
    words in K and K* until it stabilizes."""
    km = as_matrix(k)
    d = km.shape[0]
    gens = [km, dagger(km)]
    basis = [np.eye(d, dtype=complex).reshape(-1)]
    rounds = max_rounds if max_rounds is not None else 2 * d * d

    def rank_of(rows: list[np.ndarray]) -> tuple[int, np.ndarray]:
        m = np.stack(rows, axis=0)
        u, sv, vh = np.linalg.svd(m, full_matrices=False)
        r = int(np.sum(sv > 1e-10 * max(1.0, sv[0])))
        return r, vh[:r]

    dim, ortho = rank_of(basis)
    for _ in range(rounds):
        new_rows = list(ortho)
        for row in ortho:
            a = row.reshape(d, d)
            for g in gens:
                new_rows.append((a @ g).reshape(-1))
        new_dim, new_ortho = rank_of(new_rows)
        if new_dim == dim:
            return dim
        dim, ortho = new_dim, new_ortho
    return dim


def single_equality_shortcut(phi: Channel, tol: float = 1e-8) -> bool:
    """One trace equality at a single generating reference operator decides
    full multiplicativity on the output support: with identity states, the
    half-power equality holds at a generator of the compressed algebra iff
    the compressed adjoint is multiplicative everywhere."""
    w_q, q_op = _output_support_isometry(phi)
    r = w_q.shape[1]
    k = w_q @ single_generator(r) @ dagger(w_q)
    phi_eye = PositiveOperator(phi.apply(np.eye(phi.dim_in, dtype=complex)))
    root = phi_eye.power(0.5)
    lhs = float(np.real(np.trace(dagger(k) @ root @ k @ root)))
    kb = phi.adjoint_apply(k)
    rhs = float(np.real(np.trace(dagger(kb) @ kb)))
    return abs(lhs - rhs) <= tol * (1.0 + abs(lhs) + abs(rhs))
