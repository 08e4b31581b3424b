"""Seeded random generators for matrices, states and isometries.

Every sampler takes a ``numpy.random.Generator`` so whole sweeps are
reproducible from one seed.
"""

from __future__ import annotations

import numpy as np

from .linalg import PositiveOperator, dagger


def rng_from(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_matrix(rng: np.random.Generator, rows: int, cols: int | None = None) -> np.ndarray:
    cols = rows if cols is None else cols
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2.0)


def random_hermitian(rng: np.random.Generator, d: int) -> np.ndarray:
    a = random_matrix(rng, d)
    return (a + dagger(a)) / 2.0


def random_psd(rng: np.random.Generator, d: int, rank: int | None = None) -> PositiveOperator:
    """Random PSD operator of the given rank (full rank by default)."""
    r = d if rank is None else rank
    b = random_matrix(rng, d, r)
    return PositiveOperator(b @ dagger(b))


def random_density(rng: np.random.Generator, d: int, rank: int | None = None) -> PositiveOperator:
    a = random_psd(rng, d, rank)
    return PositiveOperator(a.matrix / a.trace())


def random_invertible_psd(rng: np.random.Generator, d: int, floor: float = 0.1) -> PositiveOperator:
    """Random PSD operator with spectrum bounded away from zero."""
    a = random_psd(rng, d)
    return PositiveOperator(a.matrix + floor * np.eye(d))


def haar_isometry(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """Haar-random isometry (rows >= cols), via QR with phase fixing."""
    if rows < cols:
        raise ValueError("isometry needs rows >= cols")
    g = random_matrix(rng, rows, cols)
    q, r = np.linalg.qr(g)
    phases = np.diag(r).copy()
    phases = phases / np.abs(phases)
    return q * np.conj(phases)[None, :]


def haar_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    return haar_isometry(rng, d, d)


def random_traceless_hermitian(rng: np.random.Generator, d: int) -> np.ndarray:
    h = random_hermitian(rng, d)
    return h - (np.trace(h) / d) * np.eye(d)
