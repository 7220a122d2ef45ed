"""Density matrices, tangent vectors, and spectral decompositions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidInput, NotNormalized, NotPositiveDefinite

HERMITIAN_ATOL = 1e-12
TRACE_ATOL = 1e-12
RECONSTRUCT_RTOL = 1e-10


def _as_square_complex(entries) -> np.ndarray:
    m = np.asarray(entries, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidInput("expected a square matrix")
    return m


def _check_hermitian(m: np.ndarray, atol: float) -> None:
    scale = max(1.0, float(np.linalg.norm(m, np.inf)))
    if np.max(np.abs(m - m.conj().T)) > atol * scale:
        raise InvalidInput("matrix is not Hermitian within tolerance")


@dataclass(frozen=True)
class DensityMatrix:
    """Positive-definite Hermitian matrix; trace one when normalized=True."""

    entries: np.ndarray
    normalized: bool = False

    def __init__(self, entries, normalized: bool = False):
        m = _as_square_complex(entries)
        if m.shape[0] < 2:
            raise InvalidInput("dimension must be at least 2")
        _check_hermitian(m, HERMITIAN_ATOL)
        m = 0.5 * (m + m.conj().T)
        m.setflags(write=False)
        if normalized and abs(np.trace(m).real - 1.0) > TRACE_ATOL:
            raise NotNormalized("trace differs from 1 beyond tolerance")
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "normalized", bool(normalized))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries).real)


@dataclass(frozen=True)
class TangentVector:
    """Hermitian matrix; traceless when tangent to the trace-one manifold."""

    entries: np.ndarray
    traceless: bool = False

    def __init__(self, entries, traceless: bool = False):
        m = _as_square_complex(entries)
        _check_hermitian(m, HERMITIAN_ATOL)
        m = 0.5 * (m + m.conj().T)
        m.setflags(write=False)
        if traceless and abs(np.trace(m).real) > TRACE_ATOL * max(1.0, np.linalg.norm(m)):
            raise NotNormalized("tangent vector is not traceless")
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "traceless", bool(traceless))

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def as_matrix(obj) -> np.ndarray:
    """Accept a DensityMatrix, TangentVector, or array and return the matrix."""
    if isinstance(obj, (DensityMatrix, TangentVector)):
        return obj.entries
    return _as_square_complex(obj)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Ascending positive eigenvalues and a unitary eigenbasis."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


def decompose(rho: DensityMatrix) -> SpectralDecomposition:
    """Eigendecomposition with a deterministic phase convention.

    Each eigenvector is rotated so its largest-magnitude component is real
    and positive.  Raises NotPositiveDefinite when the smallest eigenvalue
    is not positive beyond tolerance.
    """
    m = as_matrix(rho)
    lam, u = np.linalg.eigh(m)
    if lam[0] <= 1e-12 * abs(lam[-1]):
        raise NotPositiveDefinite(f"smallest eigenvalue {lam[0]:.3e} is not positive")
    for k in range(u.shape[1]):
        col = u[:, k]
        j = int(np.argmax(np.abs(col)))
        phase = col[j] / abs(col[j])
        u[:, k] = col / phase
    lam = lam.copy()
    lam.setflags(write=False)
    u.setflags(write=False)
    return SpectralDecomposition(eigenvalues=lam, eigenvectors=u)


def basis_vectors(n: int) -> list[TangentVector]:
    """Trace-orthogonal Hermitian basis: 2*e_ii, e_ij+e_ji, i(e_ij-e_ji)."""
    if n < 2:
        raise InvalidInput("dimension must be at least 2")
    out = []
    for i in range(n):
        b = np.zeros((n, n), dtype=complex)
        b[i, i] = 2.0
        out.append(TangentVector(b))
    for i in range(n):
        for j in range(i + 1, n):
            b = np.zeros((n, n), dtype=complex)
            b[i, j] = b[j, i] = 1.0
            out.append(TangentVector(b))
    for i in range(n):
        for j in range(i + 1, n):
            b = np.zeros((n, n), dtype=complex)
            b[i, j] = 1.0j
            b[j, i] = -1.0j
            out.append(TangentVector(b))
    return out


def traceless_basis(n: int) -> list[TangentVector]:
    """Basis of the traceless Hermitian matrices: n^2 - 1 elements."""
    out = []
    for i in range(n - 1):
        b = np.zeros((n, n), dtype=complex)
        b[i, i] = 1.0
        b[i + 1, i + 1] = -1.0
        out.append(TangentVector(b, traceless=True))
    for v in basis_vectors(n)[n:]:
        out.append(TangentVector(v.entries, traceless=True))
    return out


def random_state(n: int, seed: int, spread: float = 10.0,
                 normalized: bool = False) -> DensityMatrix:
    """Reproducible positive-definite state with eigenvalue ratio <= spread."""
    if n < 2:
        raise InvalidInput("dimension must be at least 2")
    if spread < 1.0:
        raise InvalidInput("spread must be >= 1")
    rng = np.random.default_rng(seed)
    lam = spread ** rng.random(n)
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    q = q * (np.diagonal(r) / np.abs(np.diagonal(r)))
    m = (q * lam) @ q.conj().T
    m = 0.5 * (m + m.conj().T)
    if normalized:
        m = m / np.trace(m).real
    return DensityMatrix(m, normalized=normalized)


def random_tangent(n: int, seed: int, traceless: bool = False) -> TangentVector:
    """Reproducible Hermitian direction, optionally traceless."""
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    h = 0.5 * (z + z.conj().T)
    if traceless:
        h = h - np.trace(h) / n * np.eye(n)
    return TangentVector(h, traceless=traceless)
