"""Hermitian linear algebra, density-matrix validation and entropies.

All entropies are in bits. Matrices are plain ``numpy`` complex arrays;
:class:`DensityMatrix` wraps one together with its validated spectrum.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, NotADistribution, NotHermitian, NotPSD, TooLarge, TraceNotOne

DEFAULT_TRACE_TOL = 1e-9
DEFAULT_PSD_TOL = 1e-8
DEFAULT_MAX_DIM = 4096


def max_dim() -> int:
    """Dimension cap, overridable through ``QFALAB_MAX_DIM``."""
    raw = os.environ.get("QFALAB_MAX_DIM")
    return int(raw) if raw else DEFAULT_MAX_DIM


def check_dim(dim: int) -> None:
    if dim < 1:
        raise ValueError(f"dimension must be positive, got {dim}")
    if dim > max_dim():
        raise TooLarge(f"dimension {dim} exceeds cap {max_dim()}")


def as_matrix(mat) -> np.ndarray:
    """Coerce to a square complex128 array."""
    arr = np.asarray(mat, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {arr.shape}")
    return arr


def dagger(mat: np.ndarray) -> np.ndarray:
    return mat.conj().T


def derive_seed(seed: int, *keys: int) -> int:
    """Deterministic child seed for trial ``keys`` of a run seeded with ``seed``."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFF, *[int(k) for k in keys]])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


# ---------------------------------------------------------------------------
# eigendecomposition


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray  # real, descending
    eigenvectors: np.ndarray  # columns, orthonormal

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ dagger(v)


def _sorted(vals: np.ndarray, vecs: np.ndarray) -> EigenDecomposition:
    order = np.argsort(-vals, kind="stable")
    return EigenDecomposition(np.asarray(vals[order], dtype=float), vecs[:, order])


def jacobi_eigh(mat, tol: float = 1e-14, max_sweeps: int = 100) -> EigenDecomposition:
    """Cyclic Jacobi diagonalisation of a complex Hermitian matrix.

    Each (p, q) rotation first removes the phase of ``A[p, q]`` and then applies
    the classical real Jacobi rotation, so the off-diagonal entry is zeroed
    exactly. Sweeps continue until the off-diagonal Frobenius norm falls
    below ``tol`` times the matrix norm.
    """
    a = as_matrix(mat).copy()
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    scale = max(np.linalg.norm(a), 1e-300)
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                phase = apq / mag
                theta = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                w = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ w
                a[idx, :] = dagger(w) @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                v[:, idx] = v[:, idx] @ w
    return _sorted(np.real(np.diag(a)), v)


def eigendecompose(mat, method: str = "lapack") -> EigenDecomposition:
    """Hermitian eigendecomposition, eigenvalues sorted descending.

    ``method="lapack"`` delegates to ``numpy.linalg.eigh``; ``"jacobi"`` uses
    :func:`jacobi_eigh`.
    """
    a = as_matrix(mat)
    if method == "jacobi":
        return jacobi_eigh(a)
    if method != "lapack":
        raise ValueError(f"unknown eigensolver {method!r}")
    herm = 0.5 * (a + dagger(a))
    vals, vecs = np.linalg.eigh(herm)
    return _sorted(vals, vecs)


def hermitian_eigvals(mat) -> np.ndarray:
    a = as_matrix(mat)
    return np.sort(np.linalg.eigvalsh(0.5 * (a + dagger(a))))[::-1]


# ---------------------------------------------------------------------------
# density matrices


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated density matrix.

    ``mat`` is the matrix as supplied; ``spectrum`` holds its eigenvalues with
    small negative noise clamped to zero and renormalised to sum 1.
    """

    mat: np.ndarray
    spectrum: np.ndarray
    trace_tol: float = DEFAULT_TRACE_TOL
    psd_tol: float = DEFAULT_PSD_TOL

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @cached_property
    def entropy(self) -> float:
        return max(_xlogx_sum(np.asarray(self.spectrum)), 0.0)

    def __array__(self, dtype=None, copy=None):
        return self.mat if dtype is None else self.mat.astype(dtype)


def validate_density(mat, trace_tol: float = DEFAULT_TRACE_TOL, psd_tol: float = DEFAULT_PSD_TOL) -> DensityMatrix:
    """Check Hermiticity, unit trace and positivity; return a :class:`DensityMatrix`.

    Raises :class:`NotHermitian`, :class:`TraceNotOne` or :class:`NotPSD`.
    """
    if isinstance(mat, DensityMatrix):
        mat = mat.mat
    a = as_matrix(mat)
    check_dim(a.shape[0])
    herm_err = float(np.max(np.abs(a - dagger(a)))) if a.size else 0.0
    if herm_err > psd_tol:
        raise NotHermitian(f"max |M - M^dagger| = {herm_err:.3e} exceeds {psd_tol:.1e}")
    tr = complex(np.trace(a))
    if abs(tr - 1.0) > trace_tol:
        raise TraceNotOne(f"|Tr(M) - 1| = {abs(tr - 1.0):.3e} exceeds {trace_tol:.1e} (trace {tr.real:.12g})")
    vals = hermitian_eigvals(a)
    if vals[-1] < -psd_tol:
        raise NotPSD(f"eigenvalue {vals[-1]:.3e} below -{psd_tol:.1e}")
    vals = np.clip(vals, 0.0, None)
    vals = vals / vals.sum()
    a = a.copy()
    a.setflags(write=False)
    vals.setflags(write=False)
    return DensityMatrix(a, vals, trace_tol, psd_tol)


def _xlogx_sum(vals: np.ndarray) -> float:
    vals = vals[vals > 0]
    return float(-np.sum(vals * np.log2(vals))) + 0.0


def shannon_entropy(dist: Sequence[float], tol: float = 1e-9) -> float:
    """Shannon entropy in bits, with 0 log 0 = 0."""
    p = np.asarray(dist, dtype=float).ravel()
    if p.size == 0 or np.any(p < -tol) or abs(p.sum() - 1.0) > tol:
        raise NotADistribution(f"entries must be nonnegative and sum to 1 (sum {p.sum():.12g})")
    return max(_xlogx_sum(np.clip(p, 0.0, None)), 0.0)


def binary_entropy(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise NotADistribution(f"binary entropy needs p in [0, 1], got {p}")
    return shannon_entropy([p, 1.0 - p])


def von_neumann_entropy(rho) -> float:
    if not isinstance(rho, DensityMatrix):
        rho = validate_density(rho)
    return rho.entropy


def block_entropy(block) -> float:
    """``-Tr X log2 X`` for a PSD block that need not have unit trace."""
    vals = np.clip(hermitian_eigvals(block), 0.0, None)
    return _xlogx_sum(vals)


# ---------------------------------------------------------------------------
# constructors


def basis_state(dim: int, index: int) -> DensityMatrix:
    m = np.zeros((dim, dim), dtype=np.complex128)
    m[index, index] = 1.0
    return validate_density(m)


def pure_state(vec) -> DensityMatrix:
    v = np.asarray(vec, dtype=np.complex128).ravel()
    v = v / np.linalg.norm(v)
    return validate_density(np.outer(v, v.conj()))


def maximally_mixed(dim: int) -> DensityMatrix:
    return validate_density(np.eye(dim, dtype=np.complex128) / dim)


def random_density(dim: int, seed: int, rank: int | None = None) -> DensityMatrix:
    """Normalised Gram matrix of a random complex Gaussian ``dim x rank`` matrix."""
    check_dim(dim)
    rng = np.random.default_rng(seed)
    k = dim if rank is None else rank
    g = rng.standard_normal((dim, k)) + 1j * rng.standard_normal((dim, k))
    m = g @ dagger(g)
    m = m / np.trace(m).real
    return validate_density(0.5 * (m + dagger(m)))


def random_pure_vector(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_unitary(dim: int, seed: int) -> np.ndarray:
    """Haar-random unitary: QR of a complex Gaussian matrix with phase-fixed R diagonal."""
    check_dim(dim)
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


# ---------------------------------------------------------------------------
# JSON


def matrix_to_json(mat) -> dict:
    a = as_matrix(mat.mat if isinstance(mat, DensityMatrix) else mat)
    return {
        "dim": int(a.shape[0]),
        "re": [float(x) for x in a.real.ravel()],
        "im": [float(x) for x in a.imag.ravel()],
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    dim = int(obj["dim"])
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj["im"], dtype=float)
    if re.size != dim * dim or im.size != dim * dim:
        raise DimensionMismatch(f"payload does not hold a {dim}x{dim} matrix")
    return (re + 1j * im).reshape(dim, dim)


def spectrum_to_json(rho: DensityMatrix) -> list[float]:
    return [float(x) for x in rho.spectrum]
