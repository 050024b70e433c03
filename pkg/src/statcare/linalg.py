"""Dense symmetric linear algebra primitives.

Everything in the package works with small symmetric matrices, so all
matrix functions go through a single eigendecomposition path. This keeps
the exponential and the logarithm exactly inverse to each other up to
floating point, which the round-trip contracts elsewhere rely on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SymEig",
    "DefinitenessReport",
    "NotSymmetricError",
    "NotPositiveDefiniteError",
    "sym_eig",
    "expm_sym",
    "logm_spd",
    "sqrtm_psd",
    "definiteness",
    "spectral_norm",
    "vec",
    "unvec",
    "symmetrize",
]

#: Relative asymmetry above which an input is rejected instead of symmetrized.
ASYMMETRY_RTOL = 1e-8


class NotSymmetricError(ValueError):
    """Input matrix is too far from symmetric to symmetrize silently."""


class NotPositiveDefiniteError(ValueError):
    """Input matrix misses a required positive-definiteness precondition."""

    def __init__(self, message: str, min_eigenvalue: float):
        super().__init__(f"{message} (min eigenvalue {min_eigenvalue:.6g})")
        self.min_eigenvalue = min_eigenvalue


@dataclass(frozen=True)
class SymEig:
    """Eigendecomposition a = vectors @ diag(values) @ vectors.T.

    ``values`` are ascending; ``vectors`` is orthogonal.
    """

    vectors: np.ndarray
    values: np.ndarray

    def apply(self, fn) -> np.ndarray:
        """Matrix function f(A) = Q f(Lambda) Q^T for an elementwise fn."""
        return (self.vectors * fn(self.values)) @ self.vectors.T


@dataclass(frozen=True)
class DefinitenessReport:
    """Sign information about the spectrum of a symmetric matrix."""

    min_eigenvalue: float
    is_psd: bool
    is_pd: bool
    tolerance_used: float


def symmetrize(a: np.ndarray) -> np.ndarray:
    """Return (a + a.T)/2 after validating shape, finiteness and asymmetry."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains non-finite entries")
    scale = np.linalg.norm(a, 2) if a.size else 0.0
    asym = np.linalg.norm(a - a.T, 2)
    if asym > ASYMMETRY_RTOL * max(scale, 1e-300):
        raise NotSymmetricError(
            f"matrix asymmetry {asym:.3g} exceeds {ASYMMETRY_RTOL:g} * norm {scale:.3g}"
        )
    return 0.5 * (a + a.T)


def sym_eig(a: np.ndarray) -> SymEig:
    """Eigendecomposition of a symmetric matrix, eigenvalues ascending."""
    a = symmetrize(a)
    values, vectors = np.linalg.eigh(a)
    return SymEig(vectors=vectors, values=values)


def expm_sym(a: np.ndarray) -> np.ndarray:
    """Matrix exponential of a symmetric matrix (symmetric PD result)."""
    return sym_eig(a).apply(np.exp)


def logm_spd(a: np.ndarray) -> np.ndarray:
    """Matrix logarithm of a symmetric positive definite matrix."""
    eig = sym_eig(a)
    min_eig = float(eig.values[0])
    if min_eig <= 0.0:
        raise NotPositiveDefiniteError("matrix logarithm needs a PD input", min_eig)
    return eig.apply(np.log)


def sqrtm_psd(a: np.ndarray, clip_tol: float = 1e-12) -> np.ndarray:
    """Symmetric square root of a PSD matrix.

    Eigenvalues in [-clip_tol * scale, 0) are treated as rounding noise and
    clipped to zero; anything more negative is rejected.
    """
    eig = sym_eig(a)
    scale = max(1.0, float(np.abs(eig.values).max(initial=0.0)))
    min_eig = float(eig.values[0])
    if min_eig < -clip_tol * scale:
        raise NotPositiveDefiniteError("matrix square root needs a PSD input", min_eig)
    return eig.apply(lambda v: np.sqrt(np.clip(v, 0.0, None)))


def definiteness(a: np.ndarray, tol: float | None = None) -> DefinitenessReport:
    """Classify a symmetric matrix as PD / PSD / indefinite.

    The default tolerance is scale aware: 1e-9 * max(1, ||a||).
    """
    eig = sym_eig(a)
    min_eig = float(eig.values[0])
    if tol is None:
        scale = float(np.abs(eig.values).max(initial=0.0))
        tol = 1e-9 * max(1.0, scale)
    return DefinitenessReport(
        min_eigenvalue=min_eig,
        is_psd=min_eig > -tol,
        is_pd=min_eig > tol,
        tolerance_used=float(tol),
    )


def spectral_norm(a: np.ndarray) -> float:
    """Largest singular value."""
    return float(np.linalg.norm(np.asarray(a, dtype=float), 2))


def vec(a: np.ndarray) -> np.ndarray:
    """Column-major stacking of a matrix into a vector."""
    return np.asarray(a, dtype=float).flatten(order="F")


def unvec(v: np.ndarray, n: int) -> np.ndarray:
    """Inverse of :func:`vec` for an n-by-n matrix."""
    v = np.asarray(v, dtype=float)
    if v.size != n * n:
        raise ValueError(f"vector of length {v.size} is not n*n for n={n}")
    return v.reshape((n, n), order="F")
