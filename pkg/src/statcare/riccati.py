"""Coefficient construction and the symmetric CARE solver.

The estimation route turns autocovariances into the coefficient triple
(B, C, D) of the continuous-type algebraic Riccati equation

    B^T X + X B - X C X + D = 0

and solves it for the unique positive semidefinite X whenever C and D are
positive definite. Coefficients come in a discrete flavor (finite sums over
integer lags) and a continuous one (trapezoid quadrature on the observation
grid).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path as FsPath

import numpy as np
from scipy.linalg import schur, solve_lyapunov

from .autocov import AutocovSeq
from .linalg import DefinitenessReport, definiteness, spectral_norm

__all__ = [
    "CareCoefficients",
    "CareSolution",
    "CareSolverError",
    "build_coeffs_discrete",
    "build_coeffs_continuous",
    "solve_care",
    "care_residual",
    "newton_refine",
]

DISCRETE = "discrete"
CONTINUOUS = "continuous"

#: Residual target of the solver, relative to max(1, ||D||).
SOLVE_RTOL = 1e-10
#: Residual bound accepted in a returned solution, relative to max(1, ||D||).
ACCEPT_RTOL = 1e-8
#: Hamiltonian eigenvalues closer than this to the imaginary axis are a tie.
AXIS_TOL = 1e-10


class CareSolverError(RuntimeError):
    """No acceptable PSD solution was found."""

    def __init__(self, message: str, best_residual: float = float("nan")):
        super().__init__(message)
        self.best_residual = best_residual


@dataclass(frozen=True)
class CareCoefficients:
    """The triple (b, c, d) at a given horizon, with PD reports for c and d."""

    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    horizon: float
    provenance: str
    pd_report_c: DefinitenessReport
    pd_report_d: DefinitenessReport

    @property
    def n_dims(self) -> int:
        return self.b.shape[0]

    @property
    def gates_pass(self) -> bool:
        return self.pd_report_c.is_pd and self.pd_report_d.is_pd

    def to_json(self, path: str | FsPath | None = None) -> str:
        payload = json.dumps(
            {
                "b": self.b.tolist(),
                "c": self.c.tolist(),
                "d": self.d.tolist(),
                "t": self.horizon,
                "provenance": self.provenance,
            },
            indent=2,
        )
        if path is not None:
            FsPath(path).write_text(payload + "\n", encoding="utf-8")
        return payload


def _coefficients(b, c, d, horizon, provenance) -> CareCoefficients:
    d = 0.5 * (d + d.T)
    return CareCoefficients(
        b=b,
        c=c,
        d=d,
        horizon=horizon,
        provenance=provenance,
        pd_report_c=definiteness(0.5 * (c + c.T)),
        pd_report_d=definiteness(d),
    )


def build_coeffs_discrete(gammas: AutocovSeq, noise_var: np.ndarray, horizon: int) -> CareCoefficients:
    """Coefficients from integer-lag autocovariances.

    B = sum_{k=1}^t [gamma(k-1) - gamma(k)^T],
    C = sum_{l=0}^{t-1} (t-l) gamma(l) + sum_{l=1}^{t-1} (t-l) gamma(l)^T,
    D = noise_var - 2 gamma(0) + gamma(t) + gamma(t)^T (symmetrized).
    """
    t = int(horizon)
    if t < 1:
        raise ValueError("horizon must be at least 1")
    if gammas.max_lag + 1e-9 < t:
        raise ValueError(f"autocovariances cover lags up to {gammas.max_lag}, need {t}")
    n = gammas.n_dims
    noise_var = np.atleast_2d(np.asarray(noise_var, dtype=float))

    b = np.zeros((n, n))
    for k in range(1, t + 1):
        b += gammas.at(k - 1) - gammas.at(k).T
    c = np.zeros((n, n))
    for l in range(t):
        c += (t - l) * gammas.at(l)
    for l in range(1, t):
        c += (t - l) * gammas.at(l).T
    d = noise_var - 2.0 * gammas.at(0) + gammas.at(t) + gammas.at(t).T
    return _coefficients(b, c, d, float(t), DISCRETE)


def _trapezoid_weights(m: int, dt: float) -> np.ndarray:
    w = np.full(m, dt)
    w[0] = w[-1] = 0.5 * dt
    return w


def build_coeffs_continuous(gammas: AutocovSeq, noise_var: np.ndarray, horizon: float) -> CareCoefficients:
    """Coefficients from grid autocovariances by composite trapezoid.

    B integrates gamma(s) - gamma(s)^T over [0, t]; C integrates
    gamma(s - u) over the square, grouped by lag so both quadratures share
    one weight vector; D is the same expression as in the discrete case.
    The horizon must sit on the lag grid.
    """
    lags = gammas.lags
    if lags.size < 2:
        raise ValueError("need at least two grid lags")
    dt = float(lags[1] - lags[0])
    if not np.allclose(np.diff(lags), dt, rtol=0, atol=1e-9 * dt):
        raise ValueError("lag grid must be uniform")
    steps = horizon / dt
    m = int(round(steps)) + 1
    if abs(steps - round(steps)) > 1e-6 or m < 2:
        raise ValueError(f"horizon {horizon} is not a multiple of the grid spacing {dt}")
    if m > lags.size:
        raise ValueError(f"grid covers [0, {lags[-1]}], need [0, {horizon}]")
    n = gammas.n_dims
    noise_var = np.atleast_2d(np.asarray(noise_var, dtype=float))

    w = _trapezoid_weights(m, dt)
    g = gammas.gammas[:m]
    b = np.tensordot(w, g - np.transpose(g, (0, 2, 1)), axes=(0, 0))
    # c_k = sum_i w_i w_{i-k}: trapezoid weights of the double integral
    # grouped by lag k = i - j, so gamma(k dt) appears once and its
    # transpose carries the negative lags.
    ck = np.correlate(w, w, mode="full")[m - 1 :]
    c = np.tensordot(ck, g, axes=(0, 0))
    c += np.tensordot(ck[1:], np.transpose(g[1:], (0, 2, 1)), axes=(0, 0))
    gt = gammas.at(horizon)
    d = noise_var - 2.0 * gammas.at(0.0) + gt + gt.T
    return _coefficients(b, c, d, float(horizon), CONTINUOUS)


@dataclass(frozen=True)
class CareSolution:
    """A PSD solution together with its residual and solver provenance."""

    x: np.ndarray
    residual_norm: float
    iterations: int
    method: str


def care_residual(coeffs: CareCoefficients, x: np.ndarray) -> float:
    """Spectral norm of B^T X + X B - X C X + D."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    b, c, d = coeffs.b, coeffs.c, coeffs.d
    return spectral_norm(b.T @ x + x @ b - x @ c @ x + d)


def _care_matrix(b, c, d, x) -> np.ndarray:
    return b.T @ x + x @ b - x @ c @ x + d


def newton_refine(b: np.ndarray, c: np.ndarray, d: np.ndarray, x0: np.ndarray,
                  tol: float, max_iter: int = 50) -> tuple[np.ndarray, float, int]:
    """Newton iteration for the CARE from a stabilizing start.

    Each step solves the Lyapunov equation
    (b - c x)^T y + y (b - c x) = -(d + x c x) for the next iterate.
    Returns (best solution, its residual norm, iterations run).
    """
    x = 0.5 * (x0 + x0.T)
    best_x, best_res = x, spectral_norm(_care_matrix(b, c, d, x))
    iterations = 0
    for _ in range(max_iter):
        if best_res <= tol:
            break
        a = b - c @ x
        try:
            x_next = solve_lyapunov(a.T, -(d + x @ c @ x))
        except Exception as exc:  # singular Lyapunov operator
            raise CareSolverError(f"Newton step failed: {exc}", best_res) from exc
        x = 0.5 * (x_next + x_next.T)
        iterations += 1
        res = spectral_norm(_care_matrix(b, c, d, x))
        if not np.isfinite(res):
            raise CareSolverError("Newton iteration diverged", best_res)
        if res < best_res:
            best_x, best_res = x, res
        elif res > 10.0 * best_res:
            break
    return best_x, best_res, iterations


def _schur_initial(b: np.ndarray, c: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Stable invariant subspace of the Hamiltonian [[B, -C], [-D, -B^T]]."""
    n = b.shape[0]
    ham = np.block([[b, -c], [-d, -b.T]])
    eigvals = np.linalg.eigvals(ham)
    near_axis = np.abs(eigvals.real) < AXIS_TOL * max(1.0, np.abs(eigvals).max())
    if np.any(near_axis):
        raise CareSolverError(
            "Hamiltonian eigenvalue on the imaginary axis; no stable/antistable split"
        )
    _, z, sdim = schur(ham, output="real", sort=lambda re, im: re < 0.0)
    if sdim != n:
        raise CareSolverError(f"stable subspace has dimension {sdim}, expected {n}")
    u1 = z[:n, :n]
    u2 = z[n:, :n]
    if abs(np.linalg.det(u1)) < 1e-300:
        raise CareSolverError("stable subspace is not a graph; cannot form solution")
    x = u2 @ np.linalg.inv(u1)
    return 0.5 * (x + x.T)


def _solve_scalar(b: float, c: float, d: float) -> float:
    """Non-negative root of c x^2 - 2 b x - d = 0."""
    if abs(c) < 1e-300:
        if abs(b) < 1e-300:
            if abs(d) < 1e-300:
                return 0.0
            raise CareSolverError("degenerate scalar equation has no solution", abs(d))
        return -d / (2.0 * b)
    disc = b * b + c * d
    if disc < 0.0:
        if disc > -1e-12 * max(1.0, b * b):
            disc = 0.0  # double root within rounding
        else:
            raise CareSolverError("scalar equation has no real root", float("nan"))
    return (b + np.sqrt(disc)) / c


def solve_care(coeffs: CareCoefficients, max_iter: int = 50) -> CareSolution:
    """Unique PSD solution of the CARE for positive definite C and D.

    Dimension one uses the quadratic formula directly. Otherwise an ordered
    real Schur factorization of the Hamiltonian provides the stabilizing
    start and Newton iteration refines it. Raises :class:`CareSolverError`
    (carrying the best residual reached) when no PSD solution emerges.
    """
    b = np.asarray(coeffs.b, dtype=float)
    c = 0.5 * (coeffs.c + coeffs.c.T)
    d = 0.5 * (coeffs.d + coeffs.d.T)
    n = b.shape[0]
    tol_accept = ACCEPT_RTOL * max(1.0, spectral_norm(d))
    tol_solve = SOLVE_RTOL * max(1.0, spectral_norm(d))

    if n == 1:
        x = np.array([[_solve_scalar(float(b[0, 0]), float(c[0, 0]), float(d[0, 0]))]])
        residual = care_residual(coeffs, x)
        method, iterations = "scalar_quadratic", 0
    else:
        x0 = _schur_initial(b, c, d)
        x, residual, iterations = newton_refine(b, c, d, x0, tol_solve, max_iter)
        method = "newton" if iterations else "schur"

    if residual > tol_accept:
        raise CareSolverError(
            f"residual {residual:.3g} above tolerance {tol_accept:.3g}", residual
        )
    report = definiteness(x)
    if not report.is_psd:
        raise CareSolverError(
            f"solution is not PSD (min eigenvalue {report.min_eigenvalue:.3g})", residual
        )
    return CareSolution(x=x, residual_norm=residual, iterations=iterations, method=method)
