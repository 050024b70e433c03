"""Moment estimators of the mean-reversion / drift matrix.

The pipeline is: sample autocovariances -> CARE coefficients -> positive
definiteness gates on C and D -> PSD CARE solve. When either gate fails
(or the solver finds no PSD solution at finite sample size) the estimate
falls back to the zero matrix with ``gate_passed = False``; statistical
failure is never an exception.

The noise variance v(t) is always an input, supplied by the caller from
the model specification; it is not estimated here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path as FsPath
from typing import Callable

import numpy as np

from .autocov import AutocovSeq, sample_autocov, sample_autocov_sampled
from .linalg import logm_spd, spectral_norm, sym_eig
from .processes import ModelSpec, Path, noise_variance, var1_autocov
from .riccati import (
    CareCoefficients,
    CareSolution,
    CareSolverError,
    build_coeffs_continuous,
    build_coeffs_discrete,
    solve_care,
)

__all__ = [
    "EstimateResult",
    "estimate_discrete",
    "estimate_discrete_from_autocov",
    "estimate_continuous",
    "estimate_continuous_from_autocov",
    "recover_drift",
    "default_horizon",
    "univariate_quadratic_roots",
    "DegeneracyReport",
    "degeneracy_check",
    "univariate_drift",
    "implied_increment_autocov",
    "implied_increment_autocov_continuous",
    "DegenerateEquationError",
    "NoRealSolutionError",
]

#: Eigenvalues of I - estimate are clamped into this window before the log.
DRIFT_CLAMP = (1e-6, 1.0 - 1e-6)


class DegenerateEquationError(ValueError):
    """The univariate quadratic has a vanishing leading coefficient."""


class NoRealSolutionError(ValueError):
    """A square root of a negative quantity was requested."""

    def __init__(self, message: str, radicand: float):
        super().__init__(f"{message} (radicand {radicand:.6g})")
        self.radicand = radicand


@dataclass(frozen=True)
class EstimateResult:
    """Outcome of one estimation run.

    ``estimate`` is the PSD CARE solution (discrete mean-reversion matrix or
    continuous drift matrix), or the zero matrix when ``gate_passed`` is
    False. For discrete runs ``drift`` carries the implied continuous drift
    recovered through the matrix logarithm.
    """

    estimate: np.ndarray
    gate_passed: bool
    residual_norm: float
    horizon: float
    sample_size: int
    provenance: str
    drift: np.ndarray | None = None
    drift_clamped: bool = False
    failure_reason: str | None = None
    coefficients: CareCoefficients | None = None
    solution: CareSolution | None = None

    @property
    def n_dims(self) -> int:
        return self.estimate.shape[0]

    def to_json(self, path: str | FsPath | None = None) -> str:
        payload = json.dumps(
            {
                "estimate": self.estimate.tolist(),
                "gate_passed": self.gate_passed,
                "residual_norm": self.residual_norm,
                "horizon": self.horizon,
                "sample_size": self.sample_size,
                "provenance": self.provenance,
                "drift": None if self.drift is None else self.drift.tolist(),
                "drift_clamped": self.drift_clamped,
                "failure_reason": self.failure_reason,
            },
            indent=2,
        )
        if path is not None:
            FsPath(path).write_text(payload + "\n", encoding="utf-8")
        return payload


def recover_drift(estimate: np.ndarray, clamp: tuple[float, float] = DRIFT_CLAMP) -> tuple[np.ndarray, bool]:
    """Implied drift -log(I - estimate) with spectrum clamping.

    Eigenvalues of I - estimate are clamped into ``clamp`` so the logarithm
    stays defined for noisy inputs; the flag reports whether clamping
    fired. Returns (drift, clamped).
    """
    estimate = np.atleast_2d(np.asarray(estimate, dtype=float))
    eig = sym_eig(np.eye(estimate.shape[0]) - estimate)
    lo, hi = clamp
    clipped = np.clip(eig.values, lo, hi)
    clamped = bool(np.any(clipped != eig.values))
    if not clamped:
        return -logm_spd(np.eye(estimate.shape[0]) - estimate), False
    drift = -(eig.vectors * np.log(clipped)) @ eig.vectors.T
    return 0.5 * (drift + drift.T), True


def _fallback(coeffs: CareCoefficients, reason: str, sample_size: int,
              provenance: str) -> EstimateResult:
    n = coeffs.n_dims
    zero = np.zeros((n, n))
    return EstimateResult(
        estimate=zero,
        gate_passed=False,
        residual_norm=spectral_norm(coeffs.d),
        horizon=coeffs.horizon,
        sample_size=sample_size,
        provenance=provenance,
        failure_reason=reason,
        coefficients=coeffs,
    )


def _estimate_from_coeffs(coeffs: CareCoefficients, sample_size: int,
                          provenance: str, recover: bool) -> EstimateResult:
    if not coeffs.pd_report_c.is_pd:
        return _fallback(coeffs, "gate_c", sample_size, provenance)
    if not coeffs.pd_report_d.is_pd:
        return _fallback(coeffs, "gate_d", sample_size, provenance)
    try:
        solution = solve_care(coeffs)
    except CareSolverError:
        return _fallback(coeffs, "solver", sample_size, provenance)
    drift, clamped = (None, False)
    if recover:
        drift, clamped = recover_drift(solution.x)
    return EstimateResult(
        estimate=solution.x,
        gate_passed=True,
        residual_norm=solution.residual_norm,
        horizon=coeffs.horizon,
        sample_size=sample_size,
        provenance=provenance,
        drift=drift,
        drift_clamped=clamped,
        coefficients=coeffs,
        solution=solution,
    )


def estimate_discrete_from_autocov(gammas: AutocovSeq, noise_var: np.ndarray,
                                   horizon: int) -> EstimateResult:
    """Estimate the mean-reversion matrix from given autocovariances."""
    coeffs = build_coeffs_discrete(gammas, noise_var, horizon)
    size = gammas.sample_size or 0
    return _estimate_from_coeffs(coeffs, size, "discrete", recover=True)


def estimate_discrete(path: Path, noise_var: np.ndarray, horizon: int,
                      max_lag: int | None = None, center: bool = True) -> EstimateResult:
    """Full discrete pipeline from an observed path.

    Autocovariances are estimated at lags 0..max_lag (default: exactly the
    horizon), coefficients built, gates checked, and the CARE solved.
    """
    if path.n_points <= horizon:
        raise ValueError("path must be longer than the horizon")
    gammas = sample_autocov(path, max_lag if max_lag is not None else horizon, center)
    return estimate_discrete_from_autocov(gammas, noise_var, horizon)


def estimate_continuous_from_autocov(gammas: AutocovSeq, noise_var: np.ndarray,
                                     horizon: float) -> EstimateResult:
    """Estimate the drift matrix from grid autocovariances."""
    coeffs = build_coeffs_continuous(gammas, noise_var, horizon)
    size = gammas.sample_size or 0
    return _estimate_from_coeffs(coeffs, size, "continuous", recover=False)


def estimate_continuous(path: Path, noise_var: np.ndarray, horizon: float,
                        center: bool = True) -> EstimateResult:
    """Full continuous pipeline from a uniformly sampled path."""
    gammas = sample_autocov_sampled(path, horizon, center)
    return estimate_continuous_from_autocov(gammas, noise_var, horizon)


def default_horizon(spec: ModelSpec, t_max: int = 10) -> int:
    """Smallest integer horizon <= t_max whose theoretical D is PD."""
    if spec.kind != "var1":
        raise ValueError("default_horizon currently supports var1 models")
    gammas = var1_autocov(spec, t_max)
    for t in range(1, t_max + 1):
        coeffs = build_coeffs_discrete(gammas, noise_variance(spec, t), t)
        if coeffs.pd_report_d.is_pd and coeffs.pd_report_c.is_pd:
            return t
    raise ValueError(f"no horizon up to {t_max} makes D positive definite")


# ---------------------------------------------------------------------------
# univariate diagnostics
# ---------------------------------------------------------------------------


def univariate_quadratic_roots(gammas: AutocovSeq, incr_autocov_t: float,
                               t: int) -> tuple[float, float] | None:
    """Roots of the scalar quadratic linking the AR coefficient to the noise.

    Solves gamma(t) x^2 - (gamma(t+1) + gamma(t-1)) x + gamma(t) - r(t) = 0
    for the AR coefficient, where r(t) is the lag-t autocovariance of the
    noise increments. Returns the two real roots in ascending order, or
    None when the pair is complex. Raises on a vanishing gamma(t).
    """
    if gammas.n_dims != 1:
        raise ValueError("univariate_quadratic_roots needs a one-dimensional series")
    g_t = float(gammas.at(t)[0, 0])
    if g_t == 0.0:
        raise DegenerateEquationError("gamma(t) is zero; the quadratic degenerates")
    g_next = float(gammas.at(t + 1)[0, 0])
    g_prev = float(gammas.at(t - 1)[0, 0])
    a, b, c = g_t, -(g_next + g_prev), g_t - float(incr_autocov_t)
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return None
    root = np.sqrt(disc)
    r1 = (-b - root) / (2.0 * a)
    r2 = (-b + root) / (2.0 * a)
    return (min(r1, r2), max(r1, r2))


@dataclass(frozen=True)
class DegeneracyReport:
    """Outcome of the repeated-roots diagnostic over a horizon range."""

    is_degenerate: bool
    horizons: tuple
    root_pairs: tuple
    shared_roots: tuple[float, float] | None
    quadratic2_max_residual: float | None
    reason: str


def degeneracy_check(gammas: AutocovSeq, incr_autocov: Callable[[int], float],
                     t_range, tol: float = 1e-8) -> DegeneracyReport:
    """Flag series whose scalar quadratic has the same root pair at every lag.

    When the root pairs coincide across ``t_range`` (as unordered pairs,
    within tol) the diagnostic additionally substitutes 1 - root into the
    coefficient-level quadratic C_t x^2 - 2 B_t x - D_t = 0 for every
    horizon t >= 1 in range, with the noise variance accumulated from the
    increment autocovariances, and records the largest residual.
    """
    horizons = tuple(int(t) for t in t_range)
    if not horizons:
        return DegeneracyReport(False, (), (), None, None, "empty horizon range")

    pairs = []
    for t in horizons:
        roots = univariate_quadratic_roots(gammas, float(incr_autocov(t)), t)
        if roots is None:
            return DegeneracyReport(
                False, horizons, tuple(pairs), None, None,
                f"complex roots at t={t}",
            )
        pairs.append(roots)
    first = pairs[0]
    for t, pair in zip(horizons[1:], pairs[1:]):
        if abs(pair[0] - first[0]) > tol or abs(pair[1] - first[1]) > tol:
            return DegeneracyReport(
                False, horizons, tuple(pairs), None, None,
                f"root pair changes at t={t}",
            )

    # shared pair: verify both candidate mean reversions solve the
    # coefficient quadratic at every positive horizon in range
    check_ts = [t for t in horizons if t >= 1]
    max_res = 0.0
    for t in check_ts:
        v_t = sum(
            (t - abs(l)) * float(incr_autocov(abs(l))) for l in range(-(t - 1), t)
        )
        coeffs = build_coeffs_discrete(gammas, np.array([[v_t]]), t)
        b, c, d = coeffs.b[0, 0], coeffs.c[0, 0], coeffs.d[0, 0]
        for root in first:
            theta = 1.0 - root
            max_res = max(max_res, abs(c * theta**2 - 2.0 * b * theta - d))
    is_degenerate = max_res <= tol
    reason = "shared roots solve the coefficient quadratic" if is_degenerate else (
        f"coefficient quadratic residual {max_res:.3g} exceeds tol"
    )
    return DegeneracyReport(is_degenerate, horizons, tuple(pairs), first,
                            max_res if check_ts else None, reason)


def _trapezoid_on_grid(gammas: AutocovSeq, lo: float, hi: float,
                       weight: Callable[[float], float] | None = None) -> np.ndarray:
    """Trapezoid integral of weight(s) * gamma(s) over [lo, hi] on the grid."""
    dt = float(gammas.lags[1] - gammas.lags[0])
    n_steps = (hi - lo) / dt
    m = int(round(n_steps))
    if abs(n_steps - m) > 1e-6 or abs(lo / dt - round(lo / dt)) > 1e-6:
        raise ValueError("integration bounds must sit on the lag grid")
    points = lo + dt * np.arange(m + 1)
    values = np.stack([gammas.at(round(s / dt) * dt) for s in points])
    if weight is not None:
        values = values * np.array([weight(s) for s in points])[:, None, None]
    w = np.full(m + 1, dt)
    w[0] = w[-1] = 0.5 * dt
    return np.tensordot(w, values, axes=(0, 0))


def univariate_drift(gammas: AutocovSeq, incr_autocov_delta: float, t: float,
                     delta: float) -> float:
    """Scalar drift from the increment-autocovariance identity.

    Solves r_delta(t) = 2 gamma(t) - gamma(t+delta) - gamma(t-delta)
    + H^2 * W for H, where W is the tent-weighted integral of gamma over
    [t-delta, t+delta]. Raises when W is not positive or the radicand is
    negative.
    """
    if gammas.n_dims != 1:
        raise ValueError("univariate_drift needs a one-dimensional series")
    w_left = _trapezoid_on_grid(gammas, t - delta, t, lambda s: s - t + delta)
    w_right = _trapezoid_on_grid(gammas, t, t + delta, lambda s: t - s + delta)
    w = float((w_left + w_right)[0, 0])
    if w <= 0.0:
        raise NoRealSolutionError("tent-weighted autocovariance integral is not positive", w)
    g_t = float(gammas.at(t)[0, 0])
    g_plus = float(gammas.at(t + delta)[0, 0])
    g_minus = float(gammas.at(t - delta)[0, 0])
    radicand = (float(incr_autocov_delta) - 2.0 * g_t + g_plus + g_minus) / w
    if radicand < 0.0:
        raise NoRealSolutionError("drift identity has no real solution", radicand)
    return float(np.sqrt(radicand))


def implied_increment_autocov(gammas: AutocovSeq, ar_coeff: np.ndarray, t: int) -> np.ndarray:
    """Noise-increment autocovariance implied by the AR(1) form.

    r(t) = phi gamma(t) phi - gamma(t+1) phi - phi gamma(t-1) + gamma(t).
    """
    phi = np.atleast_2d(np.asarray(ar_coeff, dtype=float))
    g_t = gammas.at(t)
    return phi @ g_t @ phi - gammas.at(t + 1) @ phi - phi @ gammas.at(t - 1) + g_t


def implied_increment_autocov_continuous(gammas: AutocovSeq, drift: np.ndarray,
                                         t: float, delta: float) -> np.ndarray:
    """delta-increment autocovariance implied by the Langevin form.

    r_delta(t) = 2 gamma(t) - gamma(t+delta) - gamma(t-delta)
    + (I_plus - I_minus) H + H (I_minus - I_plus) + H W H, with
    I_minus, I_plus the integrals of gamma over [t-delta, t] and
    [t, t+delta] and W the tent-weighted integral; all by trapezoid.
    """
    h = np.atleast_2d(np.asarray(drift, dtype=float))
    i_minus = _trapezoid_on_grid(gammas, t - delta, t)
    i_plus = _trapezoid_on_grid(gammas, t, t + delta)
    w = _trapezoid_on_grid(gammas, t - delta, t, lambda s: s - t + delta)
    w = w + _trapezoid_on_grid(gammas, t, t + delta, lambda s: t - s + delta)
    out = 2.0 * gammas.at(t) - gammas.at(t + delta) - gammas.at(t - delta)
    out = out + (i_plus - i_minus) @ h + h @ (i_minus - i_plus) + h @ w @ h
    return out
