"""The linear map from autocovariance errors to coefficient errors.

Stacking the (column-major) vectorized deviations of the autocovariance
estimates at lags 0..t gives a vector z of length (t+1)n^2. The deviations
of the CARE coefficients are an exact linear function of z; this module
materializes that map as a 3n^2 x (t+1)n^2 matrix, provides its quadrature
analogue on a continuous lag grid, and samples the scaled estimation error
by Monte Carlo to probe the linearity of the limiting law empirically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autocov import AutocovSeq, sample_autocov
from .estimation import estimate_discrete_from_autocov
from .linalg import vec
from .processes import ModelSpec, noise_variance, simulate_var1, var1_autocov
from .riccati import build_coeffs_discrete
from .rng import stream

__all__ = [
    "transpose_permutation",
    "StackedCovError",
    "stack_autocov_errors",
    "L1Operator",
    "build_l1",
    "build_l1_continuous",
    "verify_l1_identity",
    "MonteCarloLimit",
    "monte_carlo_limit",
]


def transpose_permutation(n: int) -> np.ndarray:
    """Permutation matrix P with P vec(A) = vec(A^T) (column-major vec)."""
    if n < 1:
        raise ValueError("n must be positive")
    p = np.zeros((n * n, n * n))
    for i in range(n):
        for j in range(n):
            p[i + j * n, j + i * n] = 1.0
    return p


@dataclass(frozen=True)
class StackedCovError:
    """vec-stacked autocovariance deviations at lags 0..t."""

    z: np.ndarray
    n: int
    t: int

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        if z.shape != ((self.t + 1) * self.n**2,):
            raise ValueError(
                f"expected length {(self.t + 1) * self.n ** 2}, got {z.shape}"
            )
        object.__setattr__(self, "z", z)

    def permuted(self) -> np.ndarray:
        """Companion vector with every block transposed."""
        p = transpose_permutation(self.n)
        blocks = self.z.reshape(self.t + 1, self.n**2)
        return (blocks @ p.T).ravel()


def stack_autocov_errors(est: AutocovSeq, truth: AutocovSeq, t: int) -> StackedCovError:
    """Stack vec(est(k) - truth(k)) for k = 0..t."""
    n = truth.n_dims
    z = np.concatenate([vec(est.at(k) - truth.at(k)) for k in range(t + 1)])
    return StackedCovError(z=z, n=n, t=t)


@dataclass(frozen=True)
class L1Operator:
    """Linear map from stacked autocovariance errors to (dC, dB, dD)."""

    matrix: np.ndarray
    n: int
    t: float

    def apply(self, z: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(z, dtype=float)

    def split(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Apply and split the image into the (dC, dB, dD) blocks."""
        out = self.apply(z)
        m = self.n**2
        return out[:m], out[m : 2 * m], out[2 * m :]


def build_l1(n: int, t: int) -> L1Operator:
    """Exact coefficient-error map for integer horizon t >= 1.

    Row blocks (each n^2 rows), with Z_k the k-th lag block and
    ~Z_k its transposed companion:

      dC = sum_{k=0}^{t-1} (t-k) Z_k + sum_{k=1}^{t-1} (t-k) ~Z_k
      dB = sum_{k=1}^{t}   (Z_{k-1} - ~Z_k)
      dD = Z_t + ~Z_t - 2 Z_0

    The k = t-1..1 sum in dC is empty at t = 1.
    """
    if t < 1:
        raise ValueError("t must be at least 1")
    m = n * n
    p = transpose_permutation(n)
    eye = np.eye(m)
    blocks = np.zeros((3, t + 1, m, m))
    for k in range(t):
        blocks[0, k] += (t - k) * eye
    for k in range(1, t):
        blocks[0, k] += (t - k) * p
    for k in range(1, t + 1):
        blocks[1, k - 1] += eye
        blocks[1, k] -= p
    blocks[2, t] += eye + p
    blocks[2, 0] -= 2.0 * eye
    matrix = blocks.transpose(0, 2, 1, 3).reshape(3 * m, (t + 1) * m)
    return L1Operator(matrix=matrix, n=n, t=float(t))


def build_l1_continuous(n: int, lag_times: np.ndarray) -> L1Operator:
    """Quadrature analogue of the coefficient-error map on a uniform grid.

    Uses exactly the trapezoid weights of the continuous coefficient
    builder, so applying the operator to stacked grid deviations matches
    the builder's coefficient differences to floating point.
    """
    lag_times = np.asarray(lag_times, dtype=float)
    if lag_times.size < 2:
        raise ValueError("need at least two grid lags")
    dt = float(lag_times[1] - lag_times[0])
    if not np.allclose(np.diff(lag_times), dt, rtol=0, atol=1e-9 * dt):
        raise ValueError("lag grid must be uniform")
    g = lag_times.size
    m = n * n
    p = transpose_permutation(n)
    eye = np.eye(m)
    w = np.full(g, dt)
    w[0] = w[-1] = 0.5 * dt
    ck = np.correlate(w, w, mode="full")[g - 1 :]

    blocks = np.zeros((3, g, m, m))
    blocks[0, 0] += ck[0] * eye
    for k in range(1, g):
        blocks[0, k] += ck[k] * (eye + p)
    for i in range(g):
        blocks[1, i] += w[i] * (eye - p)
    blocks[2, g - 1] += eye + p
    blocks[2, 0] -= 2.0 * eye
    matrix = blocks.transpose(0, 2, 1, 3).reshape(3 * m, g * m)
    return L1Operator(matrix=matrix, n=n, t=float(lag_times[-1]))


def verify_l1_identity(truth: AutocovSeq, est: AutocovSeq, t: int) -> float:
    """Max abs gap between the operator image and direct coefficient deltas.

    Both sides are algebraically identical, so the gap is floating-point
    noise; the contract elsewhere is <= 1e-12. The lag-0 matrices of both
    sequences must be symmetric (any genuine autocovariance is); otherwise
    the D symmetrization in the builder breaks the equivalence.
    """
    n = truth.n_dims
    v = np.zeros((n, n))  # the noise variance cancels in the difference
    c_e = build_coeffs_discrete(est, v, t)
    c_t = build_coeffs_discrete(truth, v, t)
    direct = np.concatenate(
        [vec(c_e.c - c_t.c), vec(c_e.b - c_t.b), vec(c_e.d - c_t.d)]
    )
    z = stack_autocov_errors(est, truth, t)
    via_operator = build_l1(n, t).apply(z.z)
    return float(np.max(np.abs(direct - via_operator)))


@dataclass(frozen=True)
class MonteCarloLimit:
    """Scaled estimation errors and autocovariance errors across replicates.

    ``scaled_errors`` holds rate * vec(estimate - truth) per replicate,
    ``scaled_z`` the matching stacked autocovariance deviations; rows are
    replicates. ``r_squared`` measures how much of the estimation error the
    image of the coefficient-error map explains linearly, over the
    gate-passed replicates.
    """

    scaled_errors: np.ndarray
    scaled_z: np.ndarray
    gate_passed: np.ndarray
    seeds: np.ndarray
    rate: float
    horizon: int
    error_mean: np.ndarray
    error_cov: np.ndarray
    r_squared: float

    @property
    def n_reps(self) -> int:
        return self.scaled_errors.shape[0]

    @property
    def gate_failure_rate(self) -> float:
        return 1.0 - float(np.mean(self.gate_passed))


def _limit_rep(spec: ModelSpec, n_steps: int, horizon: int, truth: AutocovSeq,
               theta_true: np.ndarray, seed: int, rep: int):
    path = simulate_var1(spec, n_steps, 0, stream(seed, rep))
    gammas = sample_autocov(path, horizon)
    z = stack_autocov_errors(gammas, truth, horizon)
    result = estimate_discrete_from_autocov(
        gammas, noise_variance(spec, horizon), horizon
    )
    err = vec(result.estimate - theta_true)
    return err, z.z, result.gate_passed


def monte_carlo_limit(spec: ModelSpec, n_steps: int, horizon: int, reps: int,
                      seed: int = 0, rate_exponent: float = 0.5,
                      jobs: int = 1) -> MonteCarloLimit:
    """Sample the scaled estimation error of the discrete pipeline.

    Each replicate simulates a stationary path of n_steps steps on its own
    seed substream, estimates the mean-reversion matrix, and records
    n_steps**rate_exponent times the error together with the equally scaled
    stacked autocovariance deviations. Replicates are independent, so
    ``jobs`` workers produce exactly the serial result. The linearity
    diagnostic regresses the error on the image of the coefficient-error
    map (intercept included, absorbing finite-sample bias) and reports the
    joint R^2.
    """
    if reps < 50:
        raise ValueError("reps must be at least 50 for a meaningful sample")
    if spec.kind != "var1":
        raise ValueError("monte_carlo_limit supports var1 models")
    n = spec.n_dims
    truth = var1_autocov(spec, horizon)
    theta_true = np.eye(n) - spec.coeff
    rate = float(n_steps**rate_exponent)

    def one(rep: int):
        return _limit_rep(spec, n_steps, horizon, truth, theta_true, seed, rep)

    if jobs <= 1:
        results = [one(rep) for rep in range(reps)]
    else:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, range(reps)))

    errors = np.empty((reps, n * n))
    zs = np.empty((reps, (horizon + 1) * n * n))
    gates = np.empty(reps, dtype=bool)
    for rep, (err, z, gate) in enumerate(results):
        errors[rep] = rate * err
        zs[rep] = rate * z
        gates[rep] = gate

    ok = gates
    r_squared = float("nan")
    if ok.any():
        y = errors[ok]
        features = zs[ok] @ build_l1(n, horizon).matrix.T
        design = np.column_stack([np.ones(y.shape[0]), features])
        coef, *_ = np.linalg.lstsq(design, y, rcond=None)
        resid = y - design @ coef
        total = y - y.mean(axis=0)
        ss_tot = float(np.sum(total**2))
        r_squared = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
        mean = y.mean(axis=0)
        cov = np.cov(y, rowvar=False).reshape(n * n, n * n)
    else:
        mean = np.zeros(n * n)
        cov = np.zeros((n * n, n * n))
    return MonteCarloLimit(
        scaled_errors=errors,
        scaled_z=zs,
        gate_passed=gates,
        seeds=np.arange(reps),
        rate=rate,
        horizon=horizon,
        error_mean=mean,
        error_cov=cov,
        r_squared=r_squared,
    )
