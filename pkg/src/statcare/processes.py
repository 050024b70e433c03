"""Generative models for stationary series and their exact second moments.

Discrete models are AR(1) / ARMA(1,q) recursions with a symmetric
coefficient matrix whose spectrum lies in (0, 1); the continuous model is a
mean-reverting (Ornstein-Uhlenbeck type) diffusion with a positive definite
drift matrix, driven by Brownian motion or fractional Brownian motion.

The module also carries the pathwise utilities built on the AR(1) form
X_t = phi X_{t-1} + increment: recovering the cumulative noise from an
observed path, rebuilding the path from a truncated noise history, and the
Lamperti bijection between stationary and self-similar scalings.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from pathlib import Path as FsPath

import numpy as np
from scipy.linalg import solve_discrete_lyapunov
from scipy.signal import lfilter

from .autocov import THEORETICAL, AutocovSeq
from .linalg import spectral_norm, sqrtm_psd, sym_eig, symmetrize
from .rng import as_generator

__all__ = [
    "VAR1",
    "VARMA1Q",
    "OU",
    "ModelSpec",
    "Path",
    "NoisePath",
    "simulate",
    "simulate_var1",
    "simulate_varma",
    "simulate_ou",
    "var1_autocov",
    "ou_autocov",
    "series_autocov",
    "noise_variance",
    "recover_noise",
    "reconstruct_from_noise",
    "lamperti_forward",
    "lamperti_inverse",
    "ou_stationary_cov",
    "ou_step_cov",
    "fractional_gaussian_noise",
]

VAR1 = "var1"
VARMA1Q = "varma1q"
OU = "ou"

_DRIVERS = ("iid_gauss", "iid_uniform", "bm", "fbm")


@dataclass(frozen=True)
class ModelSpec:
    """Parameters of a generating model.

    ``coeff`` is the AR coefficient matrix (discrete kinds, spectrum in
    (0,1)) or the drift matrix (continuous, positive definite); ``sigma`` is
    the innovation / driver covariance. ``ma_coeffs`` are the moving-average
    matrices theta_1..theta_q with theta_0 = I implicit.
    """

    kind: str
    coeff: np.ndarray
    sigma: np.ndarray
    ma_coeffs: tuple = ()
    driver: str = "iid_gauss"
    hurst: float | None = None

    def __post_init__(self):
        coeff = symmetrize(self.coeff)
        sigma = symmetrize(self.sigma)
        if sigma.shape != coeff.shape:
            raise ValueError("coeff and sigma dimensions differ")
        if np.linalg.eigvalsh(sigma).min() < -1e-10 * max(1.0, spectral_norm(sigma)):
            raise ValueError("sigma must be positive semidefinite")
        eig = np.linalg.eigvalsh(coeff)
        if self.kind in (VAR1, VARMA1Q):
            if eig.min() <= 0.0 or eig.max() >= 1.0:
                raise ValueError(
                    f"AR coefficient eigenvalues must lie in (0,1), got {eig}"
                )
            if self.driver not in ("iid_gauss", "iid_uniform"):
                raise ValueError("discrete kinds use iid innovations")
        elif self.kind == OU:
            if eig.min() <= 0.0:
                raise ValueError("drift matrix must be positive definite")
            if self.driver not in ("bm", "fbm"):
                raise ValueError("continuous kind uses a bm or fbm driver")
        else:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.driver not in _DRIVERS:
            raise ValueError(f"unknown driver {self.driver!r}")
        if self.driver == "fbm":
            if self.hurst is None or not 0.0 < self.hurst < 1.0:
                raise ValueError("fbm driver needs hurst in (0,1)")
        ma = tuple(np.asarray(m, dtype=float) for m in self.ma_coeffs)
        for m in ma:
            if m.shape != coeff.shape:
                raise ValueError("MA coefficient dimensions differ from coeff")
        if ma and self.kind != VARMA1Q:
            raise ValueError("ma_coeffs only apply to the varma1q kind")
        object.__setattr__(self, "coeff", coeff)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "ma_coeffs", ma)

    @property
    def n_dims(self) -> int:
        return self.coeff.shape[0]

    @property
    def ma_order(self) -> int:
        return len(self.ma_coeffs)

    @classmethod
    def var1(cls, coeff, sigma, driver: str = "iid_gauss") -> "ModelSpec":
        return cls(VAR1, np.atleast_2d(coeff), np.atleast_2d(sigma), driver=driver)

    @classmethod
    def varma(cls, coeff, sigma, ma_coeffs, driver: str = "iid_gauss") -> "ModelSpec":
        ma = tuple(np.atleast_2d(m) for m in ma_coeffs)
        return cls(VARMA1Q, np.atleast_2d(coeff), np.atleast_2d(sigma), ma, driver)

    @classmethod
    def ou(cls, drift, sigma, driver: str = "bm", hurst: float | None = None) -> "ModelSpec":
        return cls(OU, np.atleast_2d(drift), np.atleast_2d(sigma), driver=driver, hurst=hurst)

    def to_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "coeff": self.coeff.tolist(),
            "sigma": self.sigma.tolist(),
            "driver": self.driver,
        }
        if self.ma_coeffs:
            out["ma_coeffs"] = [m.tolist() for m in self.ma_coeffs]
        if self.hurst is not None:
            out["hurst"] = self.hurst
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        return cls(
            kind=d["kind"],
            coeff=np.asarray(d["coeff"], dtype=float),
            sigma=np.asarray(d["sigma"], dtype=float),
            ma_coeffs=tuple(np.asarray(m, dtype=float) for m in d.get("ma_coeffs", [])),
            driver=d.get("driver", "iid_gauss" if d["kind"] != OU else "bm"),
            hurst=d.get("hurst"),
        )


@dataclass(frozen=True)
class Path:
    """A sampled n-dimensional path: values[:, k] is the state at t0 + k*dt."""

    values: np.ndarray
    t0: float = 0.0
    dt: float = 1.0
    kind: str = "discrete"

    def __post_init__(self):
        # contiguous layout keeps BLAS summation order, and therefore every
        # downstream float, independent of where the values came from
        values = np.ascontiguousarray(np.atleast_2d(np.asarray(self.values, dtype=float)))
        if not np.all(np.isfinite(values)):
            raise ValueError("path contains non-finite values")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if values.shape[1] < 2:
            raise ValueError("a path needs at least two grid points")
        if self.kind not in ("discrete", "continuous"):
            raise ValueError(f"unknown path kind {self.kind!r}")
        object.__setattr__(self, "values", values)

    @property
    def n_dims(self) -> int:
        return self.values.shape[0]

    @property
    def n_points(self) -> int:
        return self.values.shape[1]

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_points)

    def to_csv(self, path: str | FsPath) -> None:
        n = self.n_dims
        header = "t," + ",".join(f"x{i+1}" for i in range(n))
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(header + "\n")
            for t, col in zip(self.times, self.values.T):
                fh.write(",".join([f"{t:.17g}"] + [f"{v:.17g}" for v in col]) + "\n")

    @classmethod
    def from_csv(cls, path: str | FsPath, kind: str | None = None) -> "Path":
        with open(path, "r", encoding="utf-8") as fh:
            data = np.loadtxt(io.StringIO(fh.read()), delimiter=",", skiprows=1, ndmin=2)
        times, values = data[:, 0], data[:, 1:].T
        if times.size < 2:
            raise ValueError("path file has fewer than two rows")
        dt = float(times[1] - times[0])
        if not np.allclose(np.diff(times), dt, rtol=0, atol=1e-9 * max(dt, 1.0)):
            raise ValueError("path grid is not uniform")
        if kind is None:
            kind = "discrete" if abs(dt - 1.0) < 1e-12 else "continuous"
        return cls(values, t0=float(times[0]), dt=dt, kind=kind)


@dataclass(frozen=True)
class NoisePath:
    """Increments of the cumulative noise and the noise itself (starts at 0)."""

    increments: np.ndarray
    cumulative: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        inc = np.atleast_2d(np.asarray(self.increments, dtype=float))
        cum = self.cumulative
        if cum is None:
            cum = np.concatenate(
                [np.zeros((inc.shape[0], 1)), np.cumsum(inc, axis=1)], axis=1
            )
        else:
            cum = np.atleast_2d(np.asarray(cum, dtype=float))
            if cum.shape != (inc.shape[0], inc.shape[1] + 1):
                raise ValueError("cumulative shape must be (n, n_increments + 1)")
            if not np.allclose(cum[:, 0], 0.0):
                raise ValueError("cumulative noise must start at 0")
        object.__setattr__(self, "increments", inc)
        object.__setattr__(self, "cumulative", cum)

    @property
    def n_dims(self) -> int:
        return self.increments.shape[0]

    @property
    def n_increments(self) -> int:
        return self.increments.shape[1]


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------


def _innovations(rng, sigma_root: np.ndarray, count: int, driver: str) -> np.ndarray:
    n = sigma_root.shape[0]
    if driver == "iid_uniform":
        # uniform on [-sqrt(3), sqrt(3)] has unit variance
        raw = rng.uniform(-math.sqrt(3.0), math.sqrt(3.0), size=(n, count))
    else:
        raw = rng.standard_normal((n, count))
    return sigma_root @ raw


def _ar_recursion(coeff_eig, noise: np.ndarray, x0: np.ndarray) -> np.ndarray:
    """Run x_k = coeff x_{k-1} + noise_k in the eigenbasis of coeff."""
    q, lam = coeff_eig.vectors, coeff_eig.values
    e = q.T @ noise
    y0 = q.T @ x0
    y = np.empty_like(e)
    for i in range(lam.size):
        y[i], _ = lfilter([1.0], [1.0, -lam[i]], e[i], zi=np.array([lam[i] * y0[i]]))
    x = q @ y
    return np.concatenate([x0[:, None], x], axis=1)


def _default_burn_in(spec: ModelSpec) -> int:
    return 10 * math.ceil(1.0 / (1.0 - spectral_norm(spec.coeff)))


def _simulate_discrete(spec: ModelSpec, n_steps: int, burn_in: int, seed) -> Path:
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    if burn_in < 0:
        raise ValueError("burn_in must be non-negative")
    rng = as_generator(seed)
    sigma_root = sqrtm_psd(spec.sigma)
    q = spec.ma_order
    if burn_in == 0 and q == 0 and spec.driver == "iid_uniform":
        # a uniform-innovation chain has no closed-form stationary law;
        # replace the exact start by a burn-in start
        burn_in = _default_burn_in(spec)
    total = n_steps + burn_in

    if burn_in == 0 and q == 0:
        # exact stationary start: X_0 ~ N(0, gamma(0))
        gamma0 = solve_discrete_lyapunov(spec.coeff, spec.sigma)
        x0 = sqrtm_psd(0.5 * (gamma0 + gamma0.T)) @ rng.standard_normal(spec.n_dims)
    else:
        x0 = np.zeros(spec.n_dims)

    eps = _innovations(rng, sigma_root, total + q, spec.driver)
    if q:
        noise = eps[:, q:].copy()
        for i, theta in enumerate(spec.ma_coeffs, start=1):
            noise += theta @ eps[:, q - i : q - i + total]
    else:
        noise = eps
    values = _ar_recursion(sym_eig(spec.coeff), noise, x0)
    return Path(values[:, burn_in:], t0=0.0, dt=1.0, kind="discrete")


def simulate_var1(spec: ModelSpec, n_steps: int, burn_in: int = 0, seed=0) -> Path:
    """Simulate an AR(1) path of n_steps + 1 points.

    With burn_in = 0 the start is drawn from the exact stationary law;
    otherwise the chain starts at zero and the first burn_in steps are
    discarded. Deterministic in (spec, n_steps, burn_in, seed).
    """
    if spec.kind != VAR1:
        raise ValueError("simulate_var1 expects a var1 spec")
    return _simulate_discrete(spec, n_steps, burn_in, seed)


def simulate_varma(spec: ModelSpec, n_steps: int, burn_in: int | None = None, seed=0) -> Path:
    """Simulate an ARMA(1,q) path; q pre-sample innovations seed the MA part.

    burn_in = None applies the default 10 * ceil(1 / (1 - ||coeff||)) for
    q >= 1 and an exact stationary start for q = 0.
    """
    if spec.kind != VARMA1Q:
        raise ValueError("simulate_varma expects a varma1q spec")
    if burn_in is None:
        burn_in = 0 if spec.ma_order == 0 else _default_burn_in(spec)
    return _simulate_discrete(spec, n_steps, burn_in, seed)


def simulate_ou(spec: ModelSpec, t_end: float, dt: float, seed=0) -> Path:
    """Simulate the stationary mean-reverting diffusion on a uniform grid.

    Brownian driver: exact discretization (matrix-exponential step with the
    exact step covariance) from an exact stationary start. Fractional
    driver: Euler scheme with exact fractional Gaussian increments after a
    relaxation prefix of length >= 10 / lambda_min(drift) is discarded.
    """
    if spec.kind != OU:
        raise ValueError("simulate_ou expects an ou spec")
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t_end < dt:
        raise ValueError("t_end must be at least dt")
    rng = as_generator(seed)
    n_steps = int(round(t_end / dt))
    h_eig = sym_eig(spec.coeff)

    if spec.driver == "bm":
        step = h_eig.apply(lambda v: np.exp(-dt * v))
        step_cov_root = sqrtm_psd(ou_step_cov(spec.coeff, spec.sigma, dt))
        x0 = sqrtm_psd(ou_stationary_cov(spec.coeff, spec.sigma)) @ rng.standard_normal(spec.n_dims)
        shocks = step_cov_root @ rng.standard_normal((spec.n_dims, n_steps))
        values = _ar_recursion_general(step, shocks, x0)
        return Path(values, t0=0.0, dt=dt, kind="continuous")

    # fbm driver
    relax = int(math.ceil(10.0 / (h_eig.values[0] * dt)))
    total = n_steps + relax
    sigma_root = sqrtm_psd(spec.sigma)
    fgn = np.empty((spec.n_dims, total))
    for i in range(spec.n_dims):
        fgn[i] = fractional_gaussian_noise(total, spec.hurst, rng) * dt**spec.hurst
    dg = sigma_root @ fgn
    euler_step = np.eye(spec.n_dims) - dt * spec.coeff
    values = _ar_recursion_general(euler_step, dg, np.zeros(spec.n_dims))
    return Path(values[:, relax:], t0=0.0, dt=dt, kind="continuous")


def _ar_recursion_general(step: np.ndarray, noise: np.ndarray, x0: np.ndarray) -> np.ndarray:
    """x_k = step x_{k-1} + noise_k for a symmetric step matrix."""
    return _ar_recursion(sym_eig(step), noise, x0)


def simulate(spec: ModelSpec, seed=0, *, n_steps: int | None = None,
             burn_in: int | None = None, t_end: float | None = None,
             dt: float | None = None) -> Path:
    """Dispatch to the simulator matching ``spec.kind``."""
    if spec.kind == OU:
        if t_end is None or dt is None:
            raise ValueError("continuous simulation needs t_end and dt")
        return simulate_ou(spec, t_end, dt, seed)
    if n_steps is None:
        raise ValueError("discrete simulation needs n_steps")
    if spec.kind == VAR1:
        return simulate_var1(spec, n_steps, burn_in or 0, seed)
    return simulate_varma(spec, n_steps, burn_in, seed)


# ---------------------------------------------------------------------------
# exact second moments
# ---------------------------------------------------------------------------


def var1_autocov(spec: ModelSpec, max_lag: int) -> AutocovSeq:
    """Exact autocovariances of the AR(1) model at integer lags 0..max_lag.

    gamma(0) solves gamma(0) = phi gamma(0) phi^T + sigma and
    gamma(k) = phi^k gamma(0).
    """
    if spec.kind != VAR1:
        raise ValueError("var1_autocov expects a var1 spec")
    phi = spec.coeff
    gamma0 = solve_discrete_lyapunov(phi, spec.sigma)
    gamma0 = 0.5 * (gamma0 + gamma0.T)
    gammas = [gamma0]
    for _ in range(max_lag):
        gammas.append(phi @ gammas[-1])
    return AutocovSeq(np.arange(max_lag + 1, dtype=float), np.array(gammas), THEORETICAL)


def ou_autocov(spec: ModelSpec, lag_times: np.ndarray) -> AutocovSeq:
    """Exact autocovariances of the Brownian-driven diffusion on given lags."""
    if spec.kind != OU or spec.driver != "bm":
        raise ValueError("ou_autocov expects an ou spec with a bm driver")
    lag_times = np.asarray(lag_times, dtype=float)
    gamma0 = ou_stationary_cov(spec.coeff, spec.sigma)
    h_eig = sym_eig(spec.coeff)
    gammas = np.array(
        [h_eig.apply(lambda v: np.exp(-s * v)) @ gamma0 for s in lag_times]
    )
    return AutocovSeq(lag_times, gammas, THEORETICAL)


def _lyapunov_integral(drift: np.ndarray, sigma: np.ndarray, upper: float | None) -> np.ndarray:
    """integral_0^upper exp(-drift s) sigma exp(-drift s) ds in the eigenbasis.

    upper = None integrates to infinity (requires drift PD).
    """
    eig = sym_eig(drift)
    s_tilde = eig.vectors.T @ symmetrize(sigma) @ eig.vectors
    lam_sum = eig.values[:, None] + eig.values[None, :]
    if upper is None:
        if eig.values[0] <= 0:
            raise ValueError("infinite-horizon integral needs a PD drift")
        weights = 1.0 / lam_sum
    else:
        safe = np.where(np.abs(lam_sum) > 1e-300, lam_sum, 1.0)
        weights = np.where(
            np.abs(lam_sum) > 1e-12, (1.0 - np.exp(-lam_sum * upper)) / safe, upper
        )
    out = eig.vectors @ (s_tilde * weights) @ eig.vectors.T
    return 0.5 * (out + out.T)


def ou_stationary_cov(drift: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """Stationary covariance: solves drift X + X drift = sigma."""
    return _lyapunov_integral(np.asarray(drift, dtype=float), sigma, None)


def ou_step_cov(drift: np.ndarray, sigma: np.ndarray, dt: float) -> np.ndarray:
    """Covariance of one exact-discretization step of length dt."""
    return _lyapunov_integral(np.asarray(drift, dtype=float), sigma, dt)


def series_autocov(drift: np.ndarray, incr_autocov, lag: int, terms: int) -> np.ndarray:
    """Brute-force autocovariance from the noise-increment autocovariance.

    Evaluates the doubly truncated series
    exp(-lag*drift) * sum_{k=lag-terms}^{lag} sum_{j=-terms}^{0}
    exp(k*drift) r(k-j) exp(j*drift), with ``incr_autocov`` the lag -> matrix
    function r. Deliberately direct; used as an independent oracle.
    """
    if terms < 1:
        raise ValueError("terms must be at least 1")
    drift = symmetrize(drift)
    eig = sym_eig(drift)
    n = drift.shape[0]
    cache: dict[int, np.ndarray] = {}

    def power(k: int) -> np.ndarray:
        if k not in cache:
            cache[k] = eig.apply(lambda v: np.exp(k * v))
        return cache[k]

    total = np.zeros((n, n))
    for k in range(lag - terms, lag + 1):
        ek = power(k)
        for j in range(-terms, 1):
            r = np.atleast_2d(np.asarray(incr_autocov(k - j), dtype=float))
            total += ek @ r @ power(j)
    return power(-lag) @ total


def noise_variance(spec: ModelSpec, t: float) -> np.ndarray:
    """Covariance of the cumulative noise at time t for the given model.

    AR(1): t * sigma. ARMA(1,q): sum_{i,j} max(0, t-|i-j|) theta_i sigma
    theta_j^T with theta_0 = I. Brownian driver: t * sigma. Fractional
    driver: t^(2*hurst) * sigma.
    """
    n = spec.n_dims
    if t < 0:
        raise ValueError("t must be non-negative")
    if spec.kind == OU:
        if spec.driver == "fbm":
            return t ** (2.0 * spec.hurst) * spec.sigma
        return t * spec.sigma
    if abs(t - round(t)) > 1e-9:
        raise ValueError("discrete kinds need an integer t")
    t = int(round(t))
    if spec.kind == VAR1 or spec.ma_order == 0:
        return float(t) * spec.sigma
    thetas = [np.eye(n)] + [np.asarray(m) for m in spec.ma_coeffs]
    out = np.zeros((n, n))
    for i, ti in enumerate(thetas):
        for j, tj in enumerate(thetas):
            w = max(0, t - abs(i - j))
            if w:
                out += w * (ti @ spec.sigma @ tj.T)
    return out


# ---------------------------------------------------------------------------
# pathwise identities
# ---------------------------------------------------------------------------


def recover_noise(path: Path, ar_coeff: np.ndarray) -> NoisePath:
    """Noise increments X_k - ar_coeff X_{k-1} of a discrete path."""
    if path.kind != "discrete":
        raise ValueError("recover_noise expects a discrete path")
    ar_coeff = np.atleast_2d(np.asarray(ar_coeff, dtype=float))
    if ar_coeff.shape != (path.n_dims, path.n_dims):
        raise ValueError("ar_coeff dimension does not match the path")
    x = path.values
    increments = x[:, 1:] - ar_coeff @ x[:, :-1]
    return NoisePath(increments)


def reconstruct_from_noise(noise: NoisePath, drift: np.ndarray, window: int) -> Path:
    """Rebuild path values from the most recent ``window`` + 1 noise increments.

    With increments at steps 1..N the reconstruction
    sum_{j=0}^{window} exp(-j*drift) increment_{t-j} is available for
    t = window+1 .. N; the returned path starts at t0 = window + 1. On a
    path generated by the matching model the omitted history contributes
    exactly exp(-(window+1)*drift) X_{t-window-1}.
    """
    n_inc = noise.n_increments
    if window < 0:
        raise ValueError("window must be non-negative")
    if window + 1 > n_inc:
        raise ValueError(f"window {window} exceeds the available history {n_inc - 1}")
    eig = sym_eig(np.atleast_2d(np.asarray(drift, dtype=float)))
    inc = noise.increments
    n_out = n_inc - window
    values = np.zeros((noise.n_dims, n_out))
    for j in range(window + 1):
        decay = eig.apply(lambda v: np.exp(-j * v))
        values += decay @ inc[:, window - j : window - j + n_out]
    return Path(values, t0=float(window + 1), dt=1.0, kind="discrete")


def _lamperti(path: Path, scaling: np.ndarray, sign: float) -> Path:
    scaling = symmetrize(np.atleast_2d(np.asarray(scaling, dtype=float)))
    if scaling.shape[0] != path.n_dims:
        raise ValueError("scaling dimension does not match the path")
    eig = sym_eig(scaling)
    y = eig.vectors.T @ path.values
    y = y * np.exp(sign * np.outer(eig.values, path.times))
    return Path(eig.vectors @ y, t0=path.t0, dt=path.dt, kind=path.kind)


def lamperti_forward(path: Path, scaling: np.ndarray) -> Path:
    """Scale X_t by exp(t * scaling); maps stationary to self-similar."""
    return _lamperti(path, scaling, +1.0)


def lamperti_inverse(path: Path, scaling: np.ndarray) -> Path:
    """Scale Y_t by exp(-t * scaling); exact inverse of the forward map."""
    return _lamperti(path, scaling, -1.0)


# ---------------------------------------------------------------------------
# fractional Gaussian noise
# ---------------------------------------------------------------------------


def fractional_gaussian_noise(count: int, hurst: float, rng) -> np.ndarray:
    """Exact unit-spacing fractional Gaussian noise via circulant embedding.

    Returns ``count`` increments of fractional Brownian motion on a unit
    grid (variance 1 per increment). The circulant eigenvalues are provably
    non-negative for this covariance; tiny negative values from rounding
    are clipped.
    """
    if not 0.0 < hurst < 1.0:
        raise ValueError("hurst must lie in (0,1)")
    if count < 1:
        raise ValueError("count must be positive")
    if count == 1:
        return rng.standard_normal(1)
    k = np.arange(count + 1, dtype=float)
    two_h = 2.0 * hurst
    rho = 0.5 * ((k + 1.0) ** two_h + np.abs(k - 1.0) ** two_h - 2.0 * k**two_h)
    # rho(count) in the middle slot keeps the embedding non-negative for
    # every hurst value; a zero there fails for strong persistence
    circ = np.concatenate([rho[:-1], [rho[count]], rho[count - 1 : 0 : -1]])
    eigvals = np.fft.fft(circ).real
    if eigvals.min() < -1e-8:
        raise ValueError("circulant embedding produced a large negative eigenvalue")
    eigvals = np.clip(eigvals, 0.0, None)

    m = 2 * count
    z = np.empty(m, dtype=complex)
    z[0] = rng.standard_normal()
    z[count] = rng.standard_normal()
    half = rng.standard_normal((count - 1, 2)) / np.sqrt(2.0)
    z[1:count] = half[:, 0] + 1j * half[:, 1]
    z[count + 1 :] = np.conj(z[count - 1 : 0 : -1])
    return np.sqrt(m) * np.fft.ifft(np.sqrt(eigvals) * z).real[:count]
