"""Scikit-learn style front ends for the estimation pipelines.

The estimators follow the covariance-estimator pattern: ``fit(X)`` on an
(n_samples, n_dims) array of consecutive observations, fitted quantities
exposed as trailing-underscore attributes, hyperparameters handled by
``get_params`` / ``set_params`` so the classes clone and grid-search like
any other scikit-learn component.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .estimation import estimate_continuous, estimate_discrete
from .processes import Path, lamperti_forward, lamperti_inverse
from .riccati import build_coeffs_discrete
from .autocov import sample_autocov

__all__ = ["MeanReversionEstimator", "DriftEstimator", "LampertiTransform"]


def _as_path(X, dt: float, kind: str) -> Path:
    X = check_array(X, ensure_min_samples=2, ensure_all_finite=True)
    return Path(X.T, t0=0.0, dt=dt, kind=kind)


class MeanReversionEstimator(BaseEstimator):
    """Mean-reversion matrix of a discrete stationary series.

    Fits the matrix theta in the representation
    X_t - X_{t-1} = -theta X_{t-1} + noise increment by solving the
    Riccati equation built from sample autocovariances.

    Parameters
    ----------
    noise_variance : array-like or callable
        Covariance of the cumulative noise at the horizon; a callable
        receives the horizon and returns the matrix. Assumed known.
    horizon : int or None
        Lag horizon of the coefficient construction. None picks the
        smallest t <= max_horizon whose estimated D matrix is positive
        definite.
    max_horizon : int
        Search bound for the automatic horizon.
    center : bool
        Subtract the sample mean before estimating autocovariances.

    Attributes
    ----------
    mean_reversion_ : ndarray of shape (n_dims, n_dims)
        The PSD solution, or zeros when the gate failed.
    drift_ : ndarray or None
        Implied continuous drift, -log(I - mean_reversion_).
    gate_passed_ : bool
    residual_norm_ : float
    horizon_ : int
    result_ : EstimateResult
    """

    def __init__(self, noise_variance=None, horizon=None, max_horizon=10, center=True):
        self.noise_variance = noise_variance
        self.horizon = horizon
        self.max_horizon = max_horizon
        self.center = center

    def _noise_at(self, t: int) -> np.ndarray:
        if self.noise_variance is None:
            raise ValueError("noise_variance must be supplied")
        if callable(self.noise_variance):
            return np.atleast_2d(np.asarray(self.noise_variance(t), dtype=float))
        return np.atleast_2d(np.asarray(self.noise_variance, dtype=float))

    def _pick_horizon(self, path: Path) -> int:
        gammas = sample_autocov(path, min(self.max_horizon, path.n_points - 1), self.center)
        for t in range(1, self.max_horizon + 1):
            coeffs = build_coeffs_discrete(gammas, self._noise_at(t), t)
            if coeffs.gates_pass:
                return t
        return self.max_horizon

    def fit(self, X, y=None):
        path = X if isinstance(X, Path) else _as_path(X, 1.0, "discrete")
        horizon = self.horizon if self.horizon is not None else self._pick_horizon(path)
        result = estimate_discrete(path, self._noise_at(horizon), horizon, center=self.center)
        self.result_ = result
        self.mean_reversion_ = result.estimate
        self.drift_ = result.drift
        self.gate_passed_ = result.gate_passed
        self.residual_norm_ = result.residual_norm
        self.horizon_ = int(horizon)
        self.n_features_in_ = path.n_dims
        return self


class DriftEstimator(BaseEstimator):
    """Drift matrix of a mean-reverting diffusion observed on a grid.

    Parameters
    ----------
    noise_variance : array-like or callable
        Covariance of the cumulative driver at the horizon.
    horizon : float
        Lag horizon (in time units, a multiple of dt).
    dt : float
        Observation spacing; ignored when a Path is passed.
    center : bool
        Subtract the sample mean first.

    Attributes
    ----------
    drift_ : ndarray of shape (n_dims, n_dims)
    gate_passed_ : bool
    residual_norm_ : float
    result_ : EstimateResult
    """

    def __init__(self, noise_variance=None, horizon=1.0, dt=0.01, center=True):
        self.noise_variance = noise_variance
        self.horizon = horizon
        self.dt = dt
        self.center = center

    def fit(self, X, y=None):
        path = X if isinstance(X, Path) else _as_path(X, self.dt, "continuous")
        if self.noise_variance is None:
            raise ValueError("noise_variance must be supplied")
        noise = (
            self.noise_variance(self.horizon)
            if callable(self.noise_variance)
            else self.noise_variance
        )
        noise = np.atleast_2d(np.asarray(noise, dtype=float))
        result = estimate_continuous(path, noise, self.horizon, center=self.center)
        self.result_ = result
        self.drift_ = result.estimate
        self.gate_passed_ = result.gate_passed
        self.residual_norm_ = result.residual_norm
        self.n_features_in_ = path.n_dims
        return self


class LampertiTransform(TransformerMixin, BaseEstimator):
    """Exponential time rescaling between stationary and self-similar series.

    ``transform`` maps row k (time t0 + k) of X to exp(t * scaling) X_t;
    ``inverse_transform`` applies exp(-t * scaling) and is the exact
    inverse.

    Parameters
    ----------
    scaling : array-like
        Symmetric scaling matrix (any symmetric matrix is accepted; zero
        gives the identity map).
    t0 : float
        Time of the first row.
    """

    def __init__(self, scaling=None, t0=0.0):
        self.scaling = scaling
        self.t0 = t0

    def fit(self, X, y=None):
        X = check_array(X, ensure_min_samples=2)
        if self.scaling is None:
            raise ValueError("scaling must be supplied")
        self.n_features_in_ = X.shape[1]
        return self

    def _apply(self, X, direction) -> np.ndarray:
        check_is_fitted(self)
        X = check_array(X, ensure_min_samples=2)
        path = Path(X.T, t0=self.t0, dt=1.0, kind="discrete")
        out = direction(path, np.atleast_2d(np.asarray(self.scaling, dtype=float)))
        return out.values.T

    def transform(self, X) -> np.ndarray:
        return self._apply(X, lamperti_forward)

    def inverse_transform(self, X) -> np.ndarray:
        return self._apply(X, lamperti_inverse)
