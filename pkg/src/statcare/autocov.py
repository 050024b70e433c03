"""Matrix autocovariance sequences and their sample estimators.

Only non-negative lags are stored. Negative lags are served through the
transpose identity gamma(-s) = gamma(s)^T at the lookup site, so every
consumer shares one implementation of that convention.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path as FsPath
from typing import TYPE_CHECKING

import numpy as np

from .linalg import spectral_norm

if TYPE_CHECKING:  # pragma: no cover
    from .processes import Path

__all__ = ["AutocovSeq", "sample_autocov", "sample_autocov_sampled", "max_deviation"]

SAMPLE = "sample"
THEORETICAL = "theoretical"


@dataclass(frozen=True)
class AutocovSeq:
    """Autocovariance matrices gamma(s) on a lag grid increasing from 0.

    ``lags`` holds integers for discrete series or real multiples of the
    observation spacing for sampled continuous series. ``gammas`` has shape
    (len(lags), n, n).
    """

    lags: np.ndarray
    gammas: np.ndarray
    provenance: str = THEORETICAL
    sample_size: int | None = None
    _lag_index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        lags = np.asarray(self.lags, dtype=float)
        gammas = np.asarray(self.gammas, dtype=float)
        if lags.ndim != 1 or gammas.ndim != 3 or gammas.shape[0] != lags.size:
            raise ValueError("lags must be 1-d and gammas (n_lags, n, n)")
        if lags.size == 0 or lags[0] != 0.0 or np.any(np.diff(lags) <= 0):
            raise ValueError("lag grid must increase strictly from 0")
        if self.provenance not in (SAMPLE, THEORETICAL):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        object.__setattr__(self, "lags", lags)
        object.__setattr__(self, "gammas", gammas)
        tol = self._grid_tol(lags)
        object.__setattr__(
            self, "_lag_index", {round(l / tol): i for i, l in enumerate(lags)}
        )

    @staticmethod
    def _grid_tol(lags: np.ndarray) -> float:
        spacing = float(np.min(np.diff(lags))) if lags.size > 1 else 1.0
        return spacing * 1e-6

    @property
    def n_dims(self) -> int:
        return self.gammas.shape[1]

    @property
    def max_lag(self) -> float:
        return float(self.lags[-1])

    def at(self, lag: float) -> np.ndarray:
        """gamma(lag); negative lags resolve to gamma(|lag|)^T."""
        if lag < 0:
            return self.at(-lag).T
        tol = self._grid_tol(self.lags)
        idx = self._lag_index.get(round(lag / tol))
        if idx is None:
            raise ValueError(f"lag {lag} is not on the stored grid")
        return self.gammas[idx]

    def to_csv(self, path: str | FsPath) -> None:
        """Write ``lag, g11, g12, ..., gnn`` rows (row-major entries)."""
        n = self.n_dims
        header = "lag," + ",".join(f"g{i+1}{j+1}" for i in range(n) for j in range(n))
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(header + "\n")
            for lag, g in zip(self.lags, self.gammas):
                row = [f"{lag:.17g}"] + [f"{v:.17g}" for v in g.ravel(order="C")]
                fh.write(",".join(row) + "\n")

    @classmethod
    def from_csv(cls, path: str | FsPath, provenance: str = SAMPLE,
                 sample_size: int | None = None) -> "AutocovSeq":
        with open(path, "r", encoding="utf-8") as fh:
            data = np.loadtxt(io.StringIO(fh.read()), delimiter=",", skiprows=1, ndmin=2)
        n = int(round(np.sqrt(data.shape[1] - 1)))
        gammas = data[:, 1:].reshape(-1, n, n)
        return cls(data[:, 0], gammas, provenance, sample_size)


def _sample_gammas(values: np.ndarray, n_lags: int, center: bool) -> np.ndarray:
    """Divisor-T autocovariances of an (n, T) array at lags 0..n_lags-1."""
    n, T = values.shape
    x = values - values.mean(axis=1, keepdims=True) if center else values
    out = np.empty((n_lags, n, n))
    for s in range(n_lags):
        lead = x[:, s:]
        lag = x[:, : T - s]
        out[s] = lead @ lag.T / T
    return out


def sample_autocov(path: "Path", max_lag: int, center: bool = True) -> AutocovSeq:
    """Sample autocovariances of a discrete path at integer lags 0..max_lag.

    Uses the divisor-T convention, which keeps the lag-0 matrix PSD.
    """
    if path.kind != "discrete":
        raise ValueError("sample_autocov expects a discrete path")
    T = path.n_points
    if not 0 <= max_lag < T:
        raise ValueError(f"max_lag {max_lag} must lie in [0, {T - 1})")
    gammas = _sample_gammas(path.values, max_lag + 1, center)
    return AutocovSeq(np.arange(max_lag + 1, dtype=float), gammas, SAMPLE, T)


def sample_autocov_sampled(path: "Path", max_lag_time: float, center: bool = True) -> AutocovSeq:
    """Sample autocovariances of a uniformly sampled continuous path.

    Lags are the grid times s = k * dt up to max_lag_time, which must not
    exceed half the observation span.
    """
    if path.kind != "continuous":
        raise ValueError("sample_autocov_sampled expects a continuous path")
    span = path.dt * (path.n_points - 1)
    if max_lag_time > 0.5 * span + 1e-12 * span:
        raise ValueError(f"max_lag_time {max_lag_time} exceeds half the span {span}")
    n_lags = int(np.floor(max_lag_time / path.dt + 1e-9)) + 1
    gammas = _sample_gammas(path.values, n_lags, center)
    return AutocovSeq(np.arange(n_lags) * path.dt, gammas, SAMPLE, path.n_points)


def max_deviation(est: AutocovSeq, truth: AutocovSeq) -> float:
    """Largest spectral-norm deviation over the estimated lag grid.

    The truth sequence must cover the estimate's grid; a shorter or
    misaligned grid raises.
    """
    if truth.lags.size < est.lags.size:
        raise ValueError("truth grid is shorter than the estimated grid")
    tol = AutocovSeq._grid_tol(est.lags)
    if not np.allclose(truth.lags[: est.lags.size], est.lags, atol=tol):
        raise ValueError("lag grids do not match")
    return max(
        spectral_norm(ge - gt)
        for ge, gt in zip(est.gammas, truth.gammas[: est.lags.size])
    )
