"""Kernel statistics: RBF MMD, bandwidth rules, kernel-weighted conditionals."""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.signal import find_peaks
from scipy.spatial.distance import cdist, pdist
from scipy.stats import gaussian_kde

from ..types import DataFormatError, Dataset, DegenerateConditioningError

MIN_CONDITIONING_ROWS = 10


@dataclass
class WeightedSample:
    """Values of X_j with normalised kernel weights from the conditioning variable."""

    values: np.ndarray
    weights: np.ndarray

    def mean(self) -> float:
        return float(np.dot(self.weights, self.values))

    def resample(self, size: int) -> np.ndarray:
        return KernelStats.systematic_resample(self.values, self.weights, size)


class KernelStats:
    """Two-sample and conditional-density helpers over one-dimensional samples."""

    @staticmethod
    def _column(sample: Sequence[float]) -> np.ndarray:
        return np.asarray(sample, dtype=float).reshape(-1, 1)

    @staticmethod
    def rbf(x: np.ndarray, y: np.ndarray, bandwidth: float) -> np.ndarray:
        """k(x, y) = exp(-|x - y|^2 / (2 sigma^2)) for every pair of rows."""
        return np.exp(-0.5 * cdist(x, y, "sqeuclidean") / bandwidth**2)

    @staticmethod
    def mmd2_unbiased(
        sample_p: Sequence[float], sample_q: Sequence[float], bandwidth: float
    ) -> float:
        """
        Squared MMD between two samples with an RBF kernel.

        The three kernel sums are averaged over all index pairs, diagonal terms
        included (V-statistic), so the estimate is nonnegative up to rounding and
        exactly zero for identical inputs.

        Args:
            sample_p: First sample
            sample_q: Second sample
            bandwidth: Kernel width sigma > 0

        Returns:
            MMD^2 estimate clamped at 0
        """
        if bandwidth <= 0:
            raise ValueError(f"bandwidth must be positive, got {bandwidth}")
        x = KernelStats._column(sample_p)
        y = KernelStats._column(sample_q)
        if x.size == 0 or y.size == 0:
            raise ValueError("both samples must be nonempty")

        k_xx = KernelStats.rbf(x, x, bandwidth).mean()
        k_yy = KernelStats.rbf(y, y, bandwidth).mean()
        k_xy = KernelStats.rbf(x, y, bandwidth).mean()
        return max(0.0, float(k_xx - 2.0 * k_xy + k_yy))

    @staticmethod
    def median_bandwidth(sample_p: Sequence[float], sample_q: Sequence[float]) -> float:
        """Median heuristic over pooled pairwise distances (1.0 when degenerate)."""
        pooled = np.concatenate([KernelStats._column(sample_p), KernelStats._column(sample_q)])
        if pooled.shape[0] < 2:
            return 1.0
        median = float(np.median(pdist(pooled)))
        return median if median > 0 else 1.0

    @staticmethod
    def silverman_bandwidth(x: Sequence[float]) -> float:
        """Silverman's rule 1.06 * std * n^(-1/5) (1.0 for a constant column)."""
        values = np.asarray(x, dtype=float)
        spread = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
        if spread <= 0:
            return 1.0
        return 1.06 * spread * values.size ** (-0.2)

    @staticmethod
    def weighted_conditional_samples(
        data: Dataset, i: int, j: int, x: float, bandwidth_h: Optional[float] = None
    ) -> WeightedSample:
        """
        Kernel-weighted observational conditional of X_j given X_i = x.

        Args:
            data: Observational dataset
            i: Conditioning column
            j: Target column
            x: Conditioning value
            bandwidth_h: Gaussian KDE width (Silverman's rule on X_i when None)

        Returns:
            WeightedSample with w_r proportional to exp(-(X_i[r] - x)^2 / (2 h^2))
        """
        if data.n < MIN_CONDITIONING_ROWS:
            raise DataFormatError(
                f"need at least {MIN_CONDITIONING_ROWS} observational rows, got {data.n}"
            )
        condition = data.column(i)
        h = KernelStats.silverman_bandwidth(condition) if bandwidth_h is None else bandwidth_h
        if h <= 0:
            raise ValueError(f"KDE bandwidth must be positive, got {h}")

        if np.isinf(h):
            weights = np.ones(data.n)
        else:
            weights = np.exp(-0.5 * ((condition - x) / h) ** 2)
        total = weights.sum()
        if not total > 0:
            raise DegenerateConditioningError(
                f"all kernel weights underflow for X{i} = {x} (h = {h:.4g})"
            )
        return WeightedSample(values=data.column(j).copy(), weights=weights / total)

    @staticmethod
    def systematic_resample(values: np.ndarray, weights: np.ndarray, size: int) -> np.ndarray:
        """Deterministic systematic resampling of a weighted sample to ``size`` equal-weight draws."""
        if size <= 0:
            return np.empty(0)
        cumulative = np.cumsum(weights)
        cumulative /= cumulative[-1]
        positions = (np.arange(size) + 0.5) / size
        indices = np.minimum(np.searchsorted(cumulative, positions), len(values) - 1)
        return np.asarray(values)[indices]

    @staticmethod
    def count_modes(samples: Sequence[float], grid_size: int = 512, floor: float = 0.1) -> int:
        """Peaks of a Gaussian KDE whose prominence is at least ``floor`` times the global peak."""
        values = np.asarray(samples, dtype=float)
        if values.size < 2 or np.ptp(values) == 0:
            return 1
        kde = gaussian_kde(values)
        pad = 3.0 * float(np.sqrt(kde.covariance[0, 0]))
        grid = np.linspace(values.min() - pad, values.max() + pad, grid_size)
        density = kde(grid)
        peaks, _ = find_peaks(density, prominence=floor * density.max())
        return max(len(peaks), 1)
