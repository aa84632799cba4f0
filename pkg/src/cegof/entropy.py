"""k-nearest-neighbour differential entropy under the max-norm."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.spatial import cKDTree

from ._validation import check_sample
from .exceptions import ConfigError, EstimationError, InputError
from .special import digamma

__all__ = ["EntropyConfig", "knn_entropy", "true_ce", "BRUTE_FORCE_MAX_N"]

# Above this many points the neighbour search switches to a k-d tree.
BRUTE_FORCE_MAX_N = 4096
_CHUNK = 512


@dataclass(frozen=True)
class EntropyConfig:
    """Settings of the kNN entropy estimator; the metric is always Chebyshev."""

    k: int = 3
    metric: str = "chebyshev"

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ConfigError(f"k must be a positive integer, got {self.k!r}")
        if self.metric != "chebyshev":
            raise ConfigError("only the chebyshev metric is supported")

    def to_dict(self) -> dict:
        return asdict(self)


def _neighbor_distances(points: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Max-norm distances to the nearest and to the k-th nearest other point."""
    n = points.shape[0]
    if n > BRUTE_FORCE_MAX_N:
        dist, _ = cKDTree(points).query(points, k=k + 1, p=np.inf)
        # Column 0 is the point itself or an exact twin; either way column 1
        # and column k are correct for the remaining points.
        return dist[:, 1], dist[:, k]
    nearest = np.empty(n)
    kth = np.empty(n)
    for start in range(0, n, _CHUNK):
        block = points[start:start + _CHUNK]
        dist = np.abs(block[:, None, 0] - points[None, :, 0])
        for j in range(1, points.shape[1]):
            np.maximum(dist, np.abs(block[:, None, j] - points[None, :, j]), out=dist)
        rows = np.arange(block.shape[0])
        dist[rows, start + rows] = np.inf
        part = np.partition(dist, (0, k - 1), axis=1)
        nearest[start:start + _CHUNK] = part[:, 0]
        kth[start:start + _CHUNK] = part[:, k - 1]
    return nearest, kth


def knn_entropy(points, cfg: EntropyConfig | None = None) -> float:
    """Kozachenko-Leonenko / Kraskov entropy estimate in nats.

    ``H = -psi(k) + psi(N) + (d/N) * sum(log eps_i)`` where ``eps_i`` is twice
    the max-norm distance from point ``i`` to its k-th nearest neighbour.

    Raises
    ------
    EstimationError
        If any two rows coincide.
    """
    cfg = cfg or EntropyConfig()
    x = check_sample(points, min_rows=1)
    n, d = x.shape
    if n <= cfg.k:
        raise InputError(f"need more than k={cfg.k} points, got {n}")
    nearest, kth = _neighbor_distances(x, cfg.k)
    dup = np.flatnonzero(nearest == 0.0)
    if dup.size:
        twin = np.flatnonzero(np.all(x == x[dup[0]], axis=1))
        raise EstimationError(
            f"duplicate points: rows {twin.tolist()[:10]} are identical "
            f"({dup.size} rows affected)"
        )
    eps = 2.0 * kth
    # Sorted summation makes the result independent of row order.
    log_sum = float(np.sum(np.sort(np.log(eps))))
    return -digamma(cfg.k) + digamma(n) + d * log_sum / n


def true_ce(u, cfg: EntropyConfig | None = None) -> float:
    """Nonparametric copula entropy: kNN entropy of pseudo-observations."""
    return knn_entropy(u, cfg)
