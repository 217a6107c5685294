"""Local Outlier Factor over standardized channel features.

Uses the tie-inclusive classical definitions:

* k-distance(p): distance from p to its k-th nearest other point
* N_k(p): every other point within k-distance(p) (may exceed k on ties)
* reach-dist_k(p, o) = max(k-distance(o), d(p, o))
* lrd_k(p) = 1 / mean_{o in N_k(p)} reach-dist_k(p, o), capped at ``lrd_cap``
* LOF_k(p) = mean_{o in N_k(p)} lrd_k(o) / lrd_k(p)

Neighbor search is brute force over the full distance matrix; channel counts
per patient are small.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from .channelid import ChannelId

DEFAULT_N_NEIGHBORS = 20
DEFAULT_CONTAMINATION = 0.2
DEFAULT_LRD_CAP = 1e10

# scores equal to this many significant digits rank as ties
_TIE_DIGITS = 12


@dataclass(frozen=True)
class LofConfig:
    n_neighbors: int = DEFAULT_N_NEIGHBORS
    contamination: float = DEFAULT_CONTAMINATION
    lrd_cap: float = DEFAULT_LRD_CAP

    def __post_init__(self):
        if self.n_neighbors < 1:
            raise ValueError("n_neighbors must be positive")
        check_contamination(self.contamination)
        if not self.lrd_cap > 0:
            raise ValueError("lrd_cap must be positive")


@dataclass(frozen=True)
class Neighborhood:
    k_distance: float
    indices: np.ndarray


@dataclass(frozen=True)
class LofResult:
    channels: tuple[ChannelId, ...] | None
    scores: np.ndarray
    effective_k: int
    threshold_tau: float | None = None
    flagged: np.ndarray | None = None

    @property
    def n(self) -> int:
        return len(self.scores)

    def outlier_channels(self) -> frozenset[ChannelId]:
        if self.flagged is None or self.channels is None:
            return frozenset()
        return frozenset(c for c, f in zip(self.channels, self.flagged) if f)


def check_contamination(c: float) -> None:
    if not 0.0 < c <= 0.5:
        raise ValueError(f"contamination must lie in (0, 0.5], got {c}")


def flag_count(contamination: float, n: int) -> int:
    """Number of channels to flag: ceil(contamination * n), or 0 when n < 2.

    The product is taken on the decimal value of ``contamination`` so that
    e.g. 0.1 * 30 gives 3 rather than 4.
    """
    if n < 2:
        return 0
    return math.ceil(Fraction(repr(float(contamination))) * n)


def _as_points(points) -> np.ndarray:
    x = np.asarray(points, dtype=float)
    if x.ndim != 2:
        raise ValueError("points must be a 2-D array")
    if x.shape[0] < 2:
        raise ValueError("insufficient points: LOF needs at least 2")
    return x


def pairwise_distances(x: np.ndarray) -> np.ndarray:
    diff = x[:, None, :] - x[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=-1))


def _neighborhood_mask(dist: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    others = dist.copy()
    np.fill_diagonal(others, np.inf)
    kdist = np.partition(others, k - 1, axis=1)[:, k - 1]
    mask = others <= kdist[:, None]
    return kdist, mask


def knn_neighborhoods(points, k: int) -> list[Neighborhood]:
    """k-distance and tie-inclusive neighbor set of every point."""
    x = _as_points(points)
    n = x.shape[0]
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must lie in [1, {n - 1}], got {k}")
    kdist, mask = _neighborhood_mask(pairwise_distances(x), k)
    return [Neighborhood(float(kdist[i]), np.flatnonzero(mask[i])) for i in range(n)]


def lof_scores(points, config: LofConfig = LofConfig(), channels: Sequence[ChannelId] | None = None) -> LofResult:
    """LOF score of every point with k = min(n_neighbors, n - 1)."""
    x = _as_points(points)
    n = x.shape[0]
    if channels is not None and len(channels) != n:
        raise ValueError("channels and points differ in length")
    k = min(config.n_neighbors, n - 1)

    dist = pairwise_distances(x)
    kdist, mask = _neighborhood_mask(dist, k)
    counts = mask.sum(axis=1)

    reach = np.maximum(kdist[None, :], dist)
    mean_reach = np.where(mask, reach, 0.0).sum(axis=1) / counts
    with np.errstate(divide="ignore"):
        lrd = np.where(mean_reach > 0, 1.0 / mean_reach, np.inf)
    lrd = np.minimum(lrd, config.lrd_cap)

    neighbor_lrd = np.where(mask, lrd[None, :], 0.0).sum(axis=1) / counts
    scores = neighbor_lrd / lrd

    return LofResult(
        channels=tuple(channels) if channels is not None else None,
        scores=scores,
        effective_k=k,
    )


def _rank_key(score: float) -> float:
    return float(f"{score:.{_TIE_DIGITS}g}")


def rank_order(result: LofResult) -> list[int]:
    """Indices by descending score; ties go to the smaller channel label."""
    if result.channels is not None:
        labels = [c.raw for c in result.channels]
    else:
        labels = [f"{i:09d}" for i in range(result.n)]
    return sorted(range(result.n), key=lambda i: (-_rank_key(result.scores[i]), labels[i], i))


def flag_outliers(result: LofResult, contamination: float = DEFAULT_CONTAMINATION) -> LofResult:
    """Flag the top ceil(contamination * n) channels by score."""
    check_contamination(contamination)
    m = flag_count(contamination, result.n)
    flagged = np.zeros(result.n, dtype=bool)
    if m == 0:
        return replace(result, flagged=flagged, threshold_tau=None)
    order = rank_order(result)
    flagged[order[:m]] = True
    return replace(result, flagged=flagged, threshold_tau=float(result.scores[order[m - 1]]))


def detect(points, config: LofConfig = LofConfig(), channels: Sequence[ChannelId] | None = None) -> LofResult:
    """Score and flag in one step; fewer than two points yields no flags.

    With a single point there is no neighborhood, so its score is NaN and
    ``effective_k`` is 0.
    """
    x = np.asarray(points, dtype=float)
    n = x.shape[0] if x.ndim else 0
    if n < 2:
        return LofResult(
            channels=tuple(channels) if channels is not None else None,
            scores=np.full(n, np.nan),
            effective_k=0,
            threshold_tau=None,
            flagged=np.zeros(n, dtype=bool),
        )
    return flag_outliers(lof_scores(x, config, channels), config.contamination)
