"""Partition a pool into ordered strata from semantic-entropy values.

Four deterministic schemes:

* ``adaptive_se`` — the default: instances with zero entropy form a base
  stratum and the remaining instances are split into equal-frequency bins.
* ``quantile``    — equal-frequency bins over all values, zeros included.
* ``equal_width`` — equal-width intervals over the observed value range.
* ``kmeans``      — 1-D Lloyd clustering with deterministic quantile
  initialization.

All schemes are pure functions of (se_values, n_strata): no randomness, no
hidden state. Bins that end up empty are dropped and the survivors are
reindexed in increasing-entropy order, so the effective stratum count can
be smaller than requested. Instances sharing an entropy value always land
in the same stratum (the lower one), which keeps strata value-disjoint.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError

KMEANS_MAX_ITER = 100


@dataclass(frozen=True)
class Stratification:
    """A total partition of the pool into SE-ordered, non-empty strata."""

    assignment: np.ndarray  # stratum index per instance, in pool order
    sizes: np.ndarray  # instance count per stratum
    method: str

    @property
    def h_eff(self) -> int:
        return len(self.sizes)

    def members(self, stratum: int) -> np.ndarray:
        """Pool positions of the instances in one stratum."""
        return np.flatnonzero(self.assignment == stratum)

    def member_lists(self) -> list:
        return [self.members(h) for h in range(self.h_eff)]


def adaptive_se_stratify(se_values, n_strata: int) -> Stratification:
    """Base stratum for zero-entropy instances, equal-frequency bins above.

    Instances with SE exactly 0 form stratum 0; the positive-SE instances
    are rank-split into n_strata - 1 equal-frequency bins. When no instance
    has zero entropy the base stratum is skipped and all instances are
    rank-split into n_strata bins (coinciding with quantile binning). When
    every instance has zero entropy there is a single stratum.
    """
    values = _checked_values(se_values, n_strata)
    zero = values == 0.0
    if zero.all():
        return _finalize(np.zeros(len(values), dtype=int), "adaptive_se")
    if not zero.any():
        bins = _equal_frequency_bins(values, n_strata)
        return _finalize(bins, "adaptive_se")
    bins = np.zeros(len(values), dtype=int)
    positive = np.flatnonzero(~zero)
    bins[positive] = 1 + _equal_frequency_bins(values[positive], n_strata - 1)
    return _finalize(bins, "adaptive_se")


def quantile_stratify(se_values, n_strata: int) -> Stratification:
    """Equal-frequency bins over all values by sorted rank."""
    values = _checked_values(se_values, n_strata)
    return _finalize(_equal_frequency_bins(values, n_strata), "quantile")


def equal_width_stratify(se_values, n_strata: int) -> Stratification:
    """Equal-width intervals over [min, max], last bin closed on the right."""
    values = _checked_values(se_values, n_strata)
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        return _finalize(np.zeros(len(values), dtype=int), "equal_width")
    width = (hi - lo) / n_strata
    bins = np.minimum((values - lo) // width, n_strata - 1).astype(int)
    return _finalize(bins, "equal_width")


def kmeans_stratify(se_values, n_strata: int) -> Stratification:
    """1-D Lloyd clustering on the values, clusters ordered by centroid.

    Centroids start at equally spaced quantiles of the distinct value set;
    if there are fewer distinct values than requested strata the cluster
    count is reduced to match. Points equidistant from two centroids join
    the lower one. Iterates until the assignment is fixed or
    KMEANS_MAX_ITER passes.
    """
    values = _checked_values(se_values, n_strata)
    distinct = np.unique(values)
    n_clusters = min(n_strata, len(distinct))
    if n_clusters == 1:
        return _finalize(np.zeros(len(values), dtype=int), "kmeans")

    init_idx = (np.arange(n_clusters) * (len(distinct) - 1)) // (n_clusters - 1)
    centroids = distinct[init_idx].astype(float)
    assignment = None
    previous_k = -1
    for _ in range(KMEANS_MAX_ITER):
        # argmin returns the first (lower-centroid) index on distance ties
        dist = np.abs(values[:, None] - centroids[None, :])
        new_assignment = np.argmin(dist, axis=1)
        occupied = np.unique(new_assignment)
        if len(occupied) < len(centroids):
            centroids = centroids[occupied]
            remap = np.full(occupied.max() + 1, -1, dtype=int)
            remap[occupied] = np.arange(len(occupied))
            new_assignment = remap[new_assignment]
        if len(centroids) == previous_k and np.array_equal(new_assignment, assignment):
            break
        assignment = new_assignment
        previous_k = len(centroids)
        sums = np.bincount(assignment, weights=values, minlength=len(centroids))
        counts = np.bincount(assignment, minlength=len(centroids))
        centroids = sums / counts
        order = np.argsort(centroids, kind="stable")
        if not np.array_equal(order, np.arange(len(centroids))):
            centroids = centroids[order]
            relabel = np.empty(len(order), dtype=int)
            relabel[order] = np.arange(len(order))
            assignment = relabel[assignment]
    return _finalize(assignment, "kmeans")


STRATIFIERS = {
    "adaptive_se": adaptive_se_stratify,
    "quantile": quantile_stratify,
    "equal_width": equal_width_stratify,
    "kmeans": kmeans_stratify,
}


def stratify(se_values, n_strata: int, method: str = "adaptive_se") -> Stratification:
    """Dispatch to one of the registered stratification schemes."""
    try:
        fn = STRATIFIERS[method]
    except KeyError:
        raise ConfigError(
            f"unknown stratification method {method!r}; "
            f"expected one of {sorted(STRATIFIERS)}"
        ) from None
    return fn(se_values, n_strata)


def stratum_mean_sc(stratification: Stratification, sc_values) -> np.ndarray:
    """Per-stratum mean self-consistency p_h."""
    sc = np.asarray(sc_values, dtype=float)
    if sc.shape != stratification.assignment.shape:
        raise DataError(
            f"sc vector has shape {sc.shape}, expected "
            f"{stratification.assignment.shape}"
        )
    sums = np.bincount(
        stratification.assignment, weights=sc, minlength=stratification.h_eff
    )
    return sums / stratification.sizes


def _checked_values(se_values, n_strata: int) -> np.ndarray:
    if n_strata < 2:
        raise ConfigError(f"need at least 2 strata, got {n_strata}")
    values = np.asarray(se_values, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise DataError("se_values must be a non-empty 1-D array")
    if not np.isfinite(values).all() or (values < 0).any():
        raise DataError("se values must be finite and non-negative")
    return values


def _equal_frequency_bins(values: np.ndarray, n_bins: int) -> np.ndarray:
    """Rank-rule equal-frequency binning with tie groups merged downward.

    Bin b receives sorted ranks [floor(b*n/B), floor((b+1)*n/B)). Instances
    sharing a value are then moved together into the lowest bin any of them
    received, so a value never straddles a bin boundary. Returned bin ids
    may be sparse; callers compress them via _finalize.
    """
    n = len(values)
    order = np.argsort(values, kind="stable")
    edges = (np.arange(n_bins + 1) * n) // n_bins
    bin_by_rank = np.searchsorted(edges, np.arange(n), side="right") - 1

    sorted_values = values[order]
    group_starts = np.flatnonzero(np.r_[True, np.diff(sorted_values) != 0])
    group_min = np.minimum.reduceat(bin_by_rank, group_starts)
    group_lengths = np.diff(np.r_[group_starts, n])
    merged = np.repeat(group_min, group_lengths)

    bins = np.empty(n, dtype=int)
    bins[order] = merged
    return bins


def _finalize(bins: np.ndarray, method: str) -> Stratification:
    """Drop empty bins, reindex in order, and validate the partition."""
    used = np.unique(bins)
    remap = np.full(used.max() + 1, -1, dtype=int)
    remap[used] = np.arange(len(used))
    assignment = remap[bins]
    sizes = np.bincount(assignment, minlength=len(used))
    assignment.setflags(write=False)
    sizes.setflags(write=False)
    return Stratification(assignment=assignment, sizes=sizes, method=method)
