"""Within-stratum simple random sampling and the stratified risk estimator.

Sampling is uniform without replacement: the stratum's id list is shuffled
with a seeded generator and the first m entries taken, so every size-m
subset has probability 1 / C(n, m). Randomness comes from deterministic
streams addressed by (master_seed, trial_index, stratum_index); the same
address always yields the same draw, which is what makes trials
reproducible and safe to run in any order or in parallel.

The stratified estimate is R_hat = (1/N) * sum_h N_h * mean-loss(S_h),
the Horvitz-Thompson estimator with inclusion probability m_h / N_h inside
stratum h. With m_h = N_h everywhere it returns the exact pool risk.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .allocate import AllocationPlan
from .errors import ConfigError, DataError
from .pool import LabelOracle, Pool

UNIFORM_STRATUM_INDEX = 0


def trial_rng(master_seed: int, trial_index: int, stratum_index: int) -> np.random.Generator:
    """Independent deterministic stream for one (trial, stratum) address."""
    for name, value in (
        ("master_seed", master_seed),
        ("trial_index", trial_index),
        ("stratum_index", stratum_index),
    ):
        if value < 0:
            raise ConfigError(f"{name} must be non-negative, got {value}")
    return np.random.default_rng([master_seed, trial_index, stratum_index])


@dataclass(frozen=True)
class SampleDraw:
    """Selected pool positions per stratum, |S_h| = m_h.

    ``seed`` records the (master_seed, trial_index) stream address when the
    draw came from the seeded sampler; manually constructed draws leave it
    unset.
    """

    per_stratum: tuple
    seed: tuple | None = None

    def id_lists(self, pool: Pool) -> list:
        """Resolve the drawn positions to instance ids."""
        return [
            [pool.instances[i].id for i in sel] for sel in self.per_stratum
        ]


@dataclass(frozen=True)
class RiskEstimate:
    value: float
    labels_used: int


def sample_without_replacement(ids, m: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform size-m subset of ids, drawn by seeded shuffle."""
    arr = np.asarray(ids)
    if arr.ndim != 1:
        raise DataError("ids must form a 1-D sequence")
    if not 1 <= m <= arr.size:
        raise DataError(f"sample size {m} out of range [1, {arr.size}]")
    return rng.permutation(arr)[:m]


def draw_stratified(
    member_lists, plan: AllocationPlan, master_seed: int, trial_index: int
) -> SampleDraw:
    """One trial's within-stratum draws under the given plan."""
    if len(member_lists) != plan.h_eff:
        raise DataError(
            f"{len(member_lists)} strata but the plan covers {plan.h_eff}"
        )
    selected = tuple(
        sample_without_replacement(
            members, int(plan.m[h]), trial_rng(master_seed, trial_index, h)
        )
        for h, members in enumerate(member_lists)
    )
    return SampleDraw(per_stratum=selected, seed=(master_seed, trial_index))


def ht_estimate(
    draw: SampleDraw, plan: AllocationPlan, sizes, oracle: LabelOracle
) -> RiskEstimate:
    """Stratified estimate of the pool risk from one draw.

    Reveals exactly the drawn instances through the oracle. Draws are
    sorted into pool order before the losses are averaged so the estimate
    depends only on which instances were selected, not on draw order.
    """
    sizes = np.asarray(sizes, dtype=np.int64)
    if len(draw.per_stratum) != plan.h_eff or len(sizes) != plan.h_eff:
        raise DataError("draw, plan and sizes cover different stratum counts")
    total = 0.0
    labels = 0
    for h, selected in enumerate(draw.per_stratum):
        selected = np.asarray(selected)
        m_h = int(plan.m[h])
        if selected.size != m_h:
            raise DataError(
                f"stratum {h} draw has {selected.size} instances, plan says {m_h}"
            )
        if len(np.unique(selected)) != m_h:
            raise DataError(f"stratum {h} draw contains duplicate instances")
        losses = oracle.reveal_indices(np.sort(selected))
        # multiply before dividing: keeps N_h * sum / m_h exact for 0/1
        # losses at the census budget, where it must equal the pool risk
        total += float(sizes[h]) * float(losses.sum()) / m_h
        labels += m_h
    return RiskEstimate(value=total / float(sizes.sum()), labels_used=labels)


def uniform_estimate(
    pool: Pool, budget: int, rng: np.random.Generator, oracle: LabelOracle
) -> RiskEstimate:
    """Mean loss over a uniform without-replacement subset of the pool."""
    if not 1 <= budget <= pool.size:
        raise DataError(f"budget {budget} out of range [1, {pool.size}]")
    selected = sample_without_replacement(np.arange(pool.size), budget, rng)
    losses = oracle.reveal_indices(np.sort(selected))
    return RiskEstimate(value=float(losses.mean()), labels_used=budget)
