"""Monte Carlo comparison harness.

Runs T estimation trials per (method, budget) cell and reduces them to MSE,
MSE relative to the uniform-sampling baseline, and the standard error of
the estimates. Stratification and allocation are deterministic, so they are
computed once per method; only the within-stratum draws differ between
trials. All methods share the same trial stream addresses at a given trial
index, which removes between-method seed noise from the relative-MSE
ratios. Cells whose budget is infeasible for a method are skipped and
recorded rather than silently dropped.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .allocate import (
    ALLOCATION_RULES,
    DEFAULT_DELTA,
    baseline_weights,
    oracle_neyman_weights,
    proxy_neyman_weights,
    round_allocation,
)
from .errors import ConfigError, DataError
from .estimate import (
    UNIFORM_STRATUM_INDEX,
    RiskEstimate,
    draw_stratified,
    ht_estimate,
    trial_rng,
    uniform_estimate,
)
from .pool import Pool, finite_pool_risk
from .stratify import STRATIFIERS, stratify, stratum_mean_sc

DEFAULT_STRATA = 5
DEFAULT_TRIALS = 3000

UNIFORM = "uniform"


@dataclass(frozen=True)
class MethodSpec:
    """One estimation method: either the flat uniform baseline or a
    stratification scheme paired with an allocation rule."""

    name: str
    allocation: str | None = None  # None marks the uniform baseline
    stratification: str = "adaptive_se"
    strata: int = DEFAULT_STRATA
    delta: float = DEFAULT_DELTA

    def __post_init__(self):
        if self.allocation is None:
            return
        if self.allocation not in ALLOCATION_RULES:
            raise ConfigError(
                f"unknown allocation rule {self.allocation!r}; "
                f"expected one of {ALLOCATION_RULES}"
            )
        if self.stratification not in STRATIFIERS:
            raise ConfigError(
                f"unknown stratification method {self.stratification!r}; "
                f"expected one of {sorted(STRATIFIERS)}"
            )
        if self.strata < 2:
            raise ConfigError(f"need at least 2 strata, got {self.strata}")
        if self.delta <= 0:
            raise ConfigError(f"delta must be positive, got {self.delta}")

    @property
    def is_uniform(self) -> bool:
        return self.allocation is None

    @classmethod
    def uniform(cls) -> "MethodSpec":
        return cls(name=UNIFORM)

    @classmethod
    def stratified(cls, allocation: str, **kwargs) -> "MethodSpec":
        name = kwargs.pop("name", allocation)
        return cls(name=name, allocation=allocation, **kwargs)

    @classmethod
    def canonical_set(cls, strata: int = DEFAULT_STRATA, delta: float = DEFAULT_DELTA):
        """Uniform plus the five allocation rules under the default scheme."""
        methods = [cls.uniform()]
        for rule in ALLOCATION_RULES:
            methods.append(cls.stratified(rule, strata=strata, delta=delta))
        return methods


def prepare_method(pool: Pool, method: MethodSpec, budget: int):
    """Stratify and allocate once for a (method, budget) cell.

    Returns (stratification, member_lists, plan), or None for the uniform
    baseline. Raises ConfigError naming the violated constraint when the
    budget is infeasible.
    """
    if method.is_uniform:
        if not 1 <= budget <= pool.size:
            raise ConfigError(
                f"budget {budget} out of range [1, {pool.size}] for uniform sampling"
            )
        return None
    strat = stratify(pool.se_values, method.strata, method.stratification)
    if method.allocation == "proxy_neyman":
        p = stratum_mean_sc(strat, pool.sc_values)
        weights = proxy_neyman_weights(strat.sizes, p, method.delta)
    elif method.allocation == "oracle_neyman":
        weights = oracle_neyman_weights(strat, pool.loss_vector())
    else:
        weights = baseline_weights(method.allocation, strat.sizes)
    plan = round_allocation(weights, budget, strat.sizes)
    return strat, strat.member_lists(), plan


def run_trials(
    pool: Pool,
    method: MethodSpec,
    budget: int,
    trials: int,
    master_seed: int,
    workers: int = 1,
) -> list:
    """T independent risk estimates for one (method, budget) cell.

    Trial t draws from streams addressed (master_seed, t, stratum), so the
    result is a pure function of the arguments: re-running, reordering or
    parallelizing the trials cannot change any estimate.
    """
    if trials < 1:
        raise ConfigError(f"need at least one trial, got {trials}")
    prepared = prepare_method(pool, method, budget)

    if prepared is None:

        def one_trial(t: int) -> RiskEstimate:
            rng = trial_rng(master_seed, t, UNIFORM_STRATUM_INDEX)
            return uniform_estimate(pool, budget, rng, pool.oracle())

    else:
        strat, members, plan = prepared
        sizes = strat.sizes

        def one_trial(t: int) -> RiskEstimate:
            draw = draw_stratified(members, plan, master_seed, t)
            return ht_estimate(draw, plan, sizes, pool.oracle())

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool_exec:
            return list(pool_exec.map(one_trial, range(trials)))
    return [one_trial(t) for t in range(trials)]


def mse(estimates, pool_risk: float) -> float:
    """Mean squared error of the estimates against the true pool risk."""
    values = _estimate_values(estimates)
    if values.size == 0:
        raise DataError("need at least one estimate")
    return float(np.mean((values - pool_risk) ** 2))


def relative_mse(method_estimates, uniform_estimates, pool_risk: float) -> float | None:
    """MSE ratio against the uniform baseline on shared trial seeds.

    Returns None when the uniform MSE is zero (census budgets), where the
    ratio is undefined.
    """
    uniform_mse = mse(uniform_estimates, pool_risk)
    if uniform_mse == 0.0:
        return None
    return mse(method_estimates, pool_risk) / uniform_mse


def sem(estimates) -> float:
    """Standard error of the mean estimate (sample std over sqrt T)."""
    values = _estimate_values(estimates)
    if values.size < 2:
        raise DataError("need at least two estimates for a standard error")
    return float(np.std(values, ddof=1) / math.sqrt(values.size))


def mse_noise_band(estimates, pool_risk: float) -> float:
    """Monte Carlo standard error of the MSE estimate itself."""
    values = _estimate_values(estimates)
    if values.size < 2:
        raise DataError("need at least two estimates for a noise band")
    squared_errors = (values - pool_risk) ** 2
    return float(np.std(squared_errors, ddof=1) / math.sqrt(values.size))


@dataclass(frozen=True)
class SavingsRecord:
    """Budget needed by a method to match uniform sampling's MSE."""

    m_uniform_ref: float
    matched_m: float | None
    savings_fraction: float | None

    @property
    def resolved(self) -> bool:
        return self.matched_m is not None


def budget_savings(uniform_curve, method_curve, m_ref: float) -> SavingsRecord:
    """Matched-MSE label savings of a method against uniform sampling.

    Both curves are (budget, mse) point lists. The target is the uniform
    curve's MSE at m_ref; the matched budget is the smallest point on the
    method's piecewise-linear curve whose MSE is at or below the target.
    No extrapolation: if the method curve never reaches the target on its
    grid the record is returned unresolved.
    """
    uniform_curve = _checked_curve(uniform_curve)
    method_curve = _checked_curve(method_curve)
    target = _interpolate(uniform_curve, m_ref)
    matched = _first_budget_at_or_below(method_curve, target)
    if matched is None:
        return SavingsRecord(m_uniform_ref=m_ref, matched_m=None, savings_fraction=None)
    return SavingsRecord(
        m_uniform_ref=m_ref,
        matched_m=matched,
        savings_fraction=1.0 - matched / m_ref,
    )


@dataclass(frozen=True)
class ReportRow:
    method: str
    stratification: str | None
    allocation: str | None
    strata: int | None
    h_eff: int | None
    delta: float | None
    budget: int
    trials: int
    seed: int
    mean_estimate: float
    pool_risk: float
    mse: float
    relative_mse: float | None
    sem: float


@dataclass(frozen=True)
class SkippedCell:
    method: str
    budget: int
    reason: str


@dataclass
class ExperimentReport:
    pool_risk: float
    pool_size: int
    trials: int
    master_seed: int
    shared_seeds: bool = True
    rows: list = field(default_factory=list)
    skipped: list = field(default_factory=list)

    def curve(self, method: str) -> list:
        """(budget, mse) points for one method, ordered by budget."""
        points = [(r.budget, r.mse) for r in self.rows if r.method == method]
        return sorted(points)

    def methods(self) -> list:
        seen = dict.fromkeys(r.method for r in self.rows)
        return list(seen)


def sweep(
    pool: Pool,
    methods,
    budgets,
    trials: int = DEFAULT_TRIALS,
    master_seed: int = 0,
    workers: int = 1,
) -> ExperimentReport:
    """Full (method, budget) grid of Monte Carlo cells.

    The uniform baseline is always run (it is the relative-MSE denominator)
    even when absent from the method list.
    """
    budgets = sorted(set(int(b) for b in budgets))
    if not budgets:
        raise ConfigError("need at least one budget")
    methods = list(methods)
    names = [m.name for m in methods]
    if len(set(names)) != len(names):
        raise ConfigError(f"duplicate method names in sweep: {names}")
    if not any(m.is_uniform for m in methods):
        methods.insert(0, MethodSpec.uniform())

    pool_risk = finite_pool_risk(pool, pool.loss_vector())
    h_eff_by_method = {
        m.name: stratify(pool.se_values, m.strata, m.stratification).h_eff
        for m in methods
        if not m.is_uniform
    }
    report = ExperimentReport(
        pool_risk=pool_risk,
        pool_size=pool.size,
        trials=trials,
        master_seed=master_seed,
    )
    uniform_method = next(m for m in methods if m.is_uniform)
    for budget in budgets:
        try:
            uniform_values = _estimate_values(
                run_trials(pool, uniform_method, budget, trials, master_seed, workers)
            )
        except ConfigError as exc:
            for method in methods:
                report.skipped.append(
                    SkippedCell(method=method.name, budget=budget, reason=str(exc))
                )
            continue
        for method in methods:
            if method.is_uniform:
                values = uniform_values
            else:
                try:
                    values = _estimate_values(
                        run_trials(pool, method, budget, trials, master_seed, workers)
                    )
                except ConfigError as exc:
                    report.skipped.append(
                        SkippedCell(method=method.name, budget=budget, reason=str(exc))
                    )
                    continue
            report.rows.append(
                _make_row(
                    method, h_eff_by_method.get(method.name), budget, trials,
                    master_seed, values, uniform_values, pool_risk,
                )
            )
    return report


def _make_row(
    method, h_eff, budget, trials, master_seed, values, uniform_values, pool_risk
) -> ReportRow:
    if method.is_uniform:
        strat_tag = allocation = strata = delta = None
    else:
        strat_tag = method.stratification
        allocation = method.allocation
        strata = method.strata
        delta = method.delta if method.allocation == "proxy_neyman" else None
    method_mse = mse(values, pool_risk)
    uniform_mse = mse(uniform_values, pool_risk)
    return ReportRow(
        method=method.name,
        stratification=strat_tag,
        allocation=allocation,
        strata=strata,
        h_eff=h_eff,
        delta=delta,
        budget=budget,
        trials=trials,
        seed=master_seed,
        mean_estimate=float(np.mean(values)),
        pool_risk=pool_risk,
        mse=method_mse,
        relative_mse=None if uniform_mse == 0.0 else method_mse / uniform_mse,
        sem=sem(values),
    )


def _estimate_values(estimates) -> np.ndarray:
    return np.asarray(
        [e.value if isinstance(e, RiskEstimate) else float(e) for e in estimates],
        dtype=float,
    )


def _checked_curve(curve) -> list:
    points = sorted((float(m), float(v)) for m, v in curve)
    if not points:
        raise DataError("curve has no points")
    budgets = [m for m, _ in points]
    if len(set(budgets)) != len(budgets):
        raise DataError("curve has duplicate budget points")
    return points


def _interpolate(curve, budget: float) -> float:
    budgets = [m for m, _ in curve]
    if not budgets[0] <= budget <= budgets[-1]:
        raise ConfigError(
            f"reference budget {budget} outside the curve grid "
            f"[{budgets[0]}, {budgets[-1]}]"
        )
    values = [v for _, v in curve]
    return float(np.interp(budget, budgets, values))


def _first_budget_at_or_below(curve, target: float) -> float | None:
    """Smallest budget where the piecewise-linear curve reaches the target."""
    if curve[0][1] <= target:
        return curve[0][0]
    for (m0, v0), (m1, v1) in zip(curve, curve[1:]):
        if v1 <= target:
            if v0 == v1:
                return m1
            # linear crossing inside the segment
            return m0 + (m1 - m0) * (v0 - target) / (v0 - v1)
    return None
