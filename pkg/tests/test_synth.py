import numpy as np
import pytest

from active_eval import (
    ConfigError,
    SynthConfig,
    adaptive_se_stratify,
    finite_pool_risk,
    make_pool,
    reference_pool,
)

# regression constants pinned from the fixture's first generation
REFERENCE_RISK = 344 / 3000
REFERENCE_ZERO_SE_COUNT = 1888


def test_same_config_same_pool():
    config = SynthConfig(size=40, seed=99)
    a, b = make_pool(config), make_pool(config)
    assert [i.surrogate_answers for i in a.instances] == [
        i.surrogate_answers for i in b.instances
    ]
    assert np.array_equal(a.loss_vector(), b.loss_vector())
    c = make_pool(SynthConfig(size=40, seed=100))
    assert not np.array_equal(a.loss_vector(), c.loss_vector())


def test_full_zero_boost_forces_degenerate_pool():
    pool = make_pool(SynthConfig(size=30, zero_se_boost=1.0, seed=1))
    assert (pool.se_values == 0).all()
    assert (pool.sc_values == 1).all()
    assert finite_pool_risk(pool, pool.loss_vector()) == 0.0


def test_zero_link_means_zero_losses():
    pool = make_pool(SynthConfig(size=50, target_link=0.0, zero_se_boost=0.0, seed=2))
    assert pool.loss_vector().sum() == 0.0


def test_invalid_configs_rejected():
    with pytest.raises(ConfigError):
        SynthConfig(size=0)
    with pytest.raises(ConfigError):
        SynthConfig(size=5, generations=1)
    with pytest.raises(ConfigError):
        SynthConfig(size=5, options=1)
    with pytest.raises(ConfigError):
        SynthConfig(size=5, target_link=1.5)
    with pytest.raises(ConfigError):
        SynthConfig(size=5, zero_se_boost=-0.1)
    with pytest.raises(ConfigError):
        SynthConfig(size=5, difficulty_alpha=0.0)


def test_reference_pool_pinned_shape_and_risk():
    pool = reference_pool()
    assert pool.size == 3000
    assert pool.k == 10
    assert finite_pool_risk(pool, pool.loss_vector()) == REFERENCE_RISK
    zero_count = int((pool.se_values == 0).sum())
    assert zero_count == REFERENCE_ZERO_SE_COUNT
    assert zero_count / pool.size >= 0.40


def test_reference_pool_strata_have_monotone_loss():
    pool = reference_pool()
    strat = adaptive_se_stratify(pool.se_values, 5)
    losses = pool.loss_vector()
    means = [losses[strat.members(h)].mean() for h in range(strat.h_eff)]
    assert all(a < b for a, b in zip(means, means[1:]))


def test_surrogate_accuracy_concentrates_with_many_generations():
    # replay the per-instance streams to recover each latent difficulty,
    # then check the realized gold-answer rate against its binomial band
    config = SynthConfig(size=100, generations=200, zero_se_boost=0.3, seed=123)
    pool = make_pool(config)
    k = config.generations
    for i, inst in enumerate(pool.instances):
        rng = np.random.default_rng([config.seed, i])
        if rng.random() < config.zero_se_boost:
            difficulty = 0.0
        else:
            difficulty = float(rng.beta(config.difficulty_alpha, config.difficulty_beta))
        accuracy = sum(a == "A" for a in inst.surrogate_answers) / k
        band = 4 * np.sqrt(difficulty * (1 - difficulty) / k)
        assert abs(accuracy - (1 - difficulty)) <= band + 1e-12
