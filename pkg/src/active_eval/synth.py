"""Synthetic evaluation pools with controllable difficulty structure.

Each instance gets a latent difficulty d: with probability zero_se_boost it
is exactly 0, otherwise it is drawn from Beta(alpha, beta). Each of the k
surrogate answers is the correct option with probability 1 - d and a
uniformly random distractor otherwise, and the hidden target loss is
Bernoulli(target_link * d). Harder instances therefore carry both higher
surrogate entropy and higher expected target loss, which is the coupling
the stratified estimators exploit. Generation is deterministic given the
seed, with one substream per instance.
"""

from __future__ import annotations

import functools
import string
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .pool import Pool, PoolInstance


@dataclass(frozen=True)
class SynthConfig:
    size: int
    generations: int = 10
    options: int = 4
    difficulty_alpha: float = 1.0
    difficulty_beta: float = 3.0
    target_link: float = 0.9
    zero_se_boost: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.size < 1:
            raise ConfigError(f"pool size must be >= 1, got {self.size}")
        if self.generations < 2:
            raise ConfigError(f"need at least 2 generations, got {self.generations}")
        if self.options < 2:
            raise ConfigError(f"need at least 2 answer options, got {self.options}")
        if self.difficulty_alpha <= 0 or self.difficulty_beta <= 0:
            raise ConfigError("difficulty shape parameters must be positive")
        if not 0.0 <= self.target_link <= 1.0:
            raise ConfigError(f"target_link must lie in [0, 1], got {self.target_link}")
        if not 0.0 <= self.zero_se_boost <= 1.0:
            raise ConfigError(
                f"zero_se_boost must lie in [0, 1], got {self.zero_se_boost}"
            )
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")


def option_labels(n_options: int) -> list:
    if n_options <= len(string.ascii_uppercase):
        return list(string.ascii_uppercase[:n_options])
    return [f"opt{j}" for j in range(n_options)]


def make_pool(config: SynthConfig) -> Pool:
    """Generate a pool (with hidden losses) from the configuration."""
    labels = option_labels(config.options)
    instances = []
    for i in range(config.size):
        rng = np.random.default_rng([config.seed, i])
        if rng.random() < config.zero_se_boost:
            difficulty = 0.0
        else:
            difficulty = float(
                rng.beta(config.difficulty_alpha, config.difficulty_beta)
            )
        correct = rng.random(config.generations) < 1.0 - difficulty
        distractors = rng.integers(1, config.options, size=config.generations)
        answers = [
            labels[0] if correct[j] else labels[distractors[j]]
            for j in range(config.generations)
        ]
        loss = 1.0 if rng.random() < config.target_link * difficulty else 0.0
        instances.append(
            PoolInstance.from_answers(f"synth-{i:06d}", answers, loss)
        )
    return Pool(instances)


REFERENCE_CONFIG = SynthConfig(
    size=3000,
    generations=10,
    options=4,
    difficulty_alpha=1.0,
    difficulty_beta=3.0,
    target_link=0.9,
    zero_se_boost=0.5,
    seed=20240601,
)


@functools.lru_cache(maxsize=1)
def reference_pool() -> Pool:
    """The canonical fixture pool used throughout the test suite.

    Pools are immutable, so the cached instance is safe to share.
    """
    return make_pool(REFERENCE_CONFIG)
