"""Monte Carlo trials for checking the analytic operating characteristics.

Arm totals are drawn directly, ``S_i ~ N(n mu_i, n sigma^2)`` and
``S_0 ~ N(n0 mu_0, n0 sigma^2)`` with ``n0 = ceil(R n)``; the test statistics
use the realized ratio ``n0 / n``.

Replicates are generated in fixed-size blocks. Block ``b`` draws from
``SeedSequence(seed, spawn_key=(b,))``, so results depend only on the seed and
the replicate count, never on how blocks are spread over workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .params import TrialParams
from .stats import ceil_product

__all__ = [
    "BLOCK_SIZE",
    "MeanVector",
    "TrialReplicates",
    "SimEstimate",
    "null_config",
    "lfc_config",
    "generate_replicates",
    "simulate_type1_single",
    "simulate_power_single",
    "simulate_two_stage",
]

BLOCK_SIZE = 1 << 14


@dataclass(frozen=True)
class MeanVector:
    """True means ``(mu_0, mu_1, ..., mu_K)`` plus the arm power is credited to.

    ``target_arm`` is a 1-based arm index; when set, a replicate only counts if
    that arm is the one selected (the power event). ``None`` counts any
    rejection (the type I error event).
    """

    mu: tuple[float, ...]
    target_arm: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "mu", tuple(float(m) for m in self.mu))
        if len(self.mu) < 2:
            raise InvalidParameterError("mu", "need a control mean and at least one arm")
        if self.target_arm is not None and not 1 <= self.target_arm < len(self.mu):
            raise InvalidParameterError("target_arm", f"out of range: {self.target_arm}")

    @property
    def k(self) -> int:
        return len(self.mu) - 1


def null_config(k: int, level: float = 0.0) -> MeanVector:
    return MeanVector((level,) * (k + 1))


def lfc_config(params: TrialParams) -> MeanVector:
    """Least favourable configuration: arm K at delta, other arms at delta0."""
    mu = (0.0,) + (params.delta0,) * (params.k - 1) + (params.delta,)
    return MeanVector(mu, target_arm=params.k)


@dataclass(frozen=True)
class SimEstimate:
    estimate: float
    replicates: int
    std_error: float
    seed: int
    successes: int

    @classmethod
    def from_count(cls, successes: int, replicates: int, seed: int) -> "SimEstimate":
        p = successes / replicates
        return cls(p, replicates, math.sqrt(p * (1 - p) / replicates), seed, successes)

    def within(self, value: float, n_se: float = 3.0) -> bool:
        """Whether ``value`` is within ``n_se`` standard errors of the estimate.

        The standard error is floored at the one implied by ``value`` itself so
        that an estimate of exactly 0 or 1 does not demand exact agreement.
        """
        se = max(self.std_error, math.sqrt(value * (1 - value) / self.replicates))
        return abs(self.estimate - value) <= n_se * se


@dataclass(frozen=True)
class TrialReplicates:
    """A batch of simulated trials, one row per replicate.

    ``z_max_index`` is 0-based (arm ``i + 1``). The stage-2 fields are set only
    for two-stage batches; ``stage2_z = z_max / sqrt(2) + stage2_increment``.
    """

    sums: np.ndarray           # (m, K + 1), control first
    z_stats: np.ndarray        # (m, K)
    z_max_index: np.ndarray    # (m,)
    stage2_z: np.ndarray | None = None
    stage2_increment: np.ndarray | None = None

    @property
    def z_max(self) -> np.ndarray:
        return self.z_stats[np.arange(len(self.z_stats)), self.z_max_index]


def _check(n: int, params: TrialParams, means: MeanVector, replicates: int) -> None:
    if n < 1:
        raise InvalidParameterError("n", "must be >= 1")
    if replicates < 1:
        raise InvalidParameterError("replicates", "must be >= 1")
    if means.k != params.k:
        raise InvalidParameterError("mu", f"length {len(means.mu)} does not match K={params.k}")


def _draw(rng: np.random.Generator, size: int, n: int, params: TrialParams,
          means: MeanVector, two_stage: bool) -> TrialReplicates:
    k, sigma = params.k, params.sigma
    n0 = ceil_product(params.ratio, n)
    r = n0 / n
    mu = np.asarray(means.mu)
    s0 = n0 * mu[0] + sigma * math.sqrt(n0) * rng.standard_normal(size)
    s = n * mu[1:] + sigma * math.sqrt(n) * rng.standard_normal((size, k))
    scale = sigma * math.sqrt(r * (r + 1) * n)
    z = (r * s - s0[:, None]) / scale
    # argmax takes the first maximum: ties go to the lowest arm index
    best = np.argmax(z, axis=1)
    sums = np.column_stack([s0, s])
    if not two_stage:
        return TrialReplicates(sums, z, best)
    s0_2 = n0 * mu[0] + sigma * math.sqrt(n0) * rng.standard_normal(size)
    s_2 = n * mu[1:][best] + sigma * math.sqrt(n) * rng.standard_normal(size)
    increment = (r * s_2 - s0_2) / (scale * math.sqrt(2))
    z_best = z[np.arange(size), best]
    return TrialReplicates(sums, z, best, z_best / math.sqrt(2) + increment, increment)


def generate_replicates(n: int, params: TrialParams, means: MeanVector, replicates: int,
                        seed: int, two_stage: bool = False) -> TrialReplicates:
    """Materialize every replicate; meant for inspection, not for large counts."""
    _check(n, params, means, replicates)
    parts = [_draw(_block_rng(seed, b), size, n, params, means, two_stage)
             for b, size in _blocks(replicates)]
    def cat(name):
        vals = [getattr(p, name) for p in parts]
        return None if vals[0] is None else np.concatenate(vals)
    return TrialReplicates(*(cat(f) for f in
                             ("sums", "z_stats", "z_max_index", "stage2_z", "stage2_increment")))


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))


def _blocks(replicates: int):
    full, rest = divmod(replicates, BLOCK_SIZE)
    sizes = [BLOCK_SIZE] * full + ([rest] if rest else [])
    return list(enumerate(sizes))


def _count_block(c, n, params, means, seed, block, size, two_stage) -> int:
    reps = _draw(_block_rng(seed, block), size, n, params, means, two_stage)
    stat = reps.stage2_z if two_stage else reps.z_max
    hit = stat >= c
    if means.target_arm is not None:
        hit &= reps.z_max_index == means.target_arm - 1
    return int(np.count_nonzero(hit))


def _estimate(c: float, n: int, params: TrialParams, means: MeanVector, replicates: int,
              seed: int, two_stage: bool, workers: int) -> SimEstimate:
    _check(n, params, means, replicates)
    blocks = _blocks(replicates)
    job = lambda bs: _count_block(c, n, params, means, seed, bs[0], bs[1], two_stage)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            total = sum(pool.map(job, blocks))
    else:
        total = sum(map(job, blocks))
    return SimEstimate.from_count(total, replicates, seed)


def simulate_type1_single(c: float, n: int, params: TrialParams, replicates: int = 100_000,
                          seed: int = 0, workers: int = 1,
                          means: MeanVector | None = None) -> SimEstimate:
    """Fraction of one-stage trials with ``max Z_i >= c`` under the null.

    ``means`` defaults to all-zero means; any common level gives the same law.
    """
    means = null_config(params.k) if means is None else means
    return _estimate(c, n, params, means, replicates, seed, False, workers)


def simulate_power_single(c: float, n: int, params: TrialParams, replicates: int = 100_000,
                          seed: int = 0, workers: int = 1,
                          means: MeanVector | None = None) -> SimEstimate:
    """Fraction of one-stage trials where arm K is the best arm and clears ``c``."""
    means = lfc_config(params) if means is None else means
    return _estimate(c, n, params, means, replicates, seed, False, workers)


def simulate_two_stage(c: float, n: int, params: TrialParams, replicates: int = 100_000,
                       seed: int = 0, hypothesis: MeanVector | None = None,
                       workers: int = 1) -> SimEstimate:
    """Fraction of select-then-test trials whose pooled statistic clears ``c``.

    Under a hypothesis with ``target_arm`` set (as from ``lfc_config``) the
    event also requires that arm to have been selected at the interim.
    """
    hypothesis = null_config(params.k) if hypothesis is None else hypothesis
    return _estimate(c, n, params, hypothesis, replicates, seed, True, workers)
