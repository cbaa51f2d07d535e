"""Domain types, online statistics and the randomness contract.

Every other module builds on the objects here: arms with uniform rewards on
``[a, b]``, bandit instances, per-arm running statistics, and keyed random
streams that make every replication reproducible on its own.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class InvalidParameterError(ValueError):
    """Raised when an argument violates an operation's precondition."""


@dataclass(frozen=True)
class UniformArm:
    """An arm whose rewards are i.i.d. uniform on ``[a, b]``."""

    a: float
    b: float

    def __post_init__(self) -> None:
        a, b = float(self.a), float(self.b)
        if not (math.isfinite(a) and math.isfinite(b)):
            raise InvalidParameterError(f"arm endpoints must be finite, got [{a}, {b}]")
        if not a < b:
            raise InvalidParameterError(f"arm needs a < b, got [{a}, {b}]")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def mean(self) -> float:
        return (self.a + self.b) / 2

    def span(self) -> float:
        return self.b - self.a


@dataclass(frozen=True)
class BanditInstance:
    arms: tuple[UniformArm, ...]

    def __init__(self, arms: Iterable[UniformArm | tuple[float, float]]):
        built = tuple(arm if isinstance(arm, UniformArm) else UniformArm(*arm) for arm in arms)
        if len(built) < 2:
            raise InvalidParameterError(f"an instance needs at least 2 arms, got {len(built)}")
        object.__setattr__(self, "arms", built)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, float]]) -> "BanditInstance":
        return cls(UniformArm(a, b) for a, b in pairs)

    def __len__(self) -> int:
        return len(self.arms)

    @property
    def n_arms(self) -> int:
        return len(self.arms)

    def means(self) -> np.ndarray:
        return np.array([arm.mean() for arm in self.arms])

    def spans(self) -> np.ndarray:
        return np.array([arm.span() for arm in self.arms])

    def mu_star(self) -> float:
        return max(arm.mean() for arm in self.arms)

    def delta(self, i: int) -> float:
        return self.mu_star() - self.arms[i].mean()

    def deltas(self) -> np.ndarray:
        mu = self.mu_star()
        return np.array([mu - arm.mean() for arm in self.arms])

    def optimal_arms(self) -> list[int]:
        # exact equality on computed means; near-ties are the author's responsibility
        mu = self.mu_star()
        return [i for i, arm in enumerate(self.arms) if arm.mean() == mu]

    def suboptimal_arms(self) -> list[int]:
        mu = self.mu_star()
        return [i for i, arm in enumerate(self.arms) if arm.mean() != mu]

    def s_star(self) -> float:
        return min(self.arms[i].span() for i in self.optimal_arms())

    def best_optimal_arm(self) -> UniformArm:
        """The optimal arm of smallest span (lowest index on ties)."""
        best = min(self.optimal_arms(), key=lambda i: (self.arms[i].span(), i))
        return self.arms[best]


@dataclass(frozen=True)
class ArmStats:
    """Running sufficient statistics of one arm.

    ``m2`` is the sum of squared deviations from the running mean, so the
    population variance is ``m2 / t``.
    """

    t: int = 0
    v_min: float = math.inf
    w_max: float = -math.inf
    mean: float = 0.0
    m2: float = 0.0

    def sd(self) -> float:
        if self.t < 1:
            raise InvalidParameterError("sd needs at least one sample")
        return math.sqrt(self.m2 / self.t)

    def midpoint(self) -> float:
        return (self.v_min + self.w_max) / 2


def update_stats(stats: ArmStats, x: float) -> ArmStats:
    """Fold one observation into ``stats`` (Welford's update for mean/m2)."""
    x = float(x)
    if not math.isfinite(x):
        raise InvalidParameterError(f"observation must be finite, got {x}")
    t = stats.t + 1
    d = x - stats.mean
    mean = stats.mean + d / t
    m2 = stats.m2 + d * (x - mean)
    return ArmStats(t, min(stats.v_min, x), max(stats.w_max, x), mean, m2)


def stats_from(xs: Iterable[float]) -> ArmStats:
    stats = ArmStats()
    for x in xs:
        stats = update_stats(stats, x)
    return stats


@dataclass(frozen=True)
class RandomnessContract:
    """Keyed, counter-based random streams.

    The stream for a key such as ``(policy_slot, replication, arm)`` is a pure
    function of ``master_seed`` and the key, so results never depend on the
    order in which replications are executed or on how many threads run them.
    """

    master_seed: int

    def __post_init__(self) -> None:
        seed = int(self.master_seed)
        if not 0 <= seed < 2**64:
            raise InvalidParameterError(f"master_seed must be a 64-bit unsigned integer, got {seed}")
        object.__setattr__(self, "master_seed", seed)

    def generator(self, *key: int) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed, spawn_key=tuple(int(k) for k in key))
        return np.random.Generator(np.random.Philox(seq))

    def arm_samples(self, arm: UniformArm, size: int, *key: int) -> np.ndarray:
        """First ``size`` rewards of ``arm`` on the stream ``key``."""
        return _affine(arm, self.generator(*key).random(size))

    def instance_samples(self, instance: BanditInstance, size: int, *key: int) -> np.ndarray:
        """``(N, size)`` reward table; row ``i`` is arm ``i``'s stream ``key + (i,)``."""
        out = np.empty((instance.n_arms, size))
        for i, arm in enumerate(instance.arms):
            out[i] = self.arm_samples(arm, size, *key, i)
        return out


def _affine(arm: UniformArm, u):
    return arm.a + (arm.b - arm.a) * u


def sample_arm(arm: UniformArm, stream: np.random.Generator) -> float:
    """One reward from ``arm``; a 53-bit unit uniform mapped onto ``[a, b]``."""
    return float(_affine(arm, stream.random()))


def validate_checkpoints(checkpoints: Sequence[int], horizon: int, minimum: int = 1) -> np.ndarray:
    cps = np.asarray(list(checkpoints), dtype=np.int64)
    if cps.ndim != 1 or cps.size == 0:
        raise InvalidParameterError("checkpoints must be a non-empty list of integers")
    if np.any(np.diff(cps) <= 0):
        raise InvalidParameterError("checkpoints must be strictly increasing")
    if cps[0] < minimum:
        raise InvalidParameterError(f"checkpoints must be >= {minimum} (end of initialization), got {int(cps[0])}")
    if cps[-1] > horizon:
        raise InvalidParameterError(f"checkpoints must be <= horizon {horizon}, got {int(cps[-1])}")
    return cps
