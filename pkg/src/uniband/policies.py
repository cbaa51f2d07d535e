"""Index policies and the sequential allocation loop.

Four index rules are provided:

``ucb-uniform``
    ``v + (w - v)/2 * n**(1/(t-2))`` on the sample min ``v`` and max ``w``;
    three initial pulls per arm. Asymptotically optimal for uniform arms.
``bk-ucb``
    the same inflation with exponent ``1/t``; two initial pulls per arm.
``chk-normal``
    ``mean + sd * sqrt(n**(2/(t-2)) - 1)``, the optimal rule for normal arms
    with unknown variance; three initial pulls.
``kr``
    ``mean + sd * sqrt(2 ln n / t)``; two initial pulls.

``sd`` is the population standard deviation ``sqrt(m2 / t)``. Global time
``n`` is the number of pulls made so far, so the decision for pull ``n + 1``
uses ``n``. Powers are evaluated as ``exp(ln n / k)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .core import ArmStats, BanditInstance, InvalidParameterError, RandomnessContract, validate_checkpoints

POLICY_KINDS = ("ucb-uniform", "bk-ucb", "chk-normal", "kr")
KIND_CODES = {"ucb-uniform": 0, "bk-ucb": 1, "chk-normal": 2, "kr": 3}
ALIASES = {"bk": "bk-ucb", "ucb_uniform": "ucb-uniform", "chk": "chk-normal", "chk_normal": "chk-normal"}
DEFAULT_INIT_ROUNDS = {"ucb-uniform": 3, "bk-ucb": 2, "chk-normal": 3, "kr": 2}
# smallest t at which each index is defined
MIN_SAMPLES = {"ucb-uniform": 3, "bk-ucb": 1, "chk-normal": 3, "kr": 2}


def canonical_kind(name: str) -> str:
    kind = ALIASES.get(name, name)
    if kind not in KIND_CODES:
        raise InvalidParameterError(f"unknown policy {name!r}; expected one of {', '.join(POLICY_KINDS)}")
    return kind


@dataclass(frozen=True)
class PolicySpec:
    kind: str
    init_rounds: int = field(default=-1)

    def __post_init__(self) -> None:
        kind = canonical_kind(self.kind)
        object.__setattr__(self, "kind", kind)
        rounds = DEFAULT_INIT_ROUNDS[kind] if self.init_rounds == -1 else int(self.init_rounds)
        if rounds < MIN_SAMPLES[kind]:
            raise InvalidParameterError(
                f"{kind} needs init_rounds >= {MIN_SAMPLES[kind]} for its index to be defined, got {rounds}")
        object.__setattr__(self, "init_rounds", rounds)

    @property
    def code(self) -> int:
        return KIND_CODES[self.kind]

    @property
    def name(self) -> str:
        return self.kind


def _check_n(n: float) -> float:
    if not n >= 1:
        raise InvalidParameterError(f"global time n must be >= 1, got {n}")
    return math.log(n)


def _check_range(v: float, w: float) -> None:
    if not v <= w:
        raise InvalidParameterError(f"need v_min <= w_max, got v_min={v}, w_max={w}")


def index_ucb_uniform(n: float, t: int, v_min: float, w_max: float) -> float:
    if t < 3:
        raise InvalidParameterError(f"ucb-uniform index needs t >= 3, got t={t}")
    _check_range(v_min, w_max)
    logn = _check_n(n)
    return v_min + 0.5 * (w_max - v_min) * math.exp(logn / (t - 2))


def index_bk(n: float, t: int, v_min: float, w_max: float) -> float:
    if t < 1:
        raise InvalidParameterError(f"bk-ucb index needs t >= 1, got t={t}")
    _check_range(v_min, w_max)
    logn = _check_n(n)
    return v_min + 0.5 * (w_max - v_min) * math.exp(logn / t)


def index_chk_normal(n: float, t: int, mean: float, sd: float) -> float:
    if t < 3:
        raise InvalidParameterError(f"chk-normal index needs t >= 3, got t={t}")
    if not sd >= 0:
        raise InvalidParameterError(f"sd must be >= 0, got {sd}")
    logn = _check_n(n)
    return mean + sd * math.sqrt(math.exp(2.0 * logn / (t - 2)) - 1.0)


def index_kr(n: float, t: int, mean: float, sd: float) -> float:
    if t < 2:
        raise InvalidParameterError(f"kr index needs t >= 2, got t={t}")
    if not sd >= 0:
        raise InvalidParameterError(f"sd must be >= 0, got {sd}")
    logn = _check_n(n)
    return mean + sd * math.sqrt(2.0 * logn / t)


def policy_index(kind: str, n: float, stats: ArmStats) -> float:
    """Index of one arm under ``kind`` given its running statistics."""
    if kind == "ucb-uniform":
        return index_ucb_uniform(n, stats.t, stats.v_min, stats.w_max)
    if kind == "bk-ucb":
        return index_bk(n, stats.t, stats.v_min, stats.w_max)
    # sqrt(m2/t) written out so the value matches the compiled kernel bit for bit
    if kind == "chk-normal":
        return index_chk_normal(n, stats.t, stats.mean, math.sqrt(stats.m2 / stats.t))
    if kind == "kr":
        return index_kr(n, stats.t, stats.mean, math.sqrt(stats.m2 / stats.t))
    raise InvalidParameterError(f"unknown policy {kind!r}")


def select_arm(policy: PolicySpec, stats: Sequence[ArmStats], n: int) -> int:
    """Arm to pull next.

    While some arm has fewer than ``policy.init_rounds`` samples, the
    lowest-indexed arm among those with the fewest samples is returned, which
    yields round-robin initialization. Afterwards the arm with the largest
    index at global time ``n`` is returned; ties go to the lowest index.
    """
    counts = [s.t for s in stats]
    if min(counts) < policy.init_rounds:
        return counts.index(min(counts))
    best_arm, best = 0, policy_index(policy.kind, n, stats[0])
    for i in range(1, len(stats)):
        u = policy_index(policy.kind, n, stats[i])
        if u > best:
            best_arm, best = i, u
    return best_arm


@dataclass
class PolicyRun:
    """One replication: pull counts and pseudo-regret at each checkpoint."""

    policy: str
    checkpoints: np.ndarray
    pulls: np.ndarray  # (C, N)
    regret: np.ndarray  # (C,)


def pseudo_regret(pulls: np.ndarray, deltas: np.ndarray) -> np.ndarray:
    """``sum_i delta_i * T_i`` along the last axis of ``pulls``."""
    return (pulls * deltas).sum(axis=-1)


def check_horizon(instance: BanditInstance, policy: PolicySpec, horizon: int) -> None:
    need = policy.init_rounds * instance.n_arms
    if horizon < need:
        raise InvalidParameterError(
            f"horizon {horizon} is shorter than {policy.kind}'s initialization phase "
            f"({policy.init_rounds} pulls x {instance.n_arms} arms = {need})")


def run_policy(instance: BanditInstance, policy: PolicySpec, horizon: int,
               streams: RandomnessContract | int = 0, key: tuple[int, ...] = (0, 0),
               checkpoints: Sequence[int] | None = None, backend: str | None = None) -> PolicyRun:
    """Simulate ``policy`` on ``instance`` for ``horizon`` pulls.

    Arm ``i``'s rewards come from stream ``key + (i,)`` of ``streams``; the
    k-th pull of an arm always sees the k-th draw of its stream.
    """
    horizon = int(horizon)
    check_horizon(instance, policy, horizon)
    if not isinstance(streams, RandomnessContract):
        streams = RandomnessContract(streams)
    cps = validate_checkpoints(checkpoints if checkpoints is not None else range(1, horizon + 1), horizon)
    samples = streams.instance_samples(instance, horizon, *key)[None]
    pulls = kernels.simulate_batch(policy.code, policy.init_rounds, samples, cps, backend=backend)[0]
    return PolicyRun(policy.kind, cps, pulls, pseudo_regret(pulls, instance.deltas()))
