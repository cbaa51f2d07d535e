"""Replicated simulation harness.

Replications are grouped into fixed-size chunks whose boundaries depend only
on the scenario, never on the worker count. Each chunk reduces to
(count, mean, M2) per checkpoint, and chunks are merged in chunk order, so
the output is bit-identical however many workers run.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .core import BanditInstance, InvalidParameterError, RandomnessContract, UniformArm, validate_checkpoints
from .policies import PolicySpec, check_horizon, pseudo_regret

# bound on doubles held by one chunk's reward table
CHUNK_BUDGET = 2_000_000
MAX_CHUNK = 64


def linear_checkpoints(horizon: int, count: int, minimum: int = 1) -> list[int]:
    pts = {max(minimum, round(k * horizon / count)) for k in range(1, count + 1)}
    return sorted(p for p in pts if p <= horizon)


def log_checkpoints(horizon: int, count: int, minimum: int = 1) -> list[int]:
    if count == 1:
        return [horizon]
    pts = np.unique(np.round(np.geomspace(minimum, horizon, count)).astype(np.int64))
    return [int(p) for p in pts]


@dataclass
class Scenario:
    instance: BanditInstance
    policies: list[PolicySpec]
    horizon: int
    checkpoints: list[int]
    replications: int = 1
    master_seed: int = 0
    checkpoint_kind: str = "explicit"

    def __post_init__(self) -> None:
        if not self.policies:
            raise InvalidParameterError("scenario needs at least one policy")
        if self.replications < 1:
            raise InvalidParameterError(f"replications must be >= 1, got {self.replications}")
        for policy in self.policies:
            check_horizon(self.instance, policy, self.horizon)
        validate_checkpoints(self.checkpoints, self.horizon, self.init_phase())
        RandomnessContract(self.master_seed)

    def init_phase(self) -> int:
        return max(p.init_rounds for p in self.policies) * self.instance.n_arms


@dataclass
class RegretCurve:
    policy: str
    n: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    reps: int

    def rows(self):
        for n, m, s in zip(self.n, self.mean, self.stderr):
            yield self.policy, int(n), float(m), float(s), self.reps


@dataclass
class _Moments:
    """Per-checkpoint count/mean/M2, merged with Chan's pairwise update."""

    count: int = 0
    mean: np.ndarray | None = None
    m2: np.ndarray | None = None

    @classmethod
    def of(cls, x: np.ndarray) -> "_Moments":
        mean = x.mean(axis=0)
        return cls(x.shape[0], mean, ((x - mean) ** 2).sum(axis=0))

    def merge(self, other: "_Moments") -> "_Moments":
        if self.count == 0:
            return other
        n = self.count + other.count
        d = other.mean - self.mean
        mean = self.mean + d * (other.count / n)
        m2 = self.m2 + other.m2 + d * d * (self.count * other.count / n)
        return _Moments(n, mean, m2)


def chunk_size(n_arms: int, horizon: int) -> int:
    return max(1, min(MAX_CHUNK, CHUNK_BUDGET // (n_arms * horizon)))


def _run_chunk(scenario: Scenario, slot: int, policy: PolicySpec, reps: range,
               cps: np.ndarray, backend: str | None) -> _Moments:
    streams = RandomnessContract(scenario.master_seed)
    inst = scenario.instance
    samples = np.empty((len(reps), inst.n_arms, scenario.horizon))
    for j, r in enumerate(reps):
        samples[j] = streams.instance_samples(inst, scenario.horizon, slot, r)
    pulls = kernels.simulate_batch(policy.code, policy.init_rounds, samples, cps, backend=backend)
    return _Moments.of(pseudo_regret(pulls, inst.deltas()))


def default_workers() -> int:
    raw = os.environ.get("UNIBAND_WORKERS")
    if raw is None:
        return 1
    try:
        workers = int(raw)
    except ValueError:
        raise InvalidParameterError(f"UNIBAND_WORKERS must be an integer, got {raw!r}") from None
    return max(1, workers)


def run_scenario(scenario: Scenario, workers: int | None = None, backend: str | None = None) -> list[RegretCurve]:
    """Mean pseudo-regret and its standard error at each checkpoint, per policy.

    Replication ``r`` of the policy in slot ``p`` draws arm ``i``'s rewards
    from stream ``(p, r, i)``.
    """
    workers = default_workers() if workers is None else max(1, int(workers))
    cps = validate_checkpoints(scenario.checkpoints, scenario.horizon, scenario.init_phase())
    size = chunk_size(scenario.instance.n_arms, scenario.horizon)
    chunks = [range(lo, min(lo + size, scenario.replications)) for lo in range(0, scenario.replications, size)]
    jobs = [(slot, policy, reps) for slot, policy in enumerate(scenario.policies) for reps in chunks]

    def work(job):
        slot, policy, reps = job
        return _run_chunk(scenario, slot, policy, reps, cps, backend)

    if workers == 1:
        results = [work(job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, jobs))

    curves = []
    per_policy = len(chunks)
    for slot, policy in enumerate(scenario.policies):
        acc = _Moments()
        for part in results[slot * per_policy:(slot + 1) * per_policy]:
            acc = acc.merge(part)
        reps = acc.count
        if reps > 1:
            stderr = np.sqrt(acc.m2 / (reps - 1)) / math.sqrt(reps)
        else:
            stderr = np.zeros_like(acc.mean)
        curves.append(RegretCurve(policy.kind, cps.copy(), acc.mean, stderr, reps))
    return curves


# -- index-underestimation probe ---------------------------------------------

@dataclass
class ProbeResult:
    """Per-``t`` frequency that some ``u(t, j) < mu* - eps`` for ``3 <= j <= t``."""

    t: np.ndarray
    ucb_uniform: np.ndarray
    bk: np.ndarray
    replications: int
    ucb_uniform_stderr: np.ndarray = field(init=False)
    bk_stderr: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.ucb_uniform_stderr = _binomial_stderr(self.ucb_uniform, self.replications)
        self.bk_stderr = _binomial_stderr(self.bk, self.replications)


def _binomial_stderr(p: np.ndarray, reps: int) -> np.ndarray:
    return np.sqrt(p * (1 - p) / reps)


def c2_probe(optimal_arm: UniformArm, eps: float, t_max: int, replications: int,
             stream: RandomnessContract | int = 0, batch: int = 4096) -> ProbeResult:
    """Empirical frequency of index underestimation along one arm's sample path.

    For each ``t`` in ``3..t_max`` and each replication, checks whether the
    ucb-uniform index ``V_j + (W_j - V_j)/2 * t^(1/(j-2))`` (and, separately,
    the bk-ucb index with exponent ``1/j``) falls below ``mu* - eps`` for some
    ``3 <= j <= t``, where ``V_j, W_j`` are the running min/max after ``j`` draws.
    """
    span = optimal_arm.span()
    if not 0 < eps < span / 2:
        raise InvalidParameterError(f"need 0 < eps < S/2 = {span / 2:g}, got eps={eps}")
    if t_max < 3:
        raise InvalidParameterError(f"need t_max >= 3, got {t_max}")
    if replications < 1:
        raise InvalidParameterError("replications must be >= 1")
    if not isinstance(stream, RandomnessContract):
        stream = RandomnessContract(stream)
    target = optimal_arm.mean() - eps
    ts = np.arange(3, t_max + 1)
    hits_ucb = np.zeros(len(ts), dtype=np.int64)
    hits_bk = np.zeros(len(ts), dtype=np.int64)
    j = np.arange(3, t_max + 1, dtype=np.float64)
    for b, lo in enumerate(range(0, replications, batch)):
        m = min(batch, replications - lo)
        x = optimal_arm.a + span * stream.generator(b).random((m, t_max))
        v = np.minimum.accumulate(x, axis=1)[:, 2:]
        half = 0.5 * (np.maximum.accumulate(x, axis=1)[:, 2:] - v)
        for k, t in enumerate(ts):
            cols = slice(0, t - 2)
            logt = math.log(t)
            u = v[:, cols] + half[:, cols] * np.exp(logt / (j[cols] - 2))
            hits_ucb[k] += np.count_nonzero((u < target).any(axis=1))
            u = v[:, cols] + half[:, cols] * np.exp(logt / j[cols])
            hits_bk[k] += np.count_nonzero((u < target).any(axis=1))
    return ProbeResult(ts, hits_ucb / replications, hits_bk / replications, replications)
