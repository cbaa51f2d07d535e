"""Pure-Python allocation loop, vectorized across replications.

Mirrors ``_kernel.pyx`` operation for operation. ``exp`` and ``log`` go
through :mod:`math` (the platform libm) rather than numpy's SIMD routines,
which round differently in the last bit; everything else is IEEE-exact
(+, -, *, /, sqrt) and therefore identical in both kernels.
"""
from __future__ import annotations

import math

import numpy as np

UCB_UNIFORM, BK, CHK_NORMAL, KR = 0, 1, 2, 3


def _libm_exp(a: np.ndarray) -> np.ndarray:
    flat = a.ravel().tolist()
    return np.fromiter(map(math.exp, flat), dtype=np.float64, count=len(flat)).reshape(a.shape)


def indices(kind: int, logn: float, t, vmin, wmax, mean, m2) -> np.ndarray:
    if kind == UCB_UNIFORM:
        return vmin + 0.5 * (wmax - vmin) * _libm_exp(logn / (t - 2))
    if kind == BK:
        return vmin + 0.5 * (wmax - vmin) * _libm_exp(logn / t)
    if kind == CHK_NORMAL:
        return mean + np.sqrt(m2 / t) * np.sqrt(_libm_exp(2.0 * logn / (t - 2)) - 1.0)
    if kind == KR:
        return mean + np.sqrt(m2 / t) * np.sqrt(2.0 * logn / t)
    raise ValueError(f"unknown policy kind code {kind}")


def simulate_batch(kind: int, init_rounds: int, samples: np.ndarray, checkpoints: np.ndarray) -> np.ndarray:
    """Run ``R`` independent replications; returns pull counts ``(R, C, N)``."""
    samples = np.ascontiguousarray(samples, dtype=np.float64)
    checkpoints = np.ascontiguousarray(checkpoints, dtype=np.int64)
    n_reps, n_arms, horizon = samples.shape
    n_cp = len(checkpoints)
    out = np.zeros((n_reps, n_cp, n_arms), dtype=np.int64)

    t = np.zeros((n_reps, n_arms), dtype=np.int64)
    vmin = np.full((n_reps, n_arms), np.inf)
    wmax = np.full((n_reps, n_arms), -np.inf)
    mean = np.zeros((n_reps, n_arms))
    m2 = np.zeros((n_reps, n_arms))

    rows = np.arange(n_reps)
    init_steps = init_rounds * n_arms
    c = 0
    with np.errstate(divide="ignore", invalid="ignore"):
        for step in range(horizon):
            if step < init_steps:
                arm = np.full(n_reps, step % n_arms)
            else:
                u = indices(kind, math.log(step), t, vmin, wmax, mean, m2)
                arm = np.argmax(u, axis=1)
            tt = t[rows, arm] + 1
            x = samples[rows, arm, tt - 1]
            t[rows, arm] = tt
            vmin[rows, arm] = np.minimum(vmin[rows, arm], x)
            wmax[rows, arm] = np.maximum(wmax[rows, arm], x)
            d = x - mean[rows, arm]
            new_mean = mean[rows, arm] + d / tt
            mean[rows, arm] = new_mean
            m2[rows, arm] = m2[rows, arm] + d * (x - new_mean)
            if c < n_cp and step + 1 == checkpoints[c]:
                out[:, c, :] = t
                c += 1
    return out
