"""Backend selection for the allocation loop.

The compiled extension is used when it imports; otherwise the pure-Python
kernel takes over. Set ``UNIBAND_BACKEND=python`` (or ``compiled``) to force
a choice. Both produce bit-identical pull counts.
"""
from __future__ import annotations

import os
from types import ModuleType

import numpy as np

from . import _kernel_py

try:
    from . import _kernel as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS: dict[str, ModuleType] = {"python": _kernel_py}
if _compiled is not None:
    BACKENDS["compiled"] = _compiled


def _default_backend() -> str:
    requested = os.environ.get("UNIBAND_BACKEND", "").strip().lower()
    if requested:
        if requested not in BACKENDS:
            raise ImportError(f"UNIBAND_BACKEND={requested!r} is not available (have {sorted(BACKENDS)})")
        return requested
    return "compiled" if "compiled" in BACKENDS else "python"


BACKEND = _default_backend()


def simulate_batch(kind: int, init_rounds: int, samples: np.ndarray, checkpoints: np.ndarray,
                   backend: str | None = None) -> np.ndarray:
    """Pull counts ``(R, C, N)`` at each checkpoint for a batch of replications.

    ``samples[r, i, k]`` is the reward arm ``i`` yields on its ``k``-th pull in
    replication ``r``.
    """
    impl = BACKENDS[backend or BACKEND]
    samples = np.ascontiguousarray(samples, dtype=np.float64)
    checkpoints = np.ascontiguousarray(checkpoints, dtype=np.int64)
    if samples.ndim != 3:
        raise ValueError(f"samples must be (R, N, H), got shape {samples.shape}")
    if len(checkpoints) and checkpoints[-1] > samples.shape[2]:
        raise ValueError("last checkpoint exceeds the sample horizon")
    return impl.simulate_batch(int(kind), int(init_rounds), samples, checkpoints)
