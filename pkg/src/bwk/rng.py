"""Counter-based random numbers addressed by (seed, round, stream, index).

Every uniform draw is a pure function of its address, so the draw that arm
``k`` would produce at round ``t`` does not depend on which arms a policy
pulled earlier. This gives common random numbers across policies for free.

The mixer is SplitMix64's finalizer applied to a chained key. It is cheap
enough to call per draw inside the jitted episode loop.
"""
from __future__ import annotations

import numpy as np
from numba import njit, uint64

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

# Stream tags keep environment and policy randomness disjoint.
STREAM_ARM = 1
STREAM_SHARED = 2
STREAM_POLICY = 3


def mix64(x: int) -> int:
    """SplitMix64 finalizer on a Python int (reference implementation)."""
    x = (x + _GOLDEN) & MASK64
    x = ((x ^ (x >> 30)) * _M1) & MASK64
    x = ((x ^ (x >> 27)) * _M2) & MASK64
    return x ^ (x >> 31)


def hash64(*parts: int) -> int:
    """Fold integers into one 64-bit value; used for per-cell seeds."""
    h = 0
    for p in parts:
        h = mix64(h ^ (int(p) & MASK64))
    return h


def uniform_ref(seed: int, t: int, stream: int, idx: int) -> float:
    """Pure-Python twin of :func:`counter_uniform`, used to cross-check it."""
    h = hash64(seed, t, stream, idx)
    return (h >> 11) * 2.0**-53


@njit(cache=True, inline="always")
def _mix(x):
    x = x + uint64(_GOLDEN)
    x = (x ^ (x >> uint64(30))) * uint64(_M1)
    x = (x ^ (x >> uint64(27))) * uint64(_M2)
    return x ^ (x >> uint64(31))


@njit(cache=True)
def counter_uniform(seed, t, stream, idx):
    """Uniform on [0, 1) with 53 random bits, keyed by its address."""
    h = _mix(uint64(0) ^ uint64(seed))
    h = _mix(h ^ uint64(t))
    h = _mix(h ^ uint64(stream))
    h = _mix(h ^ uint64(idx))
    return np.float64(h >> uint64(11)) * 1.1102230246251565e-16


class CounterStream:
    """Python-side handle on the counter-based generator for one episode."""

    def __init__(self, seed: int):
        self.seed = int(seed) & MASK64

    def uniform(self, t: int, stream: int, idx: int = 0) -> float:
        return float(counter_uniform(np.uint64(self.seed), t, stream, idx))

    def __repr__(self) -> str:
        return f"CounterStream(seed={self.seed:#018x})"
