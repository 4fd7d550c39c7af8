"""SplitMix64 mixer used to derive every secondary seed in the platform.

Documented as part of the model format so independent implementations
derive identical per-trial sub-seeds (``splitmix64(master XOR trial_index)``)
and batch-shuffle streams (``splitmix64(seed)``).
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def trial_seed(master_seed: int, trial_index: int) -> int:
    return splitmix64((master_seed ^ trial_index) & _MASK64)
