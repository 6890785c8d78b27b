"""Counter-based random draws.

Every draw is a pure function of ``(seed, stream, counter)``, so a result never
depends on the order in which draws are consumed. Generation uses the step
index as the stream; the rumour simulator uses the round index.
"""

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53

MASK64 = (1 << 64) - 1


def seed_u64(seed):
    """Map any Python int onto the unsigned 64-bit seed space."""
    return np.uint64(int(seed) & MASK64)


@njit(cache=True, inline="always")
def mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True, inline="always")
def stream_key(seed, stream):
    return mix64(seed + _GOLDEN * (np.uint64(stream) + _ONE))


@njit(cache=True, inline="always")
def keyed_uniform(key, counter):
    z = mix64(key + _GOLDEN * (np.uint64(counter) + _ONE))
    return np.float64(z >> _S11) * _INV53


@njit(cache=True)
def uniform(seed, stream, counter):
    """Uniform float in [0, 1) for the triple ``(seed, stream, counter)``."""
    return keyed_uniform(stream_key(seed, stream), counter)
