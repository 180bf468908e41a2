"""Deterministic counter-based randomness.

Every random quantity in the package is a pure function of a 64-bit key
and integer counters (vertex id, trial index). Streams are separated by
fixed tags so tree weights, copy decisions, refresh bits and tie-breaks
never collide. Values are identical regardless of chunk size, thread
count or evaluation order, which is what makes whole-run reproducibility
a property of the seed alone.

The mixer is the splitmix64 finalizer applied to a multiply-spread
counter word. Scalar and vector paths use the same formula; a property
test pins them against each other.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MULT1 = 0xBF58476D1CE4E5B9
_MULT2 = 0x94D049BB133111EB
_SPREAD = 0xD1B54A32D192ED03

# Stream tags. Arbitrary fixed odd constants; never reuse across purposes.
TAG_WEIGHT = 0xA5E55C5D9F217B01
TAG_COPY = 0xC2B2AE3D27D4EB4F
TAG_REFRESH = 0x165667B19E3779F9
TAG_ROOT = 0x27D4EB2F165667C5
TAG_TIE = 0x9E3779B97F4A7C55
TAG_OFFSPRING = 0x2545F4914F6CDD1D
TAG_THIN = 0x5851F42D4C957F2D
TAG_TRIAL = 0x14057B7EF767814F

_U_GAMMA = np.uint64(_GAMMA)
_U_MULT1 = np.uint64(_MULT1)
_U_MULT2 = np.uint64(_MULT2)
_U_SPREAD = np.uint64(_SPREAD)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_UNIT = 2.0 ** -53


def _finalize_scalar(x: int) -> int:
    x &= _MASK64
    x = ((x ^ (x >> 30)) * _MULT1) & _MASK64
    x = ((x ^ (x >> 27)) * _MULT2) & _MASK64
    return x ^ (x >> 31)


def _combine_scalar(key: int, word: int) -> int:
    return _finalize_scalar(((key ^ ((word & _MASK64) * _SPREAD & _MASK64)) + _GAMMA) & _MASK64)


def derive_key(seed: int, *words: int) -> int:
    """Fold a user seed and any number of counter words into a 64-bit key."""
    key = _finalize_scalar((seed & _MASK64) + _GAMMA)
    for w in words:
        key = _combine_scalar(key, w)
    return key


def _finalize(x: np.ndarray) -> np.ndarray:
    x = (x ^ (x >> _S30)) * _U_MULT1
    x = (x ^ (x >> _S27)) * _U_MULT2
    return x ^ (x >> _S31)


def _as_u64(ids) -> np.ndarray:
    arr = np.asarray(ids)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    return arr.astype(np.uint64, copy=False)


def hash_u64(key: int, ids) -> np.ndarray:
    """Per-id 64-bit words from stream `key`."""
    return _finalize((np.uint64(key) ^ (_as_u64(ids) * _U_SPREAD)) + _U_GAMMA)


def hash_unit(key: int, ids) -> np.ndarray:
    """Per-id float64 in [0, 1)."""
    return (hash_u64(key, ids) >> _S11).astype(np.float64) * _UNIT


def hash_bit(key: int, ids) -> np.ndarray:
    """Per-id fair bit as uint8."""
    return (hash_u64(key, ids) & np.uint64(1)).astype(np.uint8)


def hash_unit_grid(key: int, rows, cols) -> np.ndarray:
    """float64 grid in [0, 1), element (i, j) a pure function of
    (key, rows[i], cols[j])."""
    row_keys = hash_u64(key, rows)
    h = _finalize((row_keys[:, None] ^ (_as_u64(cols)[None, :] * _U_SPREAD)) + _U_GAMMA)
    return (h >> _S11).astype(np.float64) * _UNIT


def hash_bit_grid(key: int, rows, cols) -> np.ndarray:
    row_keys = hash_u64(key, rows)
    h = _finalize((row_keys[:, None] ^ (_as_u64(cols)[None, :] * _U_SPREAD)) + _U_GAMMA)
    return (h & np.uint64(1)).astype(np.uint8)


def unit_scalar(key: int, i: int) -> float:
    """Scalar path of hash_unit; bit-identical to the vector path."""
    h = _combine_scalar(key, i)
    return (h >> 11) * _UNIT


def bit_scalar(key: int, i: int) -> int:
    return _combine_scalar(key, i) & 1


def generator(key: int) -> np.random.Generator:
    """Counter-based numpy generator for bulk non-uniform sampling
    (binomial offspring chains). Keyed, so runs are reproducible."""
    return np.random.Generator(np.random.Philox(key=key & _MASK64))
