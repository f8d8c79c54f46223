"""Sampling kernels for table-backed machines.

A machine's strings are packed as left-aligned 64-bit codes: string ``s`` of
length ``L`` matches a random word ``w`` when ``w >> (64 - L) == int(s, 2)``.
One uint64 word therefore stands for the first 64 random bits of a run.

Two interchangeable backends are provided: numba-compiled loops, and chunked
numpy.  ``CFOLOG_NO_NUMBA=1`` in the environment (or numba being absent)
selects numpy.
"""

from __future__ import annotations

import os

import numpy as np

UNDECIDED = 2
MAX_BITS = 64
_CHUNK = 1 << 20

try:  # pragma: no cover - depends on the environment
    if os.environ.get("CFOLOG_NO_NUMBA", "").strip() not in ("", "0"):
        raise ImportError("disabled by CFOLOG_NO_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


def backend() -> str:
    return "numba" if HAVE_NUMBA else "numpy"


def pack(strings_by_side: list[tuple[str, int]]):
    """``[(bits, side), ...]`` -> ``(codes, shifts, lengths, sides)`` arrays."""
    codes = np.zeros(len(strings_by_side), dtype=np.uint64)
    shifts = np.zeros(len(strings_by_side), dtype=np.uint64)
    lengths = np.zeros(len(strings_by_side), dtype=np.int64)
    sides = np.zeros(len(strings_by_side), dtype=np.int8)
    for j, (s, side) in enumerate(strings_by_side):
        if len(s) > MAX_BITS:
            raise ValueError(f"sampling supports strings of at most {MAX_BITS} bits")
        codes[j] = int(s, 2) if s else 0
        shifts[j] = MAX_BITS - len(s)
        lengths[j] = len(s)
        sides[j] = side
    return codes, shifts, lengths, sides


# -- numpy backend ---------------------------------------------------------


def _classify_np(words, codes, shifts, lengths, sides):
    out = np.full(words.shape[0], UNDECIDED, dtype=np.int8)
    for j in range(codes.shape[0]):
        if lengths[j] == 0:
            hit = np.ones(words.shape[0], dtype=bool)
        else:
            hit = (words >> shifts[j]) == codes[j]
        out[hit & (out == UNDECIDED)] = sides[j]
    return out


def _majority_errors_np(words, codes, shifts, lengths, sides, m, wrong_side):
    runs = words.shape[0] // m
    errors = 0
    per_chunk = max(1, _CHUNK // m)
    for start in range(0, runs, per_chunk):
        stop = min(runs, start + per_chunk)
        block = words[start * m : stop * m]
        outcome = _classify_np(block, codes, shifts, lengths, sides).reshape(stop - start, m)
        # an undecided run counts against the machine
        bad = (outcome == wrong_side) | (outcome == UNDECIDED)
        errors += int(np.count_nonzero(bad.sum(axis=1) * 2 > m))
    return errors


# -- numba backend ---------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def _classify_nb(words, codes, shifts, lengths, sides):  # pragma: no cover - compiled
        n = words.shape[0]
        out = np.empty(n, dtype=np.int8)
        for i in range(n):
            w = words[i]
            res = np.int8(UNDECIDED)
            for j in range(codes.shape[0]):
                if lengths[j] == 0 or (w >> shifts[j]) == codes[j]:
                    res = sides[j]
                    break
            out[i] = res
        return out

    @njit(cache=True)
    def _majority_errors_nb(words, codes, shifts, lengths, sides, m, wrong_side):  # pragma: no cover
        runs = words.shape[0] // m
        errors = 0
        for r in range(runs):
            bad = 0
            for t in range(m):
                w = words[r * m + t]
                res = UNDECIDED
                for j in range(codes.shape[0]):
                    if lengths[j] == 0 or (w >> shifts[j]) == codes[j]:
                        res = sides[j]
                        break
                if res == wrong_side or res == UNDECIDED:
                    bad += 1
            if 2 * bad > m:
                errors += 1
        return errors


def classify(words, packed, use_numba: bool | None = None) -> np.ndarray:
    """Outcome per word: 0 accept, 1 reject, 2 undecided within the table."""
    words = np.ascontiguousarray(words, dtype=np.uint64)
    if use_numba is None:
        use_numba = HAVE_NUMBA
    if use_numba and HAVE_NUMBA:
        return _classify_nb(words, *packed)
    return _classify_np(words, *packed)


def majority_errors(words, packed, m: int, wrong_side: int, use_numba: bool | None = None) -> int:
    """Number of ``m``-trial blocks of ``words`` whose majority lands on ``wrong_side``.

    Undecided trials are counted as wrong, so the result is an upper bound
    on the error of any completion of the table.
    """
    words = np.ascontiguousarray(words, dtype=np.uint64)
    if use_numba is None:
        use_numba = HAVE_NUMBA
    if use_numba and HAVE_NUMBA:
        return int(_majority_errors_nb(words, *packed, np.int64(m), np.int8(wrong_side)))
    return _majority_errors_np(words, *packed, m, wrong_side)


def random_words(rng: np.random.Generator, n: int) -> np.ndarray:
    """``n`` uniformly random 64-bit words from ``rng``'s bit generator."""
    return rng.bit_generator.random_raw(n).astype(np.uint64, copy=False)
