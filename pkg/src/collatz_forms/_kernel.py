"""Compiled inner loop for range classification.

Works on int64 values and uint8 form codes (see :attr:`Form.code`).  Any
start whose trajectory would leave the int64 range is marked ``OVERFLOW`` so
the caller can redo it with Python ints; nothing wraps silently.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from .core import POWER2_CYCLE

UNKNOWN = 0
OVERFLOW = 254
CAPPED = 255

# largest odd v with 3v + 1 <= 2**63 - 1
SAFE_ODD_MAX = (2**63 - 2) // 3

CYCLE_CODES = np.array([form.code for form in POWER2_CYCLE], dtype=np.uint8)


@njit(nogil=True, cache=True)
def classify_block(lo, hi, out, memo, step_cap, cycle):
    """Write the terminating form code of every start in [lo, hi] to ``out``.

    ``memo`` holds known codes indexed by value (length 0 disables lookups).
    Entries only ever go from UNKNOWN to a final code, so concurrent callers
    on disjoint blocks may share one table.
    """
    nmemo = memo.shape[0]
    for s in range(lo, hi + 1):
        v = s
        steps = 0
        code = UNKNOWN
        while True:
            if v & (v - 1) == 0:
                m = 0
                t = v
                while t > 1:
                    t >>= 1
                    m += 1
                code = cycle[m % 6]
                break
            if v < nmemo:
                known = memo[v]
                if known != UNKNOWN:
                    code = known
                    break
            if steps >= step_cap:
                code = CAPPED
                break
            if v & 1:
                if v > SAFE_ODD_MAX:
                    code = OVERFLOW
                    break
                v = (3 * v + 1) >> 1
            else:
                v >>= 1
            steps += 1
        out[s - lo] = code
        if s < nmemo and code < OVERFLOW:
            memo[s] = code
