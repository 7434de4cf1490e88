"""Terminating-form classification of starting values.

A start's terminating form is the mod-9 form of the first power of two met by
its compressed trajectory (the start itself counts).  Because this is a tail
property, ``classify(v)`` and ``classify(compressed_step(v))`` agree whenever
``v`` is not a power of two, which is what makes range memoization valid.
"""
from __future__ import annotations

import logging
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import islice
from typing import Iterator

import numpy as np

from .core import (
    FORMS,
    Form,
    StepCapExceeded,
    collatz_step,
    compressed_step,
    form_of,
    power_of_two_exponent,
)

log = logging.getLogger(__name__)

DEFAULT_STEP_CAP = 100_000
DEFAULT_CHUNK = 1 << 16
DEFAULT_MEMO_BUDGET = 1 << 27  # bytes; one byte per memoized value
BACKENDS = ("numba", "python")


@dataclass(frozen=True)
class Classification:
    start: int
    terminating_form: Form
    stopping_exponent: int
    compressed_steps: int
    peak: int

    @property
    def stopping_power(self) -> int:
        return 1 << self.stopping_exponent


def _validate(start: int, step_cap: int) -> None:
    if start < 1:
        raise ValueError(f"start must be >= 1, got {start}")
    if step_cap < 1:
        raise ValueError(f"step_cap must be >= 1, got {step_cap}")


def classify(start: int, step_cap: int = DEFAULT_STEP_CAP) -> Classification:
    _validate(start, step_cap)
    v = peak = start
    steps = 0
    while v & (v - 1):
        if steps >= step_cap:
            raise StepCapExceeded(start, step_cap)
        v = (3 * v + 1) >> 1 if v & 1 else v >> 1
        steps += 1
        if v > peak:
            peak = v
    return Classification(start, form_of(v), v.bit_length() - 1, steps, peak)


def classify_trace(
    start: int, step_cap: int = DEFAULT_STEP_CAP
) -> tuple[list[int], Classification]:
    """Compressed trajectory from ``start`` through its first power of two."""
    _validate(start, step_cap)
    path = [start]
    v = start
    while v & (v - 1):
        if len(path) > step_cap:
            raise StepCapExceeded(start, step_cap)
        v = compressed_step(v)
        path.append(v)
    m = v.bit_length() - 1
    return path, Classification(start, form_of(v), m, len(path) - 1, max(path))


def raw_compressed_subsequence(start: int, step_cap: int = DEFAULT_STEP_CAP) -> list[int]:
    """Raw trajectory up to its first power of two with every element that
    directly follows an odd element removed.

    Built only from :func:`collatz_step`; used to cross-check the compressed
    path independently.
    """
    _validate(start, step_cap)
    kept = [start]
    v = start
    if power_of_two_exponent(v) is not None:
        return kept
    for _ in range(2 * step_cap):
        follows_odd = v & 1
        v = collatz_step(v)
        if follows_odd:
            continue
        kept.append(v)
        if power_of_two_exponent(v) is not None:
            return kept
    raise StepCapExceeded(start, step_cap)


def raw_oracle_form(start: int, step_cap: int = DEFAULT_STEP_CAP) -> Form:
    return form_of(raw_compressed_subsequence(start, step_cap)[-1])


def raw_first_power_form(start: int, step_cap: int = DEFAULT_STEP_CAP) -> Form:
    """Form of the first power of two on the *raw* trajectory.

    This is the alternative reading of "stopping number"; it disagrees with
    the published frequency counts and is kept only for differential checks.
    """
    _validate(start, step_cap)
    v = start
    for _ in range(2 * step_cap):
        if power_of_two_exponent(v) is not None:
            return form_of(v)
        v = collatz_step(v)
    raise StepCapExceeded(start, step_cap)


# -- range classification -------------------------------------------------


def new_memo(hi: int, budget: int = DEFAULT_MEMO_BUDGET) -> bytearray:
    """Flat memo table covering values ``[0, min(hi + 1, budget))``."""
    return bytearray(max(0, min(hi + 1, budget)))


def _block_python(lo: int, hi: int, memo: bytearray | None, step_cap: int) -> np.ndarray:
    out = bytearray(hi - lo + 1)
    nmemo = len(memo) if memo is not None else 0
    for s in range(lo, hi + 1):
        v = s
        steps = 0
        while v & (v - 1):
            if v < nmemo and memo[v]:
                code = memo[v]
                break
            if steps >= step_cap:
                raise StepCapExceeded(s, step_cap)
            v = (3 * v + 1) >> 1 if v & 1 else v >> 1
            steps += 1
        else:
            code = form_of(v).code
        out[s - lo] = code
        if s < nmemo:
            memo[s] = code
    return np.frombuffer(out, dtype=np.uint8)


def _block_numba(lo: int, hi: int, memo: bytearray | None, step_cap: int) -> np.ndarray:
    from . import _kernel

    out = np.zeros(hi - lo + 1, dtype=np.uint8)
    table = np.frombuffer(memo, dtype=np.uint8) if memo else np.zeros(0, dtype=np.uint8)
    if hi > _kernel.SAFE_ODD_MAX:
        # starts themselves outside int64: nothing for the kernel to do
        out[:] = _kernel.OVERFLOW
    else:
        _kernel.classify_block(lo, hi, out, table, step_cap, _kernel.CYCLE_CODES)
    capped = np.flatnonzero(out == _kernel.CAPPED)
    if capped.size:
        raise StepCapExceeded(lo + int(capped[0]), step_cap)
    for i in np.flatnonzero(out == _kernel.OVERFLOW):
        s = lo + int(i)
        code = classify(s, step_cap).terminating_form.code
        log.debug("start %d overflowed int64, redone with exact ints", s)
        out[i] = code
        if memo is not None and s < len(memo):
            memo[s] = code
    return out


def classify_block(
    lo: int,
    hi: int,
    memo: bytearray | None = None,
    step_cap: int = DEFAULT_STEP_CAP,
    backend: str = "numba",
) -> np.ndarray:
    """Form codes (uint8, see :attr:`Form.code`) for every start in [lo, hi]."""
    if backend == "numba":
        return _block_numba(lo, hi, memo, step_cap)
    if backend == "python":
        return _block_python(lo, hi, memo, step_cap)
    raise ValueError(f"unknown backend {backend!r}; expected one of {BACKENDS}")


def split_range(lo: int, hi: int, chunk: int, cuts: tuple[int, ...] = ()) -> list[tuple[int, int]]:
    """Split [lo, hi] into consecutive blocks of at most ``chunk`` values.

    Every value in ``cuts`` inside the range ends a block, so running totals
    can be read off exactly at those thresholds.
    """
    if chunk < 1:
        raise ValueError("chunk must be >= 1")
    stops = sorted({c for c in cuts if lo <= c < hi} | {hi})
    blocks = []
    start = lo
    for stop in stops:
        while start <= stop:
            end = min(start + chunk - 1, stop)
            blocks.append((start, end))
            start = end + 1
    return blocks


def iter_blocks(
    blocks: list[tuple[int, int]],
    memo: bytearray | None,
    step_cap: int = DEFAULT_STEP_CAP,
    workers: int = 1,
    backend: str = "numba",
) -> Iterator[tuple[int, int, np.ndarray]]:
    """Classify ``blocks`` and yield ``(lo, hi, codes)`` in block order.

    With ``workers > 1`` blocks run on a thread pool (the compiled kernel
    releases the GIL) and share ``memo``; output order and contents do not
    depend on scheduling.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if workers == 1 or len(blocks) < 2:
        for lo, hi in blocks:
            yield lo, hi, classify_block(lo, hi, memo, step_cap, backend)
        return
    pool = ThreadPoolExecutor(max_workers=workers)
    todo = iter(blocks)
    pending: deque = deque()

    def submit(block):
        lo, hi = block
        pending.append((lo, hi, pool.submit(classify_block, lo, hi, memo, step_cap, backend)))

    try:
        # bounded window keeps memory flat and lets callers stop early
        for block in islice(todo, 2 * workers):
            submit(block)
        while pending:
            lo, hi, fut = pending.popleft()
            block = next(todo, None)
            if block is not None:
                submit(block)
            yield lo, hi, fut.result()
    finally:
        pool.shutdown(wait=True, cancel_futures=True)


@dataclass
class RangeClassification:
    lo: int
    hi: int
    codes: np.ndarray

    def form_at(self, start: int) -> Form:
        return Form.from_code(int(self.codes[start - self.lo]))

    def counts(self) -> dict[Form, int]:
        tally = np.bincount(self.codes, minlength=len(FORMS) + 1)
        return {form: int(tally[form.code]) for form in FORMS}

    def members(self, form: Form) -> list[int]:
        return (np.flatnonzero(self.codes == form.code) + self.lo).tolist()


def classify_range(
    lo: int,
    hi: int,
    memo: bool = True,
    step_cap: int = DEFAULT_STEP_CAP,
    *,
    workers: int = 1,
    chunk: int = DEFAULT_CHUNK,
    backend: str = "numba",
    memo_budget: int = DEFAULT_MEMO_BUDGET,
) -> RangeClassification:
    if not 1 <= lo <= hi:
        raise ValueError(f"need 1 <= lo <= hi, got [{lo}, {hi}]")
    table = new_memo(hi, memo_budget) if memo else None
    parts = [
        codes
        for _, _, codes in iter_blocks(split_range(lo, hi, chunk), table, step_cap, workers, backend)
    ]
    return RangeClassification(lo, hi, np.concatenate(parts))
