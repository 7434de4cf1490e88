"""Property suites run by ``collatz-forms verify``.

Each suite returns a :class:`VerificationReport` carrying PASS/FAIL and the
first counterexample found.
"""
from __future__ import annotations

import numpy as np

from .analysis import power2_exponent_scan
from .classifier import (
    classify,
    classify_range,
    classify_trace,
    raw_compressed_subsequence,
    raw_first_power_form,
    raw_oracle_form,
)
from .core import FORMS, POWER2_CYCLE, Form
from .fsm import (
    VerificationReport,
    verify_conjugacy,
    verify_fsm_agreement,
    verify_power2_cycle,
    verify_scaling,
)

SUITES = ("cycle", "oracle", "scaling", "partition", "memo", "fsm")

DEFAULT_LIMITS = {
    "cycle": 600,
    "oracle": 100_000,
    "scaling": 10_000,
    "partition": 1_000_000,
    "memo": 100_000,
    "fsm": 1_000_000,
}

# starts whose full paths are compared element by element in the oracle suite
_PATH_CHECK_LIMIT = 10_000


def raw_convention_counts(n: int) -> tuple[int, ...]:
    """Counts (a..f) over [1, n] under the raw-first-power-of-two reading."""
    counts = dict.fromkeys(FORMS, 0)
    for v in range(1, n + 1):
        counts[raw_first_power_form(v)] += 1
    return tuple(counts[f] for f in FORMS)


def verify_oracle(n: int) -> VerificationReport:
    for v in range(1, n + 1):
        got = classify(v).terminating_form
        want = raw_oracle_form(v)
        if got is not want:
            return VerificationReport("oracle", False, v, f"v={v}: compressed {got}, raw {want}")
        if v <= _PATH_CHECK_LIMIT and classify_trace(v)[0] != raw_compressed_subsequence(v):
            return VerificationReport("oracle", False, v, f"v={v}: trajectories differ")
    notes = [f"raw-first-power convention at N=10 gives {raw_convention_counts(10)}"]
    return VerificationReport("oracle", True, n, notes=notes)


def verify_partition(n: int, workers: int = 1) -> VerificationReport:
    """Sets S(a..f) up to n split [1, n]; powers of two land in the cycle's
    form; b, d, f hold only powers of two."""
    rc = classify_range(1, n, workers=workers)
    bad = np.flatnonzero((rc.codes < 1) | (rc.codes > len(FORMS)))
    if bad.size:
        return VerificationReport("partition", False, n, f"start {int(bad[0]) + 1} unclassified")
    m = 0
    while (1 << m) <= n:
        want = POWER2_CYCLE[m % 6]
        if rc.form_at(1 << m) is not want:
            return VerificationReport(
                "partition", False, n, f"2^{m} in S({rc.form_at(1 << m)}), expected S({want})"
            )
        m += 1
    notes = []
    for form in (Form.b, Form.d, Form.f):
        scan = power2_exponent_scan(form, n, rc.members(form))
        if not scan.residues_ok:
            return VerificationReport("partition", False, n, f"S({form}) exponents {scan.exponents}")
        for x in scan.non_powers:
            # confirm with the independent raw-trajectory oracle before reporting
            oracle = raw_oracle_form(x)
            if oracle is not form:
                return VerificationReport(
                    "partition", False, n, f"{x}: engine says {form}, raw oracle says {oracle}"
                )
            notes.append(f"FINDING: non-power-of-two {x} terminates in form {form}")
    return VerificationReport("partition", not notes, n, notes[0] if notes else None, notes)


def verify_memo(n: int, workers: tuple[int, ...] = (1, 2, 8)) -> VerificationReport:
    ref = classify_range(1, n, memo=False).codes
    variants = [("python backend", dict(memo=True, backend="python"))]
    variants += [(f"memo, {w} workers", dict(memo=True, workers=w, chunk=4096)) for w in workers]
    for label, kwargs in variants:
        got = classify_range(1, n, **kwargs).codes
        if not (got == ref).all():
            first = int((got != ref).argmax()) + 1
            return VerificationReport("memo", False, n, f"{label} differs at start {first}")
    return VerificationReport("memo", True, n * (len(variants) + 1))


def run_suite(name: str, limit: int | None = None, workers: int = 1) -> list[VerificationReport]:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; expected one of {', '.join(SUITES)}")
    n = DEFAULT_LIMITS[name] if limit is None else limit
    if name == "cycle":
        return [verify_power2_cycle(n)]
    if name == "oracle":
        return [verify_oracle(n)]
    if name == "scaling":
        return [verify_scaling(n, 20)]
    if name == "partition":
        return [verify_partition(n, workers)]
    if name == "memo":
        return [verify_memo(n)]
    return [verify_conjugacy(n), verify_fsm_agreement(min(n, 100_000))]
