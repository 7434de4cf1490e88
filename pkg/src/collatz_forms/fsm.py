"""Six-state machine over the units mod 9.

A state ``(form, n)`` stands for the integer ``9n + form.residue``.  One
transition is one compressed Collatz step; the branch is picked by the parity
of the index ``n``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .classifier import DEFAULT_STEP_CAP, classify
from .core import (
    POWER2_CYCLE,
    Form,
    StepCapExceeded,
    compressed_step,
    form_of,
    power_of_two_exponent,
)


@dataclass(frozen=True)
class FsmState:
    form: Form
    index: int

    def __post_init__(self):
        if self.index < 0:
            raise ValueError(f"state index must be >= 0, got {self.index}")

    @property
    def value(self) -> int:
        return 9 * self.index + self.form.residue

    def __str__(self) -> str:
        return f"({self.form.label},{self.index})"


def state_of(v: int) -> FsmState | None:
    form = form_of(v)
    if form is None:
        return None
    return FsmState(form, (v - form.residue) // 9)


def fsm_step(s: FsmState) -> FsmState:
    """Successor state, i.e. ``state_of(compressed_step(s.value))``.

    Stopping at powers of two is the caller's business; the map itself is
    defined for every state.
    """
    n = s.index
    even = n & 1 == 0
    form = s.form
    if form is Form.a:
        return FsmState(Form.b, n // 2) if even else FsmState(Form.a, (3 * n + 1) // 2)
    if form is Form.b:
        return FsmState(Form.c, n // 2) if even else FsmState(Form.c, (3 * n + 1) // 2)
    if form is Form.c:
        return FsmState(Form.d, n // 2) if even else FsmState(Form.a, (3 * n - 1) // 2)
    if form is Form.d:
        return FsmState(Form.c, 3 * n // 2) if even else FsmState(Form.e, (n - 1) // 2)
    if form is Form.e:
        return FsmState(Form.a, 3 * n // 2) if even else FsmState(Form.f, (n - 1) // 2)
    # f
    return FsmState(Form.c, (3 * n + 2) // 2) if even else FsmState(Form.a, (n - 1) // 2)


def fsm_enter(v: int, step_cap: int = DEFAULT_STEP_CAP) -> tuple[FsmState, int]:
    """Advance ``v`` along the compressed map until it is not a multiple of 3.

    Returns the entry state and the number of compressed steps consumed.
    """
    steps = 0
    while v % 3 == 0:
        if steps >= step_cap:
            raise StepCapExceeded(v, step_cap)
        v = compressed_step(v)
        steps += 1
    return state_of(v), steps


@dataclass
class FsmTrace:
    start: int
    entry_steps: int
    states: list[FsmState]

    @property
    def terminating_form(self) -> Form:
        return self.states[-1].form

    @property
    def stopping_exponent(self) -> int:
        return power_of_two_exponent(self.states[-1].value)


def fsm_trace(v: int, step_cap: int = DEFAULT_STEP_CAP) -> FsmTrace:
    state, entry = fsm_enter(v, step_cap)
    states = [state]
    while power_of_two_exponent(state.value) is None:
        if entry + len(states) > step_cap:
            raise StepCapExceeded(v, step_cap)
        state = fsm_step(state)
        states.append(state)
    return FsmTrace(v, entry, states)


# -- verification suites ----------------------------------------------------


@dataclass
class VerificationReport:
    suite: str
    passed: bool
    checked: int
    counterexample: str | None = None
    notes: list[str] = field(default_factory=list)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"{status} {self.suite}: {self.checked} cases checked"
        if self.counterexample:
            text += f"; counterexample: {self.counterexample}"
        return text


def verify_power2_cycle(max_m: int) -> VerificationReport:
    """Check that 2^m mod 9 (and so the form of 2^m) has period 6 for m <= max_m."""
    if max_m < 6:
        raise ValueError("max_m must be >= 6")
    for m in range(max_m + 1):
        got = classify(1 << m)
        expected = POWER2_CYCLE[m % 6]
        if (
            got.terminating_form is not expected
            or got.compressed_steps != 0
            or got.stopping_exponent != m
        ):
            return VerificationReport(
                "cycle",
                False,
                m + 1,
                f"m={m}: got form {got.terminating_form}, expected {expected}",
            )
    return VerificationReport("cycle", True, max_m + 1)


def verify_scaling(
    x_max: int, i_max: int, include_powers_of_two: bool = False
) -> VerificationReport:
    """Check that x and x*2^i share terminating form and stopping exponent.

    For x = 2^k the scaled start is itself a power of two (exponent k + i),
    so those x are skipped unless ``include_powers_of_two`` is set.
    """
    if x_max < 1 or i_max < 1:
        raise ValueError("x_max and i_max must be >= 1")
    checked = 0
    violations = []
    skipped = 0
    for x in range(1, x_max + 1):
        if not include_powers_of_two and x & (x - 1) == 0:
            skipped += 1
            continue
        base = classify(x)
        for i in range(1, i_max + 1):
            scaled = classify(x << i)
            checked += 1
            if (
                scaled.terminating_form is not base.terminating_form
                or scaled.stopping_exponent != base.stopping_exponent
            ):
                violations.append(
                    f"x={x}, i={i}: {scaled.terminating_form}/2^{scaled.stopping_exponent}"
                    f" vs {base.terminating_form}/2^{base.stopping_exponent}"
                )
    notes = []
    if skipped:
        notes.append(f"{skipped} powers of two skipped (x*2^i is then its own stopping power)")
    if violations:
        notes.append(f"{len(violations)} violations")
    return VerificationReport(
        "scaling", not violations, checked, violations[0] if violations else None, notes
    )


def verify_conjugacy(v_max: int) -> VerificationReport:
    """fsm_step agrees with compressed_step on every non-multiple of 3 up to v_max."""
    checked = 0
    for v in range(1, v_max + 1):
        if v % 3 == 0:
            continue
        checked += 1
        got = fsm_step(state_of(v))
        expected = state_of(compressed_step(v))
        if got != expected:
            return VerificationReport("fsm", False, checked, f"v={v}: {got} != {expected}")
    return VerificationReport("fsm", True, checked)


def verify_fsm_agreement(v_max: int) -> VerificationReport:
    """fsm_trace and classify report the same terminating form up to v_max."""
    for v in range(1, v_max + 1):
        a = fsm_trace(v).terminating_form
        b = classify(v).terminating_form
        if a is not b:
            return VerificationReport("fsm-trace", False, v, f"v={v}: fsm {a}, classify {b}")
    return VerificationReport("fsm-trace", True, v_max)
