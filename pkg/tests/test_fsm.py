import pytest
from hypothesis import given
from hypothesis import strategies as st

from collatz_forms.classifier import classify
from collatz_forms.core import FORMS, compressed_step
from collatz_forms.fsm import (
    FsmState,
    fsm_enter,
    fsm_step,
    fsm_trace,
    state_of,
    verify_conjugacy,
    verify_fsm_agreement,
    verify_power2_cycle,
    verify_scaling,
)

S = FsmState
a, b, c, d, e, f = FORMS


@pytest.mark.parametrize("v, expected", [(8, S(a, 0)), (17, S(a, 1)), (9, None), (1, S(d, 0))])
def test_state_of(v, expected):
    assert state_of(v) == expected


@pytest.mark.parametrize(
    "state, expected", [(S(a, 1), S(a, 2)), (S(a, 0), S(b, 0)), (S(d, 0), S(c, 0))]
)
def test_fsm_step_examples(state, expected):
    assert fsm_step(state) == expected


@pytest.mark.parametrize("v, state, steps", [(21, S(e, 3), 1), (9, S(e, 1), 1), (7, S(f, 0), 0)])
def test_fsm_enter(v, state, steps):
    assert fsm_enter(v) == (state, steps)


def test_fsm_trace_examples():
    tr = fsm_trace(7)
    assert tr.states == [
        S(f, 0), S(c, 1), S(a, 1), S(a, 2), S(b, 1), S(c, 2), S(d, 1), S(e, 0), S(a, 0)
    ]
    assert tr.terminating_form is a and tr.entry_steps == 0

    tr = fsm_trace(3)
    assert (tr.entry_steps, tr.states, tr.terminating_form) == (1, [S(e, 0), S(a, 0)], a)

    tr = fsm_trace(16)
    assert (tr.states, tr.terminating_form, tr.stopping_exponent) == ([S(f, 1)], f, 4)


def test_state_value_and_validation():
    assert S(c, 3).value == 29
    with pytest.raises(ValueError):
        S(a, -1)


@given(st.integers(min_value=1, max_value=2**128))
def test_conjugacy(v):
    if v % 3:
        assert fsm_step(state_of(v)) == state_of(compressed_step(v))


@given(st.sampled_from(FORMS), st.integers(min_value=0, max_value=2**100))
def test_closure_and_parity_coherence(form, n):
    s = S(form, n)
    nxt = fsm_step(s)
    assert nxt.value % 3 != 0
    # a, b, c: value parity equals index parity; d, e, f: opposite
    same = form in (a, b, c)
    assert (s.value & 1 == n & 1) == same
    assert nxt.value == compressed_step(s.value)


def test_all_forms_reachable_from_f():
    seen = {s.form for s in fsm_trace(7).states}
    assert seen == set(FORMS)


@given(st.integers(min_value=1, max_value=10**15))
def test_trace_agrees_with_classify(v):
    tr = fsm_trace(v)
    cl = classify(v)
    assert tr.terminating_form is cl.terminating_form
    assert tr.stopping_exponent == cl.stopping_exponent
    assert tr.entry_steps + len(tr.states) - 1 == cl.compressed_steps


def test_power2_cycle_report():
    assert verify_power2_cycle(6).passed
    rep = verify_power2_cycle(600)
    assert rep.passed and rep.checked == 601
    assert [classify(2**m).terminating_form for m in range(6)] == [d, c, b, a, f, e]
    assert classify(2**9).terminating_form is a
    with pytest.raises(ValueError):
        verify_power2_cycle(5)


@pytest.mark.parametrize("x, i, form", [(21, 3, e), (21, 4, e), (1, 6, d)])
def test_scaling_examples(x, i, form):
    assert classify(x << i).terminating_form is form


def test_scaling_report_small():
    rep = verify_scaling(300, 8)
    assert rep.passed
    assert rep.notes and "9 powers of two skipped" in rep.notes[0]
    # a power-of-two x is its own stopping power after scaling
    strict = verify_scaling(300, 8, include_powers_of_two=True)
    assert not strict.passed and strict.counterexample.startswith("x=1, i=1")


def test_conjugacy_and_agreement_reports():
    assert verify_conjugacy(20_000).passed
    assert verify_fsm_agreement(5_000).passed


def test_scaling_full_scale_for_non_powers():
    rep = verify_scaling(10**4, 20)
    assert rep.passed, rep.line()
    assert rep.checked == (10**4 - 14) * 20


def test_scaling_fails_only_for_powers_of_two():
    rep = verify_scaling(2000, 6, include_powers_of_two=True)
    # 11 powers of two up to 2000, each wrong for every i in 1..6
    assert rep.notes == ["66 violations"]
