"""Basic Collatz dynamics and the residue classes used to label trajectories.

Values are plain Python ints, so arithmetic here is exact at any size.  The
fixed-width fast path in :mod:`collatz_forms._kernel` is where overflow has to
be detected explicitly.
"""
from __future__ import annotations

from enum import Enum


class CollatzError(Exception):
    """Base class for errors raised by this package."""


class StepCapExceeded(CollatzError):
    """A trajectory did not reach a power of two within the step budget."""

    def __init__(self, start: int, step_cap: int):
        super().__init__(
            f"start {start} did not reach a power of two within {step_cap} compressed steps"
        )
        self.start = start
        self.step_cap = step_cap


class Form(Enum):
    """The six units mod 9, labelled a..f.  The member value is the residue."""

    a = 8
    b = 4
    c = 2
    d = 1
    e = 5
    f = 7

    @property
    def label(self) -> str:
        return self.name

    @property
    def residue(self) -> int:
        return self.value

    @property
    def code(self) -> int:
        """Compact 1-based code (a=1 .. f=6); 0 is reserved for "unknown"."""
        return _FORM_CODES[self]

    @classmethod
    def from_code(cls, code: int) -> Form:
        return FORMS[code - 1]

    @classmethod
    def parse(cls, text: str) -> Form:
        try:
            return cls[text.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown form {text!r}; expected one of a..f") from None

    def __str__(self) -> str:
        return self.name


FORMS: tuple[Form, ...] = tuple(Form)
_FORM_CODES = {form: i + 1 for i, form in enumerate(FORMS)}

# 2^m mod 9 cycles through 1, 2, 4, 8, 7, 5.
POWER2_CYCLE: tuple[Form, ...] = (Form.d, Form.c, Form.b, Form.a, Form.f, Form.e)


class Mod4Class(Enum):
    """Classes of Table-I style grouping, keyed by ``v mod 4``."""

    A = 1
    B = 2
    C = 3
    D = 0

    @property
    def offset(self) -> int:
        """The constant in the form ``4k + offset`` (D uses ``4k + 4``)."""
        return self.value or 4


def _check_positive(v: int) -> None:
    if v < 1:
        raise ValueError(f"expected a positive integer, got {v}")


def collatz_step(v: int) -> int:
    _check_positive(v)
    return 3 * v + 1 if v & 1 else v >> 1


def compressed_step(v: int) -> int:
    """One step of the map that folds every odd step into its forced halving."""
    _check_positive(v)
    return (3 * v + 1) >> 1 if v & 1 else v >> 1


def power_of_two_exponent(v: int) -> int | None:
    """Return ``m`` if ``v == 2**m``, else ``None``."""
    _check_positive(v)
    if v & (v - 1):
        return None
    return v.bit_length() - 1


def form_of(v: int) -> Form | None:
    """Form of ``v`` by its residue mod 9, or ``None`` when ``3 | v``."""
    _check_positive(v)
    r = v % 9
    if r % 3 == 0:
        return None
    return Form(r)


def mod4_class(v: int) -> Mod4Class:
    _check_positive(v)
    return Mod4Class(v & 3)


def mod4_reduce(v: int) -> int:
    """Apply the short operation sequence associated with the class of ``v``.

    A (4k+1) -> 3k+1 via O,E,E; B (4k+2) -> 2k+1 via E; D (4k+4) -> 2k+2 via E;
    C (4k+3) -> 9k+8 via O,E,O,E.  ``v = 1`` is a fixed point.
    """
    cls = mod4_class(v)
    k = (v - cls.offset) >> 2
    if cls is Mod4Class.A:
        return 3 * k + 1
    if cls is Mod4Class.B:
        return 2 * k + 1
    if cls is Mod4Class.C:
        return 9 * k + 8
    return 2 * k + 2


# sequence of raw steps each reduction stands for
MOD4_SEQUENCES: dict[Mod4Class, str] = {
    Mod4Class.A: "OEE",
    Mod4Class.B: "E",
    Mod4Class.C: "OEOE",
    Mod4Class.D: "E",
}
