"""Membership sets per terminating form, their factorizations, and the
power-of-two structure inside each set."""
from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass

from .classifier import classify_range
from .core import POWER2_CYCLE, CollatzError, Form

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
# Miller-Rabin with the first 13 prime bases is exact below 3.3e24
_DETERMINISTIC_LIMIT = 3_317_044_064_679_887_385_961_981
_TRIAL_LIMIT = 1000


def build_set(r: Form, bound: int, **range_kwargs) -> list[int]:
    """All starts x <= bound whose terminating form is ``r``, ascending."""
    if bound < 1:
        raise ValueError("bound must be >= 1")
    return classify_range(1, bound, **range_kwargs).members(r)


def build_sets(bound: int, **range_kwargs) -> dict[Form, list[int]]:
    rc = classify_range(1, bound, **range_kwargs)
    return {form: rc.members(form) for form in Form}


# -- factorization ----------------------------------------------------------


def is_probable_prime(n: int, rounds: int = 20) -> bool:
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    bases = list(_SMALL_PRIMES)
    if n >= _DETERMINISTIC_LIMIT:
        rng = random.Random(n)
        bases += [rng.randrange(2, n - 1) for _ in range(rounds)]
    for a in bases:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _brent_rho(n: int, rng: random.Random) -> int:
    """A nontrivial factor of the odd composite ``n`` (Brent's variant)."""
    while True:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g = r = q = 1
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


def _factor_into(n: int, out: dict[int, int], rng: random.Random) -> None:
    if n == 1:
        return
    if is_probable_prime(n):
        out[n] = out.get(n, 0) + 1
        return
    d = _brent_rho(n, rng)
    _factor_into(d, out, rng)
    _factor_into(n // d, out, rng)


@dataclass(frozen=True)
class Factorization:
    value: int
    factors: tuple[tuple[int, int], ...]

    def product(self) -> int:
        return math.prod(p**e for p, e in self.factors)

    def __str__(self) -> str:
        if not self.factors:
            return "1"
        return " × ".join(str(p) if e == 1 else f"{p}^{e}" for p, e in self.factors)


def factorize(v: int) -> Factorization:
    """Trial division by small primes, then Brent-Pollard rho on the cofactor."""
    if v < 1:
        raise ValueError(f"can only factor positive integers, got {v}")
    found: dict[int, int] = {}
    n = v
    tz = (n & -n).bit_length() - 1
    if tz:
        found[2] = tz
        n >>= tz
    p = 3
    while p < _TRIAL_LIMIT and p * p <= n:
        while n % p == 0:
            found[p] = found.get(p, 0) + 1
            n //= p
        p += 2
    if n > 1:
        # fixed seed: identical runs give identical intermediate work
        _factor_into(n, found, random.Random(0x5EED))
    return Factorization(v, tuple(sorted(found.items())))


def factor_report(r: Form, bound: int, output: str = "text", **range_kwargs) -> str:
    rows = [(x, factorize(x)) for x in build_set(r, bound, **range_kwargs)]
    return render_factor_rows(r, rows, output)


def render_factor_rows(r: Form, rows: list[tuple[int, Factorization]], output: str) -> str:
    if output == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["element", "factorization"])
        for x, fac in rows:
            w.writerow([x, str(fac)])
        return buf.getvalue()
    if output in ("json", "structured"):
        import json

        return json.dumps(
            {
                "form": r.label,
                "rows": [
                    {"element": x, "factorization": str(fac), "factors": fac.factors}
                    for x, fac in rows
                ],
            },
            indent=2,
        ) + "\n"
    if output == "text":
        width = max([len("Set Element")] + [len(str(x)) for x, _ in rows])
        lines = [f"S({r.label}): 9n+{r.residue}", f"{'Set Element':<{width}}  Prime Factorization"]
        lines += [f"{x:<{width}}  {fac}" for x, fac in rows]
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown output format {output!r}")


# -- powers of two inside a set ---------------------------------------------


def expected_exponent_residue(r: Form) -> int:
    """m mod 6 for every power of two 2^m whose form is ``r``."""
    return POWER2_CYCLE.index(r)


@dataclass
class Power2Scan:
    form: Form
    bound: int
    exponents: list[int]
    expected_residue: int
    residues_ok: bool
    non_powers: list[int]

    @property
    def has_non_powers(self) -> bool:
        return bool(self.non_powers)


def power2_exponent_scan(r: Form, bound: int, members: list[int] | None = None) -> Power2Scan:
    if members is None:
        members = build_set(r, bound)
    exps, others = [], []
    for x in members:
        if x & (x - 1):
            others.append(x)
        else:
            exps.append(x.bit_length() - 1)
    want = expected_exponent_residue(r)
    return Power2Scan(r, bound, exps, want, all(m % 6 == want for m in exps), others)


def _diffs(xs: list[int]) -> list[int]:
    return [b - a for a, b in zip(xs, xs[1:])]


@dataclass
class GapReport:
    """Where the powers of two sit inside sorted S(r), in three views:
    1-based position, value, and exponent, each with first and second
    differences.  Purely descriptive."""

    form: Form
    bound: int
    positions: list[int]
    values: list[int]
    exponents: list[int]

    @property
    def position_diffs(self) -> list[int]:
        return _diffs(self.positions)

    @property
    def position_second_diffs(self) -> list[int]:
        return _diffs(self.position_diffs)

    @property
    def value_diffs(self) -> list[int]:
        return _diffs(self.values)

    @property
    def value_second_diffs(self) -> list[int]:
        return _diffs(self.value_diffs)

    @property
    def exponent_diffs(self) -> list[int]:
        return _diffs(self.exponents)

    @property
    def exponent_second_diffs(self) -> list[int]:
        return _diffs(self.exponent_diffs)

    def text(self) -> str:
        def fmt(xs):
            return ", ".join(map(str, xs)) or "-"

        return "\n".join(
            [
                f"powers of two in S({self.form.label}) up to {self.bound}",
                f"values:        {fmt(self.values)}",
                f"exponents:     {fmt(self.exponents)}",
                f"  1st diffs:   {fmt(self.exponent_diffs)}",
                f"  2nd diffs:   {fmt(self.exponent_second_diffs)}",
                f"positions:     {fmt(self.positions)}",
                f"  1st diffs:   {fmt(self.position_diffs)}",
                f"  2nd diffs:   {fmt(self.position_second_diffs)}",
                f"value 1st diffs: {fmt(self.value_diffs)}",
                f"value 2nd diffs: {fmt(self.value_second_diffs)}",
            ]
        ) + "\n"


def gap_progression_report(r: Form, bound: int, members: list[int] | None = None) -> GapReport:
    if members is None:
        members = build_set(r, bound)
    positions, values = [], []
    for i, x in enumerate(members, start=1):
        if x & (x - 1) == 0:
            positions.append(i)
            values.append(x)
    if len(values) < 3:
        raise CollatzError(
            f"S({r.label}) has {len(values)} powers of two up to {bound}; need at least 3"
        )
    return GapReport(r, bound, positions, values, [v.bit_length() - 1 for v in values])
