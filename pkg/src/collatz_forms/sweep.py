"""Enumeration of terminating forms over [1, N].

Counts are kept as exact integers; frequencies are rendered only on output.
Blocks are classified in ascending order (optionally on a thread pool) and
merged in block order, so results do not depend on worker count or chunk
size.
"""
from __future__ import annotations

import hashlib
import io
import json
import logging
import os
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .classifier import (
    DEFAULT_CHUNK,
    DEFAULT_MEMO_BUDGET,
    DEFAULT_STEP_CAP,
    iter_blocks,
    new_memo,
    split_range,
)
from .core import FORMS, CollatzError, Form

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
CSV_HEADER = "N,N_a,N_b,N_c,N_d,N_e,N_f,freq_a,freq_b,freq_c,freq_d,freq_e,freq_f"

# None means unlimited
DEFAULT_CAPTURE: dict[Form, int | None] = {
    Form.a: 0,
    Form.b: None,
    Form.c: 100_000,
    Form.d: None,
    Form.e: None,
    Form.f: None,
}


class CheckpointError(CollatzError):
    pass


@dataclass(frozen=True)
class FrequencyTable:
    """Per-form counts for the starts in [lo, hi]."""

    lo: int
    hi: int
    counts: dict[Form, int]

    def __post_init__(self):
        if sum(self.counts.values()) != self.n_total:
            raise ValueError(
                f"counts sum to {sum(self.counts.values())}, expected {self.n_total}"
            )

    @property
    def n_total(self) -> int:
        return self.hi - self.lo + 1

    @property
    def frequencies(self) -> dict[Form, Fraction]:
        return {form: Fraction(self.counts[form], self.n_total) for form in FORMS}

    def as_tuple(self) -> tuple[int, ...]:
        return tuple(self.counts[form] for form in FORMS)

    def csv_row(self) -> str:
        freqs = [format(float(self.frequencies[f]), "#.6g") for f in FORMS]
        return ",".join([str(self.hi), *map(str, self.as_tuple()), *freqs])

    def to_record(self) -> dict:
        return {
            "N": self.hi,
            "lo": self.lo,
            "counts": {f.label: self.counts[f] for f in FORMS},
            "frequencies": {f.label: float(self.frequencies[f]) for f in FORMS},
        }


def merge(tables: list[FrequencyTable]) -> FrequencyTable:
    """Add up tables over consecutive disjoint ranges starting at 1."""
    if not tables:
        raise ValueError("nothing to merge")
    ordered = sorted(tables, key=lambda t: t.lo)
    if ordered[0].lo != 1:
        raise ValueError(f"merged ranges must start at 1, first starts at {ordered[0].lo}")
    for prev, cur in zip(ordered, ordered[1:]):
        if cur.lo <= prev.hi:
            raise ValueError(f"ranges [{prev.lo},{prev.hi}] and [{cur.lo},{cur.hi}] overlap")
        if cur.lo != prev.hi + 1:
            raise ValueError(f"gap between {prev.hi} and {cur.lo}")
    counts = {f: sum(t.counts[f] for t in ordered) for f in FORMS}
    return FrequencyTable(1, ordered[-1].hi, counts)


@dataclass
class Checkpoint:
    target_n: int
    next_unprocessed: int
    counts: dict[Form, int]
    members: dict[Form, list[int]]
    capture: dict[Form, int | None]
    snapshots: dict[int, tuple[int, ...]] = field(default_factory=dict)
    wall_time: float = 0.0
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if not 1 <= self.next_unprocessed <= self.target_n + 1:
            raise CheckpointError(
                f"next_unprocessed {self.next_unprocessed} outside [1, {self.target_n + 1}]"
            )

    # file format: "key=value" lines, then a final "digest=sha256:<hex>" line
    # covering every byte before it
    def dumps(self) -> str:
        lines = [
            f"schema_version={self.schema_version}",
            f"target_n={self.target_n}",
            f"next_unprocessed={self.next_unprocessed}",
            f"wall_time={self.wall_time!r}",
        ]
        for f in FORMS:
            lines.append(f"count.{f.label}={self.counts[f]}")
        for f in FORMS:
            limit = self.capture[f]
            lines.append(f"capture.{f.label}={'none' if limit is None else limit}")
        for f in FORMS:
            lines.append(f"members.{f.label}=" + ",".join(map(str, self.members[f])))
        for n, counts in sorted(self.snapshots.items()):
            lines.append(f"snapshot.{n}=" + ",".join(map(str, counts)))
        body = "\n".join(lines) + "\n"
        digest = hashlib.sha256(body.encode()).hexdigest()
        return body + f"digest=sha256:{digest}\n"

    @classmethod
    def loads(cls, text: str) -> Checkpoint:
        body, sep, tail = text.rpartition("digest=sha256:")
        if not sep or hashlib.sha256(body.encode()).hexdigest() != tail.strip():
            raise CheckpointError("checkpoint digest mismatch (corrupted or truncated file)")
        kv = {}
        for line in body.splitlines():
            key, _, value = line.partition("=")
            kv[key] = value
        try:
            version = int(kv["schema_version"])
            if version != SCHEMA_VERSION:
                raise CheckpointError(
                    f"checkpoint schema_version {version}, this build reads {SCHEMA_VERSION}"
                )
            counts = {f: int(kv[f"count.{f.label}"]) for f in FORMS}
            capture = {
                f: None if kv[f"capture.{f.label}"] == "none" else int(kv[f"capture.{f.label}"])
                for f in FORMS
            }
            members = {
                f: [int(x) for x in kv[f"members.{f.label}"].split(",") if x] for f in FORMS
            }
            snapshots = {
                int(k.split(".", 1)[1]): tuple(int(x) for x in v.split(","))
                for k, v in kv.items()
                if k.startswith("snapshot.")
            }
            return cls(
                target_n=int(kv["target_n"]),
                next_unprocessed=int(kv["next_unprocessed"]),
                counts=counts,
                members=members,
                capture=capture,
                snapshots=snapshots,
                wall_time=float(kv["wall_time"]),
                schema_version=version,
            )
        except (KeyError, ValueError) as exc:
            raise CheckpointError(f"malformed checkpoint: {exc}") from exc


def checkpoint_save(cp: Checkpoint, path: str | os.PathLike) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    try:
        tmp.write_text(cp.dumps())
        os.replace(tmp, path)
    except OSError as exc:
        raise CheckpointError(f"cannot write checkpoint {path}: {exc}") from exc


def checkpoint_resume(path: str | os.PathLike) -> Checkpoint:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    return Checkpoint.loads(text)


@dataclass
class SweepResult:
    table: FrequencyTable
    members: dict[Form, list[int]]
    snapshots: list[FrequencyTable]
    complete: bool = True
    elapsed: float = 0.0

    def csv(self, rows: list[FrequencyTable] | None = None) -> str:
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        for row in rows if rows is not None else [self.table]:
            buf.write(row.csv_row() + "\n")
        return buf.getvalue()

    def to_record(self, rows: list[FrequencyTable] | None = None) -> dict:
        return {
            "rows": [r.to_record() for r in (rows if rows is not None else [self.table])],
            "members": {f.label: self.members[f] for f in FORMS},
            "complete": self.complete,
        }

    def json(self, rows: list[FrequencyTable] | None = None) -> str:
        return json.dumps(self.to_record(rows), indent=2) + "\n"


def _resolve_capture(limit) -> dict[Form, int | None]:
    if limit is None:
        return dict(DEFAULT_CAPTURE)
    if isinstance(limit, int):
        return {f: limit for f in FORMS}
    return {f: limit.get(f, DEFAULT_CAPTURE[f]) for f in FORMS}


def sweep(
    n: int,
    workers: int = 1,
    chunk: int = DEFAULT_CHUNK,
    member_capture_limit: int | dict[Form, int | None] | None = None,
    checkpoint_path: str | os.PathLike | None = None,
    *,
    thresholds: tuple[int, ...] = (),
    memo: bool = True,
    memo_budget: int = DEFAULT_MEMO_BUDGET,
    step_cap: int = DEFAULT_STEP_CAP,
    backend: str = "numba",
    halt_after: int | None = None,
    checkpoint_every: float = 60.0,
) -> SweepResult:
    """Classify every start in [1, n] and tally terminating forms.

    ``thresholds`` adds snapshot rows (counts over [1, t]) for each t <= n.
    With ``checkpoint_path`` progress is saved periodically and an existing
    checkpoint for the same ``n`` is resumed.  ``halt_after`` stops (and
    checkpoints) once every start up to that value is done, for staged runs.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    capture = _resolve_capture(member_capture_limit)
    cuts = tuple(sorted({t for t in thresholds if 1 <= t <= n}))

    cp = None
    if checkpoint_path is not None and Path(checkpoint_path).exists():
        cp = checkpoint_resume(checkpoint_path)
        if cp.target_n != n:
            raise CheckpointError(f"checkpoint targets N={cp.target_n}, run asks for N={n}")
        if cp.capture != capture:
            raise CheckpointError("checkpoint was written with different capture limits")
        log.info("resuming at %d of %d", cp.next_unprocessed, n)
    if cp is None:
        cp = Checkpoint(
            target_n=n,
            next_unprocessed=1,
            counts={f: 0 for f in FORMS},
            members={f: [] for f in FORMS},
            capture=capture,
        )

    t0 = time.perf_counter()
    base_wall = cp.wall_time
    last_save = t0
    table = new_memo(n, memo_budget) if memo else None
    lo = cp.next_unprocessed
    blocks = split_range(lo, n, chunk, cuts) if lo <= n else []
    halted = False

    running = np.array([cp.counts[f] for f in FORMS], dtype=np.int64)
    for blo, bhi, codes in iter_blocks(blocks, table, step_cap, workers, backend):
        running += np.bincount(codes, minlength=len(FORMS) + 1)[1:]
        for f in FORMS:
            limit = capture[f]
            have = cp.members[f]
            if limit is not None and len(have) >= limit:
                continue
            hits = np.flatnonzero(codes == f.code) + blo
            if limit is not None:
                hits = hits[: limit - len(have)]
            have.extend(hits.tolist())
        cp.next_unprocessed = bhi + 1
        cp.counts = {f: int(c) for f, c in zip(FORMS, running)}
        if bhi in cuts:
            cp.snapshots[bhi] = tuple(int(c) for c in running)
        now = time.perf_counter()
        if halt_after is not None and bhi >= halt_after and bhi < n:
            halted = True
        if checkpoint_path is not None and (halted or now - last_save >= checkpoint_every):
            cp.wall_time = base_wall + now - t0
            checkpoint_save(cp, checkpoint_path)
            last_save = now
        if halted:
            break

    elapsed = time.perf_counter() - t0
    cp.wall_time = base_wall + elapsed
    if checkpoint_path is not None:
        checkpoint_save(cp, checkpoint_path)
    done = cp.next_unprocessed - 1
    result = SweepResult(
        table=FrequencyTable(1, done, cp.counts) if done else None,
        members={f: list(cp.members[f]) for f in FORMS},
        snapshots=[
            FrequencyTable(1, t, dict(zip(FORMS, cp.snapshots[t])))
            for t in cuts
            if t in cp.snapshots
        ],
        complete=not halted,
        elapsed=cp.wall_time,
    )
    return result


def emit_table3(
    powers: list[int],
    output: str = "csv",
    *,
    workers: int = 1,
    chunk: int = DEFAULT_CHUNK,
    **kwargs,
) -> str:
    """Frequency rows for N = 10^p, all taken from a single sweep to the largest N."""
    if not powers:
        raise ValueError("powers must be nonempty")
    if list(powers) != sorted(set(powers)) or powers[0] < 0:
        raise ValueError("powers must be ascending, distinct and nonnegative")
    thresholds = tuple(10**p for p in powers)
    result = sweep(thresholds[-1], workers, chunk, thresholds=thresholds, **kwargs)
    return render_rows(result, result.snapshots, output)


def render_rows(result: SweepResult, rows: list[FrequencyTable], output: str) -> str:
    if output == "csv":
        return result.csv(rows)
    if output in ("json", "structured"):
        return result.json(rows)
    if output == "text":
        head = f"{'N':>12} " + " ".join(f"{'N(' + f.label + ')':>12}" for f in FORMS)
        lines = [head]
        for row in rows:
            fr = row.frequencies
            lines.append(
                f"{row.hi:>12} " + " ".join(f"{float(fr[f]):>12.6g}" for f in FORMS)
            )
            lines.append(f"{'':>12} " + " ".join(f"{row.counts[f]:>12}" for f in FORMS))
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown output format {output!r}")
