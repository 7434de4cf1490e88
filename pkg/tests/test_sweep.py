import json
from fractions import Fraction

import pytest

from collatz_forms.core import FORMS, Form
from collatz_forms.sweep import (
    CSV_HEADER,
    SCHEMA_VERSION,
    Checkpoint,
    CheckpointError,
    FrequencyTable,
    checkpoint_resume,
    checkpoint_save,
    emit_table3,
    merge,
    sweep,
)


def table(lo, hi, counts):
    return FrequencyTable(lo, hi, dict(zip(FORMS, counts)))


@pytest.mark.parametrize(
    "n, counts",
    [
        (10, (7, 1, 1, 1, 0, 0)),
        (100, (89, 1, 3, 2, 4, 1)),
        (1000, (959, 2, 29, 2, 7, 1)),
    ],
)
def test_sweep_examples(n, counts):
    res = sweep(n)
    assert res.table.as_tuple() == counts
    assert res.complete


def test_frequencies_exact():
    t = sweep(100).table
    assert sum(t.frequencies.values()) == 1
    assert t.frequencies[Form.a] == Fraction(89, 100)


def test_table_rejects_bad_counts():
    with pytest.raises(ValueError):
        table(1, 10, (7, 1, 1, 1, 0, 1))


def test_merge():
    a = sweep(10).table
    rest = sweep(100).table.as_tuple()
    b = table(11, 100, tuple(x - y for x, y in zip(rest, a.as_tuple())))
    assert merge([b, a]) == sweep(100).table
    assert merge([a]) == a
    thousand = sweep(1000).table.as_tuple()
    upper = table(101, 1000, tuple(x - y for x, y in zip(thousand, rest)))
    assert merge([sweep(100).table, upper]).as_tuple() == (959, 2, 29, 2, 7, 1)


@pytest.mark.parametrize(
    "parts, msg",
    [
        ([(1, 10), (10, 20)], "overlap"),
        ([(1, 10), (12, 20)], "gap"),
        ([(2, 10)], "start at 1"),
    ],
)
def test_merge_rejects_bad_ranges(parts, msg):
    tables = [table(lo, hi, (hi - lo + 1, 0, 0, 0, 0, 0)) for lo, hi in parts]
    with pytest.raises(ValueError, match=msg):
        merge(tables)


def test_capture_defaults():
    res = sweep(10**5)
    assert res.members[Form.a] == []
    assert res.members[Form.d] == [1, 64, 4096]
    assert res.members[Form.b] == [4, 256, 16384]
    assert res.members[Form.f] == [16, 1024, 65536]
    assert len(res.members[Form.e]) == 23
    assert len(res.members[Form.c]) == 2490
    capped = sweep(10**5, member_capture_limit={Form.c: 10})
    assert capped.members[Form.c] == res.members[Form.c][:10]


@pytest.mark.parametrize("workers, chunk", [(1, 7), (2, 1000), (8, 333), (3, 1 << 16)])
def test_determinism(workers, chunk):
    ref = sweep(20_000, member_capture_limit=None)
    got = sweep(20_000, workers=workers, chunk=chunk, thresholds=(10, 20_000))
    assert got.table == ref.table
    assert got.members == ref.members
    assert got.csv() == ref.csv()


def test_python_backend_matches():
    a = sweep(30_000, backend="python")
    b = sweep(30_000)
    assert a.table == b.table and a.members == b.members


def test_snapshots_match_independent_sweeps():
    res = sweep(10**4, thresholds=(10, 100, 1000, 10**4), chunk=777)
    assert [s.hi for s in res.snapshots] == [10, 100, 1000, 10**4]
    for snap in res.snapshots:
        assert snap == sweep(snap.hi).table


def test_emit_table3_csv():
    out = emit_table3([1, 2])
    lines = out.splitlines()
    assert lines[0] == CSV_HEADER
    assert lines[1] == "10,7,1,1,1,0,0,0.700000,0.100000,0.100000,0.100000,0.00000,0.00000"
    assert lines[2].startswith("100,89,1,3,2,4,1,0.890000,0.0100000,0.0300000,0.0200000,0.0400000")


def test_emit_table3_other_formats():
    rec = json.loads(emit_table3([1, 2], "json"))
    assert [r["counts"]["a"] for r in rec["rows"]] == [7, 89]
    assert rec["rows"][1]["frequencies"]["a"] == pytest.approx(0.89)
    text = emit_table3([5], "text")
    assert "3e-05" in text and "97478" in text
    with pytest.raises(ValueError):
        emit_table3([2, 1])
    with pytest.raises(ValueError):
        emit_table3([])


def test_emit_table3_row_1e5():
    row = emit_table3([5]).splitlines()[1].split(",")
    assert row[:7] == ["100000", "97478", "3", "2490", "3", "23", "3"]
    assert row[8] == "3.00000e-05" and row[11] == "0.000230000"


# -- checkpoints ------------------------------------------------------------


def _checkpoint():
    return Checkpoint(
        target_n=100,
        next_unprocessed=51,
        counts=dict(zip(FORMS, (44, 1, 2, 2, 1, 0))),
        members={f: [] for f in FORMS} | {Form.d: [1], Form.c: [2]},
        capture={f: None for f in FORMS} | {Form.a: 0},
        snapshots={10: (7, 1, 1, 1, 0, 0)},
        wall_time=1.25,
    )


def test_checkpoint_roundtrip(tmp_path):
    path = tmp_path / "cp.txt"
    cp = _checkpoint()
    checkpoint_save(cp, path)
    assert checkpoint_resume(path) == cp
    assert path.read_text().splitlines()[-1].startswith("digest=sha256:")


def test_checkpoint_corruption_detected(tmp_path):
    path = tmp_path / "cp.txt"
    checkpoint_save(_checkpoint(), path)
    path.write_text(path.read_text().replace("count.a=44", "count.a=45"))
    with pytest.raises(CheckpointError, match="digest"):
        checkpoint_resume(path)


def test_checkpoint_version_mismatch(tmp_path):
    cp = _checkpoint()
    cp.schema_version = SCHEMA_VERSION + 1
    path = tmp_path / "cp.txt"
    checkpoint_save(cp, path)
    with pytest.raises(CheckpointError, match="schema_version"):
        checkpoint_resume(path)


def test_checkpoint_missing_file(tmp_path):
    with pytest.raises(CheckpointError):
        checkpoint_resume(tmp_path / "nope")


def test_checkpoint_write_failure(tmp_path):
    with pytest.raises(CheckpointError):
        checkpoint_save(_checkpoint(), tmp_path / "missing-dir" / "cp.txt")


def test_resume_matches_uninterrupted(tmp_path):
    path = tmp_path / "run.cp"
    n = 10**6
    thresholds = (10**5, 10**6)
    first = sweep(n, chunk=50_000, checkpoint_path=path, halt_after=5 * 10**5, thresholds=thresholds)
    assert not first.complete
    saved = checkpoint_resume(path)
    assert saved.next_unprocessed == 5 * 10**5 + 1
    assert first.table.hi == 5 * 10**5
    resumed = sweep(n, chunk=50_000, checkpoint_path=path, thresholds=thresholds, workers=2)
    straight = sweep(n, thresholds=thresholds)
    assert resumed.complete
    assert resumed.table == straight.table
    assert resumed.members == straight.members
    assert resumed.snapshots == straight.snapshots
    assert resumed.csv(resumed.snapshots) == straight.csv(straight.snapshots)


def test_resume_rejects_other_target(tmp_path):
    path = tmp_path / "run.cp"
    sweep(1000, chunk=100, checkpoint_path=path, halt_after=300)
    with pytest.raises(CheckpointError, match="targets"):
        sweep(2000, checkpoint_path=path)
