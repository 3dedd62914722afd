import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lulc.metrics import confusion, one_vs_rest, report, save_confusion_csv, save_report_csv, scores
from metrics_oracle import recount


def test_perfect_confusion_is_diagonal():
    cm = confusion([0, 1, 2, 2], [0, 1, 2, 2], 3)
    np.testing.assert_array_equal(cm.counts, np.diag([1, 1, 2]))
    for c in range(3):
        _, _, fp, fn = one_vs_rest(cm, c)
        assert fp == fn == 0


def test_single_sample_confusion():
    cm = confusion([0], [1], 2)
    np.testing.assert_array_equal(cm.counts, [[0, 1], [0, 0]])


def test_one_vs_rest_cells():
    from lulc.metrics import ConfusionMatrix

    cm = ConfusionMatrix(np.array([[8, 1], [1, 90]]))
    assert one_vs_rest(cm, 0) == (8, 90, 1, 1)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6), st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5)), min_size=1, max_size=60))
def test_confusion_conservation(c, pairs):
    t = [a % c for a, _ in pairs]
    p = [b % c for _, b in pairs]
    cm = confusion(t, p, c)
    assert cm.total == len(pairs)
    for k in range(c):
        assert sum(one_vs_rest(cm, k)) == len(pairs)


def test_scores_direct_values():
    s = scores(8, 90, 1, 1)
    assert s.accuracy == 98.0
    assert s.recall == pytest.approx(800 / 9, abs=1e-12)
    assert s.precision == pytest.approx(800 / 9, abs=1e-12)
    s = scores(5, 3, 0, 0)
    assert (s.accuracy, s.precision, s.recall) == (100.0, 100.0, 100.0)
    assert scores(0, 3, 2, 4).recall == 0.0


def test_scores_zero_denominators_are_flagged():
    s = scores(0, 10, 0, 0)
    assert (s.precision, s.recall) == (0.0, 0.0)
    assert set(s.undefined) == {"precision", "recall"}
    with pytest.raises(ValueError):
        scores(0, 0, 0, 0)


def test_perfect_report():
    rep = report([0, 1, 2, 1], [0, 1, 2, 1], 3, ["a", "b", "c"])
    for s in rep.per_class + [rep.overall]:
        assert (s.accuracy, s.precision, s.recall) == (100.0, 100.0, 100.0)


def test_report_matches_recount():
    rng = np.random.default_rng(0)
    for _ in range(200):
        c = int(rng.integers(2, 7))
        n = int(rng.integers(1, 50))
        t, p = rng.integers(0, c, n), rng.integers(0, c, n)
        rep = report(t, p, c)
        oracle = recount(t.tolist(), p.tolist(), c)
        for s, (a, pr, r) in zip(rep.per_class, oracle):
            assert (s.accuracy, s.precision, s.recall) == pytest.approx((a, pr, r), abs=1e-12)
        assert rep.overall.precision == pytest.approx(np.mean([o[1] for o in oracle]), abs=1e-12)


def test_micro_average():
    rep = report([0, 0, 1, 2], [0, 1, 1, 1], 3, average="micro")
    # pooled one-vs-rest counts: TP 2, FP 2, FN 2, TN 6
    assert rep.overall.accuracy == pytest.approx(100 * 8 / 12)
    assert rep.overall.precision == 50.0 and rep.overall.recall == 50.0


def test_report_validation():
    with pytest.raises(ValueError):
        report([0, 3], [0, 1], 3)
    with pytest.raises(ValueError):
        report([0, 1], [0], 2)
    with pytest.raises(ValueError):
        report([0], [0], 2, ["only"])


def test_csv_outputs(tmp_path):
    rep = report([0, 1, 1], [0, 1, 0], 2, ["water", "crop"])
    save_report_csv(rep, tmp_path / "r.csv")
    save_confusion_csv(rep, tmp_path / "c.csv")
    rows = list(csv.reader(open(tmp_path / "r.csv")))
    assert rows[0] == ["class", "accuracy", "precision", "recall", "undefined_flags"]
    assert [r[0] for r in rows[1:]] == ["water", "crop", "overall"]
    assert float(rows[1][2]) == 50.0
    conf = list(csv.reader(open(tmp_path / "c.csv")))
    assert conf == [["", "water", "crop"], ["water", "1", "0"], ["crop", "1", "1"]]
