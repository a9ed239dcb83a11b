import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from forgescan.evaluate import (EvalCounts, EvalParams, EvalReport, evaluate_corpus, match_regions,
                                precision_recall)
from forgescan.imaging import save_image, save_mask
from forgescan.regions import Region


def box(x, y, w, h):
    return Region(x, y, w, h, w * h)


def test_identical_box():
    assert match_regions([box(1, 1, 10, 10)], [box(1, 1, 10, 10)]) == EvalCounts(1, 0, 0)


def test_no_predictions():
    gt = [box(0, 0, 5, 5), box(10, 10, 5, 5), box(20, 0, 5, 5)]
    assert match_regions([], gt) == EvalCounts(0, 0, 3)


def test_low_overlap_is_miss():
    assert match_regions([box(0, 0, 10, 10)], [box(5, 0, 10, 10)]) == EvalCounts(0, 1, 1)


def test_one_to_one():
    gt = [box(0, 0, 10, 10)]
    assert match_regions([box(0, 0, 10, 10), box(0, 0, 10, 9)], gt) == EvalCounts(1, 1, 0)


def test_iou_min_validated():
    with pytest.raises(ValueError):
        match_regions([], [], iou_min=0)


def test_precision_recall_examples():
    p, r = precision_recall(EvalCounts(8, 2, 3))
    assert p == 80.0
    assert r == pytest.approx(72.7272727, abs=1e-6)


def test_vacuous():
    c = EvalCounts(0, 0, 0)
    assert precision_recall(c) == (100.0, 100.0)
    assert c.precision_vacuous and c.recall_vacuous


def test_negative_counts_rejected():
    with pytest.raises(ValueError):
        EvalCounts(-1, 0, 0)


@given(st.integers(0, 500), st.integers(0, 500), st.integers(0, 500))
def test_rates_in_range(tp, fp, fn):
    p, r = precision_recall(EvalCounts(tp, fp, fn))
    assert 0 <= p <= 100 and 0 <= r <= 100


@given(st.integers(1, 200), st.integers(0, 200), st.integers(0, 200))
def test_extra_false_positive_lowers_precision_only(tp, fp, fn):
    p0, r0 = precision_recall(EvalCounts(tp, fp, fn))
    p1, r1 = precision_recall(EvalCounts(tp, fp + 1, fn))
    assert p1 < p0 and r1 == r0


def test_removing_matched_prediction_moves_tp_to_fn(rng):
    gt = [box(0, 0, 10, 10), box(30, 30, 8, 8)]
    pred = [box(0, 0, 10, 10), box(30, 30, 8, 8), box(60, 0, 4, 4)]
    full = match_regions(pred, gt)
    less = match_regions(pred[1:], gt)
    assert (full.tp - less.tp, less.fn - full.fn, less.fp - full.fp) == (1, 1, 0)


def _tiny_corpus(tmp_path, with_gt=True):
    img = np.full((64, 64), 60, np.uint8)
    img[16:48, 16:48] = 220
    save_image(img, tmp_path / "f.png")
    save_image(np.full((64, 64), 90, np.uint8), tmp_path / "a.png")
    mask = np.zeros((64, 64), bool)
    mask[16:48, 16:48] = True
    recs = [{"id": "f", "kind": "copy-create", "forged": "f.png", "gt": "fgt.png", "aligned": True,
             "feathered": False},
            {"id": "a", "kind": "authentic", "forged": "a.png", "gt": "agt.png"}]
    if with_gt:
        save_mask(mask, tmp_path / "fgt.png")
    save_mask(np.zeros((64, 64), bool), tmp_path / "agt.png")
    (tmp_path / "manifest.jsonl").write_text("".join(json.dumps(r) + "\n" for r in recs))
    return tmp_path


def test_perfect_detection(tmp_path):
    rep = evaluate_corpus(_tiny_corpus(tmp_path), "direction")
    row = next(r for r in rep.rows if r["id"] == "f")
    assert (row["tp"], row["fp"], row["fn"]) == (1, 0, 0)
    assert row["precision"] == row["recall"] == 100.0
    auth = rep.group("authentic")
    assert auth["tp"] == 0 and auth["fn"] == 0


def test_missing_ground_truth_is_reported(tmp_path):
    rep = evaluate_corpus(_tiny_corpus(tmp_path, with_gt=False), "block")
    assert [e["id"] for e in rep.errors] == ["f"]
    assert [r["id"] for r in rep.rows] == ["a"]


def test_authentic_only_counts_every_detection_as_fp(tmp_path, rng):
    save_image(rng.integers(0, 256, (64, 64)).astype(np.uint8), tmp_path / "a.png")
    save_mask(np.zeros((64, 64), bool), tmp_path / "agt.png")
    (tmp_path / "manifest.jsonl").write_text(json.dumps(
        {"id": "a", "kind": "authentic", "forged": "a.png", "gt": "agt.png"}) + "\n")
    rep = evaluate_corpus(tmp_path, "block", EvalParams(threshold=30))
    row = rep.rows[0]
    assert row["tp"] == 0 and row["fn"] == 0 and row["fp"] == row["n_pred"] > 0


def test_aggregation_permutation_invariant():
    rows = [{"id": str(i), "tp": i % 3, "fp": i % 2, "fn": (i + 1) % 2, "precision": 50.0, "recall": 50.0,
             "groups": ["hard-edge", "total"]} for i in range(10)]
    a = EvalReport("block", EvalParams(), rows=rows).groups()
    b = EvalReport("block", EvalParams(), rows=rows[::-1]).groups()
    assert a == b


def test_params_validation():
    with pytest.raises(ValueError):
        EvalParams.from_dict({"thresh": 3})
    with pytest.raises(ValueError):
        EvalParams.from_dict({"iou_min": 0})
    assert EvalParams.from_dict({"threshold": 55}).threshold == 55


def test_unknown_detector(tmp_path):
    with pytest.raises(ValueError):
        evaluate_corpus(_tiny_corpus(tmp_path), "wavelet")
