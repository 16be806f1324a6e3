import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from slotmini.metrics import (
    MODEL_ORDER,
    SPLITS,
    MetricError,
    MetricPanel,
    ModelReport,
    build_report,
    metric_panel,
    parse_report_csv,
    report_csv,
    report_table,
)


def test_hand_example():
    # errors (0, 0, 1); SSres = 1, SStot = 2; relative errors (0, 0, 1/3)
    p = metric_panel([1, 2, 3], [1, 2, 4])
    expected = (1 / 3, 1 / 3, math.sqrt(1 / 3), 0.5, 100 * math.sqrt(1 / 27), 100 / 9)
    assert p.as_tuple() == pytest.approx(expected, abs=1e-12)
    assert p.as_tuple() == pytest.approx((0.3333, 0.3333, 0.5774, 0.5, 19.245, 11.111), abs=1e-3)


def test_perfect_prediction():
    a = [1.4, 1.5, 1.7, 1.6]
    assert metric_panel(a, a).as_tuple() == (0.0, 0.0, 0.0, 1.0, 0.0, 0.0)


def test_mean_prediction_has_zero_r2():
    a = np.array([1.0, 2.0, 4.0])
    assert metric_panel(a, np.full(3, a.mean())).r2 == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize(
    "actual,pred,match",
    [
        ([1, 2], [1], "length"),
        ([], [], "no values"),
        ([1, 0, 2], [1, 1, 2], "index 1"),
        ([2, 2, 2], [1, 2, 3], "constant"),
    ],
)
def test_errors(actual, pred, match):
    with pytest.raises(MetricError, match=match):
        metric_panel(actual, pred)


pairs = st.lists(
    st.tuples(st.floats(0.5, 3.0), st.floats(-1.0, 1.0)), min_size=3, max_size=40
).filter(lambda xs: max(a for a, _ in xs) - min(a for a, _ in xs) > 1e-3)


@given(pairs, st.floats(0.1, 10.0))
def test_scale_equivariance(xs, k):
    a = np.array([x for x, _ in xs])
    p = a + np.array([e for _, e in xs])
    base, scaled = metric_panel(a, p), metric_panel(k * a, k * p)
    assert scaled.r2 == pytest.approx(base.r2, rel=1e-9, abs=1e-9)
    assert scaled.mape == pytest.approx(base.mape, rel=1e-9)
    assert scaled.rmspe == pytest.approx(base.rmspe, rel=1e-9)
    assert scaled.mae == pytest.approx(k * base.mae, rel=1e-9)
    assert scaled.rmse == pytest.approx(k * base.rmse, rel=1e-9)
    assert scaled.mse == pytest.approx(k * k * base.mse, rel=1e-9)


@given(pairs, st.randoms(use_true_random=False))
def test_permutation_invariance(xs, rnd):
    a = np.array([x for x, _ in xs])
    p = a + np.array([e for _, e in xs])
    idx = list(range(len(a)))
    rnd.shuffle(idx)
    assert metric_panel(a[idx], p[idx]).as_tuple() == pytest.approx(metric_panel(a, p).as_tuple(), rel=1e-12, abs=1e-12)


@given(pairs)
def test_panel_invariants(xs):
    a = np.array([x for x, _ in xs])
    p = a + np.array([e for _, e in xs])
    m = metric_panel(a, p)
    assert m.mae <= m.rmse + 1e-15
    assert m.rmse == math.sqrt(m.mse)
    assert m.r2 <= 1.0


def _perfect_splits():
    rng = np.random.default_rng(0)
    return {s: (rng.random((5, 2)), rng.random(5) + 1.0) for s in SPLITS}


def test_perfect_model_report():
    splits = _perfect_splits()
    lookup = {X.tobytes(): y for X, y in splits.values()}
    rep = build_report("Random Forest", lambda X: lookup[X.tobytes()], splits)
    for s in SPLITS:
        assert rep.panels[s].as_tuple() == (0.0, 0.0, 0.0, 1.0, 0.0, 0.0)


def _report(name, shift):
    splits = _perfect_splits()
    return build_report(name, lambda X: X.sum(axis=1) + shift, splits)


def test_report_csv_layout_and_round_trip():
    reports = [_report(n, i * 0.1) for i, n in enumerate(reversed(MODEL_ORDER))]
    text = report_csv(reports)
    lines = text.splitlines()
    assert lines[0] == "model,split,mae,mse,rmse,r2,rmspe,mape"
    body = [l.split(",") for l in lines[1:]]
    assert [(r[0], r[1]) for r in body] == [(m, s) for m in MODEL_ORDER for s in SPLITS]
    numbers = [v for r in body for v in r[2:]]
    assert len(numbers) == 72
    assert all(len(v.split(".")[1]) == 4 for v in numbers)

    parsed = {r.model: r for r in parse_report_csv(text)}
    for rep in reports:
        for s in SPLITS:
            assert parsed[rep.model].panels[s].as_tuple() == pytest.approx(rep.panels[s].as_tuple(), abs=5e-5)
    assert report_csv(parse_report_csv(text)) == text


def test_report_requires_all_splits():
    with pytest.raises(MetricError):
        ModelReport("SVM", {"train": MetricPanel.missing()})


def test_table_mentions_every_model():
    reports = [_report(n, 0.05) for n in MODEL_ORDER]
    table = report_table(reports)
    for n in MODEL_ORDER:
        assert table.count(n) == 3
    assert "Validation" in table
