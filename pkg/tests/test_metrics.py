import numpy as np
import pytest
from hypothesis import given, strategies as st

from dcann import metrics
from dcann.metrics import ConfusionMatrix


def test_hand_computed_case():
    truth = [1, 1, 1, 1, 1, 0, 0, 0, 0, 0]
    pred = [1, 1, 1, 0, 0, 1, 0, 0, 0, 0]
    cm = metrics.confusion(truth, pred)
    assert cm == ConfusionMatrix(tn=4, fp=1, fn=2, tp=3)
    s = metrics.scores(cm)
    assert s.accuracy == pytest.approx(0.7)
    assert s.precision == pytest.approx(0.75)
    assert s.recall == pytest.approx(0.6)
    assert s.f1 == pytest.approx(0.6667, abs=5e-5)
    assert s.mean_prob_actual is None


def test_undefined_ratios_are_none_not_zero():
    s = metrics.scores(metrics.confusion([1, 0, 0], [0, 0, 0]))
    assert s.precision is None and s.f1 is None
    assert s.recall == 0.0
    s = metrics.scores(metrics.confusion([0, 0], [0, 1]))
    assert s.recall is None and s.precision == 0.0
    # precision and recall both zero: f1 undefined
    s = metrics.scores(metrics.confusion([1, 0], [0, 1]))
    assert s.precision == 0.0 and s.recall == 0.0 and s.f1 is None


def test_swapped_positive_class():
    cm = ConfusionMatrix(tn=4, fp=1, fn=2, tp=3)
    sw = cm.swapped()
    assert sw == ConfusionMatrix(tn=3, fp=2, fn=1, tp=4)
    assert metrics.scores(sw).accuracy == metrics.scores(cm).accuracy


def test_evaluate_probabilities_and_ties():
    proba = np.array([[0.9, 0.1], [0.2, 0.8], [0.5, 0.5], [0.4, 0.6]])
    truth = [0, 1, 1, 0]
    cm, s = metrics.evaluate(truth, proba)
    # the tie goes to class 0
    assert cm == ConfusionMatrix(tn=1, fp=1, fn=1, tp=1)
    assert s.mean_prob_actual == pytest.approx((0.9 + 0.8 + 0.5 + 0.4) / 4)
    assert s.mean_prob_predicted == pytest.approx((0.9 + 0.8 + 0.5 + 0.6) / 4)


@pytest.mark.parametrize("truth,pred", [([], []), ([0, 1], [0]), ([0, 2], [0, 1]), ([[0]], [[0]])])
def test_invalid_inputs(truth, pred):
    with pytest.raises(ValueError):
        metrics.confusion(truth, pred)


def test_negative_counts_rejected():
    with pytest.raises(ValueError):
        ConfusionMatrix(-1, 0, 0, 0)


@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=60))
def test_score_identities(pairs):
    truth, pred = zip(*pairs)
    cm = metrics.confusion(truth, pred)
    assert cm.total == len(pairs)
    s = metrics.scores(cm)
    assert 0.0 <= s.accuracy <= 1.0
    assert s.accuracy == pytest.approx(np.mean(np.array(truth) == np.array(pred)))
    if s.f1 is not None:
        assert s.f1 == pytest.approx(2 * s.precision * s.recall / (s.precision + s.recall))
        assert min(s.precision, s.recall) - 1e-12 <= s.f1 <= max(s.precision, s.recall) + 1e-12


@given(st.lists(st.floats(0, 1), min_size=1, max_size=40), st.data())
def test_mean_predicted_probability_is_at_least_half(p1, data):
    proba = np.column_stack([1 - np.array(p1), p1])
    truth = data.draw(st.lists(st.integers(0, 1), min_size=len(p1), max_size=len(p1)))
    _, s = metrics.evaluate(truth, proba)
    assert s.mean_prob_predicted >= 0.5 - 1e-12
    assert s.mean_prob_predicted >= s.mean_prob_actual - 1e-12
