import re

import pytest

from dcann import report
from dcann.harness import RunRecord
from dcann.report import FAIL, NOT_EVALUABLE, PASS

V_GRID = (1, 2, 3, 5, 10, 20, 50, 100)


def _curve(method, p, v):
    """Accuracy shaped like the expected behaviour: chance level at v=1, rising with v."""
    top = 0.97 if method == "logit" else 0.98
    bonus = 0.03 if method == "mlp" and 10 <= v <= 50 else 0.0
    return min(0.99, p + (top - p) * (v - 1) / 99 + bonus)


def _records(curve=_curve, ps=(0.5, 0.6, 0.7, 0.8, 0.9), kinds=("continuous", "discrete"), reps=3, spread=None):
    out = []
    for kind in kinds:
        for p in ps:
            for v in V_GRID:
                for rep in range(reps):
                    for method in ("logit", "mlp"):
                        acc = curve(method, p, v)
                        if spread is not None and method == "mlp":
                            acc += spread(p) * (rep - 1)
                        out.append(RunRecord(method, kind, p, v, rep, seed=rep, accuracy=acc,
                                             precision=acc, recall=acc, f1=acc,
                                             mean_prob_actual=acc, mean_prob_predicted=acc))
    return out


def _by_number(results):
    return {r.number: r for r in results}


def test_well_behaved_results_pass_all_hard_checks():
    res = _by_number(report.evaluate(_records(spread=lambda p: 0.02 if p == 0.9 else 0.005), run_selfcheck=False))
    for n in range(1, 8):
        assert res[n].status == PASS, res[n].line()
    assert res[8].status == NOT_EVALUABLE
    assert not report.hard_failures(res.values())


def test_selfcheck_battery_runs():
    res = _by_number(report.evaluate(_records(), run_selfcheck=True))
    assert res[8].status == PASS, res[8].detail


def test_quick_profile_shape_leaves_imbalance_checks_unevaluable():
    recs = [r for r in _records(ps=(0.5,)) if r.n_vars in (1, 5, 10)]
    res = _by_number(report.evaluate(recs, run_selfcheck=False))
    for n in (1, 4, 5, 6):
        assert res[n].status == NOT_EVALUABLE
    assert res[2].status == PASS and res[3].status == PASS


def test_logit_ahead_in_middle_range_fails_check_3():
    def curve(method, p, v):
        return _curve(method, p, v) - (0.05 if method == "mlp" and v == 20 else 0.0)

    res = _by_number(report.evaluate(_records(curve), run_selfcheck=False))
    assert res[3].status == FAIL and "v=[20]" in res[3].detail
    assert res[7].status == FAIL
    assert [r.number for r in report.hard_failures(res.values())] == [3, 7]


def test_low_accuracy_at_full_v_fails_check_1():
    def curve(method, p, v):
        return 0.89 if v == 100 else _curve(method, p, v)

    assert _by_number(report.evaluate(_records(curve), run_selfcheck=False))[1].status == FAIL


def test_gap_at_low_v_fails_check_2():
    def curve(method, p, v):
        return _curve(method, p, v) + (0.06 if method == "mlp" and v == 3 else 0.0)

    assert _by_number(report.evaluate(_records(curve), run_selfcheck=False))[2].status == FAIL


def test_chance_level_check_uses_tolerance():
    def curve(method, p, v):
        return p - 0.06 if (v == 1 and p == 0.7) else _curve(method, p, v)

    res = _by_number(report.evaluate(_records(curve), run_selfcheck=False))
    assert res[4].status == FAIL


def test_non_monotone_logit_fails_check_5():
    def curve(method, p, v):
        if method == "logit" and p == 0.8:
            return 0.9 - v / 1000
        return _curve(method, p, v)

    res = _by_number(report.evaluate(_records(curve), run_selfcheck=False))
    assert res[5].status == FAIL and "p_T=0.8 rho=-1.0000" in res[5].detail


def test_instability_check_is_soft():
    res = _by_number(report.evaluate(_records(spread=lambda p: 0.001 if p == 0.9 else 0.02), run_selfcheck=False))
    assert res[6].status == FAIL and not res[6].hard
    assert not report.hard_failures(res.values())


def test_missing_scores_are_not_evaluable():
    recs = [r if not (r.n_vars == 100 and r.method == "logit") else
            RunRecord(r.method, r.feature_kind, r.p_true, r.n_vars, r.rep, r.seed, error="boom")
            for r in _records()]
    assert _by_number(report.evaluate(recs, run_selfcheck=False))[1].status == NOT_EVALUABLE


def test_empty_results_rejected():
    with pytest.raises(ValueError):
        report.evaluate([])


def test_render_lists_every_check():
    text = report.render(report.evaluate(_records(), run_selfcheck=False))
    assert re.findall(r"^\[[A-Z ]+\] check (\d)", text, flags=re.M) == [str(n) for n in range(1, 9)]
    assert text.strip().endswith("no hard check failed")
