from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from threelevel import doe
from threelevel.errors import AnalysisError
from threelevel.sweep import Axis

nine = st.lists(st.floats(0.0, 1.0, allow_subnormal=False), min_size=9, max_size=9)


def test_design_is_orthogonal_l9():
    d = doe.build_design()
    assert d.cases[5] == (2, 3, 1)
    for f in doe.FACTORS:
        assert sorted(d.column(f)) == [1, 1, 1, 2, 2, 2, 3, 3, 3]


def test_unbalanced_design_rejected():
    bad = doe.DoeDesign(doe.L9_LAYOUT[:8] + ((1, 1, 1),))
    with pytest.raises(AnalysisError):
        bad.check_orthogonal()


def test_level_baths():
    b = doe.DEFAULT_LEVELS.baths((2, 3, 1))
    assert (b.beta_c, b.beta_h, b.g_c_res, b.g_h_res, b.g_c_det, b.g_h_det) == (2.5, 0.5, 2, 2, 0, 0)


def test_range_sums_by_level():
    y = {"P": list(range(1, 10))}
    r = doe.range_analysis(y)
    assert r["P", "dbeta"].K == (6.0, 15.0, 24.0)
    assert r["P", "dbeta"].R == pytest.approx(6.0)
    assert r["P", "dbeta"].optimal_level == 3
    assert r.ranking["P"][0] == "dbeta"


def test_flat_metric_has_no_preference():
    r = doe.range_analysis({"P": [0.5] * 9})
    assert r["P", "D_r"].optimal_level is None
    best = doe.select_best(r, doe.anova({"P": [0.5] * 9}))
    assert best["P"].level_names()["D_r"] == "no preference"


@pytest.mark.parametrize("F", [0.0, 0.5, 2.945, 18.208, 98.592, 1e4])
def test_survival_two_two_closed_form(F):
    assert doe.f_survival(F, 2, 2) == pytest.approx(1 / (1 + F), rel=1e-12)


@pytest.mark.parametrize("F,d1,d2", [(1.3, 2, 5), (4.0, 3, 7), (0.2, 1, 1), (9.0, 2, 20)])
def test_survival_matches_reference(F, d1, d2):
    assert doe.f_survival(F, d1, d2) == pytest.approx(stats.f.sf(F, d1, d2), rel=1e-10)


def test_survival_domain():
    assert doe.f_survival(math.inf, 2, 2) == 0.0
    with pytest.raises(AnalysisError):
        doe.f_survival(-1.0, 2, 2)
    with pytest.raises(AnalysisError):
        doe.f_survival(1.0, 0, 2)


@pytest.mark.parametrize("p,mark", [(0.009, "**"), (0.0100, "*"), (0.049, "*"), (0.05, ""), (0.5, "")])
def test_significance(p, mark):
    assert doe.significance(p) == mark


@settings(max_examples=100)
@given(nine)
def test_sum_of_squares_partition(y):
    t = doe.anova({"P": y})
    s = sum(t["P", f].S for f in doe.FACTORS) + t.error["P"][0]
    assert s == pytest.approx(t.total["P"], abs=1e-12)
    assert t.error["P"][1] == 2


@settings(max_examples=100)
@given(nine, st.floats(0.01, 100.0), st.floats(-5.0, 5.0))
def test_affine_equivariance(y, scale, shift):
    y = np.array(y)
    if np.ptp(y) < 1e-3:
        return
    base_r, moved_r = doe.range_analysis({"P": y}), doe.range_analysis({"P": scale * y + shift})
    base_a, moved_a = doe.anova({"P": y}), doe.anova({"P": scale * y + shift})
    for f in doe.FACTORS:
        assert moved_r["P", f].R == pytest.approx(scale * base_r["P", f].R, rel=1e-9, abs=1e-12)
        assert moved_a["P", f].S == pytest.approx(scale**2 * base_a["P", f].S, rel=1e-8, abs=1e-12)
        if not base_a.saturated["P"] and base_a.error["P"][0] > 1e-9:
            assert moved_a["P", f].F == pytest.approx(base_a["P", f].F, rel=1e-6)


def test_saturated_fit_warns():
    d = doe.build_design()
    y = [sum(case) for case in d.cases]  # purely additive, no residual
    with pytest.warns(RuntimeWarning, match="saturated"):
        t = doe.anova({"P": y})
    assert t.saturated["P"]
    assert all(t["P", f].F == math.inf and t["P", f].p == 0.0 for f in doe.FACTORS)


def test_fixture_loads(tmp_path):
    t = doe.load_fixture("table4")
    assert t["eta"][5] == 0.8 and len(t["P"]) == 9
    text = "case,dbeta,D_r,D_d,P,eta,Peta\n" + "".join(
        f"{i + 1},{a},{b},{c},0.1,0.2,0.3\n" for i, (a, b, c) in enumerate(doe.L9_LAYOUT[:8])
    )
    short = tmp_path / "short.csv"
    short.write_text(text)
    with pytest.raises(AnalysisError, match="expected 9 cases"):
        doe.load_fixture(short)


def test_fixture_level_mismatch(tmp_path):
    rows = [f"{i + 1},{a},{b},{c},0.1,0.2,0.3" for i, (a, b, c) in enumerate(doe.L9_LAYOUT)]
    rows[0] = "1,3,1,1,0.1,0.2,0.3"
    bad = tmp_path / "bad.csv"
    bad.write_text("case,dbeta,D_r,D_d,P,eta,Peta\n" + "\n".join(rows) + "\n")
    with pytest.raises(AnalysisError, match="row 1"):
        doe.load_fixture(bad)


def test_metric_table_needs_nine():
    with pytest.raises(AnalysisError, match="expected 9"):
        doe.range_analysis({"P": [1.0] * 8})


def test_parallel_matches_serial():
    axes = (Axis("omega20", 1.0, 5.0, 7), Axis("lam", 0.0, 1.0, 6))
    serial = doe.run_design(axes=axes, keep_grid=False)
    parallel = doe.run_design(axes=axes, workers=2, keep_grid=False)
    for a, b in zip(serial, parallel):
        assert (a.case_id, a.max_P, a.max_eta, a.argmax_P) == (b.case_id, b.max_P, b.max_eta, b.argmax_P)


def test_case_result_records_argmax():
    axes = (Axis("omega20", 1.0, 5.0, 9), Axis("lam", 0.0, 1.0, 5))
    res = doe.evaluate_case((2, 3, 1), axes=axes, case_id=6)
    k = int(np.nanargmax(np.where(res.grid.values["engine_ok"], res.grid.values["P"], np.nan)))
    assert res.argmax_P == res.grid.coords(k)
    assert res.max_P == res.grid.values["P"][k]
