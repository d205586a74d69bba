"""Acceptance criteria A1-A10, one test each, printing a PASS/FAIL line."""
from __future__ import annotations

import time

import numpy as np
import pytest

from conftest import report
from threelevel import doe, gkls, kinetic
from threelevel.model import BathSpec, EngineSpec, carnot_efficiency, dressed_energies
from threelevel.validate import random_config

# Published range analysis: rows K1 K2 K3 Kbar1 Kbar2 Kbar3 R, columns
# (P, eta, Peta) x (dbeta, D_r, D_d).
PUBLISHED_RANGE = np.array([
    [0.092, 0.066, 0.173, 1.762, 2.086, 2.400, 0.039, 0.035, 0.113],
    [0.171, 0.105, 0.129, 2.062, 1.872, 1.926, 0.098, 0.057, 0.059],
    [0.108, 0.199, 0.069, 1.873, 1.739, 1.371, 0.053, 0.099, 0.019],
    [0.031, 0.022, 0.058, 0.587, 0.695, 0.800, 0.013, 0.012, 0.038],
    [0.057, 0.035, 0.043, 0.687, 0.624, 0.642, 0.033, 0.019, 0.020],
    [0.036, 0.066, 0.023, 0.624, 0.580, 0.457, 0.018, 0.033, 0.006],
    [0.026, 0.044, 0.035, 0.100, 0.116, 0.343, 0.020, 0.022, 0.031],
])

# Published ANOVA: (S, F, p, mark) per (metric, factor).
PUBLISHED_ANOVA = {
    ("P", "dbeta"): (1.17e-3, 6.814, 0.128, ""),
    ("P", "D_r"): (3.13e-3, 18.208, 0.052, ""),
    ("P", "D_d"): (1.83e-3, 10.645, 0.086, ""),
    ("eta", "dbeta"): (1.53e-2, 8.511, 0.105, ""),
    ("eta", "D_r"): (2.05e-2, 11.399, 0.081, ""),
    ("eta", "D_d"): (1.77e-1, 98.592, 0.010, "*"),
    ("Peta", "dbeta"): (6.26e-4, 2.945, 0.253, ""),
    ("Peta", "D_r"): (7.18e-4, 3.377, 0.228, ""),
    ("Peta", "D_d"): (1.48e-3, 6.941, 0.126, ""),
}

PUBLISHED_BEST = {
    "P": {"D_d": "low", "D_r": "high", "dbeta": "medium"},
    "eta": {"D_d": "low", "D_r": "low", "dbeta": "medium"},
    "Peta": {"D_d": "low", "D_r": "high", "dbeta": "medium"},
}

PUBLISHED_LEAK = {"low": 3.760, "medium": 2.639, "high": 6.415}
UNIFORM_POINT = EngineSpec(2.6, 0.5)


def test_a1_range_analysis_fixture():
    start = time.perf_counter()
    table = doe.load_fixture("table4")
    ranges = doe.range_analysis(table)
    elapsed = time.perf_counter() - start
    got = np.empty_like(PUBLISHED_RANGE)
    for col, (m, f) in enumerate((m, f) for m in doe.METRICS for f in doe.FACTORS):
        e = ranges[m, f]
        got[:, col] = [*e.K, *e.Kbar, e.R]
    worst = float(np.max(np.abs(got - PUBLISHED_RANGE)))
    ok = worst <= 0.0015 and elapsed < 1.0
    report("A1", ok, f"max |K, Kbar, R - published| = {worst:.5f} (<= 0.0015), {elapsed * 1e3:.1f} ms")
    assert ok


def test_a2_anova_fixture():
    t = doe.anova(doe.load_fixture("table4"))
    s_dev = {k: abs(t[k].S - v[0]) / v[0] for k, v in PUBLISHED_ANOVA.items()}
    p_dev = {k: abs(doe.f_survival(v[1], 2, 2) - v[2]) for k, v in PUBLISHED_ANOVA.items()}
    marks = {k: doe.significance(doe.f_survival(v[1], 2, 2)) for k, v in PUBLISHED_ANOVA.items()}
    marks_ok = all(marks[k] == v[3] for k, v in PUBLISHED_ANOVA.items())
    worst_s = max(s_dev, key=s_dev.get)
    for k in PUBLISHED_ANOVA:
        print(f"  {k[0]:>4} {k[1]:>5}: S dev {s_dev[k]:.2%}  F recomputed {t[k].F:8.3f} "
              f"(printed {PUBLISHED_ANOVA[k][1]})  mark recomputed {t[k].mark or '-'}")
    ok = s_dev[worst_s] <= 0.03 and max(p_dev.values()) <= 0.001 and marks_ok
    report("A2", ok,
           f"max S dev {s_dev[worst_s]:.2%} at {worst_s} (<= 3%), "
           f"max |p - printed| {max(p_dev.values()):.4f}, marks match: {marks_ok}")
    assert ok


def test_a3_coupling_efficiency_anchor():
    inv = []
    for bc, bh in ((5, 1), (2.5, 0.5), (1, 0.2)):
        fr = dressed_energies(UNIFORM_POINT)
        inv.append(1 / kinetic.coupling_efficiency(fr, BathSpec(bc, bh, 2, 2, 2, 2)).eta_cp)
    ok = all(abs(v - 1.309) <= 0.002 for v in inv) and max(inv) == min(inv)
    report("A3", ok, f"1/eta_CP = {inv[0]:.5f}, spread {max(inv) - min(inv):.1e}")
    assert ok


def test_a4_carnot_anchor():
    vals = [carnot_efficiency(BathSpec(bc, bh, 1, 1)) for bc, bh in ((5, 1), (2.5, 0.5), (1, 0.2))]
    ok = all(v == 0.8 for v in vals)
    report("A4", ok, f"eta_C = {vals}")
    assert ok


def test_a5_efficiency_ceiling(kinetic_design):
    results, _ = kinetic_design
    published = doe.load_fixture("table4")
    eta = np.array([r.max_eta for r in results])
    carnot = np.array([carnot_efficiency(doe.DEFAULT_LEVELS.baths(r.levels)) for r in results])
    at_ceiling = all(abs(eta[i] - 0.8) <= 0.005 for i in (0, 5, 7))
    below = bool(np.all(eta <= carnot + 1e-9))
    pub = np.array(published["eta"])
    # every strict published order between two cases must be reproduced
    pairs = [(i, j) for i in range(9) for j in range(9) if pub[i] > pub[j]]
    ranking_ok = all(eta[i] > eta[j] for i, j in pairs)
    sigma_ok = all(r.min_sigma >= -1e-9 for r in results)
    for r in results:
        i = r.case_id - 1
        print(f"  case {r.case_id}: P {r.max_P:.4f} [{published['P'][i]:.3f}]  "
              f"eta {r.max_eta:.4f} [{pub[i]:.3f}]  Peta {r.max_Peta:.5f} [{published['Peta'][i]:.3f}]")
    ok = at_ceiling and below and ranking_ok and sigma_ok
    report("A5", ok, f"cases 1,6,8 eta = {eta[0]:.4f}, {eta[5]:.4f}, {eta[7]:.4f}; "
                     f"<= Carnot: {below}; eta ranking: {ranking_ok}; sigma >= 0: {sigma_ok}")
    assert ok


def test_a6_second_law(kinetic_design):
    results, elapsed = kinetic_design
    mins = [r.min_sigma + 0.0 for r in results]
    ok = all(-1e-9 <= s <= 1e-6 for s in mins) and elapsed < 60
    report("A6", ok, f"min <sigma> in [{min(mins):.2e}, {max(mins):.2e}], all grids {elapsed:.1f} s")
    assert ok


def _box_config(rng):
    # the parameter box spanned by the factor levels
    spec, _ = random_config(rng)
    bh = rng.uniform(0.2, 1.0)
    baths = BathSpec(rng.uniform(1.0, 5.0) + bh, bh, *rng.uniform(0.5, 2.0, 2), *rng.uniform(0.0, 2.0, 2))
    return spec, baths


def test_a7_gkls_physicality_and_oracle():
    rng = np.random.default_rng(2024)
    worst = {"residual": 0.0, "trace": 0.0, "eig": 0.0, "dist": 0.0}
    for _ in range(20):
        spec, baths = _box_config(rng)
        gen = gkls.build_generator(spec, baths)
        rho = gkls.steady_state(gen)
        worst["residual"] = max(worst["residual"], float(np.linalg.norm(gen.matrix @ gkls.vec(rho))))
        worst["trace"] = max(worst["trace"], abs(complex(np.trace(rho)) - 1))
        worst["eig"] = min(worst["eig"], float(np.linalg.eigvalsh(rho)[0]))
        start = np.diag([1.0, 0.0, 0.0]).astype(complex)
        worst["dist"] = max(worst["dist"], gkls.trace_distance(rho, gkls.relax_to_steady(gen, start)))
    ok = (worst["residual"] <= 1e-10 and worst["trace"] <= 1e-12
          and worst["eig"] >= -1e-12 and worst["dist"] <= 1e-6)
    report("A7", ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))
    assert ok


@pytest.fixture(scope="module")
def gkls_cases():
    design = doe.build_design()
    return {c: doe.evaluate_case(design.cases[c - 1], engine="gkls", case_id=c) for c in (1, 2, 6, 8, 9)}


def test_a8_friction_free_plateau(gkls_cases):
    plateau, detail = True, []
    for c in (1, 6, 8):
        v = gkls_cases[c].grid.values
        ok_cells = v["engine_ok"]
        inv, mode = v["inv_eta_nd"][ok_cells], v["mode"][ok_cells]
        good = ok_cells.any() and np.all((inv >= 0.45) & (inv <= 0.55)) and np.all(mode == 2)
        plateau &= bool(good)
        detail.append(f"case {c}: {ok_cells.sum()} engine cells, 1/eta_nd in "
                      f"[{inv.min():.6f}, {inv.max():.6f}]")
    other = {c: sorted({int(m) for m in gkls_cases[c].grid.values["mode"]} - {0}) for c in (2, 9)}
    colored = any(m in (1, 3) for c in (2, 9) for m in other[c])
    ok = plateau and colored
    report("A8", ok, "; ".join(detail) + f"; modes seen case 2 {other[2]}, case 9 {other[9]}")
    assert ok


def test_a9_leakage_ordering():
    ratios = {}
    for name, (bc, bh) in zip(doe.LEVEL_NAMES, doe.DEFAULT_LEVELS.dbeta):
        rep = kinetic.evaluate(UNIFORM_POINT, BathSpec(bc, bh, 2, 2, 2, 2))
        ratios[name] = rep.leak_ratio
        assert rep.leak == pytest.approx(kinetic.leak_population_form(UNIFORM_POINT, BathSpec(bc, bh, 2, 2, 2, 2)))
    for name, v in ratios.items():
        print(f"  {name:>6} dbeta: leak/P = {v:.3f} (published {PUBLISHED_LEAK[name]:.3f}, "
              f"rel dev {(v - PUBLISHED_LEAK[name]) / PUBLISHED_LEAK[name]:+.1%})")
    ok = ratios["medium"] < ratios["low"] < ratios["high"]
    report("A9", ok, "leak/P low {low:.3f}, medium {medium:.3f}, high {high:.3f}; "
                     "required medium < low < high".format(**ratios))
    assert ok


def test_a10_qualitative_conclusions():
    table = doe.load_fixture("table4")
    ranges = doe.range_analysis(table)
    best = doe.select_best(ranges, doe.anova(table))
    rank_ok = (ranges.ranking["P"] == ("D_r", "D_d", "dbeta")
               and ranges.ranking["eta"] == ("D_d", "D_r", "dbeta")
               and ranges.ranking["Peta"] == ("D_d", "D_r", "dbeta"))
    best_ok = all(best[m].level_names() == PUBLISHED_BEST[m] for m in doe.METRICS)
    ok = rank_ok and best_ok
    report("A10", ok, f"R ranking P {'>'.join(ranges.ranking['P'])}, eta {'>'.join(ranges.ranking['eta'])}, "
                      f"Peta {'>'.join(ranges.ranking['Peta'])}; Table-7 combinations match: {best_ok}")
    assert ok
