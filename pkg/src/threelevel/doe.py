"""L9(3^3) orthogonal test: design, case evaluation, range analysis, ANOVA.

Factors are the temperature difference (``dbeta``), resonant dissipation
(``D_r``) and detuning dissipation (``D_d``), each at three levels.
"""
from __future__ import annotations

import csv
import itertools
import math
import warnings
from collections.abc import Mapping, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
from scipy import special

from . import kinetic
from .errors import AnalysisError
from .model import BathSpec
from .sweep import DEFAULT_AXES, Axis, SweepGrid, run_sweep

FACTORS = ("dbeta", "D_r", "D_d")
METRICS = ("P", "eta", "Peta")
LEVEL_NAMES = ("low", "medium", "high")

L9_LAYOUT = (
    (1, 1, 1), (1, 2, 3), (1, 3, 2),
    (2, 1, 3), (2, 2, 2), (2, 3, 1),
    (3, 1, 2), (3, 2, 1), (3, 3, 3),
)


@dataclass(frozen=True)
class FactorLevels:
    """Level definitions, each a pair in units of omega10.

    ``dbeta``: ``(beta_c w10, beta_h w10)``; ``D_r``: ``(gamma_c(eps10),
    gamma_h(eps20))``; ``D_d``: ``(gamma_c(eps20), gamma_h(eps10))``.
    """

    dbeta: tuple = ((5.0, 1.0), (2.5, 0.5), (1.0, 0.2))
    D_r: tuple = ((0.5, 0.5), (1.0, 1.0), (2.0, 2.0))
    D_d: tuple = ((0.0, 0.0), (0.5, 0.5), (2.0, 2.0))
    omega10: float = 1.0

    def __post_init__(self):
        for name in FACTORS:
            levels = tuple(tuple(float(x) for x in pair) for pair in getattr(self, name))
            if len(levels) != 3 or any(len(pair) != 2 for pair in levels):
                raise AnalysisError(f"factor {name} needs exactly 3 levels of 2 values")
            object.__setattr__(self, name, levels)
        for bc, bh in self.dbeta:
            if bc <= 0 or bh <= 0:
                raise AnalysisError("temperatures must be > 0")
        for pair in self.D_r + self.D_d:
            if min(pair) < 0:
                raise AnalysisError("dissipation rates must be >= 0")

    def baths(self, case: Sequence[int]) -> BathSpec:
        (bc, bh), (gcr, ghr), (gcd, ghd) = (
            self.dbeta[case[0] - 1], self.D_r[case[1] - 1], self.D_d[case[2] - 1]
        )
        w = self.omega10
        return BathSpec(bc / w, bh / w, gcr * w, ghr * w, gcd * w, ghd * w)


DEFAULT_LEVELS = FactorLevels()


@dataclass(frozen=True)
class DoeDesign:
    cases: tuple[tuple[int, int, int], ...]

    def column(self, factor: str) -> tuple[int, ...]:
        idx = FACTORS.index(factor)
        return tuple(case[idx] for case in self.cases)

    def check_orthogonal(self) -> None:
        if len(self.cases) != 9:
            raise AnalysisError(f"expected 9 cases, got {len(self.cases)}")
        for f in range(3):
            counts = [sum(1 for c in self.cases if c[f] == lv) for lv in (1, 2, 3)]
            if counts != [3, 3, 3]:
                raise AnalysisError(f"column {FACTORS[f]} unbalanced: {counts}")
        for a, b in itertools.combinations(range(3), 2):
            if len({(c[a], c[b]) for c in self.cases}) != 9:
                raise AnalysisError(f"columns {FACTORS[a]}, {FACTORS[b]} not orthogonal")


def build_design(levels: FactorLevels = DEFAULT_LEVELS) -> DoeDesign:
    design = DoeDesign(L9_LAYOUT)
    design.check_orthogonal()
    return design


@dataclass
class CaseResult:
    case_id: int
    levels: tuple[int, int, int]
    max_P: float
    max_eta: float
    max_Peta: float
    argmax_P: tuple[float, float] | None
    argmax_eta: tuple[float, float] | None
    argmax_Peta: tuple[float, float] | None
    min_sigma: float
    never_engine: bool = False
    grid: SweepGrid | None = field(default=None, repr=False)

    def metric(self, name: str) -> float:
        return {"P": self.max_P, "eta": self.max_eta, "Peta": self.max_Peta}[name]


def _grid_max(grid: SweepGrid, name: str):
    vals = grid.values[name]
    if not np.any(np.isfinite(vals)):
        return 0.0, None
    k = int(np.nanargmax(vals))  # first maximal cell in row-major order
    return float(vals[k]), grid.coords(k)


def evaluate_case(
    case: Sequence[int],
    levels: FactorLevels = DEFAULT_LEVELS,
    axes: tuple[Axis, Axis] = DEFAULT_AXES,
    engine: str = "kinetic",
    closure: kinetic.WorkChannelClosure = kinetic.DEFAULT_CLOSURE,
    case_id: int = 0,
    keep_grid: bool = True,
) -> CaseResult:
    baths = levels.baths(case)
    grid = run_sweep(baths, axes, engine, closure, levels.omega10)
    ok = grid.values["engine_ok"]
    masked = {name: np.where(ok, grid.values[name], np.nan) for name in ("P", "Peta")}
    # eta is finite on engine cells and on lam -> 0+ limit cells (zero power)
    masked["eta"] = grid.values["eta"]
    view = SweepGrid(grid.axes, masked, grid.metadata)
    (mp, ap), (me, ae), (mpe, ape) = (_grid_max(view, m) for m in METRICS)
    sigma = grid.values["sigma"]
    min_sigma = float(np.nanmin(sigma)) if np.any(np.isfinite(sigma)) else math.nan
    return CaseResult(
        case_id=case_id,
        levels=tuple(case),
        max_P=mp, max_eta=me, max_Peta=mpe,
        argmax_P=ap, argmax_eta=ae, argmax_Peta=ape,
        min_sigma=min_sigma,
        never_engine=ae is None,
        grid=grid if keep_grid else None,
    )


def _evaluate_packed(args):
    return evaluate_case(*args)


def run_design(
    levels: FactorLevels = DEFAULT_LEVELS,
    axes: tuple[Axis, Axis] = DEFAULT_AXES,
    engine: str = "kinetic",
    closure: kinetic.WorkChannelClosure = kinetic.DEFAULT_CLOSURE,
    workers: int = 1,
    keep_grid: bool = True,
) -> list[CaseResult]:
    """Evaluate all nine cases; results come back in design order."""
    design = build_design(levels)
    jobs = [
        (case, levels, axes, engine, closure, i + 1, keep_grid)
        for i, case in enumerate(design.cases)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_evaluate_packed, jobs))
    return [_evaluate_packed(job) for job in jobs]


# ---------------------------------------------------------------- analysis

def _metric_table(results) -> dict[str, np.ndarray]:
    if isinstance(results, Mapping):
        table = {m: np.asarray(results[m], dtype=float) for m in METRICS if m in results}
    else:
        table = {m: np.array([r.metric(m) for r in results], dtype=float) for m in METRICS}
    for m, col in table.items():
        if col.shape != (9,):
            raise AnalysisError(f"expected 9 cases for metric {m}, got {col.shape[0]}")
    if not table:
        raise AnalysisError("no metrics supplied")
    return table


@dataclass(frozen=True)
class RangeEntry:
    K: tuple[float, float, float]
    Kbar: tuple[float, float, float]
    R: float
    optimal_level: int | None  # None: no preference (all level means equal)


@dataclass
class RangeTable:
    entries: dict  # (metric, factor) -> RangeEntry
    ranking: dict  # metric -> factors by descending R

    def __getitem__(self, key) -> RangeEntry:
        return self.entries[key]


def range_analysis(results, design: DoeDesign | None = None) -> RangeTable:
    design = design or build_design()
    table = _metric_table(results)
    entries, ranking = {}, {}
    for metric, y in table.items():
        for factor in FACTORS:
            col = np.array(design.column(factor))
            k = tuple(float(y[col == lv].sum()) for lv in (1, 2, 3))
            kbar = tuple(v / 3.0 for v in k)
            r = max(kbar) - min(kbar)
            scale = max(abs(v) for v in kbar) or 1.0
            best = None if r <= 1e-12 * scale else int(np.argmax(kbar)) + 1
            entries[metric, factor] = RangeEntry(k, kbar, r, best)
        ranking[metric] = tuple(
            sorted(FACTORS, key=lambda f: -entries[metric, f].R)
        )
    return RangeTable(entries, ranking)


def f_survival(F: float, d1: float, d2: float) -> float:
    """Upper tail ``P(X > F)`` of the Fisher F(d1, d2) distribution."""
    if not (d1 >= 1 and d2 >= 1):
        raise AnalysisError(f"invalid degrees of freedom ({d1}, {d2})")
    if F < 0 or math.isnan(F):
        raise AnalysisError(f"F must be >= 0, got {F!r}")
    if math.isinf(F):
        return 0.0
    return float(special.betainc(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * F)))


def significance(p: float) -> str:
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""


@dataclass(frozen=True)
class AnovaRow:
    S: float
    df: int
    MS: float
    F: float
    p: float
    mark: str


@dataclass
class AnovaTable:
    rows: dict  # (metric, factor) -> AnovaRow
    error: dict  # metric -> (S_e, df_e, MS_e)
    total: dict  # metric -> S_total
    saturated: dict = field(default_factory=dict)  # metric -> bool

    def __getitem__(self, key) -> AnovaRow:
        return self.rows[key]


def anova(results, design: DoeDesign | None = None) -> AnovaTable:
    design = design or build_design()
    table = _metric_table(results)
    rows, error, total, saturated = {}, {}, {}, {}
    for metric, y in table.items():
        mean = y.mean()
        s_total = float(np.sum((y - mean) ** 2))
        s_factor = {}
        for factor in FACTORS:
            col = np.array(design.column(factor))
            kbar = np.array([y[col == lv].mean() for lv in (1, 2, 3)])
            s_factor[factor] = float(3.0 * np.sum((kbar - mean) ** 2))
        df_e = len(y) - 1 - 2 * len(FACTORS)
        s_e = s_total - sum(s_factor.values())
        sat = s_e <= 1e-12 * max(s_total, 1e-300)
        if sat:
            s_e = 0.0
            if s_total > 0:
                warnings.warn(f"saturated fit for {metric}: error sum of squares is zero",
                              RuntimeWarning, stacklevel=2)
        ms_e = s_e / df_e
        for factor, s in s_factor.items():
            ms = s / 2
            if ms_e > 0:
                F = ms / ms_e
                p = f_survival(F, 2, df_e)
            elif ms > 0:
                F, p = math.inf, 0.0
            else:
                F, p = 0.0, 1.0
            rows[metric, factor] = AnovaRow(s, 2, ms, F, p, significance(p))
        error[metric] = (s_e, df_e, ms_e)
        total[metric] = s_total
        saturated[metric] = sat
    return AnovaTable(rows, error, total, saturated)


@dataclass(frozen=True)
class BestCombination:
    metric: str
    levels: dict  # factor -> level index (1-3) or None for no preference
    order: tuple  # factors by descending impact
    consistent: bool  # range ranking agrees with the ANOVA p ranking
    note: str = ""

    def level_names(self) -> dict:
        return {f: (LEVEL_NAMES[v - 1] if v else "no preference") for f, v in self.levels.items()}


def select_best(ranges: RangeTable, table: AnovaTable) -> dict[str, BestCombination]:
    out = {}
    for metric, order in ranges.ranking.items():
        levels = {f: ranges[metric, f].optimal_level for f in FACTORS}
        by_p = tuple(sorted(FACTORS, key=lambda f: table[metric, f].p))
        consistent = by_p == order
        note = "" if consistent else (
            f"range ranking {'>'.join(order)} disagrees with ANOVA ranking {'>'.join(by_p)}"
        )
        out[metric] = BestCombination(metric, levels, order, consistent, note)
    return out


# ---------------------------------------------------------------- fixtures

def load_fixture(source: str | Path = "table4", design: DoeDesign | None = None) -> dict:
    """Read a 9-case results table (``case,dbeta,D_r,D_d,P,eta,Peta``).

    ``"table4"`` selects the bundled published results. Lines starting
    with ``#`` are comments. Level columns accept names or indices and
    must match the design.
    """
    design = design or build_design()
    if str(source) == "table4":
        text = resources.files("threelevel").joinpath("data/table4.csv").read_text()
    else:
        text = Path(source).read_text()
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    rows = list(csv.DictReader(lines))
    if len(rows) != 9:
        raise AnalysisError(f"expected 9 cases, got {len(rows)}")
    table = {m: [] for m in METRICS}
    for i, row in enumerate(rows):
        try:
            got = tuple(_level_index(row[f]) for f in FACTORS)
            for m in METRICS:
                table[m].append(float(row[m]))
        except (KeyError, ValueError) as exc:
            raise AnalysisError(f"fixture row {i + 1}: {exc}") from None
        if got != design.cases[i]:
            raise AnalysisError(f"fixture row {i + 1} levels {got} != design {design.cases[i]}")
    return table


def _level_index(text: str) -> int:
    text = text.strip().lower()
    if text in LEVEL_NAMES:
        return LEVEL_NAMES.index(text) + 1
    value = int(text)
    if value not in (1, 2, 3):
        raise ValueError(f"level {value} out of range")
    return value
