"""Grid evaluation over (omega20, lam) for either engine.

Cells are visited row-major with ``omega20`` outermost. The ``lam = 0``
column holds the zero-field values of power and entropy production;
for the kinetic engine its efficiency is the ``lam -> 0+`` limit, taken
at :data:`LAM_LIMIT`, because the work and leak currents both vanish
as ``sin(theta)**2`` there.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import gkls, kinetic
from .model import BathSpec, EngineSpec, dressed_energies

LAM_LIMIT = 1e-7

KINETIC_OBSERVABLES = ("P", "eta", "Peta", "sigma")
GKLS_OBSERVABLES = KINETIC_OBSERVABLES + ("inv_eta_nd", "mode")
ENGINES = ("kinetic", "gkls")


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    count: int

    def __post_init__(self):
        if self.count < 1:
            raise ValueError(f"axis {self.name} needs count >= 1")
        if self.count == 1 and self.start != self.stop:
            raise ValueError(f"axis {self.name}: count 1 needs start == stop")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


DEFAULT_AXES = (Axis("omega20", 1.0, 5.0, 101), Axis("lam", 0.0, 1.0, 101))


@dataclass
class SweepGrid:
    axes: tuple[Axis, Axis]
    values: dict[str, np.ndarray]
    metadata: dict = field(default_factory=dict)

    @property
    def shape(self) -> tuple[int, int]:
        return self.axes[0].count, self.axes[1].count

    def coords(self, flat_index: int) -> tuple[float, float]:
        i, j = divmod(flat_index, self.axes[1].count)
        return float(self.axes[0].values()[i]), float(self.axes[1].values()[j])

    def as_2d(self, name: str) -> np.ndarray:
        return self.values[name].reshape(self.shape)


def kinetic_cell(spec: EngineSpec, baths: BathSpec,
                 closure: kinetic.WorkChannelClosure = kinetic.DEFAULT_CLOSURE) -> dict:
    nan = math.nan
    if dressed_energies(spec).inverted:
        return {"P": nan, "eta": nan, "Peta": nan, "sigma": nan, "engine_ok": False}
    rep = kinetic.evaluate(spec, baths, closure)
    cell = {
        "P": rep.power,
        "eta": rep.efficiency,
        "Peta": rep.efficacy,
        "sigma": rep.sigma_avg,
        "engine_ok": rep.engine_ok,
    }
    if spec.lam == 0.0:
        near = EngineSpec(spec.omega20, LAM_LIMIT, spec.omega10, spec.drive_freq)
        lim = kinetic.evaluate(near, baths, closure)
        cell["eta"] = lim.efficiency if lim.engine_ok else nan
    return cell


def gkls_cell(spec: EngineSpec, baths: BathSpec) -> dict:
    nan = math.nan
    gen = gkls.build_generator(spec, baths)
    rho = gkls.steady_state(gen)
    phi_h, phi_c, power = gkls.heat_currents(gen, rho)
    dec = gkls.heat_decomposition(gen, rho)
    engine_ok = power > gkls.POWER_FLOOR and phi_h > 0
    eta = power / phi_h if engine_ok else nan
    return {
        "P": power,
        "eta": eta,
        "Peta": power * eta if engine_ok else nan,
        "sigma": -baths.beta_h * phi_h - baths.beta_c * phi_c,
        "inv_eta_nd": nan if dec.inv_eta_nd is None else dec.inv_eta_nd,
        "mode": 0 if dec.mode is None else int(dec.mode),
        "engine_ok": engine_ok,
    }


def run_sweep(
    baths: BathSpec,
    axes: tuple[Axis, Axis] = DEFAULT_AXES,
    engine: str = "kinetic",
    closure: kinetic.WorkChannelClosure = kinetic.DEFAULT_CLOSURE,
    omega10: float = 1.0,
    drive_freq: float | None = None,
) -> SweepGrid:
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}")
    names = KINETIC_OBSERVABLES if engine == "kinetic" else GKLS_OBSERVABLES
    w20s, lams = axes[0].values(), axes[1].values()
    n = len(w20s) * len(lams)
    out = {name: np.empty(n) for name in names}
    ok = np.zeros(n, dtype=bool)
    k = 0
    for w20 in w20s:
        for lam in lams:
            spec = EngineSpec(float(w20), float(lam), omega10, drive_freq)
            if engine == "kinetic":
                cell = kinetic_cell(spec, baths, closure)
            else:
                cell = gkls_cell(spec, baths)
            for name in names:
                out[name][k] = cell[name]
            ok[k] = cell["engine_ok"]
            k += 1
    out["engine_ok"] = ok
    meta = {"engine": engine}
    return SweepGrid(tuple(axes), out, meta)
