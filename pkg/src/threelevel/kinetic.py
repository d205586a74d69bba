"""Analytic steady-state engine on a three-node kinetic network.

Nodes are the ground state and the two dressed levels. Channel 1
(``0 <-> 1``) and channel 2 (``0 <-> 2``) each mix both baths with the
weights ``(1 +/- cos theta)/2``; a symmetric work channel of rate
``gw`` connects the dressed levels. The stationary cycle current
``J = gw * (p2 - p1)`` carries the output power ``P = eps21 * J``.

Heat currents are assembled from two cancellation-free pieces: the
share of ``J`` carried by each bath, and a bath-to-bath conduction term
proportional to ``p0`` (the heat leakage). Summing the pieces over both
baths gives ``P`` exactly, and the hot-bath sum is ``P / eta_cp + leak``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import NamedTuple

from .errors import (
    ConfigError,
    ConsistencyError,
    DegenerateWidthError,
    DisconnectedNetworkError,
)
from .model import (
    BathSpec,
    DressedFrame,
    EffectiveRates,
    EngineSpec,
    bath_components,
    dressed_energies,
    effective_rates,
)

FIRST_LAW_TOL = 1e-12
SIGMA_FORMS_TOL = 1e-10


class ClosureMode(str, enum.Enum):
    EQ2_STRUCTURAL = "eq2_structural"
    FIXED_RATE = "fixed_rate"


@dataclass(frozen=True)
class WorkChannelClosure:
    """How the work-channel transfer rate ``gw`` is obtained.

    ``EQ2_STRUCTURAL``: ``gw = w**2 sin(theta)**2 / (2 G)`` with ``w`` the
    spec's drive frequency (default ``eps21``) and ``G`` the channel width
    (default ``g1 + g2 + g1m + g2m``; override with ``width_G``).
    ``FIXED_RATE``: ``gw = gw_fixed`` whenever the drive mixes the levels.
    """

    mode: ClosureMode = ClosureMode.EQ2_STRUCTURAL
    gw_fixed: float | None = None
    width_G: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "mode", ClosureMode(self.mode))
        if self.mode is ClosureMode.FIXED_RATE:
            if self.gw_fixed is None or not self.gw_fixed >= 0:
                raise ConfigError("fixed_rate closure needs gw_fixed >= 0")
        if self.width_G is not None and not self.width_G >= 0:
            raise ConfigError("width_G must be >= 0")


DEFAULT_CLOSURE = WorkChannelClosure()


@dataclass(frozen=True)
class ThermoReport:
    power: float
    heat_in: float
    heat_out: float
    efficiency: float
    efficacy: float
    coupling_eff: float
    leak: float
    sigma_avg: float
    populations: tuple[float, float, float]
    engine_ok: bool

    @property
    def leak_ratio(self) -> float:
        return self.leak / self.power if self.power != 0 else math.inf


class CouplingEfficiency(NamedTuple):
    eta_cp: float
    q1: float
    q2: float
    dead_channel: bool


def _exp_diff(a: float, b: float) -> float:
    """``exp(-a) - exp(-b)`` accurate when ``a`` and ``b`` are close."""
    return -math.exp(-a) * math.expm1(a - b)


def work_channel_rate(
    spec: EngineSpec,
    frame: DressedFrame,
    rates: EffectiveRates,
    closure: WorkChannelClosure = DEFAULT_CLOSURE,
) -> float:
    s2 = math.sin(frame.theta) ** 2
    if s2 == 0.0:
        return 0.0
    if closure.mode is ClosureMode.FIXED_RATE:
        return float(closure.gw_fixed)
    width = closure.width_G
    if width is None:
        width = rates.g1 + rates.g2 + rates.g1m + rates.g2m
    if width == 0.0:
        raise DegenerateWidthError("degenerate width: G = 0 with sin(theta) > 0")
    omega = frame.eps21 if spec.drive_freq is None else spec.drive_freq
    return omega * omega * s2 / (2.0 * width)


def network_steady_state(rates: EffectiveRates, gw: float) -> tuple[float, float, float]:
    """Stationary populations by the matrix-tree theorem.

    Every spanning-tree weight is a sum of non-negative products, so the
    populations carry no cancellation error.
    """
    g1, g2, g1m, g2m = rates.g1, rates.g2, rates.g1m, rates.g2m
    n0 = g1 * g2 + gw * (g1 + g2)
    n1 = g1m * g2 + gw * (g1m + g2m)
    n2 = g2m * g1 + gw * (g1m + g2m)
    total = n0 + n1 + n2
    if not total > 0:
        raise DisconnectedNetworkError("disconnected network: no spanning tree")
    return n0 / total, n1 / total, n2 / total


def coupling_efficiency(frame: DressedFrame, baths: BathSpec) -> CouplingEfficiency:
    """Coupling efficiency and the wrong-bath fractions of each channel.

    ``q1`` is the hot share of channel 1 and ``q2`` the cold share of
    channel 2; neither depends on temperature.
    """
    k = bath_components(frame, baths)
    dead = False
    g1, g2 = k.c1 + k.h1, k.h2 + k.c2
    if g1 > 0:
        q1 = k.h1 / g1
    else:
        q1, dead = 0.0, True
    if g2 > 0:
        q2 = k.c2 / g2
    else:
        q2, dead = 0.0, True
    ratio = frame.eps10 / frame.eps20
    denom = 1.0 - q2 - ratio * q1
    eta_cp = (1.0 - ratio) / denom if denom != 0 else math.inf
    return CouplingEfficiency(eta_cp, q1, q2, dead)


def engine_condition(rates: EffectiveRates) -> tuple[float, bool]:
    """Population-inversion margin ``g2m/g2 - g1m/g1`` and its sign test."""
    if not (rates.g1 > 0 and rates.g2 > 0):
        raise ConfigError("engine_condition needs g1 > 0 and g2 > 0")
    margin = rates.g2m / rates.g2 - rates.g1m / rates.g1
    return margin, margin > 0


def _bath_currents(frame, baths, populations, gw):
    """Per-bath upward currents ``(J_c1, J_h1, J_h2, J_c2)`` at stationarity."""
    p0, p1, p2 = populations
    k = bath_components(frame, baths)
    e1, e2 = frame.eps10, frame.eps20
    bc, bh = baths.beta_c, baths.beta_h
    flux = gw * (p2 - p1)  # up through channel 2, down through channel 1
    g1, g2 = k.c1 + k.h1, k.h2 + k.c2
    if g1 > 0:
        cond1 = p0 * k.c1 * k.h1 * _exp_diff(bh * e1, bc * e1) / g1
        j_h1 = cond1 - flux * k.h1 / g1
        j_c1 = -cond1 - flux * k.c1 / g1
    else:
        j_h1 = j_c1 = 0.0
    if g2 > 0:
        cond2 = p0 * k.h2 * k.c2 * _exp_diff(bh * e2, bc * e2) / g2
        j_h2 = cond2 + flux * k.h2 / g2
        j_c2 = -cond2 + flux * k.c2 / g2
    else:
        j_h2 = j_c2 = 0.0
    return j_c1, j_h1, j_h2, j_c2


def heat_leakage(report: ThermoReport, eta_cp: float) -> tuple[float, float]:
    """Heat conducted hot->cold without producing work, and its ratio to P."""
    if not (eta_cp > 0 and math.isfinite(eta_cp)):
        return math.nan, math.nan
    leak = report.heat_in - report.power / eta_cp
    ratio = leak / report.power if report.power != 0 else math.inf
    return leak, ratio


def avg_entropy_production(report: ThermoReport, baths: BathSpec) -> float:
    bc, bh = baths.beta_c, baths.beta_h
    direct = -bh * report.heat_in - bc * report.heat_out
    if math.isfinite(report.leak) and math.isfinite(report.coupling_eff):
        if bc > bh:
            inv_carnot = 1.0 / (1.0 - bh / bc)
            via_leak = (bc - bh) * (
                (1.0 / report.coupling_eff - inv_carnot) * report.power + report.leak
            )
        else:
            # (bc - bh) / carnot -> bc as the temperatures merge
            via_leak = (bc - bh) * (report.power / report.coupling_eff + report.leak) - bc * report.power
        scale = max(1.0, abs(bc * report.heat_in), abs(bc * report.power))
        if abs(direct - via_leak) > SIGMA_FORMS_TOL * scale:
            raise ConsistencyError(
                f"entropy production forms disagree: {direct!r} vs {via_leak!r}"
            )
    return direct


def cycle_observables(
    spec: EngineSpec,
    frame: DressedFrame,
    rates: EffectiveRates,
    baths: BathSpec,
    populations: tuple[float, float, float],
    gw: float,
) -> ThermoReport:
    j_c1, j_h1, j_h2, j_c2 = _bath_currents(frame, baths, populations, gw)
    e1, e2 = frame.eps10, frame.eps20
    heat_in = e1 * j_h1 + e2 * j_h2
    heat_out = e1 * j_c1 + e2 * j_c2
    power = frame.eps21 * gw * (populations[2] - populations[1])

    scale = max(abs(heat_in), 1.0)
    if abs(power - heat_in - heat_out) > FIRST_LAW_TOL * scale:
        raise ConsistencyError(
            f"first law violated: P={power!r}, heat_in+heat_out={heat_in + heat_out!r}"
        )
    if power > 0 and heat_in <= 0:
        raise ConsistencyError(f"positive power {power!r} with heat_in={heat_in!r}")

    engine_ok = power > 0 and heat_in > 0 and not frame.inverted
    efficiency = power / heat_in if engine_ok else math.nan
    cp = coupling_efficiency(frame, baths)
    report = ThermoReport(
        power=power,
        heat_in=heat_in,
        heat_out=heat_out,
        efficiency=efficiency,
        efficacy=power * efficiency if engine_ok else math.nan,
        coupling_eff=cp.eta_cp,
        leak=math.nan,
        sigma_avg=math.nan,
        populations=tuple(populations),
        engine_ok=engine_ok,
    )
    leak, _ = heat_leakage(report, cp.eta_cp)
    report = replace(report, leak=leak)
    return replace(report, sigma_avg=avg_entropy_production(report, baths))


def evaluate(
    spec: EngineSpec,
    baths: BathSpec,
    closure: WorkChannelClosure = DEFAULT_CLOSURE,
) -> ThermoReport:
    """Full kinetic-engine evaluation of one configuration."""
    frame = dressed_energies(spec)
    rates = effective_rates(frame, baths)
    gw = work_channel_rate(spec, frame, rates, closure)
    pops = network_steady_state(rates, gw)
    return cycle_observables(spec, frame, rates, baths, pops, gw)


def leak_population_form(spec: EngineSpec, baths: BathSpec,
                         closure: WorkChannelClosure = DEFAULT_CLOSURE) -> float:
    """Heat leakage written as ``p0 * P0``, the ground population times the
    conduction coefficient of the two mixed channels.

    Independent of :func:`heat_leakage` (which rearranges the hot-bath
    balance); the two agree identically for stationary populations.
    """
    frame = dressed_energies(spec)
    rates = effective_rates(frame, baths)
    gw = work_channel_rate(spec, frame, rates, closure)
    p0 = network_steady_state(rates, gw)[0]
    k = bath_components(frame, baths)
    e1, e2, bc, bh = frame.eps10, frame.eps20, baths.beta_c, baths.beta_h
    total = 0.0
    if rates.g1 > 0:
        total += e1 * k.c1 * k.h1 * _exp_diff(bh * e1, bc * e1) / rates.g1
    if rates.g2 > 0:
        total += e2 * k.h2 * k.c2 * _exp_diff(bh * e2, bc * e2) / rates.g2
    return p0 * total
