"""Physical configuration and closed-form dressed-frame quantities.

All energies and rates are in units of the bare gap ``omega10`` with
hbar = k_B = 1. The driven upper block ``{|1>, |2>}`` is diagonalised
statically: the mixing angle and the dressed gaps follow from the 2x2
matrix ``[[omega10, lam], [lam, omega20]]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import ConfigError, NotAnEngineError, RateRangeError


def _finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class EngineSpec:
    """Level structure and drive of the three-level system.

    ``drive_freq`` of ``None`` means "engine default": the dressed gap
    ``eps21`` for the kinetic power closure and the bare resonance
    ``omega20 - omega10`` for the GKLS rotating frame.
    """

    omega20: float
    lam: float
    omega10: float = 1.0
    drive_freq: float | None = None

    def __post_init__(self):
        for name in ("omega20", "lam", "omega10"):
            object.__setattr__(self, name, _finite(name, getattr(self, name)))
        if self.drive_freq is not None:
            object.__setattr__(self, "drive_freq", _finite("drive_freq", self.drive_freq))
            if self.drive_freq < 0:
                raise ConfigError(f"drive_freq must be >= 0, got {self.drive_freq}")
        if self.omega10 <= 0:
            raise ConfigError(f"omega10 must be > 0, got {self.omega10}")
        if self.omega20 < self.omega10:
            raise ConfigError(
                f"omega20 must be >= omega10 (got {self.omega20} < {self.omega10})"
            )
        if self.lam < 0:
            raise ConfigError(f"lam must be >= 0, got {self.lam}")


@dataclass(frozen=True)
class BathSpec:
    """Reservoir temperatures and the four dissipation coefficients.

    ``g_c_res = gamma_c(eps10)``, ``g_h_res = gamma_h(eps20)`` are the
    resonant couplings; ``g_c_det = gamma_c(eps20)``,
    ``g_h_det = gamma_h(eps10)`` the detuning ("wrong bath") couplings.
    """

    beta_c: float
    beta_h: float
    g_c_res: float
    g_h_res: float
    g_c_det: float = 0.0
    g_h_det: float = 0.0

    def __post_init__(self):
        for name in ("beta_c", "beta_h", "g_c_res", "g_h_res", "g_c_det", "g_h_det"):
            object.__setattr__(self, name, _finite(name, getattr(self, name)))
        if self.beta_c <= 0 or self.beta_h <= 0:
            raise ConfigError("inverse temperatures must be > 0")
        for name in ("g_c_res", "g_h_res", "g_c_det", "g_h_det"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.g_c_res == 0 and self.g_h_res == 0:
            raise ConfigError("at least one resonant coefficient must be > 0")

    def require_engine(self) -> "BathSpec":
        """Raise unless the cold bath is strictly colder than the hot one."""
        if not self.beta_c > self.beta_h:
            raise NotAnEngineError(self.beta_c, self.beta_h)
        return self


@dataclass(frozen=True)
class DressedFrame:
    theta: float
    eps10: float
    eps20: float
    eps21: float

    @property
    def inverted(self) -> bool:
        """Dressed ground gap closed or inverted (strong drive corner)."""
        return self.eps10 <= 0.0


@dataclass(frozen=True)
class EffectiveRates:
    g1: float
    g2: float
    g1m: float
    g2m: float


class BathComponents(NamedTuple):
    """Weighted downward rates per bath and channel, with Boltzmann factors.

    Channel 1 is ``0 <-> 1`` (gap eps10), channel 2 is ``0 <-> 2`` (gap eps20).
    Upward rate of each component is ``rate * boltzmann``.
    """

    c1: float
    h1: float
    h2: float
    c2: float
    xc1: float
    xh1: float
    xh2: float
    xc2: float


def mixing_angle(spec: EngineSpec) -> float:
    theta = math.atan2(2.0 * spec.lam, spec.omega20 - spec.omega10)
    return min(max(theta, 0.0), math.pi / 2)


def dressed_energies(spec: EngineSpec) -> DressedFrame:
    w10, w20, lam = spec.omega10, spec.omega20, spec.lam
    eps21 = math.hypot(w20 - w10, 2.0 * lam)
    eps20 = 0.5 * (w10 + w20 + eps21)
    # product of eigenvalues is the determinant; avoids cancellation in eps10
    eps10 = (w10 * w20 - lam * lam) / eps20
    return DressedFrame(mixing_angle(spec), eps10, eps20, eps21)


def detailed_balance_rate(gamma: float, beta: float, eps: float) -> float:
    """Reverse-process rate ``gamma * exp(-beta * eps)``."""
    if gamma == 0.0:
        return 0.0
    try:
        factor = math.exp(-beta * eps)
    except OverflowError:
        raise RateRangeError(f"exp({-beta * eps:.6g}) overflows") from None
    rate = gamma * factor
    if math.isinf(rate):
        raise RateRangeError(f"rate {gamma!r} * exp({-beta * eps:.6g}) overflows")
    return rate


def mixing_weights(theta: float) -> tuple[float, float]:
    """Return ``((1 + cos t)/2, (1 - cos t)/2)`` without cancellation."""
    return math.cos(0.5 * theta) ** 2, math.sin(0.5 * theta) ** 2


def bath_components(frame: DressedFrame, baths: BathSpec) -> BathComponents:
    wp, wm = mixing_weights(frame.theta)
    return BathComponents(
        c1=baths.g_c_res * wp,
        h1=baths.g_h_det * wm,
        h2=baths.g_h_res * wp,
        c2=baths.g_c_det * wm,
        xc1=detailed_balance_rate(1.0, baths.beta_c, frame.eps10),
        xh1=detailed_balance_rate(1.0, baths.beta_h, frame.eps10),
        xh2=detailed_balance_rate(1.0, baths.beta_h, frame.eps20),
        xc2=detailed_balance_rate(1.0, baths.beta_c, frame.eps20),
    )


def effective_rates(frame: DressedFrame, baths: BathSpec) -> EffectiveRates:
    k = bath_components(frame, baths)
    return EffectiveRates(
        g1=k.c1 + k.h1,
        g2=k.h2 + k.c2,
        g1m=k.c1 * k.xc1 + k.h1 * k.xh1,
        g2m=k.h2 * k.xh2 + k.c2 * k.xc2,
    )


def carnot_efficiency(baths: BathSpec) -> float:
    if baths.beta_c < baths.beta_h:
        raise NotAnEngineError(baths.beta_c, baths.beta_h)
    return 1.0 - baths.beta_h / baths.beta_c


def delta_beta(baths: BathSpec, omega10: float = 1.0) -> float:
    """Temperature-difference coordinate ``1/(beta_h w10) - 1/(beta_c w10)``."""
    return 1.0 / (baths.beta_h * omega10) - 1.0 / (baths.beta_c * omega10)
