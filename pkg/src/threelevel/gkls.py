"""Numeric GKLS engine in the frame rotating at the drive frequency.

Density matrices are vectorised column-major (``vec(A X B) =
(B.T kron A) vec(X)``), so the generator is a 9x9 complex matrix.
Jump operators are local bare-basis transitions ``|0><j|`` with the
four resonant/detuning coefficients and their detailed-balance reverses.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConsistencyError, ConvergenceError, SteadyStateError
from .model import BathSpec, EngineSpec, detailed_balance_rate

DIM = 3
_EYE = np.eye(DIM)
HERMITIAN_TOL = 1e-12
RESIDUAL_TOL = 1e-10
NEGATIVE_EIG_TOL = 1e-9
IDENTITY_TOL = 1e-10
LOG_FLOOR = 1e-15
POWER_FLOOR = 1e-13


class HeatMode(enum.IntEnum):
    HOT_REVERSED = 1
    IDEAL = 2
    COLD_REVERSED = 3


@dataclass(frozen=True)
class Jump:
    bath: str  # "c" or "h"
    rate: float
    op: np.ndarray


@dataclass(frozen=True)
class Generator:
    matrix: np.ndarray
    jumps: tuple[Jump, ...]
    h_rot: np.ndarray
    h_energy: np.ndarray
    dissipators: dict  # bath -> 9x9 superoperator
    drive_freq: float
    lam: float


@dataclass(frozen=True)
class HeatDecomposition:
    diag: dict
    nondiag: dict
    inv_eta_nd: float | None
    mode: HeatMode | None
    basis: np.ndarray


def _proj(i: int, j: int) -> np.ndarray:
    m = np.zeros((DIM, DIM), dtype=complex)
    m[i, j] = 1.0
    return m


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho, dtype=complex).reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    return np.asarray(v).reshape(DIM, DIM, order="F")


def _spre(a):
    return np.kron(_EYE, a)


def _spost(b):
    return np.kron(b.T, _EYE)


def dissipator(op: np.ndarray) -> np.ndarray:
    """Superoperator of ``L rho L^+ - {L^+ L, rho}/2``."""
    ldl = op.conj().T @ op
    return np.kron(op.conj(), op) - 0.5 * (_spre(ldl) + _spost(ldl))


def default_drive_freq(spec: EngineSpec) -> float:
    return spec.omega20 - spec.omega10 if spec.drive_freq is None else spec.drive_freq


def build_generator(spec: EngineSpec, baths: BathSpec) -> Generator:
    wd = default_drive_freq(spec)
    w10, w20 = spec.omega10, spec.omega20
    h_rot = np.diag([0.0, w10, w20 - wd]).astype(complex)
    h_rot += spec.lam * (_proj(1, 2) + _proj(2, 1))
    h_energy = h_rot + wd * _proj(2, 2)

    table = [
        ("c", baths.g_c_res, baths.beta_c, 1, w10),
        ("c", baths.g_c_det, baths.beta_c, 2, w20),
        ("h", baths.g_h_res, baths.beta_h, 2, w20),
        ("h", baths.g_h_det, baths.beta_h, 1, w10),
    ]
    jumps = []
    for bath, gamma, beta, level, gap in table:
        jumps.append(Jump(bath, gamma, _proj(0, level)))
        jumps.append(Jump(bath, detailed_balance_rate(gamma, beta, gap), _proj(level, 0)))
    jumps = tuple(j for j in jumps if j.rate > 0)

    diss = {"c": np.zeros((DIM**2, DIM**2), complex), "h": np.zeros((DIM**2, DIM**2), complex)}
    for j in jumps:
        diss[j.bath] += j.rate * dissipator(j.op)
    matrix = -1j * (_spre(h_rot) - _spost(h_rot)) + diss["c"] + diss["h"]
    for arr in (matrix, h_rot, h_energy, diss["c"], diss["h"]):
        arr.flags.writeable = False
    return Generator(matrix, jumps, h_rot, h_energy, diss, wd, spec.lam)


def apply(gen: Generator, rho: np.ndarray) -> np.ndarray:
    return unvec(gen.matrix @ vec(rho))


def _physical(rho: np.ndarray) -> np.ndarray:
    skew = np.max(np.abs(rho - rho.conj().T))
    if skew > HERMITIAN_TOL:
        raise SteadyStateError(f"state not Hermitian (deviation {skew:.2e})")
    rho = 0.5 * (rho + rho.conj().T)
    low = np.linalg.eigvalsh(rho)[0]
    if low < -NEGATIVE_EIG_TOL:
        raise SteadyStateError(f"unphysical steady state: eigenvalue {low:.3e}")
    return rho


def steady_state(gen: Generator) -> np.ndarray:
    """Null vector of the generator with unit trace.

    The first row of ``L vec(rho) = 0`` is replaced by the trace
    functional, which is linearly dependent on the remaining rows for a
    trace-preserving generator.
    """
    sv = np.linalg.svd(gen.matrix, compute_uv=False)
    null_dim = int(np.sum(sv <= 1e-10 * max(sv[0], 1.0)))
    if null_dim > 1:
        raise SteadyStateError(f"non-unique steady state: {null_dim} null vectors")
    a = np.array(gen.matrix)
    a[0] = vec(_EYE)
    b = np.zeros(DIM**2, complex)
    b[0] = 1.0
    v = np.linalg.solve(a, b)
    residual = np.linalg.norm(gen.matrix @ v)
    if residual > RESIDUAL_TOL:
        raise SteadyStateError(f"steady-state residual {residual:.2e} too large")
    return _physical(unvec(v))


def relax_to_steady(
    gen: Generator,
    rho0: np.ndarray,
    horizon: float = 1e5,
    tol: float = 1e-10,
    record=None,
) -> np.ndarray:
    """Integrate ``d rho/dt = L rho`` until ``||rho_dot|| <= tol``.

    Runs DOP853 in doubling time windows; ``record(t, rho)`` is called on
    every accepted integrator step.
    """
    lmat = np.asarray(gen.matrix)

    def rhs(_t, y):
        return lmat @ y

    y = vec(rho0)
    t, window = 0.0, 1.0
    residual = np.linalg.norm(lmat @ y)
    while residual > tol:
        if t >= horizon:
            raise ConvergenceError("no convergence within horizon", residual)
        span = min(window, horizon - t)
        sol = solve_ivp(rhs, (t, t + span), y, method="DOP853", rtol=1e-10, atol=1e-12)
        if not sol.success:
            raise ConvergenceError(sol.message, residual)
        if record is not None:
            for tk, yk in zip(sol.t[1:], sol.y[:, 1:].T):
                record(float(tk), unvec(yk))
        y = sol.y[:, -1]
        t += span
        window *= 2.0
        residual = np.linalg.norm(lmat @ y)
    return _physical(unvec(y))


def heat_currents(gen: Generator, rho_ss: np.ndarray) -> tuple[float, float, float]:
    """``(phi_h, phi_c, P)`` with cycle-averaged lab-energy bookkeeping."""
    v = vec(rho_ss)
    phi = {b: float(np.trace(unvec(d @ v) @ gen.h_energy).real) for b, d in gen.dissipators.items()}
    power = phi["h"] + phi["c"]
    coherent = -2.0 * gen.drive_freq * gen.lam * float(rho_ss[1, 2].imag)
    if abs(power - coherent) > IDENTITY_TOL * max(1.0, abs(phi["h"])):
        raise ConsistencyError(f"power identity violated: {power!r} vs {coherent!r}")
    return phi["h"], phi["c"], power


def _safe_log(rho: np.ndarray) -> np.ndarray:
    w, u = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    if np.any(w < LOG_FLOOR):
        warnings.warn("density matrix has eigenvalues below the log floor", RuntimeWarning, stacklevel=3)
    w = np.maximum(w, LOG_FLOOR)
    return (u * np.log(w)) @ u.conj().T


def entropy_production_rate(gen: Generator, rho: np.ndarray, baths: BathSpec) -> float:
    v = vec(rho)
    rho_dot = unvec(gen.matrix @ v)
    entropy_rate = -float(np.trace(rho_dot @ _safe_log(rho)).real)
    q_h = float(np.trace(unvec(gen.dissipators["h"] @ v) @ gen.h_energy).real)
    q_c = float(np.trace(unvec(gen.dissipators["c"] @ v) @ gen.h_energy).real)
    return entropy_rate - baths.beta_h * q_h - baths.beta_c * q_c


def decomposition_basis(h_rot: np.ndarray, rho: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Eigenbasis of ``h_rot``; degenerate blocks rotated to diagonalise ``rho``."""
    energies, basis = np.linalg.eigh(h_rot)
    basis = basis.astype(complex)
    start = 0
    while start < DIM:
        stop = start + 1
        while stop < DIM and energies[stop] - energies[start] < tol:
            stop += 1
        if stop - start > 1:
            block = basis[:, start:stop]
            _, rot = np.linalg.eigh(block.conj().T @ rho @ block)
            basis[:, start:stop] = block @ rot
        start = stop
    return basis


def nondiag_efficiency(dec, power: float) -> float | None:
    """``1/eta_nd = phi_h^nd / P``; ``None`` when there is no power.

    ``dec`` is a :class:`HeatDecomposition` or the hot non-diagonal flow.
    """
    hot = dec.nondiag["h"] if isinstance(dec, HeatDecomposition) else float(dec)
    if abs(power) <= POWER_FLOOR:
        return None
    return hot / power


def classify_mode(inv_eta_nd: float | None) -> HeatMode | None:
    if inv_eta_nd is None:
        return None
    if not math.isfinite(inv_eta_nd):
        raise ValueError(f"inv_eta_nd must be finite, got {inv_eta_nd!r}")
    if inv_eta_nd < 0:
        return HeatMode.HOT_REVERSED
    if inv_eta_nd <= 1:
        return HeatMode.IDEAL
    return HeatMode.COLD_REVERSED


def heat_decomposition(gen: Generator, rho_ss: np.ndarray) -> HeatDecomposition:
    basis = decomposition_basis(np.asarray(gen.h_rot), rho_ss)
    energy = np.einsum("in,ij,jn->n", basis.conj(), gen.h_energy, basis).real
    v = vec(rho_ss)
    total, diag, nondiag = {}, {}, {}
    for bath, d in gen.dissipators.items():
        drho = unvec(d @ v)
        total[bath] = float(np.trace(drho @ gen.h_energy).real)
        flows = np.einsum("in,ij,jn->n", basis.conj(), drho, basis).real
        diag[bath] = float(flows @ energy)
        nondiag[bath] = total[bath] - diag[bath]
    scale = max(1.0, abs(total["h"]), abs(total["c"]))
    if abs(diag["h"] + diag["c"]) > IDENTITY_TOL * scale:
        raise ConsistencyError(
            f"diagonal heat does not cancel: {diag['h'] + diag['c']!r}"
        )
    power = total["h"] + total["c"]
    inv = nondiag_efficiency(nondiag["h"], power)
    return HeatDecomposition(diag, nondiag, inv, classify_mode(inv), basis)


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    d = a - b
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (d + d.conj().T)))))
