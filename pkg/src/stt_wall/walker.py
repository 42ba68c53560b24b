"""Reduced Walker-ansatz dynamics of a Neel wall under spin torque and field.

The wall is described by its out-of-plane angle phi(t), inverse width
c(t) and position x(t). The width is slaved to phi,

    c^2 = (Ms / 2A) (H_K + 4 pi Ms sin^2 phi),

so the dynamics reduce to one scalar ODE for phi plus a quadrature for x.
Public functions take b_J in m/s and fields in Oe and return SI values;
arithmetic is done in CGS.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .drive import DriveProgram, step_grid
from .units import MaterialParams, critical_torque_cgs, derived_scales

__all__ = [
    "WalkerState",
    "WalkerSolution",
    "Asymptotics",
    "CriticalTorque",
    "NoStationarySolution",
    "inverse_width",
    "walker_rhs",
    "wall_velocity",
    "initial_state",
    "integrate_walker",
    "asymptotics",
    "critical_torque",
    "stationary_torque",
    "wall_energy",
    "wall_energy_delta",
    "energy_rate",
    "recoil",
]

_CM = 1e-2  # m per cm


class NoStationarySolution(ValueError):
    """Drive exceeds the largest torque a distorted Walker wall can balance."""


def _c(phi, m: MaterialParams):
    Ms = m.Ms_cgs
    return np.sqrt(Ms / (2 * m.A_cgs) * (m.H_K + 4 * math.pi * Ms * np.sin(phi) ** 2))


def inverse_width(phi, material: MaterialParams):
    """Inverse wall width c(phi) in 1/m."""
    return _c(phi, material) / _CM


def _phidot(phi, b, H, m: MaterialParams):
    # b in cm/s
    a = m.alpha
    return (m.gamma * H + a * b * _c(phi, m)
            - 4 * math.pi * a * m.gamma * m.Ms_cgs * math.sin(phi) * math.cos(phi)) / (1 + a * a)


def _velocity(phi, b, H, m: MaterialParams):
    a = m.alpha
    return (m.gamma * (a * H + 4 * math.pi * m.Ms_cgs * math.sin(phi) * math.cos(phi))
            / ((1 + a * a) * _c(phi, m)) - b / (1 + a * a))


def walker_rhs(phi: float, b_J: float, H_ext: float, material: MaterialParams) -> float:
    """d(phi)/dt in rad/s for torque b_J (m/s) and field H_ext (Oe)."""
    return _phidot(phi, b_J / _CM, H_ext, material)


def wall_velocity(phi: float, b_J: float, H_ext: float, material: MaterialParams) -> float:
    """Wall velocity in m/s."""
    return _velocity(phi, b_J / _CM, H_ext, material) * _CM


@dataclass(frozen=True)
class WalkerState:
    phi: float  # rad
    c: float  # 1/m
    x: float  # m
    v: float  # m/s
    t: float  # s

    @property
    def width(self) -> float:
        return 1.0 / self.c


def initial_state(material: MaterialParams, phi: float = 0.0, x: float = 0.0,
                  t: float = 0.0, b_J: float = 0.0, H_ext: float = 0.0) -> WalkerState:
    """State with c slaved to phi; phi=0 gives the static Neel wall."""
    return WalkerState(phi, float(inverse_width(phi, material)), x,
                       wall_velocity(phi, b_J, H_ext, material), t)


@dataclass
class WalkerSolution:
    t: np.ndarray
    phi: np.ndarray
    x: np.ndarray
    v: np.ndarray
    c: np.ndarray
    converged: bool
    converged_at: float | None
    material: MaterialParams

    @property
    def width(self) -> np.ndarray:
        return 1.0 / self.c

    @property
    def terminal(self) -> WalkerState:
        return WalkerState(float(self.phi[-1]), float(self.c[-1]), float(self.x[-1]),
                           float(self.v[-1]), float(self.t[-1]))

    @property
    def samples(self) -> list[WalkerState]:
        return [WalkerState(*map(float, row)) for row in zip(self.phi, self.c, self.x, self.v, self.t)]

    @property
    def max_mz(self) -> np.ndarray:
        """Largest |m_z| across the wall, reached at its centre."""
        return np.abs(np.sin(self.phi))

    def columns(self) -> dict[str, np.ndarray]:
        return {
            "t_s": self.t,
            "phi_rad": self.phi,
            "W_m": self.width,
            "v_m_per_s": self.v,
            "x_m": self.x,
        }


def default_step(material: MaterialParams, drive: DriveProgram) -> float:
    """min(0.8 ps, 1/(50 * fastest rate)) for the given drive."""
    m = material
    a, g = m.alpha, m.gamma
    b_max = max(abs(s.b_J) for s in drive.segments) / _CM
    H_max = max(abs(s.H_ext) for s in drive.segments)
    c_max = float(_c(math.pi / 2, m))
    rate = (4 * math.pi * a * g * m.Ms_cgs + g * H_max + a * b_max * c_max) / (1 + a * a)
    return min(0.8e-12, 1.0 / (50 * rate))


def integrate_walker(initial: WalkerState, drive: DriveProgram, material: MaterialParams,
                     dt: float | None = None, tol_phi: float | None = None,
                     window: int = 100, stop_on_convergence: bool = False) -> WalkerSolution:
    """Classical RK4 on (phi, x) at fixed step, c recomputed from phi.

    Convergence means |dphi/dt| < tol_phi for ``window`` consecutive steps
    while the drive is no longer changing. The default tolerance is
    1e-4 * 4 pi alpha gamma Ms / (1 + alpha^2).
    """
    m = material
    if not math.isclose(initial.c, float(inverse_width(initial.phi, m)), rel_tol=1e-9):
        raise ValueError("initial state violates the width constraint")
    if dt is None:
        dt = default_step(m, drive)
    if tol_phi is None:
        tol_phi = 1e-4 * 4 * math.pi * m.alpha * m.gamma * m.Ms_cgs / (1 + m.alpha**2)

    t0 = initial.t
    steps = step_grid(drive.duration, dt, drive.breakpoints)
    n = len(steps)
    ts = np.empty(n + 1)
    phis = np.empty(n + 1)
    xs = np.empty(n + 1)
    vs = np.empty(n + 1)

    phi, x = initial.phi, initial.x / _CM
    b, H = drive.at(0.0)
    ts[0], phis[0], xs[0] = t0, phi, x
    vs[0] = _velocity(phi, b / _CM, H, m)
    quiet = 0
    converged_at = None
    last = n
    for k, (t, h) in enumerate(steps):
        b, H = drive.at(t + 0.5 * h)
        b /= _CM
        k1p = _phidot(phi, b, H, m)
        k1x = _velocity(phi, b, H, m)
        p2 = phi + 0.5 * h * k1p
        k2p = _phidot(p2, b, H, m)
        k2x = _velocity(p2, b, H, m)
        p3 = phi + 0.5 * h * k2p
        k3p = _phidot(p3, b, H, m)
        k3x = _velocity(p3, b, H, m)
        p4 = phi + h * k3p
        k4p = _phidot(p4, b, H, m)
        k4x = _velocity(p4, b, H, m)
        phi += h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p)
        x += h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x)
        ts[k + 1] = t0 + t + h
        phis[k + 1] = phi
        xs[k + 1] = x
        vs[k + 1] = _velocity(phi, b, H, m)

        if drive.is_constant_after(t) and abs(_phidot(phi, b, H, m)) < tol_phi:
            quiet += 1
            if quiet >= window and converged_at is None:
                converged_at = t0 + t + h
                if stop_on_convergence:
                    last = k + 1
                    break
        else:
            quiet = 0
            converged_at = None

    sl = slice(0, last + 1)
    phis = phis[sl]
    return WalkerSolution(
        t=ts[sl], phi=phis, x=xs[sl] * _CM, v=vs[sl] * _CM, c=inverse_width(phis, m),
        converged=converged_at is not None, converged_at=converged_at, material=m,
    )


# ---------------------------------------------------------------------------
# closed forms

@dataclass(frozen=True)
class CriticalTorque:
    """Critical spin torque of a Walker wall (velocities in m/s)."""

    b_c: float  # closed form at the quoted critical angle
    phi_c: float  # rad, sin^2 = H_K / (2 H_K + 4 pi Ms)
    b_c_approx: float  # 4 pi gamma Ms xi
    b_max: float  # true maximum of the stationary torque over phi
    phi_max: float


def stationary_torque(phi, material: MaterialParams):
    """b_J (m/s) that holds the wall stationary at angle phi with zero field."""
    m = material
    return 4 * math.pi * m.gamma * m.Ms_cgs * np.sin(phi) * np.cos(phi) / _c(phi, m) * _CM


def critical_torque(material: MaterialParams) -> CriticalTorque:
    m = material
    HK, fpm = m.H_K, m.four_pi_Ms
    phi_c = math.asin(math.sqrt(HK / (2 * HK + fpm)))
    # d/ds [s(1-s)/(HK + fpm s)] = 0  <=>  fpm s^2 + 2 HK s - HK = 0
    s_star = (-HK + math.sqrt(HK * HK + HK * fpm)) / fpm if HK > 0 else 0.0
    phi_max = math.asin(math.sqrt(s_star))
    if HK > 0:
        b_max = float(stationary_torque(phi_max, m))
    else:
        # c ~ sin(phi) as H_K -> 0; the supremum sits at phi -> 0
        b_max = math.sqrt(2) * m.gamma * math.sqrt(4 * math.pi * m.A_cgs) * _CM
    xi = derived_scales(m).xi if HK > 0 else math.sqrt(m.A_cgs / (4 * math.pi * m.Ms_cgs**2)) * _CM
    return CriticalTorque(
        b_c=critical_torque_cgs(m) * _CM,
        phi_c=phi_c,
        b_c_approx=4 * math.pi * m.gamma * m.Ms_cgs * xi,
        b_max=b_max,
        phi_max=phi_max,
    )


@dataclass(frozen=True)
class Asymptotics:
    phi_inf: float  # rad
    width_ratio: float  # W(inf) / W0
    x_max: float  # m; inf when a field keeps the wall moving
    v_s: float  # m/s
    phi_inf_small: float  # small-torque estimate
    width_ratio_small: float
    x_max_small: float


def _stationary_phi(material: MaterialParams, b: float, H: float) -> float:
    """Root of the stationary phi equation on the stable branch (b in cm/s)."""
    m = material
    crit = critical_torque(m)
    lim = crit.phi_max if m.H_K > 0 else math.pi / 4
    a, g = m.alpha, m.gamma

    def f(p):
        return (4 * math.pi * g * m.Ms_cgs * math.sin(p) * math.cos(p) / float(_c(p, m))
                - b - g * H / (a * float(_c(p, m))))

    lo, hi = -lim, lim
    if b == 0 and H == 0:
        return 0.0
    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0:
        raise NoStationarySolution(
            f"no stationary wall for b_J={b * _CM:g} m/s, H_ext={H:g} Oe "
            f"(largest balanced torque {crit.b_max:.4g} m/s)")
    return brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def asymptotics(material: MaterialParams, b_J: float, H_ext: float = 0.0) -> Asymptotics:
    """Long-time limit of the reduced dynamics under a constant drive."""
    m = material
    b = b_J / _CM
    phi = _stationary_phi(m, b, H_ext)
    c = float(_c(phi, m))
    W0 = 1.0 / float(_c(0.0, m))
    g, a = m.gamma, m.alpha
    if H_ext == 0:
        x_max = -quad(lambda p: 1.0 / (a * float(_c(p, m))), 0.0, phi, epsabs=0, epsrel=1e-12)[0]
    else:
        x_max = math.copysign(math.inf, H_ext)
    return Asymptotics(
        phi_inf=phi,
        width_ratio=1.0 / (c * W0),
        x_max=x_max * _CM,
        v_s=g * H_ext / (c * a) * _CM,
        phi_inf_small=b / (4 * math.pi * g * m.Ms_cgs * W0),
        width_ratio_small=1 - b * b / (2 * W0**2 * 4 * math.pi * m.Ms_cgs * m.H_K * g * g),
        x_max_small=-b / (4 * math.pi * g * a * m.Ms_cgs) * _CM,
    )


# ---------------------------------------------------------------------------
# energy

def wall_energy(phi, material: MaterialParams):
    """Energy per cross-section (J/m^2) of a Walker wall at angle phi.

    Integrating the magnetostatic, anisotropy and exchange densities over
    the trial profile gives 4 A c(phi), measured from the uniform state.
    """
    return 4 * material.A_cgs * _c(phi, material) * 1e-3


def energy_rate(phi, dphi_dt, material: MaterialParams):
    """Small-distortion energy pumping rate (W/m^2): 8 pi Ms^2 W0 sin cos dphi/dt."""
    m = material
    W0 = 1.0 / float(_c(0.0, m))
    return 8 * math.pi * m.Ms_cgs**2 * W0 * np.sin(phi) * np.cos(phi) * dphi_dt * 1e-3


def wall_energy_delta(material: MaterialParams, b_J: float) -> tuple[float, float]:
    """(L_w, Delta E) with Delta E = L_w b_J^2 / 2 in J/m^2."""
    sc = derived_scales(material)
    if abs(b_J) > 0.3 * sc.b_c:
        warnings.warn(f"|b_J|={abs(b_J):g} m/s exceeds 0.3 b_c; quadratic law is unreliable",
                      stacklevel=2)
    return sc.L_w, 0.5 * sc.L_w * b_J**2


def solution_energy_rate(sol: WalkerSolution, drive: DriveProgram) -> np.ndarray:
    """Pumping rate along a solution, dphi/dt taken from the equation of motion."""
    m = sol.material
    rates = np.array([walker_rhs(p, *drive.at(t), m) for p, t in zip(sol.phi, sol.t)])
    return energy_rate(sol.phi, rates, m)


def recoil(terminal: WalkerState, material: MaterialParams, duration: float = 5e-9,
           dt: float | None = None) -> WalkerSolution:
    """Relaxation with the drive switched off, starting from ``terminal``."""
    start = WalkerState(terminal.phi, float(inverse_width(terminal.phi, material)),
                        terminal.x, wall_velocity(terminal.phi, 0.0, 0.0, material), terminal.t)
    return integrate_walker(start, DriveProgram.constant(duration), material, dt=dt)
