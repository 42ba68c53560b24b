"""One-dimensional micromagnetic solver for a wire with a head-to-head wall.

Magnetization lives on a uniform chain of cells along x. The effective
field has uniaxial anisotropy along x, nearest-neighbour exchange, the
local thin-film demagnetizing field -4 pi Ms m_z, the applied field and
optional linear pinning ramps, all along e_x except exchange and demag.
The outermost cells at each end are frozen to their domain direction.

Positions are reported in metres and fields in Oe. Time stepping runs in
compiled kernels (see ``_kernels``); ``effective_field`` and ``llg_rhs``
are the plain-numpy reference for the same physics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels as K
from .drive import DriveProgram
from .units import MaterialParams, derived_scales

__all__ = [
    "MagnetizationGrid",
    "PinningCenter",
    "SimConfig",
    "WallObservables",
    "MicromagResult",
    "SimulationDiverged",
    "WallLeftRegion",
    "ConfigError",
    "initial_neel_wall",
    "effective_field",
    "llg_rhs",
    "projected_velocity",
    "pinning_field",
    "stability_bound",
    "stability_limit",
    "default_dt",
    "LLGSolver",
    "step",
    "run",
    "relax",
    "track_wall",
    "wall_energy",
    "energy_rate",
]

_CM = 1e-2


class ConfigError(ValueError):
    pass


class SimulationDiverged(RuntimeError):
    pass


class WallLeftRegion(RuntimeError):
    def __init__(self, msg, result=None):
        super().__init__(msg)
        self.result = result


@dataclass
class MagnetizationGrid:
    """Unit vectors ``m`` (shape (n, 3)) on cells of size ``dx`` metres.

    Cell centres sit symmetrically about x=0 (``origin`` shifts them).
    ``clamp`` cells at each end are held fixed.
    """

    m: np.ndarray
    dx: float
    clamp: int = 3
    origin: float = 0.0

    def __post_init__(self):
        self.m = np.ascontiguousarray(self.m, dtype=float)
        if self.m.ndim != 2 or self.m.shape[1] != 3:
            raise ValueError("m must have shape (n, 3)")
        if self.dx <= 0:
            raise ValueError("dx must be positive")
        if self.m.shape[0] <= 2 * self.clamp + 2:
            raise ValueError("grid too short for its clamped ends")

    @property
    def n(self) -> int:
        return self.m.shape[0]

    @property
    def length(self) -> float:
        return self.n * self.dx

    @property
    def x(self) -> np.ndarray:
        """Cell centres in metres."""
        return (np.arange(self.n) - 0.5 * (self.n - 1)) * self.dx + self.origin

    def copy(self) -> MagnetizationGrid:
        return replace(self, m=self.m.copy())


@dataclass(frozen=True)
class PinningCenter:
    """Linear ramp field V0 (x - x0) / zeta along e_x inside |x - x0| < zeta.

    V0 in Oe, zeta and x0 in metres. For the head-to-head wall used here a
    negative V0 is restoring (a trap); positive V0 repels the wall.
    """

    V0: float
    zeta: float
    x0: float = 0.0

    def __post_init__(self):
        if not self.zeta > 0:
            raise ValueError("zeta must be positive")

    def shifted(self, dx: float) -> PinningCenter:
        return replace(self, x0=self.x0 + dx)


def pinning_field(pin: PinningCenter, x):
    """Pinning field (Oe, along e_x) at position(s) x in metres."""
    d = np.asarray(x, dtype=float) - pin.x0
    out = np.where(np.abs(d) < pin.zeta, pin.V0 * d / pin.zeta, 0.0)
    return out if out.ndim else float(out)


def stability_bound(material: MaterialParams, dx: float) -> float:
    """Largest admissible step, 0.25 dx^2 Ms / (2 A gamma), in seconds."""
    dx_cm = dx / _CM
    return 0.25 * dx_cm**2 * material.Ms_cgs / (2 * material.A_cgs * material.gamma)


# The PECE multistep scheme has a smaller stability region than RK4 for the
# nearly imaginary exchange spectrum; it needs half the RK4 bound.
_STEPPER_MARGIN = {"rk4": 1.0, "abm4": 0.5}


def stability_limit(material: MaterialParams, dx: float, stepper: str = "abm4") -> float:
    return stability_bound(material, dx) * _STEPPER_MARGIN[stepper]


def default_dt(material: MaterialParams, dx: float, stepper: str = "abm4",
               nominal: float = 0.8e-12) -> float:
    """``nominal`` divided by the smallest integer that respects the stepper's limit."""
    bound = stability_limit(material, dx, stepper)
    return nominal / max(1, math.ceil(nominal / bound - 1e-12))


@dataclass(frozen=True)
class SimConfig:
    """Time stepping settings. ``dt=None`` picks :func:`default_dt`."""

    t_end: float
    dt: float | None = None
    sample_every: int = 10
    stepper: str = "abm4"
    renormalize: bool = True

    def __post_init__(self):
        if self.stepper not in ("abm4", "rk4"):
            raise ConfigError(f"unknown stepper {self.stepper!r}; use 'abm4' or 'rk4'")
        if not self.t_end > 0:
            raise ConfigError("t_end must be positive")
        if self.dt is not None and not self.dt > 0:
            raise ConfigError("dt must be positive")
        if self.sample_every < 1:
            raise ConfigError("sample_every must be >= 1")

    def resolved_dt(self, material: MaterialParams, dx: float) -> float:
        bound = stability_limit(material, dx, self.stepper)
        if self.dt is None:
            return default_dt(material, dx, self.stepper)
        if self.dt > bound:
            raise ConfigError(
                f"dt={self.dt:.3g} s exceeds the exchange stability bound "
                f"{_STEPPER_MARGIN[self.stepper]:g}*0.25*dx^2*Ms/(2*A*gamma) = {bound:.3g} s "
                f"for dx={dx:.3g} m with the {self.stepper} stepper")
        return self.dt


# ---------------------------------------------------------------------------
# initial state and fields

def initial_neel_wall(material: MaterialParams, length: float = 1.2e-6, dx: float = 2e-9,
                      center: float = 0.0, clamp: int = 3) -> MagnetizationGrid:
    """Static in-plane Neel wall, theta = 2 atan(exp((x - center)/W0)), phi = 0."""
    W0 = derived_scales(material).W0
    if length < 20 * W0:
        raise ConfigError(f"wire length {length:g} m is shorter than 20 W0 = {20 * W0:g} m")
    n = int(round(length / dx))
    grid = MagnetizationGrid(np.zeros((n, 3)), dx, clamp)
    u = (grid.x - center) / W0
    grid.m[:, 0] = -np.tanh(u)
    grid.m[:, 1] = 1.0 / np.cosh(u)
    grid.m[:clamp] = (1.0, 0.0, 0.0)
    grid.m[n - clamp:] = (-1.0, 0.0, 0.0)
    return grid


def _pins_array(pinning) -> np.ndarray:
    rows = [(p.V0, p.zeta / _CM, p.x0 / _CM) for p in pinning or ()]
    return np.array(rows, dtype=float).reshape(-1, 3)


def _internal_field(m, material: MaterialParams, dx_cm: float):
    """Anisotropy + exchange + local demag (the field of the wall energy)."""
    H = np.zeros_like(m)
    lap = np.zeros_like(m)
    lap[1:-1] = (m[:-2] - 2 * m[1:-1] + m[2:]) / dx_cm**2
    H += material.exchange_stiffness * lap
    H[:, 0] += material.H_K * m[:, 0]
    H[:, 2] -= material.four_pi_Ms * m[:, 2]
    return H


def effective_field(grid: MagnetizationGrid, material: MaterialParams, H_ext: float = 0.0,
                    pinning=()) -> np.ndarray:
    """Per-cell effective field in Oe, shape (n, 3).

    Exchange uses the three-point Laplacian; the end cells, which are
    frozen, carry zero exchange.
    """
    H = _internal_field(grid.m, material, grid.dx / _CM)
    H[:, 0] += H_ext
    for pin in pinning or ():
        H[:, 0] += pinning_field(pin, grid.x)
    return H


def _gradient(m, dx_cm):
    return np.gradient(m, dx_cm, axis=0)


def llg_rhs(grid: MagnetizationGrid, fields: np.ndarray, b_J: float,
            material: MaterialParams) -> np.ndarray:
    """dm/dt (1/s) from the Gilbert equation with adiabatic spin torque.

    Solving m' = T + alpha m x m' for m' gives (T + alpha m x T)/(1+alpha^2)
    with T = -gamma m x H - b_J m x (m x dm/dx). Frozen cells get zero.
    """
    m = grid.m
    a, g = material.alpha, material.gamma
    dmdx = _gradient(m, grid.dx / _CM)
    b = b_J / _CM
    T = -g * np.cross(m, fields) - b * np.cross(m, np.cross(m, dmdx))
    out = (T + a * np.cross(m, T)) / (1 + a * a)
    out[:grid.clamp] = 0.0
    out[grid.n - grid.clamp:] = 0.0
    return out


def projected_velocity(grid: MagnetizationGrid, dmdt: np.ndarray) -> float:
    """Rigid-translation velocity (m/s) that best explains ``dmdt``.

    Minimizes |dm/dt + v dm/dx|^2 over v.
    """
    dmdx = _gradient(grid.m, grid.dx)
    return float(-np.sum(dmdt * dmdx) / np.sum(dmdx * dmdx))


# ---------------------------------------------------------------------------
# stepping

class LLGSolver:
    """Fixed-step integrator state for one grid.

    The multistep history is rebuilt with RK4 whenever the drive or the
    step size changes.
    """

    def __init__(self, grid: MagnetizationGrid, material: MaterialParams, pinning=(),
                 stepper: str = "abm4", renormalize: bool = True, t: float = 0.0):
        self.grid = grid
        self.material = material
        self.stepper = stepper
        self.renormalize = renormalize
        self.t = t
        self._xpos = grid.x / _CM
        self._pins = _pins_array(pinning)
        m = material
        self._p = np.array([grid.dx / _CM, m.H_K, m.exchange_stiffness, m.four_pi_Ms,
                            0.0, 0.0, m.gamma, m.alpha])
        self._F = np.zeros((4,) + grid.m.shape)
        self._hist = 0
        self._key = None

    def advance(self, nsteps: int, h: float, b_J: float, H_ext: float) -> None:
        key = (h, b_J, H_ext)
        if key != self._key:
            self._key = key
            self._hist = 0
            self._p[K.HEXT] = H_ext
            self._p[K.BJ] = b_J / _CM
            K.rhs(self.grid.m, self._F[0], self._xpos, self._p, self._pins, self.grid.clamp)
        m = self.grid.m
        args = (self._xpos, self._p, self._pins, self.grid.clamp, self.renormalize, self._F)
        done = 0
        worst = 0.0
        if self.stepper == "abm4" and self._hist < 3:
            boot = min(3 - self._hist, nsteps)
            worst = K.rk4_steps(m, boot, h, *args)
            self._hist += boot
            done = boot
        if done < nsteps and worst <= 1e-3:
            kern = K.abm4_steps if self.stepper == "abm4" else K.rk4_steps
            worst = max(worst, kern(m, nsteps - done, h, *args))
        self.t += nsteps * h
        if not (worst <= 1e-3 and np.all(np.isfinite(m))):
            raise SimulationDiverged(
                f"norm drift {worst:.3g} before renormalization near t={self.t:.4g} s; "
                "reduce dt")


def step(grid: MagnetizationGrid, config: SimConfig, drive_at_t: tuple[float, float],
         material: MaterialParams, pinning=()) -> MagnetizationGrid:
    """One RK4 step of size ``config.dt`` on a copy of ``grid``.

    ``drive_at_t`` is (b_J m/s, H_ext Oe). Multistep integration needs
    history and goes through :class:`LLGSolver`.
    """
    out = grid.copy()
    h = config.resolved_dt(material, grid.dx)
    LLGSolver(out, material, pinning, "rk4", config.renormalize).advance(1, h, *drive_at_t)
    return out


# ---------------------------------------------------------------------------
# observables

@dataclass(frozen=True)
class WallObservables:
    """Wall position/width in m, velocity in m/s, energies per cross-section.

    ``status`` is "ok", or "split" when m_x does not change sign exactly
    once (numeric fields are then nan).
    """

    x_wall: float
    v_wall: float
    W_fit: float
    max_mz: float
    E: float = math.nan
    dE_dt: float = math.nan
    status: str = "ok"


def track_wall(grid: MagnetizationGrid) -> WallObservables:
    """Locate the m_x zero crossing and fit -tanh((x - x_wall)/W) to m_x."""
    mx = grid.m[:, 0]
    x = grid.x
    max_mz = float(np.max(np.abs(grid.m[:, 2])))
    s = np.signbit(mx)
    idx = np.flatnonzero(s[1:] != s[:-1])
    if len(idx) != 1:
        return WallObservables(math.nan, math.nan, math.nan, max_mz, status="split")
    i = idx[0]
    x_wall = x[i] + (x[i + 1] - x[i]) * mx[i] / (mx[i] - mx[i + 1])
    sign = 1.0 if mx[i] > 0 else -1.0  # +1: head-to-head (+x on the left)

    # linearized starting guess, then Gauss-Newton on W alone
    core = np.abs(mx) < 0.9
    u = x[core] - x_wall
    z = np.arctanh(np.clip(-sign * mx[core], -0.999999, 0.999999))
    W = float(np.sum(u * u) / np.sum(u * z)) if core.sum() >= 2 and np.sum(u * z) > 0 else 5 * grid.dx
    win = np.abs(x - x_wall) < 10 * W
    u = x[win] - x_wall
    target = mx[win]
    for _ in range(20):
        th = np.tanh(u / W)
        r = target + sign * th
        J = -sign * (1 - th * th) * u / W**2
        dW = -np.sum(J * r) / np.sum(J * J)
        W += dW
        if abs(dW) < 1e-12 * W:
            break
    return WallObservables(float(x_wall), math.nan, float(W), max_mz)


def wall_energy(grid: MagnetizationGrid, material: MaterialParams) -> float:
    """Energy per cross-section (J/m^2) relative to the uniform domains.

    Densities 2 pi Ms^2 m_z^2 + (H_K Ms / 2)(1 - m_x^2) are integrated with
    the trapezoidal rule; exchange A |dm/dx|^2 uses neighbour differences,
    which makes the energy exactly consistent with the discrete field.
    """
    m = grid.m
    dx = grid.dx / _CM
    Ms = material.Ms_cgs
    local = 2 * math.pi * Ms**2 * m[:, 2] ** 2 + 0.5 * material.H_K * Ms * (1 - m[:, 0] ** 2)
    e_local = np.trapezoid(local, dx=dx)
    e_ex = material.A_cgs * np.sum(np.diff(m, axis=0) ** 2) / dx
    return float(e_local + e_ex) * 1e-3


def energy_rate(grid: MagnetizationGrid, material: MaterialParams, b_J: float) -> dict:
    """Rate of change of :func:`wall_energy` (W/m^2) with its decomposition.

    The field entering the three integrands is the one derived from the
    wall energy itself (no applied or pinning field), so ``total`` is the
    exact time derivative of the energy under the LLG flow. Keys: total,
    damping, torque.
    """
    m = grid.m
    dx = grid.dx / _CM
    a, g, Ms = material.alpha, material.gamma, material.Ms_cgs
    b = b_J / _CM
    H = _internal_field(m, material, dx)
    dmdx = _gradient(m, dx)
    live = slice(grid.clamp, grid.n - grid.clamp)
    mxH = np.cross(m, H)[live]
    damping = -g * a * Ms / (1 + a * a) * np.sum(mxH * mxH) * dx
    t2 = -b * Ms / (1 + a * a) * np.sum((H * dmdx)[live]) * dx
    t3 = -b * a * Ms / (1 + a * a) * np.sum((dmdx * np.cross(H, m))[live]) * dx
    scale = 1e-3
    return {"total": (damping + t2 + t3) * scale, "damping": damping * scale,
            "torque": (t2 + t3) * scale}


# ---------------------------------------------------------------------------
# runs

@dataclass
class MicromagResult:
    """Sampled wall observables plus the final grid.

    ``status``: "ok" (ran to the end), "split" (wall lost its single
    crossing), "left" (wall approached a wire end), "stopped" (caller's
    stop condition fired).
    """

    columns: dict[str, np.ndarray]
    grid: MagnetizationGrid
    status: str
    t_final: float
    snapshots: dict[float, np.ndarray] = field(default_factory=dict)

    def __getitem__(self, key):
        return self.columns[key]


COLUMNS = ("t_s", "x_wall_m", "v_wall_m_per_s", "W_fit_m", "max_mz", "E_rel", "dE_dt")


def run(grid: MagnetizationGrid, config: SimConfig, drive: DriveProgram, material: MaterialParams,
        pinning=(), snapshots=(), stop=None, raise_on_exit: bool = True,
        stop_on_split: bool = False, t0: float = 0.0) -> MicromagResult:
    """Integrate ``grid`` in place under ``drive`` and sample the wall.

    ``stop(obs, t) -> bool`` ends the run early. When the wall comes within
    5 W0 of either end the run stops; with ``raise_on_exit`` a
    :class:`WallLeftRegion` carrying the partial result is raised.
    """
    if config.t_end > drive.duration * (1 + 1e-12):
        raise ConfigError("simulation is longer than the drive program")
    dt = config.resolved_dt(material, grid.dx)
    W0 = derived_scales(material).W0
    lo = grid.x[0] + 5 * W0
    hi = grid.x[-1] - 5 * W0
    solver = LLGSolver(grid, material, pinning, config.stepper, config.renormalize, t=t0)
    rows = []
    snaps: dict[float, np.ndarray] = {}
    pending = sorted(float(s) for s in snapshots)

    def sample(t, b_J):
        obs = track_wall(grid)
        e = wall_energy(grid, material)
        r = energy_rate(grid, material, b_J)["total"]
        rows.append((t, obs.x_wall, obs.W_fit, obs.max_mz, e, r))
        return obs

    edges = sorted({0.0, config.t_end, *[b for b in drive.breakpoints if 0 < b < config.t_end]})
    status = "ok"
    b_J, _ = drive.at(0.0)
    obs = sample(t0, b_J)
    if obs.status == "split":
        status = "split"
    while pending and pending[0] <= t0 + 1e-18:
        snaps[pending.pop(0)] = grid.m.copy()

    for a, b in zip(edges, edges[1:]):
        if status != "ok":
            break
        nseg = max(1, math.ceil((b - a) / dt - 1e-9))
        h = (b - a) / nseg
        b_J, H_ext = drive.at(0.5 * (a + b))
        done = 0
        while done < nseg:
            chunk = min(config.sample_every, nseg - done)
            if pending:
                # land exactly on requested snapshot times when they fall inside
                k = math.floor((pending[0] - (t0 + a)) / h + 1e-9) - done
                if 0 < k < chunk:
                    chunk = k
            solver.advance(chunk, h, b_J, H_ext)
            done += chunk
            t = t0 + a + done * h
            obs = sample(t, b_J)
            while pending and pending[0] <= t + 1e-6 * h:
                snaps[pending.pop(0)] = grid.m.copy()
            if obs.status == "split":
                if stop_on_split:
                    status = "split"
                    break
                continue
            if not lo < obs.x_wall < hi:
                status = "left"
                break
            if stop is not None and stop(obs, t):
                status = "stopped"
                break

    arr = np.array(rows, dtype=float)
    t = arr[:, 0]
    xw = arr[:, 1]
    v = np.gradient(xw, t) if len(t) > 1 else np.zeros(1)
    cols = dict(zip(COLUMNS, (t, xw, v, arr[:, 2], arr[:, 3], arr[:, 4], arr[:, 5])))
    result = MicromagResult(cols, grid, status, float(t[-1]), snaps)
    if status == "left" and raise_on_exit:
        raise WallLeftRegion("wall left tracking region", result)
    return result


def relax(grid: MagnetizationGrid, material: MaterialParams, tol: float = 1e-3,
          max_steps: int = 200_000, pinning=()) -> MagnetizationGrid:
    """Damping-dominated settle at zero drive until max |m x H| < tol (Oe).

    Uses alpha=1 (fastest energy descent) and leaves the grid in place.
    """
    mat = material.with_(alpha=1.0)
    h = default_dt(mat, grid.dx, "rk4")
    solver = LLGSolver(grid, mat, pinning, "rk4")
    live = slice(grid.clamp, grid.n - grid.clamp)
    for _ in range(0, max_steps, 200):
        solver.advance(200, h, 0.0, 0.0)
        H = effective_field(grid, material, 0.0, pinning)
        if np.max(np.linalg.norm(np.cross(grid.m, H)[live], axis=1)) < tol:
            break
    return grid
