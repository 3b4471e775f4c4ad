"""Reference hydrodynamic solvers for the mixture Euler limits.

Two systems are supported: the single velocity/temperature system, with
conserved rows ``(n_1..n_L, rho*u, E)``, and the multi velocity/temperature
system with per-species rows ``(n_s, rho_s*u_s, E_s)`` plus interspecies
exchange sources scaled by ``1/kappa``. Space uses finite-difference
local Lax-Friedrichs flux splitting with CWENO23 edge values; time uses the
three-stage SSP Runge-Kutta method.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import StepTooLarge, VacuumState
from .reconstruct import _variant

__all__ = [
    "EulerStateSingle",
    "EulerStateMulti",
    "single_from_primitive",
    "multi_from_primitive",
    "single_euler_rhs",
    "multi_euler_rhs",
    "exchange_sources",
    "max_wave_speed",
    "source_rate",
    "ssp_rk3_step",
    "ssp_rk3_advance",
    "CFL_LIMIT",
    "SOURCE_LIMIT",
]

logger = logging.getLogger(__name__)

CFL_LIMIT = 0.5
SOURCE_LIMIT = 0.5


@dataclass
class EulerStateSingle:
    """Densities ``n_s`` (L, Nx), momentum ``rho*u`` and total energy (Nx,)."""

    n_s: np.ndarray
    momentum: np.ndarray
    energy: np.ndarray
    t: float = 0.0

    def primitive(self, species):
        """Return ``(rho, u, T, p)`` per node."""
        n = np.sum(self.n_s, axis=0)
        rho = np.sum(species.masses[:, None] * self.n_s, axis=0)
        if np.any(n <= 0) or np.any(rho <= 0):
            raise VacuumState("non-positive density", index=int(np.argmin(n)))
        u = self.momentum / rho
        p = (2.0 / 3.0) * (self.energy - 0.5 * rho * u ** 2)
        if np.any(p <= 0):
            raise VacuumState("non-positive pressure", index=int(np.argmin(p)))
        return rho, u, p / (n * species.k_b), p

    def pack(self):
        return np.concatenate([self.n_s, self.momentum[None], self.energy[None]])

    @classmethod
    def unpack(cls, rows, t=0.0):
        return cls(rows[:-2].copy(), rows[-2].copy(), rows[-1].copy(), t)


@dataclass
class EulerStateMulti:
    """Per-species densities, momenta ``rho_s*u_s`` and energies ``E_s``, each (L, Nx)."""

    n_s: np.ndarray
    momentum_s: np.ndarray
    energy_s: np.ndarray
    t: float = 0.0

    def primitive(self, species):
        """Return per-species ``(rho_s, u_s, T_s, p_s)``."""
        if np.any(self.n_s <= 0):
            raise VacuumState("non-positive species density", index=int(np.argmin(np.min(self.n_s, axis=0))))
        rho_s = species.masses[:, None] * self.n_s
        u_s = self.momentum_s / rho_s
        p_s = (2.0 / 3.0) * (self.energy_s - 0.5 * rho_s * u_s ** 2)
        if np.any(p_s <= 0):
            raise VacuumState("non-positive species pressure", index=int(np.argmin(np.min(p_s, axis=0))))
        return rho_s, u_s, p_s / (self.n_s * species.k_b), p_s

    def pack(self):
        return np.concatenate([self.n_s, self.momentum_s, self.energy_s])

    @classmethod
    def unpack(cls, rows, t=0.0):
        n_s, mom, en = np.split(rows, 3)
        return cls(n_s.copy(), mom.copy(), en.copy(), t)


def single_from_primitive(n_s, u, T, species, t=0.0):
    n_s = np.asarray(n_s, dtype=float)
    rho = np.sum(species.masses[:, None] * n_s, axis=0)
    n = np.sum(n_s, axis=0)
    u = np.asarray(u, dtype=float) * np.ones_like(n)
    energy = 0.5 * rho * u ** 2 + 1.5 * n * species.k_b * np.asarray(T, dtype=float)
    return EulerStateSingle(n_s.copy(), rho * u, energy, t)


def multi_from_primitive(n_s, u_s, T_s, species, t=0.0):
    n_s = np.asarray(n_s, dtype=float)
    rho_s = species.masses[:, None] * n_s
    u_s = np.asarray(u_s, dtype=float) * np.ones_like(n_s)
    energy = 0.5 * rho_s * u_s ** 2 + 1.5 * n_s * species.k_b * np.asarray(T_s, dtype=float)
    return EulerStateMulti(n_s.copy(), rho_s * u_s, energy, t)


def _pad(rows, bc, width=2):
    return np.pad(rows, [(0, 0), (width, width)], mode="wrap" if bc == "periodic" else "edge")


def _split_flux_divergence(U, F, speed, dx, bc):
    """``-(F_{i+1/2} - F_{i-1/2}) / dx`` with component-wise LLF splitting.

    ``U``, ``F`` are (rows, Nx); ``speed`` is the local wave speed (Nx,) or
    (rows, Nx). Interface speeds take the maximum over the four cells the
    two split stencils touch.
    """
    n = U.shape[-1]
    Up, Fp = _pad(U, bc), _pad(F, bc)
    sp = _pad(np.broadcast_to(speed, U.shape), bc)
    # interfaces between padded cells j and j+1 for j = 1..n+1
    j = np.arange(1, n + 2)
    alpha = np.max(np.stack([sp[:, j - 1], sp[:, j], sp[:, j + 1], sp[:, j + 2]]), axis=0)
    scheme = _variant(2)
    plus = np.stack([0.5 * (Fp[:, j + d] + alpha * Up[:, j + d]) for d in (-1, 0, 1)])
    minus = np.stack([0.5 * (Fp[:, j + d] - alpha * Up[:, j + d]) for d in (0, 1, 2)])
    cp = scheme.coefficients(plus)
    cm = scheme.coefficients(minus)
    # R(xi) = c0 + c1*xi + c2*xi^2/2 at xi = +1/2 and -1/2
    flux = (cp[0] + 0.5 * cp[1] + 0.125 * cp[2]) + (cm[0] - 0.5 * cm[1] + 0.125 * cm[2])
    return -(flux[:, 1:] - flux[:, :-1]) / dx


def _single_fluxes(state, species):
    rho, u, T, p = state.primitive(species)
    U = state.pack()
    F = np.concatenate([state.n_s * u, (rho * u ** 2 + p)[None], ((state.energy + p) * u)[None]])
    speed = np.abs(u) + np.sqrt(5.0 * p / (3.0 * rho))
    return U, F, speed


def _multi_fluxes(state, species):
    rho_s, u_s, T_s, p_s = state.primitive(species)
    U = state.pack()
    F = np.concatenate([state.n_s * u_s, rho_s * u_s ** 2 + p_s, (state.energy_s + p_s) * u_s])
    speed = np.abs(u_s) + np.sqrt(5.0 * p_s / (3.0 * rho_s))
    return U, F, np.concatenate([speed, speed, speed])


def single_euler_rhs(state, grid, species):
    """Time derivative of the packed single-temperature rows."""
    U, F, speed = _single_fluxes(state, species)
    return _split_flux_divergence(U, F, speed, grid.dx, grid.bc)


def exchange_sources(n_s, u_s, T_s, species):
    """Momentum and energy exchange ``R_sk``, ``S_sk`` of shape (L, L, Nx)."""
    m = species.masses
    ms, mk = m[:, None, None], m[None, :, None]
    lam = species.lam[:, :, None]
    reduced = ms * mk / (ms + mk)
    nn = n_s[:, None, :] * n_s[None, :, :]
    us, uk = u_s[:, None, :], u_s[None, :, :]
    Ts, Tk = T_s[:, None, :], T_s[None, :, :]
    R = lam * reduced * nn * (uk - us)
    S = lam * reduced / (ms + mk) * nn * ((ms * us + mk * uk) * (uk - us) + 3.0 * species.k_b * (Tk - Ts))
    off = (1.0 - np.eye(m.size))[:, :, None]
    return R * off, S * off


def multi_euler_rhs(state, grid, species, kappa):
    """Flux divergence plus ``(1/kappa)`` times the summed exchange sources."""
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    U, F, speed = _multi_fluxes(state, species)
    rhs = _split_flux_divergence(U, F, speed, grid.dx, grid.bc)
    _, u_s, T_s, _ = state.primitive(species)
    R, S = exchange_sources(state.n_s, u_s, T_s, species)
    L = species.L
    rhs[L: 2 * L] += np.sum(R, axis=1) / kappa
    rhs[2 * L:] += np.sum(S, axis=1) / kappa
    return rhs


def max_wave_speed(state, species):
    if isinstance(state, EulerStateMulti):
        return float(np.max(_multi_fluxes(state, species)[2]))
    return float(np.max(_single_fluxes(state, species)[2]))


def source_rate(state, species):
    """Largest total exchange frequency ``max_s sum_k lambda_sk n_k``."""
    return float(np.max(species.lam @ state.n_s))


def _system(state):
    if isinstance(state, EulerStateMulti):
        return EulerStateMulti
    if isinstance(state, EulerStateSingle):
        return EulerStateSingle
    raise TypeError(f"unsupported state type {type(state).__name__}")


def ssp_rk3_step(state, dt, grid, species, kappa=None):
    """One SSP-RK3 step; raises StepTooLarge if ``dt`` breaks a restriction."""
    cls = _system(state)
    limit = CFL_LIMIT * grid.dx / max_wave_speed(state, species)
    if dt > limit * (1.0 + 1e-12):
        raise StepTooLarge(f"dt={dt!r} exceeds convective limit {limit!r}")
    if cls is EulerStateMulti:
        if kappa is None:
            raise ValueError("the multi-temperature system needs kappa")
        rate = source_rate(state, species)
        if rate > 0 and dt > SOURCE_LIMIT * kappa / rate * (1.0 + 1e-12):
            raise StepTooLarge(f"dt={dt!r} exceeds source limit {SOURCE_LIMIT * kappa / rate!r}")

        def rhs(rows):
            return multi_euler_rhs(cls.unpack(rows), grid, species, kappa)
    else:

        def rhs(rows):
            return single_euler_rhs(cls.unpack(rows), grid, species)

    u0 = state.pack()
    u1 = u0 + dt * rhs(u0)
    u2 = 0.75 * u0 + 0.25 * (u1 + dt * rhs(u1))
    u3 = u0 / 3.0 + 2.0 / 3.0 * (u2 + dt * rhs(u2))
    return cls.unpack(u3, state.t + dt)


def ssp_rk3_advance(state, grid, species, time_control, kappa=None, callback=None):
    """Integrate to ``time_control.t_final`` with adaptive explicit steps.

    Each step takes the largest ``dt`` allowed by the current CFL entry, the
    optional ``dt_cap``, the source restriction (multi system) and the time
    left. CFL entries above the stability limit raise StepTooLarge.
    """
    for _, _, cfl in time_control.segments():
        if cfl > CFL_LIMIT:
            raise StepTooLarge(f"explicit Euler solver needs CFL <= {CFL_LIMIT}, got {cfl!r}")
    t_final = time_control.t_final
    segments = list(time_control.segments())
    step = 0
    while state.t < t_final * (1.0 - 1e-14):
        cfl = next((c for _, stop, c in segments if state.t < stop * (1.0 - 1e-14)), segments[-1][2])
        dt = cfl * grid.dx / max_wave_speed(state, species)
        if time_control.dt_cap is not None:
            dt = min(dt, time_control.dt_cap)
        if isinstance(state, EulerStateMulti):
            rate = source_rate(state, species)
            if rate > 0:
                dt = min(dt, SOURCE_LIMIT * kappa / rate)
        dt = min(dt, t_final - state.t)
        state = ssp_rk3_step(state, dt, grid, species, kappa)
        step += 1
        if not np.all(np.isfinite(state.pack())):
            raise VacuumState("non-finite hydrodynamic state", index=step)
        if callback is not None:
            callback(step, state)
    state.t = t_final
    logger.debug("euler reference finished after %d steps", step)
    return state
