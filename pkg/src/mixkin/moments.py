"""Species tables, Chu-reduced mixture states and their discrete moments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveDensity, NonPositiveTemperature

__all__ = [
    "SpeciesTable",
    "MixtureState",
    "MomentField",
    "compute_moments",
    "species_moments",
    "maxwellian_pair",
    "maxwellian_state",
]


@dataclass(frozen=True)
class SpeciesTable:
    """Masses ``m_s`` and symmetric Maxwell-molecule rates ``lambda_sk``."""

    masses: np.ndarray
    lam: np.ndarray
    k_b: float = 1.0

    def __post_init__(self):
        m = np.atleast_1d(np.asarray(self.masses, dtype=float))
        lam = np.atleast_2d(np.asarray(self.lam, dtype=float))
        if m.ndim != 1 or m.size < 1:
            raise ValueError("masses must be a non-empty vector")
        if np.any(m <= 0) or not np.all(np.isfinite(m)):
            raise ValueError("masses must be positive")
        if lam.shape != (m.size, m.size):
            raise ValueError(f"lambda must be {m.size}x{m.size}, got {lam.shape}")
        if np.any(lam < 0) or not np.array_equal(lam, lam.T):
            raise ValueError("lambda must be symmetric and non-negative")
        if not self.k_b > 0:
            raise ValueError("k_b must be positive")
        object.__setattr__(self, "masses", m)
        object.__setattr__(self, "lam", lam)

    @property
    def L(self):
        return self.masses.size

    @classmethod
    def uniform(cls, mass, lam, count, k_b=1.0):
        return cls(np.full(count, float(mass)), np.full((count, count), float(lam)), k_b)


@dataclass
class MixtureState:
    """Chu pair per species, arrays of shape ``(L, Nx, Nv+1)``."""

    g1: np.ndarray
    g2: np.ndarray
    t: float = 0.0

    def copy(self):
        return MixtureState(self.g1.copy(), self.g2.copy(), self.t)

    def is_finite(self):
        return bool(np.all(np.isfinite(self.g1)) and np.all(np.isfinite(self.g2)))


@dataclass(frozen=True)
class MomentField:
    """Per-species ``(L, Nx)`` and global ``(Nx,)`` macroscopic fields."""

    n_s: np.ndarray
    u_s: np.ndarray
    T_s: np.ndarray
    n: np.ndarray
    rho: np.ndarray
    u: np.ndarray
    T: np.ndarray
    E: np.ndarray
    masses: np.ndarray

    @property
    def rho_s(self):
        return self.masses[:, None] * self.n_s

    @property
    def L(self):
        return self.n_s.shape[0]


def species_moments(g1, g2, grid, species):
    """Number density, velocity and temperature of every species."""
    dv = grid.dv
    v = grid.v_nodes
    n = np.sum(g1, axis=-1) * dv
    if np.any(n <= 0):
        bad = np.argwhere(n <= 0)[0]
        raise NonPositiveDensity("non-positive number density", index=tuple(int(i) for i in bad))
    u = np.sum(g1 * v, axis=-1) * dv / n
    second = np.sum(g1 * (v - u[..., None]) ** 2, axis=-1) * dv + np.sum(g2, axis=-1) * dv
    m = species.masses.reshape((-1,) + (1,) * (n.ndim - 1))
    T = m * second / (3.0 * n * species.k_b)
    return n, u, T


def global_moments(n_s, u_s, T_s, species):
    m = species.masses[:, None]
    k_b = species.k_b
    rho_s = m * n_s
    n = np.sum(n_s, axis=0)
    rho = np.sum(rho_s, axis=0)
    u = np.sum(rho_s * u_s, axis=0) / rho
    T = (3.0 * np.sum(n_s * k_b * T_s, axis=0) + np.sum(rho_s * (u_s - u) ** 2, axis=0)) / (3.0 * n * k_b)
    E = 0.5 * rho * u ** 2 + 1.5 * n * k_b * T
    return n, rho, u, T, E


def compute_moments(state, grid, species):
    n_s, u_s, T_s = species_moments(state.g1, state.g2, grid, species)
    n, rho, u, T, E = global_moments(n_s, u_s, T_s, species)
    return MomentField(n_s, u_s, T_s, n, rho, u, T, E, species.masses)


def maxwellian_pair(n, u, T, m, grid, k_b=1.0):
    """Unit-density Maxwellian pair on the velocity nodes.

    Arguments broadcast; the velocity axis is appended last. ``n`` is only
    validated, callers scale by density themselves.
    """
    T = np.asarray(T, dtype=float)
    if np.any(T <= 0):
        raise NonPositiveTemperature("Maxwellian needs T > 0")
    if np.any(np.asarray(n) < 0):
        raise ValueError("Maxwellian density must be non-negative")
    b = (k_b * T / np.asarray(m, dtype=float))[..., None]
    dv = grid.v_nodes - np.asarray(u, dtype=float)[..., None]
    m1 = np.exp(-dv ** 2 / (2.0 * b)) / np.sqrt(2.0 * np.pi * b)
    return m1, 2.0 * b * m1


def maxwellian_state(n_s, u_s, T_s, grid, species, t=0.0):
    """Species Maxwellians with fields of shape ``(L, Nx)``."""
    n_s = np.asarray(n_s, dtype=float)
    m = species.masses[:, None]
    m1, m2 = maxwellian_pair(n_s, u_s, T_s, m, grid, species.k_b)
    return MixtureState(n_s[..., None] * m1, n_s[..., None] * m2, t)
