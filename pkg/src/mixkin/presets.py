"""Initial data and parameters for the reference experiments."""

from __future__ import annotations

import numpy as np

from .grid import build_grid
from .moments import SpeciesTable, maxwellian_state

__all__ = [
    "FOUR_GAS_MASSES",
    "FOUR_GAS_LAMBDA",
    "four_gas_species",
    "accuracy_fields",
    "indiff_fields",
    "riemann_fields",
    "INDIFF_SCHEDULE",
]

FOUR_GAS_MASSES = (58.5, 18.0, 40.0, 36.5)
FOUR_GAS_LAMBDA = (
    (5.0, 6.0, 2.0, 7.0),
    (6.0, 4.0, 5.0, 8.0),
    (2.0, 5.0, 4.0, 3.0),
    (7.0, 8.0, 3.0, 6.0),
)
SIGMA = (10.0, 13.0, 16.0, 19.0)

# CFL 0.2 while the initial layer settles, then CFL 2
INDIFF_SCHEDULE = ((0.02, 0.2), (float("inf"), 2.0))

RIEMANN_LEFT = {"rho": 1.0, "u": 0.0, "p": 5.0 / 3.0, "rho_s": (0.1, 0.2, 0.3, 0.4)}
RIEMANN_RIGHT = {"rho": 1.0 / 8.0, "u": 0.0, "p": 1.0 / 6.0, "rho_s": (1 / 80, 2 / 80, 3 / 80, 4 / 80)}
RIEMANN_X0 = 0.5


def four_gas_species(k_b=1.0):
    return SpeciesTable(np.array(FOUR_GAS_MASSES), np.array(FOUR_GAS_LAMBDA), k_b)


def accuracy_fields(x, species):
    """Smooth periodic data: per-species Gaussian velocity pulses."""
    L = species.L
    n0 = 1.0 / species.masses
    T0 = 4.0 / np.sum(n0)
    n = np.repeat(n0[:, None], x.size, axis=1)
    T = np.full((L, x.size), T0)
    u = np.empty((L, x.size))
    for s in range(1, L + 1):
        sig = SIGMA[s - 1]
        u[s - 1] = s / sig * (np.exp(-((sig * x - 1.0 + s / 3.0) ** 2)) + np.exp(-((sig * x + 3.0 - s / 10.0) ** 2)))
    return n, u, T


def _indiff_velocity(x):
    return 0.1 * (np.exp(-((10.0 * x - 1.0 + 1.0 / 3.0) ** 2)) - 2.0 * np.exp(-((10.0 * x + 3.0 - 0.1) ** 2)))


def indiff_species(count, mass=58.5, lam=5.0, k_b=1.0):
    return SpeciesTable.uniform(mass, lam, count, k_b)


def indiff_fields(x, species):
    """Identical species sharing total density ``4 / m``; ``count`` may be 1."""
    L = species.L
    m = species.masses[0]
    n_s = np.full((L, x.size), 4.0 / m / L)
    T = np.full((L, x.size), 4.0 / np.sum(n_s[:, 0]))
    u = np.repeat(_indiff_velocity(x)[None], L, axis=0)
    return n_s, u, T


def riemann_fields(x, species, x0=RIEMANN_X0):
    """Sod-type mixture data; species share ``T = p / (n k_B)`` and rest."""
    left = x < x0
    rho_s = np.where(left[None], np.array(RIEMANN_LEFT["rho_s"])[:, None], np.array(RIEMANN_RIGHT["rho_s"])[:, None])
    n_s = rho_s / species.masses[:, None]
    p = np.where(left, RIEMANN_LEFT["p"], RIEMANN_RIGHT["p"])
    T = p / (np.sum(n_s, axis=0) * species.k_b)
    return n_s, np.zeros_like(n_s), np.repeat(T[None], species.L, axis=0)


def initial_state(fields, grid, species):
    n_s, u_s, T_s = fields(grid.x_nodes, species)
    return maxwellian_state(n_s, u_s, T_s, grid, species)


def accuracy_setup(nx, nv=60, x_domain=(-1.0, 1.0), v_domain=(-15.0, 15.0)):
    grid = build_grid(x_domain, nx, "periodic", v_domain, nv)
    species = four_gas_species()
    return grid, species, initial_state(accuracy_fields, grid, species)
