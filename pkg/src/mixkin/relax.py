"""Interspecies relaxation: fictitious Maxwellian targets and the implicit
moment solves that make the BGK stage update explicit.

Array layout: species fields are ``(L, Nx)``, pair fields ``(L, L, Nx)``
indexed ``[s, k, i]`` and distributions ``(L, Nx, Nv)``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    NegativeMixingTemperature,
    NegativeTemperature,
    SingularSystem,
    ZeroFrequencyDivision,
)
from .moments import maxwellian_pair, species_moments

__all__ = [
    "RegimeParams",
    "InteractionField",
    "StageMoments",
    "linear_frequency",
    "interaction_params",
    "mixing_targets",
    "solve_velocities",
    "solve_temperatures",
    "relax_update",
    "relaxation_stage",
]

PIVOT_TOL = 1e-14


@dataclass(frozen=True)
class RegimeParams:
    """Intra-species (``epsilon``) and inter-species (``kappa``) scales."""

    epsilon: float
    kappa: float

    def __post_init__(self):
        if not (self.epsilon > 0 and self.kappa > 0):
            raise ValueError("epsilon and kappa must be positive")


@dataclass(frozen=True)
class InteractionField:
    nu: np.ndarray
    a: np.ndarray
    b: np.ndarray
    gamma: np.ndarray
    u_mix: np.ndarray | None = None
    T_mix: np.ndarray | None = None


@dataclass(frozen=True)
class StageMoments:
    """Moments entering and leaving one implicit relaxation stage."""

    n: np.ndarray
    u_tilde: np.ndarray
    T_tilde: np.ndarray
    u: np.ndarray
    T: np.ndarray
    interaction: InteractionField


def linear_frequency(n_s, lam):
    """``nu_sk = lambda_sk * n_k``."""
    return lam[:, :, None] * n_s[None, :, :]


def _off_diagonal(L):
    return (1.0 - np.eye(L))[:, :, None]


def interaction_params(moments, species, frequency=linear_frequency):
    """Collision frequencies and exchange coefficients ``a, b, gamma``.

    ``moments`` needs an ``n_s`` attribute (or is the ``(L, Nx)`` array itself).
    """
    n_s = np.asarray(getattr(moments, "n_s", moments), dtype=float)
    lam = species.lam[:, :, None]
    m_s = species.masses[:, None, None]
    m_k = species.masses[None, :, None]
    nu = np.asarray(frequency(n_s, species.lam), dtype=float)
    if np.any((nu == 0) & (lam > 0)):
        raise ZeroFrequencyDivision("nu_sk vanishes while lambda_sk > 0")
    num = lam * n_s[None, :, :] * m_k
    a = np.divide(num, nu * (m_s + m_k), out=np.zeros_like(nu), where=nu != 0)
    b = 2.0 * a * m_s / (m_s + m_k)
    gamma = m_s * a / 3.0 * (2.0 * m_k / (m_s + m_k) - a)
    return InteractionField(nu=nu, a=a, b=b, gamma=gamma)


def mixing_targets(interaction, moments, species):
    """Fill in the auxiliary velocities ``u_sk`` and temperatures ``T_sk``.

    ``moments`` needs ``u_s`` and ``T_s`` of shape ``(L, Nx)``.
    """
    u_s = np.asarray(moments.u_s, dtype=float)
    T_s = np.asarray(moments.T_s, dtype=float)
    a, b, gamma = interaction.a, interaction.b, interaction.gamma
    us, uk = u_s[:, None, :], u_s[None, :, :]
    Ts, Tk = T_s[:, None, :], T_s[None, :, :]
    u_mix = (1.0 - a) * us + a * uk
    T_mix = (1.0 - b) * Ts + b * Tk + gamma / species.k_b * (us - uk) ** 2
    diag = np.arange(u_s.shape[0])
    u_mix[diag, diag] = u_s
    T_mix[diag, diag] = T_s
    if np.any(T_mix <= 0) or not np.all(np.isfinite(T_mix)):
        s, k, i = np.argwhere(~(T_mix > 0))[0]
        raise NegativeMixingTemperature("non-positive mixing temperature", index=(int(i), int(s), int(k)))
    return replace(interaction, u_mix=u_mix, T_mix=T_mix)


def _coupled_solve(coupling, rhs):
    """Solve ``(I + diag(sum_k C) - C) x = rhs`` node by node.

    ``coupling`` is ``(L, L, Nx)`` with a zero diagonal, ``rhs`` is ``(L, Nx)``.
    """
    L = rhs.shape[0]
    C = np.moveaxis(coupling, -1, 0)
    A = np.eye(L) + np.eye(L) * np.sum(C, axis=-1)[..., None] - C
    diag = np.abs(np.diagonal(A, axis1=-2, axis2=-1))
    off = np.sum(np.abs(A), axis=-1) - diag
    margin = diag - off
    if np.any(margin < PIVOT_TOL) or not np.all(np.isfinite(A)):
        raise SingularSystem("moment system lost diagonal dominance", index=int(np.argmin(margin)))
    x = np.linalg.solve(A, np.moveaxis(rhs, -1, 0)[..., None])[..., 0]
    return np.moveaxis(x, 0, -1)


def solve_velocities(u_tilde, interaction, dt_eff_kappa):
    """Implicit velocity exchange; conserves total momentum exactly."""
    u_tilde = np.asarray(u_tilde, dtype=float)
    if dt_eff_kappa < 0:
        raise ValueError("dt_eff_kappa must be non-negative")
    coupling = dt_eff_kappa * interaction.nu * interaction.a * _off_diagonal(u_tilde.shape[0])
    return _coupled_solve(coupling, u_tilde)


def solve_temperatures(T_tilde, u_new, u_tilde, interaction, dt_eff_kappa, species):
    """Implicit temperature exchange given the already-solved velocities."""
    T_tilde = np.asarray(T_tilde, dtype=float)
    u_new = np.asarray(u_new, dtype=float)
    L = T_tilde.shape[0]
    k_b = species.k_b
    m = species.masses[:, None]
    off = _off_diagonal(L)
    nu, a, gamma = interaction.nu, interaction.a, interaction.gamma
    du2 = (u_new[:, None, :] - u_new[None, :, :]) ** 2
    heat = nu * (gamma / k_b + m[:, :, None] * a ** 2 / (3.0 * k_b)) * du2 * off
    xi = T_tilde + m / (3.0 * k_b) * (u_new - u_tilde) ** 2 + dt_eff_kappa * np.sum(heat, axis=1)
    coupling = dt_eff_kappa * nu * interaction.b * off
    T = _coupled_solve(coupling, xi)
    if np.any(T <= 0) or not np.all(np.isfinite(T)):
        s, i = np.argwhere(~(T > 0))[0]
        raise NegativeTemperature("implicit temperature solve went non-positive", index=(int(i), int(s)))
    return T


def relax_update(g_tilde, n_new, nu, maxwellians, dt_over_eps, dt_over_kappa):
    """Pointwise implicit BGK update toward the stage Maxwellians.

    ``maxwellians`` are unit-density pairs ``(L, L, Nx, Nv)``; the diagonal
    ``(s, s)`` pair relaxes on the ``epsilon`` scale, the rest on ``kappa``.
    """
    L = nu.shape[0]
    eye = np.eye(L)[:, :, None]
    rate = nu * (dt_over_eps * eye + dt_over_kappa * (1.0 - eye))
    gain = np.einsum("ski,skij->sij", rate, maxwellians)
    return (g_tilde + n_new[:, :, None] * gain) / (1.0 + np.sum(rate, axis=1))[:, :, None]


def relaxation_stage(g1_star, g2_star, grid, species, regime, weight, frequency=linear_frequency):
    """Solve ``g = g* + weight * K(g)`` for both Chu components.

    The moments of ``g*`` fix density and frozen coefficients; velocities and
    temperatures come from the implicit linear systems, after which the
    update is a pointwise convex combination.
    """
    n, u_t, T_t = species_moments(g1_star, g2_star, grid, species)
    inter = interaction_params(n, species, frequency)
    wk = weight / regime.kappa
    we = weight / regime.epsilon
    u = solve_velocities(u_t, inter, wk)
    T = solve_temperatures(T_t, u, u_t, inter, wk, species)
    inter = mixing_targets(inter, _Fields(u, T), species)
    m = species.masses[:, None, None]
    m1, m2 = maxwellian_pair(1.0, inter.u_mix, inter.T_mix, m, grid, species.k_b)
    g1 = relax_update(g1_star, n, inter.nu, m1, we, wk)
    g2 = relax_update(g2_star, n, inter.nu, m2, we, wk)
    return g1, g2, StageMoments(n, u_t, T_t, u, T, inter)


@dataclass(frozen=True)
class _Fields:
    u_s: np.ndarray
    T_s: np.ndarray
