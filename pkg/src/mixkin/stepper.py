"""Semi-Lagrangian time stepping for the Chu-reduced mixture BGK system.

Every scheme reduces to the same pattern: gather an explicit predictor
``g*`` from values traced back along characteristics, then solve the
implicit relaxation ``g = g* + w K(g)`` with the stage weight ``w``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import HistoryMismatch, NonFiniteState
from .grid import step_schedule
from .moments import MixtureState, compute_moments
from .reconstruct import cweno_reconstruct, shift_cells
from .relax import relaxation_stage

__all__ = [
    "Tableau",
    "BdfCoeffs",
    "IMPLICIT_EULER",
    "DIRK2",
    "DIRK3",
    "BDF2",
    "BDF3",
    "SCHEMES",
    "step_backward_euler",
    "step_dirk",
    "step_bdf",
    "advance",
    "diagnostics_row",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Tableau:
    """Stiffly accurate diagonally implicit Butcher tableau."""

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    name: str = ""

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float)
        c = np.asarray(self.c, dtype=float)
        s = b.size
        if A.shape != (s, s) or c.size != s:
            raise ValueError("inconsistent tableau shapes")
        if np.any(np.triu(A, 1) != 0) or np.any(np.diag(A) == 0):
            raise ValueError("tableau must be lower triangular with non-zero diagonal")
        if not np.allclose(A[-1], b, rtol=0, atol=1e-14):
            raise ValueError("tableau must be stiffly accurate")
        if not np.allclose(A.sum(axis=1), c, rtol=0, atol=1e-9):
            raise ValueError("abscissae must equal row sums")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def stages(self):
        return self.b.size


def _dirk2():
    a = 1.0 - math.sqrt(2.0) / 2.0
    A = [[a, 0.0], [1.0 - a, a]]
    return Tableau(A, A[-1], [a, 1.0], "DIRK2")


def _dirk3():
    g, d = 0.4358665215, -0.644363171
    A = [[g, 0.0, 0.0], [(1.0 - g) / 2.0, g, 0.0], [1.0 - d - g, d, g]]
    return Tableau(A, A[-1], [g, (1.0 + g) / 2.0, 1.0], "DIRK3")


IMPLICIT_EULER = Tableau([[1.0]], [1.0], [1.0], "implicit Euler")
DIRK2 = _dirk2()
DIRK3 = _dirk3()


@dataclass(frozen=True)
class BdfCoeffs:
    order: int
    alpha: tuple
    beta: float

    def __post_init__(self):
        if len(self.alpha) != self.order:
            raise ValueError("need one history weight per order")
        if abs(sum(self.alpha) - 1.0) > 1e-14:
            raise ValueError("history weights must sum to one")


BDF2 = BdfCoeffs(2, (4.0 / 3.0, -1.0 / 3.0), 2.0 / 3.0)
BDF3 = BdfCoeffs(3, (18.0 / 11.0, -9.0 / 11.0, 2.0 / 11.0), 6.0 / 11.0)


@dataclass(frozen=True)
class Scheme:
    name: str
    degree: int
    tableau: Tableau
    bdf: BdfCoeffs | None = None


SCHEMES = {
    "BE": Scheme("BE", 2, IMPLICIT_EULER),
    "RK2-QCW23": Scheme("RK2-QCW23", 2, DIRK2),
    "RK3-QCW35": Scheme("RK3-QCW35", 4, DIRK3),
    "BDF2-QCW23": Scheme("BDF2-QCW23", 2, DIRK2, BDF2),
    "BDF3-QCW35": Scheme("BDF3-QCW35", 4, DIRK3, BDF3),
}


def _rows(g1, g2):
    # (L, Nx, Nv) pair -> (2, L, Nv, Nx) so space runs along the last axis
    return np.swapaxes(np.stack([g1, g2]), -1, -2)


def _reconstruct(g1, g2, grid, k):
    return cweno_reconstruct(_rows(g1, g2), k=k, bc=grid.bc, dx=grid.dx)


def _trace(poly, grid, tau):
    """Values at the feet ``x_i - v_j * tau``; returns the (g1, g2) pair."""
    out = shift_cells(poly, -grid.v_nodes * tau / grid.dx)
    out = np.swapaxes(out, -1, -2)
    return out[0], out[1]


def step_dirk(state, tableau, dt, grid, species, regime, k=2, poly=None):
    """One step of a stiffly accurate DIRK semi-Lagrangian scheme."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    A, c = tableau.A, tableau.c
    p0 = poly if poly is not None else _reconstruct(state.g1, state.g2, grid, k)
    stage_k = []
    for m in range(tableau.stages):
        g1s, g2s = _trace(p0, grid, c[m] * dt)
        for l in range(m):
            if A[m, l] == 0.0:
                continue
            k1, k2, kpoly = stage_k[l]
            lag = (c[m] - c[l]) * dt
            if lag != 0.0:
                k1, k2 = _trace(kpoly, grid, lag)
            g1s = g1s + dt * A[m, l] * k1
            g2s = g2s + dt * A[m, l] * k2
        w = A[m, m] * dt
        g1, g2, _ = relaxation_stage(g1s, g2s, grid, species, regime, w)
        if m < tableau.stages - 1:
            k1 = (g1 - g1s) / w
            k2 = (g2 - g2s) / w
            stage_k.append((k1, k2, _reconstruct(k1, k2, grid, k)))
    return MixtureState(g1, g2, state.t + dt)


def step_backward_euler(state, dt, grid, species, regime, k=2):
    """First-order scheme: trace back one step, then relax implicitly."""
    return step_dirk(state, IMPLICIT_EULER, dt, grid, species, regime, k)


def step_bdf(history, coeffs, dt, grid, species, regime, k=2, polys=None):
    """One BDF semi-Lagrangian step.

    ``history`` holds the ``order`` most recent states, newest first, spaced
    by ``dt``. ``polys`` optionally supplies their reconstructions.
    """
    if len(history) < coeffs.order:
        raise HistoryMismatch(f"BDF{coeffs.order} needs {coeffs.order} states, got {len(history)}")
    for newer, older in zip(history, history[1 : coeffs.order]):
        if abs((newer.t - older.t) - dt) > 1e-9 * max(1.0, abs(newer.t)):
            raise HistoryMismatch(f"history spacing {newer.t - older.t!r} does not match dt={dt!r}")
    g1s = 0.0
    g2s = 0.0
    for j in range(coeffs.order):
        poly = polys[j] if polys is not None else _reconstruct(history[j].g1, history[j].g2, grid, k)
        h1, h2 = _trace(poly, grid, (j + 1) * dt)
        g1s = g1s + coeffs.alpha[j] * h1
        g2s = g2s + coeffs.alpha[j] * h2
    g1, g2, _ = relaxation_stage(g1s, g2s, grid, species, regime, coeffs.beta * dt)
    return MixtureState(g1, g2, history[0].t + dt)


def diagnostics_row(step, state, dt, grid, species):
    mom = compute_moments(state, grid, species)
    row = {"step": step, "t": state.t, "dt": dt}
    for s, mass in enumerate(np.sum(mom.n_s, axis=1) * grid.dx, start=1):
        row[f"mass_{s}"] = float(mass)
    row["momentum"] = float(np.sum(mom.rho * mom.u) * grid.dx)
    row["energy"] = float(np.sum(mom.E) * grid.dx)
    row["min_g1"] = float(np.min(state.g1))
    return row


def advance(state, time_control, scheme, grid, species, regime, callback=None):
    """Integrate to ``time_control.t_final``.

    Returns the final state and a list of per-step diagnostics dicts (the
    first row describes the initial state). BDF schemes restart their
    history with the same-order DIRK scheme whenever the step size changes.
    """
    if isinstance(scheme, str):
        try:
            scheme = SCHEMES[scheme]
        except KeyError:
            raise ValueError(f"unknown scheme {scheme!r}; choose from {sorted(SCHEMES)}") from None
    k = scheme.degree
    diagnostics = [diagnostics_row(0, state, 0.0, grid, species)]
    history = [state]
    polys = [None]
    step = 0
    last_dt = None
    for dt in step_schedule(time_control, grid):
        if last_dt is None or abs(dt - last_dt) > 1e-14 * dt:
            history, polys = history[:1], polys[:1]
        last_dt = dt
        polys = [p if p is not None else _reconstruct(h.g1, h.g2, grid, k) for p, h in zip(polys, history)]
        if scheme.bdf is not None and len(history) >= scheme.bdf.order:
            new = step_bdf(history, scheme.bdf, dt, grid, species, regime, k, polys)
        else:
            new = step_dirk(history[0], scheme.tableau, dt, grid, species, regime, k, polys[0])
        step += 1
        if not new.is_finite():
            raise NonFiniteState("non-finite distribution", index=step)
        depth = scheme.bdf.order if scheme.bdf is not None else 1
        history = [new] + history[: depth - 1]
        polys = [None] + polys[: depth - 1]
        state = new
        diagnostics.append(diagnostics_row(step, state, dt, grid, species))
        if callback is not None:
            callback(step, state)
    if diagnostics and abs(state.t - time_control.t_final) < 1e-9 * max(1.0, time_control.t_final):
        state.t = time_control.t_final
    return state, diagnostics
