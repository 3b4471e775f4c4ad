"""Phase-space grids, CFL time control and foot decomposition."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["PhaseGrid", "TimeControl", "FootIndex", "build_grid", "shift_decompose", "step_schedule"]

MIN_NX = 4
MIN_NV = 2


@dataclass(frozen=True)
class PhaseGrid:
    x_nodes: np.ndarray
    v_nodes: np.ndarray
    dx: float
    dv: float
    bc: str
    x_domain: tuple[float, float]
    v_domain: tuple[float, float]

    @property
    def nx(self):
        return self.x_nodes.size

    @property
    def nv(self):
        return self.v_nodes.size

    @property
    def vmax(self):
        return float(np.max(np.abs(self.v_nodes)))

    def nominal_dt(self, cfl):
        return cfl * self.dx / self.vmax


def build_grid(x_domain, nx, bc="periodic", v_domain=(-15.0, 15.0), nv=60):
    """Uniform grid: ``nx`` spatial nodes and ``nv + 1`` velocity nodes.

    Periodic grids start at ``x_min``; free-flow grids sit at cell centres.
    """
    x_min, x_max = (float(b) for b in x_domain)
    v_min, v_max = (float(b) for b in v_domain)
    if not all(math.isfinite(b) for b in (x_min, x_max, v_min, v_max)):
        raise ValueError("grid bounds must be finite")
    if not x_min < x_max or not v_min < v_max:
        raise ValueError("grid bounds must be increasing")
    if int(nx) != nx or nx < MIN_NX:
        raise ValueError(f"nx must be an integer >= {MIN_NX}, got {nx!r}")
    if int(nv) != nv or nv < MIN_NV:
        raise ValueError(f"nv must be an integer >= {MIN_NV}, got {nv!r}")
    if bc not in ("periodic", "freeflow"):
        raise ValueError(f"unknown boundary condition {bc!r}")
    nx, nv = int(nx), int(nv)
    dx = (x_max - x_min) / nx
    dv = (v_max - v_min) / nv
    offset = 0.0 if bc == "periodic" else 0.5
    x = x_min + (np.arange(nx) + offset) * dx
    v = v_min + np.arange(nv + 1) * dv
    return PhaseGrid(x, v, dx, dv, bc, (x_min, x_max), (v_min, v_max))


@dataclass(frozen=True)
class FootIndex:
    base: int
    theta: float


def shift_decompose(grid, displacement):
    """Split ``displacement`` into ``(base + theta) * dx`` with theta in [0, 1)."""
    cells = float(displacement) / grid.dx
    q = math.floor(cells)
    theta = cells - q
    if theta >= 1.0:
        q, theta = q + 1, 0.0
    return FootIndex(int(q), theta)


@dataclass(frozen=True)
class TimeControl:
    """Piecewise-constant CFL schedule.

    ``cfl_schedule`` is an ordered list of ``(t_end, cfl)``; each CFL applies
    until its ``t_end``. The last entry is extended to ``t_final``.
    """

    cfl_schedule: tuple = ((math.inf, 2.0),)
    t_final: float = 0.2
    dt_cap: float | None = None

    def __post_init__(self):
        sched = tuple((float(t), float(c)) for t, c in self.cfl_schedule)
        if not sched:
            raise ValueError("cfl_schedule must not be empty")
        if any(c <= 0 or not math.isfinite(c) for _, c in sched):
            raise ValueError("cfl values must be positive")
        ends = [t for t, _ in sched]
        if any(b <= a for a, b in zip(ends, ends[1:])) or ends[0] <= 0:
            raise ValueError("cfl_schedule end times must be positive and increasing")
        if self.t_final < 0:
            raise ValueError("t_final must be non-negative")
        if self.dt_cap is not None and self.dt_cap <= 0:
            raise ValueError("dt_cap must be positive")
        object.__setattr__(self, "cfl_schedule", sched)

    def segments(self):
        """Yield ``(t_start, t_end, cfl)`` covering ``(0, t_final]``."""
        start = 0.0
        for i, (end, cfl) in enumerate(self.cfl_schedule):
            last = i == len(self.cfl_schedule) - 1
            stop = self.t_final if last else min(end, self.t_final)
            if stop > start:
                yield start, stop, cfl
            start = stop
            if start >= self.t_final:
                return


def step_schedule(time_control, grid):
    """Step sizes realizing the schedule: each segment is split into an
    integer number of equal steps no larger than its nominal step."""
    steps = []
    for start, stop, cfl in time_control.segments():
        nominal = grid.nominal_dt(cfl)
        if time_control.dt_cap is not None:
            nominal = min(nominal, time_control.dt_cap)
        length = stop - start
        count = max(1, math.ceil(length / nominal * (1.0 - 1e-12)))
        steps.extend([length / count] * count)
    return steps
