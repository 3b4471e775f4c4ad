"""Conservative CWENO reconstruction and sliding-average evaluation.

Nodal values are read as cell averages of an auxiliary function. A CWENO
polynomial ``R_i`` is built for every cell and the value at a shifted node
``x_i + theta*dx`` is the average of the piecewise reconstruction over a
cell-wide window centred there. Summed over a periodic row the shifted
values telescope back to the sum of the inputs, which is what makes the
semi-Lagrangian update conservative.

Polynomials are stored as scaled derivatives ``dx**l * R_i^(l)`` so that
``R_i(x_i + xi*dx) = sum_l coeffs[l] * xi**l / l!``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .errors import UnsupportedDegree

__all__ = [
    "PolyField",
    "ShiftKernel",
    "cweno_reconstruct",
    "kernel_alpha",
    "kernel_beta",
    "q_eval",
    "shift_field",
    "shift_cells",
    "edge_values",
    "EPS_WEIGHT",
]

# weight regularization per degree (k=2, k=4)
EPS_WEIGHT = {2: 1e-6, 4: 1e-7}
WEIGHT_POWER = 2

_BCS = ("periodic", "freeflow")


def _average_rows(offsets, degree):
    # cell average over [r-1/2, r+1/2] of xi**m
    rows = []
    for r in offsets:
        rows.append([((r + 0.5) ** (m + 1) - (r - 0.5) ** (m + 1)) / (m + 1)
                     for m in range(degree + 1)])
    return np.array(rows)


def _fit(offsets, degree, half, size):
    """Map the full stencil (-half..half) to monomial coefficients of the
    polynomial of ``degree`` matching cell averages on ``offsets``."""
    coef = np.linalg.solve(_average_rows(offsets, degree), np.eye(len(offsets)))
    out = np.zeros((size, 2 * half + 1))
    for col, r in enumerate(offsets):
        out[: degree + 1, r + half] = coef[:, col]
    return out


def _smoothness_form(size):
    # beta(c) = sum_{l>=1} int_{-1/2}^{1/2} (d^l/dxi^l P)^2 dxi  as  c^T S c
    def moment(p):
        return 0.0 if p % 2 else 2.0 * 0.5 ** (p + 1) / (p + 1)

    S = np.zeros((size, size))
    for m in range(size):
        for n in range(size):
            for l in range(1, min(m, n) + 1):
                cm = factorial(m) / factorial(m - l)
                cn = factorial(n) / factorial(n - l)
                S[m, n] += cm * cn * moment(m + n - 2 * l)
    return S


class _Cweno:
    """Precomputed linear maps for one CWENO variant."""

    def __init__(self, degree):
        half = degree // 2
        size = degree + 1
        opt = _fit(range(-half, half + 1), degree, half, size)
        if degree == 2:
            subs = [_fit([-1, 0], 1, half, size), _fit([0, 1], 1, half, size)]
            ideal = [0.25, 0.25]
            d0 = 0.5
        else:
            subs = [_fit([-2, -1, 0], 2, half, size),
                    _fit([-1, 0, 1], 2, half, size),
                    _fit([0, 1, 2], 2, half, size)]
            ideal = [0.125, 0.25, 0.125]
            d0 = 0.5
        central = (opt - sum(d * P for d, P in zip(ideal, subs))) / d0
        self.degree = degree
        self.half = half
        self.eps = EPS_WEIGHT[degree]
        self.optimal = opt
        self.candidates = np.stack([central] + subs)
        self.ideal = np.array([d0] + ideal)
        S = _smoothness_form(size)
        # beta_k = |G P_k u|^2 with S = G^T G restricted to its non-null part
        w, V = np.linalg.eigh(S)
        keep = w > 1e-12 * w.max()
        G = np.sqrt(w[keep])[:, None] * V[:, keep].T
        self.rank = G.shape[0]
        self.stacked = np.concatenate(
            [self.candidates.reshape(-1, 2 * half + 1)]
            + [G @ P for P in self.candidates]
        )
        self.scale = np.array([factorial(l) for l in range(size)], dtype=float)

    def coefficients(self, stencil, nonlinear=True, eps=None):
        """``stencil`` has shape (2*half+1, ...); returns scaled derivatives
        of shape (degree+1, ...)."""
        lead = stencil.shape[1:]
        flat = stencil.reshape(stencil.shape[0], -1)
        size = self.degree + 1
        if not nonlinear:
            mono = self.optimal @ flat
        else:
            ncand = self.ideal.size
            out = self.stacked @ flat
            polys = out[: ncand * size].reshape(ncand, size, -1)
            grads = out[ncand * size:].reshape(ncand, self.rank, -1)
            beta = np.einsum("krn,krn->kn", grads, grads)
            eps = self.eps if eps is None else eps
            alpha = self.ideal[:, None] / (eps + beta) ** WEIGHT_POWER
            omega = alpha / np.sum(alpha, axis=0)
            mono = np.einsum("kn,kmn->mn", omega, polys)
        mono *= self.scale[:, None]
        return mono.reshape((size,) + lead)


_VARIANTS: dict[int, _Cweno] = {}


def _variant(k):
    if k not in EPS_WEIGHT:
        raise UnsupportedDegree(f"CWENO degree must be 2 or 4, got {k!r}")
    if k not in _VARIANTS:
        _VARIANTS[k] = _Cweno(k)
    return _VARIANTS[k]


def _check_bc(bc):
    if bc not in _BCS:
        raise ValueError(f"unknown boundary condition {bc!r}")


@dataclass(frozen=True)
class PolyField:
    """Per-cell reconstruction polynomials along the last axis.

    ``coeffs[l, ..., i]`` holds ``dx**l * R_i^(l)``.
    """

    coeffs: np.ndarray
    degree: int
    bc: str
    dx: float = 1.0

    @property
    def ncells(self):
        return self.coeffs.shape[-1]

    @property
    def derivatives(self):
        powers = self.dx ** np.arange(self.degree + 1, dtype=float)
        return self.coeffs / powers.reshape((-1,) + (1,) * (self.coeffs.ndim - 1))

    def cell_averages(self):
        """Exact average of each ``R_i`` over its own cell."""
        l = np.arange(self.degree + 1)
        weights = np.where(l % 2 == 0, 1.0 / (2.0 ** l * (l + 1)), 0.0)
        weights = weights / np.array([factorial(m) for m in l])
        return np.tensordot(weights, self.coeffs, axes=1)


def cweno_reconstruct(values, k=2, bc="periodic", dx=1.0, nonlinear=True, eps=None):
    """Build CWENO polynomials (k=2: CWENO23, k=4: CWENO35) along the last axis.

    Set ``nonlinear=False`` to use the optimal (linear) polynomial, which is
    exact for data sampled from a polynomial of degree ``k``. ``eps``
    overrides the weight regularization of the chosen degree.
    """
    scheme = _variant(k)
    _check_bc(bc)
    u = np.asarray(values, dtype=float)
    h = scheme.half
    if u.shape[-1] < k + 2:
        raise ValueError(f"need at least {k + 2} cells for degree {k}, got {u.shape[-1]}")
    pad = [(0, 0)] * (u.ndim - 1) + [(h, h)]
    padded = np.pad(u, pad, mode="wrap" if bc == "periodic" else "edge")
    n = u.shape[-1]
    stencil = np.stack([padded[..., j: j + n] for j in range(2 * h + 1)])
    coeffs = scheme.coefficients(stencil, nonlinear=nonlinear, eps=eps)
    return PolyField(coeffs=coeffs, degree=k, bc=bc, dx=float(dx))


def kernel_alpha(l, theta):
    s = 2.0 * np.asarray(theta, dtype=float) - 1.0
    return (1.0 - s ** (l + 1)) / (2.0 ** (l + 1) * factorial(l + 1))


def kernel_beta(l, theta):
    s = 2.0 * np.asarray(theta, dtype=float) - 1.0
    return (s ** (l + 1) - (-1.0) ** (l + 1)) / (2.0 ** (l + 1) * factorial(l + 1))


@dataclass(frozen=True)
class ShiftKernel:
    """Sliding-average weights for a fractional shift ``theta``."""

    theta: float
    degree: int

    @property
    def alpha(self):
        return np.array([kernel_alpha(l, self.theta) for l in range(self.degree + 1)])

    @property
    def beta(self):
        return np.array([kernel_beta(l, self.theta) for l in range(self.degree + 1)])


def _extended(field):
    # periodic: wrap around; freeflow: one constant ghost polynomial per side
    if field.bc == "periodic":
        return field.coeffs, 0
    c = field.coeffs
    left = np.zeros_like(c[..., :1])
    right = np.zeros_like(c[..., :1])
    left[0] = edge_values(field, "left")[..., None]
    right[0] = edge_values(field, "right")[..., None]
    return np.concatenate([left, c, right], axis=-1), 1


def edge_values(field, side):
    """Cell average of the first or last polynomial (the boundary value)."""
    avg = field.cell_averages()
    return avg[..., 0] if side == "left" else avg[..., -1]


def q_eval(field, i, theta):
    """Sliding average of ``field`` over the window centred at ``x_i + theta*dx``.

    ``i`` is a cell index (wrapped for periodic fields, clamped to the edge
    value for free-flow ones); returns one value per leading-axis row.
    """
    theta = float(theta)
    if not 0.0 <= theta < 1.0:
        raise ValueError("theta must lie in [0, 1)")
    ext, offset = _extended(field)
    n = field.ncells
    if field.bc == "periodic":
        here, there = int(i) % n, (int(i) + 1) % n
    else:
        here = min(max(int(i), -1), n) + offset
        there = min(max(int(i) + 1, -1), n) + offset
    out = 0.0
    for l in range(field.degree + 1):
        out = out + kernel_alpha(l, theta) * ext[l][..., here] + kernel_beta(l, theta) * ext[l][..., there]
    return out


def _split(cells):
    q = np.floor(cells)
    theta = cells - q
    wrap = theta >= 1.0
    q = np.where(wrap, q + 1.0, q)
    theta = np.where(wrap, 0.0, theta)
    return q.astype(np.intp), theta


def shift_cells(field, cells):
    """Evaluate ``field`` at ``x_i + cells*dx`` for every cell ``i``.

    ``cells`` broadcasts against the leading (non-spatial) axes of the field,
    i.e. one displacement per row.
    """
    cells = np.asarray(cells, dtype=float)[..., None]
    q, theta = _split(cells)
    n = field.ncells
    ext, offset = _extended(field)
    # fold the kernel weights first: one left-part and one right-part value per cell
    left = sum(kernel_alpha(l, theta) * ext[l] for l in range(field.degree + 1))
    right = sum(kernel_beta(l, theta) * ext[l] for l in range(field.degree + 1))
    lead = left.shape[:-1]
    width = left.shape[-1]
    base = np.broadcast_to(np.arange(n) + q, lead + (n,))
    if field.bc == "periodic":
        here, there = np.mod(base, n), np.mod(base + 1, n)
    else:
        here, there = np.clip(base, -1, n) + offset, np.clip(base + 1, -1, n) + offset
    rows = (np.arange(int(np.prod(lead))) * width).reshape(lead + (1,))
    return np.take(left, rows + here) + np.take(right, rows + there)


def shift_field(values, displacement, k=2, bc="periodic", dx=1.0):
    """Conservative reconstruction of ``values`` at ``x_i + displacement``.

    ``displacement`` is a length; it may be an array giving one displacement
    per row of ``values`` (rows run along the leading axes).
    """
    field = cweno_reconstruct(values, k=k, bc=bc, dx=dx)
    return shift_cells(field, np.asarray(displacement, dtype=float) / dx)
