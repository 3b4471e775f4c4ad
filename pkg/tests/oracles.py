"""Independent reference solutions used by the tests.

Nothing here imports the package solvers; each oracle is derived from
closed-form solutions or from scipy quadrature.
"""

import math

import numpy as np
from scipy import integrate, optimize, special

GAMMA = 5.0 / 3.0


def gaussian_moments(n, u, b, vmin=-15.0, vmax=15.0):
    """Density, mean and variance of ``n * N(u, b)`` truncated to [vmin, vmax]."""

    def pdf(v):
        return n * np.exp(-((v - u) ** 2) / (2 * b)) / math.sqrt(2 * math.pi * b)

    mass = integrate.quad(pdf, vmin, vmax, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
    mean = integrate.quad(lambda v: v * pdf(v), vmin, vmax, epsabs=1e-13, epsrel=1e-13, limit=200)[0] / mass
    var = integrate.quad(lambda v: (v - mean) ** 2 * pdf(v), vmin, vmax, epsabs=1e-13, epsrel=1e-13, limit=200)[0] / mass
    return mass, mean, var


def truncated_gaussian_mass(u, b, vmin=-15.0, vmax=15.0):
    s = math.sqrt(2 * b)
    return 0.5 * (special.erf((vmax - u) / s) - special.erf((vmin - u) / s))


def sine_sliding_average(x, dx):
    """Cell-wide average of sin(pi x) centred at ``x``."""
    return np.sin(np.pi * x) * np.sin(np.pi * dx / 2) / (np.pi * dx / 2)


def sine_cell_averages(x, dx):
    return sine_sliding_average(x, dx)


def advected_profile(profile, x, v, t, period=None):
    """Exact free transport ``g(x, v, t) = g0(x - v t, v)``."""
    feet = x[None, :] - v[:, None] * t
    if period is not None:
        lo, length = period
        feet = lo + np.mod(feet - lo, length)
    return profile(feet, v[:, None])


def exact_riemann(left, right, x, t, x0=0.0, gamma=GAMMA):
    """Exact solution of the 1D Euler Riemann problem.

    ``left``/``right`` are (rho, u, p); returns (rho, u, p) sampled at ``x``.
    """
    rl, ul, pl = left
    rr, ur, pr = right
    cl = math.sqrt(gamma * pl / rl)
    cr = math.sqrt(gamma * pr / rr)
    g1 = (gamma - 1) / (2 * gamma)

    def branch(p, r, pk, ck):
        if p > pk:
            a = 2 / ((gamma + 1) * r)
            b = (gamma - 1) / (gamma + 1) * pk
            f = (p - pk) * math.sqrt(a / (p + b))
        else:
            f = 2 * ck / (gamma - 1) * ((p / pk) ** g1 - 1)
        return f

    def residual(p):
        return branch(p, rl, pl, cl) + branch(p, rr, pr, cr) + ur - ul

    p_star = optimize.brentq(residual, 1e-12, 100 * max(pl, pr), xtol=1e-15, rtol=1e-15)
    u_star = 0.5 * (ul + ur) + 0.5 * (branch(p_star, rr, pr, cr) - branch(p_star, rl, pl, cl))

    def side_density(r, pk):
        if p_star > pk:
            q = (gamma - 1) / (gamma + 1)
            return r * (p_star / pk + q) / (q * p_star / pk + 1)
        return r * (p_star / pk) ** (1 / gamma)

    rho_l_star = side_density(rl, pl)
    rho_r_star = side_density(rr, pr)

    out = np.empty((3, x.size))
    for i, xi in enumerate(np.asarray(x, dtype=float)):
        s = (xi - x0) / t if t > 0 else math.copysign(math.inf, xi - x0)
        if s <= u_star:
            if p_star > pl:
                shock = ul - cl * math.sqrt((gamma + 1) / (2 * gamma) * p_star / pl + g1)
                state = (rl, ul, pl) if s < shock else (rho_l_star, u_star, p_star)
            else:
                head = ul - cl
                tail = u_star - cl * (p_star / pl) ** g1
                if s < head:
                    state = (rl, ul, pl)
                elif s > tail:
                    state = (rho_l_star, u_star, p_star)
                else:
                    c = 2 / (gamma + 1) * (cl + (gamma - 1) / 2 * (ul - s))
                    u = 2 / (gamma + 1) * (cl + (gamma - 1) / 2 * ul + s)
                    state = (rl * (c / cl) ** (2 / (gamma - 1)), u, pl * (c / cl) ** (2 * gamma / (gamma - 1)))
        else:
            if p_star > pr:
                shock = ur + cr * math.sqrt((gamma + 1) / (2 * gamma) * p_star / pr + g1)
                state = (rr, ur, pr) if s > shock else (rho_r_star, u_star, p_star)
            else:
                head = ur + cr
                tail = u_star + cr * (p_star / pr) ** g1
                if s > head:
                    state = (rr, ur, pr)
                elif s < tail:
                    state = (rho_r_star, u_star, p_star)
                else:
                    c = 2 / (gamma + 1) * (cr - (gamma - 1) / 2 * (ur - s))
                    u = 2 / (gamma + 1) * (-cr + (gamma - 1) / 2 * ur + s)
                    state = (rr * (c / cr) ** (2 / (gamma - 1)), u, pr * (c / cr) ** (2 * gamma / (gamma - 1)))
        out[:, i] = state
    return out


def sources_by_hand(m, n, lam, u, T, k_b=1.0):
    """Pairwise momentum/energy exchange written out with plain loops."""
    L = len(m)
    R = np.zeros((L, L))
    S = np.zeros((L, L))
    for s in range(L):
        for k in range(L):
            if s == k:
                continue
            msk = m[s] * m[k] / (m[s] + m[k])
            R[s, k] = lam[s][k] * msk * n[s] * n[k] * (u[k] - u[s])
            S[s, k] = (lam[s][k] * msk / (m[s] + m[k]) * n[s] * n[k]
                       * ((m[s] * u[s] + m[k] * u[k]) * (u[k] - u[s]) + 3 * k_b * (T[k] - T[s])))
    return R, S


def deconvolved_coefficients(poly_coeffs, dx):
    """Monomial coefficients (in x) of the polynomial whose cell averages
    over width ``dx`` are the values of ``poly_coeffs`` (low to high)."""
    import sympy

    x, y = sympy.symbols("x y")
    degree = len(poly_coeffs) - 1
    unknown = sympy.symbols(f"w0:{degree + 1}")
    w = sum(c * y ** j for j, c in enumerate(unknown))
    h = sympy.Rational(float(dx))
    avg = sympy.integrate(w, (y, x - h / 2, x + h / 2)) / h
    target = sum(sympy.Rational(float(c)) * x ** j for j, c in enumerate(poly_coeffs))
    eqs = sympy.Poly(sympy.expand(avg - target), x).all_coeffs()
    sol = sympy.solve(eqs, unknown, dict=True)[0]
    return [float(sol[c]) for c in unknown]
