"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Runs take several minutes in total; shared runs live in module fixtures.
"""

import math

import numpy as np
import pytest

from mixkin.euler import single_from_primitive, ssp_rk3_advance
from mixkin.grid import TimeControl, build_grid
from mixkin.harness import (
    convergence_table,
    l1_rel,
    parse_config,
    riemann_differences,
    run_euler,
    run_preset,
    species_distance,
)
from mixkin.moments import MixtureState, SpeciesTable, compute_moments, maxwellian_state
from mixkin.presets import RIEMANN_LEFT, RIEMANN_RIGHT, RIEMANN_X0, four_gas_species, riemann_fields
from mixkin.reconstruct import cweno_reconstruct, q_eval, shift_cells, shift_field
from mixkin.relax import RegimeParams, solve_temperatures, solve_velocities
from mixkin.stepper import DIRK3, IMPLICIT_EULER, advance, step_dirk
from oracles import advected_profile, exact_riemann
from test_relax import pair_field

pytestmark = pytest.mark.slow

RESOLUTIONS = [40, 80, 160, 320]
REFERENCE_BDF3_ERRORS = (7.86e-4, 3.51e-5, 1.16e-6)
KAPPAS = (1e-1, 1e-2, 1e-3, 1e-4)


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
        return ok

    return emit


def lsq_order(resolutions, errors):
    return -np.polyfit(np.log(resolutions), np.log(errors), 1)[0]


# -- 1. accuracy orders ----------------------------------------------------


@pytest.fixture(scope="module")
def accuracy_tables():
    tables = {}
    for scheme in ("RK2-QCW23", "BDF2-QCW23"):
        for eps in (1e-5, 1e-4, 1e-3, 1e-2):
            tables[scheme, eps] = convergence_table("accuracy", scheme, RESOLUTIONS, RegimeParams(eps, eps))
    for scheme in ("BDF3-QCW35", "RK3-QCW35"):
        tables[scheme, 1e-2] = convergence_table("accuracy", scheme, RESOLUTIONS, RegimeParams(1e-2, 1e-2))
    return tables


def test_criterion_1_accuracy_orders(accuracy_tables, report):
    failures = []
    for (scheme, eps), rows in accuracy_tables.items():
        rates = [r.rate for r in rows if r.rate is not None]
        minimum = {"BDF3-QCW35": 3.0, "RK3-QCW35": 2.5}.get(scheme, 1.8)
        if min(rates) < minimum:
            failures.append(f"{scheme} eps={eps:g} rates {rates}")
    errors = [r.error for r in accuracy_tables["BDF3-QCW35", 1e-2]]
    factors = [max(e / p, p / e) for e, p in zip(errors, REFERENCE_BDF3_ERRORS)]
    if max(factors) > 5.0:
        failures.append(f"BDF3 errors {errors} off by factor {max(factors):.2f}")
    detail = "; ".join(failures) or f"all rates above thresholds, BDF3 worst factor {max(factors):.2f}"
    assert report(1, not failures, detail), detail


# -- 2. indifferentiability ------------------------------------------------


@pytest.fixture(scope="module")
def indiff_runs(tmp_path_factory):
    runs = {}
    for nx in (100, 200, 400):
        cfg = parse_config({"preset": "indiff_four", "scheme": "BDF3-QCW35", "regime": {"epsilon": 1e-2},
                            "grid": {"nx": nx}})
        runs[nx] = run_preset(cfg, tmp_path_factory.mktemp(f"indiff{nx}"))
    return runs


def test_criterion_2_indifferentiability(indiff_runs, report):
    disc = {nx: art.summary["discrepancy"]["n"] for nx, art in indiff_runs.items()}
    order = lsq_order(list(disc), list(disc.values()))
    ok = disc[200] <= 1e-6 and order >= 3.0
    detail = f"n discrepancy {disc}, order {order:.2f}"
    assert report(2, ok, detail), detail


# -- 3. Euler limit --------------------------------------------------------


@pytest.fixture(scope="module")
def riemann_kinetic(tmp_path_factory):
    cfg = parse_config({"preset": "riemann_kinetic", "scheme": "BDF3-QCW35",
                        "regime": {"epsilon": 1e-6, "kappa": 1e-6}, "grid": {"nx": 200, "nv": 60}})
    return run_preset(cfg, tmp_path_factory.mktemp("riemann"))


@pytest.fixture(scope="module")
def euler_single():
    return run_euler("single", 2000, four_gas_species())


def test_criterion_3_euler_limit(riemann_kinetic, euler_single, report):
    x, moments = riemann_kinetic.fields["moments"]
    grid_ref, reference = euler_single
    diff = riemann_differences(x, moments, grid_ref.x_nodes, reference)
    ok = all(diff[k] <= 0.03 for k in ("rho", "u", "T")) and diff["u_spread"] <= 0.01 and diff["T_spread"] <= 0.01
    detail = ", ".join(f"{k}={v:.3e}" for k, v in diff.items())
    assert report(3, ok, detail), detail


# -- 4. multi-temperature trend ---------------------------------------------


@pytest.fixture(scope="module")
def kappa_sweep(tmp_path_factory):
    species = four_gas_species()
    out = {}
    for kappa in KAPPAS:
        cfg = parse_config({"preset": "riemann_kinetic", "scheme": "BDF3-QCW35",
                            "regime": {"epsilon": 1e-6, "kappa": kappa}, "grid": {"nx": 200, "nv": 60}})
        art = run_preset(cfg, tmp_path_factory.mktemp("sweep"))
        out[kappa] = (art.fields["moments"], run_euler("multi", 2000, species, kappa))
    return out


def test_criterion_4_multi_temperature_trend(kappa_sweep, euler_single, report):
    grid_single, single = euler_single
    worst = 0.0
    to_single = []
    for kappa in KAPPAS:
        (x, moments), (grid_multi, multi) = kappa_sweep[kappa]
        worst = max(worst, max(species_distance(x, moments, grid_multi.x_nodes, multi)))
        to_single.append(float(np.mean(species_distance(x, moments, grid_single.x_nodes, single))))
    monotone = all(b < a for a, b in zip(to_single, to_single[1:]))
    ok = worst <= 0.05 and monotone
    detail = f"worst species l1 vs multi Euler {worst:.3e}, distance to single Euler {to_single}"
    assert report(4, ok, detail), detail


# -- 5. conservation -------------------------------------------------------


def test_criterion_5_conservation(indiff_runs, report, tmp_path):
    failures = []
    cfg = parse_config({"preset": "accuracy", "scheme": "BDF3-QCW35", "regime": {"epsilon": 1e-2},
                        "resolutions": [40, 80]})
    accuracy = run_preset(cfg, tmp_path)
    drifts = [v for art in (accuracy, *indiff_runs.values()) for k, v in art.summary.items()
              if k.startswith("mass_drift")]
    if max(drifts) > 1e-12:
        failures.append(f"mass drift {max(drifts):.2e}")

    # space-homogeneous relaxation, checked after every step
    species = SpeciesTable(np.array([2.0, 1.0]), np.array([[1.0, 2.0], [2.0, 1.5]]))
    grid = build_grid((-1, 1), 8, "periodic", (-14, 14), 56)
    nx = grid.nx
    state = maxwellian_state(np.array([[1.0] * nx, [0.5] * nx]), np.array([[0.8] * nx, [-1.0] * nx]),
                             np.array([[3.0] * nx, [1.5] * nx]), grid, species)
    m0 = compute_moments(state, grid, species)
    worst_mom = worst_en = 0.0

    def check(step, new):
        nonlocal worst_mom, worst_en
        m = compute_moments(new, grid, species)
        worst_mom = max(worst_mom, np.max(np.abs(m.rho * m.u - m0.rho * m0.u)) / np.max(np.abs(m0.rho * m0.u)))
        worst_en = max(worst_en, np.max(np.abs(m.E - m0.E)) / np.max(m0.E))

    for scheme in ("BE", "RK2-QCW23", "RK3-QCW35", "BDF2-QCW23", "BDF3-QCW35"):
        advance(state, TimeControl(t_final=0.2), scheme, grid, species, RegimeParams(0.05, 0.5), check)
    if worst_mom > 1e-10 or worst_en > 1e-8:
        failures.append(f"homogeneous momentum {worst_mom:.2e}, energy {worst_en:.2e}")

    rng = np.random.default_rng(7)
    worst_sum = 0.0
    for k in (2, 4):
        values = rng.uniform(0.0, 10.0, (20, 64))
        out = shift_field(values, rng.uniform(-20, 20, 20) * 0.1, k, "periodic", 0.1)
        worst_sum = max(worst_sum, np.max(np.abs(out.sum(1) - values.sum(1)) / values.sum(1)))
    if worst_sum > 1e-12:
        failures.append(f"shifted sums {worst_sum:.2e}")
    detail = "; ".join(failures) or (f"mass {max(drifts):.1e}, momentum {worst_mom:.1e}, "
                                     f"energy {worst_en:.1e}, shifted sums {worst_sum:.1e}")
    assert report(5, not failures, detail), detail


# -- 6. reconstruction orders ----------------------------------------------


def test_criterion_6_reconstruction_orders(report):
    orders = {}
    for k in (2, 4):
        errors = []
        for nx in RESOLUTIONS:
            dx = 2.0 / nx
            x = -1.0 + dx * np.arange(nx)
            field = cweno_reconstruct(np.sin(np.pi * x), k=k, dx=dx)
            shifted = np.array([q_eval(field, i, 0.37) for i in range(nx)])
            errors.append(np.max(np.abs(shifted - np.sin(np.pi * (x + 0.37 * dx)))))
        orders[k] = lsq_order(RESOLUTIONS, errors)
    values = np.random.default_rng(3).uniform(-5, 5, 50)
    identity = max(np.max(np.abs(shift_cells(cweno_reconstruct(values, k=k), 0.0) - values)) for k in (2, 4))
    ok = orders[2] >= 2.7 and orders[4] >= 4.5 and identity <= 1e-13
    detail = f"orders k=2 {orders[2]:.2f}, k=4 {orders[4]:.2f}, theta=0 error {identity:.1e}"
    assert report(6, ok, detail), detail


# -- 7. oracle equivalences ------------------------------------------------


def smooth_pulse(x, v):
    return (1.0 + 0.5 * np.sin(np.pi * x)) * np.exp(-(v ** 2) / 8.0)


def test_criterion_7_oracle_equivalences(report):
    failures = []
    species = SpeciesTable(np.array([1.0]), np.array([[0.0]]))
    for tableau, k, minimum in ((IMPLICIT_EULER, 2, 2.5), (DIRK3, 4, 4.5)):
        errors = []
        for nx in RESOLUTIONS:
            grid = build_grid((-1, 1), nx, "periodic", (-6, 6), 24)
            g0 = advected_profile(smooth_pulse, grid.x_nodes, grid.v_nodes, 0.0).T[None]
            dt = grid.nominal_dt(2.3)
            new = step_dirk(MixtureState(g0.copy(), g0.copy()), tableau, dt, grid, species, RegimeParams(1, 1), k)
            exact = advected_profile(smooth_pulse, grid.x_nodes, grid.v_nodes, dt, period=(-1.0, 2.0)).T[None]
            errors.append(np.max(np.abs(new.g1 - exact)))
        order = lsq_order(RESOLUTIONS, errors)
        if order < minimum:
            failures.append(f"free transport k={k} order {order:.2f}")

    species4 = four_gas_species()
    grid = build_grid((-1.0, 1.0), 2000, "freeflow", (-1.0, 1.0), 2)
    n_s, _, T_s = riemann_fields(grid.x_nodes, species4)
    out = ssp_rk3_advance(single_from_primitive(n_s, 0.0, T_s[0], species4), grid, species4,
                          TimeControl(((math.inf, 0.4),), 0.2))
    rho, u, _, p = out.primitive(species4)
    left = (RIEMANN_LEFT["rho"], RIEMANN_LEFT["u"], RIEMANN_LEFT["p"])
    right = (RIEMANN_RIGHT["rho"], RIEMANN_RIGHT["u"], RIEMANN_RIGHT["p"])
    exact = exact_riemann(left, right, grid.x_nodes, 0.2, RIEMANN_X0)
    sod = {"rho": l1_rel(rho, exact[0]), "u": l1_rel(u, exact[1]), "p": l1_rel(p, exact[2])}
    if max(sod.values()) > 0.02:
        failures.append(f"Sod l1 {sod}")

    u_new = solve_velocities(np.array([[1.0], [0.0]]), pair_field(1.0), 1.0)
    pair = SpeciesTable([1.0, 1.0], np.ones((2, 2)))
    zero = np.zeros((2, 1))
    T_new = solve_temperatures(np.array([[2.0], [1.0]]), zero, zero, pair_field(0.5, nu=2.0), 1.0, pair)
    solve_err = max(np.max(np.abs(u_new[:, 0] - [2 / 3, 1 / 3])), np.max(np.abs(T_new[:, 0] - [5 / 3, 4 / 3])))
    if solve_err > 1e-14:
        failures.append(f"2x2 solves off by {solve_err:.1e}")
    detail = "; ".join(failures) or (f"free transport orders ok, Sod l1 "
                                     + ", ".join(f"{k}={v:.2e}" for k, v in sod.items())
                                     + f", 2x2 solves {solve_err:.1e}")
    assert report(7, not failures, detail), detail
