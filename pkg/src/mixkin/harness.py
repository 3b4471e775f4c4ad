"""Experiment presets, error norms and artifact writers.

A run is described by a JSON document validated into ``ExperimentConfig``
(unknown keys are rejected). ``run_preset`` executes it and writes moments,
diagnostics and, where meaningful, convergence or discrepancy tables as CSV
with floats in shortest round-trip form.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from . import presets
from .errors import ConfigError, LengthMismatch, ZeroReference
from .euler import multi_from_primitive, single_from_primitive, ssp_rk3_advance
from .grid import TimeControl, build_grid
from .moments import MomentField, SpeciesTable, compute_moments, global_moments, maxwellian_state
from .reconstruct import EPS_WEIGHT
from .relax import RegimeParams
from .stepper import SCHEMES, advance

__all__ = [
    "ExperimentConfig",
    "RunArtifacts",
    "KineticRun",
    "load_config",
    "parse_config",
    "run_preset",
    "run_kinetic",
    "run_euler",
    "l1_rel",
    "convergence_table",
    "ConvergenceRow",
    "indiff_discrepancy",
    "riemann_differences",
    "species_distance",
    "write_moments_csv",
    "write_diagnostics_csv",
    "write_convergence_csv",
    "write_svg",
    "moments_header",
    "diagnostics_header",
]

logger = logging.getLogger(__name__)

PRESETS = (
    "accuracy",
    "indiff_single",
    "indiff_four",
    "riemann_kinetic",
    "riemann_euler_single",
    "riemann_euler_multi",
    "custom",
)
DEFAULT_RESOLUTIONS = (40, 80, 160, 320)
EULER_CFL = 0.4


# -- configuration ---------------------------------------------------------


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)


class SpeciesConfig(_Strict):
    masses: list[float] = Field(min_length=1)
    lam: list[list[float]] = Field(alias="lambda")
    k_b: float = Field(1.0, gt=0)

    def table(self):
        try:
            return SpeciesTable(np.array(self.masses), np.array(self.lam), self.k_b)
        except ValueError as exc:
            raise ConfigError(str(exc), "species") from None


class RegimeConfig(_Strict):
    epsilon: float = Field(gt=0)
    kappa: float | None = Field(None, gt=0)

    def params(self):
        return RegimeParams(self.epsilon, self.kappa if self.kappa is not None else self.epsilon)


class GridConfig(_Strict):
    nx: int | None = Field(None, ge=4)
    nv: int = Field(60, ge=2)
    x_domain: tuple[float, float] = (-1.0, 1.0)
    v_domain: tuple[float, float] = (-15.0, 15.0)
    bc: Literal["periodic", "freeflow"] | None = None

    @model_validator(mode="after")
    def _ordered(self):
        if not self.x_domain[0] < self.x_domain[1]:
            raise ValueError("x_domain must be increasing")
        if not self.v_domain[0] < self.v_domain[1]:
            raise ValueError("v_domain must be increasing")
        return self


class TimeConfig(_Strict):
    t_final: float = Field(0.2, ge=0)
    # each entry is [t_end, cfl]; a null t_end means "until t_final"
    cfl_schedule: list[tuple[float | None, float]] | None = None
    dt_cap: float | None = Field(None, gt=0)

    def control(self, default_schedule):
        sched = self.cfl_schedule
        if sched is None:
            sched = default_schedule
        sched = tuple((math.inf if t is None else t, c) for t, c in sched)
        try:
            return TimeControl(sched, self.t_final, self.dt_cap)
        except ValueError as exc:
            raise ConfigError(str(exc), "time.cfl_schedule") from None


class EulerConfig(_Strict):
    nx: int = Field(2000, ge=4)
    cfl: float = Field(EULER_CFL, gt=0, le=0.5)


class CustomData(_Strict):
    """Piecewise-constant Maxwellian data: ``n``, ``u``, ``T`` are indexed
    ``[species][piece]`` with ``len(breakpoints) + 1`` pieces."""

    breakpoints: list[float] = []
    n: list[list[float]]
    u: list[list[float]]
    T: list[list[float]]

    @model_validator(mode="after")
    def _shapes(self):
        pieces = len(self.breakpoints) + 1
        if any(b <= a for a, b in zip(self.breakpoints, self.breakpoints[1:])):
            raise ValueError("breakpoints must be increasing")
        for name in ("n", "u", "T"):
            rows = getattr(self, name)
            if any(len(r) != pieces for r in rows):
                raise ValueError(f"every row of {name} needs {pieces} values")
        if not len(self.n) == len(self.u) == len(self.T):
            raise ValueError("n, u and T need one row per species")
        if any(v <= 0 for r in self.n for v in r) or any(v <= 0 for r in self.T for v in r):
            raise ValueError("n and T must be positive")
        return self


class ExperimentConfig(_Strict):
    preset: Literal[PRESETS]
    scheme: Literal[tuple(SCHEMES)] = "BDF3-QCW35"
    regime: RegimeConfig = RegimeConfig(epsilon=1e-2)
    grid: GridConfig = GridConfig()
    time: TimeConfig = TimeConfig()
    species: SpeciesConfig | None = None
    resolutions: list[int] | None = None
    euler: EulerConfig = EulerConfig()
    custom: CustomData | None = None
    output_dir: str = "out"
    plots: bool = False

    @model_validator(mode="after")
    def _preset_fields(self):
        if self.preset == "custom":
            if self.species is None:
                raise ValueError("custom preset needs 'species'")
            if self.custom is None:
                raise ValueError("custom preset needs 'custom' initial data")
            if len(self.custom.n) != len(self.species.masses):
                raise ValueError("custom data must have one row per species")
        elif self.custom is not None:
            raise ValueError("'custom' data is only accepted by the custom preset")
        if self.preset.startswith("indiff") and self.species is not None:
            raise ValueError("indiff presets fix their own species")
        if self.resolutions is not None:
            if self.preset != "accuracy":
                raise ValueError("'resolutions' only applies to the accuracy preset")
            r = self.resolutions
            if len(r) < 2 or any(n < 4 for n in r) or any(b != 2 * a for a, b in zip(r, r[1:])):
                raise ValueError("resolutions must be successive doublings of at least two grids (Nx >= 4)")
        return self


def _error_path(err):
    return ".".join(str(p) for p in err["loc"]) or "<root>"


def parse_config(data):
    """Validate a decoded JSON document; raises ConfigError with field paths."""
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object", "<root>")
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        errors = exc.errors()
        first = errors[0]
        detail = "; ".join(f"{_error_path(e)}: {e['msg']}" for e in errors)
        raise ConfigError(detail if len(errors) > 1 else first["msg"], _error_path(first)) from None


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", str(path)) from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}", str(path)) from None
    return parse_config(data)


# -- norms and tables ------------------------------------------------------


def l1_rel(a, b):
    """``sum|a - b| / sum|b|``."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size != b.size:
        raise LengthMismatch(f"rows differ in length: {a.size} vs {b.size}")
    ref = np.sum(np.abs(b))
    if ref == 0:
        raise ZeroReference("reference row has zero L1 norm")
    return float(np.sum(np.abs(a - b)) / ref)


@dataclass(frozen=True)
class ConvergenceRow:
    nx: int
    error: float
    rate: float | None


def convergence_from_fields(fields):
    """``fields`` maps Nx to the global density on that grid; grids must nest."""
    nxs = sorted(fields)
    errors = []
    for coarse, fine in zip(nxs, nxs[1:]):
        if fine != 2 * coarse:
            raise ValueError(f"resolutions must be nested doublings, got {coarse} then {fine}")
        errors.append(l1_rel(np.asarray(fields[fine])[::2], fields[coarse]))
    rows = []
    for i, (nx, err) in enumerate(zip(nxs, errors)):
        rate = None
        if i + 1 < len(errors):
            nxt = errors[i + 1]
            rate = math.log2(err / nxt) if err > 0 and nxt > 0 else math.nan
        rows.append(ConvergenceRow(nx, err, rate))
    return rows


def convergence_table(preset, scheme, resolutions, regime, nv=60, time_control=None):
    """Self-convergence of global number density.

    ``error(Nx) = l1_rel(run(2Nx) restricted to the Nx nodes, run(Nx))`` and
    ``rate = log2(error(Nx) / error(2Nx))``. Only the periodic ``accuracy``
    preset has nested grids.
    """
    if preset != "accuracy":
        raise ValueError(f"convergence tables need the nested periodic accuracy preset, got {preset!r}")
    tc = time_control or TimeControl(((math.inf, 2.0),), 0.2)
    fields = {}
    for nx in resolutions:
        grid, species, state = presets.accuracy_setup(nx, nv)
        run = run_kinetic(state, grid, species, scheme, regime, tc)
        fields[nx] = run.moments.n
    return convergence_from_fields(fields)


# -- solver drivers --------------------------------------------------------


@dataclass
class KineticRun:
    grid: object
    species: SpeciesTable
    state: object
    moments: MomentField
    diagnostics: list


def run_kinetic(state, grid, species, scheme, regime, time_control, callback=None):
    final, diag = advance(state, time_control, scheme, grid, species, regime, callback)
    return KineticRun(grid, species, final, compute_moments(final, grid, species), diag)


def euler_moments(state, species):
    """MomentField of an Euler state (single: species share u and T)."""
    if hasattr(state, "momentum_s"):
        _, u_s, T_s, _ = state.primitive(species)
    else:
        _, u, T, _ = state.primitive(species)
        u_s = np.repeat(u[None], species.L, axis=0)
        T_s = np.repeat(T[None], species.L, axis=0)
    n, rho, u, T, E = global_moments(state.n_s, u_s, T_s, species)
    return MomentField(state.n_s, u_s, T_s, n, rho, u, T, E, species.masses)


def run_euler(model, nx, species, kappa=None, t_final=0.2, cfl=EULER_CFL, x_domain=(-1.0, 1.0)):
    """Riemann reference run of the single (``model='single'``) or multi system."""
    grid = build_grid(x_domain, nx, "freeflow", (-1.0, 1.0), 2)
    n_s, u_s, T_s = presets.riemann_fields(grid.x_nodes, species)
    tc = TimeControl(((math.inf, cfl),), t_final)
    if model == "single":
        state = single_from_primitive(n_s, 0.0, T_s[0], species)
        state = ssp_rk3_advance(state, grid, species, tc)
    elif model == "multi":
        if kappa is None:
            raise ValueError("the multi-temperature reference needs kappa")
        state = multi_from_primitive(n_s, u_s, T_s, species)
        state = ssp_rk3_advance(state, grid, species, tc, kappa=kappa)
    else:
        raise ValueError(f"unknown Euler model {model!r}")
    return grid, euler_moments(state, species)


def _sample(x_ref, values, x):
    values = np.asarray(values)
    if values.ndim == 1:
        return np.interp(x, x_ref, values)
    return np.stack([np.interp(x, x_ref, row) for row in values])


def riemann_differences(x, moments, x_ref, reference):
    """Relative L1 differences of a kinetic run against an Euler reference
    sampled at the kinetic nodes, plus the spread of species fields."""
    rho_ref = _sample(x_ref, reference.rho, x)
    u_ref = _sample(x_ref, reference.u, x)
    T_ref = _sample(x_ref, reference.T, x)
    moving = np.abs(u_ref) > 0.05 * np.max(np.abs(u_ref))
    u_range = np.ptp(moments.u) or 1.0
    T_range = np.ptp(moments.T) or 1.0
    return {
        "rho": l1_rel(moments.rho, rho_ref),
        "u": l1_rel(moments.u[moving], u_ref[moving]),
        "T": l1_rel(moments.T, T_ref),
        "u_spread": float(np.max(np.abs(moments.u_s - moments.u)) / u_range),
        "T_spread": float(np.max(np.abs(moments.T_s - moments.T)) / T_range),
    }


def species_distance(x, moments, x_ref, reference):
    """Per-species relative L1 differences of the number densities."""
    ref = _sample(x_ref, reference.n_s, x)
    return [l1_rel(a, b) for a, b in zip(moments.n_s, ref)]


def indiff_discrepancy(single, four):
    """Relative L1 discrepancy of the four-gas run against the single gas."""
    return {name: l1_rel(getattr(four, name), getattr(single, name)) for name in ("n", "u", "T")}


# -- writers ---------------------------------------------------------------


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return repr(float(value))


def moments_header(L):
    cols = ["x"]
    for name in ("n", "u", "T"):
        cols += [f"{name}_{s}" for s in range(1, L + 1)]
    return cols + ["n", "rho", "u", "T", "E"]


def diagnostics_header(L):
    return ["step", "t", "dt"] + [f"mass_{s}" for s in range(1, L + 1)] + ["momentum", "energy", "min_g1"]


def _write(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def write_moments_csv(path, x, moments):
    L = moments.L
    rows = []
    for i in range(np.size(x)):
        rows.append(
            [x[i]]
            + [moments.n_s[s, i] for s in range(L)]
            + [moments.u_s[s, i] for s in range(L)]
            + [moments.T_s[s, i] for s in range(L)]
            + [moments.n[i], moments.rho[i], moments.u[i], moments.T[i], moments.E[i]]
        )
    return _write(path, moments_header(L), rows)


def write_diagnostics_csv(path, diagnostics, L):
    header = diagnostics_header(L)
    return _write(path, header, [[row[c] for c in header] for row in diagnostics])


def write_convergence_csv(path, table):
    return _write(path, ["Nx", "error", "rate"], [[r.nx, r.error, r.rate] for r in table])


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#000000")


def write_svg(path, x, series, title="", width=640, height=400):
    """Minimal line chart; ``series`` maps labels to y rows sharing ``x``."""
    x = np.asarray(x, dtype=float)
    ys = [np.asarray(v, dtype=float) for v in series.values()]
    pad = 50
    x0, x1 = float(x.min()), float(x.max())
    y0 = min(float(v.min()) for v in ys)
    y1 = max(float(v.max()) for v in ys)
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    xs = pad + (x - x0) / (x1 - x0 or 1.0) * (width - 2 * pad)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" height="{height - 2 * pad}" fill="none" stroke="#888"/>',
        f'<text x="{pad}" y="{height - pad + 15}" font-size="10">{x0:.3g}</text>',
        f'<text x="{width - pad}" y="{height - pad + 15}" font-size="10" text-anchor="end">{x1:.3g}</text>',
        f'<text x="{pad - 5}" y="{height - pad}" font-size="10" text-anchor="end">{y0:.3g}</text>',
        f'<text x="{pad - 5}" y="{pad + 10}" font-size="10" text-anchor="end">{y1:.3g}</text>',
    ]
    for idx, (label, y) in enumerate(zip(series, ys)):
        yp = height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(xs, yp))
        colour = _PALETTE[idx % len(_PALETTE)]
        parts.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{pts}"/>')
        parts.append(f'<text x="{width - pad - 5}" y="{pad + 15 + 14 * idx}" font-size="11" '
                     f'text-anchor="end" fill="{colour}">{label}</text>')
    parts.append("</svg>")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(parts) + "\n")
    return path


# -- presets ---------------------------------------------------------------


@dataclass
class RunArtifacts:
    out_dir: Path
    files: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    # in-memory (x, MomentField) pairs keyed like the CSV files
    fields: dict = field(default_factory=dict)


def _kinetic_artifacts(art, tag, run, plots):
    L = run.species.L
    art.files[f"moments{tag}"] = write_moments_csv(art.out_dir / f"moments{tag}.csv", run.grid.x_nodes, run.moments)
    art.fields[f"moments{tag}"] = (run.grid.x_nodes, run.moments)
    art.files[f"diagnostics{tag}"] = write_diagnostics_csv(art.out_dir / f"diagnostics{tag}.csv", run.diagnostics, L)
    first, last = run.diagnostics[0], run.diagnostics[-1]
    drift = max(abs(last[f"mass_{s}"] - first[f"mass_{s}"]) / abs(first[f"mass_{s}"]) for s in range(1, L + 1))
    art.summary[f"mass_drift{tag}"] = drift
    art.summary[f"min_g1{tag}"] = min(r["min_g1"] for r in run.diagnostics)
    art.summary[f"steps{tag}"] = len(run.diagnostics) - 1
    if plots:
        x = run.grid.x_nodes
        art.files[f"density{tag}"] = write_svg(
            art.out_dir / f"density{tag}.svg", x,
            {f"n_{s + 1}": run.moments.n_s[s] for s in range(L)} | {"n": run.moments.n}, f"number density{tag}")


def _schedule_entries(tc):
    return [[start, stop, cfl] for start, stop, cfl in tc.segments()]


def _riemann_species(cfg):
    return cfg.species.table() if cfg.species is not None else presets.four_gas_species()


def _riemann_grid(cfg, default_nx=200):
    g = cfg.grid
    return build_grid(g.x_domain, g.nx or default_nx, g.bc or "freeflow", g.v_domain, g.nv)


def run_preset(config, out_dir=None):
    """Execute ``config`` and write its artifacts; returns RunArtifacts."""
    cfg = config
    out = Path(out_dir if out_dir is not None else cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    art = RunArtifacts(out)
    regime = cfg.regime.params()
    meta = {"preset": cfg.preset, "config": cfg.model_dump(mode="json", by_alias=True),
            "weight_regularization": {str(k): v for k, v in EPS_WEIGHT.items()}}

    if cfg.preset == "accuracy":
        if cfg.grid.bc not in (None, "periodic"):
            raise ConfigError("the accuracy preset is periodic", "grid.bc")
        tc = cfg.time.control(((None, 2.0),))
        species = cfg.species.table() if cfg.species is not None else presets.four_gas_species()
        resolutions = cfg.resolutions or list(DEFAULT_RESOLUTIONS)
        fields = {}
        for nx in resolutions:
            grid = build_grid(cfg.grid.x_domain, nx, "periodic", cfg.grid.v_domain, cfg.grid.nv)
            state = presets.initial_state(presets.accuracy_fields, grid, species)
            run = run_kinetic(state, grid, species, cfg.scheme, regime, tc)
            _kinetic_artifacts(art, f"_nx{nx}", run, cfg.plots)
            fields[nx] = run.moments.n
            logger.info("accuracy Nx=%d done", nx)
        table = convergence_from_fields(fields)
        art.files["convergence"] = write_convergence_csv(out / "convergence.csv", table)
        art.summary["convergence"] = [[r.nx, r.error, r.rate] for r in table]
        meta["schedule"] = _schedule_entries(tc)

    elif cfg.preset in ("indiff_single", "indiff_four"):
        tc = cfg.time.control(presets.INDIFF_SCHEDULE)
        nx = cfg.grid.nx or 200
        if cfg.grid.bc not in (None, "periodic"):
            raise ConfigError("the indiff presets are periodic", "grid.bc")
        grid = build_grid(cfg.grid.x_domain, nx, "periodic", cfg.grid.v_domain, cfg.grid.nv)
        counts = (1,) if cfg.preset == "indiff_single" else (4, 1)
        runs = {}
        for count in counts:
            species = presets.indiff_species(count)
            state = presets.initial_state(presets.indiff_fields, grid, species)
            runs[count] = run_kinetic(state, grid, species, cfg.scheme, regime, tc)
            _kinetic_artifacts(art, "_single" if count == 1 else "_four", runs[count], cfg.plots)
        if cfg.preset == "indiff_four":
            disc = indiff_discrepancy(runs[1].moments, runs[4].moments)
            art.files["discrepancy"] = _write(out / "discrepancy.csv", ["quantity", "discrepancy"],
                                              [[k, v] for k, v in disc.items()])
            art.summary["discrepancy"] = disc
        meta["schedule"] = _schedule_entries(tc)

    elif cfg.preset == "riemann_kinetic" or cfg.preset == "custom":
        tc = cfg.time.control(presets.INDIFF_SCHEDULE)
        if cfg.preset == "riemann_kinetic":
            species = _riemann_species(cfg)
            grid = _riemann_grid(cfg)
            state = presets.initial_state(presets.riemann_fields, grid, species)
        else:
            species = cfg.species.table()
            g = cfg.grid
            if g.nx is None:
                raise ConfigError("custom preset needs grid.nx", "grid.nx")
            grid = build_grid(g.x_domain, g.nx, g.bc or "periodic", g.v_domain, g.nv)
            state = _custom_state(cfg.custom, grid, species)
        run = run_kinetic(state, grid, species, cfg.scheme, regime, tc)
        _kinetic_artifacts(art, "", run, cfg.plots)
        meta["schedule"] = _schedule_entries(tc)

    else:
        model = "single" if cfg.preset == "riemann_euler_single" else "multi"
        species = _riemann_species(cfg)
        g = cfg.grid
        kappa = regime.kappa if model == "multi" else None
        grid, moments = run_euler(model, cfg.euler.nx, species, kappa, cfg.time.t_final, cfg.euler.cfl, g.x_domain)
        art.files["euler_moments"] = write_moments_csv(out / "euler_moments.csv", grid.x_nodes, moments)
        art.fields["euler_moments"] = (grid.x_nodes, moments)
        if cfg.plots:
            art.files["euler_density"] = write_svg(out / "euler_density.svg", grid.x_nodes,
                                                   {"rho": moments.rho, "u": moments.u, "T": moments.T},
                                                   f"{model} Euler reference")
        meta["euler"] = {"model": model, "nx": cfg.euler.nx, "cfl": cfg.euler.cfl, "kappa": kappa}

    meta["summary"] = art.summary
    path = out / "metadata.json"
    path.write_text(json.dumps(meta, indent=2, sort_keys=True, default=_json_default) + "\n")
    art.files["metadata"] = path
    return art


def _json_default(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _custom_state(data, grid, species):
    piece = np.searchsorted(np.asarray(data.breakpoints, dtype=float), grid.x_nodes, side="right")
    n_s = np.asarray(data.n, dtype=float)[:, piece]
    u_s = np.asarray(data.u, dtype=float)[:, piece]
    T_s = np.asarray(data.T, dtype=float)[:, piece]
    return maxwellian_state(n_s, u_s, T_s, grid, species)
