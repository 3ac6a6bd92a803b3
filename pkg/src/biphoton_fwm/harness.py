"""Scenario registry and validation runner.

Each scenario builds its initial state, propagates it, compares against the
closed forms or an independent reference and returns a
:class:`ValidationReport`.  When an output directory is given the scenario
also writes its data files (CSV schemas in :mod:`biphoton_fwm.io`) and a
gnuplot script.

Default parameters (the figure setups do not fix them): ``M = 45`` cells,
Gaussian envelopes centred on cell 22 with width 4 cells, and
``kappa = pi / 45`` so that one full conversion cycle ``tau = pi / (kappa c)``
is exactly 45 steps, i.e. one trip around the ring.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import analytic, io
from .config import DEFAULT_TOLERANCES, SimConfig
from .errors import ScenarioLookupError
from .fock import crosscheck
from .lattice import Lattice, diagonal, offdiagonal, shift_grid, to_modes, from_modes
from .mode_oracle import ModeODESystem, integrate
from .observables import (
    conservation_check,
    intensities,
    sign_flip_metric,
    xicondition_residual,
)
from .propagator import MediumMask, StepPlan, accumulated_angles, iterate, run, window_depth


@dataclass
class Check:
    name: str
    measured: float
    tolerance: float
    runtime: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.measured < self.tolerance)

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{self.name} {self.measured:.3e} {self.tolerance:.1e} {flag}"


@dataclass
class ValidationReport:
    scenario: str
    checks: list = field(default_factory=list)
    info: dict = field(default_factory=dict)
    files: list = field(default_factory=list)
    runtime: float = 0.0
    _mark: float = field(default_factory=time.perf_counter, repr=False)

    def check(self, name: str, measured: float, tolerance: float) -> Check:
        now = time.perf_counter()
        c = Check(name, float(measured), float(tolerance), now - self._mark)
        self._mark = now
        self.checks.append(c)
        return c

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self):
        out = [f"{self.scenario}:{c.line()}" for c in self.checks]
        out += [f"{self.scenario}:info {k} = {v}" for k, v in self.info.items()]
        return out

    def text(self) -> str:
        return "\n".join(self.lines()) + "\n"


@dataclass
class AggregateReport:
    reports: list

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)

    def text(self) -> str:
        body = "".join(r.text() for r in self.reports)
        n_fail = sum(not c.passed for r in self.reports for c in r.checks)
        n = sum(len(r.checks) for r in self.reports)
        return body + f"TOTAL {n - n_fail}/{n} checks passed: {'PASS' if self.passed else 'FAIL'}\n"


@dataclass(frozen=True)
class Scenario:
    name: str
    config: SimConfig
    runner: Callable
    description: str = ""
    outputs: tuple = ()


REGISTRY: dict = {}


def register(name: str, config: SimConfig, description: str = "", outputs=()):
    def deco(fn):
        if name in REGISTRY:
            raise ValueError(f"scenario {name!r} already registered")
        REGISTRY[name] = Scenario(name, config, fn, description, tuple(outputs))
        return fn
    return deco


def list_scenarios():
    return list(REGISTRY)


def _emit_series(report, outdir, stem, states, grid=None):
    if outdir is None:
        return
    outdir = Path(outdir)
    io.write_diagonal_series(states, outdir / f"{stem}_diagonal.csv")
    io.write_intensity_series(states, outdir / f"{stem}_intensity.csv")
    report.files += [str(outdir / f"{stem}_diagonal.csv"), str(outdir / f"{stem}_intensity.csv")]
    if grid is not None:
        io.write_grid(grid, outdir / f"{stem}_grid.csv")
        report.files.append(str(outdir / f"{stem}_grid.csv"))
    io.write_plot_script(outdir / f"{stem}.gp", stem, with_grid=grid is not None)
    report.files.append(str(outdir / f"{stem}.gp"))


def _ring_reference(cfg: SimConfig):
    """Initial state, trajectory, and the transported initial diagonal per snapshot."""
    lat = cfg.lattice
    s0 = cfg.initial_state(lat)
    traj = run(s0, cfg.plan(), cfg.snapshot_every)
    return lat, s0, traj


FULL_CYCLE = SimConfig()


@register("fig1", FULL_CYCLE, "pump pair amplitude on the diagonal across one full cycle",
          ("diagonal", "intensity"))
def _fig1(cfg: SimConfig, outdir=None) -> ValidationReport:
    rep = ValidationReport("fig1")
    tol = cfg.tolerances
    lat, s0, traj = _ring_reference(cfg)
    f2 = diagonal(s0.psi_omega)
    amp = mag = off = 0.0
    for n, s in zip(traj.steps, traj):
        angle = cfg.kappa * lat.c * s.t
        expected = np.roll(f2, n) * np.cos(angle)
        d = diagonal(s.psi_omega)
        amp = max(amp, np.abs(d - expected).max())
        mag = max(mag, np.abs(np.abs(d) - np.abs(expected)).max())
        off = max(off, np.abs(offdiagonal(s.psi_omega) - offdiagonal(shift_grid(s0.psi_omega, n))).max())
    rep.check("diag_psi_omega_abs", mag, tol["amplitude"])
    rep.check("diag_psi_omega", amp, tol["amplitude"])
    rep.check("offdiag_transport", off, tol["amplitude"])
    _emit_series(rep, outdir, "fig1", traj)
    return rep


@register("fig2", FULL_CYCLE, "generated pair amplitude on the diagonal", ("diagonal", "intensity"))
def _fig2(cfg: SimConfig, outdir=None) -> ValidationReport:
    rep = ValidationReport("fig2")
    tol = cfg.tolerances
    lat, s0, traj = _ring_reference(cfg)
    f2 = diagonal(s0.psi_omega)
    err = quad = 0.0
    for n, s in zip(traj.steps, traj):
        angle = cfg.kappa * lat.c * s.t
        de = diagonal(s.psi_e)
        err = max(err, np.abs(de - (-1j) * np.roll(f2, n) * np.sin(angle)).max())
        # psi_e / psi_omega = -i tan(angle)
        dw = diagonal(s.psi_omega)
        quad = max(quad, np.abs(de * np.cos(angle) + 1j * np.sin(angle) * dw).max())
    rep.check("diag_psi_e", err, tol["amplitude"])
    rep.check("quadrature_relation", quad, tol["amplitude"])
    _emit_series(rep, outdir, "fig2", traj)
    return rep


@register("fig2d", FULL_CYCLE, "2D pump pair wavefunction after one full cycle", ("grid",))
def _fig2d(cfg: SimConfig, outdir=None) -> ValidationReport:
    rep = ValidationReport("fig2d")
    lat = cfg.lattice
    s0 = cfg.initial_state(lat)
    n_tau = round(analytic.full_cycle_time(cfg.kappa, lat.c) / lat.cell_time)
    traj = run(s0, cfg.plan(n_tau), max(n_tau, 1))
    d, o = sign_flip_metric(traj.final, s0)
    rep.check("sign_flip_diagonal", d, cfg.tolerances["amplitude"])
    rep.check("sign_flip_offdiagonal", o, cfg.tolerances["amplitude"])
    half = run(s0, cfg.plan(n_tau // 2), max(n_tau // 2, 1)).final if n_tau % 2 == 0 else None
    if half is not None:
        rep.info["half_cycle_metric"] = sign_flip_metric(half, s0)
    rep.info["tau_steps"] = n_tau
    rep.info["conversion_length"] = analytic.conversion_length(cfg.kappa)
    rep.info["full_cycle_length"] = analytic.full_cycle_length(cfg.kappa)
    _emit_series(rep, outdir, "fig2d", traj, grid=traj.final)
    return rep


@register("conversion", FULL_CYCLE.with_(input="diagonal"),
          "pump and generated intensities follow cos^2 and sin^2", ("intensity",))
def _conversion(cfg: SimConfig, outdir=None) -> ValidationReport:
    """Intensity law on a coincident Gaussian pair, plus the separable-input lattice law."""
    rep = ValidationReport("conversion")
    tol = cfg.tolerances
    lat, s0, traj = _ring_reference(cfg)
    env = cfg.make_envelope(lat)
    psi0 = np.abs(env.f0) ** 2
    t0 = time.perf_counter()
    worst = worst_e = 0.0
    for n, s in zip(traj.steps, traj):
        I = intensities(s)
        angle = cfg.kappa * lat.c * s.t
        worst = max(worst, np.abs(I.I_omega1 - np.roll(psi0, n) * np.cos(angle) ** 2).max())
        worst_e = max(worst_e, np.abs(I.I_e1 - np.roll(psi0, n) * np.sin(angle) ** 2).max())
    rep.check("intensity_omega1_cos2", worst, tol["intensity"])
    rep.check("intensity_e1_sin2", worst_e, tol["intensity"])
    rep.check("runtime_seconds", time.perf_counter() - t0, 1.0)

    sep_cfg = cfg.with_(input="separable")
    sep0 = sep_cfg.initial_state(lat)
    lattice_law = cos2_law = 0.0
    for n, s in zip(range(cfg.steps + 1), iterate(sep0, sep_cfg.plan())):
        angle = cfg.kappa * lat.c * s.t
        I = intensities(s).I_omega1
        lattice_law = max(lattice_law, np.abs(I - analytic.separable_intensity(env.f0, n, angle, lat.dz)).max())
        cos2_law = max(cos2_law, np.abs(I - np.roll(psi0, n) * np.cos(angle) ** 2).max())
    rep.check("separable_intensity_lattice_law", lattice_law, tol["intensity"])
    rep.info["separable_deviation_from_cos2_law"] = cos2_law
    _emit_series(rep, outdir, "conversion", traj)
    return rep


@register("xicondition", SimConfig(), "full-cycle mode mixing for M = 9 and M = 45")
def _xicondition(cfg: SimConfig, outdir=None) -> ValidationReport:
    rep = ValidationReport("xicondition")
    # M = 9 with tau = 20 steps exercises a non-trivial co-moving shift (20 mod 9 = 2).
    for M, kappa, steps in ((9, math.pi / 20, 20), (45, math.pi / 45, 45)):
        c = cfg.with_(M=M, kappa=kappa, steps=steps, envelope=f"gaussian:{M // 2},{max(M / 11, 1.0):g}")
        s0 = c.initial_state()
        s_tau = run(s0, c.plan(), steps).final
        res = xicondition_residual(to_modes(s0), to_modes(s_tau))
        rep.check(f"xicondition_M{M}", res, c.tolerances["xicondition"])
    return rep


@register("soliton", FULL_CYCLE.with_(input="diagonal", steps=135, snapshot_every=1),
          "coincident-pair input keeps its shape over three cycles", ("diagonal",))
def _soliton(cfg: SimConfig, outdir=None) -> ValidationReport:
    rep = ValidationReport("soliton")
    lat, s0, traj = _ring_reference(cfg)
    phi = diagonal(s0.psi_omega)
    form = comp = off = 0.0
    for n, s in zip(traj.steps, traj):
        angle = cfg.kappa * lat.c * s.t
        form = max(form, np.abs(analytic.soliton_superposition(s, angle) - np.roll(phi, n)).max())
        comp = max(comp, np.abs(analytic.soliton_complement(s, angle)).max())
        off = max(off, np.abs(offdiagonal(s.psi_omega)).max(), np.abs(offdiagonal(s.psi_e)).max())
    rep.check("soliton_shape_preserved", form, cfg.tolerances["amplitude"])
    rep.check("soliton_complement_zero", comp, cfg.tolerances["amplitude"])
    rep.check("offdiagonal_stays_zero", off, cfg.tolerances["amplitude"])
    rep.info["cycles"] = cfg.steps * cfg.kappa * lat.c * lat.cell_time / math.pi
    _emit_series(rep, outdir, "soliton", traj)
    return rep


WINDOW = SimConfig(kappa=math.pi / 15, steps=40, envelope="gaussian:8,2", mask="window:20,35")


@register("window_bvp", WINDOW, "finite medium: cos(kappa z) with z the in-medium depth",
          ("diagonal", "intensity"))
def _window_bvp(cfg: SimConfig, outdir=None) -> ValidationReport:
    rep = ValidationReport("window_bvp")
    tol = cfg.tolerances
    lat, s0, traj = _ring_reference(cfg)
    mask = cfg.make_mask()
    start, end = mask.bounds()
    f2 = diagonal(s0.psi_omega)
    outside = np.abs(f2[start:end]).max() if end > start else 0.0
    rep.info["initial_amplitude_inside_window"] = float(outside)
    depth_err = path_err = off = 0.0
    cells = np.arange(start, end)
    for n, s in zip(traj.steps, traj):
        d = diagonal(s.psi_omega)
        de = diagonal(s.psi_e)
        src = np.roll(f2, n)
        z = window_depth(mask, cells, lat.dz)
        depth_err = max(depth_err,
                        np.abs(d[cells] - src[cells] * np.cos(cfg.kappa * z)).max(),
                        np.abs(de[cells] + 1j * src[cells] * np.sin(cfg.kappa * z)).max())
        ang = accumulated_angles(mask, n, cfg.kappa, lat.dz)
        path_err = max(path_err, np.abs(d - src * np.cos(ang)).max())
        off = max(off, np.abs(offdiagonal(s.psi_omega) - offdiagonal(shift_grid(s0.psi_omega, n))).max())
    rep.check("window_depth_cos", depth_err, tol["amplitude"])
    rep.check("accumulated_path_cos", path_err, tol["amplitude"])
    rep.check("offdiag_transport", off, tol["amplitude"])
    _emit_series(rep, outdir, "window_bvp", traj)
    return rep


@register("conservation", FULL_CYCLE.with_(steps=10_000), "norm and four transported quantities over 1e4 steps")
def _conservation(cfg: SimConfig, outdir=None) -> ValidationReport:
    rep = ValidationReport("conservation")
    s0 = cfg.initial_state()
    cr = conservation_check(iterate(s0, cfg.plan()))
    rep.check("norm_drift", cr.norm_drift, cfg.tolerances["norm"])
    for name, val in cr.residuals.items():
        rep.check(f"transport_{name}", val, cfg.tolerances["conservation"])
    return rep


@register("mode_oracle", FULL_CYCLE, "RK4 mode-space integration vs split-step over one cycle")
def _mode_oracle(cfg: SimConfig, outdir=None) -> ValidationReport:
    rep = ValidationReport("mode_oracle")
    lat = cfg.lattice
    s0 = cfg.initial_state(lat)
    T = analytic.full_cycle_time(cfg.kappa, lat.c)
    n_tau = round(T / lat.cell_time)
    ref = run(s0, cfg.plan(n_tau), max(n_tau, 1)).final
    system = ModeODESystem(lat, cfg.kappa)
    m0 = to_modes(s0)

    def l2(dt):
        out = from_modes(integrate(system, m0, n_tau * lat.cell_time, dt).modes)
        diff = np.sum(np.abs(out.psi_omega - ref.psi_omega) ** 2 + np.abs(out.psi_e - ref.psi_e) ** 2)
        return float(np.sqrt(diff) * lat.dz)

    rep.check("rk4_l2_dt_cell_over_100", l2(lat.cell_time / 100), cfg.tolerances["oracle_l2"])
    e1, e2, e3 = l2(lat.cell_time / 5), l2(lat.cell_time / 10), l2(lat.cell_time / 20)
    for name, r in (("order_ratio_5_10", e1 / e2), ("order_ratio_10_20", e2 / e3)):
        rep.info[name] = r
        rep.check(name + "_distance_from_16", abs(r - 16.0), 4.0)
    return rep


@register("fock_crosscheck", SimConfig(M=3, kappa=0.2, steps=30, envelope="gaussian:1,1"),
          "many-body Fock-space evolution vs split-step on 3 cells")
def _fock(cfg: SimConfig, outdir=None) -> ValidationReport:
    rep = ValidationReport("fock_crosscheck")
    t0 = time.perf_counter()
    variants = (
        ("", cfg),
        ("_generated_input", cfg.with_(initial_sector="e")),
        ("_window_M5", cfg.with_(M=5, envelope="gaussian:1,1", mask="window:2,4")),
    )
    for suffix, c in variants:
        r = crosscheck(c)
        for name, val, t in r.checks():
            rep.check(name + suffix, val, t)
    rep.check("runtime_seconds", time.perf_counter() - t0, 30.0)
    return rep


def run_scenario(name: str, outdir=None, config: Optional[SimConfig] = None) -> ValidationReport:
    if name not in REGISTRY:
        raise ScenarioLookupError(f"unknown scenario {name!r}; known: {', '.join(REGISTRY)}")
    sc = REGISTRY[name]
    t0 = time.perf_counter()
    rep = sc.runner(config or sc.config, outdir)
    rep.runtime = time.perf_counter() - t0
    if outdir is not None:
        path = Path(outdir) / f"{name}_report.txt"
        path.write_text(rep.text())
        rep.files.append(str(path))
    return rep


def run_all(outdir=None, names=None) -> AggregateReport:
    names = list(REGISTRY) if names is None else list(names)
    if not names:
        raise ScenarioLookupError("no scenarios registered")
    return AggregateReport([run_scenario(n, outdir) for n in names])
