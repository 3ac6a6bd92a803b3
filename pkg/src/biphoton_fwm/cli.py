"""Command-line frontend.

Subcommands::

    run       propagate one configuration and write CSV data
    validate  run registered validation scenarios (exit 1 on any failure)
    sweep     scan kappa and tabulate end-of-run observables
    params    convert atomic-medium parameters to kappa and lengths

Values come from flags, then a ``key=value`` config file (``--config``), then
built-in defaults.  The default output directory is taken from the
``BIPHOTON_FWM_OUTDIR`` environment variable, falling back to ``./out``.

Exit codes: 0 success, 1 validation failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import analytic, harness, io
from .config import INPUT_KINDS, SimConfig, parse_envelope, parse_mask
from .errors import FWMError, SpecSyntaxError
from .lattice import Lattice, from_modes, to_modes
from .mode_oracle import ModeODESystem, integrate
from .observables import conservation_check, intensities, sign_flip_metric
from .propagator import run

ENV_OUTDIR = "BIPHOTON_FWM_OUTDIR"
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULTS = {
    "modes": 45,
    "kappa": math.pi / 45,
    "steps": 45,
    "snapshot_every": 1,
    "envelope": "gaussian:22,4",
    "mask": "full",
    "input": "separable",
    "dz": 1.0,
    "c": 1.0,
    "dt_divisor": None,
}
_CASTS = {"modes": int, "kappa": float, "steps": int, "snapshot_every": int, "envelope": str,
          "mask": str, "input": str, "dz": float, "c": float, "dt_divisor": int}


class UsageError(Exception):
    pass


@dataclass
class CliConfig:
    subcommand: str
    modes: int = 45
    kappa: float = math.pi / 45
    steps: int = 45
    snapshot_every: int = 1
    envelope: str = "gaussian:22,4"
    mask: str = "full"
    input: str = "separable"
    dz: float = 1.0
    c: float = 1.0
    outdir: Path = Path("out")
    dt_divisor: Optional[int] = None
    oracle: str = "none"
    scenarios: list = field(default_factory=list)
    all: bool = False
    list_only: bool = False
    kappas: list = field(default_factory=list)
    physical: dict = field(default_factory=dict)

    def sim_config(self, kappa=None) -> SimConfig:
        return SimConfig(M=self.modes, kappa=self.kappa if kappa is None else kappa, steps=self.steps,
                         snapshot_every=self.snapshot_every, envelope=self.envelope, mask=self.mask,
                         input=self.input, dz=self.dz, c=self.c)


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc.strerror}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CASTS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = _CASTS[key](value)
        except ValueError:
            raise UsageError(f"{path}:{lineno}: bad value {value!r} for {key}") from None
    return out


def _sim_flags(p):
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--modes", "-M", type=int, help="number of cells (default 45)")
    p.add_argument("--kappa", type=float, help="coupling per unit length (default pi/45)")
    p.add_argument("--steps", type=int, help="whole-cell steps (default 45)")
    p.add_argument("--snapshot-every", type=int, help="keep every n-th state (default 1)")
    p.add_argument("--envelope", help="gaussian:CENTER,WIDTH | point:CELL")
    p.add_argument("--mask", help="full | window:START,END")
    p.add_argument("--input", choices=INPUT_KINDS, help="separable pair or coincident (diagonal) pair")
    p.add_argument("--dz", type=float)
    p.add_argument("--c", type=float)
    p.add_argument("--out", help=f"output directory (default ${ENV_OUTDIR} or ./out)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="biphoton-fwm", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("run", help="propagate one configuration")
    _sim_flags(p)
    p.add_argument("--oracle", choices=("none", "rk4"), default=None,
                   help="also integrate the mode-space RK4 reference")
    p.add_argument("--dt-divisor", type=int, help="RK4 step is dz/(c*N) (requires --oracle rk4)")

    p = sub.add_parser("validate", help="run validation scenarios")
    p.add_argument("--all", action="store_true", help="run every registered scenario")
    p.add_argument("--scenario", action="append", default=[], help="scenario name (repeatable)")
    p.add_argument("--list", action="store_true", help="list scenario names and exit")
    p.add_argument("--out", help="write data files and reports here")

    p = sub.add_parser("sweep", help="scan kappa")
    _sim_flags(p)
    p.add_argument("--kappas", help="comma-separated kappa values")
    p.add_argument("--kappa-range", help="START:STOP:NUM (inclusive linspace)")

    p = sub.add_parser("params", help="physical parameters to kappa")
    p.add_argument("--density", type=float, required=True, help="atom number density [m^-3]")
    p.add_argument("--lambda", dest="wavelength", type=float, required=True, help="wavelength [m]")
    p.add_argument("--gamma", type=float, required=True, help="radiative decay rate [s^-1]")
    p.add_argument("--delta", type=float, required=True, help="detuning, same units as gamma")
    return parser


def _parse_float_list(text: str, flag: str):
    vals = []
    for tok in text.split(","):
        try:
            vals.append(float(tok))
        except ValueError:
            raise UsageError(f"{flag}: bad number {tok!r}") from None
    return vals


def parse_args(argv=None) -> CliConfig:
    """Parse ``argv`` into a :class:`CliConfig`; raises :class:`UsageError` on bad input."""
    parser = build_parser()
    ns = parser.parse_args(argv)
    cfg = CliConfig(ns.subcommand)
    default_out = os.environ.get(ENV_OUTDIR) or "out"
    cfg.outdir = Path(getattr(ns, "out", None) or default_out)

    if ns.subcommand == "params":
        cfg.physical = dict(N_density=ns.density, wavelength=ns.wavelength, gamma=ns.gamma, Delta=ns.delta)
        return cfg

    if ns.subcommand == "validate":
        if ns.all and ns.scenario:
            raise UsageError("--all conflicts with --scenario")
        if ns.list and (ns.all or ns.scenario):
            raise UsageError("--list conflicts with --all/--scenario")
        if not (ns.all or ns.scenario or ns.list):
            raise UsageError("validate needs --all, --scenario NAME or --list")
        cfg.all, cfg.scenarios, cfg.list_only = ns.all, list(ns.scenario), ns.list
        return cfg

    values = dict(DEFAULTS)
    if ns.config:
        values.update(read_config_file(ns.config))
    for key in _CASTS:
        v = getattr(ns, key, None)
        if v is not None:
            values[key] = v
    for key, v in values.items():
        setattr(cfg, key, v)

    if ns.subcommand == "run":
        cfg.oracle = ns.oracle or ("rk4" if cfg.dt_divisor is not None else "none")
        if cfg.dt_divisor is not None and cfg.oracle != "rk4":
            raise UsageError("--dt-divisor conflicts with --oracle none (it only applies to the rk4 oracle)")
        if cfg.oracle == "rk4" and cfg.dt_divisor is None:
            cfg.dt_divisor = 100
    elif ns.subcommand == "sweep":
        if ns.kappas and ns.kappa_range:
            raise UsageError("--kappas conflicts with --kappa-range")
        if ns.kappa is not None and (ns.kappas or ns.kappa_range):
            raise UsageError("--kappa conflicts with --kappas/--kappa-range")
        if ns.kappas:
            cfg.kappas = _parse_float_list(ns.kappas, "--kappas")
        elif ns.kappa_range:
            parts = ns.kappa_range.split(":")
            if len(parts) != 3:
                raise UsageError(f"--kappa-range: expected START:STOP:NUM, got {ns.kappa_range!r}")
            lo, hi = _parse_float_list(",".join(parts[:2]), "--kappa-range")
            try:
                num = int(parts[2])
            except ValueError:
                raise UsageError(f"--kappa-range: bad count {parts[2]!r}") from None
            cfg.kappas = list(np.linspace(lo, hi, num))
        else:
            cfg.kappas = [cfg.kappa]

    _validate_sim(cfg)
    return cfg


def _validate_sim(cfg: CliConfig):
    if cfg.modes < 1:
        raise UsageError(f"--modes must be >= 1, got {cfg.modes}")
    if cfg.steps < 0:
        raise UsageError(f"--steps must be >= 0, got {cfg.steps}")
    if cfg.snapshot_every < 1:
        raise UsageError(f"--snapshot-every must be >= 1, got {cfg.snapshot_every}")
    if cfg.dt_divisor is not None and cfg.dt_divisor < 1:
        raise UsageError(f"--dt-divisor must be >= 1, got {cfg.dt_divisor}")
    try:
        lat = Lattice(cfg.modes, cfg.dz, cfg.c)
        parse_envelope(cfg.envelope, lat)
        parse_mask(cfg.mask, cfg.modes)
    except SpecSyntaxError as exc:
        raise UsageError(f"{exc} (offending token: {exc.token!r})") from None
    except FWMError as exc:
        raise UsageError(str(exc)) from None


def _summary(sim: SimConfig, traj) -> dict:
    s0, s1 = traj.initial, traj.final
    I = intensities(s1)
    d, o = sign_flip_metric(s1, s0)
    cr = conservation_check(traj)
    return {
        "kappa": sim.kappa,
        "steps": sim.steps,
        "angle": sim.kappa * sim.c * s1.t,
        "pump_fraction": float(np.sum(I.I_omega1) * sim.dz),
        "coincident_pump_weight": float(np.sum(np.abs(np.diagonal(s1.psi_omega)) ** 2) * sim.dz**2),
        "sign_flip_diagonal": d,
        "sign_flip_offdiagonal": o,
        "max_conservation_residual": cr.max_residual,
        "norm_drift": cr.norm_drift,
    }


def cmd_run(cfg: CliConfig) -> int:
    sim = cfg.sim_config()
    lat = sim.lattice
    traj = run(sim.initial_state(lat), sim.plan(), sim.snapshot_every)
    out = cfg.outdir
    io.write_diagonal_series(traj, out / "run_diagonal.csv")
    io.write_intensity_series(traj, out / "run_intensity.csv")
    io.write_grid(traj.final, out / "run_grid.csv")
    io.write_plot_script(out / "run.gp", "run", with_grid=True)
    summary = _summary(sim, traj)
    if cfg.oracle == "rk4":
        dt = lat.cell_time / cfg.dt_divisor
        res = integrate(ModeODESystem(lat, sim.kappa), to_modes(traj.initial), traj.final.t, dt)
        o = from_modes(res.modes)
        f = traj.final
        summary["rk4_l2_distance"] = float(np.sqrt(np.sum(np.abs(o.psi_omega - f.psi_omega) ** 2
                                                          + np.abs(o.psi_e - f.psi_e) ** 2)) * lat.dz)
        summary["rk4_norm_drift"] = res.norm_drift
    summary["conversion_length"] = analytic.conversion_length(sim.kappa)
    summary["full_cycle_length"] = analytic.full_cycle_length(sim.kappa)
    for k, v in summary.items():
        print(f"{k} = {v:.17g}" if isinstance(v, float) else f"{k} = {v}")
    print(f"wrote {out}")
    return EXIT_OK


SWEEP_HEADER = ["kappa", "steps", "angle", "pump_fraction", "coincident_pump_weight",
                "sign_flip_diagonal", "sign_flip_offdiagonal", "max_conservation_residual"]


def cmd_sweep(cfg: CliConfig) -> int:
    rows = []
    for kappa in cfg.kappas:
        sim = cfg.sim_config(kappa)
        traj = run(sim.initial_state(), sim.plan(), max(sim.steps, 1))
        s = _summary(sim, traj)
        rows.append([s[h] for h in SWEEP_HEADER])
        print(" ".join(f"{h}={s[h]:.6g}" for h in SWEEP_HEADER))
    io.write_rows(cfg.outdir / "sweep.csv", SWEEP_HEADER, rows)
    print(f"wrote {cfg.outdir / 'sweep.csv'}")
    return EXIT_OK


def cmd_validate(cfg: CliConfig) -> int:
    if cfg.list_only:
        for name in harness.list_scenarios():
            print(f"{name}: {harness.REGISTRY[name].description}")
        return EXIT_OK
    names = None if cfg.all else cfg.scenarios
    agg = harness.run_all(cfg.outdir if (cfg.all or cfg.scenarios) else None, names)
    sys.stdout.write(agg.text())
    return EXIT_OK if agg.passed else EXIT_FAIL


def cmd_params(cfg: CliConfig) -> int:
    params = analytic.PhysicalParams(**cfg.physical)
    print(analytic.worked_example(params))
    return EXIT_OK


COMMANDS = {"run": cmd_run, "validate": cmd_validate, "sweep": cmd_sweep, "params": cmd_params}


def main(argv=None) -> int:
    try:
        cfg = parse_args(argv)
        return COMMANDS[cfg.subcommand](cfg)
    except SystemExit as exc:  # argparse usage errors
        return EXIT_USAGE if exc.code else EXIT_OK
    except UsageError as exc:
        print(f"biphoton-fwm: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FWMError as exc:
        print(f"biphoton-fwm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"biphoton-fwm: I/O error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
