"""Whole-cell split-step propagator.

One step advects both photons by exactly one cell (``dt = dz / c``) and then
rotates the coincident-cell amplitudes ``(psi_omega[l, l], psi_e[l, l])`` by
``theta = kappa * c * dt`` in every active cell of the medium.  Off-diagonal
amplitudes are only advected.  Shift and rotation commute for a full-ring
medium; with a partial medium the shift-then-rotate order means a pair is
rotated once per active cell it arrives in.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

from .errors import InvalidParameter, NumericFault, UnsupportedStep
from .lattice import Lattice, TwoPhotonState

_DT_RTOL = 1e-12


@dataclass(frozen=True)
class MediumMask:
    active: np.ndarray

    def __post_init__(self):
        a = np.array(self.active, dtype=bool, copy=True)
        if a.ndim != 1 or a.size < 1:
            raise InvalidParameter("mask must be a non-empty 1D boolean array")
        a.setflags(write=False)
        object.__setattr__(self, "active", a)

    @classmethod
    def full(cls, M: int) -> "MediumMask":
        return cls(np.ones(M, dtype=bool))

    @classmethod
    def empty(cls, M: int) -> "MediumMask":
        return cls(np.zeros(M, dtype=bool))

    @classmethod
    def window(cls, M: int, start: int, end: int) -> "MediumMask":
        """Medium occupying cells ``start <= l < end``."""
        if not (0 <= start < end <= M):
            raise InvalidParameter(f"window [{start}, {end}) does not fit in {M} cells")
        a = np.zeros(M, dtype=bool)
        a[start:end] = True
        return cls(a)

    @property
    def M(self) -> int:
        return self.active.size

    @property
    def is_full(self) -> bool:
        return bool(self.active.all())

    def bounds(self) -> Optional[tuple]:
        """``(start, end)`` of a single contiguous window, else ``None``."""
        idx = np.flatnonzero(self.active)
        if idx.size == 0 or idx[-1] - idx[0] + 1 != idx.size:
            return None
        return int(idx[0]), int(idx[-1]) + 1


@dataclass(frozen=True)
class StepPlan:
    kappa: float
    n_steps: int = 0
    mask: Optional[MediumMask] = None
    dt: Optional[float] = None

    def __post_init__(self):
        if int(self.n_steps) != self.n_steps or self.n_steps < 0:
            raise InvalidParameter(f"n_steps must be a non-negative integer, got {self.n_steps!r}")
        object.__setattr__(self, "n_steps", int(self.n_steps))

    def resolve(self, lattice: Lattice) -> tuple:
        """Return ``(dt, active)`` for ``lattice``; rejects sub-cell steps."""
        dt = lattice.cell_time if self.dt is None else float(self.dt)
        if abs(dt - lattice.cell_time) > _DT_RTOL * lattice.cell_time:
            raise UnsupportedStep(
                f"dt={dt!r} is not a whole-cell step (dz/c = {lattice.cell_time!r})"
            )
        mask = MediumMask.full(lattice.M) if self.mask is None else self.mask
        if mask.M != lattice.M:
            raise InvalidParameter(f"mask has {mask.M} cells, lattice has {lattice.M}")
        return dt, mask.active


@dataclass
class Trajectory:
    snapshots: list = field(default_factory=list)
    steps: list = field(default_factory=list)

    def __len__(self):
        return len(self.snapshots)

    def __iter__(self) -> Iterator[TwoPhotonState]:
        return iter(self.snapshots)

    def __getitem__(self, i) -> TwoPhotonState:
        return self.snapshots[i]

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    @property
    def initial(self) -> TwoPhotonState:
        return self.snapshots[0]

    @property
    def final(self) -> TwoPhotonState:
        return self.snapshots[-1]


def _advance(po, pe, active_idx, c_th, s_th):
    po = np.roll(po, (1, 1), axis=(0, 1))
    pe = np.roll(pe, (1, 1), axis=(0, 1))
    a = po[active_idx, active_idx]
    b = pe[active_idx, active_idx]
    po[active_idx, active_idx] = c_th * a - 1j * s_th * b
    pe[active_idx, active_idx] = -1j * s_th * a + c_th * b
    return po, pe


def _check_finite(po, pe):
    if not (np.isfinite(po).all() and np.isfinite(pe).all()):
        raise NumericFault("non-finite amplitude in state")


def step(state: TwoPhotonState, plan: StepPlan) -> TwoPhotonState:
    """Advance ``state`` by one cell; ``plan.n_steps`` is ignored."""
    lat = state.lattice
    dt, active = plan.resolve(lat)
    _check_finite(state.psi_omega, state.psi_e)
    theta = plan.kappa * lat.c * dt
    po, pe = _advance(
        np.array(state.psi_omega), np.array(state.psi_e),
        np.flatnonzero(active), np.cos(theta), np.sin(theta),
    )
    return TwoPhotonState(lat, po, pe, state.t + dt)


def iterate(state: TwoPhotonState, plan: StepPlan) -> Iterator[TwoPhotonState]:
    """Yield the initial state and then the state after every step."""
    lat = state.lattice
    dt, active = plan.resolve(lat)
    _check_finite(state.psi_omega, state.psi_e)
    theta = plan.kappa * lat.c * dt
    c_th, s_th = np.cos(theta), np.sin(theta)
    idx = np.flatnonzero(active)
    yield state
    po, pe = np.array(state.psi_omega), np.array(state.psi_e)
    for n in range(1, plan.n_steps + 1):
        po, pe = _advance(po, pe, idx, c_th, s_th)
        yield TwoPhotonState(lat, po, pe, state.t + n * dt)


def run(state: TwoPhotonState, plan: StepPlan, snapshot_every: int = 1) -> Trajectory:
    """Apply ``plan.n_steps`` steps, keeping every ``snapshot_every``-th state.

    The initial and final states are always included.
    """
    if int(snapshot_every) != snapshot_every or snapshot_every < 1:
        raise InvalidParameter(f"snapshot_every must be >= 1, got {snapshot_every!r}")
    traj = Trajectory()
    for n, s in enumerate(iterate(state, plan)):
        if n % snapshot_every == 0 or n == plan.n_steps:
            if n:
                _check_finite(s.psi_omega, s.psi_e)
            traj.snapshots.append(s)
            traj.steps.append(n)
    return traj


def evolve(state: TwoPhotonState, plan: StepPlan) -> TwoPhotonState:
    """Final state after ``plan.n_steps`` steps, without keeping snapshots."""
    return run(state, plan, snapshot_every=max(plan.n_steps, 1)).final


def rotation_angle_accumulated(
    mask: MediumMask, entry_cell: int, steps: int, kappa: float = 1.0, dz: float = 1.0
) -> float:
    """Conversion angle picked up by a coincident pair starting in ``entry_cell``.

    The pair visits cells ``entry_cell + 1, ..., entry_cell + steps`` (mod M)
    and is rotated by ``kappa * dz`` in each active one.
    """
    if steps < 0:
        raise InvalidParameter(f"steps must be >= 0, got {steps!r}")
    M = mask.M
    laps, rest = divmod(int(steps), M)
    visited = (int(entry_cell) + 1 + np.arange(rest)) % M
    n_active = laps * int(mask.active.sum()) + int(mask.active[visited].sum())
    return kappa * dz * n_active


def accumulated_angles(mask: MediumMask, steps: int, kappa: float = 1.0, dz: float = 1.0) -> np.ndarray:
    """Angle carried by the pair sitting in each cell after ``steps`` steps."""
    M = mask.M
    return np.array([
        rotation_angle_accumulated(mask, (l - steps) % M, steps, kappa, dz) for l in range(M)
    ])


def window_depth(mask: MediumMask, cells: Sequence[int], dz: float = 1.0) -> np.ndarray:
    """In-medium depth of the exit face of each cell of a window medium."""
    b = mask.bounds()
    if b is None:
        raise InvalidParameter("mask is not a single contiguous window")
    start, end = b
    cells = np.asarray(cells)
    return np.clip(cells - start + 1, 0, end - start) * dz
