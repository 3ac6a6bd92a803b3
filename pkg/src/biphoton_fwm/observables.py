"""Intensities, transported conserved quantities and sign-flip diagnostics."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .analytic import comoving_phases, xi_after_full_cycle
from .lattice import ModeCoefficients, TwoPhotonState, offdiagonal, shift_grid

QUANTITY_NAMES = ("pump1_plus_gen1", "pump2_plus_gen2", "pump1_minus_pump2", "relative_phase")


@dataclass(frozen=True)
class IntensityProfile:
    I_omega1: np.ndarray
    I_omega2: np.ndarray
    I_e1: np.ndarray
    I_e2: np.ndarray
    dz: float = 1.0

    def as_rows(self):
        return np.column_stack([self.I_omega1, self.I_omega2, self.I_e1, self.I_e2])

    @property
    def photon1_number(self) -> float:
        return float(np.sum(self.I_omega1 + self.I_e1) * self.dz)


def intensities(state: TwoPhotonState) -> IntensityProfile:
    """Single-photon marginals of the two pair amplitudes."""
    dz = state.lattice.dz
    po = np.abs(state.psi_omega) ** 2
    pe = np.abs(state.psi_e) ** 2
    return IntensityProfile(
        po.sum(axis=1) * dz, po.sum(axis=0) * dz,
        pe.sum(axis=1) * dz, pe.sum(axis=0) * dz, dz,
    )


def conserved_quantities(state: TwoPhotonState) -> np.ndarray:
    """Per-cell densities of the four transported quantities, shape ``(4, M)``.

    The relative-phase quantity is the expectation of
    ``Om1^+ Om2^+ E1 E2 + h.c.`` at one point.  All four field operators sit at
    the same position, so in the two-photon sector only the coincident
    amplitudes contribute: ``2 Re[conj(psi_omega(l, l)) psi_e(l, l)]``.
    """
    I = intensities(state)
    d_om = np.diagonal(state.psi_omega)
    d_e = np.diagonal(state.psi_e)
    return np.stack([
        I.I_omega1 + I.I_e1,
        I.I_omega2 + I.I_e2,
        I.I_omega1 - I.I_omega2,
        2.0 * np.real(np.conj(d_om) * d_e),
    ])


@dataclass
class ConservationReport:
    residuals: dict = field(default_factory=dict)
    norm_drift: float = 0.0
    relative_phase_trace: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)


def _cells_between(a: TwoPhotonState, b: TwoPhotonState) -> int:
    return int(round((b.t - a.t) / a.lattice.cell_time))


def conservation_check(traj) -> ConservationReport:
    """Worst-cell transport residual ``|Q(l, t2) - Q(l - n, t1)|`` for each quantity.

    ``traj`` may be any iterable of states; it is consumed once, so a
    streaming :func:`~biphoton_fwm.propagator.iterate` works without storing
    snapshots.
    """
    res = np.zeros(4)
    drift = 0.0
    trace = []
    prev = prev_q = first = None
    for s in traj:
        q = conserved_quantities(s)
        trace.append(q[3].sum() * s.lattice.dz)
        if first is None:
            first = s
        drift = max(drift, abs(s.norm - first.norm))
        if prev is not None:
            n = _cells_between(prev, s)
            res = np.maximum(res, np.abs(q - np.roll(prev_q, n, axis=1)).max(axis=1))
        prev, prev_q = s, q
    return ConservationReport(
        dict(zip(QUANTITY_NAMES, map(float, res))), float(drift), np.array(trace)
    )


def diagonal_slice(state: TwoPhotonState):
    return np.diagonal(state.psi_omega).copy(), np.diagonal(state.psi_e).copy()


def _rel(num, den):
    return num / den if den > 0 else num


def sign_flip_metric(state: TwoPhotonState, reference: TwoPhotonState, shift: int = None):
    """``(diagonal, off-diagonal)`` distances of ``state`` from a flipped ``reference``.

    The first entry is ``||diag(psi) + diag(ref)|| / ||diag(ref)||`` (zero for a
    sign flip), the second ``||offdiag(psi) - offdiag(ref)|| / ||offdiag(ref)||``
    (zero for pure transport).  ``reference`` is first advected by
    ``shift`` cells, inferred from the elapsed time when omitted.  A zero
    reference norm makes the entry an absolute distance.
    """
    if shift is None:
        shift = _cells_between(reference, state)
    ref = shift_grid(reference.psi_omega, shift)
    d_ref = np.diagonal(ref)
    d_psi = np.diagonal(state.psi_omega)
    o_ref = offdiagonal(ref)
    o_psi = offdiagonal(state.psi_omega)
    diag_metric = _rel(np.linalg.norm(d_psi + d_ref), np.linalg.norm(d_ref))
    off_metric = _rel(np.linalg.norm(o_psi - o_ref), np.linalg.norm(o_ref))
    return float(diag_metric), float(off_metric)


def xicondition_residual(xi_t0: ModeCoefficients, xi_tau: ModeCoefficients, shift: int = None,
                         mixing: bool = True) -> float:
    """Largest deviation of ``xi_tau`` from the full-cycle mode-mixing map of ``xi_t0``.

    The map is stated in the co-moving frame; the prediction is advected by
    ``shift`` cells (inferred from the times when omitted) before comparison.
    With ``mixing=False`` the map is replaced by the identity.
    """
    lat = xi_t0.lattice
    if shift is None:
        shift = int(round((xi_tau.t - xi_t0.t) / lat.cell_time))
    pred = xi_after_full_cycle(xi_t0) if mixing else xi_t0
    ph = comoving_phases(lat, shift)
    return float(max(
        np.abs(xi_tau.xi - ph * pred.xi).max(),
        np.abs(xi_tau.eta - ph * pred.eta).max(),
    ))
