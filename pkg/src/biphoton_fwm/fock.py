"""Brute-force many-body reference on a truncated Fock space.

Four bosonic species (pump 1, pump 2, generated 1, generated 2) live on the
cells of a small ring, with unit-commutator cell operators.  The basis is the
set of occupation patterns with fixed photon numbers ``N1 = n_om1 + n_e1``
and ``N2 = n_om2 + n_e2`` summed over cells; both are conserved by the
interaction and by transport, so the sector is closed.

The interaction is built operator by operator, including the saturating
denominator ``1 / (n_om1 + n_e1)`` taken as a pseudoinverse (zero on the
kernel), so neither sector closure nor the reduction to the two-photon
equations is assumed.
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import CapacityExceeded, ConstructionBug, InvalidInput, InvalidParameter
from .lattice import Lattice, TwoPhotonState, mode_indices
from .propagator import MediumMask, run

OM1, OM2, E1, E2 = range(4)
SPECIES = ("omega1", "omega2", "e1", "e2")
MAX_CELLS = 5
MAX_PHOTONS = 4
MAX_DIM = 10_000
HERMITIAN_TOL = 1e-14


@dataclass(frozen=True)
class FockBasis:
    M_cells: int
    n1: int = 1
    n2: int = 1
    states: tuple = field(init=False, repr=False)
    index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 1 <= self.M_cells <= MAX_CELLS:
            raise CapacityExceeded(f"M_cells={self.M_cells} outside 1..{MAX_CELLS}")
        if self.n1 < 0 or self.n2 < 0 or self.n1 + self.n2 > MAX_PHOTONS:
            raise CapacityExceeded(f"photon numbers ({self.n1}, {self.n2}) exceed total {MAX_PHOTONS}")
        M = self.M_cells
        dim = math.comb(2 * M + self.n1 - 1, self.n1) * math.comb(2 * M + self.n2 - 1, self.n2)
        if dim > MAX_DIM:
            raise CapacityExceeded(f"basis dimension {dim} > {MAX_DIM}")
        modes1 = [self.mode(OM1, l) for l in range(M)] + [self.mode(E1, l) for l in range(M)]
        modes2 = [self.mode(OM2, l) for l in range(M)] + [self.mode(E2, l) for l in range(M)]
        states = []
        for c1 in itertools.combinations_with_replacement(modes1, self.n1):
            for c2 in itertools.combinations_with_replacement(modes2, self.n2):
                occ = [0] * (4 * M)
                for m in c1 + c2:
                    occ[m] += 1
                states.append(tuple(occ))
        states.sort()
        object.__setattr__(self, "states", tuple(states))
        object.__setattr__(self, "index", {s: i for i, s in enumerate(states)})

    def mode(self, species: int, cell: int) -> int:
        return species * self.M_cells + cell

    @property
    def dim(self) -> int:
        return len(self.states)

    def occupation(self, species: int, cell: int) -> np.ndarray:
        m = self.mode(species, cell)
        return np.array([s[m] for s in self.states], dtype=float)

    def pair_state(self, sp1: int, l1: int, sp2: int, l2: int) -> int:
        occ = [0] * (4 * self.M_cells)
        occ[self.mode(sp1, l1)] += 1
        occ[self.mode(sp2, l2)] += 1
        return self.index[tuple(occ)]


def _apply(occ: tuple, ops):
    """Apply ``ops = [(mode, creation), ...]`` right to left; ``None`` if annihilated."""
    occ = list(occ)
    amp = 1.0
    for m, create in reversed(ops):
        if create:
            occ[m] += 1
            amp *= math.sqrt(occ[m])
        else:
            if occ[m] == 0:
                return None
            amp *= math.sqrt(occ[m])
            occ[m] -= 1
    return tuple(occ), amp


@dataclass(frozen=True)
class HamiltonianMatrix:
    basis: FockBasis
    matrix: np.ndarray

    def __post_init__(self):
        err = hermiticity_error(self.matrix)
        if err > HERMITIAN_TOL:
            raise ConstructionBug(f"hamiltonian not hermitian: ||H - H^+|| = {err:.3g}")

    def __add__(self, other: "HamiltonianMatrix") -> "HamiltonianMatrix":
        if other.basis != self.basis:
            raise InvalidInput("hamiltonians on different bases")
        return HamiltonianMatrix(self.basis, self.matrix + other.matrix)


def hermiticity_error(H: np.ndarray) -> float:
    return float(np.abs(H - H.conj().T).max()) if H.size else 0.0


def _operator(basis: FockBasis, terms) -> np.ndarray:
    """Dense matrix of ``sum coeff * ops`` with ops as in :func:`_apply`."""
    out = np.zeros((basis.dim, basis.dim), dtype=complex)
    for j, occ in enumerate(basis.states):
        for coeff, ops in terms:
            r = _apply(occ, ops)
            if r is None:
                continue
            new, amp = r
            i = basis.index.get(new)
            if i is None:
                raise ConstructionBug(f"operator left the sector: {new}")
            out[i, j] += coeff * amp
    return out


def pair_exchange(basis: FockBasis, cell: int) -> np.ndarray:
    """``A_l + A_l^+`` with ``A_l = b+_om1 b+_om2 b_e1 b_e2`` at one cell."""
    m = basis.mode
    A = [(m(OM1, cell), True), (m(OM2, cell), True), (m(E1, cell), False), (m(E2, cell), False)]
    Ad = [(m(E1, cell), True), (m(E2, cell), True), (m(OM1, cell), False), (m(OM2, cell), False)]
    return _operator(basis, [(1.0, A), (1.0, Ad)])


def saturation_denominator(basis: FockBasis, cell: int) -> np.ndarray:
    """Diagonal of ``n_om1 + n_e1`` at one cell."""
    return basis.occupation(OM1, cell) + basis.occupation(E1, cell)


def saturation_inverse(basis: FockBasis, cell: int) -> np.ndarray:
    """Diagonal of the Moore-Penrose inverse of the cell denominator."""
    n = saturation_denominator(basis, cell)
    return np.divide(1.0, n, out=np.zeros_like(n), where=n > 0)


def build_interaction(basis: FockBasis, kappa: float, c: float = 1.0,
                      mask: Optional[MediumMask] = None) -> HamiltonianMatrix:
    """``H = kappa c sum_l (A_l + A_l^+) Lambda_l`` over the active cells (hbar = 1)."""
    M = basis.M_cells
    active = np.ones(M, bool) if mask is None else mask.active
    if active.size != M:
        raise InvalidParameter("mask size does not match basis")
    H = np.zeros((basis.dim, basis.dim), dtype=complex)
    for l in np.flatnonzero(active):
        H += kappa * c * pair_exchange(basis, l) * saturation_inverse(basis, l)[None, :]
    return HamiltonianMatrix(basis, H)


def one_body_hopping(lattice: Lattice) -> np.ndarray:
    """Cell-space matrix ``h = U diag(omega_k) U^+`` of the free propagation."""
    M = lattice.M
    k = mode_indices(M)
    U = np.exp(2j * np.pi * np.outer(np.arange(M), k) / M) / np.sqrt(M)
    omega = 2 * np.pi * k * lattice.c / lattice.L
    h = (U * omega) @ U.conj().T
    return 0.5 * (h + h.conj().T)


def build_kinetic(basis: FockBasis, lattice: Lattice) -> HamiltonianMatrix:
    """Free propagation ``sum_species sum_{l,l'} h_ll' b+_l b_l'``."""
    if lattice.M != basis.M_cells:
        raise InvalidParameter("lattice size does not match basis")
    h = one_body_hopping(lattice)
    terms = []
    for sp in range(4):
        for l in range(lattice.M):
            for lp in range(lattice.M):
                if h[l, lp] != 0:
                    terms.append((h[l, lp], [(basis.mode(sp, l), True), (basis.mode(sp, lp), False)]))
    return HamiltonianMatrix(basis, _operator(basis, terms))


def propagator_matrix(H: HamiltonianMatrix, t: float) -> np.ndarray:
    """``exp(-i H t)`` via hermitian eigendecomposition."""
    w, V = scipy.linalg.eigh(H.matrix)
    return (V * np.exp(-1j * w * t)) @ V.conj().T


def evolve_exact(H: HamiltonianMatrix, state0: np.ndarray, t: float) -> np.ndarray:
    if not isinstance(H, HamiltonianMatrix):
        H = np.asarray(H)
        if hermiticity_error(H) > HERMITIAN_TOL:
            raise InvalidInput("evolve_exact needs a hermitian matrix")
        H = HamiltonianMatrix(None, H)
    state0 = np.asarray(state0, dtype=complex)
    if t == 0:
        return state0.copy()
    return propagator_matrix(H, t) @ state0


def grids_to_fock(state: TwoPhotonState, basis: FockBasis) -> np.ndarray:
    """Embed a two-photon lattice state (``n1 = n2 = 1``) into the Fock basis."""
    if (basis.n1, basis.n2) != (1, 1) or basis.M_cells != state.lattice.M:
        raise InvalidInput("two-photon embedding needs a (1, 1) basis of matching size")
    dz = state.lattice.dz
    v = np.zeros(basis.dim, dtype=complex)
    M = basis.M_cells
    for l in range(M):
        for lp in range(M):
            v[basis.pair_state(OM1, l, OM2, lp)] = state.psi_omega[l, lp] * dz
            v[basis.pair_state(E1, l, E2, lp)] = state.psi_e[l, lp] * dz
    return v


def fock_to_grids(v: np.ndarray, basis: FockBasis, lattice: Lattice):
    """Return ``(psi_omega, psi_e, mixed)`` where ``mixed`` holds the pump/generated cross amplitudes."""
    M = basis.M_cells
    dz = lattice.dz
    po = np.zeros((M, M), complex)
    pe = np.zeros((M, M), complex)
    mixed = np.zeros((2, M, M), complex)
    for l in range(M):
        for lp in range(M):
            po[l, lp] = v[basis.pair_state(OM1, l, OM2, lp)] / dz
            pe[l, lp] = v[basis.pair_state(E1, l, E2, lp)] / dz
            mixed[0, l, lp] = v[basis.pair_state(OM1, l, E2, lp)]
            mixed[1, l, lp] = v[basis.pair_state(E1, l, OM2, lp)]
    return po, pe, mixed


def lambda_identity_residual(basis: FockBasis, v: np.ndarray, exchanges=None) -> float:
    """``max_l ||(A_l + A_l^+)(Lambda_l - 1) v||``: how far ``Lambda`` is from identity where it matters."""
    worst = 0.0
    for l in range(basis.M_cells):
        X = pair_exchange(basis, l) if exchanges is None else exchanges[l]
        w = (saturation_inverse(basis, l) - 1.0) * v
        worst = max(worst, float(np.linalg.norm(X @ w)))
    return worst


def ordering_commutator(basis: FockBasis, cell: int) -> float:
    """``||[A_l + A_l^+, n_om1 + n_e1]||`` (max entry)."""
    X = pair_exchange(basis, cell)
    n = saturation_denominator(basis, cell)
    return float(np.abs(X * n[None, :] - n[:, None] * X).max())


def cell_expectations(basis: FockBasis, v: np.ndarray, exchanges=None) -> np.ndarray:
    """Per-cell expectations of the four transported quantities, shape ``(4, M)``."""
    M = basis.M_cells
    p = np.abs(v) ** 2
    out = np.zeros((4, M))
    for l in range(M):
        n = [basis.occupation(sp, l) for sp in range(4)]
        X = pair_exchange(basis, l) if exchanges is None else exchanges[l]
        out[0, l] = p @ (n[OM1] + n[E1])
        out[1, l] = p @ (n[OM2] + n[E2])
        out[2, l] = p @ (n[OM1] - n[OM2])
        out[3, l] = float(np.real(np.vdot(v, X @ v)))
    return out


@dataclass
class CrosscheckReport:
    M: int
    kappa: float
    steps: int
    max_deviation: float
    max_leakage: float
    lambda_residual: float
    conservation_residual: float
    norm_drift: float
    runtime: float
    tolerances: dict
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def checks(self):
        """``(name, measured, tolerance)`` triples."""
        tol = self.tolerances
        return [
            ("fock_max_deviation", self.max_deviation, tol["fock_deviation"]),
            ("fock_mixed_leakage", self.max_leakage, tol["fock_leakage"]),
            ("fock_lambda_identity", self.lambda_residual, tol["fock_lambda"]),
            ("fock_conservation_transport", self.conservation_residual, 1e-10),
            ("fock_norm_drift", self.norm_drift, 1e-12),
        ]


def crosscheck(config) -> CrosscheckReport:
    """Run the Fock reference and the split-step propagator side by side.

    Each step is ``exp(-i H_int dt) exp(-i H_kin dt)`` with ``dt = dz / c``,
    the same shift-then-convert order as the propagator; ``exp(-i H_kin dt)``
    is the exact one-cell translation of the lattice.
    """
    t0 = time.perf_counter()
    lat = config.lattice
    mask = config.make_mask()
    basis = FockBasis(lat.M, 1, 1)
    H_kin = build_kinetic(basis, lat)
    H_int = build_interaction(basis, config.kappa, lat.c, mask)
    dt = lat.cell_time
    U = propagator_matrix(H_int, dt) @ propagator_matrix(H_kin, dt)
    exchanges = [pair_exchange(basis, l) for l in range(lat.M)]

    state0 = config.initial_state(lat)
    traj = run(state0, config.plan(), snapshot_every=1)
    v = grids_to_fock(state0, basis)
    norm0 = np.vdot(v, v).real

    dev = leak = lam = cons = drift = 0.0
    q_prev = cell_expectations(basis, v, exchanges)
    for n in range(config.steps + 1):
        if n > 0:
            v = U @ v
            q = cell_expectations(basis, v, exchanges)
            cons = max(cons, float(np.abs(q - np.roll(q_prev, 1, axis=1)).max()))
            q_prev = q
        po, pe, mixed = fock_to_grids(v, basis, lat)
        ref = traj[n]
        dev = max(dev, float(np.abs(po - ref.psi_omega).max()), float(np.abs(pe - ref.psi_e).max()))
        leak = max(leak, float(np.abs(mixed).max()))
        lam = max(lam, lambda_identity_residual(basis, v, exchanges))
        drift = max(drift, abs(np.vdot(v, v).real - norm0))

    tol = dict(config.tolerances)
    report = CrosscheckReport(lat.M, config.kappa, config.steps, dev, leak, lam, cons, drift,
                              time.perf_counter() - t0, tol)
    report.failures = [name for name, val, t in report.checks() if not val < t]
    return report
