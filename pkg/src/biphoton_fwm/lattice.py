"""Periodic cell lattice, two-photon states and the 2D mode transforms.

Cells are indexed ``l = 0 .. M-1`` and cell ``l`` sits at ``z = l * dz``.
A two-photon state holds two ``M x M`` grids: ``psi_omega[l, l']`` is the
amplitude for the first pump photon in cell ``l`` and the second in ``l'``;
``psi_e`` is the same for the generated pair.  Normalization is

    sum_{l,l'} (|psi_omega|^2 + |psi_e|^2) * dz^2 = 1.

Mode coefficients follow ``psi(l, l') = sum_{k,k'} xi[k,k'] exp(2 pi i (k l + k' l') / M) / dz``
with ``xi = dz * fft2(psi, norm="ortho")`` stored in centered order, so that
``xi[0, 0]`` belongs to ``k = k' = -(M // 2)``.  With this scaling the sum of
``|xi|^2 + |eta|^2`` equals the position-space norm without extra factors.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput, InvalidLattice, InvalidParameter

NORM_TOL = 1e-12


def _frozen(a, dtype=complex):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Lattice:
    """Ring of ``M`` cells of length ``dz``; fields move at speed ``c``."""

    M: int
    dz: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 1:
            raise InvalidLattice(f"M must be a positive integer, got {self.M!r}")
        if not self.dz > 0:
            raise InvalidLattice(f"dz must be positive, got {self.dz!r}")
        if not self.c > 0:
            raise InvalidLattice(f"c must be positive, got {self.c!r}")
        object.__setattr__(self, "M", int(self.M))
        if self.M % 2 == 0:
            warnings.warn(
                f"even lattice size M={self.M}: mode range is -M/2..M/2-1",
                UserWarning,
                stacklevel=3,
            )

    @property
    def L(self) -> float:
        return self.M * self.dz

    @property
    def cell_time(self) -> float:
        """Time for the fields to advance one cell."""
        return self.dz / self.c

    @property
    def z(self) -> np.ndarray:
        return np.arange(self.M) * self.dz

    def mode_indices(self) -> np.ndarray:
        """Integer mode labels in storage order (``-N..N`` for odd ``M``)."""
        return mode_indices(self.M)


def mode_indices(M: int) -> np.ndarray:
    return np.fft.fftshift(np.fft.fftfreq(M, d=1.0 / M)).astype(int)


@dataclass(frozen=True)
class Envelope:
    lattice: Lattice
    f0: np.ndarray

    def __post_init__(self):
        f0 = _frozen(self.f0)
        if f0.shape != (self.lattice.M,):
            raise InvalidInput(
                f"envelope has shape {f0.shape}, lattice needs ({self.lattice.M},)"
            )
        object.__setattr__(self, "f0", f0)

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.f0) ** 2) * self.lattice.dz)

    def normalized(self) -> "Envelope":
        n = self.norm
        if n == 0:
            raise InvalidInput("cannot normalize an all-zero envelope")
        return Envelope(self.lattice, self.f0 / np.sqrt(n))


def periodic_distance(lattice: Lattice, center: float) -> np.ndarray:
    """Minimum-image distance (in cells) from every cell to ``center``."""
    d = np.abs(np.arange(lattice.M) - center) % lattice.M
    return np.minimum(d, lattice.M - d)


def make_gaussian_envelope(lattice: Lattice, center: float, width: float) -> Envelope:
    """Unit-norm periodic Gaussian, ``f0[l] ~ exp(-d(l, center)^2 / (2 width^2))``.

    ``center`` and ``width`` are in cells.  Amplitudes are evaluated in log
    space relative to the peak, so very narrow widths degrade to a point
    envelope instead of underflowing to zero.
    """
    if not lattice.M >= 1:
        raise InvalidLattice("empty lattice")
    if not width > 0:
        raise InvalidParameter(f"width must be positive, got {width!r}")
    if not 0 <= center < lattice.M:
        raise InvalidParameter(f"center must lie in [0, {lattice.M}), got {center!r}")
    d = periodic_distance(lattice, center)
    log_amp = -(d**2) / (2.0 * width**2)
    f0 = np.exp(log_amp - log_amp.max())
    return Envelope(lattice, f0.astype(complex)).normalized()


def make_point_envelope(lattice: Lattice, cell: int) -> Envelope:
    if int(cell) != cell or not 0 <= cell < lattice.M:
        raise InvalidParameter(f"cell must be an integer in [0, {lattice.M}), got {cell!r}")
    f0 = np.zeros(lattice.M, dtype=complex)
    f0[int(cell)] = 1.0 / np.sqrt(lattice.dz)
    return Envelope(lattice, f0)


@dataclass(frozen=True)
class TwoPhotonState:
    lattice: Lattice
    psi_omega: np.ndarray
    psi_e: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        M = self.lattice.M
        po, pe = _frozen(self.psi_omega), _frozen(self.psi_e)
        if po.shape != (M, M) or pe.shape != (M, M):
            raise InvalidInput(f"grids must be {M}x{M}, got {po.shape} and {pe.shape}")
        object.__setattr__(self, "psi_omega", po)
        object.__setattr__(self, "psi_e", pe)
        object.__setattr__(self, "t", float(self.t))

    @property
    def norm(self) -> float:
        dz2 = self.lattice.dz**2
        return float((np.sum(np.abs(self.psi_omega) ** 2) + np.sum(np.abs(self.psi_e) ** 2)) * dz2)

    def replace(self, psi_omega=None, psi_e=None, t=None) -> "TwoPhotonState":
        return TwoPhotonState(
            self.lattice,
            self.psi_omega if psi_omega is None else psi_omega,
            self.psi_e if psi_e is None else psi_e,
            self.t if t is None else t,
        )

    def normalized(self) -> "TwoPhotonState":
        n = self.norm
        if n == 0:
            raise InvalidInput("cannot normalize an all-zero state")
        s = 1.0 / np.sqrt(n)
        return self.replace(self.psi_omega * s, self.psi_e * s)

    def swapped(self) -> "TwoPhotonState":
        """Exchange the roles of the pump pair and the generated pair."""
        return self.replace(self.psi_e, self.psi_omega)


@dataclass(frozen=True)
class ModeCoefficients:
    lattice: Lattice
    xi: np.ndarray
    eta: np.ndarray
    t: float = field(default=0.0)

    def __post_init__(self):
        M = self.lattice.M
        xi, eta = _frozen(self.xi), _frozen(self.eta)
        if xi.shape != (M, M) or eta.shape != (M, M):
            raise InvalidInput(f"mode arrays must be {M}x{M}")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "eta", eta)

    @property
    def k(self) -> np.ndarray:
        return mode_indices(self.lattice.M)

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.xi) ** 2) + np.sum(np.abs(self.eta) ** 2))


def _same_lattice(a: Lattice, b: Lattice):
    if a != b:
        raise InvalidInput(f"lattice mismatch: {a} vs {b}")


def separable_input(e1: Envelope, e2: Envelope) -> TwoPhotonState:
    """Product state of two independent pump photons, generated fields empty."""
    _same_lattice(e1.lattice, e2.lattice)
    e1, e2 = e1.normalized(), e2.normalized()
    psi = np.outer(e1.f0, e2.f0)
    return TwoPhotonState(e1.lattice, psi, np.zeros_like(psi))


def diagonal_entangled_input(phi0: Envelope) -> TwoPhotonState:
    """Pump pair confined to coincident cells: ``psi_omega[l, l'] = delta_ll' phi0[l] / sqrt(dz)``."""
    lat = phi0.lattice
    if not np.any(phi0.f0):
        raise InvalidInput("zero envelope")
    f = phi0.normalized().f0
    psi = np.diag(f / np.sqrt(lat.dz))
    return TwoPhotonState(lat, psi, np.zeros_like(psi))


def _fwd(grid, dz):
    return np.fft.fftshift(np.fft.fft2(grid, norm="ortho") * dz)


def _inv(coef, dz):
    return np.fft.ifft2(np.fft.ifftshift(coef), norm="ortho") / dz


def to_modes(state: TwoPhotonState) -> ModeCoefficients:
    dz = state.lattice.dz
    return ModeCoefficients(state.lattice, _fwd(state.psi_omega, dz), _fwd(state.psi_e, dz), state.t)


def from_modes(modes: ModeCoefficients) -> TwoPhotonState:
    dz = modes.lattice.dz
    return TwoPhotonState(modes.lattice, _inv(modes.xi, dz), _inv(modes.eta, dz), modes.t)


def diagonal(grid: np.ndarray) -> np.ndarray:
    return np.diagonal(grid).copy()


def offdiagonal(grid: np.ndarray) -> np.ndarray:
    """Copy of ``grid`` with the coincident-cell diagonal zeroed."""
    out = np.array(grid, copy=True)
    np.fill_diagonal(out, 0)
    return out


def shift_grid(grid: np.ndarray, cells: int) -> np.ndarray:
    """Move both photons ``cells`` cells downstream (cyclic)."""
    return np.roll(grid, (cells, cells), axis=(0, 1))


def random_state(lattice: Lattice, rng: np.random.Generator, generated: bool = True) -> TwoPhotonState:
    """Normalized state with i.i.d. complex Gaussian amplitudes (for property tests)."""
    shape = (lattice.M, lattice.M)
    po = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    pe = rng.standard_normal(shape) + 1j * rng.standard_normal(shape) if generated else np.zeros(shape)
    return TwoPhotonState(lattice, po, pe).normalized()
