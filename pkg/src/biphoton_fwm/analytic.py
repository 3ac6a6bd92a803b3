"""Closed-form two-photon solutions and physical parameter conversions.

The conversion angle is passed explicitly as the accumulated in-medium path
times ``kappa``: ``kappa * c * t`` for a pulse launched inside a full-ring
medium, ``kappa * z`` (depth ``z``) for a pulse entering a finite medium.
When ``angle`` is omitted the boundary-value form ``kappa * z`` is used.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import InvalidParameter
from .lattice import Lattice, ModeCoefficients

Profile = Union[Callable[[np.ndarray], np.ndarray], np.ndarray]


def periodic_sampler(values, lattice: Lattice) -> Callable[[np.ndarray], np.ndarray]:
    """Callable ``f(z)`` reading ``values`` at cell-aligned positions on the ring."""
    values = np.asarray(values)

    def f(z):
        x = np.asarray(z, dtype=float) / lattice.dz
        idx = np.rint(x)
        if np.any(np.abs(x - idx) > 1e-9):
            raise InvalidParameter("lattice profile sampled off the cell grid")
        return values[idx.astype(int) % lattice.M]

    return f


def _angle(z, kappa, angle):
    return kappa * np.asarray(z, dtype=float) if angle is None else np.asarray(angle)


def diag_psi_omega(psi0: Callable, z, t, kappa: float, c: float = 1.0, angle=None):
    """Pump pair amplitude at coincident positions: ``psi0(z - ct) cos(angle)``."""
    z = np.asarray(z, dtype=float)
    return psi0(z - c * t) * np.cos(_angle(z, kappa, angle))


def diag_psi_e(psi0: Callable, z, t, kappa: float, c: float = 1.0, angle=None):
    """Generated pair amplitude: ``-i psi0(z - ct) sin(angle)``."""
    z = np.asarray(z, dtype=float)
    return -1j * psi0(z - c * t) * np.sin(_angle(z, kappa, angle))


def intensity_omega(psi0: Callable, z, t, kappa: float, c: float = 1.0, angle=None):
    """Pump and generated intensities ``(psi0 cos^2, psi0 sin^2)`` of the conversion law."""
    z = np.asarray(z, dtype=float)
    a = _angle(z, kappa, angle)
    p = psi0(z - c * t)
    return p * np.cos(a) ** 2, p * np.sin(a) ** 2


def separable_intensity(f0, shift: int, angle: float, dz: float = 1.0) -> np.ndarray:
    """Exact lattice pump intensity for a separable identical-envelope input.

    Only the coincident cell converts, so
    ``I(l) = |f|^2 (1 - |f|^2 dz sin^2(angle))`` with ``f = f0`` moved by
    ``shift`` cells.
    """
    p = np.abs(np.roll(np.asarray(f0), shift)) ** 2
    return p * (1.0 - p * dz * np.sin(angle) ** 2)


def full_cycle_matrix(M: int) -> np.ndarray:
    """Reflection ``1 - 2P`` on flattened ``M x M`` mode arrays (centered order)."""
    k = np.fft.fftshift(np.fft.fftfreq(M, d=1.0 / M)).astype(int)
    s = ((k[:, None] + k[None, :]) % M).ravel()
    P = (s[:, None] == s[None, :]) / M
    return np.eye(M * M) - 2 * P


def _mix(a: np.ndarray) -> np.ndarray:
    M = a.shape[0]
    k = np.fft.fftshift(np.fft.fftfreq(M, d=1.0 / M)).astype(int)
    s = (k[:, None] + k[None, :]) % M
    sums = np.zeros(M, dtype=complex)
    np.add.at(sums, s, a)
    return a - (2.0 / M) * sums[s]


def xi_after_full_cycle(xi0: ModeCoefficients) -> ModeCoefficients:
    """Mode coefficients after one full conversion cycle, in the co-moving frame.

    ``xi_kk' -> xi_kk' - (2/M) sum_{m+n = k+k' (mod M)} xi_mn``; the same map
    applies to the generated-pair coefficients.
    """
    return ModeCoefficients(xi0.lattice, _mix(xi0.xi), _mix(xi0.eta), xi0.t)


def comoving_phases(lattice: Lattice, cells: int) -> np.ndarray:
    """Mode-space factor that advects a pair by ``cells`` whole cells."""
    k = np.fft.fftshift(np.fft.fftfreq(lattice.M, d=1.0 / lattice.M))
    total = k[:, None] + k[None, :]
    return np.exp(-2j * np.pi * total * cells / lattice.M)


def soliton_superposition(state, angle) -> np.ndarray:
    """Coincident-cell profile ``cos(angle) psi_omega + i sin(angle) psi_e``.

    ``angle`` may be a scalar or one value per cell.
    """
    a = np.asarray(angle)
    return np.cos(a) * np.diagonal(state.psi_omega) + 1j * np.sin(a) * np.diagonal(state.psi_e)


def soliton_complement(state, angle) -> np.ndarray:
    """Orthogonal combination ``sin(angle) psi_omega - i cos(angle) psi_e``; zero on a soliton."""
    a = np.asarray(angle)
    return np.sin(a) * np.diagonal(state.psi_omega) - 1j * np.cos(a) * np.diagonal(state.psi_e)


@dataclass(frozen=True)
class PhysicalParams:
    """Atomic-medium inputs in SI units.

    ``gamma`` and ``Delta`` must share frequency units; only their ratio
    enters ``kappa``.
    """

    N_density: float
    wavelength: float
    gamma: float
    Delta: float

    def __post_init__(self):
        for name in ("N_density", "wavelength", "gamma"):
            if not getattr(self, name) > 0:
                raise InvalidParameter(f"{name} must be positive")
        if self.Delta == 0 or not math.isfinite(self.Delta):
            raise InvalidParameter("Delta must be finite and non-zero")

    @property
    def g(self) -> float:
        return 3 * self.N_density * self.wavelength**2 * self.gamma / (8 * math.pi)

    @property
    def kappa(self) -> float:
        return self.g / self.Delta


def derive_kappa(params: PhysicalParams) -> float:
    return params.kappa


def conversion_length(kappa: float) -> float:
    """First zero of ``cos^2(kappa z)``: complete pump-to-generated transfer."""
    return math.pi / (2 * abs(kappa))


def full_cycle_length(kappa: float) -> float:
    """Pump -> generated -> pump; the coincident amplitude has flipped sign."""
    return math.pi / abs(kappa)


def full_cycle_time(kappa: float, c: float = 1.0) -> float:
    return math.pi / (abs(kappa) * c)


def worked_example(params: PhysicalParams) -> str:
    """Human-readable derivation of ``g``, ``kappa`` and the two lengths."""
    p = params
    lines = [
        f"N      = {p.N_density:.6g} m^-3",
        f"lambda = {p.wavelength:.6g} m",
        f"gamma  = {p.gamma:.6g} s^-1",
        f"Delta  = {p.Delta:.6g} s^-1",
        f"g      = 3 N lambda^2 gamma / (8 pi)"
        f" = 3 * {p.N_density:.6g} * {p.wavelength:.6g}^2 * {p.gamma:.6g} / {8 * math.pi:.6g}"
        f" = {p.g:.6g} m^-1 s^-1",
        f"kappa  = g / Delta = {p.g:.6g} / {p.Delta:.6g} = {p.kappa:.6g} m^-1",
        f"pi/(2 kappa) = {conversion_length(p.kappa):.6g} m   (complete conversion, cos^2 zero)",
        f"pi/kappa     = {full_cycle_length(p.kappa):.6g} m   (full cycle, coincident sign flip)",
    ]
    return "\n".join(lines)
