"""Angle conventions, wavevectors, excess delays and Snell-law checks.

Angle convention
----------------
``theta`` is measured from the STMM surface (the x axis), so ``theta = pi/2``
is perpendicular incidence. The in-plane direction cosines are
``cos(theta)*cos(phi)`` along x and ``cos(theta)*sin(phi)`` along y, and the
normal component is ``sin(theta)``. An incoming plane wave propagates along
``(cos(theta)cos(phi), cos(theta)sin(phi), -sin(theta))``; the back-reflected
wave travels the opposite way.

Time-harmonic fields are written as ``exp(j(2*pi*f*t - k.r))`` throughout, which
is the convention under which a temporal phase ``beta(t)`` shifts the carrier
by ``+beta'(t)/(2*pi)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .errors import DomainError

if TYPE_CHECKING:
    from .stmm import StmmConfig

SPEED_OF_LIGHT = 2.99792458e8  # m/s


def _cos(theta: float) -> float:
    c = float(np.cos(theta))
    return 0.0 if abs(c) < 1e-15 else c  # cos(pi/2) rounds to 6e-17


@dataclass(frozen=True)
class IncidenceGeometry:
    """Direction and carrier of the wave impinging on (and reflected by) the STMM.

    Incidence and reflection angles coincide (monostatic full duplex).
    """

    theta: float
    phi: float = 0.0
    carrier_freq: float = 30e9
    wavelength: float = field(init=False)

    def __post_init__(self):
        if not (0.0 < self.theta <= np.pi):
            raise DomainError(f"theta={self.theta} outside (0, pi]")
        if not (-np.pi / 2 < self.phi <= np.pi / 2):
            raise DomainError(f"phi={self.phi} outside (-pi/2, pi/2]")
        if not self.carrier_freq > 0:
            raise DomainError("carrier_freq must be positive")
        object.__setattr__(self, "wavelength", SPEED_OF_LIGHT / self.carrier_freq)

    @classmethod
    def from_degrees(cls, theta_deg: float, phi_deg: float = 0.0,
                     carrier_freq: float = 30e9) -> IncidenceGeometry:
        return cls(np.deg2rad(theta_deg), np.deg2rad(phi_deg), carrier_freq)

    @property
    def direction_cosines(self) -> tuple[float, float]:
        """In-plane direction cosines (x, y)."""
        c = _cos(self.theta)
        return c * np.cos(self.phi), c * np.sin(self.phi)

    @property
    def default_spacing(self) -> float:
        """STMM inter-element spacing, a quarter wavelength."""
        return self.wavelength / 4


@dataclass(frozen=True)
class Wavevector:
    kx: float
    ky: float
    kz: float

    def as_array(self) -> np.ndarray:
        return np.array([self.kx, self.ky, self.kz])

    @property
    def magnitude(self) -> float:
        return float(np.linalg.norm(self.as_array()))

    def __neg__(self) -> Wavevector:
        return Wavevector(-self.kx, -self.ky, -self.kz)


@dataclass(frozen=True)
class DelayMap:
    """Excess propagation delays across the STMM, referenced to element (0, 0).

    ``per_element[q, v] = q*delta_tau_x + v*delta_tau_y``; ``per_cluster[k]``
    is the delay of the geometric centre of cluster ``k`` (row-major over the
    K x K tile grid).
    """

    per_element: np.ndarray
    delta_tau_x: float
    delta_tau_y: float
    per_cluster: np.ndarray


def wavevector(f: float, theta: float, phi: float, incoming: bool = True) -> Wavevector:
    """Wavevector of magnitude ``2*pi*f/c`` for the direction ``(theta, phi)``.

    Incoming waves have a negative z component, outgoing (back-reflected) ones
    a positive z component and reversed in-plane components.
    """
    if not f > 0:
        raise DomainError("frequency must be positive")
    k = 2 * np.pi * f / SPEED_OF_LIGHT
    kx = k * _cos(theta) * np.cos(phi)
    ky = k * _cos(theta) * np.sin(phi)
    kz = -k * np.sin(theta)
    kin = Wavevector(kx, ky, kz)
    return kin if incoming else -kin


def snell_residual(k_i: Wavevector, k_o: Wavevector,
                   spatial_gradient: tuple[float, float]) -> tuple[float, float]:
    """Tangential mismatch of the universal Snell law.

    With the ``exp(j(wt - k.r))`` field convention a reflection phase with
    gradient ``g`` imposes ``k_o,t - k_i,t = -g``; the returned residual
    ``(k_o - k_i)_t + g`` is zero when the law is satisfied.
    """
    gx, gy = spatial_gradient
    return (k_o.kx - k_i.kx + gx, k_o.ky - k_i.ky + gy)


def frequency_shift(phase_rate):
    """Carrier shift in Hz produced by a temporal phase slope in rad/s."""
    return phase_rate / (2 * np.pi)


def _unit_delays(geom: IncidenceGeometry, spacing: float) -> tuple[float, float]:
    cx, cy = geom.direction_cosines
    return spacing * cx / SPEED_OF_LIGHT, spacing * cy / SPEED_OF_LIGHT


def excess_delay(q: int, v: int, geom: IncidenceGeometry, spacing: float | None = None) -> float:
    """Excess propagation delay of element ``(q, v)`` relative to element (0, 0)."""
    if spacing is None:
        spacing = geom.default_spacing
    if q < 0 or v < 0:
        raise DomainError(f"element indices must be non-negative, got ({q}, {v})")
    if not spacing > 0:
        raise DomainError("spacing must be positive")
    dx, dy = _unit_delays(geom, spacing)
    return q * dx + v * dy


def cluster_centers(m_ux: int, m_uy: int, kx: int, ky: int | None = None) -> np.ndarray:
    """Mean element indices of the ``kx`` x ``ky`` rectangular tiles.

    Returns shape ``(kx*ky, 2)``, row-major over the tile grid.
    """
    ky = kx if ky is None else ky
    sx, sy = m_ux // kx, m_uy // ky
    cq = np.arange(kx) * sx + (sx - 1) / 2
    cv = np.arange(ky) * sy + (sy - 1) / 2
    return np.array([(a, b) for a in cq for b in cv], dtype=float)


def build_delay_map(geom: IncidenceGeometry, config: StmmConfig) -> DelayMap:
    dx, dy = _unit_delays(geom, config.spacing_for(geom))
    q = np.arange(config.m_ux)[:, None]
    v = np.arange(config.m_uy)[None, :]
    per_element = q * dx + v * dy
    centers = cluster_centers(config.m_ux, config.m_uy, *config.cluster_grid)
    per_cluster = centers[:, 0] * dx + centers[:, 1] * dy
    return DelayMap(per_element, dx, dy, per_cluster)
