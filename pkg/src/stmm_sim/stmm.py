"""STMM configuration, reflection coefficients and the coupled uplink channel.

The back-reflected signal sees a multiplicative channel

    h_u(t) = alpha * sum_{q,v} exp(-j[geo_{q,v} - phi_{q,v} - gamma(t - dtau_{q,v})])

where ``geo_{q,v}`` is the round-trip carrier phase of element ``(q, v)``
relative to element (0, 0). When ``gamma`` varies on the scale of the excess
delays the element phasors no longer add coherently (space-time coupling).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import ConfigError, DomainError
from .units import to_db
from .geometry import DelayMap, IncidenceGeometry, build_delay_map
from .waveform import (CpfskSampler, ModulationConfig, PhaseSignal,
                       hold_uniform, interp_uniform)

DEFAULT_Q_EXPONENT = 0.285

# Upper bound on the number of complex values materialised at once by the
# coherent-sum engine.
_CHUNK_ELEMS = 1 << 22


@dataclass(frozen=True)
class StmmConfig:
    """Planar STMM of ``m_ux`` x ``m_uy`` elements tiled into equal clusters.

    ``clusters_per_axis`` is ``K`` (a K x K tile grid) or a ``(Kx, Ky)`` pair.
    ``spacing=None`` means a quarter of the carrier wavelength.
    """

    m_ux: int = 100
    m_uy: int = 100
    spacing: float | None = None
    clusters_per_axis: int | tuple[int, int] = 1
    q_exponent: float = DEFAULT_Q_EXPONENT

    def __post_init__(self):
        if self.m_ux < 1 or self.m_uy < 1:
            raise DomainError("STMM needs at least one element per axis")
        if self.spacing is not None and not self.spacing > 0:
            raise DomainError("spacing must be positive")
        kx, ky = self.cluster_grid
        if kx < 1 or ky < 1:
            raise DomainError("clusters_per_axis must be >= 1")
        if self.m_ux % kx or self.m_uy % ky:
            raise DomainError(
                f"{self.m_ux}x{self.m_uy} elements cannot be tiled by a {kx}x{ky} cluster grid")
        if self.q_exponent < 0:
            raise DomainError("q_exponent must be non-negative")

    @property
    def m_u(self) -> int:
        return self.m_ux * self.m_uy

    @property
    def cluster_grid(self) -> tuple[int, int]:
        k = self.clusters_per_axis
        if isinstance(k, (tuple, list)):
            return int(k[0]), int(k[1])
        return int(k), int(k)

    @property
    def n_clusters(self) -> int:
        kx, ky = self.cluster_grid
        return kx * ky

    def spacing_for(self, geom: IncidenceGeometry) -> float:
        return geom.default_spacing if self.spacing is None else self.spacing

    def with_clusters(self, k) -> StmmConfig:
        return StmmConfig(self.m_ux, self.m_uy, self.spacing, k, self.q_exponent)


@dataclass(frozen=True, eq=False)
class PhaseProfile:
    """Static (spatial) phase per element, wrapped to ``[0, 2*pi)``."""

    spatial: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.spatial, dtype=float)
        if s.ndim != 2 or not np.all(np.isfinite(s)):
            raise DomainError("spatial profile must be a finite 2-D array")
        object.__setattr__(self, "spatial", np.mod(s, 2 * np.pi))


@dataclass(frozen=True, eq=False)
class CoupledResponse:
    h_u: np.ndarray
    times: np.ndarray
    sample_rate: float
    af_mag: float


class McEstimate(NamedTuple):
    mean: float
    stderr: float
    per_trial: np.ndarray


def _geometric_phase(geom: IncidenceGeometry, config: StmmConfig) -> np.ndarray:
    """Round-trip carrier phase of each element relative to element (0, 0)."""
    cx, cy = geom.direction_cosines
    scale = 4 * np.pi * config.spacing_for(geom) / geom.wavelength
    q = np.arange(config.m_ux)[:, None]
    v = np.arange(config.m_uy)[None, :]
    return scale * (q * cx + v * cy)


def backreflection_profile(geom: IncidenceGeometry, config: StmmConfig) -> PhaseProfile:
    """Spatial phase that cancels the round-trip phase, steering the reflection
    back toward the source. With quarter-wave spacing this is
    ``pi*(q*cos(theta)*cos(phi) + v*cos(theta)*sin(phi))``."""
    return PhaseProfile(_geometric_phase(geom, config))


def zero_profile(config: StmmConfig) -> PhaseProfile:
    return PhaseProfile(np.zeros((config.m_ux, config.m_uy)))


def reflection_amplitude(geom: IncidenceGeometry, q_exponent: float = DEFAULT_Q_EXPONENT,
                         *, literal: bool = False, normalized: bool = False) -> float:
    """Element reflection amplitude ``2(2q+1) cos^{2q}(psi)``.

    ``psi`` is the angle between the propagation direction and the STMM normal,
    so ``cos(psi) = sin(theta)``. ``literal=True`` uses
    ``psi = pi/2 - arcsin(cos(theta) sin(phi))`` instead, which vanishes at
    ``phi = 0`` for any ``q > 0``. ``normalized=True`` divides by the
    boresight value ``2(2q+1)``.
    """
    if literal:
        c = abs(np.cos(np.pi / 2 - np.arcsin(np.cos(geom.theta) * np.sin(geom.phi))))
        c = 0.0 if c < 1e-15 else c
    else:
        c = abs(np.sin(geom.theta))
    peak = 2 * (2 * q_exponent + 1)
    a = c ** (2 * q_exponent)
    return float(a if normalized else peak * a)


def reflection_matrix(config: StmmConfig, geom: IncidenceGeometry,
                      beta_at_t: np.ndarray) -> np.ndarray:
    beta = np.asarray(beta_at_t, dtype=float)
    if beta.shape != (config.m_ux, config.m_uy):
        raise DomainError(f"beta has shape {beta.shape}, expected {(config.m_ux, config.m_uy)}")
    alpha = reflection_amplitude(geom, config.q_exponent)
    return np.diag(alpha * np.exp(1j * beta.ravel()))


# --- coherent-sum engine -----------------------------------------------------

def element_groups(weights: np.ndarray, shifts: np.ndarray,
                   dcoefs: np.ndarray | None = None):
    """Merge elements sharing the same (time shift, derivative coefficient).

    Each element contributes ``w * exp(j[gamma(t + s) + d * gamma'(t + s)])``;
    elements with identical ``(s, d)`` collapse into one group whose weight is
    the sum of theirs. Returns ``(weights, shifts, dcoefs)`` per group.
    """
    w = np.asarray(weights, dtype=complex).ravel()
    s = np.asarray(shifts, dtype=float).ravel()
    d = np.zeros_like(s) if dcoefs is None else np.asarray(dcoefs, dtype=float).ravel()
    keys, inv = np.unique(np.stack([s, d], axis=1), axis=0, return_inverse=True)
    gw = np.zeros(len(keys), dtype=complex)
    np.add.at(gw, inv.ravel(), w)
    return gw, keys[:, 0], keys[:, 1]


def valid_times(gamma: PhaseSignal, shifts: np.ndarray) -> np.ndarray:
    """Grid instants ``t`` of ``gamma`` for which every ``t + shift`` is in support."""
    t = gamma.times
    tol = 1e-6 * gamma.dt
    lo = gamma.t0 - np.min(shifts) - tol
    hi = gamma.t_end - np.max(shifts) + tol
    sel = t[(t >= lo) & (t <= hi)]
    if sel.size == 0:
        raise ConfigError("phase signal is shorter than the delay spread across the STMM")
    return sel


def coherent_sum(samples: np.ndarray, derivs: np.ndarray | None, t0: float, dt: float,
                 groups, times: np.ndarray) -> np.ndarray:
    """Evaluate ``sum_g w_g exp(j[gamma(t + s_g) + d_g gamma'(t + s_g)])``.

    ``samples`` (and ``derivs``) have shape ``(n_signals, n)``; the result has
    shape ``(n_signals, len(times))``.
    """
    w, s, d = groups
    samples = np.atleast_2d(samples)
    n_sig, n_t = samples.shape[0], len(times)
    out = np.zeros((n_sig, n_t), dtype=complex)
    step = max(1, _CHUNK_ELEMS // max(1, n_sig * n_t))
    use_d = derivs is not None and np.any(d != 0)
    for i in range(0, len(w), step):
        tt = times[None, :] + s[i:i + step, None]
        arg = interp_uniform(samples, t0, dt, tt)
        if use_d:
            arg = arg + d[i:i + step, None] * hold_uniform(np.atleast_2d(derivs), t0, dt, tt)
        out += np.einsum("g,kgt->kt", w[i:i + step], np.exp(1j * arg))
    return out


def _check_rate(gamma: PhaseSignal):
    if gamma.bandwidth is not None and gamma.sample_rate < 4 * gamma.bandwidth * (1 - 1e-12):
        raise ConfigError(
            f"phase signal sampled at {gamma.sample_rate:g} Hz, below 4x its "
            f"bandwidth {gamma.bandwidth:g} Hz")


def static_phasors(profile: PhaseProfile, geom: IncidenceGeometry,
                   config: StmmConfig) -> np.ndarray:
    """``exp(-j(geo - phi))`` per element."""
    if profile.spatial.shape != (config.m_ux, config.m_uy):
        raise DomainError("profile shape does not match the STMM")
    return np.exp(-1j * (_geometric_phase(geom, config) - profile.spatial))


def multiplicative_channel(gamma: PhaseSignal, profile: PhaseProfile,
                           geom: IncidenceGeometry, config: StmmConfig,
                           delays: DelayMap | None = None,
                           times: np.ndarray | None = None) -> CoupledResponse:
    """Sampled ``h_u(t)`` for a phase ``gamma`` applied uniformly across the STMM.

    ``gamma(t - dtau)`` is evaluated by linear interpolation of the samples.
    Without ``times``, ``h_u`` is evaluated on the grid instants of ``gamma``
    for which every delayed argument lies inside the record.
    """
    _check_rate(gamma)
    if delays is None:
        delays = build_delay_map(geom, config)
    alpha = reflection_amplitude(geom, config.q_exponent)
    groups = element_groups(static_phasors(profile, geom, config), -delays.per_element)
    if times is None:
        times = valid_times(gamma, groups[1])
    times = np.asarray(times, dtype=float)
    h = alpha * coherent_sum(gamma.samples, None, gamma.t0, gamma.dt, groups, times)[0]
    af = float(np.mean(np.abs(h))) / (alpha * config.m_u) if alpha > 0 else 0.0
    return CoupledResponse(h, times, gamma.sample_rate, af)


def array_factor(geom: IncidenceGeometry, kappa: float, config: StmmConfig,
                 delays: DelayMap | None = None) -> float:
    """Magnitude of the normalised array factor for a tone of ``kappa * f_i``."""
    if delays is None:
        delays = build_delay_map(geom, config)
    ph = 2 * np.pi * geom.carrier_freq * kappa * delays.per_element
    return float(min(1.0, abs(np.mean(np.exp(-1j * ph)))))


def drift_angle(theta: float, kappa: float) -> float | None:
    """Angle of maximum reflection under a frequency shift ``kappa * f_i``.

    Returns ``None`` when ``|(1 + kappa) cos(theta)| > 1`` (evanescent).
    """
    if not 0 < theta <= np.pi:
        raise DomainError("theta outside (0, pi]")
    c = (1 + kappa) * np.cos(theta)
    if abs(c) > 1:
        return None
    return float(np.arccos(c))


def reflected_pattern(geom: IncidenceGeometry, kappa: float, config: StmmConfig,
                      observation_thetas: np.ndarray) -> np.ndarray:
    """Brute-force reflected beam pattern over candidate observation angles.

    The array factor of a tone of ``kappa * f_i`` is re-steered to each
    candidate angle ``theta'`` (same ``phi``) by the carrier phase of the delay
    difference ``dtau(theta') - dtau(theta)``.
    """
    d = config.spacing_for(geom)
    q = np.arange(config.m_ux)[:, None]
    v = np.arange(config.m_uy)[None, :]
    proj = (q * np.cos(geom.phi) + v * np.sin(geom.phi)).ravel()
    proj, counts = np.unique(proj, return_counts=True)
    k = 2 * np.pi / geom.wavelength
    obs = np.cos(np.asarray(observation_thetas, dtype=float))
    target = (1 + kappa) * np.cos(geom.theta)
    out = np.empty(obs.shape)
    step = max(1, _CHUNK_ELEMS // len(proj))
    for i in range(0, obs.size, step):
        ph = k * d * np.outer(obs[i:i + step] - target, proj)
        out[i:i + step] = np.abs(np.exp(1j * ph) @ counts) / config.m_u
    return out


def pattern_peak(geom: IncidenceGeometry, kappa: float, config: StmmConfig,
                 step_deg: float = 0.02, min_peak: float = 0.5):
    """Locate the propagating maximum of :func:`reflected_pattern` on a grid.

    Returns ``(theta_deg, peak)``; ``theta_deg`` is ``None`` when the global
    maximum sits on the edge of the visible range or is a sidelobe (below
    ``min_peak``), i.e. no propagating main lobe exists.
    """
    grid = np.arange(0.0, 180.0 + step_deg / 2, step_deg)
    pat = reflected_pattern(geom, kappa, config, np.deg2rad(grid))
    i = int(np.argmax(pat))
    peak = float(pat[i])
    if i in (0, len(grid) - 1) or peak < min_peak:
        return None, peak
    return float(grid[i]), peak


# --- Monte Carlo -------------------------------------------------------------

def draw_batch(gamma_sampler: Callable[[np.random.Generator], PhaseSignal],
               n_trials: int, seed: int) -> list[PhaseSignal]:
    """Draw ``n_trials`` signals; trial ``i`` uses the stream seeded ``seed + i``."""
    if n_trials < 1:
        raise DomainError("n_trials must be >= 1")
    sigs = [gamma_sampler(np.random.default_rng(seed + i)) for i in range(n_trials)]
    ref = sigs[0]
    for s in sigs[1:]:
        if len(s) != len(ref) or s.t0 != ref.t0 or s.sample_rate != ref.sample_rate:
            raise DomainError("sampler must return signals on a common time grid")
    return sigs


def mc_gain(sigs: Sequence[PhaseSignal], groups, batch: int = 32) -> McEstimate:
    """Per-realisation time-averaged ``|sum|^2`` of :func:`coherent_sum`."""
    ref = sigs[0]
    _check_rate(ref)
    times = valid_times(ref, groups[1])
    vals = []
    need_d = np.any(groups[2] != 0)
    for i in range(0, len(sigs), batch):
        chunk = sigs[i:i + batch]
        samples = np.stack([s.samples for s in chunk])
        derivs = np.stack([s.derivative for s in chunk]) if need_d else None
        h = coherent_sum(samples, derivs, ref.t0, ref.dt, groups, times)
        vals.append(np.mean(np.abs(h) ** 2, axis=1))
    per = np.concatenate(vals)
    se = float(np.std(per, ddof=1) / np.sqrt(len(per))) if len(per) > 1 else 0.0
    return McEstimate(float(np.mean(per)), se, per)


def coupling_gain_mc(gamma_sampler, profile: PhaseProfile, geom: IncidenceGeometry,
                     config: StmmConfig, n_trials: int, seed: int = 0,
                     delays: DelayMap | None = None) -> McEstimate:
    """Monte-Carlo ``E[|h_u|^2] / alpha^2`` (upper bound ``M_u^2``).

    Each realisation is time-averaged over the instants where the whole array
    sees the burst.
    """
    if delays is None:
        delays = build_delay_map(geom, config)
    groups = element_groups(static_phasors(profile, geom, config), -delays.per_element)
    return mc_gain(draw_batch(gamma_sampler, n_trials, seed), groups)


def default_sampler_factory(samples_per_symbol: int = 16, n_symbols: int = 64,
                            mod_index: float = 1.0):
    """CP-FSK burst sampler for a given uplink bandwidth ``B_u`` (``T_u = 2/B_u``)."""
    def factory(bandwidth: float) -> CpfskSampler:
        cfg = ModulationConfig.from_bandwidth(bandwidth, samples_per_symbol, mod_index)
        return CpfskSampler(cfg, n_symbols)
    return factory


def reflection_loss_curve(geom: IncidenceGeometry, config: StmmConfig,
                          bandwidths: Sequence[float], sampler_factory=None,
                          n_trials: int = 200, seed: int = 0,
                          profile: PhaseProfile | None = None) -> list[tuple[float, float]]:
    """Normalised reflection loss ``10 log10(E[|h_u|^2] / (alpha M_u)^2)`` per ``B_u``."""
    bw = list(bandwidths)
    if any(b <= 0 for b in bw) or any(b2 <= b1 for b1, b2 in zip(bw, bw[1:])):
        raise DomainError("bandwidths must be positive and ascending")
    factory = sampler_factory or default_sampler_factory()
    profile = profile or backreflection_profile(geom, config)
    out = []
    for b in bw:
        est = coupling_gain_mc(factory(b), profile, geom, config, n_trials, seed)
        out.append((b, float(min(0.0, to_db(est.mean / config.m_u ** 2)))))
    return out
