"""Cluster partition of the STMM and space-time decoupled phase commands.

Each cluster shares one wideband phase waveform ``gamma(t + dtau_k)``, advanced
by the excess delay of the cluster centre. The residual intra-cluster delay is
absorbed by a per-element term proportional to ``gamma'``, which for CP-FSK is
constant over a symbol and can be driven by slow (narrowband) element tuning.

Two forms of the per-element term are available:

``"taylor"`` (default)
    ``+gamma'(t + dtau_k) * (dtau_qv - dtau_k)``, the first-order expansion of
    ``gamma(t + dtau_qv)`` about the cluster centre. Exact for linear phase.
``"literal"``
    ``-gamma'(t + dtau_k) * (dtau_qv + dtau_k)``, the combination with both
    delays added and the opposite sign.

With one element per cluster both reduce to ``phi_qv + gamma(t + dtau_qv)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .geometry import DelayMap, IncidenceGeometry, build_delay_map, cluster_centers
from .stmm import (McEstimate, PhaseProfile, StmmConfig, draw_batch, element_groups,
                   mc_gain, static_phasors)
from .units import to_db
from .waveform import PhaseSignal

VARIANTS = ("taylor", "literal")


@dataclass(frozen=True, eq=False)
class ClusterMap:
    assignment: np.ndarray
    centers: np.ndarray
    center_delays: np.ndarray | None = None

    @property
    def n_clusters(self) -> int:
        return len(self.centers)


def cluster_partition(config: StmmConfig, geom: IncidenceGeometry | None = None) -> ClusterMap:
    """Tile the STMM into equal rectangular clusters (row-major cluster order).

    ``center_delays`` is filled when ``geom`` is given.
    """
    kx, ky = config.cluster_grid
    if config.m_ux % kx or config.m_uy % ky:
        raise DomainError("STMM dimensions are not divisible by the cluster grid")
    sx, sy = config.m_ux // kx, config.m_uy // ky
    q = np.arange(config.m_ux)[:, None] // sx
    v = np.arange(config.m_uy)[None, :] // sy
    assignment = q * ky + v
    centers = cluster_centers(config.m_ux, config.m_uy, kx, ky)
    delays = build_delay_map(geom, config).per_cluster if geom is not None else None
    return ClusterMap(assignment, centers, delays)


def _command_terms(delays: DelayMap, cmap: ClusterMap, variant: str):
    """Per-element time advance and derivative coefficient of the decoupled command."""
    if variant not in VARIANTS:
        raise DomainError(f"unknown decoupling variant {variant!r}")
    dqv = delays.per_element
    if cmap.n_clusters == dqv.size:
        return dqv.copy(), np.zeros_like(dqv)
    dk = delays.per_cluster[cmap.assignment]
    coef = (dqv - dk) if variant == "taylor" else -(dqv + dk)
    return dk, coef


def decoupled_phase(q: int, v: int, t, gamma: PhaseSignal, profile: PhaseProfile,
                    cmap: ClusterMap, delays: DelayMap, variant: str = "taylor"):
    """Phase command ``beta_qv(t)`` of element ``(q, v)`` with cluster decoupling."""
    advance, coef = _command_terms(delays, cmap, variant)
    a, c = advance[q, v], coef[q, v]
    tt = np.asarray(t, dtype=float) + a
    if np.any(tt < gamma.t0 - 1e-6 * gamma.dt) or np.any(tt > gamma.t_end + 1e-6 * gamma.dt):
        raise DomainError("decoupled phase requested outside the phase-signal support")
    beta = profile.spatial[q, v] + gamma.at(tt)
    if c != 0:
        beta = beta + c * gamma.rate_at(tt)
    return beta


def split_commands(t, gamma: PhaseSignal, cmap: ClusterMap, delays: DelayMap,
                   variant: str = "taylor"):
    """Split the decoupled commands into their hardware parts.

    Returns ``(cluster_waveforms, element_offsets)``: ``cluster_waveforms[k]``
    is the shared wideband phase of cluster ``k`` sampled at ``t``, and
    ``element_offsets[q, v]`` is the slow per-element correction at ``t``.
    """
    t = np.asarray(t, dtype=float)
    advance, coef = _command_terms(delays, cmap, variant)
    if cmap.n_clusters == delays.per_element.size:
        waves = gamma.at(t[None, :] + delays.per_element.reshape(-1, 1))
        return waves, np.zeros(delays.per_element.shape + t.shape)
    waves = gamma.at(t[None, :] + delays.per_cluster[:, None])
    rates = gamma.rate_at(t[None, :] + delays.per_cluster[:, None])
    offsets = coef[..., None] * rates[cmap.assignment]
    return waves, offsets


def compensation_groups(profile: PhaseProfile, geom: IncidenceGeometry, config: StmmConfig,
                        cmap: ClusterMap, delays: DelayMap, variant: str = "taylor"):
    """Coherent-sum groups for the received ``h_u`` under decoupled commands.

    Element ``(q, v)`` is seen at the MU with its command delayed by
    ``dtau_qv``, i.e. ``beta_qv(t - dtau_qv)``.
    """
    advance, coef = _command_terms(delays, cmap, variant)
    shifts = advance - delays.per_element
    return element_groups(static_phasors(profile, geom, config), shifts, coef)


def phase_residual(gamma: PhaseSignal, times, delays: DelayMap, cmap: ClusterMap,
                   variant: str = "taylor") -> np.ndarray:
    """Received temporal phase of every element minus ``gamma(t)``.

    Shape ``(m_ux * m_uy, len(times))``; all zeros means perfect decoupling.
    """
    advance, coef = _command_terms(delays, cmap, variant)
    t = np.asarray(times, dtype=float)
    tt = t[None, :] + (advance - delays.per_element).reshape(-1, 1)
    got = gamma.at(tt) + coef.reshape(-1, 1) * gamma.rate_at(tt)
    return got - gamma.at(t)[None, :]


def compensated_gain_mc(gamma_sampler, profile: PhaseProfile, geom: IncidenceGeometry,
                        config: StmmConfig, cmap: ClusterMap | None = None,
                        n_trials: int = 200, seed: int = 0, variant: str = "taylor",
                        delays: DelayMap | None = None) -> McEstimate:
    """Monte-Carlo ``E[|h_u|^2] / alpha^2`` with cluster decoupling applied."""
    if delays is None:
        delays = build_delay_map(geom, config)
    if cmap is None:
        cmap = cluster_partition(config, geom)
    groups = compensation_groups(profile, geom, config, cmap, delays, variant)
    return mc_gain(draw_batch(gamma_sampler, n_trials, seed), groups)


def residual_coupling_loss(gamma_sampler, profile: PhaseProfile, geom: IncidenceGeometry,
                           config: StmmConfig, cmap: ClusterMap | None = None,
                           n_trials: int = 200, seed: int = 0,
                           variant: str = "taylor") -> float:
    """Normalised reflection loss in dB that remains after decoupling."""
    est = compensated_gain_mc(gamma_sampler, profile, geom, config, cmap, n_trials, seed,
                              variant)
    return float(min(0.0, to_db(est.mean / config.m_u**2)))
