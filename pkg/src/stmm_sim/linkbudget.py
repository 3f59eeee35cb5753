"""SNR bounds and spectral efficiency of the full-duplex back-reflection link."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .channel import path_loss_downlink, path_loss_uplink
from .errors import DomainError
from .geometry import SPEED_OF_LIGHT
from .units import dbm_to_watts


@dataclass(frozen=True)
class LinkBudgetParams:
    """Link parameters. Powers in W, noise density in W/Hz.

    The noise variance at the combiner output is ``noise_psd * total_bandwidth``
    for both directions.
    """

    n_mu: int = 16
    m_d: int = 16
    tx_power: float = float(dbm_to_watts(20.0))
    noise_psd: float = float(dbm_to_watts(-173.0))
    distance: float = 100.0
    total_bandwidth: float = 5e9
    uplink_bandwidth: float = 1e9
    carrier_freq: float = 30e9

    def __post_init__(self):
        for name in ("tx_power", "noise_psd", "distance", "total_bandwidth", "carrier_freq"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if self.n_mu < 1 or self.m_d < 1:
            raise DomainError("antenna counts must be >= 1")
        if not 0 <= self.uplink_bandwidth <= self.total_bandwidth:
            raise DomainError("uplink_bandwidth must lie in [0, total_bandwidth]")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_freq

    @property
    def downlink_bandwidth(self) -> float:
        return self.total_bandwidth - self.uplink_bandwidth

    @property
    def mu_u(self) -> float:
        return self.uplink_bandwidth / self.total_bandwidth

    @property
    def noise_variance(self) -> float:
        return self.noise_psd * self.total_bandwidth

    @property
    def symbol_period(self) -> float:
        """Uplink CP-FSK symbol period ``2 / B_u``."""
        return 2.0 / self.uplink_bandwidth if self.uplink_bandwidth > 0 else np.inf

    def with_uplink_bandwidth(self, b_u: float) -> LinkBudgetParams:
        return replace(self, uplink_bandwidth=b_u)


@dataclass(frozen=True)
class LinkMetrics:
    snr_down: float
    snr_up: float
    eta: float
    mu_u: float


def snr_downlink(params: LinkBudgetParams) -> float:
    """Upper bound ``P N M_d / (varrho_d sigma^2)``."""
    rho_d = path_loss_downlink(params.distance, params.wavelength)
    return params.tx_power * params.n_mu * params.m_d / (rho_d * params.noise_variance)


def snr_uplink(params: LinkBudgetParams, af_mag: float, m_u: int,
               symbol_period: float | None = None, element_gain: float = 1.0) -> float:
    """Upper bound ``P N^2 M_u^2 |AF|^2 T_u B_tot / (varrho_u sigma^2)``.

    ``T_u * B_tot`` is the matched-filter gain. ``element_gain`` optionally
    scales the result by the normalised element power pattern.
    """
    if not 0 <= af_mag <= 1 + 1e-12:
        raise DomainError("af_mag must lie in [0, 1]")
    t_u = params.symbol_period if symbol_period is None else symbol_period
    rho_u = path_loss_uplink(params.distance, params.wavelength)
    return (params.tx_power * params.n_mu**2 * m_u**2 * af_mag**2 * element_gain
            * t_u * params.total_bandwidth / (rho_u * params.noise_variance))


def spectral_efficiency(params: LinkBudgetParams, snr_up: float, snr_down: float) -> float:
    """``mu_u log2(1 + SNR_u) + (1 - mu_u) log2(1 + SNR_d)`` in bit/s/Hz."""
    if snr_up < 0 or snr_down < 0:
        raise DomainError("SNRs must be non-negative")
    mu = params.mu_u
    up = mu * np.log2(1 + snr_up) if mu > 0 else 0.0
    return float(up + (1 - mu) * np.log2(1 + snr_down))


def link_metrics(params: LinkBudgetParams, reflection_gain: float, m_u: int,
                 element_gain: float = 1.0) -> LinkMetrics:
    """Metrics for a normalised reflection power gain ``|AF|^2`` in [0, 1]."""
    sd = snr_downlink(params)
    su = snr_uplink(params, np.sqrt(max(reflection_gain, 0.0)), m_u,
                    element_gain=element_gain) if params.uplink_bandwidth > 0 else 0.0
    return LinkMetrics(sd, su, spectral_efficiency(params, su, sd), params.mu_u)
