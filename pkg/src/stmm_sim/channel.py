"""Cluster-based channels, path loss and brute-force signal synthesis.

Baseband outputs are returned on a grid anchored at the line-of-sight
arrival: ``y_d[n] = y_d(tau + n/fs)`` for the downlink and
``y_u[n] = y_u(2*tau + n/fs)`` for the back-reflected uplink, where
``s_d[n] = s_d(n/fs)``. The phase signal ``gamma`` is given in absolute time
at the STMM, so a burst that starts as the first downlink sample reaches the
STMM has ``gamma.t0 == tau``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError
from .geometry import SPEED_OF_LIGHT, IncidenceGeometry, wavevector
from .stmm import (PhaseProfile, StmmConfig, multiplicative_channel,
                   reflection_amplitude)
from .waveform import PhaseSignal

FRACTIONAL_DELAY_TAPS = 16


def path_loss_downlink(distance: float, wavelength: float) -> float:
    """One-way power path loss ``2^4 pi D^2 / lambda^2``."""
    if not (distance > 0 and wavelength > 0):
        raise DomainError("distance and wavelength must be positive")
    return 2**4 * np.pi * distance**2 / wavelength**2


def path_loss_uplink(distance: float, wavelength: float) -> float:
    """Round-trip power path loss via the STMM, ``2^12 pi D^4 / lambda^4``."""
    if not (distance > 0 and wavelength > 0):
        raise DomainError("distance and wavelength must be positive")
    return 2**12 * np.pi * distance**4 / wavelength**4


@dataclass(frozen=True)
class LinkGeometry:
    distance: float = 100.0
    tx_elements: int = 16
    rx_elements: int = 16
    tau: float = field(init=False)

    def __post_init__(self):
        if not self.distance > 0:
            raise DomainError("distance must be positive")
        if self.tx_elements < 1 or self.rx_elements < 1:
            raise DomainError("arrays need at least one element")
        object.__setattr__(self, "tau", self.distance / SPEED_OF_LIGHT)


@dataclass
class ChannelRealization:
    """One draw of the cluster channel between an ``N``-element Tx and ``M``-element Rx.

    ``tx_excess[p, n]`` and ``rx_excess[p, m]`` are the excess delays of the
    array elements relative to their phase centres (element 0) for path ``p``.
    """

    amplitudes: np.ndarray
    delays: np.ndarray
    powers: np.ndarray
    tx_excess: np.ndarray
    rx_excess: np.ndarray
    carrier_freq: float
    seed: int | None = None
    link: LinkGeometry | None = None

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        self.delays = np.asarray(self.delays, dtype=float)
        self.powers = np.asarray(self.powers, dtype=float)
        self.tx_excess = np.atleast_2d(np.asarray(self.tx_excess, dtype=float))
        self.rx_excess = np.atleast_2d(np.asarray(self.rx_excess, dtype=float))
        if abs(self.powers.sum() - 1) > 1e-9:
            raise DomainError("path powers must sum to 1")
        if np.any(self.delays < 0):
            raise DomainError("path delays must be non-negative")

    @property
    def n_paths(self) -> int:
        return len(self.amplitudes)

    def narrowband_matrix(self) -> np.ndarray:
        """``M x N`` channel matrix at the carrier frequency."""
        w = 2 * np.pi * self.carrier_freq
        h = np.zeros((self.rx_excess.shape[1], self.tx_excess.shape[1]), dtype=complex)
        for p in range(self.n_paths):
            h += (self.amplitudes[p] * np.exp(-1j * w * self.delays[p])
                  * np.exp(-1j * w * np.add.outer(self.rx_excess[p], self.tx_excess[p])))
        return h

    def to_json(self) -> str:
        doc = {
            "seed": self.seed,
            "carrier_freq": self.carrier_freq,
            "link": None if self.link is None else {
                "distance": self.link.distance,
                "tx_elements": self.link.tx_elements,
                "rx_elements": self.link.rx_elements,
            },
            "paths": [
                {"amplitude": [a.real, a.imag], "delay": d, "power": p}
                for a, d, p in zip(self.amplitudes.tolist(), self.delays.tolist(),
                                   self.powers.tolist())
            ],
            "tx_excess": self.tx_excess.tolist(),
            "rx_excess": self.rx_excess.tolist(),
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> ChannelRealization:
        doc = json.loads(text)
        paths = doc["paths"]
        link = LinkGeometry(**doc["link"]) if doc.get("link") else None
        return cls(
            amplitudes=[complex(*p["amplitude"]) for p in paths],
            delays=[p["delay"] for p in paths],
            powers=[p["power"] for p in paths],
            tx_excess=doc["tx_excess"],
            rx_excess=doc["rx_excess"],
            carrier_freq=doc["carrier_freq"],
            seed=doc.get("seed"),
            link=link,
        )


def sample_channel(link: LinkGeometry, n_paths: int = 1, power_profile=None,
                   seed: int = 0, carrier_freq: float = 30e9,
                   path_delays=None) -> ChannelRealization:
    """Draw a cluster channel with ``xi_p ~ CN(0, sigma_p^2)``.

    Path ``p`` arrives at ``tau + path_delays[p]`` (default: all at ``tau``)
    with departure and arrival angles uniform in (-pi/2, pi/2); the element
    excess delays follow from half-wavelength uniform linear arrays.
    """
    if n_paths < 1:
        raise DomainError("n_paths must be >= 1")
    powers = np.full(n_paths, 1.0 / n_paths) if power_profile is None else np.asarray(
        power_profile, dtype=float)
    if powers.shape != (n_paths,) or np.any(powers < 0) or abs(powers.sum() - 1) > 1e-9:
        raise DomainError("power profile must hold n_paths non-negative values summing to 1")
    extra = np.zeros(n_paths) if path_delays is None else np.asarray(path_delays, dtype=float)
    if extra.shape != (n_paths,) or np.any(extra < 0):
        raise DomainError("path_delays must hold n_paths non-negative offsets")

    rng = np.random.default_rng(seed)
    xi = np.sqrt(powers / 2) * (rng.standard_normal(n_paths) + 1j * rng.standard_normal(n_paths))
    aod = rng.uniform(-np.pi / 2, np.pi / 2, n_paths)
    aoa = rng.uniform(-np.pi / 2, np.pi / 2, n_paths)
    half_wave = SPEED_OF_LIGHT / carrier_freq / 2
    n = np.arange(link.tx_elements)
    m = np.arange(link.rx_elements)
    tx = np.outer(np.sin(aod), n) * half_wave / SPEED_OF_LIGHT
    rx = np.outer(np.sin(aoa), m) * half_wave / SPEED_OF_LIGHT
    return ChannelRealization(xi, link.tau + extra, powers, tx, rx, carrier_freq, seed, link)


def stmm_hop_gains(seed: int) -> tuple[complex, complex]:
    """Unit-magnitude, uniform-phase gains for the forward and backward STMM hops."""
    ph = np.random.default_rng(seed).uniform(0, 2 * np.pi, 2)
    return complex(np.exp(1j * ph[0])), complex(np.exp(1j * ph[1]))


def fractional_delay(x: np.ndarray, delay: float, taps: int = FRACTIONAL_DELAY_TAPS) -> np.ndarray:
    """Delay ``x`` by ``delay`` samples (zero-filled) with a windowed-sinc interpolator.

    Integer delays are exact shifts. The fractional part uses a ``taps``-long
    Hann-windowed sinc; its error is small for signals well inside the Nyquist band.
    """
    x = np.asarray(x)
    n_int = int(np.floor(delay))
    frac = delay - n_int
    if frac > 1e-12:
        k = np.arange(-taps // 2 + 1, taps // 2 + 1)
        h = np.sinc(k - frac) * (0.5 + 0.5 * np.cos(np.pi * (k - frac) / (taps // 2 + 1)))
        h /= h.sum()
        y = np.convolve(x, h)[taps // 2 - 1: taps // 2 - 1 + len(x)]
    else:
        y = x.copy()
    out = np.zeros_like(y)
    if n_int >= 0:
        if n_int < len(y):
            out[n_int:] = y[:len(y) - n_int]
    else:
        out[:n_int] = y[-n_int:]
    return out


def add_awgn(samples: np.ndarray, noise_psd: float, bandwidth: float, seed: int) -> np.ndarray:
    """Add circular complex Gaussian noise of variance ``noise_psd * bandwidth``."""
    if not bandwidth > 0:
        raise DomainError("bandwidth must be positive")
    x = np.asarray(samples, dtype=complex)
    var = noise_psd * bandwidth
    if var == 0:
        return x.copy()
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(x.shape) + 1j * rng.standard_normal(x.shape)
    return x + np.sqrt(var / 2) * noise


def synthesize_downlink(s_d: np.ndarray, realization: ChannelRealization,
                        link: LinkGeometry, sample_rate: float,
                        path_loss: float | None = None,
                        aligned_gain: float | None = None) -> np.ndarray:
    """Noise-free ``y_d`` after aligned combining.

    ``aligned_gain`` defaults to ``sqrt(N * M_d)``, the amplitude gain of
    perfectly aligned precoding and combining. Noise is added by the caller.
    """
    if path_loss is None:
        path_loss = path_loss_downlink(link.distance, SPEED_OF_LIGHT / realization.carrier_freq)
    if aligned_gain is None:
        aligned_gain = np.sqrt(link.tx_elements * link.rx_elements)
    s_d = np.asarray(s_d, dtype=complex)
    y = np.zeros_like(s_d)
    for p in range(realization.n_paths):
        shift = (realization.delays[p] - link.tau) * sample_rate
        y += realization.amplitudes[p] * fractional_delay(s_d, shift)
    return aligned_gain / np.sqrt(path_loss) * y


def uplink_scale(link: LinkGeometry, carrier_freq: float, xi_i: complex = 1.0,
                 xi_o: complex = 1.0) -> complex:
    """``rho = N^2 xi_i xi_o / sqrt(varrho_u)``."""
    lam = SPEED_OF_LIGHT / carrier_freq
    return link.tx_elements**2 * xi_i * xi_o / np.sqrt(path_loss_uplink(link.distance, lam))


def _check_oversampling(gamma: PhaseSignal, sample_rate: float, total_bandwidth):
    if not np.isclose(gamma.sample_rate, sample_rate, rtol=1e-12):
        raise ConfigError("s_d and gamma must share one sample rate")
    b = total_bandwidth if total_bandwidth is not None else (gamma.bandwidth or 0.0)
    if sample_rate < 8 * b * (1 - 1e-12):
        raise ConfigError(f"sample rate {sample_rate:g} Hz is below 8x the total bandwidth {b:g} Hz")


def synthesize_uplink_oracle(s_d: np.ndarray, gamma: PhaseSignal, profile: PhaseProfile,
                             geom: IncidenceGeometry, link: LinkGeometry,
                             config: StmmConfig, sample_rate: float, *,
                             xi_i: complex = 1.0, xi_o: complex = 1.0,
                             total_bandwidth: float | None = None,
                             element_sd_delays: bool = True) -> np.ndarray:
    """Brute-force back-reflected signal, summed element by element.

    Each element's excess delay is the projection of its position on the
    incident wavevector. That delay is applied exactly to the carrier (round
    trip) and to ``gamma`` (evaluated from its continuous-time generator when
    available), and, unless ``element_sd_delays`` is false, twice to ``s_d``
    through a fractional-delay filter. Elements are accumulated in a fixed
    row-major order.
    """
    _check_oversampling(gamma, sample_rate, total_bandwidth)
    s_d = np.asarray(s_d, dtype=complex)
    n = np.arange(len(s_d))
    t = 2 * link.tau + n / sample_rate
    f = geom.carrier_freq
    k_in = wavevector(f, geom.theta, geom.phi, incoming=True).as_array()
    k_hat = k_in / np.linalg.norm(k_in)
    d = config.spacing_for(geom)
    alpha = reflection_amplitude(geom, config.q_exponent)
    rho = uplink_scale(link, f, xi_i, xi_o)

    y = np.zeros(len(s_d), dtype=complex)
    for q in range(config.m_ux):
        for v in range(config.m_uy):
            r = np.array([q * d, v * d, 0.0])
            dtau = float(k_hat @ r) / SPEED_OF_LIGHT
            carrier = np.exp(-1j * 2 * np.pi * f * 2 * dtau)
            temporal = np.exp(1j * (profile.spatial[q, v] + gamma.exact(t - link.tau - dtau)))
            sd = fractional_delay(s_d, 2 * dtau * sample_rate) if element_sd_delays else s_d
            y += carrier * temporal * sd
    return rho * alpha * y


def closed_form_uplink(s_d: np.ndarray, gamma: PhaseSignal, profile: PhaseProfile,
                       geom: IncidenceGeometry, link: LinkGeometry, config: StmmConfig,
                       sample_rate: float, *, xi_i: complex = 1.0,
                       xi_o: complex = 1.0) -> np.ndarray:
    """``rho * h_u(t - tau) * s_d(t - 2 tau)`` on the uplink output grid."""
    s_d = np.asarray(s_d, dtype=complex)
    t = 2 * link.tau + np.arange(len(s_d)) / sample_rate
    resp = multiplicative_channel(gamma, profile, geom, config, times=t - link.tau)
    return uplink_scale(link, geom.carrier_freq, xi_i, xi_o) * resp.h_u * s_d


def relative_l2_error(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


__all__ = [
    "ChannelRealization", "LinkGeometry", "add_awgn", "closed_form_uplink",
    "fractional_delay", "path_loss_downlink", "path_loss_uplink", "relative_l2_error",
    "sample_channel", "stmm_hop_gains", "synthesize_downlink",
    "synthesize_uplink_oracle", "uplink_scale",
]
