"""Temporal phase signals applied at the STMM.

A :class:`PhaseSignal` holds uniformly sampled phase ``gamma(t)`` together with
its time derivative. Signals built by :func:`cpfsk_phase` and
:func:`tone_phase` also carry the exact continuous-time generator, which lets
brute-force code evaluate ``gamma`` at arbitrary instants without going
through the sampled representation.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError, DomainError

# Tolerance (in units of one sample) used when locating the segment that
# contains an evaluation instant, so that instants landing on a sample are
# attributed to the segment that starts there.
_SEGMENT_EPS = 1e-9


def interp_uniform(y: np.ndarray, t0: float, dt: float, t) -> np.ndarray:
    """Linear interpolation of uniformly sampled rows of ``y`` at times ``t``.

    ``y`` has shape ``(..., n)``; the result has shape ``(..., *t.shape)``.
    Values outside the sampled span are clamped to the end samples.
    """
    y = np.asarray(y)
    t = np.asarray(t, dtype=float)
    n = y.shape[-1]
    pos = np.clip((t - t0) / dt, 0.0, n - 1)
    i = np.minimum(np.floor(pos).astype(np.intp), n - 2)
    frac = pos - i
    lo = np.take(y, i, axis=-1)
    hi = np.take(y, i + 1, axis=-1)
    return lo + (hi - lo) * frac


def hold_uniform(y: np.ndarray, t0: float, dt: float, t) -> np.ndarray:
    """Zero-order-hold lookup (sample at or before ``t``) of uniformly sampled rows."""
    y = np.asarray(y)
    t = np.asarray(t, dtype=float)
    n = y.shape[-1]
    i = np.floor((t - t0) / dt + _SEGMENT_EPS).astype(np.intp)
    return np.take(y, np.clip(i, 0, n - 1), axis=-1)


@dataclass(frozen=True, eq=False)
class PhaseSignal:
    """Sampled temporal phase and its derivative.

    ``derivative[n]`` is the slope of the phase on the segment starting at
    sample ``n``.
    """

    samples: np.ndarray
    derivative: np.ndarray
    sample_rate: float
    t0: float = 0.0
    symbol_period: float | None = None
    bandwidth: float | None = None
    symbols: np.ndarray | None = None
    func: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    dfunc: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        d = np.asarray(self.derivative, dtype=float)
        if s.shape != d.shape or s.ndim != 1:
            raise DomainError("samples and derivative must be 1-D and of equal length")
        if len(s) < 2:
            raise DomainError("a phase signal needs at least two samples")
        if not np.all(np.isfinite(s)):
            raise DomainError("phase samples must be finite")
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "derivative", d)

    def __len__(self):
        return len(self.samples)

    @property
    def dt(self) -> float:
        return 1.0 / self.sample_rate

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(len(self.samples)) * self.dt

    @property
    def t_end(self) -> float:
        return self.t0 + (len(self.samples) - 1) * self.dt

    @property
    def n_symbols(self) -> float | None:
        if self.symbol_period is None:
            return None
        return (self.t_end - self.t0) / self.symbol_period

    def at(self, t):
        """Phase at ``t`` by linear interpolation of the samples."""
        return interp_uniform(self.samples, self.t0, self.dt, t)

    def rate_at(self, t):
        """Phase derivative at ``t`` (zero-order hold of the segment slopes)."""
        return hold_uniform(self.derivative, self.t0, self.dt, t)

    def exact(self, t):
        """Phase from the continuous-time generator, falling back to :meth:`at`.

        Like :meth:`at`, the phase is held constant outside the record.
        """
        if self.func is None:
            return self.at(t)
        return self.func(np.clip(np.asarray(t, dtype=float), self.t0, self.t_end))

    def exact_rate(self, t):
        if self.dfunc is None:
            return self.rate_at(t)
        return self.dfunc(np.clip(np.asarray(t, dtype=float), self.t0, self.t_end))

    def shifted(self, t0: float) -> PhaseSignal:
        """The same waveform started at absolute time ``t0``."""
        off = t0 - self.t0
        func = dfunc = None
        if self.func is not None:
            f0 = self.func
            func = lambda t: f0(t - off)  # noqa: E731
        if self.dfunc is not None:
            d0 = self.dfunc
            dfunc = lambda t: d0(t - off)  # noqa: E731
        return PhaseSignal(self.samples, self.derivative, self.sample_rate, t0,
                           self.symbol_period, self.bandwidth, self.symbols, func, dfunc)

    @classmethod
    def from_function(cls, func, dfunc, duration: float, sample_rate: float,
                      t0: float = 0.0, bandwidth: float | None = None) -> PhaseSignal:
        n = int(round(duration * sample_rate)) + 1
        t = t0 + np.arange(n) / sample_rate
        return cls(func(t), dfunc(t), sample_rate, t0, bandwidth=bandwidth,
                   func=func, dfunc=dfunc)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["time_s", "phase_rad"])
            for t, g in zip(self.times, self.samples):
                w.writerow([repr(float(t)), repr(float(g))])

    @classmethod
    def from_csv(cls, path) -> PhaseSignal:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        t, g = data[:, 0], data[:, 1]
        dt = np.diff(t)
        if not np.allclose(dt, dt[0], rtol=1e-9, atol=0):
            raise DomainError("CSV phase signal is not uniformly sampled")
        slope = np.append(np.diff(g) / dt, 0.0)
        return cls(g, slope, 1.0 / dt[0], t0=t[0])


@dataclass(frozen=True)
class ModulationConfig:
    """Binary CP-FSK parameters; the occupied bandwidth is ``2 / symbol_period``."""

    symbol_period: float
    sample_rate: float
    mod_index: float = 1.0
    bandwidth: float = field(init=False)

    def __post_init__(self):
        if not (self.symbol_period > 0 and self.sample_rate > 0):
            raise ConfigError("symbol_period and sample_rate must be positive")
        object.__setattr__(self, "bandwidth", 2.0 / self.symbol_period)
        if self.sample_rate < 4 * self.bandwidth * (1 - 1e-12):
            raise ConfigError(
                f"sample_rate {self.sample_rate:g} Hz below 4x bandwidth {self.bandwidth:g} Hz")

    @classmethod
    def from_bandwidth(cls, bandwidth: float, samples_per_symbol: int = 16,
                       mod_index: float = 1.0) -> ModulationConfig:
        t_u = 2.0 / bandwidth
        return cls(t_u, samples_per_symbol / t_u, mod_index)

    @property
    def samples_per_symbol(self) -> float:
        return self.sample_rate * self.symbol_period


def _cpfsk_generators(a: np.ndarray, t_u: float, h: float, t0: float):
    csum = np.concatenate([[0.0], np.cumsum(a)])
    n = len(a)

    def func(t):
        x = np.clip((np.asarray(t, dtype=float) - t0) / t_u, 0.0, n)
        k = np.minimum(np.floor(x).astype(np.intp), n - 1)
        return np.pi * h * (csum[k] + a[k] * (x - k))

    def dfunc(t):
        x = (np.asarray(t, dtype=float) - t0) / t_u
        k = np.clip(np.floor(x + _SEGMENT_EPS).astype(np.intp), 0, n - 1)
        return np.pi * h * a[k] / t_u

    return func, dfunc


def cpfsk_phase(symbols, config: ModulationConfig, t0: float = 0.0) -> PhaseSignal:
    """Full-response binary CP-FSK phase with a rectangular frequency pulse.

    Each symbol ``a_k`` ramps the phase by ``pi*h*a_k`` over one symbol period.
    The record spans ``[t0, t0 + len(symbols)*T_u]`` including both ends.
    """
    a = np.asarray(symbols, dtype=float).ravel()
    if a.size == 0:
        raise DomainError("symbol sequence is empty")
    if not np.all(np.isin(a, (-1.0, 1.0))):
        raise DomainError("CP-FSK symbols must be -1 or +1")
    t_u = config.symbol_period
    func, dfunc = _cpfsk_generators(a, t_u, config.mod_index, t0)
    n = int(round(a.size * t_u * config.sample_rate)) + 1
    t = t0 + np.arange(n) / config.sample_rate
    return PhaseSignal(func(t), dfunc(t), config.sample_rate, t0,
                       symbol_period=t_u, bandwidth=config.bandwidth,
                       symbols=a, func=func, dfunc=dfunc)


def random_symbols(n: int, rng: np.random.Generator) -> np.ndarray:
    """I.i.d. equiprobable +/-1 symbols."""
    return 2.0 * rng.integers(0, 2, size=n) - 1.0


@dataclass(frozen=True)
class CpfskSampler:
    """Draws random CP-FSK bursts; call with a ``numpy.random.Generator``."""

    config: ModulationConfig
    n_symbols: int = 64
    t0: float = 0.0

    def __call__(self, rng: np.random.Generator) -> PhaseSignal:
        return cpfsk_phase(random_symbols(self.n_symbols, rng), self.config, self.t0)


def tone_phase(f_s: float, duration: float, sample_rate: float, t0: float = 0.0) -> PhaseSignal:
    """Linear phase ``2*pi*f_s*t`` (a pure frequency shift of ``f_s``)."""
    if f_s != 0 and sample_rate < 4 * abs(f_s):
        raise DomainError("sample_rate must be at least 4 |f_s|")
    w = 2 * np.pi * f_s
    return PhaseSignal.from_function(lambda t: w * np.asarray(t, dtype=float),
                                     lambda t: np.full(np.shape(t), w),
                                     duration, sample_rate, t0,
                                     bandwidth=abs(f_s))


def constant_phase(value: float, duration: float, sample_rate: float,
                   t0: float = 0.0) -> PhaseSignal:
    return PhaseSignal.from_function(lambda t: np.full(np.shape(t), float(value)),
                                     lambda t: np.zeros(np.shape(t)),
                                     duration, sample_rate, t0, bandwidth=0.0)


def taylor_residual(gamma: PhaseSignal, t0: float, delta_tau: float) -> float:
    """Error of the first-order expansion ``gamma(t0 - d) ~ gamma(t0) - gamma'(t0)*d``."""
    t1 = t0 - delta_tau
    lo, hi = gamma.t0, gamma.t_end
    for t in (t0, t1):
        if not lo <= t <= hi:
            raise DomainError(f"t={t} outside signal support [{lo}, {hi}]")
    g = lambda t: float(gamma.exact(np.array(t)))  # noqa: E731
    rate = float(gamma.exact_rate(np.array(t0)))
    return g(t1) - (g(t0) - rate * delta_tau)


def occupied_bandwidth(gamma: PhaseSignal, fraction: float = 0.99) -> float:
    """Smallest band, symmetric about the power centroid, holding ``fraction`` of
    the energy of ``exp(j*gamma)``.

    Uses a rectangular-window DFT of the whole record.
    """
    if not 0 < fraction <= 1:
        raise DomainError("fraction must lie in (0, 1]")
    if gamma.n_symbols is not None and gamma.n_symbols < 16:
        warnings.warn("fewer than 16 symbols: occupied bandwidth estimate is inaccurate",
                      RuntimeWarning, stacklevel=2)
    if fraction == 1:
        return float(gamma.sample_rate)
    x = np.exp(1j * gamma.samples)
    p = np.abs(np.fft.fft(x)) ** 2
    f = np.fft.fftfreq(len(x), gamma.dt)
    fc = np.sum(f * p) / np.sum(p)
    dist = np.abs(f - fc)
    order = np.argsort(dist, kind="stable")
    cum = np.cumsum(p[order]) / np.sum(p)
    i = min(int(np.searchsorted(cum, fraction)), len(cum) - 1)
    return float(2 * dist[order][i])
