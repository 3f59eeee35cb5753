"""Seeded parameter sweeps: reflection loss, spectral efficiency, drift, oracle check.

Every sweep is split into independent jobs. A job draws its Monte-Carlo
streams from ``(seed, stream index)`` only, so results do not depend on how
jobs are scheduled across workers, and rows are emitted in sweep order.
Jobs sharing an uplink bandwidth share a stream index, which gives common
random numbers across angles, cluster counts and variants.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .channel import (LinkGeometry, closed_form_uplink, relative_l2_error, stmm_hop_gains,
                      synthesize_uplink_oracle)
from .decoupling import VARIANTS, cluster_partition, compensated_gain_mc
from .errors import ConfigError
from .geometry import IncidenceGeometry
from .linkbudget import LinkBudgetParams, link_metrics
from .stmm import (StmmConfig, backreflection_profile, coupling_gain_mc, default_sampler_factory,
                   drift_angle, pattern_peak, reflection_amplitude)
from .units import dbm_to_watts, to_db
from .waveform import ModulationConfig, cpfsk_phase, random_symbols

SCENARIOS = ("reflection_loss", "se_vs_bandwidth", "se_vs_angle", "drift", "oracle_check")

DEFAULT_BANDWIDTHS = [0.1e9, 0.25e9, 0.5e9, 1e9, 1.5e9, 2e9, 3e9, 4e9, 4.5e9]
DEFAULT_THETAS_DEG = [float(x) for x in range(10, 91, 5)]
DEFAULT_K_LIST = [1, 2, 5, 10, 100]
DEFAULT_KAPPAS = [0.0, 0.05, 0.1, 0.2, 0.5, 1.0, 1.5]
DEFAULT_DRIFT_THETAS_DEG = [10.0, 30.0, 45.0, 60.0, 75.0, 90.0]
ORACLE_MAX_ELEMENTS_PER_AXIS = 16
ORACLE_TOLERANCE = 1e-9


@dataclass
class GeometrySpec:
    theta_deg: float = 30.0
    phi_deg: float = 0.0
    carrier_freq: float = 30e9


@dataclass
class StmmSpec:
    m_ux: int = 100
    m_uy: int = 100
    spacing: float | None = None
    q_exponent: float = 0.285


@dataclass
class ModulationSpec:
    mod_index: float = 1.0
    samples_per_symbol: int = 16
    n_symbols: int = 64


@dataclass
class LinkSpec:
    n_mu: int = 16
    m_d: int = 16
    tx_power_dbm: float = 20.0
    noise_psd_dbm_hz: float = -173.0
    distance: float = 100.0
    total_bandwidth: float = 5e9
    uplink_bandwidth: float = 4e9


@dataclass
class BaseSpec:
    geometry: GeometrySpec = field(default_factory=GeometrySpec)
    stmm: StmmSpec = field(default_factory=StmmSpec)
    modulation: ModulationSpec = field(default_factory=ModulationSpec)
    link: LinkSpec = field(default_factory=LinkSpec)


@dataclass
class SweepConfig:
    """Sweep description.

    ``sweep_values`` is the primary axis: uplink bandwidth in Hz for
    ``reflection_loss`` and ``se_vs_bandwidth``, incidence angle in degrees for
    ``se_vs_angle`` and ``oracle_check``, and ``kappa`` for ``drift``.
    ``theta_list_deg`` is the secondary angle axis of ``reflection_loss`` and
    ``drift``.
    """

    scenario: str
    sweep_values: list[float] | None = None
    theta_list_deg: list[float] | None = None
    base: BaseSpec = field(default_factory=BaseSpec)
    cluster_k_list: list[int] = field(default_factory=lambda: list(DEFAULT_K_LIST))
    mc_trials: int = 200
    seed: int = 0
    output_path: str | None = None
    variant: str = "taylor"

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}", "scenario")
        if self.sweep_values is None:
            self.sweep_values = _default_sweep(self.scenario)
        if self.theta_list_deg is None:
            self.theta_list_deg = (list(DEFAULT_DRIFT_THETAS_DEG) if self.scenario == "drift"
                                   else list(DEFAULT_THETAS_DEG))
        self.validate()

    def validate(self):
        sv = self.sweep_values
        if not sv:
            raise ConfigError("must be non-empty", "sweep_values")
        if any(not math.isfinite(x) for x in sv) or any(b <= a for a, b in zip(sv, sv[1:])):
            raise ConfigError("must be finite and strictly increasing", "sweep_values")
        if self.mc_trials < 1:
            raise ConfigError("must be >= 1", "mc_trials")
        if self.variant not in VARIANTS:
            raise ConfigError(f"must be one of {VARIANTS}", "variant")
        if self.scenario in ("reflection_loss", "se_vs_bandwidth") and sv[0] <= 0:
            raise ConfigError("bandwidths must be positive", "sweep_values")
        if self.scenario in ("se_vs_angle", "oracle_check") and not (0 < sv[0] and sv[-1] <= 180):
            raise ConfigError("angles must lie in (0, 180] degrees", "sweep_values")
        for t in self.theta_list_deg:
            if not 0 < t <= 180:
                raise ConfigError("angles must lie in (0, 180] degrees", "theta_list_deg")
        s = self.base.stmm
        uses_k = self.scenario in ("se_vs_bandwidth", "se_vs_angle")
        for i, k in enumerate(self.cluster_k_list if uses_k else []):
            if k < 1 or s.m_ux % k or s.m_uy % k:
                raise ConfigError(f"K={k} does not tile a {s.m_ux}x{s.m_uy} STMM",
                                  f"cluster_k_list[{i}]")
        if self.scenario == "oracle_check" and max(s.m_ux, s.m_uy) > ORACLE_MAX_ELEMENTS_PER_AXIS:
            raise ConfigError(f"oracle check is limited to {ORACLE_MAX_ELEMENTS_PER_AXIS} "
                              "elements per axis", "base.stmm")
        try:
            self.stmm_config()
            self.link_params()
            self.geometry(self.base.geometry.theta_deg)
        except ValueError as exc:
            raise ConfigError(str(exc), "base") from exc
        if self.scenario in ("reflection_loss", "se_vs_bandwidth"):
            if sv[-1] > self.base.link.total_bandwidth:
                raise ConfigError("uplink bandwidth exceeds total_bandwidth", "sweep_values")
        m = self.base.modulation
        if m.samples_per_symbol < 8:
            raise ConfigError("need >= 8 samples per symbol (4x the bandwidth)",
                              "base.modulation.samples_per_symbol")
        if m.n_symbols < 1:
            raise ConfigError("must be >= 1", "base.modulation.n_symbols")

    def stmm_config(self, k: int = 1) -> StmmConfig:
        s = self.base.stmm
        return StmmConfig(s.m_ux, s.m_uy, s.spacing, k, s.q_exponent)

    def geometry(self, theta_deg: float) -> IncidenceGeometry:
        g = self.base.geometry
        return IncidenceGeometry.from_degrees(theta_deg, g.phi_deg, g.carrier_freq)

    def link_params(self, b_u: float | None = None) -> LinkBudgetParams:
        ln = self.base.link
        return LinkBudgetParams(
            n_mu=ln.n_mu, m_d=ln.m_d, tx_power=float(dbm_to_watts(ln.tx_power_dbm)),
            noise_psd=float(dbm_to_watts(ln.noise_psd_dbm_hz)), distance=ln.distance,
            total_bandwidth=ln.total_bandwidth,
            uplink_bandwidth=ln.uplink_bandwidth if b_u is None else b_u,
            carrier_freq=self.base.geometry.carrier_freq)

    def sampler_factory(self):
        m = self.base.modulation
        return default_sampler_factory(m.samples_per_symbol, m.n_symbols, m.mod_index)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict, scenario: str | None = None) -> SweepConfig:
        data = dict(data)
        if scenario is not None:
            if data.setdefault("scenario", scenario) != scenario:
                raise ConfigError(f"config is for {data['scenario']!r}, not {scenario!r}",
                                  "scenario")
        if "scenario" not in data:
            raise ConfigError("missing", "scenario")
        if data["scenario"] == "oracle_check":
            base = data.setdefault("base", {})
            if isinstance(base, dict):
                base.setdefault("stmm", {"m_ux": 8, "m_uy": 8})
                base.setdefault("link", {"uplink_bandwidth": 2e9})
        return _build(cls, data, "")


def _default_sweep(scenario: str) -> list[float]:
    if scenario in ("reflection_loss", "se_vs_bandwidth"):
        return list(DEFAULT_BANDWIDTHS)
    if scenario == "se_vs_angle":
        return list(DEFAULT_THETAS_DEG)
    if scenario == "drift":
        return list(DEFAULT_KAPPAS)
    return [30.0, 60.0, 90.0]


_NESTED = {"base": BaseSpec, "geometry": GeometrySpec, "stmm": StmmSpec,
           "modulation": ModulationSpec, "link": LinkSpec}


def _build(cls, data: Any, path: str):
    if not isinstance(data, dict):
        raise ConfigError("expected an object", path or "<root>")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"unknown key {unknown[0]!r}", ".".join(filter(None, [path, unknown[0]])))
    types = {f.name: f.type for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        sub = f"{path}.{key}" if path else key
        if key in _NESTED and cls is not StmmSpec:
            kwargs[key] = _build(_NESTED[key], value, sub)
        else:
            kwargs[key] = _check_type(value, types[key], sub)
    try:
        return cls(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc), path or "<root>") from exc


def _check_type(value, annotation: str, path: str):
    if value is None and "None" in annotation:
        return value
    base = annotation.split(" |")[0]
    if base.startswith("list["):
        if not isinstance(value, list):
            raise ConfigError("expected a list", path)
        return [_check_type(v, base[5:-1], f"{path}[{i}]") for i, v in enumerate(value)]
    ok = {"int": lambda v: isinstance(v, int) and not isinstance(v, bool),
          "float": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
          "str": lambda v: isinstance(v, str)}[base]
    if not ok(value):
        raise ConfigError(f"expected {base}, got {type(value).__name__}", path)
    return float(value) if base == "float" else value


def load_config(path: str, scenario: str | None = None) -> SweepConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    return SweepConfig.from_dict(data, scenario)


def stream_seed(seed: int, index: int) -> int:
    """Base seed of Monte-Carlo stream ``index`` (trial ``i`` then uses ``base + i``)."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1, np.uint32)[0])


# --- jobs --------------------------------------------------------------------

def _mc(cfg: SweepConfig, geom, b_u, k, stream, variant=None):
    """Normalised gain ``E[|h_u|^2] / (alpha M_u)^2`` and its standard error.

    ``k=None`` is the uncompensated STMM. The estimate is not clamped, so it
    can exceed 1 by rounding only.
    """
    sampler = cfg.sampler_factory()(b_u)
    base_seed = stream_seed(cfg.seed, stream)
    stmm = cfg.stmm_config(1 if k is None else k)
    profile = backreflection_profile(geom, stmm)
    if k is None:
        est = coupling_gain_mc(sampler, profile, geom, stmm, cfg.mc_trials, base_seed)
    else:
        est = compensated_gain_mc(sampler, profile, geom, stmm, cluster_partition(stmm, geom),
                                  cfg.mc_trials, base_seed, variant or cfg.variant)
    m2 = stmm.m_u ** 2
    return est.mean / m2, est.stderr / m2


def _reflection_loss_job(args):
    cfg, b_u, theta, stream = args
    gain, se = _mc(cfg, cfg.geometry(theta), b_u, None, stream)
    return [(b_u, theta, float(min(0.0, to_db(gain))), gain, se)]


def _se_rows(cfg: SweepConfig, b_u: float, theta: float, stream: int, first_col: float):
    geom = cfg.geometry(theta)
    params = cfg.link_params(b_u)
    m_u = cfg.stmm_config().m_u
    elem = reflection_amplitude(geom, cfg.base.stmm.q_exponent, normalized=True) ** 2
    rows = []

    def add(k, variant, gain, se):
        eta = link_metrics(params, min(gain, 1.0), m_u, elem).eta
        rows.append((first_col, "" if k is None else k, eta, variant, gain, se))

    add(None, "ideal", 1.0, 0.0)
    add(None, "uncompensated", *_mc(cfg, geom, b_u, None, stream))
    for k in cfg.cluster_k_list:
        add(k, "compensated", *_mc(cfg, geom, b_u, k, stream))
    return rows


def _se_bandwidth_job(args):
    cfg, b_u, stream = args
    return _se_rows(cfg, b_u, cfg.base.geometry.theta_deg, stream, b_u)


def _se_angle_job(args):
    cfg, theta, stream = args
    return _se_rows(cfg, cfg.base.link.uplink_bandwidth, theta, stream, theta)


def _drift_job(args):
    cfg, theta, kappa = args
    geom = cfg.geometry(theta)
    bar = drift_angle(geom.theta, kappa)
    argmax, peak = pattern_peak(geom, kappa, cfg.stmm_config())
    bar_col = "evanescent" if bar is None else float(np.rad2deg(bar))
    return [(theta, kappa, bar_col, "" if argmax is None else argmax, peak)]


def oracle_error(cfg: SweepConfig, theta: float, stream: int) -> float:
    """Relative L2 distance between the closed-form and brute-force uplink."""
    geom = cfg.geometry(theta)
    stmm = cfg.stmm_config()
    ln = cfg.base.link
    link = LinkGeometry(ln.distance, ln.n_mu, ln.m_d)
    m = cfg.base.modulation
    # s_d shares the grid of gamma, which must resolve the whole band (fs >= 8 B_tot)
    sps = max(m.samples_per_symbol, math.ceil(16 * ln.total_bandwidth / ln.uplink_bandwidth))
    mod = ModulationConfig.from_bandwidth(ln.uplink_bandwidth, sps, m.mod_index)
    rng = np.random.default_rng(stream_seed(cfg.seed, stream))
    gamma = cpfsk_phase(random_symbols(m.n_symbols, rng), mod, t0=link.tau)
    n = len(gamma)
    t = np.arange(n) / mod.sample_rate
    b_d = ln.total_bandwidth - ln.uplink_bandwidth
    tones = rng.uniform(-b_d / 2, b_d / 2, 4)
    s_d = np.exp(2j * np.pi * np.outer(t, tones)) @ (rng.standard_normal(4) + 1j * rng.standard_normal(4))
    xi_i, xi_o = stmm_hop_gains(stream_seed(cfg.seed, stream + 1))
    profile = backreflection_profile(geom, stmm)
    closed = closed_form_uplink(s_d, gamma, profile, geom, link, stmm, mod.sample_rate,
                                xi_i=xi_i, xi_o=xi_o)
    brute = synthesize_uplink_oracle(s_d, gamma, profile, geom, link, stmm, mod.sample_rate,
                                     xi_i=xi_i, xi_o=xi_o, total_bandwidth=ln.total_bandwidth,
                                     element_sd_delays=False)
    return relative_l2_error(closed, brute)


def _oracle_job(args):
    cfg, theta, stream = args
    err = oracle_error(cfg, theta, stream)
    return [(theta, err, "pass" if err < ORACLE_TOLERANCE else "fail")]


HEADERS = {
    "reflection_loss": ["B_u_Hz", "theta_deg", "loss_dB", "gain_norm", "gain_stderr"],
    "se_vs_bandwidth": ["B_u_Hz", "K", "eta_bits_s_Hz", "variant", "gain_norm", "gain_stderr"],
    "se_vs_angle": ["theta_deg", "K", "eta_bits_s_Hz", "variant", "gain_norm", "gain_stderr"],
    "drift": ["theta_deg", "kappa", "theta_bar_deg", "brute_force_argmax_deg", "peak_af"],
    "oracle_check": ["theta_deg", "rel_l2_error", "status"],
}


def _jobs(cfg: SweepConfig):
    sv = cfg.sweep_values
    if cfg.scenario == "reflection_loss":
        return _reflection_loss_job, [(cfg, b, th, i) for i, b in enumerate(sv)
                                      for th in cfg.theta_list_deg]
    if cfg.scenario == "se_vs_bandwidth":
        return _se_bandwidth_job, [(cfg, b, i) for i, b in enumerate(sv)]
    if cfg.scenario == "se_vs_angle":
        return _se_angle_job, [(cfg, th, 0) for th in sv]
    if cfg.scenario == "drift":
        return _drift_job, [(cfg, th, k) for th in cfg.theta_list_deg for k in sv]
    return _oracle_job, [(cfg, th, 2 * i) for i, th in enumerate(sv)]


def run(cfg: SweepConfig, workers: int = 1) -> list[tuple]:
    """Execute a sweep and return its rows in sweep order."""
    func, jobs = _jobs(cfg)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(func, jobs))
    else:
        parts = [func(j) for j in jobs]
    return [row for part in parts for row in part]


def run_reflection_loss(cfg: SweepConfig, workers: int = 1):
    _expect(cfg, "reflection_loss")
    return run(cfg, workers)


def run_se_vs_bandwidth(cfg: SweepConfig, workers: int = 1):
    _expect(cfg, "se_vs_bandwidth")
    return run(cfg, workers)


def run_se_vs_angle(cfg: SweepConfig, workers: int = 1):
    _expect(cfg, "se_vs_angle")
    return run(cfg, workers)


def run_drift(cfg: SweepConfig, workers: int = 1):
    _expect(cfg, "drift")
    return run(cfg, workers)


def run_oracle_check(cfg: SweepConfig, workers: int = 1) -> dict:
    """Report ``{"max_rel_l2_error", "passed", "rows"}``; failure is not an exception."""
    _expect(cfg, "oracle_check")
    rows = run(cfg, workers)
    worst = max(r[1] for r in rows)
    return {"max_rel_l2_error": worst, "passed": worst < ORACLE_TOLERANCE, "rows": rows}


def _expect(cfg: SweepConfig, scenario: str):
    if cfg.scenario != scenario:
        raise ConfigError(f"expected scenario {scenario!r}", "scenario")


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def to_csv(scenario: str, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADERS[scenario])
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def read_csv(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))
