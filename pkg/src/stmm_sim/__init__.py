"""Link-level simulation of space-time phase coupling in STMM back-reflection links."""

from .errors import ConfigError, DomainError
from .geometry import (SPEED_OF_LIGHT, DelayMap, IncidenceGeometry, Wavevector,
                       build_delay_map, excess_delay, frequency_shift, snell_residual,
                       wavevector)
from .waveform import (CpfskSampler, ModulationConfig, PhaseSignal, cpfsk_phase,
                       occupied_bandwidth, taylor_residual, tone_phase)
from .stmm import (CoupledResponse, McEstimate, PhaseProfile, StmmConfig, array_factor,
                   backreflection_profile, coupling_gain_mc, drift_angle,
                   multiplicative_channel, reflection_amplitude, reflection_loss_curve,
                   reflection_matrix)
from .channel import (ChannelRealization, LinkGeometry, add_awgn, path_loss_downlink,
                      path_loss_uplink, sample_channel, synthesize_downlink,
                      synthesize_uplink_oracle)
from .decoupling import (ClusterMap, cluster_partition, decoupled_phase,
                         residual_coupling_loss)
from .linkbudget import (LinkBudgetParams, LinkMetrics, snr_downlink, snr_uplink,
                         spectral_efficiency)

__version__ = "0.1.0"
