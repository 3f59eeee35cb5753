"""Link budget of the full-duplex back-reflection link at 30 GHz.

Prints the one-way and round-trip path losses, the noise floor over the 5 GHz
system bandwidth, and the SNR bounds for both directions. A cluster channel
is drawn and a short downlink burst synthesised to check the received power
against the bound.
"""

import numpy as np

from stmm_sim import LinkGeometry, sample_channel, synthesize_downlink
from stmm_sim.linkbudget import LinkBudgetParams, snr_downlink, snr_uplink
from stmm_sim.channel import path_loss_downlink, path_loss_uplink
from stmm_sim.units import to_db, watts_to_dbm

p = LinkBudgetParams()
print(f"wavelength            {p.wavelength * 100:.3f} cm")
print(f"downlink path loss    {to_db(path_loss_downlink(p.distance, p.wavelength)):.2f} dB")
print(f"round-trip path loss  {to_db(path_loss_uplink(p.distance, p.wavelength)):.2f} dB")
print(f"noise power           {watts_to_dbm(p.noise_variance):.2f} dBm")
print(f"SNR_d bound           {to_db(snr_downlink(p)):.2f} dB")
for b_u in (0.1e9, 1e9, 4e9):
    snr = snr_uplink(p.with_uplink_bandwidth(b_u), 1.0, 100 * 100)
    print(f"SNR_u bound at {b_u / 1e9:3.1f} GHz {to_db(snr):6.2f} dB (|AF| = 1)")

link = LinkGeometry(p.distance, p.n_mu, p.m_d)
powers = []
for seed in range(2000):
    r = sample_channel(link, n_paths=3, seed=seed)
    y = synthesize_downlink(np.ones(8, dtype=complex) * np.sqrt(p.tx_power), r, link, 20e9)
    powers.append(np.mean(np.abs(y) ** 2))
print(f"mean received downlink power / noise: {to_db(np.mean(powers) / p.noise_variance):.2f} dB")
