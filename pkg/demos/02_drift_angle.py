"""Beam drift under a frequency-shifting phase.

A linear temporal phase shifts the reflected carrier by kappa * f_i. Because
the spatial profile was designed for f_i, the reflected main lobe drifts to
arccos((1 + kappa) cos(theta)), and disappears altogether once that argument
leaves [-1, 1]. The brute-force pattern sweep below finds the same angle.
"""

import numpy as np

from stmm_sim import IncidenceGeometry, StmmConfig, drift_angle
from stmm_sim.stmm import pattern_peak

cfg = StmmConfig(100, 100)
print(" theta  kappa   analytic   pattern argmax   peak |AF|")
for theta in (30.0, 60.0, 80.0):
    geom = IncidenceGeometry.from_degrees(theta)
    for kappa in (0.0, 0.05, 0.1, 0.3):
        bar = drift_angle(geom.theta, kappa)
        deg, peak = pattern_peak(geom, kappa, cfg)
        bar_s = "evanescent" if bar is None else f"{np.rad2deg(bar):10.3f}"
        deg_s = "none" if deg is None else f"{deg:.2f}"
        print(f"{theta:6.0f} {kappa:6.2f} {bar_s:>10} {deg_s:>16} {peak:11.3f}")
