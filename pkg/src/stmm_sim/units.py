"""Decibel and power-unit conversions."""

import numpy as np


def to_db(x):
    return 10 * np.log10(x)


def from_db(x):
    return np.power(10.0, np.asarray(x, dtype=float) / 10)


def dbm_to_watts(x):
    return from_db(x) * 1e-3


def watts_to_dbm(x):
    return to_db(x) + 30
