"""Re-run the procedures behind the calibrated constants in ``config``."""

import math

import numpy as np

from dzeros import config
from dzeros.capacity import calibrate_c1


def test_c1_arc_capacity():
    c1 = calibrate_c1()
    assert c1 <= config.C1_ARC_CAPACITY
    # rounded up by less than 1e-3
    assert config.C1_ARC_CAPACITY - c1 < 1e-3


def test_c2_cover_supremum():
    delta = np.exp(-np.linspace(1.0001, 60.0, 200001))
    L = np.log(1.0 / delta)
    ratio = L / (0.5 * np.log(1.0 / (delta * L)))
    sup = float(ratio.max())
    assert abs(sup - 2 * math.e / (math.e - 1)) < 1e-8
    assert config.C2_COVER == config.C1_ARC_CAPACITY * 2 * math.e / (math.e - 1)
