"""Frequency grid shared by every on-axis validation."""

import numpy as np

GRID_POINTS = 512
GRID_MIN = 1e-3
GRID_MAX = 1e3


def validation_grid(points=GRID_POINTS, reflect=True):
    """Log-spaced angular frequencies in [1e-3, 1e3], optionally mirrored to negative values."""
    lam = np.logspace(np.log10(GRID_MIN), np.log10(GRID_MAX), int(points))
    if reflect:
        lam = np.concatenate([-lam[::-1], lam])
    return lam


def axis_points(points=GRID_POINTS, reflect=True):
    """The grid as points ``j*lambda`` on the imaginary axis."""
    return 1j * validation_grid(points, reflect)
