import numpy as np
import pytest

from stickslip import FrictionParams, HarmonicForcing


@pytest.fixture
def harmonic_forcing():
    """Harmonic benchmark forcing: amplitude 6, angular frequency 1/4."""
    return HarmonicForcing(beta=6.0, Omega=0.25, alpha=0.0)


@pytest.fixture
def harmonic_params():
    return FrictionParams(m=1.0, f_d=1.0, f_s=1.2)


def vi_residual(v_old, v_new, b, f, h, m, phis):
    """Discrete VI residual (b - m (v' - v)/h)(phi - v') + f|v'| - f|phi|.

    Nonpositive for every phi iff v' solves the discrete friction step.
    """
    phis = np.asarray(phis)
    accel = b - m * (v_new - v_old) / h
    return accel * (phis - v_new) + f * abs(v_new) - f * np.abs(phis)
