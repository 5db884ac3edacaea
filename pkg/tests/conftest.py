"""Shared fixtures: the representative bundle/label combinations used
throughout the suite, plus a seeded RNG factory."""

import numpy as np
import pytest

from hyperform import BundleSpec, SpectralPoint, sigma_q, SIGMA_PLUS, SIGMA_MINUS


def case_points(lam=1.0):
    """One spectral point per (case type, sigma label):

    generic (n=6, p=2, sigma q:1 and q:2), half-odd (n=5, p=2, sigma
    q:1, plus, minus), half-even (n=4, p=2, chirality +/-, sigma q:2).
    """
    out = []
    g = BundleSpec(6, 2)
    out += [SpectralPoint(g, sigma_q(1), lam), SpectralPoint(g, sigma_q(2), lam)]
    h = BundleSpec(5, 2)
    out += [
        SpectralPoint(h, sigma_q(1), lam),
        SpectralPoint(h, SIGMA_PLUS, lam),
        SpectralPoint(h, SIGMA_MINUS, lam),
    ]
    for chir in ("plus", "minus"):
        out.append(SpectralPoint(BundleSpec(4, 2, chir), sigma_q(2), lam))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20260815)
