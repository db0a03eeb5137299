import numpy as np
import pytest

from beckflow import Grid, LinearPath, gaussian_bump


@pytest.fixture(scope="session")
def bump_pair_1d():
    """Smooth wall-compatible bump pair on n=64; the workhorse fixture."""
    g = Grid(1, 64)
    rho_nu = gaussian_bump(g, 0.35, 0.12, floor=1e-6, background=0.05)
    rho_mu = gaussian_bump(g, 0.65, 0.12, floor=1e-6, background=0.05)
    return g, rho_nu, rho_mu


@pytest.fixture(scope="session")
def bump_pair_2d():
    g = Grid(2, 48)
    rho_nu = gaussian_bump(g, (0.35, 0.4), 0.15, floor=1e-6, background=0.05)
    rho_mu = gaussian_bump(g, (0.65, 0.6), 0.15, floor=1e-6, background=0.05)
    return g, rho_nu, rho_mu


def smooth_pair(d: int, n: int):
    """Same fixture family at arbitrary resolution, for convergence sweeps."""
    g = Grid(d, n)
    if d == 1:
        c_nu, c_mu = 0.35, 0.65
    else:
        c_nu, c_mu = (0.35, 0.4), (0.65, 0.6)
    sigma = 0.12 if d == 1 else 0.15
    rho_nu = gaussian_bump(g, c_nu, sigma, floor=1e-6, background=0.05)
    rho_mu = gaussian_bump(g, c_mu, sigma, floor=1e-6, background=0.05)
    return g, rho_nu, rho_mu


def fitted_order(resolutions, errors) -> float:
    """Positive decay exponent p of err ~ C * resolution^(-p)."""
    return -float(np.polyfit(np.log(resolutions), np.log(errors), 1)[0])
