import math

import numpy as np
import pytest

from irs_secopt.bench import monte_carlo_sweep
from irs_secopt.channel import ChannelSet, ScenarioConfig


def cn(rng, *shape):
    """i.i.d. CN(0, 1) array."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def rand_channels(rng, n_t=2, n_r=2, n_e=2, m=4, sigma_r2=1.0, sigma_e2=1.0):
    return ChannelSet(
        h_tr=cn(rng, n_r, n_t), h_te=cn(rng, n_e, n_t), h_sr=cn(rng, n_r, m),
        h_se=cn(rng, n_e, m), h_ts=cn(rng, m, n_t), sigma_r2=sigma_r2, sigma_e2=sigma_e2,
    )


def rand_psd(rng, n, trace=None, rank=None):
    x = cn(rng, n, rank or n)
    q = x @ x.conj().T
    if trace is not None:
        q *= trace / np.real(np.trace(q))
    return q


def rand_unit(rng, m):
    return np.exp(2j * np.pi * rng.random(m))


def log2det(a):
    sign, val = np.linalg.slogdet(a)
    assert abs(sign - 1) < 1e-9
    return val / math.log(2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


REFERENCE = ScenarioConfig(master_seed=2020)
P_VALUES = [0.2, 0.5, 1.0, 2.0]


@pytest.fixture(scope="session")
def power_sweep():
    return monte_carlo_sweep(REFERENCE, "p_max", P_VALUES, 100)


@pytest.fixture(scope="session")
def swapped_sweep():
    return monte_carlo_sweep(REFERENCE.swapped(), "p_max", P_VALUES, 100)


@pytest.fixture(scope="session")
def element_sweep():
    return monte_carlo_sweep(REFERENCE, "m_elements", [10, 20, 30], 100)


@pytest.fixture(scope="session")
def antenna_sweep():
    return monte_carlo_sweep(REFERENCE.replace(n_t=10, n_e=6), "n_r", [3, 6, 10], 100)


def branch_instance(rng, r_nonzero, e_nonzero, n_t=3, n_r=2, n_e=2, m_count=4):
    """Random (chs, q, theta, m) whose element ``m`` lands in a chosen trace branch.

    A zero-trace side is made nilpotent rather than zero: the row of the
    cascaded channel seen by element ``m`` is chosen orthogonal to
    ``Hhat^H A^{-1} h``. ``A`` only depends on that row through its norm, so
    the norm is fixed first. With both sides zero the row must be
    orthogonal to two vectors, hence ``n_t >= 3``.
    """
    from irs_secopt.irsopt import covariance_root
    from irs_secopt.numerics import complement_basis

    chs = rand_channels(rng, n_t, n_r, n_e, m_count)
    q = rand_psd(rng, n_t, trace=float(rng.uniform(0.5, 3.0)))
    theta = rand_unit(rng, m_count)
    m = int(rng.integers(m_count))
    if r_nonzero and e_nonzero:
        return chs, q, theta, m
    root = covariance_root(q)
    others = np.where(np.arange(m_count) == m, 0, theta)
    rho = float(rng.uniform(0.5, 2.0))
    constraints = []
    for h_d, h_s, s2, nonzero in ((chs.h_tr, chs.h_sr, chs.sigma_r2, r_nonzero),
                                  (chs.h_te, chs.h_se, chs.sigma_e2, e_nonzero)):
        if nonzero:
            continue
        hat = (h_d + (h_s * others) @ chs.h_ts) @ root
        h = h_s[:, m]
        a = np.eye(len(h)) + (hat @ hat.conj().T + rho ** 2 * np.outer(h, h.conj())) / s2
        constraints.append(hat.conj().T @ np.linalg.solve(a, h))
    # row r with r @ w = 0 for every constraint w
    null = complement_basis(constraints[0].conj())
    if len(constraints) == 2:
        w2 = null.T @ constraints[1]
        null = null @ complement_basis(w2.conj())
    row = rho * null[:, 0] / np.linalg.norm(null[:, 0])
    h_ts = chs.h_ts.copy()
    h_ts[m] = np.linalg.solve(root.T, row)
    chs = ChannelSet(chs.h_tr, chs.h_te, chs.h_sr, chs.h_se, h_ts, chs.sigma_r2, chs.sigma_e2)
    return chs, q, theta, m


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
