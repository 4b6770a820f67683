import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from irs_secopt.alternating import AoOptions, ao_discrete, ao_optimize, discretize_report, project_discrete
from irs_secopt.channel import ChannelSet, effective_channels
from irs_secopt.errors import BadLevelCount, ConfigError
from irs_secopt.secrecy import secrecy_rate
from irs_secopt.txcov import sca_optimize

from conftest import P_VALUES, cn, rand_channels, rand_unit


def disconnected(rng, m=5):
    chs = rand_channels(rng, 3, 2, 2, m)
    return ChannelSet(chs.h_tr, chs.h_te, np.zeros((2, m)), np.zeros((2, m)), chs.h_ts, 1.0, 1.0)


def test_disconnected_irs_equals_sca(rng):
    chs = disconnected(rng)
    rep = ao_optimize(chs, 2.0, rng=np.random.default_rng(1))
    q, _ = sca_optimize(chs, None, 2.0)
    assert rep.rounds == 1 and rep.converged
    assert abs(rep.secrecy_rate - secrecy_rate(chs, None, q)) <= 1e-12


def test_deterministic_given_stream(rng):
    chs = rand_channels(rng, 2, 2, 2, 6)
    a = ao_optimize(chs, 1.0, rng=np.random.default_rng(9))
    b = ao_optimize(chs, 1.0, rng=np.random.default_rng(9))
    assert a.objective_trace == b.objective_trace and a.stages == b.stages
    assert np.array_equal(a.final_q, b.final_q) and np.array_equal(a.final_theta, b.final_theta)


@pytest.mark.slow
def test_ao_beats_no_irs_reference_scenario(power_sweep):
    i = P_VALUES.index(2.0)
    wins = np.sum(power_sweep.rates["ao_continuous"][i] > power_sweep.rates["no_irs"][i])
    assert wins >= 95


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_half_step_monotone_and_bounded(seed):
    rng = np.random.default_rng(seed)
    chs = rand_channels(rng, 3, 2, 2, 6, sigma_e2=float(rng.uniform(0.3, 3)))
    p_max = float(rng.uniform(0.2, 5))
    rep = ao_optimize(chs, p_max, rng=rng)
    assert np.all(np.diff(rep.objective_trace) >= -1e-8)
    assert np.all(np.diff(rep.inner_trace) >= -1e-8)
    assert rep.stages[0] == "init" and set(rep.stages[1:]) == {"covariance", "phase"}
    g_tr, _ = effective_channels(chs, rep.final_theta)
    ceiling = np.linalg.slogdet(np.eye(2) + p_max / chs.sigma_r2 * g_tr @ g_tr.conj().T)[1] / math.log(2)
    assert rep.objective_trace[-1] <= ceiling + 1e-9
    assert np.real(np.trace(rep.final_q)) <= p_max * (1 + 1e-6)


def test_objective_tol_stops_early(rng):
    chs = rand_channels(rng, 2, 2, 2, 6)
    full = ao_optimize(chs, 1.0, rng=np.random.default_rng(2))
    loose = ao_optimize(chs, 1.0, AoOptions(objective_tol=0.1), np.random.default_rng(2))
    assert loose.converged and loose.rounds < full.rounds
    assert loose.objective_trace[-1] - loose.objective_trace[-3] <= 0.1


def test_options_validation():
    for bad in ({"theta_tol": 0}, {"max_rounds": 0}, {"q_levels": 1}, {"objective_tol": -1.0}):
        with pytest.raises(ConfigError):
            AoOptions(**bad)


# projection

def test_projection_examples():
    assert project_discrete([np.exp(0.7j)], 2)[0] == 1
    grid = np.exp(2j * np.pi * np.arange(8) / 8)
    np.testing.assert_allclose(project_discrete(grid, 8), grid, atol=1e-15)
    # equidistant from 1 and -1: smaller index wins
    assert project_discrete([1j], 2)[0] == 1
    assert project_discrete([-1j], 2)[0] == 1
    assert project_discrete([np.exp(1j * np.pi / 4)], 4)[0] == 1
    assert abs(project_discrete([np.exp(3j * np.pi / 4)], 4)[0] - 1j) < 1e-15
    with pytest.raises(BadLevelCount):
        project_discrete([1.0], 1)


def test_projection_enumeration(rng):
    levels = np.exp(2j * np.pi * np.arange(2) / 2)
    for _ in range(50):
        theta = rand_unit(rng, 3)
        best = min(itertools.product(levels, repeat=3), key=lambda v: np.sum(np.abs(theta - np.array(v))))
        assert np.array_equal(project_discrete(theta, 2), np.array(best))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0, 2 * math.pi), min_size=1, max_size=8), st.integers(2, 64))
def test_projection_on_grid(phases, q):
    out = project_discrete(np.exp(1j * np.array(phases)), q)
    assert np.max(np.abs(np.abs(out) - 1)) <= 1e-12
    k = np.angle(out) / (2 * math.pi / q)
    assert np.max(np.abs(k - np.round(k))) <= 1e-9


def test_discrete_fine_grid_close_to_continuous(rng):
    for _ in range(3):
        chs = rand_channels(rng, 2, 2, 2, 5)
        cont = ao_optimize(chs, 1.0, rng=np.random.default_rng(4))
        fine = ao_discrete(chs, 1.0, AoOptions(q_levels=4096), np.random.default_rng(4))
        assert abs(fine.secrecy_rate - cont.secrecy_rate) <= 1e-3
        assert fine.stages[-1] == "projection" and fine.q_levels == 4096


def test_projection_rate_not_above_continuous(rng):
    chs = rand_channels(rng, 2, 2, 2, 5)
    cont = ao_optimize(chs, 1.0, rng=np.random.default_rng(4))
    for q in (2, 4, 8):
        disc = discretize_report(cont, chs, 1.0, q)
        assert disc.secrecy_rate <= cont.secrecy_rate + 1e-9
        assert np.array_equal(disc.final_q, cont.final_q)


def test_projection_disconnected_irs(rng):
    chs = disconnected(rng)
    cont = ao_optimize(chs, 1.0, rng=np.random.default_rng(3))
    disc = discretize_report(cont, chs, 1.0, 2)
    assert disc.secrecy_rate == pytest.approx(cont.secrecy_rate, abs=1e-12)


def test_reoptimize_after_projection(rng):
    chs = rand_channels(rng, 2, 2, 2, 5)
    cont = ao_optimize(chs, 1.0, rng=np.random.default_rng(4))
    plain = discretize_report(cont, chs, 1.0, 2)
    again = discretize_report(cont, chs, 1.0, 2, reoptimize=True)
    assert again.stages[-1] == "covariance"
    assert again.secrecy_rate >= plain.secrecy_rate - 1e-12
    assert np.array_equal(again.final_theta, plain.final_theta)
