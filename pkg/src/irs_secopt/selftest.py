"""Brute-force oracle suites that back the closed-form solvers.

Each suite draws its own random instances from a seeded generator, so two
runs with the same seed give the same pass/fail vector.
"""

import itertools
import math
import time

import numpy as np

from .alternating import project_discrete
from .channel import ChannelSet
from .irsopt import IrsOptions, element_subproblem, lemma5_interval, optimal_theta_m
from .secrecy import LN2
from .txcov import ScaOptions, dual_solve, kkt_residual

SCALES = {
    "quick": {"phase": 20, "phase_grid": 10_000, "projection": 50, "kkt": 20, "interval": 200, "interval_grid": 10_000},
    "full": {"phase": 200, "phase_grid": 10_000, "projection": 200, "kkt": 50, "interval": 1000, "interval_grid": 100_000},
}


def _cn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def random_channels(rng, n_t=2, n_r=2, n_e=2, m=4, sigma2=1.0):
    return ChannelSet(
        h_tr=_cn(rng, n_r, n_t), h_te=_cn(rng, n_e, n_t), h_sr=_cn(rng, n_r, m),
        h_se=_cn(rng, n_e, m), h_ts=_cn(rng, m, n_t), sigma_r2=sigma2, sigma_e2=sigma2,
    )


def random_covariance(rng, n, p_max):
    x = _cn(rng, n, n)
    q = x @ x.conj().T
    return q * (p_max * rng.uniform(0.2, 1.0) / np.real(np.trace(q)))


def grid_secrecy(chs, q, theta, m, phases):
    """Secrecy rate with ``theta[m]`` swept over ``phases``, by direct log-det."""
    out = np.zeros(phases.size)
    for h_s, h_d, s2, sign in ((chs.h_sr, chs.h_tr, chs.sigma_r2, 1.0), (chs.h_se, chs.h_te, chs.sigma_e2, -1.0)):
        base = h_d + (h_s * np.where(np.arange(chs.m) == m, 0.0, theta)) @ chs.h_ts
        g = base[None] + np.exp(1j * phases)[:, None, None] * np.outer(h_s[:, m], chs.h_ts[m])[None]
        w = np.eye(g.shape[1]) + g @ q @ np.conj(np.swapaxes(g, 1, 2)) / s2
        out += sign * np.linalg.slogdet(w)[1] / LN2
    return out


def suite_phase(rng, n, grid):
    opts = IrsOptions()
    phases = np.linspace(0.0, 2 * math.pi, grid, endpoint=False)
    ok = []
    for _ in range(n):
        chs = random_channels(rng)
        q = random_covariance(rng, chs.n_t, 1.0)
        theta = np.exp(1j * rng.uniform(0, 2 * math.pi, chs.m))
        m = int(rng.integers(chs.m))
        t_opt, _ = optimal_theta_m(element_subproblem(chs, q, theta, m), opts)
        best = grid_secrecy(chs, q, theta, m, phases).max()
        got = grid_secrecy(chs, q, theta, m, np.array([np.angle(t_opt)]))[0]
        ok.append(bool(got >= best - 1e-6))
    return ok


def suite_projection(rng, n):
    ok = []
    for _ in range(n):
        m, levels = int(rng.integers(1, 4)), int(rng.choice([2, 4, 8]))
        theta = np.exp(1j * rng.uniform(0, 2 * math.pi, m))
        grid = np.exp(2j * math.pi * np.arange(levels) / levels)
        best = min(itertools.product(range(levels), repeat=m),
                   key=lambda idx: float(np.sum(np.abs(theta - grid[list(idx)]) ** 2)))
        ok.append(bool(np.array_equal(project_discrete(theta, levels), grid[list(best)])))
    return ok


def suite_kkt(rng, n):
    opts = ScaOptions()
    ok = []
    for _ in range(n):
        n_t = int(rng.integers(2, 5))
        g_tr, g_te = _cn(rng, int(rng.integers(1, 5)), n_t), _cn(rng, int(rng.integers(1, 5)), n_t)
        p_max = float(rng.uniform(0.1, 10.0))
        q_tilde = random_covariance(rng, n_t, p_max)
        q, lam = dual_solve(g_tr, g_te, q_tilde, 1.0, 1.0, p_max, opts)
        tr = float(np.real(np.trace(q)))
        res = kkt_residual(q, lam, g_tr, g_te, q_tilde, 1.0, 1.0)
        ok.append(bool(
            res <= 1e-6 * max(1.0, lam)
            and tr <= p_max * (1 + 1e-9)
            and abs(lam * (tr - p_max)) <= 1e-6 * max(1.0, lam * p_max)
            and np.linalg.eigvalsh(q)[0] >= -1e-9 * tr
        ))
    return ok


def suite_interval(rng, n, grid):
    ok = []
    xs = np.linspace(0.0, 2 * math.pi, grid, endpoint=False)
    step = xs[1] - xs[0]
    for _ in range(n):
        b, d = rng.uniform(0.01, 5.0, 2)
        a, c = b + rng.uniform(1e-3, 5.0), d + rng.uniform(1e-3, 5.0)
        omega = float(rng.uniform(0, 2 * math.pi))
        x = xs[int(np.argmax((a + b * np.cos(xs)) / (c + d * np.cos(xs + omega))))]
        lo, hi = lemma5_interval(omega)
        ok.append(bool(lo - step <= x <= hi + step))
    return ok


def run_selftest(scale="quick", seed=0, stream=None):
    """Run every suite; returns ``{suite: [bool, ...]}``."""
    if scale not in SCALES:
        raise ValueError(f"scale must be one of {sorted(SCALES)}")
    cfg = SCALES[scale]
    suites = {
        "phase_grid_vs_closed_form": lambda r: suite_phase(r, cfg["phase"], cfg["phase_grid"]),
        "projection_enumeration": lambda r: suite_projection(r, cfg["projection"]),
        "kkt_residuals": lambda r: suite_kkt(r, cfg["kkt"]),
        "interval_property": lambda r: suite_interval(r, cfg["interval"], cfg["interval_grid"]),
    }
    results = {}
    for k, (name, fn) in enumerate(suites.items()):
        start = time.perf_counter()
        results[name] = fn(np.random.default_rng([seed, k]))
        if stream is not None:
            passed = sum(results[name])
            print(f"{name}: {passed}/{len(results[name])} passed ({time.perf_counter() - start:.1f} s)", file=stream)
    return results
