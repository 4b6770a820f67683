"""Alternating optimization of the covariance and the reflection vector."""

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .channel import as_reflect_vector, random_theta
from .errors import BadLevelCount, ConfigError
from .irsopt import IrsOptions, optimize_thetas
from .secrecy import secrecy_rate
from .txcov import ScaOptions, sca_optimize

__all__ = [
    "AoOptions",
    "OptimizerReport",
    "ao_optimize",
    "project_discrete",
    "discretize_report",
    "ao_discrete",
]


@dataclass(frozen=True)
class AoOptions:
    theta_tol: float = 1e-4
    max_rounds: int = 30
    sca: ScaOptions = field(default_factory=ScaOptions)
    irs: IrsOptions = field(default_factory=IrsOptions)
    q_levels: int = 0
    reoptimize_q_after_projection: bool = False
    objective_tol: Optional[float] = None

    def __post_init__(self):
        if not self.theta_tol > 0:
            raise ConfigError("theta_tol must be positive")
        if self.max_rounds < 1:
            raise ConfigError("max_rounds must be >= 1")
        if self.q_levels != 0 and self.q_levels < 2:
            raise ConfigError("q_levels must be 0 (continuous) or >= 2")
        if self.objective_tol is not None and not self.objective_tol > 0:
            raise ConfigError("objective_tol must be positive")


@dataclass(eq=False)
class OptimizerReport:
    objective_trace: list
    stages: list
    rounds: int
    converged: bool
    final_q: np.ndarray
    final_theta: np.ndarray
    secrecy_rate: float
    secrecy_rate_clamped: float
    q_levels: int = 0
    wall_time: float = 0.0
    # every SCA iterate and every single-element phase update, in order
    inner_trace: list = field(default_factory=list)

    def summary(self):
        return {
            "secrecy_rate_bps_hz": float(self.secrecy_rate_clamped),
            "unclamped_rate_bps_hz": float(self.secrecy_rate),
            "rounds": self.rounds,
            "converged": self.converged,
            "q_levels": self.q_levels,
            "power_used_w": float(np.real(np.trace(self.final_q))),
            "wall_time_s": self.wall_time,
        }


def ao_optimize(chs, p_max, opts=None, rng=None):
    """Alternate covariance SCA and element-wise phase updates.

    The reflection vector starts from uniform random phases drawn from
    ``rng`` and the covariance from ``(p_max / N_T) I``. Each round warm-starts
    the SCA at the previous covariance. The loop stops once a round moves the
    coefficients by at most ``theta_tol`` in total (sum of absolute changes).
    """
    opts = opts or AoOptions()
    rng = rng if rng is not None else np.random.default_rng()
    start = time.perf_counter()
    theta = random_theta(chs.m, rng)
    q = (p_max / chs.n_t) * np.eye(chs.n_t, dtype=np.complex128)
    trace = [secrecy_rate(chs, theta, q)]
    stages = ["init"]
    inner = [trace[0]]
    converged = False
    rounds = 0
    for _ in range(opts.max_rounds):
        rounds += 1
        q, sca_rep = sca_optimize(chs, theta, p_max, q0=q, opts=opts.sca)
        trace.append(secrecy_rate(chs, theta, q))
        stages.append("covariance")
        new_theta, th_rep = optimize_thetas(chs, q, theta, opts.irs)
        inner.extend(sca_rep.objective_trace[1:] + th_rep.objective_trace[1:])
        trace.append(secrecy_rate(chs, new_theta, q))
        stages.append("phase")
        moved = float(np.sum(np.abs(new_theta - theta)))
        theta = new_theta
        if moved <= opts.theta_tol:
            converged = True
            break
        if opts.objective_tol is not None and trace[-1] - trace[-3] <= opts.objective_tol:
            converged = True
            break
    return OptimizerReport(
        objective_trace=trace,
        stages=stages,
        rounds=rounds,
        converged=converged,
        final_q=q,
        final_theta=theta,
        secrecy_rate=trace[-1],
        secrecy_rate_clamped=max(0.0, trace[-1]),
        wall_time=time.perf_counter() - start,
        inner_trace=inner,
    )


def project_discrete(theta, q_levels):
    """Map each coefficient to the nearest point of the ``q_levels``-phase grid.

    Nearest means smallest chordal distance, which on the unit circle is the
    smallest angular distance. Working in grid units keeps exact ties
    exact. Ties go to the smaller grid index.
    """
    if int(q_levels) != q_levels or q_levels < 2:
        raise BadLevelCount(f"need at least 2 phase levels, got {q_levels}")
    q_levels = int(q_levels)
    theta = as_reflect_vector(theta)
    pos = np.mod(np.angle(theta), 2 * np.pi) * (q_levels / (2 * np.pi))
    lo = np.floor(pos)
    frac = pos - lo
    lo = lo.astype(int) % q_levels
    hi = (lo + 1) % q_levels
    idx = np.where(frac < 0.5, lo, np.where(frac > 0.5, hi, np.minimum(lo, hi)))
    return np.exp(2j * np.pi * idx / q_levels)


def discretize_report(report, chs, p_max, q_levels, reoptimize=False, sca_opts=None):
    """Project a converged continuous solution onto the discrete phase grid."""
    start = time.perf_counter()
    theta = project_discrete(report.final_theta, q_levels)
    q = report.final_q
    trace = list(report.objective_trace) + [secrecy_rate(chs, theta, q)]
    stages = list(report.stages) + ["projection"]
    if reoptimize:
        q, _ = sca_optimize(chs, theta, p_max, q0=q, opts=sca_opts)
        trace.append(secrecy_rate(chs, theta, q))
        stages.append("covariance")
    return OptimizerReport(
        objective_trace=trace,
        stages=stages,
        rounds=report.rounds,
        converged=report.converged,
        final_q=q,
        final_theta=theta,
        secrecy_rate=trace[-1],
        secrecy_rate_clamped=max(0.0, trace[-1]),
        q_levels=q_levels,
        wall_time=report.wall_time + time.perf_counter() - start,
        inner_trace=list(report.inner_trace),
    )


def ao_discrete(chs, p_max, opts, rng=None):
    """Continuous alternating optimization followed by phase projection."""
    if opts.q_levels < 2:
        raise BadLevelCount("ao_discrete needs q_levels >= 2")
    cont = ao_optimize(chs, p_max, opts, rng)
    return discretize_report(
        cont, chs, p_max, opts.q_levels, opts.reoptimize_q_after_projection, opts.sca
    )
