"""Transmit covariance optimization for a fixed reflection vector.

The secrecy objective is a difference of two log-det terms. Successive
convex approximation keeps the legitimate term and linearizes the
eavesdropper term at the current iterate. Each convex surrogate is solved
through its Lagrange dual. For fixed multiplier ``lam`` the inner problem

    max_{Q >= 0}  log2 det(I + G Q G^H / s2) - Tr((K + lam I) Q)

has a closed form. Substitute ``X = K^{1/2} Q K^{1/2}`` and take the SVD of
``G K^{-1/2} / s``, which has singular values ``s_i``. The optimal ``X``
shares the right singular vectors with powers ``p_i = max(0, 1/ln 2 - 1/s_i^2)``.
``Tr Q(lam)`` is non-increasing in ``lam``, so the multiplier is found by
a bracketing root search.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import optimize

from .channel import effective_channels
from .errors import BracketingFailure, NotPositiveDefinite
from .numerics import TOL, as_complex_matrix, herm, hermitian_evd
from .secrecy import LN2, check_covariance, gram_rate

__all__ = [
    "ScaOptions",
    "ScaReport",
    "price_matrix",
    "linearized_secrecy",
    "inner_waterfill",
    "dual_solve",
    "kkt_residual",
    "sca_covariance",
    "sca_optimize",
]


@dataclass(frozen=True)
class ScaOptions:
    outer_tol: float = 1e-5
    max_outer_iters: int = 100
    dual_tol: Optional[float] = None  # None -> 1e-6 * p_max
    lambda_max_init: float = 1.0
    lambda_growth: float = 10.0
    pd_floor: float = 1e-12
    dual_method: str = "bisection"  # or "subgradient"
    subgradient_iters: int = 400
    lambda0: float = 1.0

    def __post_init__(self):
        for name in ("outer_tol", "max_outer_iters", "lambda_max_init", "pd_floor",
                     "subgradient_iters", "lambda0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.dual_tol is not None and not self.dual_tol > 0:
            raise ValueError("dual_tol must be positive")
        if not self.lambda_growth > 1:
            raise ValueError("lambda_growth must exceed 1")
        if self.dual_method not in ("bisection", "subgradient"):
            raise ValueError(f"unknown dual_method {self.dual_method!r}")


@dataclass
class ScaReport:
    objective_trace: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    lambda_: float = 0.0


def price_matrix(g_te, q_tilde, sigma_e2):
    """Gradient of the eavesdropper rate at ``q_tilde`` (in bits per watt)."""
    w_e = np.eye(g_te.shape[0]) + (g_te @ q_tilde @ herm(g_te)) / sigma_e2
    k = herm(g_te) @ np.linalg.solve(w_e, g_te) / (sigma_e2 * LN2)
    return 0.5 * (k + herm(k))


def linearized_secrecy(q, q_tilde, g_tr, g_te, sigma_r2, sigma_e2):
    """Concave surrogate of the secrecy rate, expanded at ``q_tilde``."""
    q = check_covariance(q)
    q_tilde = check_covariance(q_tilde)
    g_tr = as_complex_matrix(g_tr)
    g_te = as_complex_matrix(g_te)
    k = price_matrix(g_te, q_tilde, sigma_e2)
    return (
        gram_rate(g_tr, q, sigma_r2)
        - gram_rate(g_te, q_tilde, sigma_e2)
        - float(np.real(np.trace(k @ (q - q_tilde))))
    )


class _WaterFiller:
    """Closed-form inner solver for a fixed price matrix, reused across ``lam``."""

    def __init__(self, g_tr, k_vals, k_vecs, sigma_r2, pd_floor):
        self.g = g_tr / math.sqrt(sigma_r2)
        self.k_vals = k_vals
        self.k_vecs = k_vecs
        self.pd_floor = pd_floor

    def solve(self, lam):
        k = self.k_vals + lam
        if k[0] <= self.pd_floor:
            raise NotPositiveDefinite(f"price matrix eigenvalue {k[0]:.3e} is not positive")
        k_mhalf = (self.k_vecs * (1.0 / np.sqrt(k))) @ herm(self.k_vecs)
        _, s, vh = np.linalg.svd(self.g @ k_mhalf, full_matrices=False)
        with np.errstate(divide="ignore"):
            p = np.where(s > 0, 1.0 / LN2 - 1.0 / np.maximum(s, 1e-300) ** 2, 0.0)
        p = np.maximum(p, 0.0)
        b = k_mhalf @ herm(vh)
        q = (b * p) @ herm(b)
        return 0.5 * (q + herm(q))

    def trace(self, lam):
        return float(np.real(np.trace(self.solve(lam))))


def inner_waterfill(g_tr, k, sigma_r2, pd_floor=TOL.pd_floor):
    """Maximize ``log2 det(I + G Q G^H / s2) - Tr(K Q)`` over ``Q >= 0``."""
    g_tr = as_complex_matrix(g_tr)
    evd = hermitian_evd(k)
    return _WaterFiller(g_tr, evd.eigenvalues, evd.eigenvectors, sigma_r2, pd_floor).solve(0.0)


def _fit_budget(q, p_max):
    tr = float(np.real(np.trace(q)))
    if tr > p_max:
        q = q * (p_max / tr)
    return q


def dual_solve(g_tr, g_te, q_tilde, sigma_r2, sigma_e2, p_max, opts=None):
    """Solve the linearized problem under ``Tr Q <= p_max``; return ``(Q, lam)``."""
    opts = opts or ScaOptions()
    g_tr, g_te = as_complex_matrix(g_tr, "g_tr"), as_complex_matrix(g_te, "g_te")
    q_tilde = as_complex_matrix(q_tilde, "q_tilde")
    k_e = price_matrix(g_te, q_tilde, sigma_e2)
    k_vals, k_vecs = np.linalg.eigh(k_e)
    k_vals = np.maximum(k_vals, 0.0)
    wf = _WaterFiller(g_tr, k_vals, k_vecs, sigma_r2, opts.pd_floor)

    if k_vals[0] > opts.pd_floor:
        q0 = wf.solve(0.0)
        if np.real(np.trace(q0)) <= p_max:
            return q0, 0.0
    if opts.dual_method == "subgradient":
        return _subgradient(wf, p_max, opts)

    hi = opts.lambda_max_init
    grown = 0
    while wf.trace(hi) > p_max:
        grown += 1
        if grown > 60:
            raise BracketingFailure(f"Tr Q(lam) still above budget at lam={hi:.3e}")
        hi *= opts.lambda_growth
    if grown:
        lo = hi / opts.lambda_growth
    else:
        lo = hi
        for _ in range(60):
            lo /= opts.lambda_growth
            if wf.trace(lo) > p_max:
                break
        else:
            # budget is slack even as lam -> 0+
            return _fit_budget(wf.solve(lo), p_max), 0.0

    t = optimize.brentq(
        lambda t: wf.trace(math.exp(t)) - p_max,
        math.log(lo), math.log(hi), xtol=1e-13, rtol=4 * np.finfo(float).eps, maxiter=200,
    )
    lam = math.exp(t)
    return _fit_budget(wf.solve(lam), p_max), lam


def _subgradient(wf, p_max, opts):
    # diminishing step lambda0 / sqrt(k) on the normalized power violation
    lam = opts.lambda0
    best = None
    for it in range(1, opts.subgradient_iters + 1):
        q = wf.solve(lam)
        excess = (float(np.real(np.trace(q))) - p_max) / p_max
        if excess <= 0 and (best is None or abs(excess) < best[2]):
            best = (q, lam, abs(excess))
        lam = max(lam + opts.lambda0 / math.sqrt(it) * excess, opts.pd_floor * 10)
    if best is None:
        return _fit_budget(wf.solve(lam), p_max), lam
    return best[0], best[1]


def kkt_residual(q, lam, g_tr, g_te, q_tilde, sigma_r2, sigma_e2):
    """Largest violation of the surrogate's KKT conditions at ``(q, lam)``.

    The gradient ``D`` of the Lagrangian must be negative semidefinite and
    orthogonal to ``q`` (``D Q = 0``). Returns the maximum of the positive
    part of ``lambda_max(D)`` and ``||D Q||_F``.
    """
    w_r = np.eye(g_tr.shape[0]) + (g_tr @ q @ herm(g_tr)) / sigma_r2
    grad = herm(g_tr) @ np.linalg.solve(w_r, g_tr) / (sigma_r2 * LN2)
    d = grad - price_matrix(g_te, q_tilde, sigma_e2) - lam * np.eye(q.shape[0])
    d = 0.5 * (d + herm(d))
    return max(float(np.linalg.eigvalsh(d)[-1]), 0.0, float(np.linalg.norm(d @ q)))


def _objective(g_tr, g_te, q, sigma_r2, sigma_e2):
    return gram_rate(g_tr, q, sigma_r2) - gram_rate(g_te, q, sigma_e2)


def sca_covariance(g_tr, g_te, sigma_r2, sigma_e2, p_max, q0=None, opts=None):
    """SCA loop on explicit effective channels; returns ``(Q, ScaReport)``."""
    opts = opts or ScaOptions()
    g_tr, g_te = as_complex_matrix(g_tr, "g_tr"), as_complex_matrix(g_te, "g_te")
    n_t = g_tr.shape[1]
    q_t = (p_max / n_t) * np.eye(n_t, dtype=np.complex128) if q0 is None else check_covariance(q0, p_max)
    r_t = _objective(g_tr, g_te, q_t, sigma_r2, sigma_e2)
    report = ScaReport(objective_trace=[r_t])
    for _ in range(opts.max_outer_iters):
        q_new, lam = dual_solve(g_tr, g_te, q_t, sigma_r2, sigma_e2, p_max, opts)
        report.iterations += 1
        r_new = _objective(g_tr, g_te, q_new, sigma_r2, sigma_e2)
        if r_new < r_t:
            # surrogate ascent is exact up to rounding; a drop means no progress left
            report.converged = True
            break
        q_t, report.lambda_ = q_new, lam
        report.objective_trace.append(r_new)
        if r_new - r_t <= opts.outer_tol:
            report.converged = True
            r_t = r_new
            break
        r_t = r_new
    return q_t, report


def sca_optimize(chs, theta, p_max, q0=None, opts=None):
    """Optimize the covariance for reflection vector ``theta`` (``None``: no IRS)."""
    if theta is None:
        g_tr, g_te = chs.h_tr, chs.h_te
    else:
        g_tr, g_te = effective_channels(chs, theta)
    return sca_covariance(g_tr, g_te, chs.sigma_r2, chs.sigma_e2, p_max, q0, opts)
