"""Element-wise optimization of the IRS reflection coefficients.

With the covariance ``Q = L L^H`` and all coefficients except ``theta_m``
fixed, the secrecy rate becomes

    log2 det(A_R + t B_R + t* B_R^H) - log2 det(A_E + t B_E + t* B_E^H)

where ``B`` has rank at most one. Dividing out ``det A`` leaves a scalar
function of ``t = theta_m`` for each side. If ``J = A^{-1} B`` has zero
trace, that side is constant. Otherwise it equals
``log2(alpha + beta cos(phi + arg lambda))`` with ``lambda = Tr J``,
``beta = 2 |lambda|`` and ``alpha = 1 + |lambda|^2 (1 - vv)``. The optimum is
closed-form when only one side varies. When both vary it is a ratio of
shifted cosines, whose maximizer lies in a known half-period window; that
window is searched on a grid and then refined by golden section.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import as_reflect_vector
from .errors import IndexOutOfRange, LogDomain, NonUnitModulus, NotPSD, NumericalFailure, OutOfRange, RankTooHigh
from .numerics import TOL, as_complex_matrix, complement_basis, herm, hermitian_evd

__all__ = [
    "IrsOptions",
    "ElementSubproblem",
    "Rank1Spectrum",
    "ThetaReport",
    "covariance_root",
    "element_subproblem",
    "rank1_spectrum",
    "rbar_value",
    "lemma5_interval",
    "optimal_theta_m",
    "optimize_thetas",
]

TWO_PI = 2.0 * math.pi
TRACE_ZERO_REL = 1e-10
RANK_ONE_REL = 1e-9
POSITIVITY_TOL = 1e-9


@dataclass(frozen=True)
class IrsOptions:
    sweep_tol: float = 1e-4
    max_sweeps: int = 50
    phase_grid: int = 2048
    golden_tol: float = 1e-10

    def __post_init__(self):
        if not (self.sweep_tol > 0 and self.max_sweeps >= 1 and self.phase_grid >= 3 and self.golden_tol > 0):
            raise ValueError("invalid IRS sweep options")


@dataclass(frozen=True, eq=False)
class ElementSubproblem:
    a_r: np.ndarray
    a_e: np.ndarray
    b_r: np.ndarray
    b_e: np.ndarray
    j_r: np.ndarray
    j_e: np.ndarray


@dataclass(frozen=True)
class Rank1Spectrum:
    trace_nonzero: bool
    lam: complex = 0j
    vv_product: float = 0.0


@dataclass
class ThetaReport:
    objective_trace: list = field(default_factory=list)
    sweeps: int = 0
    converged: bool = False


def covariance_root(q):
    """``L`` with ``L L^H = q`` built from the eigen-decomposition of ``q``."""
    q = as_complex_matrix(q, "covariance")
    w, u = hermitian_evd(q)
    tr = float(np.sum(w))
    if w[0] < -1e-9 * max(tr, 0.0) - 1e-300:
        raise NotPSD(f"covariance has negative eigenvalue {w[0]:.3e}")
    return u * np.sqrt(np.maximum(w, 0.0))


class _PhaseContext:
    """Channel products shared by every element update for one covariance."""

    def __init__(self, chs, q, theta):
        self.chs = chs
        root = covariance_root(q)
        self.bar_tr = chs.h_tr @ root
        self.bar_te = chs.h_te @ root
        self.bar_ts = chs.h_ts @ root
        self.theta = as_reflect_vector(theta, chs.m).copy()
        self.refresh()

    def refresh(self):
        cascade = self.theta[:, None] * self.bar_ts
        self.g_r = self.bar_tr + self.chs.h_sr @ cascade
        self.g_e = self.bar_te + self.chs.h_se @ cascade

    def subproblem(self, m):
        chs = self.chs
        row = self.bar_ts[m]
        t_r = np.outer(chs.h_sr[:, m], row)
        t_e = np.outer(chs.h_se[:, m], row)
        a_r, b_r = _side(self.g_r - self.theta[m] * t_r, t_r, chs.sigma_r2)
        a_e, b_e = _side(self.g_e - self.theta[m] * t_e, t_e, chs.sigma_e2)
        return ElementSubproblem(
            a_r=a_r, a_e=a_e, b_r=b_r, b_e=b_e,
            j_r=np.linalg.solve(a_r, b_r), j_e=np.linalg.solve(a_e, b_e),
        )

    def set(self, m, value):
        delta = value - self.theta[m]
        row = self.bar_ts[m]
        self.g_r += delta * np.outer(self.chs.h_sr[:, m], row)
        self.g_e += delta * np.outer(self.chs.h_se[:, m], row)
        self.theta[m] = value

    def objective(self):
        chs = self.chs
        return _log2det_gram(self.g_r, chs.sigma_r2) - _log2det_gram(self.g_e, chs.sigma_e2)


def _side(hat, tilde, sigma2):
    n = hat.shape[0]
    a = np.eye(n) + (hat @ herm(hat) + tilde @ herm(tilde)) / sigma2
    return 0.5 * (a + herm(a)), tilde @ herm(hat) / sigma2


def _log2det_gram(g, sigma2):
    gram = np.eye(g.shape[0]) + g @ herm(g) / sigma2
    return float(np.linalg.slogdet(gram)[1]) / math.log(2.0)


def element_subproblem(chs, q, theta, m):
    """Per-element matrices ``A``, ``B`` and ``J = A^{-1} B`` for both receivers."""
    if not 0 <= m < chs.m:
        raise IndexOutOfRange(f"element index {m} outside [0, {chs.m})")
    return _PhaseContext(chs, q, theta).subproblem(m)


def rank1_spectrum(j, a):
    """Nonzero eigenvalue and the ``vv`` product of a rank-one ``J``.

    ``J`` is factored as ``u v^H`` from its dominant singular triplet.
    With the eigenbasis ``U = [u | N]``, ``N`` spanning the complement of
    ``v``, the product is ``vv = V[0, 0] * inv(V)[0, 0]`` for ``V = U^H A U``.
    The first row of ``inv(U)`` is ``v^H / (v^H u)``, so this equals
    ``(u^H A u)(v^H A^{-1} v) / |v^H u|^2``, which is evaluated directly.
    """
    j = as_complex_matrix(j, "J")
    a = as_complex_matrix(a, "A")
    u, s, vh = np.linalg.svd(j)
    if s.size > 1 and s[1] > RANK_ONE_REL * s[0]:
        raise RankTooHigh(f"second singular value {s[1]:.3e} vs first {s[0]:.3e}")
    tr = complex(np.trace(j))
    if abs(tr) <= TRACE_ZERO_REL * max(1.0, float(np.linalg.norm(j))):
        return Rank1Spectrum(False)
    left = u[:, 0]
    right = vh[0].conj()
    u_a_u = np.vdot(left, a @ left)
    v_ai_v = np.vdot(right, np.linalg.solve(a, right))
    prod = u_a_u * v_ai_v / abs(np.vdot(right, left)) ** 2
    if abs(prod.imag) > 1e-9 * max(1.0, abs(prod)):
        raise NumericalFailure(f"vv product is not real: {prod}")
    return Rank1Spectrum(True, tr, float(prod.real))


def _coeffs(spec):
    """``(alpha, beta, phase)`` of ``alpha + beta cos(phi + phase)``."""
    lam = spec.lam
    return 1.0 + abs(lam) ** 2 * (1.0 - spec.vv_product), 2.0 * abs(lam), math.atan2(lam.imag, lam.real)


def _constant_term(a, b, j):
    val = np.linalg.det(np.eye(a.shape[0]) - np.linalg.solve(a, herm(b)) @ j)
    if val.real <= 0:
        raise LogDomain(f"determinant {val} is not positive")
    return math.log2(val.real)


def _side_value(a, b, j, spec, theta_m):
    if not spec.trace_nonzero:
        return _constant_term(a, b, j)
    arg = 1.0 + abs(spec.lam) ** 2 * (1.0 - spec.vv_product) + 2.0 * (theta_m * spec.lam).real
    if arg <= 0:
        raise LogDomain(f"log argument {arg:.3e} is not positive")
    return math.log2(arg)


def rbar_value(sub, specs, theta_m):
    """Reduced secrecy objective for one element at coefficient ``theta_m``."""
    theta_m = complex(theta_m)
    if abs(abs(theta_m) - 1.0) > TOL.unit_modulus:
        raise NonUnitModulus(f"|theta_m| = {abs(theta_m)!r}")
    spec_r, spec_e = specs
    return (_side_value(sub.a_r, sub.b_r, sub.j_r, spec_r, theta_m)
            - _side_value(sub.a_e, sub.b_e, sub.j_e, spec_e, theta_m))


def lemma5_interval(omega):
    """Window containing a maximizer of ``(a + b cos x) / (c + d cos(x + omega))``.

    Valid for ``a > b > 0`` and ``c > d > 0``. Returns ``[0, pi - omega]`` for
    ``omega`` in ``[0, pi)`` and ``[3 pi - omega, 2 pi]`` for ``omega`` in
    ``[pi, 2 pi)``.
    """
    if not 0.0 <= omega < TWO_PI:
        raise OutOfRange(f"omega={omega} outside [0, 2 pi)")
    if omega < math.pi:
        return 0.0, math.pi - omega
    return 3.0 * math.pi - omega, TWO_PI


def _golden_max(f, lo, hi, tol):
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - inv_phi * (hi - lo)
    d = lo + inv_phi * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - inv_phi * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + inv_phi * (hi - lo)
            fd = f(d)
    return 0.5 * (lo + hi)


def _ratio_search(coef_r, coef_e, opts):
    a_r, b_r, ph_r = coef_r
    a_e, b_e, ph_e = coef_e
    if not (a_r - b_r > -POSITIVITY_TOL and b_r > 0 and a_e - b_e > -POSITIVITY_TOL and b_e > 0):
        raise LogDomain(f"need alpha > beta > 0, got R=({a_r:.3e}, {b_r:.3e}) E=({a_e:.3e}, {b_e:.3e})")
    omega = (ph_e - ph_r) % TWO_PI
    if omega >= TWO_PI:
        omega = 0.0
    lo, hi = lemma5_interval(omega)

    def f(x):
        return (a_r + b_r * math.cos(x)) / (a_e + b_e * math.cos(x + omega))

    xs = np.linspace(lo, hi, opts.phase_grid)
    vals = (a_r + b_r * np.cos(xs)) / (a_e + b_e * np.cos(xs + omega))
    i = int(np.argmax(vals))
    x_best, f_best = float(xs[i]), float(vals[i])
    x_ref = _golden_max(f, float(xs[max(i - 1, 0)]), float(xs[min(i + 1, xs.size - 1)]), opts.golden_tol)
    if f(x_ref) > f_best:
        x_best = x_ref
    # x is measured relative to -arg(lambda_R)
    return x_best - ph_r


def optimal_theta_m(sub, opts=None, current=None):
    """Best unit-modulus coefficient for one element; returns ``(theta, value)``.

    When neither side depends on the coefficient every unit value is
    optimal. ``current`` is then kept if given, otherwise 1 is returned.
    """
    opts = opts or IrsOptions()
    spec_r = rank1_spectrum(sub.j_r, sub.a_r)
    spec_e = rank1_spectrum(sub.j_e, sub.a_e)
    if not spec_r.trace_nonzero and not spec_e.trace_nonzero:
        theta = complex(current) if current is not None else 1.0 + 0j
    elif not spec_e.trace_nonzero:
        theta = complex(np.exp(-1j * np.angle(spec_r.lam)))
    elif not spec_r.trace_nonzero:
        theta = complex(np.exp(1j * (math.pi - np.angle(spec_e.lam))))
    else:
        phi = _ratio_search(_coeffs(spec_r), _coeffs(spec_e), opts)
        theta = complex(np.exp(1j * phi))
    theta /= abs(theta)
    return theta, rbar_value(sub, (spec_r, spec_e), theta)


def optimize_thetas(chs, q, theta0, opts=None):
    """Cyclic element-wise ascent over the reflection vector for fixed ``q``.

    Sweeps ``m = 0 .. M-1`` until the total coefficient movement of a sweep
    is at most ``opts.sweep_tol`` or ``opts.max_sweeps`` is reached.
    ``report.objective_trace`` holds the secrecy rate before the first update
    and after every single-element update.
    """
    opts = opts or IrsOptions()
    ctx = _PhaseContext(chs, q, theta0)
    report = ThetaReport(objective_trace=[ctx.objective()])
    for _ in range(opts.max_sweeps):
        before = ctx.theta.copy()
        for m in range(chs.m):
            theta_m, _ = optimal_theta_m(ctx.subproblem(m), opts, current=ctx.theta[m])
            ctx.set(m, theta_m)
            report.objective_trace.append(ctx.objective())
        ctx.refresh()
        report.sweeps += 1
        if np.sum(np.abs(ctx.theta - before)) <= opts.sweep_tol:
            report.converged = True
            break
    return ctx.theta.copy(), report
