"""Legitimate, eavesdropper and secrecy rates in bits/s/Hz."""

import numpy as np

from .channel import effective_channels
from .errors import NotPSD, ShapeMismatch
from .numerics import TOL, as_complex_matrix, herm, logdet_hpd

__all__ = ["check_covariance", "rate_legit", "rate_eave", "secrecy_rate", "gram_rate"]

LN2 = np.log(2.0)


def check_covariance(q, p_max=None):
    """Validate a transmit covariance (Hermitian, PSD, optionally within budget)."""
    q = as_complex_matrix(q, "covariance")
    if q.shape[0] != q.shape[1]:
        raise ShapeMismatch("covariance must be square")
    tr = float(np.real(np.trace(q)))
    if np.linalg.norm(q - herm(q)) > TOL.hermitian_rel * max(np.linalg.norm(q), 1e-300):
        raise NotPSD("covariance is not Hermitian")
    w = np.linalg.eigvalsh(0.5 * (q + herm(q)))
    if w[0] < -1e-9 * max(tr, 0.0) - 1e-300:
        raise NotPSD(f"covariance has negative eigenvalue {w[0]:.3e}")
    if p_max is not None and tr > p_max * (1 + 1e-6):
        raise NotPSD(f"trace {tr:.6g} exceeds power budget {p_max:.6g}")
    return q


def gram_rate(g, q, sigma2):
    """``log2 det(I + g q g^H / sigma2)`` without input validation."""
    gram = (g @ q @ herm(g)) / sigma2
    gram = 0.5 * (gram + herm(gram))
    mu = np.linalg.eigvalsh(gram)
    return float(np.sum(np.log1p(np.maximum(mu, -0.5)))) / LN2


def _rate(g, q, sigma2):
    g = as_complex_matrix(g, "channel")
    q = check_covariance(q)
    if g.shape[1] != q.shape[0]:
        raise ShapeMismatch(f"channel {g.shape} does not match covariance {q.shape}")
    if not sigma2 > 0:
        raise ValueError("noise power must be positive")
    return logdet_hpd(np.eye(g.shape[0]) + (g @ q @ herm(g)) / sigma2) / LN2


def rate_legit(g_tr, q, sigma_r2):
    """Achievable rate at the legitimate user."""
    return _rate(g_tr, q, sigma_r2)


def rate_eave(g_te, q, sigma_e2):
    """Achievable rate at the eavesdropper."""
    return _rate(g_te, q, sigma_e2)


def secrecy_rate(chs, theta, q, clamp=False):
    """``R_R - R_E`` at reflection vector ``theta`` (``None`` means no IRS).

    With ``clamp=True`` the result is floored at zero, which is how rates
    are reported. Optimizers work with the unclamped difference.
    """
    if theta is None:
        g_tr, g_te = chs.h_tr, chs.h_te
    else:
        g_tr, g_te = effective_channels(chs, theta)
    value = rate_legit(g_tr, q, chs.sigma_r2) - rate_eave(g_te, q, chs.sigma_e2)
    return max(0.0, value) if clamp else value
