"""Small dense complex linear-algebra primitives.

Every matrix in the package is a 2-D ``complex128`` :class:`numpy.ndarray`;
:func:`as_complex_matrix` is the single validation gate. Tolerances used
by the checks live in :data:`TOL`.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    NotHermitian,
    NotPositiveDefinite,
    NumericalFailure,
    ShapeMismatch,
    ZeroVector,
)

__all__ = [
    "TOL",
    "Tolerances",
    "EvdResult",
    "as_complex_matrix",
    "herm",
    "hermitian_evd",
    "logdet_hpd",
    "complement_basis",
]


@dataclass(frozen=True)
class Tolerances:
    hermitian_rel: float = 1e-9
    pd_floor: float = 1e-12
    reconstruction: float = 1e-10
    zero_vector: float = 1e-12
    unit_modulus: float = 1e-12


TOL = Tolerances()


class EvdResult(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def herm(a):
    """Conjugate transpose."""
    return a.conj().T


def as_complex_matrix(a, name="matrix"):
    """Return ``a`` as a finite 2-D complex array, raising on bad input."""
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeMismatch(f"{name} must be a non-empty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return arr


def _check_hermitian(m, name="matrix"):
    if m.shape[0] != m.shape[1]:
        raise ShapeMismatch(f"{name} must be square, got {m.shape}")
    norm = np.linalg.norm(m)
    if np.linalg.norm(m - herm(m)) > TOL.hermitian_rel * norm:
        raise NotHermitian(f"{name} is not Hermitian")


def _fix_phase(vecs):
    # first non-negligible entry of every column made real-positive
    out = vecs.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        scale = np.max(np.abs(col))
        idx = np.flatnonzero(np.abs(col) > 1e-8 * scale)
        if idx.size:
            first = col[idx[0]]
            out[:, k] = col * (np.conj(first) / abs(first))
    return out


def hermitian_evd(m):
    """Eigen-decomposition of a Hermitian matrix.

    Eigenvalues are returned in ascending order. The eigenvector columns
    are orthonormal, and each one is rotated so that its first
    non-negligible entry is real and positive.

    Raises
    ------
    NotHermitian
        If ``||m - m^H||_F`` exceeds ``1e-9 * ||m||_F``.
    NumericalFailure
        If LAPACK fails to converge.
    """
    m = as_complex_matrix(m)
    _check_hermitian(m)
    try:
        w, v = np.linalg.eigh(0.5 * (m + herm(m)))
    except np.linalg.LinAlgError as exc:  # pragma: no cover - backend failure
        raise NumericalFailure(str(exc)) from exc
    return EvdResult(w, _fix_phase(v))


def logdet_hpd(m):
    """Natural log-determinant of a Hermitian positive-definite matrix."""
    m = as_complex_matrix(m)
    _check_hermitian(m)
    w = np.linalg.eigvalsh(0.5 * (m + herm(m)))
    if w[0] <= TOL.pd_floor:
        raise NotPositiveDefinite(f"smallest eigenvalue {w[0]:.3e} is not above {TOL.pd_floor}")
    return float(np.sum(np.log(w)))


def complement_basis(b):
    """Orthonormal basis (``n x (n-1)``) of the orthogonal complement of ``b``."""
    b = np.asarray(b, dtype=np.complex128).ravel()
    if np.linalg.norm(b) <= TOL.zero_vector:
        raise ZeroVector("cannot complete a basis around a zero vector")
    # rows 1.. of vh are orthogonal to vh[0], which is parallel to b^H
    _, _, vh = np.linalg.svd(b.conj()[None, :])
    return vh[1:].conj().T
