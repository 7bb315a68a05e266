"""Dense complex linear algebra on numpy arrays.

Operators are plain ``complex128`` ndarrays. Hermitian and unitary checks use
the Frobenius norm throughout.
"""
import numpy as np

from superselect import _backend
from superselect.errors import DimMismatch, NotHermitian, NotUnitary

HERMITIAN_RTOL = 1e-12
UNITARY_TOL = 1e-10


def as_matrix(x):
    a = np.asarray(x, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise DimMismatch(f"expected a non-empty square matrix, got shape {a.shape}")
    return a


def fro(x):
    return float(np.linalg.norm(x))


def dagger(x):
    return np.conj(np.transpose(x))


def hermiticity_defect(x):
    """Relative distance ``||x - x^dagger|| / max(1, ||x||)``."""
    x = as_matrix(x)
    return fro(x - dagger(x)) / max(1.0, fro(x))


def is_hermitian(x, rtol=HERMITIAN_RTOL):
    return hermiticity_defect(x) <= rtol


def unitarity_defect(x):
    x = as_matrix(x)
    return fro(dagger(x) @ x - np.eye(x.shape[0]))


def is_unitary(x, tol=UNITARY_TOL):
    return unitarity_defect(x) <= tol


def require_hermitian(x, name="operator"):
    x = as_matrix(x)
    defect = hermiticity_defect(x)
    if defect > HERMITIAN_RTOL:
        raise NotHermitian(f"{name} is not Hermitian (defect {defect:.3e})")
    return x


def require_unitary(x, name="operator"):
    x = as_matrix(x)
    defect = unitarity_defect(x)
    if defect > UNITARY_TOL:
        raise NotUnitary(f"{name} is not unitary (defect {defect:.3e})")
    return x


def kron(a, b):
    """Tensor product ``a (x) b``; the first factor is the slow index."""
    return np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128))


def eig_hermitian(a):
    """Ascending eigenvalues and unitary eigenvector matrix of a Hermitian matrix.

    Runs on the active kernel backend (compiled cyclic Jacobi, or LAPACK
    through numpy in the fallback).
    """
    a = require_hermitian(a)
    # symmetrize so both backends see an exactly Hermitian input
    w, v = _backend.eigh(0.5 * (a + dagger(a)))
    return np.asarray(w, dtype=np.float64), np.asarray(v)


def expi(h, s):
    """``exp(i h s)`` for Hermitian ``h`` (hbar = 1)."""
    h = require_hermitian(h)
    return _backend.expi(0.5 * (h + dagger(h)), float(s))


def random_hermitian(dim, rng, scale=1.0):
    x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * 0.5 * (x + dagger(x))


def random_unitary(dim, rng):
    """Haar-distributed unitary (QR of a complex Ginibre matrix with phase fix)."""
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_state(dim, rng):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)
