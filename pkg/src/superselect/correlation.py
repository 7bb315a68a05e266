"""Perfect correlation (Ozawa equality) of two observables in a vector state.

Two independent routes are provided: comparing spectral projectors applied
to the state, and comparing the compressions of the operators to the cyclic
subspace generated from the state (the GNS representation).
"""
from dataclasses import dataclass

import numpy as np

from superselect import linops
from superselect.algebra import CLUSTER_ABS_TOL, CLUSTER_REL_TOL, cluster_values
from superselect.errors import DimMismatch, NotNormalized

NORM_TOL = 1e-10
DROP_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Atoms ``(eigenvalue, projector)`` sorted by eigenvalue."""

    atoms: tuple
    source_dim: int

    @property
    def eigenvalues(self):
        return [lam for lam, _ in self.atoms]

    def reconstruct(self):
        out = np.zeros((self.source_dim, self.source_dim), dtype=np.complex128)
        for lam, p in self.atoms:
            out += lam * p
        return out

    def subset_projector(self, indices):
        """Projector of a spectral set made of the atoms at ``indices``."""
        out = np.zeros((self.source_dim, self.source_dim), dtype=np.complex128)
        for k in indices:
            out += self.atoms[k][1]
        return out


def spectral_decompose(a, cluster_tol=CLUSTER_ABS_TOL, rel_tol=CLUSTER_REL_TOL):
    w, v = linops.eig_hermitian(a)
    atoms = []
    for idx in cluster_values(w, cluster_tol, rel_tol):
        cols = v[:, idx]
        atoms.append((float(np.mean(w[idx])), cols @ linops.dagger(cols)))
    return SpectralDecomposition(tuple(atoms), len(w))


@dataclass(frozen=True)
class CorrelationReport:
    equal: bool
    worst_atom_residual: float
    merged_spectrum: tuple
    state_norm: float
    tolerance: float


def _check_state(psi, dim):
    psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
    if psi.shape[0] != dim:
        raise DimMismatch(f"state of length {psi.shape[0]} for operators of dim {dim}")
    norm = float(np.linalg.norm(psi))
    if abs(norm - 1.0) > NORM_TOL:
        raise NotNormalized(f"state norm {norm!r} differs from 1")
    return psi, norm


def perfect_correlation(a, b, psi, tol=1e-9, cluster_tol=CLUSTER_ABS_TOL, rel_tol=CLUSTER_REL_TOL):
    """Compare ``E^a({lam}) psi`` with ``E^b({lam}) psi`` on the joint spectrum.

    In finite dimensions every spectral set is a finite union of atoms, so
    checking the atoms of the jointly clustered spectrum is sufficient.
    """
    a = linops.require_hermitian(a, "first observable")
    b = linops.require_hermitian(b, "second observable")
    if a.shape != b.shape:
        raise DimMismatch(f"observables of shapes {a.shape} and {b.shape}")
    psi, norm = _check_state(psi, a.shape[0])

    wa, va = linops.eig_hermitian(a)
    wb, vb = linops.eig_hermitian(b)
    # components of psi along each eigenvector
    ca = linops.dagger(va) @ psi
    cb = linops.dagger(vb) @ psi

    joint = np.concatenate([wa, wb])
    na = len(wa)
    merged, worst = [], 0.0
    for idx in cluster_values(joint, cluster_tol, rel_tol):
        ia = idx[idx < na]
        ib = idx[idx >= na] - na
        pa = va[:, ia] @ ca[ia] if ia.size else 0.0
        pb = vb[:, ib] @ cb[ib] if ib.size else 0.0
        residual = float(np.linalg.norm(pa - pb))
        worst = max(worst, residual)
        merged.append(float(np.mean(joint[idx])))
    return CorrelationReport(worst <= tol, worst, tuple(merged), norm, tol)


@dataclass(frozen=True, eq=False)
class GnsCompression:
    basis: np.ndarray
    compressed_ops: tuple
    subspace_dim: int


def _orthogonalize(vec, basis):
    # modified Gram-Schmidt, two passes for stability
    for _ in range(2):
        for q in basis:
            vec = vec - q * np.vdot(q, vec)
    return vec


def gns_compress(generators, psi, drop_tol=DROP_TOL):
    """Compress ``generators`` to the cyclic subspace they generate from ``psi``.

    The subspace is the smallest one containing ``psi`` and invariant under
    every generator and its adjoint; it is built breadth-first with modified
    Gram-Schmidt until no new direction survives ``drop_tol``.
    """
    gens = [linops.as_matrix(g) for g in generators]
    if not gens:
        raise ValueError("at least one generator is required")
    dim = gens[0].shape[0]
    if any(g.shape[0] != dim for g in gens):
        raise DimMismatch("generators have different dimensions")
    psi, _ = _check_state(psi, dim)

    maps = []
    for g in gens:
        maps.append(g)
        maps.append(linops.dagger(g))
    basis = [psi / np.linalg.norm(psi)]
    frontier = [basis[0]]
    while frontier and len(basis) < dim:
        fresh = []
        for vec in frontier:
            for m in maps:
                w = _orthogonalize(m @ vec, basis)
                norm = np.linalg.norm(w)
                if norm > drop_tol:
                    w = w / norm
                    basis.append(w)
                    fresh.append(w)
                    if len(basis) == dim:
                        break
            if len(basis) == dim:
                break
        frontier = fresh
    v = np.column_stack(basis)
    compressed = tuple(linops.dagger(v) @ g @ v for g in gens)
    return GnsCompression(v, compressed, v.shape[1])


def ozawa_equal_gns(a, b, psi, tol=1e-9, drop_tol=DROP_TOL):
    """True when the GNS-representing operators of ``a`` and ``b`` coincide."""
    comp = gns_compress([a, b], psi, drop_tol)
    pa, pb = comp.compressed_ops
    return linops.fro(pa - pb) <= tol
