"""Operator algebra of a composite object (x) apparatus system.

Embeddings, commutators, Heisenberg evolution, group actions and the sector
decomposition induced by a superselection charge.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from superselect import linops
from superselect.errors import (
    BadDimension,
    DimMismatch,
    MixedActionKinds,
    UnknownElement,
)

CLUSTER_ABS_TOL = 1e-9
CLUSTER_REL_TOL = 1e-9
DEFAULT_SAMPLES = (1.0, -1.0, math.pi / 3, -math.pi / 3, 0.7071)

OBJECT, APPARATUS, COMPOSITE = "object", "apparatus", "composite"
ONE_PARAMETER, FINITE = "one-parameter", "finite"


@dataclass(frozen=True)
class CompositeSpace:
    object_dim: int
    apparatus_dim: int

    def __post_init__(self):
        if self.object_dim < 1 or self.apparatus_dim < 1:
            raise BadDimension("factor dimensions must be positive")

    @property
    def dim(self):
        return self.object_dim * self.apparatus_dim

    def side_dim(self, side):
        if side == OBJECT:
            return self.object_dim
        if side == APPARATUS:
            return self.apparatus_dim
        if side == COMPOSITE:
            return self.dim
        raise ValueError(f"unknown side {side!r}")

    def product_state(self, psi, xi):
        return np.kron(np.asarray(psi, dtype=np.complex128), np.asarray(xi, dtype=np.complex128))


def embed(space, op, side):
    """``op (x) 1`` for the object side, ``1 (x) op`` for the apparatus side."""
    op = linops.as_matrix(op)
    if op.shape[0] != space.side_dim(side):
        raise DimMismatch(
            f"{side} operator has dim {op.shape[0]}, space expects {space.side_dim(side)}"
        )
    if side == OBJECT:
        return linops.kron(op, np.eye(space.apparatus_dim))
    if side == APPARATUS:
        return linops.kron(np.eye(space.object_dim), op)
    return op


def commutator(a, b):
    a = linops.as_matrix(a)
    b = linops.as_matrix(b)
    if a.shape != b.shape:
        raise DimMismatch(f"commutator of shapes {a.shape} and {b.shape}")
    return a @ b - b @ a


def heisenberg(u, b):
    """``u b u^dagger`` with ``u = exp(iHt)``."""
    u = linops.require_unitary(u, "evolution")
    b = linops.as_matrix(b)
    if u.shape != b.shape:
        raise DimMismatch(f"evolution of shape {u.shape} applied to {b.shape}")
    return u @ b @ linops.dagger(u)


@dataclass(frozen=True, eq=False)
class GroupAction:
    """A symmetry acting by conjugation.

    ``one-parameter`` actions carry a Hermitian generator and act at parameter
    ``s`` through ``exp(i generator s)``; ``finite`` actions carry one unitary
    per group element, element 0 being the identity.
    """

    kind: str
    side: str = OBJECT
    generator: np.ndarray = None
    parameter_samples: tuple = DEFAULT_SAMPLES
    unitaries: tuple = ()
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.kind == ONE_PARAMETER:
            if self.generator is None:
                raise ValueError("one-parameter action needs a generator")
            gen = linops.require_hermitian(self.generator, "generator")
            object.__setattr__(self, "generator", gen)
            object.__setattr__(
                self, "parameter_samples", tuple(float(s) for s in self.parameter_samples)
            )
        elif self.kind == FINITE:
            if not self.unitaries:
                raise ValueError("finite action needs at least the identity element")
            us = tuple(linops.require_unitary(u, f"element {k}") for k, u in enumerate(self.unitaries))
            dim = us[0].shape[0]
            if any(u.shape[0] != dim for u in us):
                raise DimMismatch("group elements have different dimensions")
            if linops.fro(us[0] - np.eye(dim)) > linops.UNITARY_TOL:
                raise ValueError("element 0 of a finite action must be the identity")
            object.__setattr__(self, "unitaries", us)
        else:
            raise ValueError(f"unknown action kind {self.kind!r}")

    @classmethod
    def one_parameter(cls, generator, samples=DEFAULT_SAMPLES, side=OBJECT):
        return cls(ONE_PARAMETER, side=side, generator=generator, parameter_samples=tuple(samples))

    @classmethod
    def finite(cls, unitaries, side=OBJECT):
        return cls(FINITE, side=side, unitaries=tuple(unitaries))

    @classmethod
    def trivial(cls, dim, side=OBJECT, kind=ONE_PARAMETER, order=1, samples=DEFAULT_SAMPLES):
        """The action in which every element acts as the identity."""
        if kind == ONE_PARAMETER:
            return cls.one_parameter(np.zeros((dim, dim)), samples, side)
        return cls.finite([np.eye(dim)] * order, side)

    @property
    def dim(self):
        if self.kind == ONE_PARAMETER:
            return self.generator.shape[0]
        return self.unitaries[0].shape[0]

    def elements(self):
        """Sampled parameters, or every element index of a finite group."""
        if self.kind == ONE_PARAMETER:
            return list(self.parameter_samples)
        return list(range(len(self.unitaries)))

    def identity_element(self):
        return 0.0 if self.kind == ONE_PARAMETER else 0

    def unitary(self, g):
        if self.kind == ONE_PARAMETER:
            s = float(g)
            if s not in self._cache:
                self._cache[s] = linops.expi(self.generator, s)
            return self._cache[s]
        if isinstance(g, (bool, float)) or not isinstance(g, (int, np.integer)):
            raise UnknownElement(f"finite group element must be an index, got {g!r}")
        if not 0 <= g < len(self.unitaries):
            raise UnknownElement(f"no group element {g} (order {len(self.unitaries)})")
        return self.unitaries[g]


def act(action, g, x):
    """Conjugate ``x`` by the unitary implementing element ``g``."""
    x = linops.as_matrix(x)
    if x.shape[0] != action.dim:
        raise DimMismatch(f"action of dim {action.dim} applied to operator of dim {x.shape[0]}")
    w = action.unitary(g)
    return w @ x @ linops.dagger(w)


def paired_elements(action_obj, action_app):
    """Elements at which ``sigma_g (x) tau_g`` is evaluated.

    One-parameter actions use the object action's samples for both sides;
    finite actions must have the same order.
    """
    if action_obj.kind != action_app.kind:
        raise MixedActionKinds(f"cannot pair {action_obj.kind} with {action_app.kind}")
    if action_obj.kind == FINITE and len(action_obj.unitaries) != len(action_app.unitaries):
        raise DimMismatch("paired finite actions must have the same number of elements")
    return action_obj.elements()


@dataclass(frozen=True, eq=False)
class SectorDecomposition:
    charge_eigenvalues: tuple
    sector_projectors: tuple
    sector_dims: tuple

    def __len__(self):
        return len(self.sector_dims)

    @property
    def dim(self):
        return self.sector_projectors[0].shape[0]


def cluster_values(values, abs_tol=CLUSTER_ABS_TOL, rel_tol=CLUSTER_REL_TOL):
    """Group sorted positions of ``values`` into clusters.

    A new cluster starts whenever the gap to the previous (sorted) value
    exceeds ``abs_tol + rel_tol * spectral_radius``. Returns a list of index
    arrays into ``values``, ordered by increasing value.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        return []
    order = np.argsort(values, kind="stable")
    radius = float(np.max(np.abs(values)))
    gap = abs_tol + rel_tol * radius
    clusters = [[order[0]]]
    for prev, cur in zip(order[:-1], order[1:]):
        if values[cur] - values[prev] > gap:
            clusters.append([cur])
        else:
            clusters[-1].append(cur)
    return [np.array(c) for c in clusters]


def sector_decompose(charge, cluster_tol=CLUSTER_ABS_TOL, rel_tol=CLUSTER_REL_TOL):
    """Split the space into eigenspaces (sectors) of a Hermitian charge."""
    w, v = linops.eig_hermitian(charge)
    eigenvalues, projectors, dims = [], [], []
    for idx in cluster_values(w, cluster_tol, rel_tol):
        cols = v[:, idx]
        eigenvalues.append(float(np.mean(w[idx])))
        projectors.append(cols @ linops.dagger(cols))
        dims.append(len(idx))
    return SectorDecomposition(tuple(eigenvalues), tuple(projectors), tuple(dims))


def off_sector_norm(op, sectors):
    """Frobenius weight of ``op`` between different sectors."""
    op = linops.as_matrix(op)
    if op.shape[0] != sectors.dim:
        raise DimMismatch(f"operator dim {op.shape[0]} vs sector dim {sectors.dim}")
    total = 0.0
    for i, p in enumerate(sectors.sector_projectors):
        left = p @ op
        for j, q in enumerate(sectors.sector_projectors):
            if i != j:
                total += linops.fro(left @ q) ** 2
    return math.sqrt(total)
