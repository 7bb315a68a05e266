"""Measurement schemes and the canonical model builders."""
from dataclasses import dataclass, field
from functools import cached_property
import math

import numpy as np

from superselect import algebra, linops
from superselect.algebra import APPARATUS, OBJECT, CompositeSpace, GroupAction
from superselect.errors import BadDimension, DimMismatch, NotNormalized

STATE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class MeasurementScheme:
    """Object (x) apparatus system with its dynamics, observable, meter and
    initial apparatus state.

    Dynamics is either ``hamiltonian`` with ``time`` (evolution
    ``exp(i H t)``) or an explicit Heisenberg ``unitary``; observables evolve
    as ``B -> u B u^dagger``.
    """

    space: CompositeSpace
    object_observable: np.ndarray
    meter: np.ndarray
    apparatus_state: np.ndarray
    hamiltonian: np.ndarray = None
    time: float = 1.0
    unitary: np.ndarray = None
    label: str = ""
    charges: dict = field(default_factory=dict)

    def __post_init__(self):
        sp = self.space
        a = linops.require_hermitian(self.object_observable, "object observable")
        m = linops.require_hermitian(self.meter, "meter")
        if a.shape[0] != sp.object_dim:
            raise DimMismatch(f"object observable has dim {a.shape[0]}, object is {sp.object_dim}")
        if m.shape[0] != sp.apparatus_dim:
            raise DimMismatch(f"meter has dim {m.shape[0]}, apparatus is {sp.apparatus_dim}")
        xi = np.asarray(self.apparatus_state, dtype=np.complex128).reshape(-1)
        if xi.shape[0] != sp.apparatus_dim:
            raise DimMismatch(f"apparatus state has length {xi.shape[0]}")
        if abs(np.linalg.norm(xi) - 1.0) > STATE_TOL:
            raise NotNormalized("apparatus state is not normalized")
        if (self.hamiltonian is None) == (self.unitary is None):
            raise ValueError("give exactly one of hamiltonian or unitary")
        set_ = object.__setattr__
        set_(self, "object_observable", a)
        set_(self, "meter", m)
        set_(self, "apparatus_state", xi)
        if self.hamiltonian is not None:
            h = linops.require_hermitian(self.hamiltonian, "hamiltonian")
            if h.shape[0] != sp.dim:
                raise DimMismatch(f"hamiltonian has dim {h.shape[0]}, space is {sp.dim}")
            set_(self, "hamiltonian", h)
            set_(self, "time", float(self.time))
        else:
            u = linops.require_unitary(self.unitary, "unitary")
            if u.shape[0] != sp.dim:
                raise DimMismatch(f"unitary has dim {u.shape[0]}, space is {sp.dim}")
            set_(self, "unitary", u)

    @cached_property
    def evolution(self):
        """The Heisenberg unitary ``u`` of ``alpha(B) = u B u^dagger``."""
        if self.unitary is not None:
            return self.unitary
        return linops.expi(self.hamiltonian, self.time)

    def alpha(self, b):
        return algebra.heisenberg(self.evolution, b)

    def initial_state(self, psi):
        """``nu = psi (x) xi``."""
        psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
        if psi.shape[0] != self.space.object_dim:
            raise DimMismatch(f"object state has length {psi.shape[0]}")
        return np.kron(psi, self.apparatus_state)

    def replace(self, **changes):
        kwargs = {
            "space": self.space,
            "object_observable": self.object_observable,
            "meter": self.meter,
            "apparatus_state": self.apparatus_state,
            "hamiltonian": self.hamiltonian,
            "time": self.time,
            "unitary": self.unitary,
            "label": self.label,
            "charges": dict(self.charges),
        }
        kwargs.update(changes)
        return MeasurementScheme(**kwargs)


def evolve_meter(scheme):
    """``alpha(1 (x) M)``."""
    return scheme.alpha(algebra.embed(scheme.space, scheme.meter, APPARATUS))


def basis_state(dim, k):
    v = np.zeros(dim, dtype=np.complex128)
    v[k] = 1.0
    return v


# -- discrete position/shift pair on Z_d -----------------------------------

def position_operator(d):
    return np.diag(np.arange(d, dtype=np.float64)).astype(np.complex128)


def shift_operator(d):
    """Cyclic shift ``X|k> = |k+1 mod d>``."""
    return np.roll(np.eye(d, dtype=np.complex128), 1, axis=0)


def clock_operator(d):
    """``Z|k> = w^k |k>`` with ``w = exp(2 pi i / d)``."""
    return np.diag(np.exp(2j * np.pi * np.arange(d) / d))


def shift_action(d, side=OBJECT):
    """Z_d acting by translation: element b sends ``q`` to ``q + b mod d``."""
    back = linops.dagger(shift_operator(d))
    return GroupAction.finite([np.linalg.matrix_power(back, b) for b in range(d)], side)


def phase_action(d, side=OBJECT, samples=algebra.DEFAULT_SAMPLES):
    """One-parameter phase rotations generated by the position operator."""
    return GroupAction.one_parameter(position_operator(d), samples, side)


def clock_action(d, side=OBJECT):
    """Z_d acting through powers of the clock operator."""
    z = clock_operator(d)
    return GroupAction.finite([np.linalg.matrix_power(z, k) for k in range(d)], side)


def build_discrete_von_neumann(d, apparatus_state=None):
    """Controlled cyclic shift: the pointer ``Q`` moves to ``Q + q mod d``.

    ``u = sum_q |q><q| (x) X^(-q)`` so that ``u (1 (x) Q) u^dagger`` equals
    ``(Q + q) mod d``; for ``d = 2`` this is the CNOT gate.
    """
    if int(d) != d or d < 2:
        raise BadDimension(f"d must be an integer >= 2, got {d!r}")
    d = int(d)
    back = linops.dagger(shift_operator(d))
    u = np.zeros((d * d, d * d), dtype=np.complex128)
    for q in range(d):
        proj = np.zeros((d, d))
        proj[q, q] = 1.0
        u += np.kron(proj, np.linalg.matrix_power(back, q))
    xi = basis_state(d, 0) if apparatus_state is None else apparatus_state
    return MeasurementScheme(
        space=CompositeSpace(d, d),
        object_observable=position_operator(d),
        meter=position_operator(d),
        apparatus_state=xi,
        unitary=u,
        label=f"discrete von Neumann, d={d}",
        charges={"phase": position_operator(d)},
    )


# -- truncated Fock space --------------------------------------------------

@dataclass(frozen=True, eq=False)
class FockModel:
    modes: int
    cutoff: int
    ladder_ops: tuple
    number_op: np.ndarray

    @property
    def dim(self):
        return (self.cutoff + 1) ** self.modes

    def annihilation(self, j):
        return self.ladder_ops[j]

    def creation(self, j):
        return linops.dagger(self.ladder_ops[j])

    def quadrature(self, j):
        """Self-adjoint part ``(a_j + a_j^dagger) / 2``."""
        a = self.ladder_ops[j]
        return 0.5 * (a + linops.dagger(a))

    def hopping(self, j, k):
        """``a_j^dagger a_k``."""
        return self.creation(j) @ self.ladder_ops[k]

    def gauge_action(self, samples=algebra.DEFAULT_SAMPLES):
        """Global U(1) generated by the number operator."""
        return GroupAction.one_parameter(self.number_op, samples)


def single_mode_annihilation(cutoff):
    """``a|n> = sqrt(n)|n-1>`` on occupations ``0..cutoff``."""
    n = np.arange(1, cutoff + 1)
    return np.diag(np.sqrt(n), k=1).astype(np.complex128)


def build_fock_model(modes, cutoff):
    if modes < 1 or cutoff < 1:
        raise BadDimension("modes and cutoff must both be >= 1")
    local = cutoff + 1
    a1 = single_mode_annihilation(cutoff)
    ladders = []
    for j in range(modes):
        op = np.eye(1, dtype=np.complex128)
        for k in range(modes):
            op = np.kron(op, a1 if k == j else np.eye(local))
        ladders.append(op)
    number = sum(linops.dagger(a) @ a for a in ladders)
    return FockModel(modes, cutoff, tuple(ladders), number)


# -- spin models -----------------------------------------------------------

PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=np.complex128)


def spin_operators(dim):
    """``(S_z, S_+)`` for spin ``s = (dim - 1)/2`` in the basis ``m = s, s-1, ..., -s``."""
    s = (dim - 1) / 2
    m = s - np.arange(dim)
    sz = np.diag(m).astype(np.complex128)
    sp = np.zeros((dim, dim), dtype=np.complex128)
    for k in range(1, dim):
        # |m_k> -> |m_{k-1}> = |m_k + 1>
        sp[k - 1, k] = math.sqrt(s * (s + 1) - m[k] * (m[k] + 1))
    return sz, sp


def build_way_spin_model(apparatus_spin_dim, coupling, time, apparatus_state=None):
    """Spin-1/2 object exchanging angular momentum with a spin-s apparatus.

    ``H = g (s+ (x) S- + s- (x) S+) + (sz/2 (x) 1 + 1 (x) S_z)`` conserves
    ``J1 + J2`` with ``J1 = sz/2`` and ``J2 = S_z``. The measured observable is
    ``sx``; the meter ``S_z / s`` commutes with ``J2``. The apparatus starts in
    ``|m = -s>`` unless told otherwise.
    """
    if int(apparatus_spin_dim) != apparatus_spin_dim or apparatus_spin_dim < 2:
        raise BadDimension("apparatus_spin_dim must be an integer >= 2")
    dim = int(apparatus_spin_dim)
    s = (dim - 1) / 2
    sz, splus = spin_operators(dim)
    j1 = 0.5 * PAULI_Z
    exchange = np.kron(SIGMA_PLUS, linops.dagger(splus)) + np.kron(linops.dagger(SIGMA_PLUS), splus)
    free = np.kron(j1, np.eye(dim)) + np.kron(np.eye(2), sz)
    h = coupling * exchange + free
    xi = basis_state(dim, dim - 1) if apparatus_state is None else apparatus_state
    return MeasurementScheme(
        space=CompositeSpace(2, dim),
        object_observable=PAULI_X,
        meter=sz / s,
        apparatus_state=xi,
        hamiltonian=h,
        time=time,
        label=f"WAY spin model, apparatus dim {dim}, g={coupling}, t={time}",
        charges={"J1": j1, "J2": sz},
    )


def pointer_positions(d):
    """Lattice positions centred on zero: ``j - (d-1)/2``."""
    return np.arange(d) - (d - 1) / 2


def pointer_translation_generator(d):
    """Hermitian ``G`` with ``exp(-i G 2 pi n / d) = X^n`` for integer ``n``.

    Diagonal in the discrete Fourier basis with centred integer momenta.
    """
    k = np.fft.fftfreq(d, 1.0 / d)
    j = np.arange(d)
    f = np.exp(2j * np.pi * np.outer(j, k) / d) / math.sqrt(d)
    return f @ np.diag(k) @ linops.dagger(f)


def gaussian_pointer(d, width=None, support=None):
    """Discretized Gaussian centred at zero, cut off at ``|x| < support``.

    The default support ``d/4`` keeps the packet on one side of the origin
    after a displacement of ``d/4`` sites.
    """
    x = pointer_positions(d)
    width = d / 8 if width is None else width
    support = d / 4 if support is None else support
    v = np.exp(-(x ** 2) / (4 * width ** 2)) * (np.abs(x) < support)
    return (v / np.linalg.norm(v)).astype(np.complex128)


def build_symmetry_breaking_model(field, time, apparatus_dim=16):
    """Stern-Gerlach-like pointer coupling ``H = field * sz (x) G``.

    For ``field * time = pi/2`` the pointer of a spin-up (down) object moves
    ``d/4`` sites to the right (left). The meter is the sign of the pointer
    position relative to its initial mean.
    """
    d = int(apparatus_dim)
    if d != apparatus_dim or d < 4 or d % 4:
        raise BadDimension("apparatus_dim must be a positive multiple of 4")
    g = pointer_translation_generator(d)
    xi = gaussian_pointer(d)
    x = pointer_positions(d)
    mean = float(np.real(np.vdot(xi, x * xi)))
    meter = np.diag(np.where(x > mean, 1.0, -1.0)).astype(np.complex128)
    return MeasurementScheme(
        space=CompositeSpace(2, d),
        object_observable=PAULI_Z,
        meter=meter,
        apparatus_state=xi,
        hamiltonian=field * np.kron(PAULI_Z, g),
        time=time,
        label=f"symmetry breaking, field={field}, t={time}, d={d}",
        charges={"Jz": 0.5 * PAULI_Z, "Jx": 0.5 * PAULI_X, "pointer_position": np.diag(x).astype(np.complex128)},
    )


# -- conserving, covariant variants of the discrete model ------------------

def _phase_fixing_unitary(d, rng):
    # block diag(phase, random unitary): leaves |0> invariant up to a phase
    v = np.zeros((d, d), dtype=np.complex128)
    v[0, 0] = np.exp(2j * np.pi * rng.random())
    if d > 1:
        v[1:, 1:] = linops.random_unitary(d - 1, rng)
    return v


def build_conjugated_von_neumann(d, seed):
    """Random variant of the discrete model that keeps its structure.

    The meter reads ``f(Q)`` for random real ``f`` and the observable is
    ``f(q)``. The dynamics ``u' = V u (1 (x) R)`` uses ``V = sum_q |q><q| (x) V_q``
    with each ``V_q`` fixing ``|0>`` up to a phase and ``R`` diagonal, so the
    object position stays conserved in isolation and perfect correlation
    with the pointer survives.
    """
    base = build_discrete_von_neumann(d)
    rng = np.random.default_rng(seed)
    f = np.sort(rng.normal(size=d))
    fdiag = np.diag(f).astype(np.complex128)
    v = np.zeros((d * d, d * d), dtype=np.complex128)
    for q in range(d):
        proj = np.zeros((d, d))
        proj[q, q] = 1.0
        v += np.kron(proj, _phase_fixing_unitary(d, rng))
    r = np.diag(np.exp(2j * np.pi * rng.random(d)))
    u = v @ base.unitary @ np.kron(np.eye(d), r)
    return MeasurementScheme(
        space=base.space,
        object_observable=fdiag,
        meter=fdiag,
        apparatus_state=base.apparatus_state,
        unitary=u,
        label=f"conjugated von Neumann, d={d}, seed={seed}",
        charges={"phase": np.diag(rng.normal(size=d)).astype(np.complex128)},
    )


def relative_position(d):
    """``(q1 - q2) mod d`` on two ``d``-level registers."""
    return np.diag([(i - j) % d for i in range(d) for j in range(d)]).astype(np.complex128)


def total_shift_generator(d):
    """``X (x) X``, the generator of the joint cyclic shift of two registers.

    The Hermitian interpolating generator is not used: it moves weight
    between lattice sites at non-integer parameters.
    """
    x = shift_operator(d)
    return np.kron(x, x)
