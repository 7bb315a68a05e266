"""Audits of measurement schemes against conservation laws.

Conservation and covariance checks, the superselection audit of a scheme
(hypotheses first, conclusion only when they hold), the WAY-Ozawa error
bound, and a derivative-free search over conserving Hamiltonians.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from superselect import _backend, algebra, linops
from superselect.algebra import APPARATUS, OBJECT, ONE_PARAMETER, embed
from superselect.correlation import perfect_correlation
from superselect.errors import (
    DimMismatch,
    EmptyCommutant,
    FloorViolation,
    NotNormalized,
    PreconditionViolated,
    StatesDontSpan,
)
from superselect.schemes import evolve_meter

HYPOTHESIS_TOL = 1e-9
PRECONDITION_TOL = 1e-9
BOUND_SLACK = 1e-9
ZERO_VARIANCE_TOL = 1e-12
COMMUTANT_THRESHOLD = 1e-9
FLOOR_SLACK = 1e-6
VACUOUS = "hypotheses not met - conclusion vacuous"


def _check_action_dim(action, dim, what):
    if action.dim != dim:
        raise DimMismatch(f"{what} action has dim {action.dim}, expected {dim}")


def probe_operators(scheme, seed=0):
    """Operators on which sampled conservation laws are tested."""
    rng = np.random.default_rng(seed)
    sp = scheme.space
    return [
        embed(sp, scheme.object_observable, OBJECT),
        embed(sp, scheme.meter, APPARATUS),
        linops.random_hermitian(sp.dim, rng),
        linops.random_hermitian(sp.dim, rng),
    ]


def _dynamics_generator(scheme):
    # [J, H] when a Hamiltonian is given, [J, u] otherwise; in finite
    # dimensions both vanish exactly when the one-parameter group commutes
    return scheme.hamiltonian if scheme.hamiltonian is not None else scheme.evolution


def _sampled_invariance(scheme, unitaries):
    probes = probe_operators(scheme)
    evolved = [scheme.alpha(b) for b in probes]
    worst = 0.0
    for w in unitaries:
        wd = linops.dagger(w)
        for b, ab in zip(probes, evolved):
            lhs = scheme.alpha(w @ b @ wd)
            rhs = w @ ab @ wd
            worst = max(worst, linops.fro(lhs - rhs))
    return worst


def check_total_conservation(scheme, action_obj, action_app):
    """Residual of ``alpha o (sigma_g (x) tau_g) = (sigma_g (x) tau_g) o alpha``."""
    sp = scheme.space
    _check_action_dim(action_obj, sp.object_dim, "object")
    _check_action_dim(action_app, sp.apparatus_dim, "apparatus")
    elements = algebra.paired_elements(action_obj, action_app)
    if action_obj.kind == ONE_PARAMETER:
        total = embed(sp, action_obj.generator, OBJECT) + embed(sp, action_app.generator, APPARATUS)
        return linops.fro(algebra.commutator(total, _dynamics_generator(scheme)))
    return _sampled_invariance(
        scheme, [linops.kron(action_obj.unitary(g), action_app.unitary(g)) for g in elements]
    )


def check_isolated_conservation(scheme, action_obj):
    """Residual of ``alpha o (sigma_g (x) id) = (sigma_g (x) id) o alpha``."""
    sp = scheme.space
    _check_action_dim(action_obj, sp.object_dim, "object")
    if action_obj.kind == ONE_PARAMETER:
        j = embed(sp, action_obj.generator, OBJECT)
        return linops.fro(algebra.commutator(j, _dynamics_generator(scheme)))
    ident = np.eye(sp.apparatus_dim)
    return _sampled_invariance(
        scheme, [linops.kron(action_obj.unitary(g), ident) for g in action_obj.elements()]
    )


def check_covariant_indicator(scheme, action_obj, action_app, meter=None):
    """Max over sampled g of ``||alpha(1 (x) tau_g M) - sigma_g(alpha(1 (x) M))||``."""
    sp = scheme.space
    meter = scheme.meter if meter is None else linops.as_matrix(meter)
    _check_action_dim(action_obj, sp.object_dim, "object")
    _check_action_dim(action_app, sp.apparatus_dim, "apparatus")
    elements = algebra.paired_elements(action_obj, action_app)
    evolved = scheme.alpha(embed(sp, meter, APPARATUS))
    ident = np.eye(sp.apparatus_dim)
    worst = 0.0
    for g in elements:
        moved = scheme.alpha(embed(sp, algebra.act(action_app, g, meter), APPARATUS))
        w = linops.kron(action_obj.unitary(g), ident)
        worst = max(worst, linops.fro(moved - w @ evolved @ linops.dagger(w)))
    return worst


def check_superselection(a, charge):
    """``||[charge, a]||_F``; zero means ``a`` respects the superselection rule."""
    return linops.fro(algebra.commutator(charge, a))


def invariance_residual(action, a):
    """Max over sampled g of ``||sigma_g(a) - a||``."""
    return max(linops.fro(algebra.act(action, g, a) - a) for g in action.elements())


def default_object_states(dim, seed=0, extra=8):
    """Computational basis followed by ``extra`` seeded random unit vectors."""
    rng = np.random.default_rng(seed)
    states = [np.eye(dim, dtype=np.complex128)[k] for k in range(dim)]
    states += [linops.random_state(dim, rng) for _ in range(extra)]
    return states


def _require_spanning(states, dim):
    if not states:
        raise StatesDontSpan("no object states given")
    mat = np.array([np.asarray(s, dtype=np.complex128).reshape(-1) for s in states])
    if mat.shape[1] != dim:
        raise DimMismatch(f"object states have length {mat.shape[1]}, object dim is {dim}")
    rank = np.linalg.matrix_rank(mat.conj() @ mat.T, tol=1e-10)
    if rank != dim:
        raise StatesDontSpan(f"object states span dimension {rank}, need {dim}")
    return list(mat)


@dataclass(frozen=True)
class HypothesisResult:
    name: str
    passed: bool
    residual: float


@dataclass(frozen=True)
class AuditReport:
    hypothesis_results: tuple
    conclusion_passed: object  # bool, or None when the hypotheses fail
    conclusion_residual: float
    status: str
    states_tested: int
    tolerances: dict = field(default_factory=dict)

    @property
    def hypotheses_hold(self):
        return all(h.passed for h in self.hypothesis_results)

    @property
    def failed_hypotheses(self):
        return [h.name for h in self.hypothesis_results if not h.passed]


def main_theorem_audit(scheme, action_obj, action_app, object_states=None, tol=HYPOTHESIS_TOL,
                       conclusion_tol=None, correlation_tol=None):
    """Check the three hypotheses, then whether the observable is invariant.

    Hypotheses: isolated conservation of ``action_obj``; the meter is a
    covariant indicator for ``(action_obj, action_app)``; and the observable
    is perfectly correlated with the evolved meter in ``psi (x) xi`` for every
    given object state. The states must span the object space.
    """
    sp = scheme.space
    states = default_object_states(sp.object_dim) if object_states is None else object_states
    states = _require_spanning(states, sp.object_dim)
    conclusion_tol = tol if conclusion_tol is None else conclusion_tol
    correlation_tol = tol if correlation_tol is None else correlation_tol

    isolated = check_isolated_conservation(scheme, action_obj)
    covariant = check_covariant_indicator(scheme, action_obj, action_app)
    observable = embed(sp, scheme.object_observable, OBJECT)
    evolved = evolve_meter(scheme)
    ozawa = 0.0
    for psi in states:
        psi = psi / np.linalg.norm(psi)
        report = perfect_correlation(observable, evolved, scheme.initial_state(psi), correlation_tol)
        ozawa = max(ozawa, report.worst_atom_residual)

    hyps = (
        HypothesisResult("isolated conservation", isolated <= tol, isolated),
        HypothesisResult("covariant indicator", covariant <= tol, covariant),
        HypothesisResult("ozawa equality", ozawa <= correlation_tol, ozawa),
    )
    conclusion = invariance_residual(action_obj, scheme.object_observable)
    if all(h.passed for h in hyps):
        passed = conclusion <= conclusion_tol
        status = "observable is invariant" if passed else "conclusion violated"
    else:
        passed, status = None, VACUOUS
    tolerances = {"hypothesis": tol, "correlation": correlation_tol, "conclusion": conclusion_tol}
    return AuditReport(hyps, passed, conclusion, status, len(states), tolerances)


def _normalized(psi, dim):
    psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
    if psi.shape[0] != dim:
        raise DimMismatch(f"object state has length {psi.shape[0]}, object dim is {dim}")
    if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
        raise NotNormalized("object state is not normalized")
    return psi


def measurement_error(scheme, a, psi):
    """``sqrt(<nu|(alpha(1 (x) M) - a (x) 1)^2|nu>)`` with ``nu = psi (x) xi``."""
    sp = scheme.space
    psi = _normalized(psi, sp.object_dim)
    noise = evolve_meter(scheme) - embed(sp, a, OBJECT)
    nu = scheme.initial_state(psi)
    # noise is Hermitian, so <nu|noise^2|nu> = ||noise nu||^2
    return float(np.linalg.norm(noise @ nu))


@dataclass(frozen=True)
class BoundReport:
    error_sq: float
    commutator_term: float
    denom: float
    bound: float
    satisfied: bool
    margin: float
    divergent: bool = False
    note: str = ""


def bound_from_moments(commutator_term, var1, var2, zero_tol=ZERO_VARIANCE_TOL):
    """``(denom, bound, divergent)`` for the WAY-Ozawa right-hand side.

    A vanishing denominator with a nonzero commutator term is flagged rather
    than divided by; with both vanishing the bound is 0.
    """
    denom = 4.0 * (var1 + var2)
    if denom > zero_tol:
        return denom, commutator_term / denom, False
    if commutator_term > zero_tol:
        return denom, math.inf, True
    return denom, 0.0, False


def _expect(op, v):
    return np.vdot(v, op @ v)


def _variance(op, v):
    mean = _expect(op, v).real
    shifted = op - mean * np.eye(op.shape[0])
    return float(np.linalg.norm(shifted @ v) ** 2)


def way_ozawa_bound(scheme, a, j1, j2=None, psi=None, slack=BOUND_SLACK,
                    precondition_tol=PRECONDITION_TOL):
    """Compare the squared measurement error of ``a`` with the WAY-Ozawa bound.

    ``j1`` acts on the object, ``j2`` on the apparatus (``None`` means zero).
    Requires ``[M, j2] = 0`` and conservation of ``j1 + j2``.
    """
    sp = scheme.space
    j1 = linops.require_hermitian(j1, "j1")
    j2 = np.zeros((sp.apparatus_dim, sp.apparatus_dim)) if j2 is None else linops.require_hermitian(j2, "j2")
    if psi is None:
        raise ValueError("an object state is required")
    psi = _normalized(psi, sp.object_dim)
    big_j1 = embed(sp, j1, OBJECT)
    big_j2 = embed(sp, j2, APPARATUS)

    meter_res = linops.fro(algebra.commutator(embed(sp, scheme.meter, APPARATUS), big_j2))
    if meter_res > precondition_tol:
        raise PreconditionViolated("meter commutes with apparatus charge", meter_res)
    cons_res = linops.fro(algebra.commutator(big_j1 + big_j2, _dynamics_generator(scheme)))
    if cons_res > precondition_tol:
        raise PreconditionViolated("total charge conserved", cons_res)

    nu = scheme.initial_state(psi)
    error_sq = measurement_error(scheme, a, psi) ** 2
    term = float(abs(_expect(algebra.commutator(embed(sp, a, OBJECT), big_j1), nu)) ** 2)
    denom, bound, divergent = bound_from_moments(term, _variance(big_j1, nu), _variance(big_j2, nu))
    if divergent:
        return BoundReport(error_sq, term, denom, bound, False, -math.inf, True,
                           "bound infinite - measurement meaningless")
    return BoundReport(error_sq, term, denom, bound, error_sq >= bound - slack, error_sq - bound)


def hermitian_basis(dim):
    """Orthonormal (Hilbert-Schmidt) real basis of the Hermitian matrices."""
    basis = []
    for k in range(dim):
        e = np.zeros((dim, dim), dtype=np.complex128)
        e[k, k] = 1.0
        basis.append(e)
    r = 1 / math.sqrt(2)
    for k in range(dim):
        for m in range(k + 1, dim):
            e = np.zeros((dim, dim), dtype=np.complex128)
            e[k, m] = e[m, k] = r
            basis.append(e)
            e = np.zeros((dim, dim), dtype=np.complex128)
            e[k, m] = -1j * r
            e[m, k] = 1j * r
            basis.append(e)
    return np.array(basis)


def commutant_basis(charge, threshold=COMMUTANT_THRESHOLD, drop_identity=True):
    """Orthonormal real basis of the Hermitian ``H`` with ``[charge, H] = 0``.

    The null space of ``H -> [charge, H]`` is read off the eigendecomposition
    of the map's Gram matrix. The identity direction only contributes a
    global phase and is removed unless ``drop_identity`` is false.
    """
    charge = linops.as_matrix(charge)
    dim = charge.shape[0]
    full = hermitian_basis(dim)
    images = np.array([algebra.commutator(charge, b).ravel() for b in full]).T
    real_map = np.vstack([images.real, images.imag])
    gram = real_map.T @ real_map
    w, v = linops.eig_hermitian(gram)
    vecs = v[:, w <= threshold * max(1.0, float(np.max(np.abs(w))))]
    if vecs.shape[1] == 0:
        raise EmptyCommutant("no Hermitian operator commutes with the charge")
    # eigenvectors of a real symmetric matrix may carry complex phases; the
    # null space is spanned by their real and imaginary parts
    u, s, _ = np.linalg.svd(np.hstack([vecs.real, vecs.imag]), full_matrices=False)
    null = u[:, : vecs.shape[1]]
    if drop_identity:
        ident = np.zeros(full.shape[0])
        ident[:dim] = 1 / math.sqrt(dim)
        null = null - np.outer(ident, ident @ null)
        u, s, _ = np.linalg.svd(null, full_matrices=False)
        null = u[:, s > 0.5]
    if null.shape[1] == 0:
        raise EmptyCommutant("only multiples of the identity commute with the charge")
    return np.ascontiguousarray(np.tensordot(null.T, full, axes=1))


@dataclass(frozen=True, eq=False)
class SearchResult:
    best_error_sq: float
    floor: float
    hamiltonian: np.ndarray
    constrained: bool
    restarts: int
    budget: int
    seed: int
    evaluations: int
    budget_exhausted: bool
    restart_errors: tuple
    basis_size: int


def way_floor(a, j1, object_states):
    """Mean over states of ``|<[a, j1]>|^2 / (4 sigma(j1)^2)`` with no apparatus charge."""
    a = linops.as_matrix(a)
    j1 = linops.as_matrix(j1)
    comm = algebra.commutator(a, j1)
    floors = []
    for psi in object_states:
        psi = np.asarray(psi, dtype=np.complex128)
        term = float(abs(_expect(comm, psi)) ** 2)
        floors.append(bound_from_moments(term, _variance(j1, psi), 0.0)[1])
    return float(np.mean(floors))


def constrained_search(space, a, j1, meter, apparatus_state, object_states, budget=5000, seed=0,
                       restarts=20, time=1.0, constrained=True, initial_step=1.0, min_step=1e-12):
    """Minimize the mean squared error of measuring ``a`` over Hamiltonians.

    With ``constrained`` the search runs inside the commutant of
    ``j1 (x) 1``, so every candidate conserves ``j1`` in isolation; otherwise
    all Hermitian Hamiltonians are allowed (control run). ``budget`` counts
    objective evaluations per restart. Each restart gets its own child seed
    of ``seed``, so results do not depend on execution order.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    if not object_states:
        raise ValueError("object_states must not be empty")
    a = linops.require_hermitian(a, "observable")
    j1 = linops.require_hermitian(j1, "j1")
    meter = linops.require_hermitian(meter, "meter")
    if a.shape[0] != space.object_dim or j1.shape[0] != space.object_dim:
        raise DimMismatch("observable and charge must act on the object")
    if meter.shape[0] != space.apparatus_dim:
        raise DimMismatch("meter must act on the apparatus")
    xi = np.asarray(apparatus_state, dtype=np.complex128).reshape(-1)
    states = [_normalized(p, space.object_dim) for p in object_states]

    charge = embed(space, j1, OBJECT) if constrained else np.zeros((space.dim, space.dim))
    basis = commutant_basis(charge)
    nus = np.ascontiguousarray(np.array([np.kron(p, xi) for p in states]))
    big_m = np.ascontiguousarray(embed(space, meter, APPARATUS))
    big_a = np.ascontiguousarray(embed(space, a, OBJECT))

    children = np.random.SeedSequence(seed).spawn(restarts)
    runs = []
    total_evals = 0
    exhausted = False
    for child in children:
        x0 = np.random.default_rng(child).normal(size=basis.shape[0])
        f, x, evals = _backend.coordinate_search(x0, basis, float(time), big_m, big_a, nus,
                                                 int(budget), float(initial_step), float(min_step))
        runs.append((float(f), x))
        total_evals += evals
        exhausted |= evals >= budget
    best_f, best_x = min(runs, key=lambda r: r[0])
    floor = way_floor(a, j1, states)
    if constrained and best_f < floor - FLOOR_SLACK:
        raise FloorViolation(f"constrained error {best_f!r} below floor {floor!r}")
    hamiltonian = np.tensordot(best_x, basis, axes=1)
    return SearchResult(float(best_f), floor, hamiltonian, constrained, restarts, budget, seed,
                        total_evals, exhausted, tuple(float(r[0]) for r in runs), basis.shape[0])
