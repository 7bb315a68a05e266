import math

import numpy as np
import pytest

from superselect import algebra, linops, schemes, verdicts
from superselect.algebra import OBJECT, CompositeSpace
from superselect.correlation import perfect_correlation
from superselect.errors import BadDimension, DimMismatch, NotNormalized, NotUnitary
from superselect.schemes import MeasurementScheme

CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def eigen_exp(h, t):
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * w * t)) @ v.conj().T


def trotter(h1, h2, t, slices=10_000):
    dt = t / slices
    half = eigen_exp(h1, dt / 2)
    step = half @ eigen_exp(h2, dt) @ half
    return np.linalg.matrix_power(step, slices)


def test_scheme_validation():
    sp = CompositeSpace(2, 2)
    z = schemes.PAULI_Z
    with pytest.raises(NotNormalized):
        MeasurementScheme(sp, z, z, np.array([1.0, 1.0]), unitary=np.eye(4))
    with pytest.raises(DimMismatch):
        MeasurementScheme(sp, np.eye(3), z, np.array([1.0, 0.0]), unitary=np.eye(4))
    with pytest.raises(NotUnitary):
        MeasurementScheme(sp, z, z, np.array([1.0, 0.0]), unitary=2 * np.eye(4))
    with pytest.raises(ValueError):
        MeasurementScheme(sp, z, z, np.array([1.0, 0.0]))


def test_identity_dynamics_leaves_meter():
    sp = CompositeSpace(2, 3)
    m = np.diag([1.0, 2.0, 3.0])
    s = MeasurementScheme(sp, schemes.PAULI_Z, m, np.array([1.0, 0, 0]), hamiltonian=np.zeros((6, 6)))
    assert linops.fro(schemes.evolve_meter(s) - np.kron(np.eye(2), m)) <= 1e-14


def test_discrete_model_d2_is_cnot():
    s = schemes.build_discrete_von_neumann(2)
    np.testing.assert_array_equal(s.unitary, CNOT)
    q = np.diag([0.0, 1.0])
    expected = np.kron(q, np.eye(2)) + np.kron(np.eye(2), q) - 2 * np.kron(q, q)
    np.testing.assert_array_equal(schemes.evolve_meter(s), expected)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_discrete_model_pointer_moves_by_q(d):
    s = schemes.build_discrete_von_neumann(d)
    moved = schemes.evolve_meter(s)
    # oracle: on |q, Q> the evolved pointer reads (Q + q) mod d
    expected = np.diag([float((q + p) % d) for q in range(d) for p in range(d)])
    np.testing.assert_array_equal(moved, expected)


def test_discrete_model_correlation_needs_sharp_pointer(rng):
    s = schemes.build_discrete_von_neumann(3)
    a = algebra.embed(s.space, s.object_observable, OBJECT)
    moved = schemes.evolve_meter(s)
    for _ in range(10):
        psi = linops.random_state(3, rng)
        assert perfect_correlation(a, moved, s.initial_state(psi)).equal
    plus = np.array([1.0, 1.0]) / math.sqrt(2)
    blurred = schemes.build_discrete_von_neumann(2, apparatus_state=plus)
    a2 = algebra.embed(blurred.space, blurred.object_observable, OBJECT)
    psi = np.array([1.0, 0.0])
    assert not perfect_correlation(a2, schemes.evolve_meter(blurred), blurred.initial_state(psi)).equal


def test_discrete_model_bad_dimension():
    with pytest.raises(BadDimension):
        schemes.build_discrete_von_neumann(1)


@pytest.mark.parametrize("d", [2, 3, 4, 6])
def test_discrete_model_conserves_phase_charge(d):
    s = schemes.build_discrete_von_neumann(d)
    w = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    u = s.unitary
    big = np.kron(w, np.eye(d))
    assert linops.fro(big @ u - u @ big) <= 1e-12


@pytest.mark.parametrize("d", [2, 3, 5])
def test_relative_coordinate_commutes_with_joint_shift(d):
    assert verdicts.check_superselection(schemes.relative_position(d), schemes.total_shift_generator(d)) == 0


def test_fock_single_mode():
    fock = schemes.build_fock_model(1, 2)
    a = fock.annihilation(0)
    np.testing.assert_allclose(fock.number_op, np.diag([0.0, 1.0, 2.0]), atol=1e-15)
    np.testing.assert_allclose(linops.dagger(a) @ a, np.diag([0.0, 1.0, 2.0]), atol=1e-14)
    edge = np.eye(3)
    edge[2, 2] -= 3
    np.testing.assert_allclose(algebra.commutator(a, fock.creation(0)), edge, atol=1e-14)


def test_fock_number_commutes_with_hopping():
    fock = schemes.build_fock_model(3, 1)
    assert np.array_equal(np.sort(np.real(np.diag(fock.number_op))),
                          np.sort([a + b + c for a in (0, 1) for b in (0, 1) for c in (0, 1)]))
    for j in range(3):
        for k in range(3):
            assert linops.fro(algebra.commutator(fock.hopping(j, k), fock.number_op)) <= 1e-10


def test_fock_bad_dimension():
    with pytest.raises(BadDimension):
        schemes.build_fock_model(0, 2)


def test_spin_operators_algebra():
    for dim in (2, 3, 4):
        sz, sp = schemes.spin_operators(dim)
        s = (dim - 1) / 2
        sx = (sp + linops.dagger(sp)) / 2
        sy = (sp - linops.dagger(sp)) / 2j
        casimir = sx @ sx + sy @ sy + sz @ sz
        assert linops.fro(casimir - s * (s + 1) * np.eye(dim)) <= 1e-12
        assert linops.fro(algebra.commutator(sz, sp) - sp) <= 1e-12


def test_way_model_conserves_total_charge():
    s = schemes.build_way_spin_model(2, 1.0, math.pi / 4)
    j1, j2 = s.charges["J1"], s.charges["J2"]
    total = np.kron(j1, np.eye(2)) + np.kron(np.eye(2), j2)
    assert linops.fro(algebra.commutator(total, s.hamiltonian)) <= 1e-10
    assert linops.fro(algebra.commutator(s.meter, j2)) == 0


def test_way_model_against_trotter_oracle():
    s = schemes.build_way_spin_model(3, 0.8, 1.3)
    _, splus = schemes.spin_operators(3)
    exchange = 0.8 * (np.kron(schemes.SIGMA_PLUS, splus.conj().T) + np.kron(schemes.SIGMA_PLUS.T, splus))
    free = s.hamiltonian - exchange
    u = trotter(exchange, free, 1.3)
    oracle = u @ np.kron(np.eye(2), s.meter) @ u.conj().T
    assert linops.fro(schemes.evolve_meter(s) - oracle) <= 1e-6


def test_way_model_free_case():
    s = schemes.build_way_spin_model(3, 0.0, 0.9)
    moved = schemes.evolve_meter(s)
    assert linops.fro(moved - np.kron(np.eye(2), s.meter)) <= 1e-12


@pytest.mark.parametrize("dim", [4, 8, 16])
def test_pointer_translation_generator(dim):
    g = schemes.pointer_translation_generator(dim)
    x = schemes.shift_operator(dim)
    for n in (1, 2, 3):
        assert linops.fro(linops.expi(g, -2 * math.pi * n / dim) - np.linalg.matrix_power(x, n)) <= 1e-10


def test_symmetry_breaking_pointer_moves_apart():
    s = schemes.build_symmetry_breaking_model(1.0, math.pi / 2)
    x = schemes.pointer_positions(16)
    # alpha(B) = u B u^dagger, so states evolve with u^dagger
    u = s.evolution.conj().T
    for k, sign in ((0, 1), (1, -1)):
        out = u @ s.initial_state(schemes.basis_state(2, k))
        probs = np.abs(out.reshape(2, 16)[k]) ** 2
        assert sign * float(probs @ x) == pytest.approx(4.0, abs=1e-9)


def test_symmetry_breaking_field_zero_gives_no_correlation():
    s = schemes.build_symmetry_breaking_model(0.0, 1.0)
    a = algebra.embed(s.space, s.object_observable, OBJECT)
    rep = perfect_correlation(a, schemes.evolve_meter(s), s.initial_state(schemes.basis_state(2, 0)))
    assert not rep.equal


def test_symmetry_breaking_bad_dimension():
    with pytest.raises(BadDimension):
        schemes.build_symmetry_breaking_model(1.0, 1.0, apparatus_dim=6)


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("d", [2, 3, 4])
def test_conjugated_variant_keeps_correlation(d, seed, rng):
    s = schemes.build_conjugated_von_neumann(d, seed)
    a = algebra.embed(s.space, s.object_observable, OBJECT)
    moved = schemes.evolve_meter(s)
    for _ in range(5):
        psi = linops.random_state(d, rng)
        assert perfect_correlation(a, moved, s.initial_state(psi), 1e-10).equal
    charge = np.kron(s.charges["phase"], np.eye(d))
    assert linops.fro(algebra.commutator(charge, s.unitary)) <= 1e-12


def test_replace_rebuilds_and_validates():
    s = schemes.build_discrete_von_neumann(2)
    t = s.replace(label="renamed")
    assert t.label == "renamed" and np.array_equal(t.unitary, s.unitary)
    with pytest.raises(NotNormalized):
        s.replace(apparatus_state=np.array([1.0, 1.0]))
