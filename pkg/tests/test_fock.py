import math

import numpy as np
import pytest

from biphoton_fwm.config import SimConfig
from biphoton_fwm.errors import CapacityExceeded, ConstructionBug, InvalidInput
from biphoton_fwm.fock import (
    E1,
    E2,
    OM1,
    OM2,
    FockBasis,
    HamiltonianMatrix,
    build_interaction,
    build_kinetic,
    crosscheck,
    evolve_exact,
    fock_to_grids,
    grids_to_fock,
    lambda_identity_residual,
    ordering_commutator,
    pair_exchange,
    propagator_matrix,
)
from biphoton_fwm.lattice import (
    Lattice,
    diagonal_entangled_input,
    make_gaussian_envelope,
    random_state,
)
from biphoton_fwm.propagator import MediumMask


def test_two_photon_sector_dimension():
    for M in (1, 2, 3, 4, 5):
        assert FockBasis(M).dim == (2 * M) ** 2


def test_capacity_limits():
    with pytest.raises(CapacityExceeded):
        FockBasis(6)
    with pytest.raises(CapacityExceeded):
        FockBasis(3, 3, 2)
    with pytest.raises(CapacityExceeded):
        FockBasis(0)


def test_interaction_hermitian_and_pair_flip():
    basis = FockBasis(3)
    kappa, c = 0.3, 2.0
    H = build_interaction(basis, kappa, c)
    assert np.abs(H.matrix - H.matrix.conj().T).max() <= 1e-14
    for l in range(3):
        src = np.zeros(basis.dim)
        src[basis.pair_state(OM1, l, OM2, l)] = 1
        out = H.matrix @ src
        expected = np.zeros(basis.dim, complex)
        expected[basis.pair_state(E1, l, E2, l)] = kappa * c
        np.testing.assert_allclose(out, expected, atol=1e-15)


def test_interaction_is_local():
    basis = FockBasis(3)
    H = build_interaction(basis, 0.5)
    # pair split over two cells sees no interaction
    v = np.zeros(basis.dim)
    v[basis.pair_state(OM1, 0, OM2, 1)] = 1
    assert not (H.matrix @ v).any()
    # mixed species pair at one cell is also inert
    v = np.zeros(basis.dim)
    v[basis.pair_state(OM1, 2, E2, 2)] = 1
    assert not (H.matrix @ v).any()


def test_vacuum_untouched():
    basis = FockBasis(3, 0, 0)
    assert basis.dim == 1
    assert not build_interaction(basis, 1.0).matrix.any()
    assert not build_kinetic(basis, Lattice(3)).matrix.any()


def test_masked_interaction():
    basis = FockBasis(3)
    H = build_interaction(basis, 1.0, mask=MediumMask.window(3, 1, 2))
    for l, on in ((0, 0.0), (1, 1.0), (2, 0.0)):
        v = np.zeros(basis.dim)
        v[basis.pair_state(OM1, l, OM2, l)] = 1
        assert np.linalg.norm(H.matrix @ v) == pytest.approx(on)


def test_kinetic_spectrum_is_one_body_frequencies():
    lat = Lattice(5, dz=0.5, c=3.0)
    basis = FockBasis(5, 1, 0)
    H = build_kinetic(basis, lat)
    w = np.sort(np.linalg.eigvalsh(H.matrix))
    k = np.arange(-2, 3)
    omega = 2 * np.pi * k * lat.c / lat.L
    # two species carry photon 1
    np.testing.assert_allclose(w, np.sort(np.concatenate([omega, omega])), atol=1e-12)


def test_kinetic_cell_time_is_shift():
    lat = Lattice(3)
    basis = FockBasis(3)
    U = propagator_matrix(build_kinetic(basis, lat), lat.cell_time)
    for l in range(3):
        for lp in range(3):
            v = np.zeros(basis.dim)
            v[basis.pair_state(OM1, l, OM2, lp)] = 1
            target = basis.pair_state(OM1, (l + 1) % 3, OM2, (lp + 1) % 3)
            out = U @ v
            assert abs(out[target]) == pytest.approx(1.0, abs=1e-13)
            assert np.linalg.norm(out) == pytest.approx(1.0, abs=1e-13)


def test_kinetic_is_additive_over_photons():
    lat = Lattice(3)
    one = build_kinetic(FockBasis(3, 1, 0), lat)
    two = build_kinetic(FockBasis(3, 1, 1), lat)
    w1 = np.linalg.eigvalsh(one.matrix)
    sums = np.sort(np.add.outer(w1, w1).ravel())
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(two.matrix)), sums, atol=1e-12)


def test_continuous_kinetic_does_not_commute_with_interaction():
    lat = Lattice(3)
    basis = FockBasis(3)
    Hk = build_kinetic(basis, lat).matrix
    Hi = build_interaction(basis, 0.2).matrix
    assert np.abs(Hk @ Hi - Hi @ Hk).max() > 1e-3
    # but a whole-cell translation does commute on a full ring
    U = propagator_matrix(HamiltonianMatrix(basis, Hk), lat.cell_time)
    assert np.abs(U @ Hi - Hi @ U).max() < 1e-13


def test_evolve_exact_trivial_cases(rng):
    basis = FockBasis(2)
    v = rng.normal(size=basis.dim) + 0j
    H = build_interaction(basis, 0.7)
    np.testing.assert_array_equal(evolve_exact(H, v, 0.0), v)
    np.testing.assert_allclose(evolve_exact(np.zeros((basis.dim, basis.dim)), v, 3.0), v, atol=1e-15)
    with pytest.raises(InvalidInput):
        evolve_exact(np.triu(np.ones((4, 4))), np.ones(4), 1.0)


def test_quarter_cycle_overlap_is_minus_i():
    lat = Lattice(3)
    basis = FockBasis(3)
    kappa, c = 0.4, 1.0
    s = diagonal_entangled_input(make_gaussian_envelope(lat, 1, 1.0))
    v0 = grids_to_fock(s, basis)
    target = grids_to_fock(s.swapped(), basis)
    v = evolve_exact(build_interaction(basis, kappa, c), v0, math.pi / (2 * kappa * c))
    assert np.vdot(target, v) == pytest.approx(-1j, abs=1e-12)


def test_nonhermitian_construction_caught():
    basis = FockBasis(1)
    bad = np.zeros((basis.dim, basis.dim), complex)
    bad[0, 1] = 1.0
    with pytest.raises(ConstructionBug):
        HamiltonianMatrix(basis, bad)


def test_ordering_commutator_and_lambda():
    basis = FockBasis(3)
    for l in range(3):
        assert ordering_commutator(basis, l) == 0.0
    X = pair_exchange(basis, 0)
    assert np.abs(X - X.T).max() == 0
    v = grids_to_fock(random_state(Lattice(3), np.random.default_rng(1)), basis)
    assert lambda_identity_residual(basis, v) == 0.0
    # outside the one-photon-per-species sector the denominator differs from 1
    big = FockBasis(2, 2, 2)
    w = np.zeros(big.dim)
    occ = [0] * 8
    occ[big.mode(OM1, 0)] = 2
    occ[big.mode(OM2, 1)] = 1
    occ[big.mode(E2, 1)] = 1
    w[big.index[tuple(occ)]] = 1
    # no cell holds a convertible pair, so Lambda never matters
    assert lambda_identity_residual(big, w) == 0.0
    occ = [0] * 8
    occ[big.mode(OM1, 0)] = 1
    occ[big.mode(E1, 0)] = 1
    occ[big.mode(E2, 0)] = 2
    w = np.zeros(big.dim)
    w[big.index[tuple(occ)]] = 1
    assert lambda_identity_residual(big, w) > 0.1


def test_grid_embedding_roundtrip(rng):
    lat = Lattice(3, dz=0.5)
    basis = FockBasis(3)
    s = random_state(lat, rng)
    v = grids_to_fock(s, basis)
    assert np.vdot(v, v).real == pytest.approx(s.norm, abs=1e-14)
    po, pe, mixed = fock_to_grids(v, basis, lat)
    np.testing.assert_allclose(po, s.psi_omega, atol=1e-15)
    np.testing.assert_allclose(pe, s.psi_e, atol=1e-15)
    assert not mixed.any()
    with pytest.raises(InvalidInput):
        grids_to_fock(s, FockBasis(2))


@pytest.mark.parametrize("config", [
    SimConfig(M=3, kappa=0.2, steps=30, envelope="gaussian:1,1"),
    SimConfig(M=3, kappa=0.2, steps=30, envelope="gaussian:1,1", input="diagonal", initial_sector="e"),
    SimConfig(M=5, kappa=0.3, steps=20, envelope="point:1", mask="window:1,4"),
])
def test_crosscheck_matches_propagator(config):
    rep = crosscheck(config)
    assert rep.passed, rep.failures
    assert rep.max_deviation < 1e-9
    assert rep.max_leakage < 1e-12
    assert rep.lambda_residual < 1e-12
    assert rep.runtime < 30
