import numpy as np
import pytest

from blockweyl import (
    ConditioningError,
    free_model,
    geometric_model,
    random_model,
)
from blockweyl._linalg import dagger, opnorm
from blockweyl.green import green_boundary
from blockweyl.weyl import (
    boundary_from_green,
    boundary_matrix_from_green,
    canonical_boundary,
    diameter_bound,
    disc,
    master_identity,
    membership,
    nesting_verdict,
    quadratic_form,
    quadratic_form_sum,
    radius_bound,
    random_unitary,
    surface_point,
    surface_sum_residual,
    unitary_from_green,
    wronskian,
)


def _herm(rng, L):
    a = rng.standard_normal((L, L)) + 1j * rng.standard_normal((L, L))
    return (a + dagger(a)) / 2


def test_free_anchor_form_and_disc():
    Q = quadratic_form(free_model(), 1, 1j)
    assert np.allclose(Q.matrix, [[2, 1j], [-1j, 0]])
    assert Q.signature[:2] == (1, 1)
    d = disc(free_model(), 1, 1j)
    assert np.allclose([d.center[0, 0], d.radius_plus[0, 0], d.radius_minus[0, 0]], [0.5j, 0.5, 0.5])


def test_wronskian_of_solutions_is_constant():
    m = random_model(np.random.default_rng(0), 2, 10)
    from blockweyl.transfer import transfer_product
    z = 0.5 + 1j
    vals = [wronskian(transfer_product(m, n, 0, np.conj(z)).matrix, transfer_product(m, n, 0, z).matrix)
            for n in range(1, 8)]
    for v in vals:
        assert np.allclose(v, vals[0], atol=1e-9)


def test_accumulated_form_and_boundary_term():
    rng = np.random.default_rng(1)
    m = random_model(rng, 2, 8)
    Z = _herm(rng, 2) + 1j * np.diag([0.3, 0.7])
    for z in (1j, 0.5 + 2j):
        Q = quadratic_form(m, 6, z, Z).matrix
        assert np.allclose(Q, quadratic_form_sum(m, 6, z, Z), atol=1e-9 * opnorm(Q))
        assert np.linalg.eigvalsh(Q - quadratic_form(m, 6, z).matrix).min() > -1e-9 * opnorm(Q)


def test_master_identity():
    m = random_model(np.random.default_rng(2), 3, 6)
    lhs, rhs = master_identity(m, 5, 0.3 + 1j, -0.2 - 0.5j, np.diag([0.1j, 0, 1]))
    assert np.allclose(lhs, rhs, atol=1e-9 * opnorm(lhs))


def test_surface_parametrization_round_trip():
    rng = np.random.default_rng(3)
    m = random_model(rng, 2, 7)
    z = 0.4 + 1j
    d = disc(m, 6, z)
    G = green_boundary(m, 6, z, _herm(rng, 2))
    W = unitary_from_green(d, G)
    assert np.allclose(dagger(W) @ W, np.eye(2), atol=1e-9)
    assert np.allclose(surface_point(d, W), G, atol=1e-9)
    assert opnorm(surface_sum_residual(m, 6, z, G)) < 1e-9
    with pytest.raises(ValueError):
        surface_point(d, 2 * np.eye(2))


def test_membership_kinds():
    rng = np.random.default_rng(4)
    m = random_model(rng, 2, 7)
    z = 1j
    assert membership(m, 3, z, green_boundary(m, 3, z, _herm(rng, 2))).kind == "surface"
    assert membership(m, 3, z, green_boundary(m, 3, z, 0.5j * np.eye(2))).kind == "interior"
    # one channel Dirichlet-like, one absorbing: a lower stratum of the closed disc
    assert membership(m, 3, z, green_boundary(m, 3, z, np.diag([0, 0.5j]))).kind in ("boundary", "interior")
    d = disc(m, 3, z)
    assert membership(m, 3, z, d.center + 10 * np.eye(2)).kind == "exterior"


def test_scalar_exterior_anchor():
    d = disc(free_model(), 1, 1j)
    G = d.center + 2 * np.sqrt(d.radius_plus) @ np.sqrt(d.radius_minus)
    assert membership(free_model(), 1, 1j, G).kind == "exterior"
    assert np.isclose(surface_point(d, np.eye(1))[0, 0], 0.5 + 0.5j)


def test_boundary_recovery():
    rng = np.random.default_rng(5)
    m = random_model(rng, 2, 7)
    z = 0.2 + 1j
    b = rng.standard_normal((2, 2))
    Y0 = b @ b.T
    G = green_boundary(m, 3, z, _herm(rng, 2) + 0.5j * Y0)
    Y = boundary_from_green(m, 3, z, G)
    assert np.allclose(Y, Y0, atol=1e-8)
    Z = boundary_matrix_from_green(m, 3, z, G)
    assert np.allclose(1j * (dagger(Z) - Z), Y, atol=1e-8)
    assert np.allclose(green_boundary(m, 3, z, Z), G, atol=1e-10)
    # the imaginary part alone fixes Q but not G
    assert np.allclose(1j * (dagger(canonical_boundary(Y)) - canonical_boundary(Y)), Y)
    assert np.allclose(boundary_from_green(m, 3, z, green_boundary(m, 3, z, 0.7)), 0, atol=1e-8)
    with pytest.raises(ValueError):
        boundary_from_green(m, 3, z, disc(m, 3, z).center + 10 * np.eye(2))


def test_radius_bound_free_anchor():
    bound = radius_bound(free_model(), 3, 1j)
    assert np.isclose(bound, 0.25)
    assert opnorm(disc(free_model(), 3, 1j).radius_plus) <= bound


def test_radius_decreases_in_loewner_order():
    m = random_model(np.random.default_rng(6), 2, 12)
    prev = None
    for N in range(1, 11):
        R = disc(m, N, 1j, "sums").radius_plus
        if prev is not None:
            assert np.linalg.eigvalsh(prev - R).min() > -1e-12
        prev = R


def test_diameter_bound_and_nesting():
    rng = np.random.default_rng(7)
    m = geometric_model(2.0)
    for N in range(2, 8):
        G1 = green_boundary(m, N, 1j, rng.normal())
        G2 = green_boundary(m, N, 1j, rng.normal())
        assert opnorm(G1 - G2) <= diameter_bound(m, N, 1j) + 1e-12
        assert nesting_verdict(m, N, 1j, rng) == "strict"


def test_disc_methods_agree_and_reject_real_energy():
    m = random_model(np.random.default_rng(8), 3, 7)
    a, b = disc(m, 6, 1j, "transfer"), disc(m, 6, 1j, "sums")
    assert np.allclose(a.center, b.center) and np.allclose(a.radius_plus, b.radius_plus)
    with pytest.raises(ValueError):
        disc(m, 6, 1.0)


def test_random_unitary():
    U = random_unitary(np.random.default_rng(0), 3)
    assert np.allclose(dagger(U) @ U, np.eye(3))
