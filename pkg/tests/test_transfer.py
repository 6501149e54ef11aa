import numpy as np
import pytest

from blockweyl import ConditioningError, free_model, geometric_model, random_model
from blockweyl._linalg import dagger, symplectic_form
from blockweyl.transfer import (
    solutions,
    symplectic_inverse,
    transfer_product,
    transfer_step,
    transfer_step_inverse,
)


@pytest.fixture
def model():
    return random_model(np.random.default_rng(11), 2, 12)


def test_step_inverse(model):
    z = 0.4 + 1.3j
    for n in range(1, 6):
        assert np.allclose(transfer_step(model, n, z) @ transfer_step_inverse(model, n, z), np.eye(4))


def test_products_compose_and_invert(model):
    z = 1j
    a = transfer_product(model, 7, 3, z)
    b = transfer_product(model, 3, 0, z)
    assert np.allclose((a @ b).matrix, transfer_product(model, 7, 0, z).matrix)
    back = transfer_product(model, 0, 7, z).matrix
    assert np.allclose(back @ transfer_product(model, 7, 0, z).matrix, np.eye(4), atol=1e-9)
    assert np.array_equal(transfer_product(model, 4, 4, z).matrix, np.eye(4))


def test_symplectic_relation(model):
    z = 0.3 + 0.8j
    J = symplectic_form(2)
    T = transfer_product(model, 6, 0, z).matrix
    Tb = transfer_product(model, 6, 0, np.conj(z)).matrix
    assert np.allclose(dagger(Tb) @ J @ T, J, atol=1e-10)
    assert np.allclose(symplectic_inverse(model, 6, z) @ T, np.eye(4), atol=1e-9)


def test_solutions_satisfy_recurrence(model):
    z = -0.2 + 0.9j
    sol = solutions(model, 8, z)
    for name in ("dirichlet", "anti_dirichlet"):
        psi = getattr(sol, name)
        for n in range(1, 9):
            lhs = model.T(n + 1) @ psi[n + 1] + model.V(n) @ psi[n] + dagger(model.T(n)) @ psi[n - 1]
            assert np.allclose(lhs, z * psi[n], atol=1e-10)
    assert np.allclose(sol.dirichlet[1], np.eye(2)) and np.allclose(sol.dirichlet[0], 0)
    assert np.allclose(sol.anti_dirichlet[1], 0) and np.allclose(sol.anti_dirichlet[0], np.eye(2))


def test_free_single_step():
    T = transfer_product(free_model(), 1, 0, 1j).matrix
    assert np.allclose(T, [[1j, -1], [1, 0]])


def test_conditioning_monitor():
    with pytest.raises(ConditioningError):
        transfer_product(geometric_model(10.0), 30, 0, 1j)
    assert transfer_product(geometric_model(10.0), 30, 0, 1j, max_cond=None).matrix.shape == (2, 2)
