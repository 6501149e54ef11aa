import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blockweyl import (
    BoundaryCondition,
    ModelError,
    assemble_hamiltonian,
    block_mixed_model,
    explicit_model,
    free_model,
    geometric_model,
    load_model,
    random_model,
)
from blockweyl.model import as_boundary, dense_operator


def test_t1_is_identity_and_blocks_are_cached():
    m = geometric_model(2.0, L=2)
    assert np.array_equal(m.T(1), np.eye(2))
    assert np.array_equal(m.T(3), 4 * np.eye(2))
    assert m.T(3) is m.T(3)
    with pytest.raises(ValueError):
        m.T(3)[0, 0] = 1.0


def test_index_below_one_rejected():
    with pytest.raises(ModelError):
        free_model().T(0)
    with pytest.raises(ModelError):
        free_model().V(0)


def test_singular_block_names_site():
    singular = np.array([[1.0, 1.0], [1.0, 1.0]])
    with pytest.raises(ModelError) as info:
        explicit_model([np.eye(2), singular], [np.zeros((2, 2))])
    assert info.value.site == 3
    assert "T_3" in str(info.value)


def test_non_hermitian_potential_rejected():
    with pytest.raises(ModelError) as info:
        explicit_model([np.eye(2)], [np.zeros((2, 2)), np.array([[0, 1], [0, 0]])])
    assert info.value.site == 2


def test_explicit_model_repeats_last_entry():
    m = explicit_model([2 * np.eye(1)], [np.ones((1, 1))])
    assert m.extended
    assert m.T(7)[0, 0] == 2 and m.V(9)[0, 0] == 1


def test_block_mixed_accepts_growing_channel():
    m = block_mixed_model(2.0)
    # condition number 2^60 would fail a relative singular-value cap
    assert m.T(61)[1, 1] == 2.0 ** 60


def test_load_model_formats():
    m = load_model({"L": 1, "family": "explicit", "T": [[[[2, 0]]]], "V": [[[[0.5, 0]]]]})
    assert m.T(2)[0, 0] == 2 and m.V(1)[0, 0] == 0.5
    m = load_model({"L": 2, "family": "geometric", "params": {"c": 3}})
    assert m.T(2)[1, 1] == 3
    assert load_model({"L": 2, "family": "block_mixed"}).L == 2
    with pytest.raises(ModelError):
        load_model({"L": 1, "family": "unknown"})
    with pytest.raises(ModelError):
        load_model({"L": 3, "family": "block_mixed"})


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(1, 8), st.integers(0, 2**31 - 1))
def test_hamiltonian_is_hermitian(L, N, seed):
    rng = np.random.default_rng(seed)
    m = random_model(rng, L, N)
    xi = rng.standard_normal((L, L))
    H = assemble_hamiltonian(m, N, xi + xi.T, None)
    assert np.allclose(H, H.conj().T, atol=1e-14)


def test_boundary_folding_signs():
    m = free_model()
    H = dense_operator(m, 3, 0.25, 0.5)
    assert H[0, 0] == -0.25 and H[2, 2] == -0.5 and H[0, 1] == 1


def test_boundary_condition_kinds():
    BoundaryCondition.half_plane(np.array([[1j]]))
    with pytest.raises(ModelError):
        BoundaryCondition.half_plane(np.array([[-1j]]))
    with pytest.raises(ModelError):
        BoundaryCondition.hermitian(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ModelError):
        assemble_hamiltonian(free_model(), 2, None, 1j)
    assert as_boundary(2.0, 2).shape == (2, 2)


def test_concurrent_block_access_is_consistent():
    from concurrent.futures import ThreadPoolExecutor
    from blockweyl.green import green_boundary

    m = random_model(np.random.default_rng(3), 2, 40)
    with ThreadPoolExecutor(8) as pool:
        blocks = list(pool.map(lambda n: m.T(1 + n % 20), range(200)))
        greens = list(pool.map(lambda _: green_boundary(m, 30, 1j), range(16)))
    assert all(b is m.T(1 + i % 20) for i, b in enumerate(blocks))
    assert all(np.array_equal(g, greens[0]) for g in greens)
