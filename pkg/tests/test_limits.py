import numpy as np
import pytest

from blockweyl import (
    COMPLETELY_INDETERMINATE,
    INTERMEDIATE,
    LIMIT_POINT,
    ConvergenceError,
    block_mixed_model,
    free_model,
    geometric_model,
)
from blockweyl._linalg import dagger, opnorm, symplectic_form
from blockweyl.green import green_boundary
from blockweyl.limits import (
    WRONSKIAN_PAIRS,
    classify,
    limit_disc,
    limit_form,
    limit_wronskian,
    normalized_solution,
)

MODELS = {
    "free": (free_model(), LIMIT_POINT, 0),
    "geometric": (geometric_model(2.0), COMPLETELY_INDETERMINATE, 1),
    "block_mixed": (block_mixed_model(2.0), INTERMEDIATE, 1),
}


@pytest.mark.parametrize("name", sorted(MODELS))
@pytest.mark.parametrize("z", [1j, 2j, 1 + 1j])
def test_reference_classification(name, z):
    model, label, n = MODELS[name]
    lim = limit_disc(model, z)
    assert lim.classification == label and lim.n_z == lim.n_zbar == n
    assert lim.converged and not lim.ambiguous
    P0, Pp = lim.P0, lim.Pplus
    assert np.allclose(P0 + Pp, np.eye(model.L), atol=1e-12)
    assert np.allclose(Pp @ Pp, Pp, atol=1e-12) and np.allclose(Pp, dagger(Pp), atol=1e-12)
    norms = [r["norm_R"] for r in lim.convergence_report]
    assert all(b <= a * (1 + 1e-10) + 1e-14 for a, b in zip(norms, norms[1:]))


def test_free_center_is_limit_green_matrix():
    S = limit_disc(free_model(), 1j).S_limit[0, 0]
    assert np.isclose(S, 1j * (np.sqrt(5) - 1) / 2, atol=1e-10)
    assert np.isclose(S, green_boundary(free_model(), 2000, 1j)[0, 0], atol=1e-10)
    # fixed point of G = (-z - G)^{-1}
    assert np.isclose(S, 1 / (-1j - S))


def test_block_mixed_decouples():
    mixed = limit_disc(block_mixed_model(2.0), 1j)
    geo = limit_disc(geometric_model(2.0), 1j)
    assert np.isclose(mixed.R_limit[1, 1], geo.R_limit[0, 0])
    assert np.allclose(mixed.Pplus, np.diag([0, 1]), atol=1e-12)


def test_unconverged_is_flagged():
    lim = limit_disc(geometric_model(2.0), 1j, schedule=(8, 16))
    assert not lim.converged
    with pytest.raises(ConvergenceError):
        lim.require_converged()
    with pytest.raises(ValueError):
        limit_disc(free_model(), 1.0)
    with pytest.raises(ValueError):
        limit_disc(free_model(), 1j, schedule=(16, 8))


def test_classify_helper():
    assert classify(0, 0, 2) == LIMIT_POINT
    assert classify(2, 2, 2) == COMPLETELY_INDETERMINATE
    assert classify(1, 2, 2) == INTERMEDIATE


@pytest.mark.parametrize("name,expected,witt", [
    ("free", {"inf": 1, "minus": 0, "zero": 1, "plus": 0}, 1),
    ("geometric", {"inf": 0, "minus": 1, "zero": 0, "plus": 1}, 1),
    ("block_mixed", {"inf": 1, "minus": 1, "zero": 1, "plus": 1}, 2),
])
def test_limit_form_dimensions(name, expected, witt):
    model = MODELS[name][0]
    form = limit_form(model, 1j)
    assert form.dims() == expected and form.witt_index == witt and form.converged
    total = form.Pinf + form.Pminus + form.Pzero + form.Pplus2L
    assert np.allclose(total, np.eye(2 * model.L), atol=1e-10)
    # P_inf^z = J P_0^{conj z} J^*, where the conjugate form's zero space is read off at conj z
    conj = limit_form(model, -1j)
    J = symplectic_form(model.L)
    assert np.allclose(form.Pinf, J @ conj.Pzero @ dagger(J), atol=1e-8)


def test_normalized_solution_gram():
    ns = normalized_solution(geometric_model(2.0), 1j, 128)
    assert ns.valid and np.isclose(ns.gram[0, 0], 1, atol=1e-6)
    mixed = normalized_solution(block_mixed_model(2.0), 1j, 128)
    assert np.allclose(mixed.gram, np.diag([0, 1]), atol=1e-6)
    assert np.allclose(normalized_solution(free_model(), 1j).values, 0)


@pytest.mark.parametrize("which", WRONSKIAN_PAIRS)
@pytest.mark.parametrize("name", ["geometric", "block_mixed"])
def test_limit_wronskians(which, name):
    model = MODELS[name][0]
    w = limit_wronskian(model, 1j, which, horizon=128)
    assert w.converged
    assert opnorm(w.value - w.expected) < 1e-8


def test_tilde_self_wronskian_anchor():
    w = limit_wronskian(geometric_model(2.0), 1j, "tilde-tilde", horizon=128)
    # 2 Im z P_+ with L = 1 and P_+ = 1
    assert np.isclose(w.value[0, 0], 2.0, atol=1e-8)


def test_free_tilde_pairs_vanish():
    for which in ("tilde-tildebar", "tilde-tilde", "dirichlet-tilde"):
        assert np.allclose(limit_wronskian(free_model(), 1j, which).value, 0)
    with pytest.raises(ValueError):
        limit_wronskian(free_model(), 1j, "bogus")
