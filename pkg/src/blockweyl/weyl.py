"""Wronskians, the quadratic forms Q_N^z(Z) and finite-volume Weyl discs."""
from dataclasses import dataclass

import numpy as np

from ._linalg import (
    checked_inv,
    checked_solve,
    dagger,
    herm,
    opnorm,
    psd_pinv_sqrt,
    psd_sqrt,
    signature,
    symplectic_form,
)
from .exceptions import ConditioningError
from .model import as_boundary
from .transfer import abcd, solutions, transfer_product


def wronskian(Phi, Psi):
    """(1/i) Phi^* J Psi for stacked 2L x p and 2L x p' matrices."""
    Phi = np.asarray(Phi, dtype=complex)
    Psi = np.asarray(Psi, dtype=complex)
    if Phi.shape[0] != Psi.shape[0] or Phi.shape[0] % 2:
        raise ValueError(f"row counts must agree and be even, got {Phi.shape[0]} and {Psi.shape[0]}")
    J = symplectic_form(Phi.shape[0] // 2)
    return dagger(Phi) @ J @ Psi / 1j


def J_of(Z):
    """J(Z) = [[0, -1], [1, Z - Z^*]]."""
    L = Z.shape[0]
    out = symplectic_form(L)
    out[L:, L:] = Z - dagger(Z)
    return out


def phi_of(G):
    """Plane coordinates (-G; 1) of a Green matrix."""
    G = np.atleast_2d(G)
    return np.vstack([-G, np.eye(G.shape[0])])


@dataclass(frozen=True)
class QuadraticForm:
    matrix: np.ndarray
    z: complex
    N: int
    Z: np.ndarray
    sigma: int

    @property
    def signature(self):
        return signature(self.matrix)

    @property
    def eigenvalues(self):
        return np.linalg.eigvalsh(self.matrix)


def quadratic_form(model, N, z, Z=None):
    """Q_N^z(Z) = (1/i) T^z(N,0)^* J(Z) T^z(N,0)."""
    if np.imag(z) == 0:
        raise ValueError("energy must be off the real axis")
    Z = as_boundary(Z, model.L)
    T = transfer_product(model, N, 0, z).matrix
    Q = herm(dagger(T) @ J_of(Z) @ T / 1j)
    return QuadraticForm(Q, complex(z), int(N), Z, int(np.sign(np.imag(z))))


def quadratic_form_sum(model, N, z, Z=None):
    """Accumulated form (1/i)J + 2 Im z sum_n psi_n^* psi_n + psi_N^* i(Z^* - Z) psi_N."""
    L = model.L
    Z = as_boundary(Z, L)
    sol = solutions(model, N, z)
    rows = np.concatenate([sol.dirichlet[1 : N + 1], sol.anti_dirichlet[1 : N + 1]], axis=2)
    gram = np.einsum("nji,njk->ik", rows.conj(), rows)
    psiN = rows[-1]
    Q = symplectic_form(L) / 1j + 2 * np.imag(z) * gram + dagger(psiN) @ (1j * (dagger(Z) - Z)) @ psiN
    return herm(Q)


def master_identity(model, N, z, zeta, Z=None):
    """Both sides of the two-energy Wronskian identity.

    lhs = T^z(N,0)^* J(Z) T^zeta(N,0)
    rhs = J + (zeta - conj z) sum_{n<N} T^z(n,0)^* diag((T_{n+1}T_{n+1}^*)^{-1}, 0) T^zeta(n,0)
          + T^z(N-1,0)^* diag(T_N^{-*}(Z - Z^*)T_N^{-1}, 0) T^zeta(N-1,0)
    """
    L = model.L
    Z = as_boundary(Z, L)
    Tz = [transfer_product(model, n, 0, z, max_cond=None).matrix for n in range(N + 1)]
    Tw = [transfer_product(model, n, 0, zeta, max_cond=None).matrix for n in range(N + 1)]
    lhs = dagger(Tz[N]) @ J_of(Z) @ Tw[N]
    rhs = symplectic_form(L).astype(complex)
    E = np.zeros((2 * L, 2 * L), dtype=complex)
    for n in range(N):
        T = model.T(n + 1)
        E[:L, :L] = np.linalg.inv(T @ dagger(T))
        rhs = rhs + (zeta - np.conj(z)) * dagger(Tz[n]) @ E @ Tw[n]
    TNi = np.linalg.inv(model.T(N))
    E[:L, :L] = dagger(TNi) @ (Z - dagger(Z)) @ TNi
    rhs = rhs + dagger(Tz[N - 1]) @ E @ Tw[N - 1]
    return lhs, rhs


@dataclass(frozen=True)
class WeylDisc:
    """Matrix ball {S + R^{1/2} W (-Rbar)^{1/2} : ||W|| <= 1} at volume N.

    ``radius_plus`` is R_N^z and ``radius_minus`` is -R_N^{conj z}; for Im z > 0
    both are positive semi-definite.
    """

    center: np.ndarray
    radius_plus: np.ndarray
    radius_minus: np.ndarray
    z: complex
    N: int
    center_conj: np.ndarray = None
    wronskian_gap: float = 0.0

    @property
    def L(self):
        return self.center.shape[0]


def _sums(model, N, z):
    sol = solutions(model, N, z)
    D = sol.dirichlet[1 : N + 1]
    A = sol.anti_dirichlet[1 : N + 1]
    sdd = np.einsum("nji,njk->ik", D.conj(), D)
    sda = np.einsum("nji,njk->ik", D.conj(), A)
    return sdd, sda


def disc_from_sums(sdd, sda, z):
    """(R, S) from the Gram sums sum psi^{D*}psi^D and sum psi^{D*}psi^A."""
    L = sdd.shape[0]
    R = herm(checked_inv(2 * np.imag(z) * herm(sdd), "Dirichlet Gram matrix"))
    S = 1j * R @ (np.eye(L) - (z - np.conj(z)) * sda)
    return R, S


def _disc_transfer(model, N, z):
    A, B, C, D = abcd(transfer_product(model, N, 0, z))
    R = herm(1j * checked_inv(dagger(C) @ A - dagger(A) @ C, "radial bracket"))
    S = 1j * R @ (dagger(A) @ D - dagger(C) @ B)
    return R, S


def disc(model, N, z, method="auto"):
    """Weyl disc at volume N.

    "transfer" uses the A/B/C/D blocks, "sums" the Dirichlet Gram sums; "auto"
    computes both when the transfer product is well conditioned and records
    their disagreement in ``wronskian_gap``, otherwise it uses the sums.
    """
    if np.imag(z) == 0:
        raise ValueError("energy must be off the real axis")
    zb = np.conj(z)
    if method == "sums":
        R, S = disc_from_sums(*_sums(model, N, z), z)
        Rb, Sb = disc_from_sums(*_sums(model, N, zb), zb)
        return WeylDisc(S, R, -Rb, complex(z), int(N), Sb)
    try:
        R, S = _disc_transfer(model, N, z)
        Rb, Sb = _disc_transfer(model, N, zb)
    except ConditioningError:
        if method == "transfer":
            raise
        return disc(model, N, z, "sums")
    gap = 0.0
    if method == "auto":
        R2, S2 = disc_from_sums(*_sums(model, N, z), z)
        scale = 1.0 + opnorm(R) + opnorm(S)
        gap = max(opnorm(R - R2), opnorm(S - S2)) / scale
        if gap > 1e-9:
            raise ConditioningError(f"transfer and sum forms of the disc disagree by {gap:.2e}")
    return WeylDisc(S, R, -Rb, complex(z), int(N), Sb, gap)


def _check_unitary(W, tol=1e-10):
    W = np.atleast_2d(np.asarray(W, dtype=complex))
    if np.linalg.norm(dagger(W) @ W - np.eye(W.shape[0])) > tol:
        raise ValueError("W is not unitary")
    return W


def surface_point(d, W):
    """S + R^{1/2} W (-Rbar)^{1/2} for unitary W."""
    W = _check_unitary(W)
    return d.center + psd_sqrt(d.radius_plus) @ W @ psd_sqrt(d.radius_minus)


def unitary_from_green(d, G):
    """Inverse of :func:`surface_point`: R^{-1/2}(G - S)(-Rbar)^{-1/2}."""
    a = psd_pinv_sqrt(d.radius_plus, 0.0)
    b = psd_pinv_sqrt(d.radius_minus, 0.0)
    return a @ (np.atleast_2d(G) - d.center) @ b


@dataclass(frozen=True)
class Membership:
    kind: str
    witness: np.ndarray
    tol: float


def membership(model, N, z, G, Q=None):
    """Classify G relative to the disc at volume N.

    The witness is M = sigma Phi_G^* Q_N^z Phi_G.  "interior" means M < -tol,
    "surface" means ||M|| <= tol, "boundary" means M <= tol with only some
    eigenvalues within tol (a lower stratum of the closed disc) and
    "exterior" means M has an eigenvalue above tol.
    """
    if Q is None:
        Q = quadratic_form(model, N, z)
    G = np.atleast_2d(np.asarray(G, dtype=complex))
    M = herm(Q.sigma * dagger(phi_of(G)) @ Q.matrix @ phi_of(G))
    tol = 1e-8 * opnorm(Q.matrix) * (1.0 + opnorm(G) ** 2)
    w = np.linalg.eigvalsh(M)
    if w.max() < -tol:
        kind = "interior"
    elif np.abs(w).max() <= tol:
        kind = "surface"
    elif w.max() <= tol:
        kind = "boundary"
    else:
        kind = "exterior"
    return Membership(kind, M, float(tol))


def surface_sum_residual(model, N, z, G):
    """2|Im z| sum_n |psi^D_n G - psi^A_n|^2 - i(G^* - G); zero on the Weyl surface."""
    G = np.atleast_2d(np.asarray(G, dtype=complex))
    sol = solutions(model, N, z)
    f = sol.dirichlet[1 : N + 1] @ G - sol.anti_dirichlet[1 : N + 1]
    s = np.einsum("nji,njk->ik", f.conj(), f)
    return 2 * abs(np.imag(z)) * s - 1j * (dagger(G) - G)


def boundary_from_green(model, N, z, G):
    """Imaginary part Y = i(Z^* - Z) of a boundary condition producing G.

    G must lie in the closed disc (Im z > 0).  Y solves
    Phi_G^* Q Phi_G + X^* Y X = 0 with X = C G - D.  Y does not see the
    Hermitian part of Z, which leaves Q unchanged but moves G; the full
    boundary matrix is returned by :func:`boundary_matrix_from_green`.
    """
    if np.imag(z) <= 0:
        raise ValueError("boundary recovery is implemented for Im z > 0")
    G = np.atleast_2d(np.asarray(G, dtype=complex))
    Q = quadratic_form(model, N, z)
    mem = membership(model, N, z, G, Q)
    if mem.kind == "exterior":
        raise ValueError("G lies outside the Weyl disc; no boundary condition produces it")
    _, _, C, D = abcd(transfer_product(model, N, 0, z))
    X = C @ G - D
    try:
        Xinv = checked_inv(X, "C G - D")
    except ConditioningError as exc:
        raise ValueError("inconsistent input: C G - D is singular") from exc
    Y = herm(-dagger(Xinv) @ mem.witness @ Xinv)
    w = np.linalg.eigvalsh(Y)
    if w.min() < -1e-8 * max(1.0, w.max()):
        raise ValueError("recovered boundary is not in the closed upper half-plane")
    return Y


def boundary_matrix_from_green(model, N, z, G):
    """The boundary matrix Z with G_N^z(Z) = G, namely (B - A G)(C G - D)^{-1}."""
    G = np.atleast_2d(np.asarray(G, dtype=complex))
    A, B, C, D = abcd(transfer_product(model, N, 0, z))
    X = C @ G - D
    try:
        return checked_solve(X.T, (B - A @ G).T, "C G - D").T
    except ConditioningError as exc:
        raise ValueError("inconsistent input: C G - D is singular") from exc


def canonical_boundary(Y):
    """Z = iY/2, the gauge-fixed boundary with i(Z^* - Z) = Y."""
    return 0.5j * np.asarray(Y)


def radius_bound(model, N, z):
    """[2 Im(z)^2 sum_{n=2}^N 1/||T_n||]^{-1}; raises if ||R_N^z|| exceeds it."""
    if N < 2 or np.imag(z) <= 0:
        raise ValueError("the radius bound needs N >= 2 and Im z > 0")
    total = sum(1.0 / opnorm(model.T(n)) for n in range(2, N + 1))
    bound = 1.0 / (2 * np.imag(z) ** 2 * total)
    R = disc(model, N, z, "sums").radius_plus
    if opnorm(R) > bound * (1 + 1e-9):
        raise ConditioningError(f"||R_N|| = {opnorm(R):.3e} exceeds the bound {bound:.3e}")
    return bound


def diameter_bound(model, N, z):
    """2 sqrt(||R^z|| ||R^{conj z}||), bounding ||G(xi) - G(xi')||."""
    d = disc(model, N, z, "sums")
    return 2 * np.sqrt(opnorm(d.radius_plus) * opnorm(d.radius_minus))


def random_unitary(rng, L):
    a = rng.standard_normal((L, L)) + 1j * rng.standard_normal((L, L))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / abs(np.diag(r)))


def nesting_verdict(model, N, z, rng, samples=50):
    """'strict' if sampled surface points of disc N+1 are interior to disc N-1."""
    if N < 2:
        raise ValueError("nesting compares volumes N-1 >= 1 and N+1")
    outer = quadratic_form(model, N - 1, z)
    d = disc(model, N + 1, z, "sums")
    for _ in range(samples):
        G = surface_point(d, random_unitary(rng, model.L))
        if membership(model, N - 1, z, G, outer).kind != "interior":
            return "violated"
    return "strict"
