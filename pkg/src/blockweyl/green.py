"""Finite-volume Green matrices, the dense oracle, the inhomogeneous solver and
finite-volume matrix spectral measures."""
from dataclasses import dataclass

import numpy as np

from ._linalg import checked_solve, dagger, opnorm
from .exceptions import ConditioningError
from .model import as_boundary, assemble_hamiltonian, dense_operator
from .transfer import abcd, transfer_product, transfer_step

_CORNERS = {"11", "1N", "N1", "NN"}


def _corner_key(corner, N):
    if isinstance(corner, str):
        key = corner.upper().replace(",", "").replace(" ", "").strip("()")
    else:
        key = "".join("1" if k == 1 else "N" if k == N else "?" for k in corner)
    if N == 1 and key in _CORNERS:
        key = "11"
    if key not in _CORNERS:
        raise ValueError(f"corner must be one of (1,1), (1,N), (N,1), (N,N); got {corner!r}")
    return key


def green_dirichlet(model, N, z, corner=(1, 1)):
    """Corner block of (H^N - z)^{-1} with Dirichlet conditions, from T^z(N,0).

    (1,1): A^{-1} B    (1,N): -A^{-1}    (N,N): -C A^{-1}    (N,1): -D + C A^{-1} B

    The Schur complement D - C A^{-1} B cancels badly for long chains; it
    equals ((A^{conj z})^*)^{-1} by the symplectic inverse identity, which is
    how the (N,1) corner is evaluated.
    """
    if np.imag(z) == 0:
        raise ValueError("energy must be off the real axis")
    key = _corner_key(corner, N)
    if key == "N1":
        Abar = abcd(transfer_product(model, N, 0, np.conj(z)))[0]
        return -checked_solve(dagger(Abar), np.eye(model.L), "A_N at conj(z)")
    A, B, C, D = abcd(transfer_product(model, N, 0, z))
    if key == "11":
        return checked_solve(A, B, "A_N")
    Ainv = checked_solve(A, np.eye(model.L), "A_N")
    if key == "1N":
        return -Ainv
    return -C @ Ainv


def _fold(M, Z, zhat):
    """Boundary-folded transfer matrix [[1, Z], [0, 1]] M [[1, 0], [-Zhat, 1]]."""
    L = M.shape[0] // 2
    left = np.eye(2 * L, dtype=complex)
    left[:L, L:] = Z
    right = np.eye(2 * L, dtype=complex)
    right[L:, :L] = -zhat
    return left @ M @ right


def _green_recursion(model, N, z, Z, zhat):
    """G(1,1) by backward Schur complements; stable for long chains."""
    L = model.L
    eye = np.eye(L)
    g = None
    for k in range(N, 0, -1):
        M = model.V(k) - z * eye
        if k == N:
            M = M - Z
        if k == 1:
            M = M - zhat
        if g is not None:
            T = model.T(k + 1)
            M = M - T @ g @ dagger(T)
        g = checked_solve(M, eye.astype(complex), f"Schur complement at site {k}")
    return g


def green_boundary(model, N, z, Z=None, zhat=None, method="auto"):
    """G_N^z(Z) = (A + Z C)^{-1}(B + Z D), the (1,1) block with right condition Z.

    ``method`` is "transfer" (blocks of T^z(N,0)), "recursion" (backward Schur
    complements) or "auto" (transfer, falling back to the recursion when the
    transfer product is too ill-conditioned, as for long chains).
    """
    L = model.L
    Z = as_boundary(Z, L)
    zhat = as_boundary(zhat, L)
    if method not in ("auto", "transfer", "recursion"):
        raise ValueError(f"unknown method {method!r}")
    if method in ("auto", "transfer"):
        try:
            M = _fold(transfer_product(model, N, 0, z).matrix, Z, zhat)
            A, B, _, _ = abcd(M)
            return checked_solve(A, B, "A + Z C")
        except ConditioningError:
            if method == "transfer":
                raise
    return _green_recursion(model, N, z, Z, zhat)


def green_boundary_dual(model, N, z, Z=None):
    """Second representation ((D')^* Z + (B')^*)((C')^* Z + (A')^*)^{-1}, blocks at conj(z)."""
    L = model.L
    Z = as_boundary(Z, L)
    A, B, C, D = abcd(transfer_product(model, N, 0, np.conj(z)))
    num = dagger(D) @ Z + dagger(B)
    den = dagger(C) @ Z + dagger(A)
    return checked_solve(den.T, num.T, "C^* Z + A^*").T


def green_oracle(model, N, z, zhat=None, zright=None, n=1, m=1):
    """Block (n, m) of (H^N - z)^{-1} by a dense solve."""
    L = model.L
    H = dense_operator(model, N, zhat, zright) - z * np.eye(N * L)
    rhs = np.zeros((N * L, L), dtype=complex)
    rhs[(m - 1) * L : m * L] = np.eye(L)
    try:
        col = np.linalg.solve(H, rhs)
    except np.linalg.LinAlgError as exc:
        raise ConditioningError("dense system is singular") from exc
    return col[(n - 1) * L : n * L]


@dataclass(frozen=True)
class GreenEntry:
    value: np.ndarray
    z: complex
    N: int
    corner: tuple
    boundary: tuple


def solve_inhomogeneous(model, N, z, zhat=None, zright=None, psi=None):
    """Solve (H^N_{Zhat,Z} - z) phi = psi by transfer matrices.

    ``psi`` has shape (N, L, p) (site n at index n-1).  The solution is built
    from phi_1 = -(A')^{-1} [1, Z] sum_n T^z(N,n)(psi_n; 0), where A' is the
    upper-left block of the folded transfer matrix, and then propagated.
    """
    L = model.L
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim == 2:
        psi = psi[:, :, None]
    if psi.shape[:2] != (N, L):
        raise ValueError(f"psi must have shape (N, L, p) = ({N}, {L}, p), got {psi.shape}")
    p = psi.shape[2]
    Z = as_boundary(zright, L)
    zhat = as_boundary(zhat, L)
    steps = [transfer_step(model, n, z) for n in range(1, N + 1)]

    acc = np.zeros((2 * L, p), dtype=complex)
    for n in range(1, N + 1):
        acc = steps[n - 1] @ acc
        acc[:L] += psi[n - 1]
    row = np.hstack([np.eye(L), Z])
    Ap = _fold(transfer_product(model, N, 0, z).matrix, Z, zhat)[:L, :L]
    phi1 = -checked_solve(Ap, row @ acc, "A + Z C")

    phi = np.empty((N, L, p), dtype=complex)
    state = np.vstack([phi1, -zhat @ phi1])
    for n in range(1, N + 1):
        state = steps[n - 1] @ state
        state[:L] += psi[n - 1]
        phi[n - 1] = state[L:]
    H = dense_operator(model, N, zhat, Z) - z * np.eye(N * L)
    res = H @ phi.reshape(N * L, p) - psi.reshape(N * L, p)
    scale = opnorm(H) * np.linalg.norm(phi) + np.linalg.norm(psi)
    if np.linalg.norm(res) > 1e-9 * max(scale, 1e-300):
        raise ConditioningError("transfer solution of the inhomogeneous problem lost accuracy")
    return phi


@dataclass(frozen=True)
class SpectralMeasure:
    """Finite atomic matrix measure: ``energies[k]`` carries weight ``weights[k]``."""

    energies: np.ndarray
    weights: np.ndarray

    @property
    def atoms(self):
        return list(zip(self.energies.tolist(), self.weights))

    def total(self):
        return self.weights.sum(axis=0)

    def green(self, z):
        """Stieltjes transform sum_k W_k / (E_k - z)."""
        return np.einsum("k,kij->ij", 1.0 / (self.energies - z), self.weights)


def spectral_measure(model, N, xi=None, merge_gap=1e-10):
    """Matrix spectral measure of the (1,1) corner of H^N(0, xi).

    Eigenvalues closer than ``merge_gap`` times the spectral width are merged
    into a single atom.
    """


    L = model.L
    H = assemble_hamiltonian(model, N, None, xi)
    E, U = np.linalg.eigh(H)
    top = U[:L, :]
    width = max(E[-1] - E[0], 1.0)
    energies, weights = [], []
    k = 0
    while k < len(E):
        j = k + 1
        while j < len(E) and E[j] - E[j - 1] <= merge_gap * width:
            j += 1
        block = top[:, k:j]
        energies.append(E[k:j].mean())
        weights.append(block @ dagger(block))
        k = j
    return SpectralMeasure(np.array(energies), np.array(weights))
