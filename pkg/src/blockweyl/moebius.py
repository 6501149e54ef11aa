"""Matrix Moebius transformations T.Z = (AZ + B)(CZ + D)^{-1} and their inverses."""
from dataclasses import dataclass

import numpy as np

from ._linalg import INVERT_RTOL, smallest_singular_ratio, split_blocks
from .exceptions import MoebiusDomainError


@dataclass(frozen=True)
class MoebiusMap:
    """Invertible 2L x 2L matrix acting on L x L matrices."""

    matrix: np.ndarray

    def __post_init__(self):
        M = np.array(self.matrix, dtype=complex)
        if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] % 2:
            raise ValueError(f"Moebius matrix must be 2L x 2L, got shape {M.shape}")
        if smallest_singular_ratio(M) < INVERT_RTOL:
            raise MoebiusDomainError("Moebius matrix is not invertible")
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    @property
    def L(self):
        return self.matrix.shape[0] // 2

    def blocks(self):
        return split_blocks(self.matrix)

    def inverse(self):
        return MoebiusMap(np.linalg.inv(self.matrix))

    def __matmul__(self, other):
        return MoebiusMap(self.matrix @ _as_matrix(other))

    def __call__(self, Z):
        return moebius(self, Z)


def _as_matrix(T):
    return T.matrix if isinstance(T, MoebiusMap) else np.asarray(T, dtype=complex)


def _solve_right(X, M, what):
    """X M^{-1}, raising a domain error when M is singular."""
    if smallest_singular_ratio(M) < INVERT_RTOL:
        raise MoebiusDomainError(f"{what} is singular")
    return np.linalg.solve(M.T, X.T).T


def moebius(T, Z):
    """(AZ + B)(CZ + D)^{-1}."""
    A, B, C, D = split_blocks(_as_matrix(T))
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    return _solve_right(A @ Z + B, C @ Z + D, "CZ + D")


def inverse_moebius(W, T):
    """(WC - A)^{-1}(B - WD), written W:T."""
    A, B, C, D = split_blocks(_as_matrix(T))
    W = np.atleast_2d(np.asarray(W, dtype=complex))
    M = W @ C - A
    if smallest_singular_ratio(M) < INVERT_RTOL:
        raise MoebiusDomainError("WC - A is singular")
    return np.linalg.solve(M, B - W @ D)
