"""Transfer matrices of the three-term recurrence and the matricial solutions."""
from dataclasses import dataclass

import numpy as np

from ._linalg import dagger, split_blocks, symplectic_form
from .exceptions import ConditioningError

# condition number above which products are refused
MAX_COND = 1e12


def transfer_step(model, n, z):
    """T_n^z, mapping (T_n phi_n; phi_{n-1}) to (T_{n+1} phi_{n+1}; phi_n)."""
    L = model.L
    T = model.T(n)
    Tinv = np.linalg.inv(T)
    out = np.zeros((2 * L, 2 * L), dtype=complex)
    out[:L, :L] = (z * np.eye(L) - model.V(n)) @ Tinv
    out[:L, L:] = -dagger(T)
    out[L:, :L] = Tinv
    return out


def transfer_step_inverse(model, n, z):
    """(T_n^z)^{-1} = [[0, T_n], [-T_n^{-*}, T_n^{-*}(z - V_n)]]."""
    L = model.L
    T = model.T(n)
    Tinv_h = dagger(np.linalg.inv(T))
    out = np.zeros((2 * L, 2 * L), dtype=complex)
    out[:L, L:] = T
    out[L:, :L] = -Tinv_h
    out[L:, L:] = Tinv_h @ (z * np.eye(L) - model.V(n))
    return out


def _prefix(model, z, N):
    """List of T^z(n, 0) for n = 0..N, memoized on the model."""
    key = ("prefix", complex(z))
    cache = model._blocks.get(key)
    if cache is None or len(cache) <= N:
        with model._lock:
            cache = model._blocks.get(key)
            if cache is None:
                cache = [np.eye(2 * model.L, dtype=complex)]
            cache = list(cache)
            while len(cache) <= N:
                with np.errstate(over="ignore", invalid="ignore"):
                    nxt = transfer_step(model, len(cache), z) @ cache[-1]
                nxt.setflags(write=False)
                cache.append(nxt)
            model._blocks[key] = cache
    return cache[: N + 1]


def _raw_product(model, n, m, z):
    if n == m:
        return np.eye(2 * model.L, dtype=complex)
    if n > m:
        if m == 0:
            return np.array(_prefix(model, z, n)[n])
        out = np.eye(2 * model.L, dtype=complex)
        for k in range(m + 1, n + 1):
            out = transfer_step(model, k, z) @ out
        return out
    # n < m: inverse of T^z(m, n), built from the explicit step inverses
    out = np.eye(2 * model.L, dtype=complex)
    for k in range(n + 1, m + 1):
        out = out @ transfer_step_inverse(model, k, z)
    return out


@dataclass(frozen=True)
class TransferProduct:
    """T^z(n_hi, n_lo) with A/B/C/D block accessors."""

    matrix: np.ndarray
    n_hi: int
    n_lo: int
    z: complex

    @property
    def L(self):
        return self.matrix.shape[0] // 2

    @property
    def A(self):
        return split_blocks(self.matrix)[0]

    @property
    def B(self):
        return split_blocks(self.matrix)[1]

    @property
    def C(self):
        return split_blocks(self.matrix)[2]

    @property
    def D(self):
        return split_blocks(self.matrix)[3]

    def __matmul__(self, other):
        if other.z != self.z or other.n_hi != self.n_lo:
            raise ValueError("products must share z and chain n_hi -> n_lo")
        return TransferProduct(self.matrix @ other.matrix, self.n_hi, other.n_lo, self.z)


def transfer_product(model, n, m, z, max_cond=MAX_COND):
    """T^z(n, m): ordered product T_n^z ... T_{m+1}^z, identity for n = m, inverse for n < m."""
    if n < 0 or m < 0:
        raise ValueError("site indices must be non-negative")
    M = _raw_product(model, n, m, z)
    if not np.all(np.isfinite(M)):
        raise ConditioningError(f"transfer product T({n},{m}) overflowed")
    if max_cond is not None and np.linalg.cond(M) > max_cond:
        raise ConditioningError(
            f"transfer product T({n},{m}) at z={z} has condition number above {max_cond:g}"
        )
    return TransferProduct(M, int(n), int(m), complex(z))


def abcd(tp):
    """Blocks (A, B, C, D) of a transfer product."""
    M = tp.matrix if isinstance(tp, TransferProduct) else np.asarray(tp)
    return tuple(np.array(b) for b in split_blocks(M))


def symplectic_inverse(model, N, z):
    """T^z(N,0)^{-1} computed as J^* T^{conj z}(N,0)^* J."""
    J = symplectic_form(model.L)
    return dagger(J) @ dagger(_raw_product(model, N, 0, np.conj(z))) @ J


@dataclass(frozen=True)
class SolutionPair:
    """Dirichlet and anti-Dirichlet solutions at sites n = 0..N+1.

    ``dirichlet[n]`` is psi_n^{D,z}; index 0 carries the initial value.
    ``stacked[n]`` is T^z(n, 0), whose columns are the stacked solutions.
    """

    dirichlet: np.ndarray
    anti_dirichlet: np.ndarray
    stacked: np.ndarray
    z: complex
    N: int

    def psi(self, n):
        """Row block (psi_n^D, psi_n^A) of size L x 2L."""
        return np.hstack([self.dirichlet[n], self.anti_dirichlet[n]])


def solutions(model, N, z):
    """Read psi^{D,z}, psi^{A,z} off the prefix products T^z(n, 0)."""
    if N < 1:
        raise ValueError("horizon must be >= 1")
    L = model.L
    pre = np.array(_prefix(model, z, N))
    D = np.empty((N + 2, L, L), dtype=complex)
    A = np.empty((N + 2, L, L), dtype=complex)
    D[: N + 1] = pre[:, L:, :L]
    A[: N + 1] = pre[:, L:, L:]
    Tinv = np.linalg.inv(model.T(N + 1))
    D[N + 1] = Tinv @ pre[N, :L, :L]
    A[N + 1] = Tinv @ pre[N, :L, L:]
    return SolutionPair(D, A, pre, complex(z), int(N))
