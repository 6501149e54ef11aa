"""Block Jacobi models, boundary conditions and dense finite-volume Hamiltonians.

The recurrence handled throughout the package is

    (H phi)_n = T_{n+1} phi_{n+1} + V_n phi_n + T_n^* phi_{n-1},

with invertible L x L blocks T_n (n >= 2), Hermitian blocks V_n (n >= 1) and
the convention T_1 = 1.
"""
import threading
from dataclasses import dataclass, field

import numpy as np

from ._linalg import dagger, is_hermitian, smallest_singular_ratio, INVERT_RTOL
from .exceptions import ModelError

FAMILIES = ("free", "geometric", "block_mixed", "explicit")


def _freeze(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class BlockJacobiModel:
    """Coefficient source for a semi-infinite block Jacobi matrix.

    ``T_fn(n)`` and ``V_fn(n)`` are total functions of the site index.  Blocks
    are validated and memoized on first access, so repeated queries return the
    very same read-only array.
    """

    L: int
    T_fn: object
    V_fn: object
    family_tag: str = "custom"
    params: dict = field(default_factory=dict)
    extended: bool = False
    cond_cap: object = 1.0 / INVERT_RTOL
    _blocks: dict = field(default_factory=dict, repr=False)
    _lock: object = field(default_factory=threading.RLock, repr=False)

    def __post_init__(self):
        if not isinstance(self.L, (int, np.integer)) or self.L < 1:
            raise ModelError(f"block size must be a positive integer, got {self.L!r}")

    def T(self, n):
        """Off-diagonal block T_n; T_1 is the identity."""
        if n < 1:
            raise ModelError(f"T_n is defined for n >= 1, got n={n}", site=n)
        key = ("T", int(n))
        out = self._blocks.get(key)
        if out is None:
            out = np.eye(self.L, dtype=complex) if n == 1 else self._checked_T(n)
            out = self._store(key, out)
        return out

    def V(self, n):
        if n < 1:
            raise ModelError(f"V_n is defined for n >= 1, got n={n}", site=n)
        key = ("V", int(n))
        out = self._blocks.get(key)
        if out is None:
            out = self._store(key, self._checked_V(n))
        return out

    def _store(self, key, value):
        value = _freeze(value)
        with self._lock:
            return self._blocks.setdefault(key, value)

    def _checked_T(self, n):
        t = np.asarray(self.T_fn(n), dtype=complex)
        if t.shape != (self.L, self.L):
            raise ModelError(f"T_{n} has shape {t.shape}, expected {(self.L, self.L)}", site=n)
        floor = 0.0 if self.cond_cap is None else 1.0 / self.cond_cap
        ratio = smallest_singular_ratio(t) if np.all(np.isfinite(t)) else 0.0
        if ratio <= floor:
            raise ModelError(f"T_{n} is not invertible", site=n)
        return t

    def _checked_V(self, n):
        v = np.asarray(self.V_fn(n), dtype=complex)
        if v.shape != (self.L, self.L):
            raise ModelError(f"V_{n} has shape {v.shape}, expected {(self.L, self.L)}", site=n)
        if not np.all(np.isfinite(v)) or not is_hermitian(v):
            raise ModelError(f"V_{n} is not Hermitian", site=n)
        return v

    @property
    def is_real(self):
        """True when the blocks probed so far (first 16 sites) are real."""
        return all(
            not np.any(self.T(n).imag) and not np.any(self.V(n).imag) for n in range(1, 17)
        )

    def __repr__(self):
        return f"BlockJacobiModel(L={self.L}, family={self.family_tag!r}, params={self.params!r})"


def free_model(L=1):
    eye = np.eye(L)
    zero = np.zeros((L, L))
    return BlockJacobiModel(L, lambda n: eye, lambda n: zero, "free")


def geometric_model(c=2.0, L=1):
    eye = np.eye(L)
    zero = np.zeros((L, L))
    return BlockJacobiModel(
        L, lambda n: c ** (n - 1) * eye, lambda n: zero, "geometric", {"c": c}
    )


def block_mixed_model(c=2.0):
    """L = 2: a free channel and a geometric channel, decoupled."""
    zero = np.zeros((2, 2))
    return BlockJacobiModel(
        2, lambda n: np.diag([1.0, c ** (n - 1)]), lambda n: zero, "block_mixed", {"c": c},
        cond_cap=None,
    )


def explicit_model(T, V, L=None):
    """Model from finite lists; ``T`` lists T_2, T_3, ... and ``V`` lists V_1, V_2, ...

    Beyond the lists the last entry is repeated, and ``extended`` is set.
    """
    T = [np.atleast_2d(np.asarray(t, dtype=complex)) for t in T]
    V = [np.atleast_2d(np.asarray(v, dtype=complex)) for v in V]
    if not V:
        raise ModelError("explicit model needs at least one V block")
    if L is None:
        L = V[0].shape[0]
    for k, t in enumerate(T):
        if t.shape != (L, L):
            raise ModelError(f"T_{k + 2} has shape {t.shape}, expected {(L, L)}", site=k + 2)
    for k, v in enumerate(V):
        if v.shape != (L, L):
            raise ModelError(f"V_{k + 1} has shape {v.shape}, expected {(L, L)}", site=k + 1)
    eye = np.eye(L, dtype=complex)

    def T_fn(n):
        if not T:
            return eye
        return T[min(n - 2, len(T) - 1)]

    def V_fn(n):
        return V[min(n - 1, len(V) - 1)]

    model = BlockJacobiModel(L, T_fn, V_fn, "explicit", {}, extended=True)
    # validate every listed block eagerly so bad input fails at load time
    for n in range(2, len(T) + 2):
        model.T(n)
    for n in range(1, len(V) + 1):
        model.V(n)
    return model


def _decode_matrix_list(raw, name):
    """Accept a list of real matrices or of matrices with [re, im] entries."""
    arr = np.asarray(raw, dtype=float)
    if arr.ndim == 4 and arr.shape[-1] == 2:
        return list(arr[..., 0] + 1j * arr[..., 1])
    if arr.ndim == 3:
        return list(arr.astype(complex))
    raise ModelError(f"cannot decode {name}: expected a list of L x L matrices")


def load_model(data):
    """Build a model from a description record (see the README for the format)."""
    if not isinstance(data, dict):
        raise ModelError("model description must be a mapping")
    family = data.get("family")
    params = dict(data.get("params") or {})
    for key in ("c",):
        if key in data and key not in params:
            params[key] = data[key]
    L = data.get("L")
    if family == "free":
        return free_model(int(L or 1))
    if family == "geometric":
        return geometric_model(float(params.get("c", 2.0)), int(L or 1))
    if family == "block_mixed":
        if L not in (None, 2):
            raise ModelError(f"block_mixed has L = 2, got L = {L}")
        return block_mixed_model(float(params.get("c", 2.0)))
    if family == "explicit":
        T = _decode_matrix_list(data.get("T", []), "T") if data.get("T") else []
        V = _decode_matrix_list(data.get("V", []), "V")
        shapes = {m.shape for m in T + V}
        if len(shapes) > 1 or (L is not None and shapes != {(L, L)}):
            raise ModelError(f"block shapes {sorted(shapes)} do not match L = {L}")
        return explicit_model(T, V, L)
    raise ModelError(f"unknown model family {family!r}")


def random_model(rng, L, n_sites, real=False, scale=1.0):
    """Explicit model with random well-conditioned blocks on the first ``n_sites`` sites."""

    def draw():
        a = rng.standard_normal((L, L))
        if not real:
            a = a + 1j * rng.standard_normal((L, L))
        return a

    T = [np.eye(L) + 0.5 * scale * draw() / np.sqrt(L) for _ in range(max(n_sites, 1))]
    V = []
    for _ in range(max(n_sites, 1) + 1):
        a = draw()
        V.append(scale * (a + dagger(a)) / 2)
    return explicit_model(T, V, L)


@dataclass(frozen=True)
class BoundaryCondition:
    """Right (or left) boundary matrix Z.

    ``kind`` is "hermitian" for self-adjoint conditions, "half_plane" for Z in
    the closed upper half-plane i(Z^* - Z) >= 0 and "lower_half_plane" for the
    conjugate configuration.
    """

    matrix: np.ndarray
    kind: str = "hermitian"

    def __post_init__(self):
        Z = np.atleast_2d(np.asarray(self.matrix, dtype=complex))
        object.__setattr__(self, "matrix", _freeze(Z))
        tol = 1e-12 * (1.0 + np.linalg.norm(Z))
        if self.kind == "hermitian":
            if not is_hermitian(Z):
                raise ModelError("Hermitian boundary condition is not Hermitian")
        elif self.kind in ("half_plane", "lower_half_plane"):
            sign = 1.0 if self.kind == "half_plane" else -1.0
            w = np.linalg.eigvalsh(sign * 1j * (dagger(Z) - Z))
            if w.min() < -tol:
                raise ModelError(f"boundary condition is not in the closed {self.kind.replace('_', ' ')}")
        else:
            raise ModelError(f"unknown boundary kind {self.kind!r}")

    @property
    def L(self):
        return self.matrix.shape[0]

    @classmethod
    def dirichlet(cls, L):
        return cls(np.zeros((L, L)), "hermitian")

    @classmethod
    def hermitian(cls, xi):
        return cls(xi, "hermitian")

    @classmethod
    def half_plane(cls, Z):
        return cls(Z, "half_plane")


def as_boundary(value, L):
    """Coerce None, a scalar, an array or a BoundaryCondition to a matrix.

    Plain arrays are accepted without a kind check; callers that need one wrap
    the value in BoundaryCondition first.
    """
    if value is None:
        return np.zeros((L, L), dtype=complex)
    if isinstance(value, BoundaryCondition):
        Z = value.matrix
    else:
        Z = np.asarray(value, dtype=complex)
        if Z.ndim == 0:
            Z = Z * np.eye(L)
        Z = np.atleast_2d(Z)
    if Z.shape != (L, L):
        raise ModelError(f"boundary matrix has shape {Z.shape}, expected {(L, L)}")
    return np.array(Z, dtype=complex)


def _dense(model, N, zhat, zright):
    if N < 1:
        raise ModelError(f"volume N must be >= 1, got {N}")
    L = model.L
    H = np.zeros((N * L, N * L), dtype=complex)
    for n in range(1, N + 1):
        s = slice((n - 1) * L, n * L)
        H[s, s] = model.V(n)
        if n < N:
            t = slice(n * L, (n + 1) * L)
            H[s, t] = model.T(n + 1)
            H[t, s] = dagger(model.T(n + 1))
    H[:L, :L] -= as_boundary(zhat, L)
    H[-L:, -L:] -= as_boundary(zright, L)
    return H


def assemble_hamiltonian(model, N, zhat=None, z_right=None):
    """Dense NL x NL matrix H^N with boundary blocks folded into V_1 and V_N.

    A boundary condition Z enters as V_N - Z on the last site (and Zhat as
    V_1 - Zhat on the first), so Z = 0 is the Dirichlet truncation.  Both
    conditions must be Hermitian; use :func:`dense_operator` for general ones.
    """
    for name, b in (("zhat", zhat), ("z_right", z_right)):
        if b is not None and not is_hermitian(as_boundary(b, model.L)):
            raise ModelError(f"{name} must be Hermitian for a Hermitian Hamiltonian")
    return _dense(model, N, zhat, z_right)


def dense_operator(model, N, zhat=None, z_right=None):
    """Same folding as :func:`assemble_hamiltonian`, for arbitrary boundary matrices."""
    return _dense(model, N, zhat, z_right)
