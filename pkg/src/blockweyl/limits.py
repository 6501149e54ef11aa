"""Numerical N -> infinity analysis: limit discs, deficiency indices,
classification, the limit quadratic form, normalized solutions and limit
Wronskians.

Limits are taken along doubling schedules.  Every result carries an explicit
convergence flag; nothing here returns a silently unconverged value.
"""
from dataclasses import dataclass, field

import numpy as np

from ._linalg import dagger, herm, opnorm, psd_pinv_sqrt, psd_sqrt, symplectic_form
from .exceptions import ConvergenceError
from .transfer import _prefix, solutions
from .weyl import wronskian

DEFAULT_SCHEDULE = (8, 16, 32, 64, 128, 256, 512)

LIMIT_POINT = "LimitPoint"
COMPLETELY_INDETERMINATE = "CompletelyIndeterminate"
INTERMEDIATE = "Intermediate"


def _hinv(a):
    """Inverse of a Hermitian positive definite matrix through its eigenbasis."""
    w, u = np.linalg.eigh(herm(a))
    w = np.maximum(w, np.finfo(float).tiny)
    return (u / w) @ dagger(u)


class _Accumulator:
    """Running Gram sums of the Dirichlet/anti-Dirichlet solutions at one energy."""

    def __init__(self, model, z):
        self.model, self.z = model, z
        self.N = 0
        L = model.L
        self.gram = np.zeros((2 * L, 2 * L), dtype=complex)

    def advance(self, N):
        if N <= self.N:
            return
        L = self.model.L
        pre = _prefix(self.model, self.z, N)
        with np.errstate(over="ignore", invalid="ignore"):
            rows = np.array(pre[self.N + 1 : N + 1])[:, L:, :]
            self.gram = self.gram + np.einsum("nji,njk->ik", rows.conj(), rows)
        self.N = N

    @property
    def finite(self):
        return bool(np.all(np.isfinite(self.gram)))

    def disc(self):
        L = self.model.L
        z = self.z
        sdd = self.gram[:L, :L]
        sda = self.gram[:L, L:]
        R = herm(_hinv(sdd) / (2 * np.imag(z)))
        S = 1j * R @ (np.eye(L) - (z - np.conj(z)) * sda)
        return R, S

    def form(self):
        return herm(symplectic_form(self.model.L) / 1j + 2 * np.imag(self.z) * self.gram)


@dataclass(frozen=True)
class LimitData:
    """Converged (or flagged) limit disc data at energy z."""

    z: complex
    R_limit: np.ndarray
    R_limit_conj: np.ndarray
    S_limit: np.ndarray
    S_limit_conj: np.ndarray
    P0: np.ndarray
    Pplus: np.ndarray
    P0_conj: np.ndarray
    Pplus_conj: np.ndarray
    n_z: int
    n_zbar: int
    classification: str
    converged: bool
    ambiguous: bool
    N_used: int
    kernel_threshold: float
    convergence_report: list = field(default_factory=list)

    @property
    def L(self):
        return self.S_limit.shape[0]

    def require_converged(self):
        if not self.converged or self.ambiguous:
            raise ConvergenceError(
                f"limit data at z={self.z} is {'ambiguous' if self.ambiguous else 'unconverged'}"
                f" (last N = {self.N_used})"
            )
        return self

    def surface_point(self, W):
        """S + R^{1/2} W (-Rbar)^{1/2}, with W compressed to P_+^z W P_+^{conj z}."""
        W = self.Pplus @ np.atleast_2d(W) @ self.Pplus_conj
        return self.S_limit + psd_sqrt(self.R_limit) @ W @ psd_sqrt(-self.R_limit_conj)


def _rank(R, threshold):
    w = np.linalg.eigvalsh(herm(R))
    return int((np.abs(w) > threshold).sum())


def _project(R, threshold):
    w, u = np.linalg.eigh(herm(R))
    keep = np.abs(w) > threshold
    uk = u[:, keep]
    P = uk @ dagger(uk)
    return (uk * w[keep]) @ dagger(uk), P


def classify(n_z, n_zbar, L):
    if n_z == 0 and n_zbar == 0:
        return LIMIT_POINT
    if n_z == L and n_zbar == L:
        return COMPLETELY_INDETERMINATE
    return INTERMEDIATE


def limit_disc(model, z, schedule=None, tol=1e-8):
    """Limit radius and center operators along a doubling schedule.

    Convergence requires operator-norm increments of R^z, R^{conj z} and S^z
    below ``tol`` together with ranks that agree over the last two schedule
    points.  Rank decisions use max(1e-8 ||R_{N_min}||, 1e-12).
    """
    if np.imag(z) == 0:
        raise ValueError("energy must be off the real axis")
    schedule = tuple(schedule or DEFAULT_SCHEDULE)
    if any(b <= a for a, b in zip(schedule, schedule[1:])) or schedule[0] < 1:
        raise ValueError("schedule must be increasing positive volumes")
    L = model.L
    zb = np.conj(z)
    acc, accb = _Accumulator(model, z), _Accumulator(model, zb)
    rows = []
    prev = None
    threshold = None
    converged = False
    for N in schedule:
        acc.advance(N)
        accb.advance(N)
        if not (acc.finite and accb.finite):
            rows.append({"N": N, "overflow": True})
            break
        R, S = acc.disc()
        Rb, Sb = accb.disc()
        if threshold is None:
            threshold = max(1e-8 * opnorm(R), 1e-12)
        row = {
            "N": N,
            "norm_R": opnorm(R),
            "norm_R_conj": opnorm(Rb),
            "rank": _rank(R, threshold),
            "rank_conj": _rank(Rb, threshold),
        }
        if prev is not None:
            row["increment_R"] = opnorm(R - prev[0])
            row["increment_R_conj"] = opnorm(Rb - prev[1])
            row["increment_S"] = opnorm(S - prev[2])
            converged = (
                max(row["increment_R"], row["increment_R_conj"], row["increment_S"]) < tol
                and row["rank"] == rows[-1]["rank"]
                and row["rank_conj"] == rows[-1]["rank_conj"]
            )
        rows.append(row)
        prev = (R, Rb, S, Sb, N)
        if converged:
            break
    if prev is None:
        raise ConvergenceError("the first schedule point already overflowed")
    R, Rb, S, Sb, N_used = prev
    stable = [r for r in rows if "rank" in r]
    ambiguous = len(stable) < 2 or (
        stable[-1]["rank"] != stable[-2]["rank"] or stable[-1]["rank_conj"] != stable[-2]["rank_conj"]
    )
    R_lim, Pplus = _project(R, threshold)
    Rb_lim, Pplus_b = _project(Rb, threshold)
    n_z = int(round(np.trace(Pplus).real))
    n_zb = int(round(np.trace(Pplus_b).real))
    eye = np.eye(L)
    return LimitData(
        complex(z), R_lim, Rb_lim, S, Sb, eye - Pplus, Pplus, eye - Pplus_b, Pplus_b,
        n_z, n_zb, classify(n_z, n_zb, L), bool(converged), bool(ambiguous), int(N_used),
        float(threshold), rows,
    )


def _solution_rows(model, z, N):
    """Rows (psi^D_n, psi^A_n) for n = 1..N as an array of shape (N, L, 2L)."""
    L = model.L
    return np.array(_prefix(model, z, N)[1 : N + 1])[:, L:, :]


@dataclass(frozen=True)
class LimitForm:
    """Limit of Q_N^z split into divergent directions and a converged finite part."""

    z: complex
    Pinf: np.ndarray
    Qlimit: np.ndarray
    basis: np.ndarray
    Pminus: np.ndarray
    Pzero: np.ndarray
    Pplus2L: np.ndarray
    witt_index: int
    converged: bool
    ambiguous: bool
    N_used: int

    def dims(self):
        tr = lambda P: int(round(np.trace(P).real))
        return {"inf": tr(self.Pinf), "minus": tr(self.Pminus), "zero": tr(self.Pzero), "plus": tr(self.Pplus2L)}


def limit_form(model, z, schedule=None, tol=1e-8, limit=None, growth=1.5, floor=1e6):
    """Divergent projection P_inf of Q_N^z and the limit form on its complement.

    At every volume Q_N^z = M_N^* diag((R_N^z)^{-1}, R_N^{conj z}) M_N with
    M_N = [[1, S_N^z], [0, 1]].  Hence the directions on which Q_N^z stays
    bounded are x = (-S^z w + P_+^z v; w), and there the limit form equals
    v^* (R^z)^+ v + w^* R^{conj z} w.  The complementary directions are
    certified as divergent along the schedule: their solution Gram value must
    exceed ``floor`` times ||Q_{N_min}|| while still growing by ``growth``
    per doubling.  Failure to certify sets ``ambiguous``.
    """
    if np.imag(z) == 0:
        raise ValueError("energy must be off the real axis")
    schedule = tuple(schedule or DEFAULT_SCHEDULE)
    L = model.L
    if limit is None:
        limit = limit_disc(model, z, schedule, tol)
    w_plus, u_plus = np.linalg.eigh(limit.Pplus)
    Up = u_plus[:, w_plus > 0.5]
    B = np.zeros((2 * L, L + Up.shape[1]), dtype=complex)
    B[:L, :L] = -limit.S_limit
    B[L:, :L] = np.eye(L)
    B[:L, L:] = Up
    u, sv, _ = np.linalg.svd(B)
    F, Einf = u[:, : B.shape[1]], u[:, B.shape[1] :]
    # coordinates c = (w, v) with x = B c; F = B Rb^{-1}
    Rb = dagger(F) @ B
    Rplus = _pinv_herm(limit.R_limit, limit.kernel_threshold)
    K = np.zeros((B.shape[1], B.shape[1]), dtype=complex)
    K[:L, :L] = limit.R_limit_conj
    K[L:, L:] = dagger(Up) @ Rplus @ Up
    Rbi = np.linalg.inv(Rb)
    q = herm(dagger(Rbi) @ K @ Rbi)

    acc = _Accumulator(model, z)
    acc.advance(schedule[0])
    q_min = opnorm(acc.form())
    certified, N_cert, N_prev = Einf.shape[1] == 0, schedule[0], schedule[0]
    for N in schedule[1:]:
        if certified:
            break
        acc.advance(N)
        if not acc.finite:
            break
        rows = _solution_rows(model, z, N)
        proj = rows @ Einf
        sq = np.einsum("nji,nji->ni", proj.conj(), proj).real
        mu, mu_prev = sq.sum(axis=0), sq[:N_prev].sum(axis=0)
        fin = rows @ F
        bounded = opnorm(np.einsum("nji,njk->ik", fin.conj(), fin)) < floor * q_min
        certified = bool(np.all((mu > floor * q_min) & (mu >= growth * mu_prev)) and bounded)
        N_cert, N_prev = N, N

    w, uq = np.linalg.eigh(q)
    thr = 1e-8 * max(1.0, opnorm(q))
    embed = lambda mask: (F @ uq[:, mask]) @ dagger(F @ uq[:, mask])
    Pminus, Pzero, Pplus = embed(w < -thr), embed(np.abs(w) <= thr), embed(w > thr)
    witt = int((np.abs(w) <= thr).sum()) + min(limit.n_z, limit.n_zbar)
    return LimitForm(
        complex(z), Einf @ dagger(Einf), q, F, Pminus, Pzero, Pplus, witt,
        bool(limit.converged and not limit.ambiguous and certified), not certified, int(N_cert),
    )


def _pinv_herm(a, threshold):
    w, u = np.linalg.eigh(herm(a))
    keep = np.abs(w) > threshold
    inv = np.zeros_like(w)
    inv[keep] = 1.0 / w[keep]
    return (u * inv) @ dagger(u)


def _xsqrt(R, z):
    """((z - conj z) R)^{1/2} = e^{i pi/4} (2 Im z R)^{1/2}."""
    return np.exp(0.25j * np.pi) * psd_sqrt(2 * np.imag(z) * R)


@dataclass(frozen=True)
class NormalizedSolution:
    """Prefix psi~_n, n = 0..horizon+1, of the normalized Dirichlet solution."""

    values: np.ndarray
    factor: np.ndarray
    gram: np.ndarray
    increment: float
    valid: bool
    z: complex
    horizon: int

    def stacked(self, model, N):
        """(T_{N+1} psi~_{N+1}; psi~_N)."""
        return np.array(_prefix(model, self.z, N)[N])[:, : model.L] @ self.factor


def normalized_solution(model, z, horizon=None, limit=None, tol=1e-6):
    """psi~^{D,z} = psi^{D,z} ((z - conj z) R^z)^{1/2} up to ``horizon``.

    Its Gram matrix tends to P_+^z; ``valid`` records whether the increment
    over the last doubling is below ``tol``.
    """
    if limit is None:
        limit = limit_disc(model, z)
    limit.require_converged()
    horizon = int(horizon or limit.N_used)
    factor = _xsqrt(limit.R_limit, z)
    sol = solutions(model, horizon, z)
    vals = sol.dirichlet @ factor
    body = vals[1 : horizon + 1]
    gram = np.einsum("nji,njk->ik", body.conj(), body)
    half = body[: max(horizon // 2, 1)]
    gram_half = np.einsum("nji,njk->ik", half.conj(), half)
    inc = opnorm(gram - gram_half)
    return NormalizedSolution(vals, factor, gram, inc, bool(inc < tol), complex(z), horizon)


WRONSKIAN_PAIRS = (
    "tilde-tildebar",
    "dirichlet-tildebar",
    "tilde-tilde",
    "dirichlet-tilde",
    "anti-tilde",
    "anti-tildebar",
)


@dataclass(frozen=True)
class LimitWronskian:
    value: np.ndarray
    expected: object
    increment: float
    converged: bool
    horizon: int


def _stacked(model, z, N, which, factor=None):
    T = np.array(_prefix(model, z, N)[N])
    L = model.L
    if which == "dirichlet":
        return T[:, :L]
    if which == "anti":
        return T[:, L:]
    return T[:, :L] @ factor


def limit_wronskian(model, z, which, horizon=None, zeta=None, limit=None, limit_conj=None, tol=1e-6):
    """Finite-volume Wronskian of a pair of (normalized) solutions at the horizon.

    ``which`` is "first-second" with entries among dirichlet, anti, tilde
    (at z) and tildebar (at conj z, or at ``zeta`` when given).  The closed-form
    limit is returned in ``expected`` when the second energy is the default.
    """
    if which not in WRONSKIAN_PAIRS:
        raise ValueError(f"unknown pair {which!r}; choose from {WRONSKIAN_PAIRS}")
    first, second = which.split("-")
    zb = np.conj(z)
    if limit is None:
        limit = limit_disc(model, z)
    limit.require_converged()
    w2 = zb if second == "tildebar" else z
    default_energy = zeta is None or complex(zeta) == complex(w2)
    if zeta is not None:
        w2 = complex(zeta)
    if complex(w2) == complex(z):
        limit2 = limit
    elif limit_conj is not None and complex(limit_conj.z) == complex(w2):
        limit2 = limit_conj
    else:
        limit2 = limit_disc(model, w2)
    limit2.require_converged()
    horizon = int(horizon or max(limit.N_used, limit2.N_used))
    f1 = _xsqrt(limit.R_limit, z)
    f2 = _xsqrt(limit2.R_limit, w2)

    def value(N):
        a = _stacked(model, z, N, first, f1)
        b = _stacked(model, w2, N, "dirichlet", None) @ f2
        return wronskian(a, b)

    val = value(horizon)
    inc = opnorm(val - value(max(horizon // 2, 1)))
    expected = None
    if default_energy:
        P = 2 * np.imag(z) * limit.R_limit
        Pm = psd_pinv_sqrt(P, limit.kernel_threshold)
        rot = np.exp(0.25j * np.pi)
        if second == "tildebar":
            expected = (
                np.zeros_like(val) if first in ("tilde", "dirichlet")
                else -1j * _xsqrt(limit2.R_limit, zb)
            )
        elif first == "tilde":
            expected = 2 * np.imag(z) * limit.Pplus
        elif first == "dirichlet":
            expected = 2 * np.imag(z) * rot * Pm
        else:
            expected = 2 * np.imag(z) * rot * limit.S_limit_conj @ Pm
    return LimitWronskian(val, expected, float(inc), bool(inc < tol), horizon)
