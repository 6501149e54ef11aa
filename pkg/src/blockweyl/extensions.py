"""Maximal symmetric extensions parametrized by a partial isometry V at an
anchor energy zeta, and the Green matrix G_V^z of the extension.

Two constructions of W_V^z are provided.

``method="wronskian"`` (default) imposes the boundary condition at infinity
through limit Wronskians.  Elements f of the maximal domain are determined
modulo the minimal domain by the coordinates W(psi~^{D,zeta}, f) and
W(psi~^{D,conj zeta}, f), and f lies in the domain of H_V exactly when

    W(psi~^{D,conj zeta}, f) = V W(psi~^{D,zeta}, f).

Applied to f = psi^{D,z} G - psi^{A,z} with G = S + A W K this is a linear
equation for W.

``method="orthogonal"`` builds the complement phi_perp of the deficiency
vectors psi~^{D,conj zeta} V - psi~^{D,zeta} from Hilbert-space inner products
and projects psi~^{D,conj z}(iW)^* - psi~^{D,z} against it.  It reproduces
W_V^zeta = -iV^* at the anchor, but away from it Hilbert-space orthogonality
is not invariant modulo the minimal domain, and the result differs from the
Green matrix of H_V in general.  It is kept for comparison.
"""
from dataclasses import dataclass, field

import numpy as np

from ._linalg import dagger, herm, opnorm, pinv_on_range, psd_sqrt
from .exceptions import ConditioningError, ConvergenceError, DiscViolation
from .limits import DEFAULT_SCHEDULE, limit_disc, normalized_solution
from .model import BlockJacobiModel
from .transfer import _prefix, solutions
from .weyl import wronskian

RANK_RTOL = 1e-8


@dataclass(frozen=True)
class ExtensionSpec:
    """Validated extension data at the anchor energy zeta (Im zeta > 0)."""

    model: BlockJacobiModel
    zeta: complex
    V: np.ndarray
    limit_zeta: object
    limit_zetabar: object
    gram: np.ndarray
    gram_horizon: int
    gram_increment: float
    gram_converged: bool
    self_adjoint: bool
    equal_indices: bool
    schedule: tuple = DEFAULT_SCHEDULE
    notes: list = field(default_factory=list)


def _check_partial_isometry(V, lz, lzb, tol=1e-8):
    L = lz.L
    V = np.atleast_2d(np.asarray(V, dtype=complex))
    if V.shape != (L, L):
        raise ValueError(f"V must be {L} x {L}, got {V.shape}")
    if opnorm(dagger(V) @ V - lz.Pplus) > tol:
        raise ValueError("V^* V differs from the projection onto Ker(R^zeta)^perp")
    excess = np.linalg.eigvalsh(herm(V @ dagger(V) - lzb.Pplus))
    if excess.max() > tol:
        raise ValueError("the range of V is not inside Ker(R^conj zeta)^perp")
    return V


def make_extension(model, zeta, V, schedule=None, tol=1e-8, gram_tol=1e-7):
    """Validate V and cache the cross Gram matrix (psi~^{D,conj zeta})^* psi~^{D,zeta}."""
    if np.imag(zeta) <= 0:
        raise ValueError("the anchor energy must lie in the upper half-plane")
    schedule = tuple(schedule or DEFAULT_SCHEDULE)
    lz = limit_disc(model, zeta, schedule, tol).require_converged()
    lzb = limit_disc(model, np.conj(zeta), schedule, tol).require_converged()
    if lz.n_z > lzb.n_z:
        raise ValueError(f"deficiency indices n_zeta = {lz.n_z} > n_conj zeta = {lzb.n_z}")
    V = _check_partial_isometry(V, lz, lzb)
    start = max(lz.N_used, lzb.N_used)
    horizons = [n for n in schedule if n >= start] or [start]
    prev = None
    for N in horizons:
        g = _cross_gram(model, np.conj(zeta), zeta, N, lzb, lz)
        if prev is not None and opnorm(g - prev) < gram_tol:
            break
        prev = g
    g_half = _cross_gram(model, np.conj(zeta), zeta, max(N // 2, 1), lzb, lz)
    inc = opnorm(g - g_half)
    if opnorm(g) >= 1 - 1e-6:
        raise ConditioningError("cross Gram matrix has norm >= 1; deficiency vectors not separated")
    equal = lz.n_z == lzb.n_z
    self_adjoint = equal and opnorm(V @ dagger(V) - lzb.Pplus) <= tol
    notes = [] if equal else ["unequal deficiency indices: branch not exercised by built-in families"]
    return ExtensionSpec(
        model, complex(zeta), V, lz, lzb, g, int(N), float(inc), bool(inc < gram_tol),
        bool(self_adjoint), bool(equal), schedule, notes,
    )


def _tilde(model, w, N, limit):
    return normalized_solution(model, w, N, limit).values[1 : N + 1]


def _cross_gram(model, a, b, N, la, lb):
    """Truncated sum_{n<=N} (psi~^{D,a}_n)^* psi~^{D,b}_n."""
    x, y = _tilde(model, a, N, la), _tilde(model, b, N, lb)
    return np.einsum("nji,njk->ik", x.conj(), y)


def orthogonal_coefficients(ext):
    """(alpha, beta, gamma) of the orthogonal complement phi_perp.

    gamma = (V - g)^{-1} V g^* (P_+^{conj zeta} - V V^*), alpha = (V^* - g^*)^{-1},
    beta = (V - g)^{-1} V, with g = (psi~^{D,conj zeta})^* psi~^{D,zeta} and
    inverses taken on the relevant ranges.
    """
    V, g = ext.V, ext.gram
    Pb = ext.limit_zetabar.Pplus
    inv = lambda m: pinv_on_range(m, RANK_RTOL * max(opnorm(m), 1.0))
    gamma = inv(V - g) @ V @ dagger(g) @ (Pb - V @ dagger(V))
    alpha = inv(dagger(V) - dagger(g))
    beta = inv(V - g) @ V
    return alpha, beta, gamma


@dataclass(frozen=True)
class ExtensionPoint:
    """W_V^z and G_V^z = S^z + (R^z)^{1/2} W_V^z (-R^{conj z})^{1/2} with diagnostics."""

    W: np.ndarray
    G: np.ndarray
    z: complex
    method: str
    horizon: int
    increment: float
    converged: bool
    isometry_defect: float
    surface_residual: float


def _limits_at(ext, z, schedule, tol):
    z = complex(z)
    cache = {ext.limit_zeta.z: ext.limit_zeta, ext.limit_zetabar.z: ext.limit_zetabar}
    out = []
    for w in (z, np.conj(z)):
        lim = cache.get(complex(w))
        if lim is None:
            lim = limit_disc(ext.model, w, schedule, tol)
        out.append(lim.require_converged())
    return out


def _factors(lz, lzb, z):
    """A = (sigma R^z)^{1/2}, K = (-sigma R^{conj z})^{1/2}; G = S + A W K."""
    sigma = np.sign(np.imag(z))
    return psd_sqrt(sigma * lz.R_limit), psd_sqrt(-sigma * lzb.R_limit)


def _wronskian_W(ext, z, lz, A, K, N):
    model, L = ext.model, ext.model.L
    T = np.array(_prefix(model, z, N)[N])
    dir_stack = T[:, :L] @ A
    fS = T[:, :L] @ lz.S_limit - T[:, L:]

    def boundary(stacked):
        tz = np.array(_prefix(model, ext.zeta, N)[N])[:, :L] @ _xs(ext.limit_zeta)
        tzb = np.array(_prefix(model, np.conj(ext.zeta), N)[N])[:, :L] @ _xs(ext.limit_zetabar)
        return wronskian(tzb, stacked) - ext.V @ wronskian(tz, stacked)

    Y1, Y2 = boundary(dir_stack), boundary(fS)
    Y1p = pinv_on_range(Y1, RANK_RTOL * max(opnorm(Y1), 1e-300))
    Kp = pinv_on_range(K, RANK_RTOL * max(opnorm(K), 1e-300))
    return -Y1p @ Y2 @ Kp


def _xs(limit):
    return np.exp(0.25j * np.pi) * psd_sqrt(2 * np.imag(limit.z) * limit.R_limit)


def _orthogonal_W(ext, z, lz, lzb, N):
    model = ext.model
    zeta, zb = ext.zeta, np.conj(ext.zeta)
    alpha, beta, gamma = orthogonal_coefficients(ext)
    Pb = ext.limit_zetabar.Pplus
    c_bar = alpha + Pb - ext.V @ dagger(ext.V)
    c_zeta = beta - gamma
    t_zb = _tilde(model, zb, N, ext.limit_zetabar)
    t_z = _tilde(model, zeta, N, ext.limit_zeta)
    phi_perp = t_zb @ c_bar + t_z @ c_zeta
    ip = lambda x, y: np.einsum("nji,njk->ik", x.conj(), y)
    a = ip(phi_perp, _tilde(model, np.conj(z), N, lzb))
    b = ip(phi_perp, _tilde(model, z, N, lz))
    X = pinv_on_range(a, RANK_RTOL * max(opnorm(a), 1e-300)) @ b
    return -1j * dagger(X)


def extension_weyl_point(ext, z, schedule=None, tol=1e-8, horizon=None, method="wronskian"):
    """Green matrix G_V^z of the extension and its unitary parameter W_V^z.

    The Wronskian construction also accepts Im z < 0, where it returns the
    lower half-plane Green matrix G = S^z + (-R^z)^{1/2} W (R^{conj z})^{1/2}.
    """
    if np.imag(z) == 0:
        raise ValueError("energy must be off the real axis")
    if method not in ("wronskian", "orthogonal"):
        raise ValueError(f"unknown method {method!r}")
    if method == "orthogonal" and np.imag(z) < 0:
        raise ValueError("the orthogonal construction is stated for Im z > 0")
    schedule = tuple(schedule or ext.schedule)
    lz, lzb = _limits_at(ext, z, schedule, tol)
    if lz.n_z > lzb.n_z and np.imag(z) > 0:
        raise ValueError("extension Green matrix needs n_z <= n_conj z")
    A, K = _factors(lz, lzb, z)
    N = int(horizon or max(lz.N_used, lzb.N_used, ext.gram_horizon))

    def compute(n):
        if method == "wronskian":
            return _wronskian_W(ext, z, lz, A, K, n)
        return _orthogonal_W(ext, z, lz, lzb, n)

    W = compute(N)
    inc = opnorm(W - compute(max(N // 2, 1)))
    W = lz.Pplus @ W @ lzb.Pplus
    G = lz.S_limit + A @ W @ K
    defect = opnorm(dagger(W) @ W - lzb.Pplus) if ext.equal_indices else float("nan")
    return ExtensionPoint(
        W, G, complex(z), method, N, float(inc), bool(inc < 1e-6), float(defect),
        float(limit_surface_residual(lz, lzb, G)),
    )


def limit_surface_residual(lz, lzb, G):
    """Distance of G from the limit surface S + A W K with W a partial isometry.

    Uses (G - S)^* (sigma R^z)^+ (G - S) = -sigma R^{conj z} on the surface
    together with P_0^z (G - S) = 0.
    """
    sigma = np.sign(np.imag(lz.z))
    D = np.atleast_2d(G) - lz.S_limit
    Rp = pinv_on_range(sigma * lz.R_limit, lz.kernel_threshold)
    lhs = dagger(D) @ Rp @ D + sigma * lzb.R_limit
    return max(opnorm(lhs), opnorm(lz.P0 @ D))


@dataclass(frozen=True)
class ResidualReport:
    residual: float
    tail: float
    disc_slack: float
    horizon: int
    horizon_requested: int
    decaying: bool
    tail_converged: bool

    def __float__(self):
        return self.residual + self.tail


def resolvent_residual(target, z, G, horizon=256, tail_tol=1e-8, noise=1e-6, slack_tol=1e-6):
    """Check that phi = psi^{D,z} G - psi^{A,z} solves (H - z) phi = pi_1 in l^2.

    ``target`` is an ExtensionSpec or a model.  The solutions are generated by
    forward recursion, whose rounding error grows with the dominant solution;
    sites beyond the point where that error reaches ``noise`` are dropped and
    the horizon actually used is reported.  The residual is the largest
    recurrence defect relative to the size of the terms entering it.

    The tail is the sum of |phi_n|^2 over (h/2, h].  It counts as decaying when
    it is below ``tail_tol`` or at most half the sum over (h/4, h/2].
    DiscViolation is raised when the tail does not decay or when
    i(G^* - G) - 2|Im z| sum |phi_n|^2 has an eigenvalue below -``slack_tol``.
    """
    model = target.model if isinstance(target, ExtensionSpec) else target
    G = np.atleast_2d(np.asarray(G, dtype=complex))
    eps = np.finfo(float).eps
    with np.errstate(over="ignore", invalid="ignore"):
        sol = solutions(model, horizon, z)
        D, A = sol.dirichlet, sol.anti_dirichlet
        size = np.maximum(np.linalg.norm(D, axis=(1, 2)), np.linalg.norm(A, axis=(1, 2)))
    ok = np.isfinite(size) & (eps * size * (1 + opnorm(G)) <= noise)
    h = int(np.argmin(ok)) - 2 if not ok.all() else horizon
    h = min(h, horizon)
    if h < 2:
        raise ConvergenceError("forward recursion loses accuracy before site 2")
    phi = D[: h + 2] @ G - A[: h + 2]
    L = model.L
    worst = 0.0
    for n in range(1, h + 1):
        Tn1, Tn = model.T(n + 1), model.T(n)
        Vz = model.V(n) - z * np.eye(L)
        r = Tn1 @ phi[n + 1] + Vz @ phi[n] + dagger(Tn) @ phi[n - 1]
        scale = (1 + opnorm(G)) * (
            opnorm(Tn1) * size[n + 1] + opnorm(Vz) * size[n] + opnorm(Tn) * size[n - 1]
        )
        worst = max(worst, opnorm(r) / scale)
    body = phi[1 : h + 1]
    sq = np.linalg.norm(body, axis=(1, 2)) ** 2
    tail = float(sq[h // 2 :].sum())
    before = float(sq[h // 4 : h // 2].sum())
    total = np.einsum("nji,njk->ik", body.conj(), body)
    slack = float(np.linalg.eigvalsh(herm(1j * (dagger(G) - G) - 2 * abs(np.imag(z)) * total)).min())
    decaying = tail <= tail_tol or tail <= 0.5 * before
    report = ResidualReport(float(worst), tail, slack, h, int(horizon), decaying, tail <= tail_tol)
    if not report.decaying:
        raise DiscViolation(f"tail sum {tail:.3e} does not decay; G is outside the limit disc", report)
    if slack < -slack_tol * max(1.0, opnorm(G)):
        raise DiscViolation(f"summed disc inequality violated by {-slack:.3e}", report)
    return report


def finite_volume_shadow(ext, z, N):
    """Truncated Green matrix whose right boundary matches the extension at site N.

    The condition Z_N = -(T_{N+1} u_{N+1}) u_N^{-1} with
    u = psi~^{D,conj zeta} V - psi~^{D,zeta} is made Hermitian, and
    G_N^z(xi_N) is returned with the Hermitian defect of Z_N.
    """
    from .green import green_boundary

    model = ext.model
    tz = normalized_solution(model, ext.zeta, N, ext.limit_zeta).values
    tzb = normalized_solution(model, np.conj(ext.zeta), N, ext.limit_zetabar).values
    u = tzb @ ext.V - tz
    top = model.T(N + 1) @ u[N + 1]
    Z = -top @ np.linalg.pinv(u[N])
    xi = herm(Z)
    return green_boundary(model, N, z, xi), opnorm(Z - xi) / max(1.0, opnorm(Z))
