"""Small dense helpers shared by the numerical modules."""
import numpy as np

from .exceptions import ConditioningError

# relative singular value floor used for every "invertible by theory" bracket
INVERT_RTOL = 1e-12
# relative eigenvalue floor below which PSD factors are treated as zero
SQRT_CLAMP = 1e-13


def dagger(a):
    return np.conj(np.swapaxes(a, -1, -2))


def herm(a):
    return 0.5 * (a + dagger(a))


def symplectic_form(L):
    """Block matrix [[0, -1], [1, 0]] of size 2L."""
    J = np.zeros((2 * L, 2 * L), dtype=complex)
    J[:L, L:] = -np.eye(L)
    J[L:, :L] = np.eye(L)
    return J


def split_blocks(M):
    L = M.shape[0] // 2
    return M[:L, :L], M[:L, L:], M[L:, :L], M[L:, L:]


def opnorm(a):
    return float(np.linalg.norm(a, 2)) if a.size else 0.0


def smallest_singular_ratio(a):
    s = np.linalg.svd(a, compute_uv=False)
    if s[0] == 0.0 or not np.all(np.isfinite(s)):
        return 0.0
    return float(s[-1] / s[0])


def checked_solve(a, b, what="bracket", rtol=INVERT_RTOL):
    """Solve a x = b, raising ConditioningError when a is numerically singular.

    Rows are equilibrated before the singular value test so that badly scaled
    but well-posed systems are not rejected.
    """
    rows = np.linalg.norm(a, axis=1)
    if not np.all(rows > 0) or smallest_singular_ratio(a / rows[:, None]) < rtol:
        raise ConditioningError(f"{what} is numerically singular")
    return np.linalg.solve(a, b)


def checked_inv(a, what="bracket", rtol=INVERT_RTOL):
    return checked_solve(a, np.eye(a.shape[0], dtype=np.result_type(a, complex)), what, rtol)


def psd_sqrt(a, clamp=SQRT_CLAMP):
    """Hermitian square root of a PSD matrix; negative rounding dust is clamped to 0."""
    w, u = np.linalg.eigh(herm(a))
    cut = clamp * max(abs(w).max(initial=0.0), 0.0)
    w = np.where(w > cut, w, 0.0)
    return (u * np.sqrt(w)) @ dagger(u)


def range_projection(a, threshold):
    """Orthogonal projection onto eigenvectors of Hermitian a with |eigenvalue| > threshold."""
    w, u = np.linalg.eigh(herm(a))
    keep = np.abs(w) > threshold
    uk = u[:, keep]
    return uk @ dagger(uk), int(keep.sum())


def psd_pinv_sqrt(a, threshold):
    """(a^+)^{1/2} restricted to eigenvalues above threshold."""
    w, u = np.linalg.eigh(herm(a))
    keep = w > threshold
    inv = np.zeros_like(w)
    inv[keep] = 1.0 / np.sqrt(w[keep])
    return (u * inv) @ dagger(u)


def pinv_on_range(a, threshold):
    """Pseudo-inverse with singular values below threshold annihilated."""
    u, s, vh = np.linalg.svd(a)
    inv = np.where(s > threshold, 1.0 / np.where(s > threshold, s, 1.0), 0.0)
    return (dagger(vh) * inv) @ dagger(u)


def is_hermitian(a, rtol=1e-12):
    return np.linalg.norm(a - dagger(a)) <= rtol * (1.0 + np.linalg.norm(a))


def signature(a, rtol=1e-12):
    """(positive, negative, zero) eigenvalue counts of Hermitian a."""
    w = np.linalg.eigvalsh(herm(a))
    cut = rtol * max(abs(w).max(initial=0.0), 1.0)
    return int((w > cut).sum()), int((w < -cut).sum()), int((abs(w) <= cut).sum())
