"""Equality certificates: canonical shape operators and frame recovery.

In the equality case the shape operators take, in suitable orthonormal
frames, the form

    A_1 = a1 I + b S,   A_2 = a2 I + b D,   A_3 = a3 I,   A_r = 0 (r >= 4)

with ``S = E_12 + E_21`` and ``D = E_11 - E_22``.  :func:`detect_equality`
searches tangent and normal rotations that bring a given ``h`` to this form.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.optimize import least_squares
from scipy.stats import ortho_group

from .ambient import AmbientModel, SpaceForm
from .errors import DimensionError
from .inequalities import EXACT_TOL, InequalityId, gap
from .invariants import SecondFundamentalForm

log = logging.getLogger(__name__)

RESTARTS = 20
MAX_ITER = 500
IMPROVEMENT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class EqualityCertificate:
    alpha1: float
    alpha2: float
    alpha3: float
    beta: float
    tangent_rotation: np.ndarray
    normal_rotation: np.ndarray
    residual: float
    verified: bool

    def as_dict(self) -> dict:
        return {
            "alpha1": self.alpha1,
            "alpha2": self.alpha2,
            "alpha3": self.alpha3,
            "beta": self.beta,
            "residual": self.residual,
            "verified": self.verified,
            "tangent_rotation": self.tangent_rotation.tolist(),
            "normal_rotation": self.normal_rotation.tolist(),
        }


def _pattern_basis(n: int) -> tuple[np.ndarray, np.ndarray]:
    S = np.zeros((n, n))
    S[0, 1] = S[1, 0] = 1.0
    D = np.zeros((n, n))
    D[0, 0], D[1, 1] = 1.0, -1.0
    return S, D


def canonical_operators(n: int, codim: int, alpha1: float, alpha2: float, alpha3: float,
                        beta: float) -> np.ndarray:
    """Canonical equality operators truncated or zero-padded to ``codim`` normals.

    For ``codim < 3`` the missing operators are dropped, which requires the
    coefficients they carry to vanish.
    """
    if n < 2:
        raise DimensionError("need n >= 2")
    if codim < 3 and alpha3 != 0.0:
        raise DimensionError("alpha3 needs codim >= 3")
    if codim < 2 and (alpha2 != 0.0 or beta != 0.0):
        raise DimensionError("alpha2 and beta need codim >= 2")
    S, D = _pattern_basis(n)
    I = np.eye(n)
    A = np.zeros((codim, n, n))
    A[0] = alpha1 * I + beta * S
    if codim >= 2:
        A[1] = alpha2 * I + beta * D
    if codim >= 3:
        A[2] = alpha3 * I
    return A


def canonical_equality_h(n: int, codim: int, alpha1: float, alpha2: float, alpha3: float,
                         beta: float) -> SecondFundamentalForm:
    if n < 3:
        raise DimensionError(f"equality forms are stated for n >= 3, got n = {n}")
    if codim < 3:
        raise DimensionError(f"three nonzero shape operators need codim >= 3, got {codim}")
    return SecondFundamentalForm(canonical_operators(n, codim, alpha1, alpha2, alpha3, beta))


def fit_pattern(A: np.ndarray) -> tuple[tuple[float, float, float, float], np.ndarray]:
    """Least-squares (a1, a2, a3, b) for operators already in the target frames."""
    codim, n = A.shape[0], A.shape[1]
    alphas = [float(np.trace(A[r])) / n if r < codim else 0.0 for r in range(3)]
    if codim >= 2:
        beta = (2.0 * A[0, 0, 1] + A[1, 0, 0] - A[1, 1, 1]) / 4.0
    else:
        beta = 0.0
    return (alphas[0], alphas[1], alphas[2], float(beta)), canonical_operators(n, codim, *alphas, beta)


def _rotate(A: np.ndarray, Q: np.ndarray, N: np.ndarray) -> np.ndarray:
    return np.einsum("sr,ia,sij,jb->rab", N, Q, A, Q)


def pattern_residual(A: np.ndarray, Q: np.ndarray, N: np.ndarray) -> float:
    """Sum of squared deviations of the rotated operators from the fitted pattern."""
    At = _rotate(A, Q, N)
    _, P = fit_pattern(At)
    return float(np.sum((At - P) ** 2))


def _skew(x: np.ndarray, k: int) -> np.ndarray:
    K = np.zeros((k, k))
    K[np.triu_indices(k, 1)] = x
    return K - K.T


def _spectral_seed(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Frames read off the traceless parts; exact for data on the equality set."""
    codim, n = A.shape[0], A.shape[1]
    means = np.trace(A, axis1=1, axis2=2) / n
    B = A - means[:, None, None] * np.eye(n)
    U, _, _ = np.linalg.svd(B.reshape(codim, -1), full_matrices=True)
    first = np.einsum("r,rij->ij", U[:, 0], B)
    w, V = np.linalg.eigh(first)
    order = [n - 1, 0] + list(range(1, n - 1))
    Q = V[:, order]
    # normal directions: [second singular, first singular, mean-curvature remainder, rest]
    cols = []
    if codim >= 2:
        v1 = U[:, 1]
        if (Q.T @ np.einsum("r,rij->ij", v1, B) @ Q)[0, 1] < 0:
            v1 = -v1
        cols = [v1, U[:, 0]]
    else:
        cols = [U[:, 0]]
    basis = np.column_stack(cols)
    rest = means - basis @ (basis.T @ means)
    candidates = [rest] + [np.eye(codim)[:, k] for k in range(codim)]
    for v in candidates:
        if basis.shape[1] == codim:
            break
        v = v - basis @ (basis.T @ v)
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            basis = np.column_stack([basis, v / nv])
    return Q, basis


def _reorthonormalize(Q: np.ndarray) -> np.ndarray:
    # QR with the column signs kept, so the frame orientation is not flipped
    q, r = np.linalg.qr(Q)
    return q * np.where(np.diagonal(r) < 0, -1.0, 1.0)


def _polish(A: np.ndarray, Q0: np.ndarray, N0: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    codim, n = A.shape[0], A.shape[1]
    kt, kn = n * (n - 1) // 2, codim * (codim - 1) // 2

    def frames(x):
        return Q0 @ expm(_skew(x[:kt], n)), N0 @ expm(_skew(x[kt:], codim))

    def residuals(x):
        Q, N = frames(x)
        At = _rotate(A, Q, N)
        _, P = fit_pattern(At)
        return (At - P).ravel()

    x0 = np.zeros(kt + kn)
    if kt + kn == 0:
        return Q0, N0, pattern_residual(A, Q0, N0)
    sol = least_squares(residuals, x0, method="lm", xtol=1e-15, ftol=IMPROVEMENT_TOL * 1e-3,
                        gtol=1e-15, max_nfev=MAX_ITER * (kt + kn + 1))
    Q, N = frames(sol.x)
    Q, N = _reorthonormalize(Q), _reorthonormalize(N)
    return Q, N, pattern_residual(A, Q, N)


def _canonical_sign(A: np.ndarray, Q: np.ndarray, N: np.ndarray) -> np.ndarray:
    """Rotate e_1, e_2 by 90 degrees when needed so that beta >= 0."""
    (_, _, _, beta), _ = fit_pattern(_rotate(A, Q, N))
    if beta >= 0:
        return Q
    T = np.eye(A.shape[1])
    T[:2, :2] = [[0.0, -1.0], [1.0, 0.0]]
    return Q @ T


def find_frames(A: np.ndarray, restarts: int = RESTARTS, seed: int = 0, stop_below: float = 1e-24,
                spectral_seed: bool = True) -> tuple[np.ndarray, np.ndarray, float]:
    """Minimise the pattern residual over O(n) x O(codim); returns (Q, N, residual).

    The first start is read off the spectrum of the traceless parts (unless
    ``spectral_seed`` is off); the remaining starts are Haar-random frames.
    Each start is refined by Levenberg-Marquardt on skew-symmetric generators.
    """
    codim, n = A.shape[0], A.shape[1]
    rng = np.random.default_rng(seed)
    if spectral_seed:
        best = _polish(A, *_spectral_seed(A))
    else:
        best = (np.eye(n), np.eye(codim), np.inf)
    for _ in range(restarts - 1 if spectral_seed else restarts):
        if best[2] <= stop_below:
            break
        Q0 = ortho_group.rvs(n, random_state=rng) if n > 1 else np.eye(n)
        N0 = ortho_group.rvs(codim, random_state=rng) if codim > 1 else np.eye(codim)
        cand = _polish(A, Q0, N0)
        if cand[2] < best[2]:
            best = cand
    return best


def certificate_from_h(h: SecondFundamentalForm, tol: float = EXACT_TOL, restarts: int = RESTARTS,
                       seed: int = 0, spectral_seed: bool = True) -> EqualityCertificate:
    A = np.asarray(h.h)
    Q, N, _ = find_frames(A, restarts=restarts, seed=seed, spectral_seed=spectral_seed)
    Q = _canonical_sign(A, Q, N)
    At = _rotate(A, Q, N)
    (a1, a2, a3, beta), P = fit_pattern(At)
    residual = float(np.sum((At - P) ** 2))
    return EqualityCertificate(a1, a2, a3, beta, Q, N, residual, residual <= np.sqrt(tol))


def detect_equality(h: SecondFundamentalForm, model: AmbientModel, m: int, tol: float = EXACT_TOL,
                    restarts: int = RESTARTS, seed: int = 0,
                    spectral_seed: bool = True) -> EqualityCertificate | None:
    """Certificate for the equality case, or ``None`` when the gap exceeds ``tol``."""
    if h.n >= 3:
        which = InequalityId.PROP1_RHO_N
    elif isinstance(model, SpaceForm):
        which = InequalityId.DDVV_SPACEFORM
    else:
        raise DimensionError("equality detection for n = 2 needs a space-form ambient")
    g = gap(h, model, m, which, tol)
    if abs(g.gap) > tol:
        return None
    cert = certificate_from_h(h, tol, restarts, seed, spectral_seed)
    if not cert.verified:
        log.info("frame search stalled at residual %.3e (gap %.3e)", cert.residual, g.gap)
    return cert
