"""Extrinsic data of a submanifold and the curvature invariants built from it.

Arrays use 0-based indices ``h[r, i, j] = h^r_{ij}``: ``r`` runs over the
normal frame, ``i, j`` over the tangent frame.  Both frames are orthonormal,
so the shape operator ``A_r`` is the matrix ``h[r]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ambient import (
    AmbientModel,
    SpaceForm,
    ambient_scalar_curvature,
    ric_tangent_trace,
)
from .errors import DimensionError, InvariantError

SYMMETRY_TOL = 1e-12


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SecondFundamentalForm:
    """Components h^r_{ij} of the second fundamental form at a point."""

    h: np.ndarray

    def __post_init__(self):
        h = np.array(self.h, dtype=float)
        if h.ndim != 3 or h.shape[1] != h.shape[2]:
            raise DimensionError(f"h must have shape (codim, n, n), got {h.shape}")
        if h.shape[0] < 1:
            raise DimensionError("codimension must be >= 1")
        if h.shape[1] < 2:
            raise DimensionError("tangent dimension must be >= 2")
        if not np.all(np.isfinite(h)):
            raise InvariantError("h has non-finite components")
        scale = 1.0 + float(np.abs(h).max(initial=0.0))
        if np.abs(h - h.transpose(0, 2, 1)).max(initial=0.0) > SYMMETRY_TOL * scale:
            raise InvariantError("h^r_ij must be symmetric in (i, j)")
        object.__setattr__(self, "h", _readonly(h))

    @classmethod
    def from_operators(cls, matrices) -> "SecondFundamentalForm":
        return cls(np.stack([np.asarray(a, dtype=float) for a in matrices]))

    @classmethod
    def zeros(cls, n: int, codim: int) -> "SecondFundamentalForm":
        return cls(np.zeros((codim, n, n)))

    @property
    def n(self) -> int:
        return self.h.shape[1]

    @property
    def codim(self) -> int:
        return self.h.shape[0]

    def shape_operators(self) -> "ShapeOperatorSet":
        return ShapeOperatorSet(self.h)

    def rotated(self, tangent_rotation, normal_rotation=None) -> "SecondFundamentalForm":
        """Express h in the frames e'_a = sum_i Q[i,a] e_i, v'_r = sum_s N[s,r] v_s."""
        Q = np.asarray(tangent_rotation, dtype=float)
        N = np.eye(self.codim) if normal_rotation is None else np.asarray(normal_rotation, dtype=float)
        return SecondFundamentalForm(np.einsum("sr,ia,sij,jb->rab", N, Q, self.h, Q))

    def scaled(self, factor: float) -> "SecondFundamentalForm":
        return SecondFundamentalForm(factor * self.h)


@dataclass(frozen=True, eq=False)
class ShapeOperatorSet:
    """The symmetric matrices A_r, derived from a second fundamental form."""

    matrices: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrices", _readonly(self.matrices))

    def __len__(self) -> int:
        return self.matrices.shape[0]

    def __getitem__(self, r: int) -> np.ndarray:
        return self.matrices[r]


@dataclass(frozen=True, eq=False)
class MeanCurvature:
    components: np.ndarray
    norm_sq: float

    @property
    def is_minimal(self) -> bool:
        return self.norm_sq == 0.0


@dataclass(frozen=True)
class InvariantReport:
    n: int
    codim: int
    rho: float
    rho_n: float
    rho_perp: float
    h_norm_sq: float
    k_n: float
    tau: float
    tau_perp: float
    notes: tuple[str, ...] = field(default=())


def _as_h(h) -> np.ndarray:
    if isinstance(h, SecondFundamentalForm):
        return h.h
    if isinstance(h, ShapeOperatorSet):
        return h.matrices
    return np.asarray(h, dtype=float)


def k_n_from_components(h) -> float:
    """Normal scalar curvature from the index formula, summing r<s and i<j."""
    H = _as_h(h)
    codim, n = H.shape[0], H.shape[1]
    iu, ju = np.triu_indices(n, k=1)
    total = 0.0
    for r in range(codim):
        for s in range(r + 1, codim):
            # sum_k (h^r_jk h^s_ik - h^r_ik h^s_jk), indexed [i, j]
            inner = np.einsum("jk,ik->ij", H[r], H[s]) - np.einsum("ik,jk->ij", H[r], H[s])
            total += float(np.sum(inner[iu, ju] ** 2))
    return total


def k_n_from_commutators(A) -> float:
    """-1/4 sum_{r,s} trace([A_r, A_s]^2)."""
    M = _as_h(A)
    total = 0.0
    for r in range(M.shape[0]):
        for s in range(M.shape[0]):
            C = M[r] @ M[s] - M[s] @ M[r]
            total += float(np.trace(C @ C))
    return -0.25 * total


def normal_curvature_components(A) -> np.ndarray:
    """g([A_r, A_s] e_i, e_j) for all r, s, i, j (the normal curvature tensor)."""
    M = _as_h(A)
    # prod[r, s, i, j] = (A_r A_s)_{ji}, the e_j-component of A_r A_s e_i
    prod = np.einsum("rjk,ski->rsij", M, M)
    return prod - prod.transpose(1, 0, 2, 3)


def tau_perp_via_ricci_equation(A) -> float:
    """sqrt of sum_{r<s} sum_{i<j} g([A_r, A_s] e_i, e_j)^2."""
    M = _as_h(A)
    codim, n = M.shape[0], M.shape[1]
    Rn = normal_curvature_components(M)
    ir, js = np.triu_indices(codim, k=1)
    iu, ju = np.triu_indices(n, k=1)
    block = Rn[ir, js][:, iu, ju]
    return math.sqrt(float(np.sum(block**2)))


def mean_curvature(h) -> MeanCurvature:
    H = _as_h(h)
    comps = np.trace(H, axis1=1, axis2=2) / H.shape[1]
    return MeanCurvature(_readonly(comps), float(comps @ comps))


def mean_curvature_split(h) -> float:
    """n^2 |H|^2 assembled from squared diagonal differences and diagonal products."""
    H = _as_h(h)
    n = H.shape[1]
    d = np.diagonal(H, axis1=1, axis2=2)
    iu, ju = np.triu_indices(n, k=1)
    diffs = float(np.sum((d[:, iu] - d[:, ju]) ** 2))
    prods = float(np.sum(d[:, iu] * d[:, ju]))
    return diffs / (n - 1) + 2.0 * n / (n - 1) * prods


def extrinsic_scalar_term(h) -> float:
    """sum_r sum_{i<j} (h^r_ii h^r_jj - (h^r_ij)^2)."""
    H = _as_h(h)
    n = H.shape[1]
    d = np.diagonal(H, axis1=1, axis2=2)
    iu, ju = np.triu_indices(n, k=1)
    return float(np.sum(d[:, iu] * d[:, ju]) - np.sum(H[:, iu, ju] ** 2))


def scalar_curvature_gauss(h: SecondFundamentalForm, model: AmbientModel, m: int) -> float:
    """Scalar curvature tau of the induced metric (sum over i<j of sectional curvatures).

    Uses the Gauss equation for a conformally flat ambient space, so only the
    tangent trace of the ambient Ricci tensor and the ambient scalar curvature
    enter.
    """
    n = h.n
    if m < 4:
        raise DimensionError(f"conformally flat Gauss equation needs m >= 4, got {m}")
    if m != n + h.codim:
        raise DimensionError(f"m={m} inconsistent with n={n}, codim={h.codim}")
    ric = ric_tangent_trace(model, n, m)
    tau_amb = ambient_scalar_curvature(model, m)
    return (
        (n - 1) / (m - 2) * ric
        - n * (n - 1) * tau_amb / ((m - 1) * (m - 2))
        + extrinsic_scalar_term(h)
    )


def scalar_curvature_from_tensor(h: SecondFundamentalForm, R) -> float:
    """Gauss equation against a full ambient tensor (tangent frame = first n axes)."""
    Rc = R.components if hasattr(R, "components") else np.asarray(R, dtype=float)
    n = h.n
    iu, ju = np.triu_indices(n, k=1)
    ambient = float(np.sum(Rc[iu, ju, ju, iu]))
    return ambient + extrinsic_scalar_term(h)


def full_report(h: SecondFundamentalForm, model: AmbientModel, m: int) -> InvariantReport:
    n, codim = h.n, h.codim
    norm = 2.0 / (n * (n - 1))
    tau = scalar_curvature_gauss(h, model, m)
    k_n = k_n_from_components(h)
    tau_perp = tau_perp_via_ricci_equation(h.shape_operators())
    notes = []
    if codim == 1:
        notes.append("codimension 1: normal connection is flat, rho_perp = 0 identically")
    return InvariantReport(
        n=n,
        codim=codim,
        rho=norm * tau,
        rho_n=norm * math.sqrt(max(k_n, 0.0)),
        rho_perp=norm * tau_perp,
        h_norm_sq=mean_curvature(h).norm_sq,
        k_n=k_n,
        tau=tau,
        tau_perp=tau_perp,
        notes=tuple(notes),
    )


@dataclass(frozen=True)
class SurfaceInvariants:
    gauss: float
    normal: float
    notes: tuple[str, ...] = ()

    @property
    def abs_normal(self) -> float:
        return abs(self.normal)


def surface_invariants(h: SecondFundamentalForm, c: float | SpaceForm = 0.0) -> SurfaceInvariants:
    """Gauss curvature G and normal curvature G_perp of a surface in a space form.

    For codimension 2 the normal curvature is the signed g([A_1, A_2] e_1, e_2);
    beyond that only its modulus sqrt(K_N) is defined and reported.
    """
    if h.n != 2:
        raise DimensionError(f"surface invariants need n = 2, got {h.n}")
    if isinstance(c, SpaceForm):
        c = c.c
    H = h.h
    gauss = c + float(np.sum(H[:, 0, 0] * H[:, 1, 1] - H[:, 0, 1] ** 2))
    if h.codim == 1:
        return SurfaceInvariants(gauss, 0.0)
    if h.codim == 2:
        return SurfaceInvariants(gauss, float(normal_curvature_components(H)[0, 1, 0, 1]))
    return SurfaceInvariants(
        gauss,
        math.sqrt(k_n_from_components(h)),
        ("codimension >= 3: normal curvature reported as sqrt(K_N), sign undefined",),
    )
