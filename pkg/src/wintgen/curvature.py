"""Algebraic curvature tensors of the ambient space.

Index convention: ``R[a, b, c, d] = R(e_a, e_b, e_c, e_d)`` in an orthonormal
frame, with the sign chosen so that the sectional curvature of the plane
``e_a ^ e_b`` is ``R[a, b, b, a]``.  The constant-curvature tensor is then

    R(X1, X2, X3, X4) = c [g(X2, X3) g(X1, X4) - g(X1, X3) g(X2, X4)].

Ricci is the contraction ``Ric(X, Y) = sum_a R(e_a, X, Y, e_a)``.  The scalar
curvature used throughout the package is the sum of sectional curvatures over
coordinate 2-planes (``a < b``), which is *half* the Ricci trace.  With that
normalisation the unit m-sphere has scalar curvature m(m-1)/2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateWarpingError, DimensionError, InvariantError

DEFAULT_TOL = 1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def symmetry_defect(components: np.ndarray) -> float:
    """Largest violation of the algebraic curvature-tensor identities."""
    R = np.asarray(components, dtype=float)
    antisym_12 = R + R.transpose(1, 0, 2, 3)
    antisym_34 = R + R.transpose(0, 1, 3, 2)
    pair = R - R.transpose(2, 3, 0, 1)
    # R(a,b,c,d) + R(b,c,a,d) + R(c,a,b,d)
    bianchi = R + R.transpose(2, 0, 1, 3) + R.transpose(1, 2, 0, 3)
    return float(max(np.abs(t).max(initial=0.0) for t in (antisym_12, antisym_34, pair, bianchi)))


@dataclass(frozen=True, eq=False)
class CurvatureTensor:
    """Dense (0,4) curvature tensor; symmetries are checked on construction."""

    components: np.ndarray

    def __post_init__(self):
        R = _frozen(self.components)
        if R.ndim != 4 or len(set(R.shape)) != 1:
            raise DimensionError(f"curvature tensor must be m x m x m x m, got {R.shape}")
        if R.shape[0] < 2:
            raise DimensionError("curvature tensor needs dim >= 2")
        scale = 1.0 + float(np.abs(R).max(initial=0.0))
        defect = symmetry_defect(R)
        if defect > DEFAULT_TOL * scale:
            raise InvariantError(f"tensor violates curvature symmetries (defect {defect:.3e})")
        object.__setattr__(self, "components", R)

    @property
    def dim(self) -> int:
        return self.components.shape[0]

    def __getitem__(self, idx):
        return self.components[idx]


@dataclass(frozen=True, eq=False)
class RicciTensor:
    components: np.ndarray

    def __post_init__(self):
        ric = _frozen(self.components)
        if ric.ndim != 2 or ric.shape[0] != ric.shape[1]:
            raise DimensionError(f"Ricci tensor must be square, got {ric.shape}")
        if np.abs(ric - ric.T).max(initial=0.0) > DEFAULT_TOL * (1.0 + np.abs(ric).max(initial=0.0)):
            raise InvariantError("Ricci tensor is not symmetric")
        object.__setattr__(self, "components", ric)

    @property
    def dim(self) -> int:
        return self.components.shape[0]


def _metric_wedge(m: int) -> np.ndarray:
    """g(X2,X3) g(X1,X4) - g(X1,X3) g(X2,X4) in an orthonormal frame."""
    g = np.eye(m)
    return np.einsum("bc,ad->abcd", g, g) - np.einsum("ac,bd->abcd", g, g)


def constant_curvature_tensor(c: float, m: int) -> CurvatureTensor:
    return CurvatureTensor(c * _metric_wedge(m))


def ricci_from_tensor(R: CurvatureTensor) -> RicciTensor:
    return RicciTensor(np.einsum("abca->bc", R.components))


def scalar_curvature(ric: RicciTensor) -> float:
    """Sum of coordinate sectional curvatures, i.e. half the Ricci trace."""
    return 0.5 * float(np.trace(ric.components))


def weyl_tensor(R: CurvatureTensor, ric: RicciTensor, tau: float) -> CurvatureTensor:
    """Weyl conformal curvature tensor.

    ``tau`` is the scalar curvature in this package's normalisation (half the
    Ricci trace).  ``ric`` and ``tau`` are taken as given; they are not checked
    against ``R``.
    """
    m = R.dim
    if m < 3:
        raise DimensionError(f"Weyl tensor is undefined for dim {m} < 3")
    if ric.dim != m:
        raise DimensionError("Ricci and curvature tensor dimensions differ")
    g = np.eye(m)
    Ric = ric.components
    ricci_part = (
        np.einsum("bc,ad->abcd", Ric, g)
        - np.einsum("ac,bd->abcd", Ric, g)
        + np.einsum("ad,bc->abcd", Ric, g)
        - np.einsum("bd,ac->abcd", Ric, g)
    )
    C = (
        R.components
        - ricci_part / (m - 2)
        + 2.0 * tau / ((m - 1) * (m - 2)) * _metric_wedge(m)
    )
    return CurvatureTensor(C)


def max_weyl_component(R: CurvatureTensor) -> float:
    ric = ricci_from_tensor(R)
    C = weyl_tensor(R, ric, scalar_curvature(ric))
    return float(np.abs(C.components).max(initial=0.0))


def is_conformally_flat(R: CurvatureTensor, tol: float = DEFAULT_TOL) -> bool:
    """Vanishing-Weyl test; only meaningful in dimension 4 and above."""
    if R.dim <= 3:
        raise DimensionError(
            f"Weyl criterion for conformal flatness needs dim >= 4, got {R.dim}"
        )
    return max_weyl_component(R) <= tol


def _unit(v, m: int | None = None, name: str = "vector") -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise DimensionError(f"{name} must be one-dimensional")
    if m is not None and v.shape[0] != m:
        raise DimensionError(f"{name} has length {v.shape[0]}, expected {m}")
    if abs(float(v @ v) - 1.0) > DEFAULT_TOL:
        raise InvariantError(f"{name} must be a unit vector (|v|^2 = {float(v @ v)!r})")
    return v


def quasi_constant_curvature_tensor(p: float, q: float, psi, m: int | None = None) -> CurvatureTensor:
    """Curvature tensor of quasi-constant curvature with generator ``psi`` = g(., V)."""
    psi = _unit(psi, m, "psi")
    m = psi.shape[0]
    g = np.eye(m)
    pp = np.outer(psi, psi)
    q_part = (
        np.einsum("ad,bc->abcd", g, pp)
        - np.einsum("ac,bd->abcd", g, pp)
        + np.einsum("bc,ad->abcd", g, pp)
        - np.einsum("bd,ac->abcd", g, pp)
    )
    return CurvatureTensor(p * _metric_wedge(m) + q * q_part)


def ricci_and_scalar_of_quasi_constant(p: float, q: float, m: int) -> tuple[RicciTensor, float]:
    """Ricci tensor (frame with e_1 = V) and scalar curvature in closed form."""
    if m < 2:
        raise DimensionError("quasi-constant curvature needs m >= 2")
    diag = np.full(m, (m - 1) * p + q)
    diag[0] += (m - 2) * q
    tau = 0.5 * (m * ((m - 1) * p + q) + (m - 2) * q)
    return RicciTensor(np.diag(diag)), tau


def grw_associated_functions(c: float, f: float, f_prime: float, f_second: float) -> tuple[float, float]:
    """The pair (p, q) exhibiting I x_f M(c) as a quasi-constant-curvature space."""
    if f == 0:
        raise DegenerateWarpingError("warping function vanishes (f = 0)")
    p = (c - f_prime**2) / f**2
    q = -(f_second / f + p)
    return p, q


def grw_curvature_tensor(
    c: float, f: float, f_prime: float, f_second: float, t_direction
) -> CurvatureTensor:
    """Curvature of dt^2 + f^2 g_c at a point, with d/dt along ``t_direction``.

    Built term by term from the warped-product formula, independently of
    :func:`quasi_constant_curvature_tensor`.
    """
    if f == 0:
        raise DegenerateWarpingError("warping function vanishes (f = 0)")
    T = _unit(t_direction, name="t_direction")
    m = T.shape[0]
    g = np.eye(m)
    fiber = (c - f_prime**2) / f**2
    mixed = f_second / f + fiber
    bracket = (
        -np.einsum("ac,b,d->abcd", g, T, T)
        + np.einsum("bc,a,d->abcd", g, T, T)
        + np.einsum("ad,b,c->abcd", g, T, T)
        - np.einsum("bd,a,c->abcd", g, T, T)
    )
    return CurvatureTensor(fiber * _metric_wedge(m) - mixed * bracket)
