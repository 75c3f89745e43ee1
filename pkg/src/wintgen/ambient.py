"""Ambient-space models and the curvature correction they feed into each inequality.

All models are evaluated pointwise in a frame adapted to the submanifold:
ambient frame vectors ``0..n-1`` are tangent, ``n..m-1`` are normal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .curvature import (
    DEFAULT_TOL,
    CurvatureTensor,
    constant_curvature_tensor,
    grw_associated_functions,
    grw_curvature_tensor,
    quasi_constant_curvature_tensor,
    ricci_from_tensor,
    scalar_curvature,
)
from .errors import DegenerateWarpingError, DimensionError, InvariantError


def _as_tuple(v) -> tuple[float, ...]:
    return tuple(float(x) for x in np.asarray(v, dtype=float).ravel())


def _check_unit_split(tangential: tuple[float, ...], normal_norm_sq: float, what: str) -> None:
    if normal_norm_sq < -DEFAULT_TOL or normal_norm_sq > 1 + DEFAULT_TOL:
        raise InvariantError(f"{what}: normal norm^2 {normal_norm_sq!r} outside [0, 1]")
    total = sum(x * x for x in tangential) + normal_norm_sq
    if abs(total - 1.0) > DEFAULT_TOL:
        raise InvariantError(f"{what}: |V^T|^2 + |V^perp|^2 = {total!r}, expected 1")


@dataclass(frozen=True)
class SpaceForm:
    c: float

    def __post_init__(self):
        object.__setattr__(self, "c", float(self.c))

    @property
    def label(self) -> str:
        return f"spaceform:{self.c!r}"


@dataclass(frozen=True)
class QuasiConstant:
    """Quasi-constant curvature (p, q) with distinguished unit field V.

    ``v_tangential`` holds the components of V^T in the tangent frame (an
    empty tuple means V^T = 0) and ``v_normal_norm_sq`` is |V^perp|^2.
    """

    p: float
    q: float
    v_tangential: tuple[float, ...] = ()
    v_normal_norm_sq: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "q", float(self.q))
        object.__setattr__(self, "v_tangential", _as_tuple(self.v_tangential))
        object.__setattr__(self, "v_normal_norm_sq", float(self.v_normal_norm_sq))
        _check_unit_split(self.v_tangential, self.v_normal_norm_sq, "QuasiConstant")

    @classmethod
    def tangent(cls, p: float, q: float, n: int) -> "QuasiConstant":
        """V is tangent to the submanifold (along e_1)."""
        return cls(p, q, (1.0,) + (0.0,) * (n - 1), 0.0)

    @classmethod
    def normal(cls, p: float, q: float) -> "QuasiConstant":
        return cls(p, q, (), 1.0)

    @property
    def tangent_norm_sq(self) -> float:
        return sum(x * x for x in self.v_tangential)

    @property
    def label(self) -> str:
        return f"quasi:{self.p!r},{self.q!r},{self.tangent_norm_sq!r}"


@dataclass(frozen=True)
class GRW:
    """Generalised Robertson-Walker space I x_f M(c), evaluated at one point.

    ``f``, ``f_prime`` and ``f_second`` are the values of the warping function
    and its derivatives there; ``t_tangential``/``t_normal_norm_sq`` split the
    unit field d/dt into tangent components and normal length, as for
    :class:`QuasiConstant`.
    """

    c: float
    f: float
    f_prime: float
    f_second: float
    t_tangential: tuple[float, ...] = ()
    t_normal_norm_sq: float = 1.0

    def __post_init__(self):
        for name in ("c", "f", "f_prime", "f_second", "t_normal_norm_sq"):
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "t_tangential", _as_tuple(self.t_tangential))
        if self.f == 0:
            raise DegenerateWarpingError("warping function vanishes (f = 0)")
        _check_unit_split(self.t_tangential, self.t_normal_norm_sq, "GRW")

    @property
    def tangent_norm_sq(self) -> float:
        return sum(x * x for x in self.t_tangential)

    def associated_functions(self) -> tuple[float, float]:
        return grw_associated_functions(self.c, self.f, self.f_prime, self.f_second)

    def as_quasi_constant(self) -> QuasiConstant:
        p, q = self.associated_functions()
        return QuasiConstant(p, q, self.t_tangential, self.t_normal_norm_sq)

    def with_tangency(self, tangency: str, n: int) -> "GRW":
        if tangency == "tangent":
            return GRW(self.c, self.f, self.f_prime, self.f_second, (1.0,) + (0.0,) * (n - 1), 0.0)
        if tangency == "normal":
            return GRW(self.c, self.f, self.f_prime, self.f_second, (), 1.0)
        raise ValueError(f"tangency must be 'tangent' or 'normal', got {tangency!r}")

    @property
    def label(self) -> str:
        return f"grw:{self.c!r},{self.f!r},{self.f_prime!r},{self.f_second!r},{self.tangent_norm_sq!r}"


@dataclass(frozen=True)
class Explicit:
    """Ambient curvature given directly by the scalars the inequalities consume.

    ``ric_tangent_trace`` is sum_j Ric(e_j, e_j) over the tangent frame and
    ``tau_ambient`` the ambient scalar curvature (half the Ricci trace).  A full
    curvature tensor can be attached for conformal-flatness checks.
    """

    ric_tangent_trace: float
    tau_ambient: float
    curvature: CurvatureTensor | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "ric_tangent_trace", float(self.ric_tangent_trace))
        object.__setattr__(self, "tau_ambient", float(self.tau_ambient))

    @classmethod
    def from_tensor(cls, R: CurvatureTensor, n: int) -> "Explicit":
        """Read the scalars off a full tensor whose first ``n`` frame vectors are tangent."""
        ric = ricci_from_tensor(R)
        return cls(float(np.trace(ric.components[:n, :n])), scalar_curvature(ric), R)

    @property
    def label(self) -> str:
        return f"explicit:{self.ric_tangent_trace!r},{self.tau_ambient!r}"


AmbientModel = Union[SpaceForm, QuasiConstant, GRW, Explicit]


def _check_dims(n: int, m: int) -> None:
    if n < 2:
        raise DimensionError(f"tangent dimension must be >= 2, got {n}")
    if m <= n:
        raise DimensionError(f"ambient dimension m={m} must exceed n={n}")


def _check_tangential_length(vec: tuple[float, ...], n: int, what: str) -> None:
    if vec and len(vec) != n:
        raise DimensionError(f"{what} has {len(vec)} tangent components, expected n={n}")


def ric_tangent_trace(model: AmbientModel, n: int, m: int) -> float:
    """sum_{j<=n} Ric(e_j, e_j) over an orthonormal tangent frame."""
    _check_dims(n, m)
    if isinstance(model, SpaceForm):
        return n * ((m - 1) * model.c)
    if isinstance(model, GRW):
        _check_tangential_length(model.t_tangential, n, "GRW d/dt")
        model = model.as_quasi_constant()
    if isinstance(model, QuasiConstant):
        _check_tangential_length(model.v_tangential, n, "QuasiConstant V")
        return n * ((m - 1) * model.p + model.q) + (m - 2) * model.q * model.tangent_norm_sq
    if isinstance(model, Explicit):
        return model.ric_tangent_trace
    raise TypeError(f"unknown ambient model {model!r}")


def ambient_scalar_curvature(model: AmbientModel, m: int) -> float:
    if isinstance(model, SpaceForm):
        return 0.5 * (m * ((m - 1) * model.c))
    if isinstance(model, GRW):
        model = model.as_quasi_constant()
    if isinstance(model, QuasiConstant):
        return 0.5 * (m * ((m - 1) * model.p + model.q) + (m - 2) * model.q)
    if isinstance(model, Explicit):
        return model.tau_ambient
    raise TypeError(f"unknown ambient model {model!r}")


def conformal_correction(ric_trace: float, tau: float, n: int, m: int) -> float:
    """2/(n(m-2)) sum_j Ric(e_j,e_j) - 2 tau/((m-1)(m-2)).

    Upper bound contribution of a conformally flat ambient space.
    """
    if m < 4:
        raise DimensionError(f"conformally flat correction needs m >= 4, got {m}")
    return 2.0 * ric_trace / (n * (m - 2)) - 2.0 * tau / ((m - 1) * (m - 2))


def ambient_correction(model: AmbientModel, n: int, m: int) -> float:
    """Scalar added to |H|^2 on the right-hand side of the Wintgen inequality.

    Closed forms for the named models; the general Ricci/scalar expression for
    :class:`Explicit`.
    """
    _check_dims(n, m)
    if isinstance(model, SpaceForm):
        return model.c
    if isinstance(model, GRW):
        _check_tangential_length(model.t_tangential, n, "GRW d/dt")
        model = model.as_quasi_constant()
    if isinstance(model, QuasiConstant):
        _check_tangential_length(model.v_tangential, n, "QuasiConstant V")
        return model.p + 2.0 * model.q / n * model.tangent_norm_sq
    if isinstance(model, Explicit):
        return conformal_correction(model.ric_tangent_trace, model.tau_ambient, n, m)
    raise TypeError(f"unknown ambient model {model!r}")


def _adapted_vector(tangential: tuple[float, ...], normal_norm_sq: float, n: int, m: int) -> np.ndarray:
    v = np.zeros(m)
    if tangential:
        v[:n] = tangential
    v[n] = math.sqrt(max(normal_norm_sq, 0.0))
    return v / np.linalg.norm(v)


def ambient_curvature_tensor(model: AmbientModel, n: int, m: int) -> CurvatureTensor:
    """Full ambient curvature tensor in the adapted frame (tangent first)."""
    _check_dims(n, m)
    if isinstance(model, SpaceForm):
        return constant_curvature_tensor(model.c, m)
    if isinstance(model, QuasiConstant):
        _check_tangential_length(model.v_tangential, n, "QuasiConstant V")
        psi = _adapted_vector(model.v_tangential, model.v_normal_norm_sq, n, m)
        return quasi_constant_curvature_tensor(model.p, model.q, psi)
    if isinstance(model, GRW):
        _check_tangential_length(model.t_tangential, n, "GRW d/dt")
        t = _adapted_vector(model.t_tangential, model.t_normal_norm_sq, n, m)
        return grw_curvature_tensor(model.c, model.f, model.f_prime, model.f_second, t)
    if isinstance(model, Explicit):
        if model.curvature is None:
            raise InvariantError("explicit model carries no full curvature tensor")
        if model.curvature.dim != m:
            raise DimensionError(f"attached tensor has dim {model.curvature.dim}, expected {m}")
        return model.curvature
    raise TypeError(f"unknown ambient model {model!r}")


def scale_model(model: AmbientModel, factor: float) -> AmbientModel:
    """Multiply every curvature scale of ``model`` by ``factor``."""
    if isinstance(model, SpaceForm):
        return SpaceForm(factor * model.c)
    if isinstance(model, QuasiConstant):
        return QuasiConstant(factor * model.p, factor * model.q, model.v_tangential, model.v_normal_norm_sq)
    if isinstance(model, GRW):
        # curvatures scale as 1/length^2: keep f, scale c, f'^2 and f f''
        s = math.sqrt(factor)
        return GRW(factor * model.c, model.f, s * model.f_prime, factor * model.f_second,
                   model.t_tangential, model.t_normal_norm_sq)
    if isinstance(model, Explicit):
        return Explicit(factor * model.ric_tangent_trace, factor * model.tau_ambient)
    raise TypeError(f"unknown ambient model {model!r}")
