"""Gap functionals of the generalized Wintgen inequalities.

Every inequality is read as ``lhs <= rhs`` and reported through its gap
``rhs - lhs``; a negative gap beyond round-off is a violation.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .ambient import (
    GRW,
    AmbientModel,
    QuasiConstant,
    SpaceForm,
    ambient_correction,
    ambient_scalar_curvature,
    conformal_correction,
    ric_tangent_trace,
)
from .errors import ConsistencyError, DimensionError, IncompatibleModelError, NotMinimalError
from .invariants import InvariantReport, SecondFundamentalForm, full_report, mean_curvature, surface_invariants

EXACT_TOL = 1e-8
IMMERSION_TOL = 1e-4
UNIT_TOL = 1e-10
GRW_CONSISTENCY_TOL = 1e-12


class InequalityId(str, Enum):
    PROP1_RHO_N = "prop1_rhoN"
    THM1_RHO_PERP = "thm1_rhoPerp"
    COR_MINIMAL_RHO_N = "cor_minimal_rhoN"
    COR_MINIMAL_RHO_PERP = "cor_minimal_rhoPerp"
    QUASI_COR1 = "quasi_cor1"
    QUASI_COR2 = "quasi_cor2"
    QUASI_TANGENT = "quasi_tangent"
    QUASI_NORMAL = "quasi_normal"
    GRW_TANGENT = "grw_tangent"
    GRW_NORMAL = "grw_normal"
    WINTGEN_SURFACE = "wintgen_surface"
    DDVV_SPACEFORM = "ddvv_spaceform"

    def __str__(self) -> str:
        return self.value


ALL_IDS = tuple(InequalityId)


@dataclass(frozen=True)
class GapResult:
    inequality_id: InequalityId
    lhs: float
    rhs: float
    gap: float
    equality: bool
    tol: float

    @classmethod
    def from_sides(cls, which, lhs: float, rhs: float, tol: float = EXACT_TOL) -> "GapResult":
        gap = rhs - lhs
        return cls(InequalityId(which), lhs, rhs, gap, abs(gap) <= tol, tol)

    @property
    def violated(self) -> bool:
        return self.gap < -self.tol

    def as_dict(self) -> dict:
        return {
            "id": self.inequality_id.value,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "gap": self.gap,
            "equality": self.equality,
            "tol": self.tol,
        }


_MINIMAL = {InequalityId.COR_MINIMAL_RHO_N, InequalityId.COR_MINIMAL_RHO_PERP}
_USES_RHO_N = {InequalityId.PROP1_RHO_N, InequalityId.COR_MINIMAL_RHO_N, InequalityId.QUASI_COR1}


def _check_model(which: InequalityId, model: AmbientModel, n: int) -> None:
    def need(kind, label):
        if not isinstance(model, kind):
            raise IncompatibleModelError(f"{which.value} requires a {label} ambient, got {type(model).__name__}")

    if which in (InequalityId.QUASI_COR1, InequalityId.QUASI_COR2):
        need(QuasiConstant, "quasi-constant")
    elif which is InequalityId.QUASI_TANGENT:
        need(QuasiConstant, "quasi-constant")
        if abs(model.tangent_norm_sq - 1.0) > UNIT_TOL:
            raise IncompatibleModelError("quasi_tangent requires V tangent to the submanifold")
    elif which is InequalityId.QUASI_NORMAL:
        need(QuasiConstant, "quasi-constant")
        if abs(model.v_normal_norm_sq - 1.0) > UNIT_TOL:
            raise IncompatibleModelError("quasi_normal requires V normal to the submanifold")
    elif which is InequalityId.GRW_TANGENT:
        need(GRW, "GRW")
        if abs(model.tangent_norm_sq - 1.0) > UNIT_TOL:
            raise IncompatibleModelError("grw_tangent requires d/dt tangent to the submanifold")
    elif which is InequalityId.GRW_NORMAL:
        need(GRW, "GRW")
        if abs(model.t_normal_norm_sq - 1.0) > UNIT_TOL:
            raise IncompatibleModelError("grw_normal requires d/dt normal to the submanifold")
    elif which in (InequalityId.WINTGEN_SURFACE, InequalityId.DDVV_SPACEFORM):
        need(SpaceForm, "space-form")


def _check_dims(which: InequalityId, n: int, m: int) -> None:
    if which is InequalityId.WINTGEN_SURFACE:
        if n != 2:
            raise DimensionError(f"wintgen_surface is the n = 2 inequality, got n = {n}")
        if m < 3:
            raise DimensionError(f"surface needs m >= 3, got {m}")
        return
    if which is InequalityId.DDVV_SPACEFORM:
        if n < 2:
            raise DimensionError(f"ddvv_spaceform needs n >= 2, got {n}")
    elif n < 3:
        raise DimensionError(f"{which.value} is stated for n >= 3, got n = {n}")
    if m < 4:
        raise DimensionError(f"{which.value} needs m >= 4, got m = {m}")


def _grw_correction_direct(g: GRW, n: int, tangent: bool) -> float:
    fiber = (g.c - g.f_prime**2) / g.f**2
    if tangent:
        return fiber * (1.0 - 2.0 / n) - 2.0 / n * g.f_second / g.f
    return fiber


def gap(
    h: SecondFundamentalForm,
    model: AmbientModel,
    m: int,
    which,
    tol: float = EXACT_TOL,
    report: InvariantReport | None = None,
) -> GapResult:
    """Evaluate one inequality on ``h`` in the given ambient model."""
    which = InequalityId(which)
    n = h.n
    if m != n + h.codim:
        raise DimensionError(f"m={m} inconsistent with n={n}, codim={h.codim}")
    _check_dims(which, n, m)
    _check_model(which, model, n)

    if which is InequalityId.WINTGEN_SURFACE:
        inv = surface_invariants(h, model.c)
        hn = mean_curvature(h).norm_sq
        return GapResult.from_sides(which, inv.gauss + inv.abs_normal, hn + model.c, tol)

    if report is None:
        report = full_report(h, model, m)
    rho_normal = report.rho_n if which in _USES_RHO_N else report.rho_perp
    lhs = report.rho + rho_normal

    if which in _MINIMAL:
        if report.h_norm_sq > tol:
            raise NotMinimalError(f"{which.value} needs |H|^2 <= {tol}, got {report.h_norm_sq!r}")
        mean_term = 0.0
    else:
        mean_term = report.h_norm_sq

    if which in (InequalityId.PROP1_RHO_N, InequalityId.THM1_RHO_PERP, *_MINIMAL):
        corr = conformal_correction(ric_tangent_trace(model, n, m), ambient_scalar_curvature(model, m), n, m)
    elif which is InequalityId.DDVV_SPACEFORM:
        corr = model.c
    elif which in (InequalityId.QUASI_COR1, InequalityId.QUASI_COR2):
        corr = model.p + 2.0 * model.q / n * model.tangent_norm_sq
    elif which is InequalityId.QUASI_TANGENT:
        corr = model.p + 2.0 * model.q / n
    elif which is InequalityId.QUASI_NORMAL:
        corr = model.p
    else:
        corr = _grw_correction_direct(model, n, which is InequalityId.GRW_TANGENT)
    return GapResult.from_sides(which, lhs, mean_term + corr, tol)


def grw_gap(
    h: SecondFundamentalForm,
    g: GRW,
    m: int,
    t_tangency: str,
    which: str = "rho_perp",
    tol: float = EXACT_TOL,
) -> GapResult:
    """GRW inequality with the right-hand side cross-checked against the quasi-constant route."""
    if which != "rho_perp":
        raise ValueError(f"only the rho_perp form is stated for GRW ambients, got {which!r}")
    g = g.with_tangency(t_tangency, h.n)
    ident = InequalityId.GRW_TANGENT if t_tangency == "tangent" else InequalityId.GRW_NORMAL
    result = gap(h, g, m, ident, tol)
    direct = _grw_correction_direct(g, h.n, t_tangency == "tangent")
    via_quasi = ambient_correction(g.as_quasi_constant(), h.n, m)
    if abs(direct - via_quasi) > GRW_CONSISTENCY_TOL * (1.0 + abs(direct)):
        raise ConsistencyError(
            f"GRW correction disagrees: direct {direct!r} vs quasi-constant {via_quasi!r}"
        )
    return result


def applicable_inequalities(model: AmbientModel, n: int, m: int, h: SecondFundamentalForm | None = None,
                            tol: float = EXACT_TOL) -> list[InequalityId]:
    """Inequality ids that apply to the given model and dimensions (and h, if minimal)."""
    out = []
    for which in ALL_IDS:
        try:
            _check_dims(which, n, m)
            _check_model(which, model, n)
        except (DimensionError, IncompatibleModelError):
            continue
        if which in _MINIMAL and (h is None or mean_curvature(h).norm_sq > tol):
            continue
        out.append(which)
    return out


def evaluate(h: SecondFundamentalForm, model: AmbientModel, m: int, ids=None,
             tol: float = EXACT_TOL) -> list[GapResult]:
    """Gaps for several inequalities sharing one invariant report."""
    if ids is None:
        ids = applicable_inequalities(model, h.n, m, h, tol)
    ids = [InequalityId(i) for i in ids]
    report = None
    if any(i is not InequalityId.WINTGEN_SURFACE for i in ids):
        report = full_report(h, model, m)
    return [gap(h, model, m, i, tol, report=report) for i in ids]


__all__ = [
    "ALL_IDS",
    "EXACT_TOL",
    "IMMERSION_TOL",
    "GapResult",
    "InequalityId",
    "applicable_inequalities",
    "evaluate",
    "gap",
    "grw_gap",
]
