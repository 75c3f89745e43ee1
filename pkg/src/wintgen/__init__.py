"""Curvature invariants and generalized Wintgen inequalities for submanifolds
of conformally flat spaces."""

from .ambient import GRW, AmbientModel, Explicit, QuasiConstant, SpaceForm, ambient_correction
from .curvature import (
    CurvatureTensor,
    RicciTensor,
    grw_associated_functions,
    grw_curvature_tensor,
    is_conformally_flat,
    quasi_constant_curvature_tensor,
    ricci_and_scalar_of_quasi_constant,
    weyl_tensor,
)
from .equality import EqualityCertificate, canonical_equality_h, detect_equality
from .extremal import SearchConfig, ddvv_slack, fuzz, maximize_gap
from .inequalities import GapResult, InequalityId, evaluate, gap, grw_gap
from .invariants import (
    InvariantReport,
    SecondFundamentalForm,
    full_report,
    k_n_from_commutators,
    k_n_from_components,
    scalar_curvature_gauss,
    surface_invariants,
    tau_perp_via_ricci_equation,
)

__version__ = "0.1.0"
