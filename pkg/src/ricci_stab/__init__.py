"""Linear stability of algebraic Ricci solitons on Lie groups, from structure constants."""

from .algebra import (
    AlgebraError,
    DerivationSet,
    MetricLieAlgebra,
    ParseError,
    StructureReport,
    ad_star,
    algebra_document,
    change_basis,
    derivation_defect,
    derivation_space,
    jacobi_defect,
    load_algebra,
    mean_curvature,
    read_algebra,
    semidirect_product,
    structure_report,
)
from .curvature import (
    CurvaturePackage,
    connection,
    curvature,
    ricci,
    ricci_moment_map_oracle,
    ricci_two_step_oracle,
    riemann,
    scalar,
    sectional,
    sectional_scan,
)
from .eigen import EigenError, symmetric_eig
from .soliton import (
    SolitonError,
    SolitonReport,
    StabilityCertificate,
    detect_soliton,
    einstein_certificate,
    extension_heuristic_certificate,
    normalize,
    q_certificate,
    sectional_certificate,
    stability_certificate,
    two_step_certificate,
    two_step_ricci_bounds,
)
from .symtensor import (
    SymBasis,
    SymOperator,
    evaluate_form,
    q_operator,
    ric_compose_operator,
    rho_operator,
    sym_spectrum,
    weitzenboeck_operator,
)

__version__ = "0.1.0"
