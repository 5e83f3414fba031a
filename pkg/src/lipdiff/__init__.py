"""Numerical checks for inverse pairs with Lipschitz inverses."""

from .derived import (
    StepSchedule,
    delta_derived_set,
    derived_set_estimate,
    gateaux_assemble,
    one_sided_directional,
)
from .errors import (
    DomainViolation,
    HypothesisFailure,
    LipdiffError,
    NoConvergence,
    NotSpd,
)
from .karcher import (
    geometric_mean_two,
    karcher_mean,
    karcher_regularity_pipeline,
    karcher_residual,
    solve_for_Y,
)
from .linalg import SpdMatrix, spd_functions
from .maps import (
    EvaluableMap,
    MapPair,
    catalog_get,
    catalog_names,
    check_inverse_pair,
    evaluate,
    register_map,
)
from .regularity import fd_jacobian, frechet_residual, invertibility_report, lipschitz_estimate
from .theorems import (
    CertifyConfig,
    chain_rule_check,
    converse_ift_certify,
    density_probe,
    identity_derived_check,
)

__version__ = "0.1.0"
