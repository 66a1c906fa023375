"""Almost commuting real orthogonal and symplectic unitary matrices.

Bott index computations, seeded structured ensembles, and constructive
solvers producing nearby commuting pairs and nearby normal matrices.
"""

__version__ = "0.1.0"

from .structures import (  # noqa: E402
    BranchCutError,
    DimensionError,
    RankError,
    StructuredMatrix,
    StructureError,
    StructureKind,
    commutator_norm,
    dual,
    principal_log,
    project_to_orthogonal,
    project_to_symplectic,
    validate,
)
from .indices import (  # noqa: E402
    BottReport,
    bott_projection,
    bott_report,
    bott_trace_log,
    bott_winding,
    k_class,
    spectral_pairing_check,
)
from .ensembles import EnsembleSpec, almost_normal, commuting_pair, perturb, voiculescu_pair  # noqa: E402
from .solvers import (  # noqa: E402
    ApproximationResult,
    SolverParams,
    Status,
    cluster_angles,
    commuting_approximation,
    nearest_normal,
)

__all__ = [
    "ApproximationResult", "BottReport", "BranchCutError", "DimensionError", "EnsembleSpec",
    "RankError", "SolverParams", "Status", "StructureError", "StructureKind",
    "StructuredMatrix", "almost_normal", "bott_projection", "bott_report", "bott_trace_log",
    "bott_winding", "cluster_angles", "commutator_norm", "commuting_approximation",
    "commuting_pair", "dual", "k_class", "nearest_normal", "perturb", "principal_log",
    "project_to_orthogonal", "project_to_symplectic", "spectral_pairing_check", "validate",
    "voiculescu_pair",
]
