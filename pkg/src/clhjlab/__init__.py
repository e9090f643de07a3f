"""clhjlab: a 1D laboratory for degenerate convection-diffusion laws and
their quasilinear Hamilton-Jacobi counterparts.

The package couples an entropy-stable finite-volume solver for

    u_t + f(x, u)_x = (alpha(x) u_x + beta(u)_x)_x + eps u_xx

with a monotone finite-difference solver for

    v_t + f(x, v_x) = (alpha(x) + beta'(v_x)) v_xx + eps v_xx

through the exact discrete primitive/derivative transforms, and provides
experiment drivers that probe the equivalence of the two flows, entropy and
flux-variable inequalities, vanishing-viscosity limits, and long-time
profiles on the torus.
"""

from .catalog import builtin_catalog, catalog_names, documented_assumptions
from .cl import (
    EO,
    LF,
    SchemeConfig,
    ViscosityLadder,
    diffusion_face_flux,
    eo_flux,
    solve_cl,
    stable_dt,
    step_cl,
    viscosity_ladder,
)
from .errors import (
    AssumptionError,
    AuditError,
    CatalogError,
    ClhjError,
    EvaluationError,
    GridMismatchError,
    ScenarioError,
    StabilityError,
    StructuralError,
)
from .experiments import (
    DEGRADED,
    EntropyAudit,
    EquivalenceReport,
    FAIL,
    FluxBoundAudit,
    LargeTimeReport,
    LipschitzReport,
    PASS,
    ViscosityConvergenceReport,
    audit_entropy_inequality,
    audit_flux_bound,
    audit_lipschitz,
    check_equivalence,
    cl_longtime,
    default_k_levels,
    flux_variable,
    hj_longtime,
    nearest_flux_root_projection,
    theil_sen_slope,
    vanishing_viscosity_convergence,
)
from .grids import CellField, Grid, NodalField
from .hj import (
    HJSchemeConfig,
    hopf_lax_oracle,
    numerical_hamiltonian,
    solve_hj,
    stable_dt_hj,
    step_hj,
)
from .problems import (
    AffineInterval,
    AssumptionReport,
    AssumptionVerdict,
    DiffusionModel,
    Domain,
    FluxModel,
    ProblemSpec,
    detect_affine_interval,
    validate_assumptions,
)
from .transforms import (
    ProfileAlignment,
    align_profile,
    bv_norm,
    bv_seminorm,
    derivative,
    l1_distance,
    l1_norm,
    linf_distance,
    primitive,
    shift_periodic,
    value_function,
)

__version__ = "0.1.0"
