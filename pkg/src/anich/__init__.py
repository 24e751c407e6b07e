"""Energy-stable WSBDF2/SAV simulator for the anisotropic Cahn-Hilliard equation."""

from .errors import (
    AnichError,
    ConfigError,
    DenominatorDegenerate,
    GridMismatchError,
    NewtonDiverged,
    NonPositiveRadicand,
    NumericalBlowup,
    RatioViolation,
)
from .spectral import (
    Field,
    GridSpec,
    SpectralField,
    apply_symbol,
    build_grid,
    dealias_23,
    diff,
    divergence,
    from_spectral,
    gradient,
    inner,
    integrate,
    inv_grad_norm_sq,
    l2_norm,
    laplacian,
    linf_norm,
    solve_diagonal,
    to_spectral,
)
from .model import (
    ModelParams,
    SavParams,
    anisotropy,
    double_well,
    sav_linear_uniform,
    sav_linear_variable,
    sav_willmore_uniform,
    sav_willmore_variable,
    total_energy,
)
from .uniform import (
    GMatrix,
    UniformSchemeParams,
    UniformState,
    bootstrap_bdf1,
    discrete_energy_uniform,
    g_norm_sq,
    two_level_identity_terms,
    simulate_uniform,
    step_UL,
    step_UW,
    wsbdf2_apply,
)
from .variable import (
    StepSequence,
    VariableSchemeParams,
    VariableState,
    bootstrap_variable,
    discrete_energy_variable,
    gamma_star,
    ratio_bound_terms,
    make_steps,
    ratio_bound_function,
    simulate_variable,
    step_VL,
    step_VW,
    vbdf2_apply,
)
from .diagnostics import (
    ConvergenceReport,
    DiagRecord,
    chemical_potential,
    mms_exact,
    mms_source,
    observe,
    run_convergence,
    steady_state_detect,
)

__version__ = "0.1.0"
