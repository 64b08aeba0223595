TOOL_NAME = "laminate-nr"
TOOL_VERSION = "0.3.0"

# Unit-cell algebra
MAX_DEGREE = 8
DEFAULT_SAMPLE_PIECES = 4096
BREAKPOINT_MERGE_TOL = 1e-14

# Cell problems and identity checks
SOLVABILITY_TOL = 1e-10
IDENTITY_RTOL = 1e-8
IDENTITY_ATOL = 1e-12
BETA_RTOL = 1e-10

# Floquet-Bloch root finding
NEWTON_STEP_RTOL = 1e-12
NEWTON_MAX_ITER = 50
NEWTON_SLOW_ITER = 10
ROOT_RESIDUAL_TOL = 1e-10
CONTINUATION_JUMP_FACTOR = 5.0
MAX_KAPPA_HALVINGS = 8
DEFAULT_KAPPA_POINTS = 400
GAUSS_LEGENDRE_NODES = 256
MAX_QUADRISECTION_DEPTH = 12

# Time-domain solver
MIN_POINTS = 8
POINTS_PER_NU = 8
BOX_NU_MULTIPLE = 40.0
COURANT_TARGET = 0.5
MASS_RTOL = 1e-10
ENERGY_AUDIT_RTOL = 0.01
SIGMA_ONLY_RUN_DIFFUSION_FRACTION = 0.25
SYMMETRIC_THIRD_MOMENT_BOUND = 0.02

# Validation oracles
QUADRATURE_LEVELS = 14
TAYLOR_MIN_ORDER = 2.7
PHI_FIT_RTOL = 1e-9
PHI_MIN_SAMPLES = 9
ORDER_WINDOW_KAPPA_H = (0.1, 1.0)
ORDER_WINDOW_POINTS = 31
DEFAULT_AUDIT_SEEDS = 100

# Worked bilayers (SI units)
EXAMPLE_BOTH = {
    "sigma_a": 10.0,
    "sigma_b": 190.0,
    "gamma_a": 2e6,
    "gamma_b": 1.4e6,
    "phi": 0.3,
    "h": 0.1,
    "v_m": 5e-3,
}
EXAMPLE_SIGMA_ONLY = {
    "sigma_a": 500.0,
    "sigma_b": 1e5,
    "gamma_a": 2e6,
    "gamma_b": 2e6,
    "phi": 0.2,
    "h": 0.1,
    "v_m": 5e-2,
}
EXAMPLE_MODEL2 = {
    "sigma_a": 190.0,
    "sigma_b": 190.0,
    "rho_a": 2e6,
    "rho_b": 1.4e6,
    "c": 1000.0,
    "phi": 0.2,
    "h": 0.05,
    "v_m": 5e-3,
}
FIELD_LEADING_X0 = 8.0
FIELD_LEADING_NU = 1.0
FIELD_ORDER2_X0 = 3.0
FIELD_ORDER2_NUS = (1.0, 0.1, 0.05)
FIELD_LEADING_T_END = 2000.0
FIELD_SNAPSHOTS = 5
RECIPE_KAPPA_POINTS = 200
BRANCH_RECIPE_KAPPA_POINTS = 40
BRANCH_RECIPE_COUNT = 3

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_AUDIT = 2

LOG_LEVEL_ENV = "LAMINATE_NR_LOG_LEVEL"
RUN_LOG_NAME = "runs.jsonl"
