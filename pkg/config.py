"""
Configuration file for the approximate-group toolkit
Desk-scale caps, tolerances and default paths.

Library code reads these values at call time, so the CLI (or a test) can
override any of them for a single run by assigning to this module.
"""

# Element caps
# Largest set, power set or BFS ball that is ever materialized
CAP_ELEMENTS = 250_000

# Largest |A|·|B| pair count a single product is allowed to enumerate
CAP_PRODUCT_PAIRS = 20_000_000

# Largest (element, budget-vector) state count in the progression DP
CAP_STATES = 2_000_000

# Loop bound for element_order in groups without a known order
CAP_ORDER_SEARCH = 100_000

# Group kinds (desk scale)
MAX_PERMUTATION_DEGREE = 12
MIN_MATRIX_MODULUS = 2
MAX_MATRIX_DIMENSION = 4
MAX_PSL2_PRIME = 101
MAX_FREE_RANK = 4
MAX_FREE_ABELIAN_RANK = 6
MAX_FP_RING_PRIME = 101

# Approximate constants
EXACT_COVER_MAX_PRODUCT = 4096
EXACT_COVER_MAX_CANDIDATES = 64

# Structure detection
SUBGROUP_ENUMERATION_MAX_ORDER = 512
HAMIDOUNE_SMALL_SET_SIZE = 3
DENSE_GENERATION_S5_SAMPLES = 2
STRONG_APPROX_POWER_STEPS = 64

# Progressions
MAX_PROGRESSION_RANK = 4
NILPOTENCY_CLASS_CAP = 6
NILPROG_MIN_SIDE = 4  # side lengths below this are flagged as small
FREE_SWEEP_REDRAWS = 20

# Cayley graphs
DENSE_SPECTRAL_MAX = 4096
ITERATIVE_SPECTRAL_MAX = 100_000
SPECTRAL_TOLERANCE = 1e-9
SPECTRAL_MAX_ITERATIONS = 100_000
LINF_MAX_RANK = 3
LINF_SEARCH_CAP = 64

# Metric limits
DENSE_METRIC_MAX = 4096
TRIANGLE_EXHAUSTIVE_MAX = 128
TRIANGLE_SAMPLES = 100_000
HISTOGRAM_BINS = 64
TORUS_REFINEMENT = 2
NORM_TOLERANCE = 1e-6

# Runs
DEFAULT_SEED = 0
OUTPUT_FORMAT = "json"
THREADS = 1
FIXTURES_PATH = "fixtures/regression.json"
FIXTURES_VERSION = 1
ARCHIVE_DB = "toolkit_runs.db"
