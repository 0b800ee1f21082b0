# Shape parameters closer to zero than this use the exponential/Gumbel branch
XI_ZERO_TOL = 1e-8

# Weibull index of the HOT radial law treated as the Pareto limit
BETA_ZERO_TOL = 1e-8

# Lower clamp for probabilities fed to quantile functions
PROB_EPS = 1e-300

# Bounds of the HW mixing exponent during optimization
HW_DELTA_MIN = 0.001
HW_DELTA_MAX = 0.999

# Gauss-Legendre order of the exact bivariate normal CDF
BVN_QUAD_ORDER = 40

# Per-replicate cap on Poisson points in max-stable simulation
MAX_POISSON_POINTS = 5_000

# Extremogram permutation bound
EXTREMOGRAM_PERMUTATIONS = 200
EXTREMOGRAM_LEVEL = 0.95

# Default quantiles reported by the stationary bootstrap
BOOTSTRAP_QUANTILES = (0.05, 0.95)
