"""
Constants used throughout the kackit library.
"""

# Default values
DEFAULT_TOLERANCE = 1e-9
DEFAULT_SEED = 0
DEFAULT_EXECUTOR_THREADS = 4

# Environment
TOLERANCE_ENV_VAR = "KACKIT_TOL"

# Limits
WEDDERBURN_MAX_ATTEMPTS = 5
HOMOMORPHISM_PROBES = 3

# Thread pool settings
MIN_EXECUTOR_THREADS = 1
MAX_EXECUTOR_THREADS = 128

# Command line exit codes
EXIT_OK = 0
EXIT_FALSIFIED = 1
EXIT_INPUT_ERROR = 2
