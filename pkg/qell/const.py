"""General qell constants."""

DOMAIN = "qell"
DEFAULT_NAME = "qell"

SUPPORTED_LEVELS = (3, 5)

# Generator used as v1 in every chromatic reduction.
V1 = "a1"

CONF_COMMAND = "command"
CONF_ELEMENT = "element"
CONF_ELEMENTS_FILE = "elements_file"
CONF_ELL = "ell"
CONF_FAMILY = "family"
CONF_FORMAT = "format"
CONF_MAP = "map"
CONF_MAX_I = "max_i"
CONF_MAX_J = "max_j"
CONF_MAX_K = "max_k"
CONF_MAX_M = "max_m"
CONF_MAX_N = "max_n"
CONF_MAX_S = "max_s"
CONF_MAX_WEIGHT = "max_weight"
CONF_OUTPUT = "output"
CONF_SAMPLES = "samples"
CONF_SEED = "seed"
CONF_TATE_B = "b"
CONF_DIFF = "diff"
CONF_COMPARE = "compare"
CONF_VERBOSE = "verbose"
CONF_VERIFY = "verify"
CONF_CASE = "case"

# Default values
DEFAULT_ELL = 3
DEFAULT_E2_ELL = 5
DEFAULT_FAMILIES = ("sphere",)
DEFAULT_FORMAT = "text"
DEFAULT_MAX_I = 64
DEFAULT_MAX_J = 64
DEFAULT_MAX_K = 6
DEFAULT_MAX_M = 3
DEFAULT_MAX_N = 3
DEFAULT_MAX_S = 4
DEFAULT_MAX_WEIGHT = 12
DEFAULT_PRIME = 10007
DEFAULT_RELATION_SAMPLES = 500
DEFAULT_SAMPLES = 100
DEFAULT_SEED = 5
DEFAULT_TATE_B = "2"

# Above this many terms a rational function is reduced by gcd cancellation.
RATIONAL_FUNCTION_SIZE_CAP = 64

LOG_FORMAT = (
    "%(asctime)s.%(msecs)03d %(levelname)-8s %(threadName)s "
    "%(name)s:%(filename)s:%(lineno)s %(message)s"
)
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"
