import os

# Root Paths
PATH_DATA = "data"
LOGS_DATA = "logs"
RESULTS_DATA = "results"

RESULTS_PATH = os.path.join(PATH_DATA, RESULTS_DATA)
RESULTS_DB_PATH = os.path.join(RESULTS_PATH, "experiments.sqlite")

# Seeds and Streams
DEFAULT_SEED = 20240611
# arrivals generated per refill of a site stream; changing it changes every field
STREAM_CHUNK = 256
SITE_STREAM_KEY = 0
FAST_ENGINE_KEY = 1
AUDIT_STREAM_KEY = 2
# draws buffered by the fast engine per refill
FAST_DRAW_BUFFER = 4096

# Model Parameter Keys (config files)
PARAM_KEYS = ("dim", "gammas", "beta", "rate_at_d")

# Experiment Keys (config files), on top of PARAM_KEYS
EXPERIMENT_KEYS = (
    "kind",
    "beta_grid",
    "L",
    "sides",
    "K",
    "height",
    "boundary",
    "variant",
    "trials",
    "seed",
    "kappa",
    "horizon",
    "engine",
    "stop",
    "radius",
    "ladder",
    "threshold",
    "workers",
)

EXPERIMENT_KINDS = (
    "relaxation",
    "cluster-bound",
    "crossing",
    "growth-speed",
    "domination",
    "nucleation-law",
    "coupling-audit",
)

ENGINES = ("graphical", "fast")

# observable fitted by default per experiment kind
PRIMARY_OBSERVABLES = {
    "relaxation": "relaxation_time",
    "nucleation-law": "nucleation_time",
    "growth-speed": "time_to_diameter_1",
}

# Result Columns (fixed order for CSV output)
ROW_COLUMNS = ["beta", "trial", "seed", "observable", "value", "censored"]
SUMMARY_COLUMNS = [
    "beta",
    "observable",
    "mean",
    "median",
    "count",
    "censored",
    "log_median_over_beta",
]

# Experiment Defaults
DEFAULT_TRIALS = 20
DEFAULT_WORKERS = 1
DEFAULT_KAPPA = 1.0
MIN_FIT_POINTS = 3
