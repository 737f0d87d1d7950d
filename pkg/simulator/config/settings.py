"""
QuickSync simulator settings.

Every process-level knob is read from the environment here, once.
A `.env` file next to manage.py is picked up automatically.

For the run-level configuration format (SimConfig files) see
core/simnet/config.py.
"""

import os
from pathlib import Path
from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Load environment variables
load_dotenv()

ARTIFACT_VERSION = '1.0.0'

# WHAT: Default directory for every command's output files
OUTPUT_DIR = os.getenv('QUICKSYNC_OUTPUT_DIR', 'output')

# WHAT: Global simulation seed (beacon root secret, key material)
SIMULATION_SEED = int(os.getenv('QUICKSYNC_SEED', '0'))


# Protocol defaults
# WHAT: Scale factor s, slot length t_sl (= propagation bound tau), etc.

SCALE_FACTOR = float(os.getenv('QUICKSYNC_SCALE_FACTOR', '8'))

SLOT_LENGTH_SECONDS = float(os.getenv('QUICKSYNC_SLOT_LENGTH_SECONDS', '40'))

EPOCH_LENGTH_SLOTS = int(os.getenv('QUICKSYNC_EPOCH_LENGTH_SLOTS', '100'))

KAPPA = int(os.getenv('QUICKSYNC_KAPPA', '256'))

CONFIRM_DEPTH = int(os.getenv('QUICKSYNC_CONFIRM_DEPTH', '15'))

LIFETIME_SLOTS = int(os.getenv('QUICKSYNC_LIFETIME_SLOTS', '10000'))

TPB = int(os.getenv('QUICKSYNC_TPB', '2000'))

# WHAT: Below this scale factor the power race gets noticeably worse
SCALE_FACTOR_WARNING_THRESHOLD = 4.0


# Monte Carlo
# WHAT: Trials run in chunks; each chunk has its own seed, so the worker
# count does not change results

MC_WORKERS = int(os.getenv('QUICKSYNC_MC_WORKERS', '1'))

MC_CHUNK = int(os.getenv('QUICKSYNC_MC_CHUNK', '5000'))

MC_DEFAULT_TRIALS = int(os.getenv('QUICKSYNC_MC_TRIALS', '100000'))

# Finality table rows beyond this adversary stake need far more trials
TABLE_MAX_DESK_RA = 0.30


# Logging

LOG_LEVEL = os.getenv('QUICKSYNC_LOG_LEVEL', 'INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '%(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
            'stream': 'ext://sys.stderr',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': 'WARNING',
    },
    'loggers': {
        'core': {
            'handlers': ['console'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
    },
}
