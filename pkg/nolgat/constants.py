"""
Constants used across NOL-GAT.
"""

from __future__ import annotations

import os
from pathlib import Path

# Default runtime home
DEFAULT_HOME = Path.home() / ".nolgat"
HOME: Path
DATA_DIR: Path
LOG_DIR: Path
SYSTEM_LOG_FILE: Path
RUN_LOG_TEMPLATE: Path
VERIFICATION_LOG_FILE: Path

# Experimental protocol
DEFAULT_KNN_SWEEP = [3, 4, 5, 6, 7, 8]
LABEL_FRACTIONS = [0.10, 0.20, 0.30]
DEFAULT_EPOCHS = 200
DEFAULT_REPETITIONS = 10
DEFAULT_FEATURE_DIM = 500

# Model
LEAKY_SLOPE = 0.2
DEFAULT_HEADS = 4
DEFAULT_HIDDEN = [128, 64]
DEFAULT_MLP_HIDDEN = [32]
DEFAULT_MAX_ORDER_CAP = 8
PROB_CLAMP = 1e-12

RELAXATION_MODES = ("straight-through", "dense-relaxed")
FEATURIZERS = ("precomputed", "hashed-tf")


def refresh_paths() -> None:
    """Refresh filesystem-derived constants from environment variables."""
    global HOME, DATA_DIR, LOG_DIR, SYSTEM_LOG_FILE, RUN_LOG_TEMPLATE, VERIFICATION_LOG_FILE

    root = Path(os.environ.get("NOLGAT_HOME", str(DEFAULT_HOME))).expanduser()
    HOME = root
    DATA_DIR = root / "data"
    LOG_DIR = root / "logs"
    SYSTEM_LOG_FILE = LOG_DIR / "system.log"
    RUN_LOG_TEMPLATE = LOG_DIR / "run_{run_id}.log"
    VERIFICATION_LOG_FILE = LOG_DIR / "verification.log"


refresh_paths()
