"""Centralized configuration from environment variables."""

import os

# Output (the override ranks above a scenario's own output_dir)
OUTPUT_DIR = os.getenv("COAGFRAG_OUTPUT_DIR")
DEFAULT_OUTPUT_DIR = "./runs"

# Kernel storage caps (dense matrices are O(N_max^2), beta tables O(N^3))
N_MAX_CAP = int(os.getenv("COAGFRAG_N_MAX_CAP", "4096"))
BETA3_TABLE_N_MAX = int(os.getenv("COAGFRAG_BETA3_TABLE_N_MAX", "256"))

# CustomTable loading
SYMMETRY_TOL = float(os.getenv("COAGFRAG_SYMMETRY_TOL", "1e-12"))

# Reaction sub-stepping
MAX_HALVINGS = int(os.getenv("COAGFRAG_MAX_HALVINGS", "10"))
POSITIVITY_TOL = float(os.getenv("COAGFRAG_POSITIVITY_TOL", "1e-14"))

# Scans
N_JOBS = int(os.getenv("COAGFRAG_N_JOBS", "1"))

# Logging
LOG_LEVEL = os.getenv("COAGFRAG_LOG_LEVEL", "INFO")
