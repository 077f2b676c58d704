#!/usr/bin/env python3
"""
Local Configuration Override
Copy this file to config_local.py and adjust the values for your machine

config_local.py is gitignored, so experiment-specific settings stay local.
"""

# ==============================================
# PARALLELISM
# ==============================================

# Worker threads for ranking iterations and graph construction (0 = all cores)
THREADS = 0

# Force the bit-reproducible single-threaded contract
SERIAL = False

# ==============================================
# EMBEDDING
# ==============================================

# Rows used to train the manifold layout
SAMPLE_CAP = 2048

# ==============================================
# LOGGING
# ==============================================

LOG_DIR = "logs"
LOG_LEVEL = "INFO"
