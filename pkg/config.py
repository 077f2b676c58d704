"""ReliefE configuration helpers and defaults."""

from __future__ import annotations

import os
from pathlib import Path


# ==============================================
# ENVIRONMENT LOADING
# ==============================================


def _load_env_file(path: Path) -> None:
    """Populate ``os.environ`` with values from a .env file if present."""

    if not path.is_file():
        return

    try:
        content = path.read_text(encoding="utf-8")
    except OSError:
        return

    for raw_line in content.splitlines():
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("export "):
            line = line[7:].lstrip()

        if "=" not in line:
            continue

        key, value = line.split("=", 1)
        key = key.strip()
        if not key or key.startswith("#"):
            continue

        value = value.strip()
        if value and value[0] in {'"', "'"} and value[-1] == value[0]:
            value = value[1:-1]
        elif "#" in value:
            value = value.split("#", 1)[0].rstrip()

        os.environ.setdefault(key, value)


_current_dir = Path(__file__).resolve().parent
_env_candidates = []

env_file_override = os.getenv("ENV_FILE")
if env_file_override:
    _env_candidates.append(Path(env_file_override).expanduser())

_env_candidates.extend(
    [
        Path(".env").resolve(),
        _current_dir / ".env",
    ]
)

_visited_env_paths = set()
for candidate in _env_candidates:
    try:
        resolved = candidate.resolve(strict=False)
    except OSError:
        continue

    if resolved in _visited_env_paths:
        continue

    _visited_env_paths.add(resolved)
    _load_env_file(resolved)


# ==============================================
# HELPER FUNCTIONS
# ==============================================

def _get_bool(name: str, default: bool) -> bool:
    """Return a boolean from environment variables."""
    value = os.getenv(name)
    if value is None:
        return default

    value = value.strip().lower()
    if value in {"1", "true", "yes", "on"}:
        return True
    if value in {"0", "false", "no", "off"}:
        return False
    return default


def _get_int(name: str, default: int) -> int:
    """Return an integer from environment variables, ignoring garbage."""
    value = os.getenv(name)
    if value is None or not value.strip():
        return default
    try:
        return int(value.strip())
    except ValueError:
        return default


def _get_float(name: str, default: float) -> float:
    """Return a float from environment variables, ignoring garbage."""
    value = os.getenv(name)
    if value is None or not value.strip():
        return default
    try:
        return float(value.strip())
    except ValueError:
        return default


# ==============================================
# NEIGHBORHOOD & RANKING DEFAULTS
# ==============================================

K_NEIGHBORS = _get_int("RELIEFE_K_NEIGHBORS", 15)
SEED = _get_int("RELIEFE_SEED", 0)


# ==============================================
# MANIFOLD EMBEDDING
# ==============================================

# Rows used to train the layout (representative cyclic sample)
SAMPLE_CAP = _get_int("RELIEFE_SAMPLE_CAP", 2048)
N_EPOCHS = _get_int("RELIEFE_N_EPOCHS", 200)
NEGATIVE_SAMPLES = _get_int("RELIEFE_NEGATIVE_SAMPLES", 5)
# Edges per vectorised SGD step
LAYOUT_BATCH_SIZE = _get_int("RELIEFE_LAYOUT_BATCH_SIZE", 1024)


# ==============================================
# SPARSIFICATION
# ==============================================

# Inputs denser than this are sparsified before ranking
DENSITY_THRESHOLD = _get_float("RELIEFE_DENSITY_THRESHOLD", 0.15)


# ==============================================
# INTRINSIC DIMENSION
# ==============================================

# Largest ratios dropped before the line fit
DIM_TAIL_FRACTION = _get_float("RELIEFE_DIM_TAIL_FRACTION", 0.10)
DIM_MULTIPLIER = _get_float("RELIEFE_DIM_MULTIPLIER", 1.0)


# ==============================================
# EVALUATION (PROBE LEARNER)
# ==============================================

PROBE_FOLDS = _get_int("RELIEFE_PROBE_FOLDS", 3)
PROBE_MAX_EPOCHS = _get_int("RELIEFE_PROBE_MAX_EPOCHS", 500)
PROBE_TOLERANCE = _get_float("RELIEFE_PROBE_TOLERANCE", 1e-6)


# ==============================================
# PARALLELISM
# ==============================================

# 0 means "all available cores"
THREADS = _get_int("RELIEFE_THREADS", 0)
SERIAL = _get_bool("RELIEFE_SERIAL", False)


# ==============================================
# LOGGING & RUN RECORDS
# ==============================================

LOG_DIR = os.getenv("RELIEFE_LOG_DIR", "logs")
LOG_LEVEL = os.getenv("RELIEFE_LOG_LEVEL", "INFO").upper()
RUN_DATABASE = os.getenv("RELIEFE_RUN_DATABASE", "data/runs.json")
MANIFEST_DIR = os.getenv("RELIEFE_MANIFEST_DIR", "manifests")


# ==============================================
# PLUGINS
# ==============================================

# Comma-separated allow-list; unset means every discovered subcommand plugin is enabled
ENABLED_PLUGINS = [
    name.strip()
    for name in os.getenv("RELIEFE_ENABLED_PLUGINS", "").split(",")
    if name.strip()
] or None
DISABLED_PLUGINS = [
    name.strip()
    for name in os.getenv("RELIEFE_DISABLED_PLUGINS", "").split(",")
    if name.strip()
]


# ==============================================
# VALIDATION
# ==============================================

def validate_config() -> bool:
    """Validate configuration before running a command."""
    errors = []

    if K_NEIGHBORS < 1:
        errors.append("RELIEFE_K_NEIGHBORS must be at least 1")

    if SAMPLE_CAP < 2:
        errors.append("RELIEFE_SAMPLE_CAP must be at least 2")

    if not 0.0 <= DENSITY_THRESHOLD <= 1.0:
        errors.append("RELIEFE_DENSITY_THRESHOLD must lie in [0, 1]")

    if not 0.0 <= DIM_TAIL_FRACTION < 1.0:
        errors.append("RELIEFE_DIM_TAIL_FRACTION must lie in [0, 1)")

    if DIM_MULTIPLIER <= 0:
        errors.append("RELIEFE_DIM_MULTIPLIER must be positive")

    if PROBE_FOLDS < 2:
        errors.append("RELIEFE_PROBE_FOLDS must be at least 2")

    if THREADS < 0:
        errors.append("RELIEFE_THREADS cannot be negative")

    if errors:
        print("\nCONFIGURATION ERRORS:\n")
        for error in errors:
            print(f"  - {error}")
        print("\nEdit environment variables or config_local.py to fix the configuration.\n")
        return False

    return True


# ==============================================
# LOCAL CONFIGURATION OVERRIDE
# ==============================================

# Import local configuration if exists (gitignored)
try:
    from config_local import *  # type: ignore  # noqa: F401,F403
except ImportError:
    pass  # config_local.py not found, use defaults
