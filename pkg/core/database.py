#!/usr/bin/env python3
"""
Run Records - JSON run database and per-run manifests
Every command writes a manifest (resolved config, dataset fingerprint, seed,
stage timings, flagged warnings) and registers a summary in the run database.
"""

import json
import logging
import uuid
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional

import config as app_config
from core.errors import ConfigError
from core.params import EmbeddingConfig, RankingConfig, SparsifyParams

logger = logging.getLogger(__name__)

MANIFEST_SCHEMA_VERSION = 1

_CONFIG_TYPES = {
    "ranking": RankingConfig,
    "embedding": EmbeddingConfig,
    "sparsify": SparsifyParams,
}


@dataclass
class RunManifest:
    """Everything needed to reproduce one command invocation."""

    command: str
    argv: List[str] = field(default_factory=list)
    config: Dict[str, Any] = field(default_factory=dict)
    dataset: Dict[str, Any] = field(default_factory=dict)
    seed: int = app_config.SEED
    serial: bool = True
    n_jobs: int = 1
    timings: Dict[str, float] = field(default_factory=dict)
    total_seconds: float = 0.0
    outputs: List[str] = field(default_factory=list)
    warnings: List[Dict[str, str]] = field(default_factory=list)
    exit_code: int = 0
    run_id: str = field(default_factory=lambda: uuid.uuid4().hex[:12])
    created_at: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds")
    )
    schema_version: int = MANIFEST_SCHEMA_VERSION

    def __post_init__(self) -> None:
        if any(value < 0 for value in self.timings.values()):
            raise ConfigError("stage timings cannot be negative")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunManifest":
        version = data.get("schema_version")
        if version != MANIFEST_SCHEMA_VERSION:
            raise ConfigError(
                f"Unsupported manifest schema version {version!r} "
                f"(expected {MANIFEST_SCHEMA_VERSION})"
            )
        known = set(cls.__dataclass_fields__)
        return cls(**{key: value for key, value in data.items() if key in known})

    def write(self, path) -> Path:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2, ensure_ascii=False)
        logger.debug("Manifest written to %s", target)
        return target

    @classmethod
    def load(cls, path) -> "RunManifest":
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_dict(json.load(f))

    def summary(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "created_at": self.created_at,
            "seed": self.seed,
            "fingerprint": self.dataset.get("fingerprint"),
            "outputs": list(self.outputs),
            "exit_code": self.exit_code,
            "total_seconds": self.total_seconds,
        }


def replay(manifest: RunManifest) -> Dict[str, Any]:
    """Rebuild the parameter objects and seed a manifest was run with."""
    resolved: Dict[str, Any] = {"seed": manifest.seed, "argv": list(manifest.argv)}
    for key, config_type in _CONFIG_TYPES.items():
        if key in manifest.config:
            resolved[key] = config_type.from_dict(manifest.config[key])
    return resolved


class RunDatabase:
    """JSON database of run summaries"""

    def __init__(self, db_path: Optional[str] = None):
        self.db_path = Path(db_path or app_config.RUN_DATABASE)
        self.db_path.parent.mkdir(parents=True, exist_ok=True)
        self.data = self._load()
        self._ensure_structure()

    def _load(self) -> Dict:
        """Load database from file"""
        if self.db_path.exists():
            try:
                with open(self.db_path, 'r', encoding='utf-8') as f:
                    return json.load(f)
            except Exception as e:
                logger.error(f"Error loading run database: {e}")
                return {}
        return {}

    def _save(self):
        """Save database to file"""
        try:
            with open(self.db_path, 'w', encoding='utf-8') as f:
                json.dump(self.data, f, indent=2, ensure_ascii=False)
            logger.debug("Run database saved")
        except Exception as e:
            logger.error(f"Error saving run database: {e}")

    def _ensure_structure(self):
        """Ensure database has required structure"""
        changed = False
        if 'runs' not in self.data:
            self.data['runs'] = {}  # run_id: manifest summary
            changed = True

        if changed:
            self._save()

    # ==============================================
    # RUNS
    # ==============================================

    def add_run(self, manifest: RunManifest, manifest_path: Optional[Path] = None):
        """Register a finished run"""
        entry = manifest.summary()
        if manifest_path is not None:
            entry['manifest'] = str(manifest_path)
        self.data['runs'][manifest.run_id] = entry
        self._save()

    def list_runs(self, command: Optional[str] = None) -> List[Dict]:
        """Runs in insertion order, optionally filtered by command"""
        runs = []
        for run_id, entry in self.data['runs'].items():
            if command is None or entry.get('command') == command:
                runs.append({'run_id': run_id, **entry})
        return runs


__all__ = ["MANIFEST_SCHEMA_VERSION", "RunManifest", "RunDatabase", "replay"]
