"""
Parameter dataclasses shared by every pipeline stage.

Defaults come from :mod:`config` so that environment variables and
``config_local.py`` overrides reach library calls as well as the CLI.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields, replace
from enum import Enum
from typing import Any, Dict, Optional, Union

import config
from core.errors import ConfigError

AUTO = "auto"


class DistanceMetric(str, Enum):
    """Distance used between feature rows or embedded rows."""

    EUCLIDEAN = "euclidean"
    COSINE = "cosine"


class MlcDistance(str, Enum):
    """Distance between two rows of the multi-label target space."""

    F1 = "f1"
    ACCURACY = "accuracy"
    SUBSET = "subset"
    HAMMING = "hamming"
    COSINE_EMBEDDED = "cosine_embedded"
    HYPERBOLIC_EMBEDDED = "hyperbolic_embedded"

    @property
    def embedded(self) -> bool:
        return self in (MlcDistance.COSINE_EMBEDDED, MlcDistance.HYPERBOLIC_EMBEDDED)

    @classmethod
    def parse(cls, name: Union[str, "MlcDistance"]) -> "MlcDistance":
        """Accept the enum value or the short CLI names ``cosine`` / ``hyperbolic``."""
        if isinstance(name, cls):
            return name
        normalized = str(name).strip().lower()
        aliases = {"cosine": cls.COSINE_EMBEDDED, "hyperbolic": cls.HYPERBOLIC_EMBEDDED}
        if normalized in aliases:
            return aliases[normalized]
        try:
            return cls(normalized)
        except ValueError as exc:
            raise ConfigError(f"Unknown MLC distance: {name!r}") from exc


class UpdateForm(str, Enum):
    """Which written form of the multi-label weight update to apply."""

    PSEUDOCODE = "pseudocode"
    TEXT = "text"


def _enum(enum_cls, value):
    if isinstance(value, enum_cls):
        return value
    try:
        return enum_cls(str(value).strip().lower())
    except ValueError as exc:
        raise ConfigError(f"Invalid {enum_cls.__name__}: {value!r}") from exc


@dataclass(frozen=True)
class SparsifyParams:
    """Probabilistic sparsification settings; ``epsilon=None`` means estimate it."""

    epsilon: Optional[float] = None
    density_threshold: float = config.DENSITY_THRESHOLD
    seed: int = config.SEED

    def __post_init__(self) -> None:
        if self.epsilon is not None and not self.epsilon > 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        if not 0.0 <= self.density_threshold <= 1.0:
            raise ConfigError(
                f"density_threshold must lie in [0, 1], got {self.density_threshold}"
            )

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SparsifyParams":
        return cls(**{f.name: data[f.name] for f in fields(cls) if f.name in data})


@dataclass(frozen=True)
class EmbeddingConfig:
    """Hyperparameters of the graph construction and force-directed layout."""

    d: Union[int, str] = AUTO
    k_neighbors: int = config.K_NEIGHBORS
    n_epochs: int = config.N_EPOCHS
    a: float = 1.0
    b: float = 1.0
    eta: float = 1e-3
    learning_rate: float = 1.0
    negative_samples: int = config.NEGATIVE_SAMPLES
    sample_cap: int = config.SAMPLE_CAP
    metric: DistanceMetric = DistanceMetric.EUCLIDEAN
    seed: int = config.SEED
    batch_size: int = config.LAYOUT_BATCH_SIZE
    parallel: bool = False
    n_jobs: int = config.THREADS
    dim_tail_fraction: float = config.DIM_TAIL_FRACTION
    dim_multiplier: float = config.DIM_MULTIPLIER

    def __post_init__(self) -> None:
        object.__setattr__(self, "metric", _enum(DistanceMetric, self.metric))
        if isinstance(self.d, str):
            if self.d.strip().lower() != AUTO:
                raise ConfigError(f"d must be a positive integer or 'auto', got {self.d!r}")
            object.__setattr__(self, "d", AUTO)
        elif int(self.d) < 1:
            raise ConfigError(f"d must be at least 1, got {self.d}")
        if self.k_neighbors < 2:
            raise ConfigError(f"k_neighbors must be at least 2, got {self.k_neighbors}")
        if self.eta <= 0:
            raise ConfigError(f"eta must be positive, got {self.eta}")
        if self.a <= 0 or self.b <= 0:
            raise ConfigError("a and b must be positive")
        if self.n_epochs < 0:
            raise ConfigError("n_epochs cannot be negative")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if self.negative_samples < 0:
            raise ConfigError("negative_samples cannot be negative")
        if self.sample_cap < 1:
            raise ConfigError("sample_cap must be positive")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be positive")
        if not 0.0 <= self.dim_tail_fraction < 1.0:
            raise ConfigError("dim_tail_fraction must lie in [0, 1)")
        if self.dim_multiplier <= 0:
            raise ConfigError("dim_multiplier must be positive")

    @property
    def auto_dimension(self) -> bool:
        return self.d == AUTO

    def with_dimension(self, d: int) -> "EmbeddingConfig":
        return replace(self, d=int(d))

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["metric"] = self.metric.value
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EmbeddingConfig":
        return cls(**{f.name: data[f.name] for f in fields(cls) if f.name in data})


# name -> (use_embedding, abs_mean_update, adaptive_threshold)
VARIANTS: Dict[str, tuple] = {
    "relieff": (False, False, False),
    "relieff-absmean": (False, True, False),
    "relieff-adaptive": (False, False, True),
    "relieff-absmean-adaptive": (False, True, True),
    "reliefe": (True, False, False),
    "reliefe-absmean": (True, True, False),
    "reliefe-adaptive": (True, False, True),
    "reliefe-absmean-adaptive": (True, True, True),
}


@dataclass(frozen=True)
class RankingConfig:
    """Every knob of a ranking run. ``iterations=None`` means one pass per instance."""

    iterations: Optional[int] = None
    k_neighbors: int = config.K_NEIGHBORS
    adaptive_threshold: bool = False
    abs_mean_update: bool = False
    use_embedding: bool = False
    metric: DistanceMetric = DistanceMetric.EUCLIDEAN
    mlc_distance: MlcDistance = MlcDistance.HAMMING
    update_form: UpdateForm = UpdateForm.PSEUDOCODE
    embedding: EmbeddingConfig = field(default_factory=EmbeddingConfig)
    sparsify: SparsifyParams = field(default_factory=SparsifyParams)
    seed: int = config.SEED
    n_jobs: int = config.THREADS
    serial: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "metric", _enum(DistanceMetric, self.metric))
        object.__setattr__(self, "mlc_distance", MlcDistance.parse(self.mlc_distance))
        object.__setattr__(self, "update_form", _enum(UpdateForm, self.update_form))
        if self.iterations is not None and self.iterations < 1:
            raise ConfigError(f"iterations must be at least 1, got {self.iterations}")
        if self.k_neighbors < 1:
            raise ConfigError(f"k_neighbors must be at least 1, got {self.k_neighbors}")

    @classmethod
    def for_variant(cls, name: str, **overrides: Any) -> "RankingConfig":
        """Build the config of a named variant such as ``reliefe-absmean-adaptive``."""
        key = name.strip().lower()
        if key not in VARIANTS:
            raise ConfigError(f"Unknown variant {name!r}; choose from {sorted(VARIANTS)}")
        use_embedding, abs_mean, adaptive = VARIANTS[key]
        settings = {
            "use_embedding": use_embedding,
            "abs_mean_update": abs_mean,
            "adaptive_threshold": adaptive,
        }
        settings.update(overrides)
        return cls(**settings)

    @property
    def variant_name(self) -> str:
        prefix = "reliefe" if self.use_embedding else "relieff"
        suffix = ""
        if self.abs_mean_update:
            suffix += "-absmean"
        if self.adaptive_threshold:
            suffix += "-adaptive"
        return prefix + suffix

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["metric"] = self.metric.value
        data["mlc_distance"] = self.mlc_distance.value
        data["update_form"] = self.update_form.value
        data["embedding"] = self.embedding.to_dict()
        data["sparsify"] = self.sparsify.to_dict()
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RankingConfig":
        values = {f.name: data[f.name] for f in fields(cls) if f.name in data}
        if isinstance(values.get("embedding"), dict):
            values["embedding"] = EmbeddingConfig.from_dict(values["embedding"])
        if isinstance(values.get("sparsify"), dict):
            values["sparsify"] = SparsifyParams.from_dict(values["sparsify"])
        return cls(**values)


__all__ = [
    "AUTO",
    "DistanceMetric",
    "MlcDistance",
    "UpdateForm",
    "SparsifyParams",
    "EmbeddingConfig",
    "RankingConfig",
    "VARIANTS",
]
