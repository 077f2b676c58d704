"""Exception types raised by the ReliefE pipeline."""

from __future__ import annotations

from typing import Optional


class ReliefEError(Exception):
    """Base class for every error the pipeline raises on purpose."""


class ConfigError(ReliefEError):
    """A parameter dataclass failed validation."""


class InvalidValue(ReliefEError):
    """NaN or infinite entry where finite values are required."""


class InvalidShape(ReliefEError):
    """Matrix shape is empty or inconsistent with the operation."""


class DegenerateRow(ReliefEError):
    """Cosine distance requested for a row with zero norm."""


class DegenerateInput(ReliefEError):
    """Input carries no usable signal (e.g. all-zero matrix)."""


class DegenerateGeometry(ReliefEError):
    """Too many samples lack two neighbors at positive distance."""


class InsufficientCap(ReliefEError):
    """Sample cap is smaller than the number of distinct targets."""


class InvalidWeight(ReliefEError):
    """Graph membership outside of [0, 1]."""


class LayoutDiverged(ReliefEError):
    """Layout optimisation produced non-finite coordinates."""


class SingleClass(ReliefEError):
    """Prior weight undefined because one class holds every instance."""


class InvalidLabelRow(ReliefEError):
    """Binary label distance received a non-binary row."""


class EmptyNeighborhood(ReliefEError):
    """Update statistics requested over zero neighbors."""


class StratificationFailed(ReliefEError):
    """Could not build folds where every training split sees every class."""


class BaselineDegenerate(ReliefEError):
    """Probe F1 with all features is zero, so relative F1 is undefined."""


class InsufficientPoints(ReliefEError):
    """Curve has too few points to integrate."""


class ParseError(ReliefEError):
    """Dataset file could not be parsed."""

    def __init__(self, message: str, path: Optional[str] = None, line_number: Optional[int] = None):
        self.path = path
        self.line_number = line_number
        location = ""
        if path is not None:
            location = f"{path}"
            if line_number is not None:
                location += f":{line_number}"
            location += ": "
        elif line_number is not None:
            location = f"line {line_number}: "
        super().__init__(f"{location}{message}")


__all__ = [
    "ReliefEError",
    "ConfigError",
    "InvalidValue",
    "InvalidShape",
    "DegenerateRow",
    "DegenerateInput",
    "DegenerateGeometry",
    "InsufficientCap",
    "InvalidWeight",
    "LayoutDiverged",
    "SingleClass",
    "InvalidLabelRow",
    "EmptyNeighborhood",
    "StratificationFailed",
    "BaselineDegenerate",
    "InsufficientPoints",
    "ParseError",
]
