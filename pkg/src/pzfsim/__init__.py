"""Partial zero-forcing downlink simulator with large-antenna predictions."""

from .config import ConfigError, NoiseSpec, NullingRule, PlacementMode, ScenarioConfig
from .precoder import ProjectionCollapse

__version__ = "0.1.0"

__all__ = ["ConfigError", "NoiseSpec", "NullingRule", "PlacementMode", "ProjectionCollapse", "ScenarioConfig"]
