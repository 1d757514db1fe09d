"""Estimate sliding-window aggregate features from fitted parameters and rank them
without materializing the feature table."""

from .bounds import AggregateBound, BoundTable, bound_column, estimate_all
from .data_core import (ActionTable, Assumption, AssumptionParams, EntityTable, fit_parameters,
                        read_action_csv, read_entity_csv, resample)
from .errors import (AssumptionViolation, ConfigError, DegenerateChain, DomainError, EmptyColumn,
                     NoRecords, SchemaError, SwaggError, UniformImportance)
from .kernels import BACKEND
from .oracle import FeatureTable, generate_tf_sparse, generate_tf_timecut, simulate_chain
from .selector import ImportanceReport, ensemble_select, rank_recall
from .window_model import WindowKind, stationary_mixture

__version__ = "0.1.0"

__all__ = [
    "ActionTable", "AggregateBound", "Assumption", "AssumptionParams", "AssumptionViolation",
    "BACKEND", "BoundTable", "ConfigError", "DegenerateChain", "DomainError", "EmptyColumn",
    "EntityTable", "FeatureTable", "ImportanceReport", "NoRecords", "SchemaError", "SwaggError",
    "UniformImportance", "WindowKind", "bound_column", "ensemble_select", "estimate_all",
    "fit_parameters", "generate_tf_sparse", "generate_tf_timecut", "rank_recall",
    "read_action_csv", "read_entity_csv", "resample", "simulate_chain", "stationary_mixture",
]
