"""
Services layer for Phononet.

File ingestion and emission around the operations layer.
"""

from .state_parser import parse_state, parse_terms, format_state
from .config_reader import ConfigReader, config_to_document, splitter_to_entry
from .measurement_reader import MeasurementReader
from .export_service import (
    PlotDataExporter,
    emit_plotdata,
    to_jsonable,
    complex_matrix_to_json,
    complex_matrix_from_json,
)
from .experiment_runner import ExperimentRunner, run_experiment

__all__ = [
    # State expressions
    "parse_state",
    "parse_terms",
    "format_state",
    # Config files
    "ConfigReader",
    "config_to_document",
    "splitter_to_entry",
    # Measurement files
    "MeasurementReader",
    # Export
    "PlotDataExporter",
    "emit_plotdata",
    "to_jsonable",
    "complex_matrix_to_json",
    "complex_matrix_from_json",
    # Experiments
    "ExperimentRunner",
    "run_experiment",
]
