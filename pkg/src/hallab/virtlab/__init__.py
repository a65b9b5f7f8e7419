"""Simulated lab: instruments, wire protocol, and dataset storage."""

from .adapters import InProcessLab, RemoteLab, connect
from .config import LabConfig, PowerPoint, QubitSpec
from .datasets import (Dataset, DatasetError, MalformedDatasetError,
                       MissingDatasetError, Storage, load_dataset)
from .instruments import LabError, qubit_sequence, vna_sweep
from .s21 import Background, ResonatorSpec, notch_term, s21_response
from .server import LabServer, serve

__all__ = [
    "Background", "Dataset", "DatasetError", "InProcessLab", "LabConfig",
    "LabError", "LabServer", "MalformedDatasetError", "MissingDatasetError",
    "PowerPoint", "QubitSpec", "RemoteLab", "ResonatorSpec", "Storage",
    "connect", "load_dataset", "notch_term", "qubit_sequence", "s21_response",
    "serve", "vna_sweep",
]
