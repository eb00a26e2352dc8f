"""
Módulo de utilitários da aplicação.
"""
from app.utils.io import (
    Dataset,
    read_dataset,
    dataset_from_frame,
    read_truth,
    read_intervals,
    write_intervals,
    table_from_frame,
    table_to_frame,
    format_interval_set,
    parse_interval_set,
)

__all__ = [
    "Dataset",
    "read_dataset",
    "dataset_from_frame",
    "read_truth",
    "read_intervals",
    "write_intervals",
    "table_from_frame",
    "table_to_frame",
    "format_interval_set",
    "parse_interval_set",
]
