"""Measured-data ingestion, outlier rejection, grouped statistics and heatmaps."""

from .heatmap import wafer_heatmap
from .ingest import (
    MEASUREMENT_COLUMNS,
    QUBIT_COLUMNS,
    MeasurementRecord,
    OutlierPolicy,
    OutlierReport,
    QubitRecord,
    export_measurements,
    export_qubits,
    ingest_measurements,
    ingest_qubits,
    reject_outliers,
)
from .stats import StatsSummary, group_sigma_over_mean, qubit_table_stats, summarize_values

__all__ = [
    "MEASUREMENT_COLUMNS",
    "QUBIT_COLUMNS",
    "MeasurementRecord",
    "OutlierPolicy",
    "OutlierReport",
    "QubitRecord",
    "StatsSummary",
    "export_measurements",
    "export_qubits",
    "group_sigma_over_mean",
    "ingest_measurements",
    "ingest_qubits",
    "qubit_table_stats",
    "reject_outliers",
    "summarize_values",
    "wafer_heatmap",
]
