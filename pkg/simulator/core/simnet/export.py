"""
Trace and metrics writers. Column names come from the record
dataclasses, so the CSV schema changes only when a record does.
"""

from typing import Any, Dict, List

from core.chain.serialization import chain_to_dict
from core.repositories.base import to_plain
from core.schema.introspection import column_names
from core.simnet.engine import SimTrace, SlotRecord
from core.simnet.metrics import MetricsReport

TRACE_COLUMNS = column_names(SlotRecord)
METRICS_COLUMNS = column_names(MetricsReport)


def trace_rows(trace: SimTrace) -> List[Dict[str, Any]]:
    """One plain dict per slot, in TRACE_COLUMNS order."""
    return [to_plain(record) for record in trace.records]


def trace_document(trace: SimTrace) -> Dict[str, Any]:
    return {
        'config': to_plain(trace.config),
        'genesis_hash': trace.genesis_hash.hex(),
        'records': trace_rows(trace),
        'final_chain': chain_to_dict(trace.final_chain),
        'publisher_classes': list(trace.publisher_classes),
    }


def export_trace(trace: SimTrace, store, fmt: str = 'csv'):
    """Write trace.csv (one row per slot) or trace.json (records plus the final chain)."""
    if fmt == 'json':
        return store['write_json']('trace.json', trace_document(trace))
    return store['write']('trace', trace_rows(trace), fmt, TRACE_COLUMNS)


def export_metrics(report: MetricsReport, store, fmt: str = 'csv'):
    """Write metrics.json, plus metrics.csv (one summary row) for the csv format."""
    paths = [store['write_json']('metrics.json', report.as_dict())]
    if fmt == 'csv':
        paths.append(store['write_csv']('metrics.csv', [report.as_dict()], METRICS_COLUMNS))
    return paths
