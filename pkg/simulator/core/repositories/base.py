"""
Output store (functional approach).

Every command writes its results through one store bound to an output
directory and a run's metadata. The store stamps each file with the
seed, the parameter hash and the artifact version, and writes nothing
time-dependent, so re-running with the same inputs gives byte-identical
files.
"""

import csv
import dataclasses
import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence

from config import settings

logger = logging.getLogger(__name__)

META_COLUMNS = ('seed', 'param_hash', 'artifact_version')
FORMATS = ('csv', 'json')


def to_plain(value: Any) -> Any:
    """Recursively convert dataclasses, bytes and tuples to JSON types."""
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: to_plain(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, (bytes, bytearray)):
        return bytes(value).hex()
    if isinstance(value, Mapping):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, frozenset, set)):
        items = [to_plain(v) for v in value]
        return sorted(items) if isinstance(value, (frozenset, set)) else items
    if hasattr(value, 'item') and callable(value.item):
        return value.item()
    return value


def canonical_json(value: Any) -> str:
    return json.dumps(to_plain(value), sort_keys=True, separators=(',', ':'))


def parameter_hash(parameters: Any) -> str:
    """sha256 (hex) of the canonical JSON of a command's parameters."""
    return hashlib.sha256(canonical_json(parameters).encode()).hexdigest()


def _cell(value: Any) -> Any:
    value = to_plain(value)
    if value is None:
        return ''
    if isinstance(value, (list, dict)):
        return json.dumps(value, sort_keys=True)
    return value


def create_repository(output_dir, seed: int, parameters: Any) -> Dict[str, Any]:
    """
    Factory for an output store bound to one command run.

    Args:
        output_dir: Directory for every file the run writes (created on demand)
        seed: The run's seed
        parameters: Everything that determines the results; hashed into
            the metadata

    Returns:
        Dictionary of store functions

    Example:
        store = create_repository('output', 7, {'r_a': 0.1})
        store['write_csv']('table.csv', rows)
        store['write_json']('metrics.json', report)
    """
    root = Path(output_dir)
    meta = {
        'seed': seed,
        'param_hash': parameter_hash(parameters),
        'artifact_version': settings.ARTIFACT_VERSION,
    }

    def path(name: str) -> Path:
        """Absolute location of an output file."""
        return root / name

    def _prepare(name: str) -> Path:
        target = path(name)
        target.parent.mkdir(parents=True, exist_ok=True)
        return target

    def write_json(name: str, data: Any) -> Path:
        """
        Write {"meta": ..., "data": ...} with sorted keys.

        Returns:
            Path of the written file
        """
        target = _prepare(name)
        document = {'meta': meta, 'data': to_plain(data)}
        target.write_text(json.dumps(document, sort_keys=True, indent=2) + '\n')
        logger.info('wrote %s', target)
        return target

    def write_csv(name: str, rows: Iterable[Any], columns: Optional[Sequence[str]] = None) -> Path:
        """
        Write rows (dicts or dataclasses) with the metadata columns first.

        Args:
            name: File name inside the output directory
            rows: Records to write
            columns: Column order; defaults to the first row's keys

        Raises:
            ValueError: If there are no rows and no columns
        """
        plain: List[Dict[str, Any]] = [to_plain(r) for r in rows]
        if columns is None:
            if not plain:
                raise ValueError('cannot infer columns from zero rows')
            columns = list(plain[0].keys())

        target = _prepare(name)
        with target.open('w', newline='') as out:
            writer = csv.DictWriter(out, fieldnames=list(META_COLUMNS) + list(columns), lineterminator='\n')
            writer.writeheader()
            for row in plain:
                writer.writerow({**meta, **{c: _cell(row.get(c)) for c in columns}})
        logger.info('wrote %s (%d rows)', target, len(plain))
        return target

    def write(name: str, rows: Any, fmt: str, columns: Optional[Sequence[str]] = None) -> Path:
        """Write `rows` as `<name>.<fmt>`."""
        if fmt not in FORMATS:
            raise LookupError(f'Unknown format: {fmt}')
        if fmt == 'json':
            return write_json(f'{name}.json', rows)
        return write_csv(f'{name}.csv', rows, columns)

    def read_json(name: str) -> Dict[str, Any]:
        return json.loads(path(name).read_text())

    def read_csv(name: str) -> List[Dict[str, str]]:
        with path(name).open(newline='') as src:
            return list(csv.DictReader(src))

    return {
        'path': path,
        'write_json': write_json,
        'write_csv': write_csv,
        'write': write,
        'read_json': read_json,
        'read_csv': read_csv,
        'meta': meta,
    }
