"""
Repository Tests

Test the output store.
"""

import json
from dataclasses import dataclass

import pytest

from config import settings
from core.repositories.base import META_COLUMNS, create_repository, parameter_hash, to_plain


@dataclass(frozen=True)
class Row:
    k: int
    eta: float


@pytest.fixture
def store(tmp_path):
    """Store bound to a temporary directory"""
    return create_repository(tmp_path / 'out', 7, {'command': 'bound', 'r_a': 0.1})


class TestOutputStore:
    """Test store writes and metadata"""

    def test_meta(self, store):
        """Test the metadata stamped on every file"""
        assert store['meta']['seed'] == 7
        assert store['meta']['artifact_version'] == settings.ARTIFACT_VERSION
        assert len(store['meta']['param_hash']) == 64

    def test_write_json(self, store):
        """Test JSON documents carry meta and data"""
        path = store['write_json']('result.json', {'k': 15, 'hash': b'\x01\x02'})
        document = json.loads(path.read_text())

        assert document['meta'] == store['meta']
        assert document['data'] == {'k': 15, 'hash': '0102'}

    def test_write_csv(self, store):
        """Test rows from dataclasses with the metadata columns first"""
        store['write_csv']('rows.csv', [Row(1, 0.5), Row(2, 0.25)])
        rows = store['read_csv']('rows.csv')

        assert list(rows[0]) == list(META_COLUMNS) + ['k', 'eta']
        assert [r['k'] for r in rows] == ['1', '2']
        assert rows[0]['seed'] == '7'

    def test_csv_cells(self, store):
        """Test None becomes empty and lists become JSON"""
        store['write_csv']('cells.csv', [{'a': None, 'b': [1, 2]}])
        row = store['read_csv']('cells.csv')[0]

        assert row['a'] == ''
        assert row['b'] == '[1, 2]'

    def test_empty_csv_needs_columns(self, store):
        """Test zero rows only work with explicit columns"""
        with pytest.raises(ValueError):
            store['write_csv']('empty.csv', [])

        store['write_csv']('empty.csv', [], ['k'])
        assert store['read_csv']('empty.csv') == []

    def test_write_by_format(self, store):
        """Test write() picks the extension and rejects unknown formats"""
        assert store['write']('table', [{'k': 1}], 'csv').name == 'table.csv'
        assert store['write']('table', [{'k': 1}], 'json').name == 'table.json'
        with pytest.raises(LookupError):
            store['write']('table', [{'k': 1}], 'xml')

    def test_nested_paths(self, store):
        """Test files in subdirectories are created on demand"""
        path = store['write_json']('trial_0/metrics.json', {})

        assert path.is_file()
        assert path == store['path']('trial_0/metrics.json')

    def test_rewrite_is_identical(self, tmp_path):
        """Test equal inputs give byte-identical files"""
        a = create_repository(tmp_path / 'a', 1, {'x': 1})
        b = create_repository(tmp_path / 'b', 1, {'x': 1})

        first = a['write_csv']('t.csv', [{'v': 0.1}]).read_bytes()
        second = b['write_csv']('t.csv', [{'v': 0.1}]).read_bytes()

        assert first == second


class TestParameterHash:
    """Test canonical hashing of parameters"""

    def test_key_order_does_not_matter(self):
        """Test dict ordering leaves the hash unchanged"""
        assert parameter_hash({'a': 1, 'b': 2}) == parameter_hash({'b': 2, 'a': 1})

    def test_values_matter(self):
        """Test a changed value changes the hash"""
        assert parameter_hash({'a': 1}) != parameter_hash({'a': 2})

    def test_to_plain(self):
        """Test dataclasses, bytes, tuples and sets become JSON types"""
        assert to_plain(Row(1, 0.5)) == {'k': 1, 'eta': 0.5}
        assert to_plain((b'\xff', frozenset({2, 1}))) == ['ff', [1, 2]]
