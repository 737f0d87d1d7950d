"""
Schema Introspection Module

Extracts schema information from the toolkit's dataclasses. The same
schema drives:
- the accepted keys of run configuration files (and value parsing)
- the column names of CSV outputs
- the schema listing printed by the CLI

The dataclass is the single source of truth; nothing else lists fields.
"""

import dataclasses
import typing
from typing import Any, Dict, List, Optional, Tuple, Type

_registry: Dict[str, type] = {}

_TRUE = {'1', 'true', 'yes', 'on'}
_FALSE = {'0', 'false', 'no', 'off'}


def register_schema(cls: type) -> type:
    """Class decorator: make a dataclass discoverable by name."""
    if not dataclasses.is_dataclass(cls):
        raise TypeError(f'{cls.__name__} is not a dataclass')
    _registry[cls.__name__] = cls
    return cls


def _unwrap_optional(tp) -> Tuple[Any, bool]:
    if typing.get_origin(tp) is typing.Union:
        args = [a for a in typing.get_args(tp) if a is not type(None)]
        if len(args) == 1:
            return args[0], True
    return tp, False


def type_name(tp) -> str:
    """Readable name of a field type ('float', 'list[float]', 'int?')."""
    inner, optional = _unwrap_optional(tp)
    origin = typing.get_origin(inner)
    if origin in (tuple, list):
        args = [a for a in typing.get_args(inner) if a is not Ellipsis]
        name = f'list[{type_name(args[0])}]' if args else 'list'
    elif isinstance(inner, type):
        name = inner.__name__
    else:
        name = str(inner)
    return name + ('?' if optional else '')


def get_field_schema(field: dataclasses.Field, hints: Dict[str, Any]) -> Dict[str, Any]:
    """
    Extract schema information from a single dataclass field.

    Args:
        field: dataclasses.Field
        hints: Resolved type hints of the owning class

    Returns:
        Dictionary containing field metadata
    """
    tp = hints.get(field.name, field.type)
    info = {
        'name': field.name,
        'type': type_name(tp),
        'required': field.default is dataclasses.MISSING and field.default_factory is dataclasses.MISSING,
        'help_text': field.metadata.get('help', ''),
    }

    if 'choices' in field.metadata:
        info['choices'] = list(field.metadata['choices'])

    if field.default is not dataclasses.MISSING:
        default = field.default
        if dataclasses.is_dataclass(default):
            default = None
        info['default'] = default

    if dataclasses.is_dataclass(_unwrap_optional(tp)[0]):
        info['type'] = 'section'
        info['section'] = _unwrap_optional(tp)[0].__name__

    return info


def get_dataclass_schema(cls: Type) -> Dict[str, Any]:
    """
    Extract complete schema information from a dataclass.

    Returns:
        Dictionary with the class name and one entry per field
    """
    hints = typing.get_type_hints(cls)
    return {
        'name': cls.__name__,
        'doc': (cls.__doc__ or '').strip().splitlines()[0] if cls.__doc__ else '',
        'fields': [get_field_schema(f, hints) for f in dataclasses.fields(cls)],
    }


def get_all_schemas() -> Dict[str, Dict[str, Any]]:
    """Schema of every registered dataclass."""
    return {name: get_dataclass_schema(cls) for name, cls in sorted(_registry.items())}


def get_schema_by_name(name: str) -> Optional[type]:
    """
    Retrieve a registered dataclass by name.

    Returns:
        The class or None if not registered
    """
    return _registry.get(name)


def column_names(cls: Type) -> List[str]:
    """CSV column order for records of `cls` (field order)."""
    return [f.name for f in dataclasses.fields(cls)]


def flat_fields(cls: Type, prefix: str = '') -> Dict[str, Tuple[type, Any]]:
    """
    Dotted key -> (field type, field) for a dataclass tree.

    Fields with metadata 'key' use that dotted key instead of the
    derived one; nested dataclass fields become sections.
    """
    hints = typing.get_type_hints(cls)
    keys = {}
    for field in dataclasses.fields(cls):
        tp = hints.get(field.name, field.type)
        inner, _ = _unwrap_optional(tp)
        if dataclasses.is_dataclass(inner):
            section = field.metadata.get('key', field.name)
            keys.update(flat_fields(inner, f'{prefix}{section}.'))
            continue
        key = field.metadata.get('key', f'{prefix}{field.name}')
        keys[key] = (tp, field)
    return keys


def _parse_scalar(raw: str, tp) -> Any:
    if tp is bool:
        lowered = raw.strip().lower()
        if lowered in _TRUE:
            return True
        if lowered in _FALSE:
            return False
        raise ValueError(f'expected a boolean, got {raw!r}')
    if tp is int:
        return int(raw.strip())
    if tp is float:
        return float(raw.strip())
    if tp is str:
        return raw.strip()
    raise ValueError(f'unsupported type {tp!r}')


def parse_value(raw: Optional[str], tp) -> Any:
    """
    Parse a config string into the field's type.

    Empty strings parse to None for optional fields; sequences are
    comma separated.

    Raises:
        ValueError: If the value does not parse
    """
    inner, optional = _unwrap_optional(tp)
    if raw is None or raw.strip() == '':
        if optional:
            return None
        raise ValueError('value required')

    origin = typing.get_origin(inner)
    if origin in (tuple, list):
        args = [a for a in typing.get_args(inner) if a is not Ellipsis]
        item_type = args[0] if args else str
        items = tuple(_parse_scalar(part, item_type) for part in raw.split(',') if part.strip())
        if not items:
            raise ValueError('empty list')
        return items
    return _parse_scalar(raw, inner)


def build_dataclass(cls: Type, values: Dict[str, Any], prefix: str = '') -> Any:
    """
    Build a (nested) dataclass from dotted keys. Missing keys keep their
    defaults.
    """
    hints = typing.get_type_hints(cls)
    kwargs = {}
    for field in dataclasses.fields(cls):
        tp = hints.get(field.name, field.type)
        inner, _ = _unwrap_optional(tp)
        if dataclasses.is_dataclass(inner):
            section = field.metadata.get('key', field.name)
            kwargs[field.name] = build_dataclass(inner, values, f'{prefix}{section}.')
            continue
        key = field.metadata.get('key', f'{prefix}{field.name}')
        if key in values:
            kwargs[field.name] = values[key]
    return cls(**kwargs)
