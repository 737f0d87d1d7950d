"""
Canonical serialization of headers and genesis blocks.

Field order (header): publisher_key, publisher_stake (8-byte fixed point,
12 fractional decimal digits), slot (8-byte big-endian), prev_hash,
prev_null (1 byte), vrf.uniform_output (kappa/8 bytes big-endian),
data_root. The header hash is SHA-256 over exactly these bytes.
"""

import hashlib
import struct
from typing import Any, Dict

STAKE_DECIMALS = 12
STAKE_SCALE = 10 ** STAKE_DECIMALS


def encode_stake(stake: float) -> bytes:
    """Relative stake as an 8-byte fixed-point integer (12 decimals)."""
    if not 0.0 <= stake <= 1.0:
        raise ValueError('stake must lie in [0, 1]')
    return round(stake * STAKE_SCALE).to_bytes(8, 'big')


def serialize_header(header) -> bytes:
    """Canonical bytes of a BlockHeader."""
    kappa_bytes = (header.vrf.kappa + 7) // 8
    return b''.join((
        header.publisher_key,
        encode_stake(header.publisher_stake),
        header.slot.to_bytes(8, 'big'),
        header.prev_hash,
        b'\x01' if header.prev_null else b'\x00',
        header.vrf.uniform_output.to_bytes(kappa_bytes, 'big'),
        header.data_root,
    ))


def header_hash(header) -> bytes:
    return hashlib.sha256(serialize_header(header)).digest()


def serialize_genesis(genesis) -> bytes:
    params = genesis.protocol_params
    parts = [
        b'quicksync/genesis',
        struct.pack('>d', params.scale_factor),
        struct.pack('>d', params.slot_length_seconds),
        params.epoch_length_slots.to_bytes(8, 'big'),
        params.kappa.to_bytes(2, 'big'),
        params.confirm_depth.to_bytes(8, 'big'),
        params.lifetime_slots.to_bytes(8, 'big'),
    ]
    for public_key, stake in genesis.stake_items:
        parts.append(public_key)
        parts.append(encode_stake(stake))
    return b''.join(parts)


def genesis_hash(genesis) -> bytes:
    return hashlib.sha256(serialize_genesis(genesis)).digest()


def header_to_dict(header) -> Dict[str, Any]:
    """JSON-ready view of a header (hex for byte fields)."""
    return {
        'slot': header.slot,
        'hash': header.hash.hex(),
        'publisher_key': header.publisher_key.hex(),
        'publisher_stake': header.publisher_stake,
        'prev_hash': header.prev_hash.hex(),
        'prev_null': header.prev_null,
        'vrf_output': format(header.vrf.uniform_output, 'x'),
        'kappa': header.vrf.kappa,
        'data_root': header.data_root.hex(),
    }


def chain_to_dict(chain) -> Dict[str, Any]:
    """
    Export a chain for trace files.

    Returns:
        Dictionary with genesis hash, length, chain power and one entry
        per block (header fields plus `null` and `tx_count`)
    """
    blocks = []
    for block in chain.blocks:
        entry = header_to_dict(block.header)
        entry['null'] = block.is_null
        entry['tx_count'] = None if block.data is None else len(block.data)
        blocks.append(entry)

    return {
        'genesis_hash': chain.genesis.hash.hex(),
        'length': len(chain),
        'power': chain.power,
        'blocks': blocks,
    }
