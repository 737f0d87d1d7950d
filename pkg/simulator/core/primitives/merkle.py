"""
Merkle tree over block data (SHA-256).

Leaves and inner nodes are domain separated, and an unpaired node is
promoted to the next level unchanged, so [a, b, c] and [a, b, c, c]
never share a root. The empty list maps to EMPTY_ROOT, which is
distinct from any leaf or node hash.
"""

import hashlib
from typing import List, Sequence, Tuple

_LEAF = b'\x00'
_NODE = b'\x01'

EMPTY_ROOT = hashlib.sha256(b'\x02quicksync/empty-block-data').digest()

# (side, sibling hash); side is 'L' when the sibling sits on the left
ProofStep = Tuple[str, bytes]


def leaf_hash(item: bytes) -> bytes:
    return hashlib.sha256(_LEAF + item).digest()


def node_hash(left: bytes, right: bytes) -> bytes:
    return hashlib.sha256(_NODE + left + right).digest()


def _next_level(level: List[bytes]) -> List[bytes]:
    paired = [node_hash(level[i], level[i + 1]) for i in range(0, len(level) - 1, 2)]
    if len(level) % 2:
        paired.append(level[-1])
    return paired


def merkle_root(items: Sequence[bytes]) -> bytes:
    """
    Root of the tree over `items` in order.

    Args:
        items: Ordered opaque byte strings (may be empty)

    Returns:
        32-byte root; EMPTY_ROOT for an empty list
    """
    if not items:
        return EMPTY_ROOT

    level = [leaf_hash(item) for item in items]
    while len(level) > 1:
        level = _next_level(level)
    return level[0]


def merkle_proof(items: Sequence[bytes], index: int) -> List[ProofStep]:
    """
    Inclusion proof for items[index].

    Raises:
        IndexError: If index is out of range
    """
    if not 0 <= index < len(items):
        raise IndexError('merkle proof index out of range')

    proof: List[ProofStep] = []
    level = [leaf_hash(item) for item in items]

    while len(level) > 1:
        sibling = index ^ 1
        if sibling < len(level):
            side = 'L' if sibling < index else 'R'
            proof.append((side, level[sibling]))
        # An unpaired last node is promoted without a proof step
        level = _next_level(level)
        index //= 2

    return proof


def verify_merkle_proof(item: bytes, proof: Sequence[ProofStep], root: bytes) -> bool:
    """Check that `item` is included under `root`."""
    current = leaf_hash(item)
    for side, sibling in proof:
        if side == 'L':
            current = node_hash(sibling, current)
        elif side == 'R':
            current = node_hash(current, sibling)
        else:
            return False
    return current == root
