from core.chain.ledger import (
    HeaderVerdict,
    build_epoch_context,
    common_prefix_length,
    epoch_of,
    extend,
    extend_trusted,
    genesis_chain,
    snapshot_stakes,
    validate_chain,
    validate_header,
    with_block_data,
)
from core.chain.models import (
    Block,
    BlockHeader,
    Chain,
    ChainLink,
    EpochContext,
    GenesisBlock,
    ProtocolParams,
)
from core.chain.serialization import chain_to_dict, genesis_hash, header_hash, serialize_header

__all__ = [
    'Block',
    'BlockHeader',
    'Chain',
    'ChainLink',
    'EpochContext',
    'GenesisBlock',
    'HeaderVerdict',
    'ProtocolParams',
    'build_epoch_context',
    'chain_to_dict',
    'common_prefix_length',
    'epoch_of',
    'extend',
    'extend_trusted',
    'genesis_chain',
    'genesis_hash',
    'header_hash',
    'serialize_header',
    'snapshot_stakes',
    'validate_chain',
    'validate_header',
    'with_block_data',
]
