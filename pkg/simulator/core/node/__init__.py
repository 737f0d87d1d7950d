from core.node.download import (
    DownloadAction,
    DownloadStack,
    InProgress,
    advance_download,
    complete_download,
    has_data,
    offer_header,
)
from core.node.state import (
    Adoption,
    NodeState,
    adopt,
    advance,
    build_block,
    confirm,
    evolve_identity,
    new_node,
    select_chain,
)

__all__ = [
    'Adoption',
    'DownloadAction',
    'DownloadStack',
    'InProgress',
    'NodeState',
    'adopt',
    'advance',
    'advance_download',
    'build_block',
    'complete_download',
    'confirm',
    'evolve_identity',
    'has_data',
    'new_node',
    'offer_header',
    'select_chain',
]
