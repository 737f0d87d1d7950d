from core.power.metrics import (
    ChainPower,
    PowerAccumulator,
    PowerValue,
    StakePower,
    accumulate,
    block_power,
    chain_power,
    header_power,
    histogram_match,
    is_better,
    normalize_vrf,
    power_from_normalized,
    power_inverse_cdf,
    stake_power,
)
from core.power.sybil import (
    max_power_cdf,
    sample_block_powers,
    sample_effective_power,
    sybil_cdf,
    sybil_pdf,
    win_probability,
)

__all__ = [
    'ChainPower',
    'PowerAccumulator',
    'PowerValue',
    'StakePower',
    'accumulate',
    'block_power',
    'chain_power',
    'header_power',
    'histogram_match',
    'is_better',
    'max_power_cdf',
    'normalize_vrf',
    'power_from_normalized',
    'power_inverse_cdf',
    'sample_block_powers',
    'sample_effective_power',
    'stake_power',
    'sybil_cdf',
    'sybil_pdf',
    'win_probability',
]
