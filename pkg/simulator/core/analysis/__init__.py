from core.analysis.borrow_power import (
    BorrowPowerGains,
    BorrowPowerInstance,
    OptimalC,
    borrow_power_case_gains,
    borrow_power_effect,
    borrow_power_gains,
    estimate_eta_borrow_power,
    f_eag,
    gain_surface_cv,
    gain_surface_vt,
    monte_carlo_gains,
    optimal_c,
)
from core.analysis.bounds import (
    BoundParams,
    bernstein_tail,
    bound_params,
    bound_params_from_powers,
    chain_quality_bound,
    epsilon_cp,
    epsilon_lp,
    eta_bound,
    finality_minutes,
    solve_k,
    tps,
)
from core.analysis.montecarlo import (
    EtaEstimate,
    MonteCarloK,
    estimate_eta,
    monte_carlo_k,
    sybil_check,
    wilson_interval,
)
from core.analysis.tables import (
    bound_vs_monte_carlo,
    eta_curve,
    finality_table,
    s_sweep,
    tps_table,
)

__all__ = [
    'BorrowPowerGains',
    'BorrowPowerInstance',
    'BoundParams',
    'EtaEstimate',
    'MonteCarloK',
    'OptimalC',
    'bernstein_tail',
    'borrow_power_case_gains',
    'borrow_power_effect',
    'borrow_power_gains',
    'bound_params',
    'bound_params_from_powers',
    'bound_vs_monte_carlo',
    'chain_quality_bound',
    'epsilon_cp',
    'epsilon_lp',
    'estimate_eta',
    'estimate_eta_borrow_power',
    'eta_bound',
    'eta_curve',
    'f_eag',
    'finality_minutes',
    'finality_table',
    'gain_surface_cv',
    'gain_surface_vt',
    'monte_carlo_gains',
    'monte_carlo_k',
    'optimal_c',
    's_sweep',
    'solve_k',
    'sybil_check',
    'tps',
    'tps_table',
    'wilson_interval',
]
