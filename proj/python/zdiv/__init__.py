"""Split-step fiber simulation, z-diversity links and GMM metrics.

Thin numpy-facing wrapper over the C++ core. Units follow the core
convention: time in ps, distance in km, power in W, rates in Hz.
"""

from ._zdiv import (
    ase_sigma2,
    cdc,
    constellation_rings,
    dbp,
    gmm_mutual_information,
    run_scenario,
    simulate_link,
    soliton_period_km,
    ssfm,
    two_soliton,
    zs_eigenvalues,
)

__all__ = [
    "ase_sigma2",
    "cdc",
    "constellation_rings",
    "dbp",
    "gmm_mutual_information",
    "run_scenario",
    "simulate_link",
    "soliton_period_km",
    "ssfm",
    "two_soliton",
    "zs_eigenvalues",
]
