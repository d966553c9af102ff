"""
Hybrid Bell - Nonlocality Package
Bell functionals, experiment drivers and the finite-statistics sampler
"""
from .functionals import CHResult, CHSHResult, ch, chsh, chsh_max, correlator, eta_threshold
from .experiments import (FrontierPoint, ScanPoint, bisect_eta, frontier, nonviolation_scan, optimize_z,
                          psi2_curves, psi2_scan, psi2_scenario, tmss_scan)
from .sampling import McEstimate, mc_sample

__all__ = [
    'CHResult', 'CHSHResult', 'ch', 'chsh', 'chsh_max', 'correlator', 'eta_threshold',
    'FrontierPoint', 'ScanPoint', 'bisect_eta', 'frontier', 'nonviolation_scan', 'optimize_z',
    'psi2_curves', 'psi2_scan', 'psi2_scenario', 'tmss_scan',
    'McEstimate', 'mc_sample',
]
