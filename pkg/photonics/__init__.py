"""
Hybrid Bell - Photonics Package
States, homodyne binning, detectors and loss channels
"""
from .errors import DomainError, HybridBellError, NumericalError
from .fock import (MixedTwoModeState, PureTwoModeState, as_mixed, make_basis, make_cat, make_psi2,
                   make_single_photon_path, make_tmss, trace_distance)
from .quadrature import (BinRegion, Interval, P_QUADRATURE, QuadratureAngle, RegionOperator,
                         X_QUADRATURE, hermite_fn, overlap, region_operator, region_overlap)
from .measurement import (JointTable, QuadratureBinning, ScenarioTables, ThresholdDetector,
                          detector_effect, joint_table, max_signaling, scenario, setting_effect)
from .channels import LossParams, apply_loss, closed_form_rho

__all__ = [
    'DomainError', 'HybridBellError', 'NumericalError',
    'MixedTwoModeState', 'PureTwoModeState', 'as_mixed', 'make_basis', 'make_cat', 'make_psi2',
    'make_single_photon_path', 'make_tmss', 'trace_distance',
    'BinRegion', 'Interval', 'P_QUADRATURE', 'QuadratureAngle', 'RegionOperator', 'X_QUADRATURE',
    'hermite_fn', 'overlap', 'region_operator', 'region_overlap',
    'JointTable', 'QuadratureBinning', 'ScenarioTables', 'ThresholdDetector',
    'detector_effect', 'joint_table', 'max_signaling', 'scenario', 'setting_effect',
    'LossParams', 'apply_loss', 'closed_form_rho',
]
