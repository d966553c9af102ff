"""
Measurement Settings
Threshold photon counting and binned homodyne settings, and the exact
binned joint-outcome tables they produce on a two-mode state
"""
import logging
from dataclasses import dataclass
from typing import Dict, Tuple, Union

import numpy as np

from .errors import DomainError, NumericalError
from .fock import as_mixed
from .quadrature import (BinRegion, QuadratureAngle, RegionOperator, P_QUADRATURE, X_QUADRATURE,
                         region_operator)

TABLE_TOL = 1e-10
NORM_FAIL_TOL = 1e-8
CLAMP_TOL = 1e-12
IMAG_TOL = 1e-10

OUTCOMES = (+1, -1)


def _index(outcome: int) -> int:
    if outcome == +1:
        return 0
    if outcome == -1:
        return 1
    raise DomainError(f"outcome must be +1 or -1, got {outcome}")


@dataclass(frozen=True)
class ThresholdDetector:
    """Click / no-click detector; a click maps to +1"""
    eta: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise DomainError(f"detector efficiency must lie in [0, 1], got {self.eta}")

    @property
    def label(self) -> str:
        return "N"


@dataclass(frozen=True)
class QuadratureBinning:
    """Homodyne measurement at a given angle; results inside the region map to +1"""
    angle: QuadratureAngle
    region: BinRegion

    @classmethod
    def x(cls, z: float) -> 'QuadratureBinning':
        return cls(X_QUADRATURE, BinRegion.symmetric(z))

    @classmethod
    def p(cls, z: float) -> 'QuadratureBinning':
        return cls(P_QUADRATURE, BinRegion.symmetric(z))

    @property
    def label(self) -> str:
        if self.angle == X_QUADRATURE:
            return "X"
        if self.angle == P_QUADRATURE:
            return "P"
        return f"Q{self.angle.theta:.4f}"


Setting = Union[ThresholdDetector, QuadratureBinning]


@dataclass(frozen=True, eq=False)
class JointTable:
    """p[i, j] for outcomes a = OUTCOMES[i], b = OUTCOMES[j]"""
    p: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=float).reshape(2, 2)
        if p.min() < 0.0:
            raise NumericalError("joint table has a negative entry", achieved_tolerance=-float(p.min()))
        total = float(p.sum())
        if abs(total - 1.0) > TABLE_TOL:
            raise NumericalError("joint table does not sum to one", achieved_tolerance=abs(total - 1.0))
        p.setflags(write=False)
        object.__setattr__(self, 'p', p)

    @classmethod
    def from_moments(cls, p_pp: float, p_a: float, p_b: float) -> 'JointTable':
        """
        Assemble a table from p(+,+) and the two +1 marginals

        Rounding negatives down to -1e-12 are clamped and the table renormalized;
        anything larger is a genuine failure.
        """
        raw = np.array([[p_pp, p_a - p_pp],
                        [p_b - p_pp, 1.0 - p_a - p_b + p_pp]])
        worst = float(raw.min())
        if worst < -CLAMP_TOL:
            raise NumericalError("negative outcome probability", achieved_tolerance=-worst)
        raw = np.clip(raw, 0.0, None)
        total = float(raw.sum())
        if abs(total - 1.0) > NORM_FAIL_TOL:
            raise NumericalError("outcome probabilities are not normalized", achieved_tolerance=abs(total - 1.0))
        return cls(raw / total)

    def prob(self, a: int, b: int) -> float:
        return float(self.p[_index(a), _index(b)])

    def marginal_a(self, a: int = +1) -> float:
        return float(self.p[_index(a), :].sum())

    def marginal_b(self, b: int = +1) -> float:
        return float(self.p[:, _index(b)].sum())

    def transpose(self) -> 'JointTable':
        return JointTable(self.p.T.copy())


@dataclass(frozen=True)
class ScenarioTables:
    """The four joint tables of a two-setting, two-party Bell scenario"""
    settings_a: Tuple[Setting, Setting]
    settings_b: Tuple[Setting, Setting]
    tables: Dict[Tuple[int, int], JointTable]

    def table(self, i: int, j: int) -> JointTable:
        return self.tables[(i, j)]

    def pair_label(self, i: int, j: int) -> str:
        return f"{self.settings_a[i].label}{self.settings_b[j].label}"

    @property
    def pairs(self) -> Tuple[Tuple[int, int], ...]:
        return ((0, 0), (0, 1), (1, 0), (1, 1))


def detector_effect(det: ThresholdDetector, cutoff: int) -> RegionOperator:
    """Click effect: diagonal 1 - (1 - eta)^n on level n"""
    levels = np.arange(cutoff + 1)
    return RegionOperator(np.diag(1.0 - (1.0 - det.eta) ** levels))


def setting_effect(s: Setting, cutoff: int) -> RegionOperator:
    """Effect operator for outcome +1 of a setting"""
    if isinstance(s, ThresholdDetector):
        return detector_effect(s, cutoff)
    if isinstance(s, QuadratureBinning):
        return region_operator(s.angle, s.region, cutoff)
    raise DomainError(f"unknown measurement setting: {s!r}")


def _real(value: complex, what: str) -> float:
    if abs(value.imag) > IMAG_TOL:
        raise NumericalError(f"{what} has an imaginary part", achieved_tolerance=abs(value.imag))
    return float(value.real)


def effect_moments(state, effect_a: RegionOperator, effect_b: RegionOperator) -> Tuple[float, float, float]:
    """Returns (p(+,+), p_A(+), p_B(+)) summed over the branches of the state"""
    state = as_mixed(state)
    if effect_a.cutoff != state.cutoff or effect_b.cutoff != state.cutoff:
        raise DomainError(f"effects built at cutoffs {effect_a.cutoff}/{effect_b.cutoff}, "
                          f"state uses {state.cutoff}")
    ma, mb = effect_a.entries, effect_b.entries
    p_pp = p_a = p_b = 0.0
    for w, branch in state.branches:
        c = branch.amps
        conj = c.conj()
        ma_c = ma @ c
        p_pp += w * _real(np.sum(conj * (ma_c @ mb.T)), "p(+,+)")
        p_a += w * _real(np.sum(conj * ma_c), "p_A(+)")
        p_b += w * _real(np.sum(conj * (c @ mb.T)), "p_B(+)")
    return p_pp, p_a, p_b


def joint_table(state, s_a: Setting, s_b: Setting) -> JointTable:
    """Exact binned joint-outcome table for one pair of settings"""
    state = as_mixed(state)
    effect_a = setting_effect(s_a, state.cutoff)
    effect_b = setting_effect(s_b, state.cutoff)
    return JointTable.from_moments(*effect_moments(state, effect_a, effect_b))


def scenario(state, a1: Setting, a2: Setting, b1: Setting, b2: Setting) -> ScenarioTables:
    """All four joint tables of the scenario, computed from the same state"""
    state = as_mixed(state)
    settings_a, settings_b = (a1, a2), (b1, b2)
    tables = {(i, j): joint_table(state, settings_a[i], settings_b[j])
              for i in range(2) for j in range(2)}
    return ScenarioTables(settings_a, settings_b, tables)


def max_signaling(st: ScenarioTables) -> float:
    """Largest change of one party's marginal under the other party's setting choice"""
    worst = 0.0
    for i in range(2):
        worst = max(worst, abs(st.table(i, 0).marginal_a() - st.table(i, 1).marginal_a()))
    for j in range(2):
        worst = max(worst, abs(st.table(0, j).marginal_b() - st.table(1, j).marginal_b()))
    if worst > TABLE_TOL:
        logging.warning(f"scenario tables signal by {worst:.3e}")
    return worst


def click_probability(state, det: ThresholdDetector, mode: int = 0) -> float:
    """Probability that the detector on the given mode fires"""
    state = as_mixed(state)
    effect = detector_effect(det, state.cutoff)
    identity = RegionOperator(np.eye(state.cutoff + 1))
    _, p_a, p_b = effect_moments(state, effect if mode == 0 else identity, effect if mode == 1 else identity)
    return p_a if mode == 0 else p_b
