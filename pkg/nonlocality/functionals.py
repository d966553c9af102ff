"""
Bell Functionals
Correlators, the CHSH expression, its Clauser-Horne form, and the closed-form
detector-efficiency threshold for the lossy two-photon state
"""
import math
from dataclasses import dataclass
from typing import Dict, Tuple

from photonics.channels import closed_form_rho
from photonics.errors import DomainError
from photonics.fock import make_psi2
from photonics.measurement import JointTable, QuadratureBinning, ScenarioTables, ThresholdDetector, joint_table

PAIR_ORDER = ((0, 0), (0, 1), (1, 0), (1, 1))
NN_POSITION = 3


@dataclass(frozen=True)
class CHSHResult:
    """
    S = sign * sum_k s_k E_k with s_k = -1 only at minus_position

    terms holds (setting-pair label, correlator) in PAIR_ORDER.
    """
    S: float
    terms: Tuple[Tuple[str, float], ...]
    minus_position: int
    sign: int = +1

    @property
    def violates(self) -> bool:
        return self.S > 2.0

    @property
    def minus_label(self) -> str:
        return self.terms[self.minus_position][0]


@dataclass(frozen=True)
class CHResult:
    value: float
    components: Dict[str, float]

    @property
    def violates(self) -> bool:
        return self.value > 0.0


def correlator(tab: JointTable) -> float:
    """E = p(++) + p(--) - p(+-) - p(-+)"""
    return (tab.prob(+1, +1) + tab.prob(-1, -1)) - (tab.prob(+1, -1) + tab.prob(-1, +1))


def _terms(st: ScenarioTables) -> Tuple[Tuple[str, float], ...]:
    return tuple((st.pair_label(i, j), correlator(st.table(i, j))) for i, j in PAIR_ORDER)


def _signed_sum(terms, minus_position: int) -> float:
    return sum(-e if k == minus_position else e for k, (_, e) in enumerate(terms))


def chsh(st: ScenarioTables, minus_position: int = NN_POSITION) -> CHSHResult:
    """CHSH value with the minus sign on the setting pair at minus_position"""
    if minus_position not in range(4):
        raise DomainError(f"minus position must be 0..3, got {minus_position}")
    terms = _terms(st)
    return CHSHResult(_signed_sum(terms, minus_position), terms, minus_position)


def chsh_max(st: ScenarioTables) -> CHSHResult:
    """Largest |CHSH| over the four minus placements, with the achieving arrangement"""
    terms = _terms(st)
    best = None
    for position in range(4):
        value = _signed_sum(terms, position)
        for sign in (+1, -1):
            if best is None or sign * value > best.S:
                best = CHSHResult(sign * value, terms, position, sign)
    return best


def ch(st: ScenarioTables) -> CHResult:
    """
    Clauser-Horne combination
        -p(a_X=+) - p(b_X=+) + p(++|XX) + p(++|NX) + p(++|XN) - p(++|NN)

    Settings with index 0 are the homodyne ones and index 1 the counting ones;
    the marginals come from the XX table.
    """
    xx, xn, nx, nn = (st.table(i, j) for i, j in PAIR_ORDER)
    components = {
        'p_a_X': xx.marginal_a(+1),
        'p_b_X': xx.marginal_b(+1),
        'p_XX': xx.prob(+1, +1),
        'p_NX': nx.prob(+1, +1),
        'p_XN': xn.prob(+1, +1),
        'p_NN': nn.prob(+1, +1),
    }
    value = (-components['p_a_X'] - components['p_b_X'] + components['p_XX']
             + components['p_NX'] + components['p_XN'] - components['p_NN'])
    return CHResult(value, components)


def eta_threshold(t: float, z: float, cutoff: int = 2) -> float:
    """
    Smallest detector efficiency giving a Clauser-Horne violation at (t, z)

    Solves t*eta >= 1 - sqrt(1 - (1 - p(--|XX)) / (P(++|NX) + P(++|XN))) with
    p(--|XX) taken on the lossy state and the P terms on the ideal state.
    Returns math.inf when no efficiency works; finite values above 1 are also infeasible.
    """
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"transmission must lie in [0, 1], got {t}")
    x_bin = QuadratureBinning.x(z)
    ideal_n = ThresholdDetector(1.0)
    p_mm = joint_table(closed_form_rho(t, cutoff), x_bin, x_bin).prob(-1, -1)
    psi2 = make_psi2(cutoff)
    p_nx = joint_table(psi2, ideal_n, x_bin).prob(+1, +1)
    p_xn = joint_table(psi2, x_bin, ideal_n).prob(+1, +1)
    denominator = p_nx + p_xn
    if denominator <= 0.0 or t == 0.0:
        return math.inf
    discriminant = 1.0 - (1.0 - p_mm) / denominator
    if discriminant < 0.0:
        return math.inf
    return (1.0 - math.sqrt(discriminant)) / t
