"""
Photon Loss
Independent single-mode loss as a Kraus map on branch ensembles, and the
closed-form lossy version of the two-photon path-entangled state
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np
from scipy.special import comb

from .errors import DomainError
from .fock import MixedTwoModeState, PureTwoModeState, as_mixed, make_basis, make_psi2

DROP_WEIGHT = 1e-18
MERGE_DIGITS = 12


def _check_transmission(t: float, name: str = "t") -> float:
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"transmission {name} must lie in [0, 1], got {t}")
    return float(t)


@dataclass(frozen=True)
class LossParams:
    """Intensity transmission of the two optical paths; t_b defaults to t"""
    t: float
    t_b: Optional[float] = None

    def __post_init__(self):
        _check_transmission(self.t)
        if self.t_b is not None:
            _check_transmission(self.t_b, "t_b")

    @property
    def t_a(self) -> float:
        return self.t

    @property
    def t_b_effective(self) -> float:
        return self.t if self.t_b is None else self.t_b


def loss_kraus(t: float, cutoff: int) -> List[np.ndarray]:
    """
    Kraus operators A_k (k photons lost) of a loss channel with transmission t

    <n-k|A_k|n> = sqrt(C(n, k) t^(n-k) (1-t)^k)
    """
    _check_transmission(t)
    levels = np.arange(cutoff + 1)
    ops = []
    for k in range(cutoff + 1):
        n = levels[k:]
        factors = np.sqrt(comb(n, k) * t ** (n - k) * (1.0 - t) ** k)
        a_k = np.zeros((cutoff + 1, cutoff + 1))
        a_k[n - k, n] = factors
        ops.append(a_k)
    return ops


def _branch_key(state: PureTwoModeState) -> bytes:
    # equal keys mean equal states up to a global phase
    v = state.vector()
    lead = int(np.argmax(np.abs(v) > 1e-9))
    v = v * (abs(v[lead]) / v[lead])
    return (np.round(v, MERGE_DIGITS) + 0.0).tobytes()


def merge_branches(state: MixedTwoModeState) -> MixedTwoModeState:
    """Combine branches that hold the same pure state"""
    weights: Dict[bytes, float] = {}
    states: Dict[bytes, PureTwoModeState] = {}
    for w, s in state.branches:
        key = _branch_key(s)
        weights[key] = weights.get(key, 0.0) + w
        states.setdefault(key, s)
    return MixedTwoModeState.from_weighted((weights[k], states[k]) for k in weights)


def apply_loss(state, p: LossParams) -> MixedTwoModeState:
    """
    Apply independent loss to both modes

    Each input branch splits into one branch per pair (k_A, k_B) of lost photon
    numbers; branches of zero weight are dropped and identical ones merged.
    """
    state = as_mixed(state)
    cutoff = state.cutoff
    kraus_a = loss_kraus(p.t_a, cutoff)
    kraus_b = kraus_a if p.t_b_effective == p.t_a else loss_kraus(p.t_b_effective, cutoff)
    out = []
    for w, branch in state.branches:
        top = branch.max_occupied()
        c = branch.amps
        for a_k in kraus_a[:top + 1]:
            left = a_k @ c
            for b_k in kraus_b[:top + 1]:
                c_out = left @ b_k.T
                weight = float(np.sum(np.abs(c_out) ** 2))
                if weight <= DROP_WEIGHT:
                    continue
                out.append((w * weight, PureTwoModeState.from_unnormalized(c_out, branch.label)))
    merged = merge_branches(MixedTwoModeState.from_weighted(out))
    logging.debug(f"loss t=({p.t_a}, {p.t_b_effective}) on {len(state.branches)} branch(es) "
                  f"-> {len(merged.branches)} branch(es)")
    return merged


def closed_form_rho(t: float, cutoff: int = 2) -> MixedTwoModeState:
    """t^2 |psi2><psi2| + t(1-t)(|10><10| + |01><01|) + (1-t)^2 |00><00|"""
    _check_transmission(t)
    branches = [
        (t * t, make_psi2(cutoff)),
        (t * (1.0 - t), make_basis(1, 0, cutoff)),
        (t * (1.0 - t), make_basis(0, 1, cutoff)),
        ((1.0 - t) ** 2, make_basis(0, 0, cutoff)),
    ]
    return MixedTwoModeState.from_weighted(branches)
