"""
Two-Mode Fock States
Truncated Fock-space representation of the photonic states fed to the Bell test
"""
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

import numpy as np
from scipy.stats import poisson

from .errors import DomainError, NumericalError

NORM_TOL = 1e-12
TAIL_TOL = 1e-12


def _check_cutoff(cutoff: int) -> int:
    if int(cutoff) != cutoff or cutoff < 0:
        raise DomainError(f"cutoff must be a non-negative integer, got {cutoff}")
    return int(cutoff)


def _freeze(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class PureTwoModeState:
    """Complex amplitude table amps[n_A, n_B] over the truncated two-mode Fock basis"""
    amps: np.ndarray
    label: str = ""

    def __post_init__(self):
        amps = np.array(self.amps, dtype=complex)
        if amps.ndim != 2 or amps.shape[0] != amps.shape[1]:
            raise DomainError(f"amplitude table must be square, got shape {amps.shape}")
        norm2 = float(np.sum(np.abs(amps) ** 2))
        if abs(norm2 - 1.0) > NORM_TOL:
            raise NumericalError("state is not normalized", achieved_tolerance=abs(norm2 - 1.0))
        object.__setattr__(self, 'amps', _freeze(amps))

    @classmethod
    def from_unnormalized(cls, amps: np.ndarray, label: str = "") -> 'PureTwoModeState':
        """Renormalize a raw amplitude table and wrap it"""
        amps = np.asarray(amps, dtype=complex)
        norm = math.sqrt(float(np.sum(np.abs(amps) ** 2)))
        if norm == 0.0:
            raise DomainError("cannot normalize the zero vector")
        return cls(amps / norm, label)

    @property
    def cutoff(self) -> int:
        return self.amps.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.amps.shape[0]

    def amp(self, n_a: int, n_b: int) -> complex:
        if min(n_a, n_b) < 0:
            raise DomainError(f"Fock index ({n_a}, {n_b}) is negative")
        if max(n_a, n_b) > self.cutoff:
            return 0j
        return complex(self.amps[n_a, n_b])

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))

    def max_occupied(self) -> int:
        """Largest Fock index carrying a nonzero amplitude in either mode"""
        rows, cols = np.nonzero(self.amps)
        if len(rows) == 0:
            return 0
        return int(max(rows.max(), cols.max()))

    def with_cutoff(self, cutoff: int) -> 'PureTwoModeState':
        """Embed into a larger basis, or truncate to a smaller one that still holds every occupied level"""
        cutoff = _check_cutoff(cutoff)
        if cutoff < self.max_occupied():
            raise DomainError(f"cutoff {cutoff} below occupied level {self.max_occupied()}")
        out = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
        keep = min(cutoff, self.cutoff) + 1
        out[:keep, :keep] = self.amps[:keep, :keep]
        return PureTwoModeState(out, self.label)

    def mean_photon_number(self, mode: int) -> float:
        probs = np.abs(self.amps) ** 2
        levels = np.arange(self.dim)
        marginal = probs.sum(axis=1 - mode)
        return float(np.dot(levels, marginal))

    def vector(self) -> np.ndarray:
        """Flattened ket in the |n_A> (x) |n_B> ordering"""
        return self.amps.reshape(-1)


@dataclass(frozen=True, eq=False)
class MixedTwoModeState:
    """Weighted ensemble of pure branches sharing one cutoff"""
    branches: Tuple[Tuple[float, PureTwoModeState], ...]

    def __post_init__(self):
        branches = tuple((float(w), s) for w, s in self.branches)
        if not branches:
            raise DomainError("a mixed state needs at least one branch")
        if any(w < 0.0 for w, _ in branches):
            raise DomainError("branch weights must be non-negative")
        total = sum(w for w, _ in branches)
        if abs(total - 1.0) > NORM_TOL:
            raise NumericalError("branch weights do not sum to one", achieved_tolerance=abs(total - 1.0))
        cutoffs = {s.cutoff for _, s in branches}
        if len(cutoffs) != 1:
            raise DomainError(f"branches use different cutoffs: {sorted(cutoffs)}")
        object.__setattr__(self, 'branches', branches)

    @classmethod
    def from_pure(cls, state: PureTwoModeState) -> 'MixedTwoModeState':
        return cls(((1.0, state),))

    @classmethod
    def from_weighted(cls, branches: Iterable[Tuple[float, PureTwoModeState]]) -> 'MixedTwoModeState':
        """Build from weights that may carry rounding drift; they are rescaled to sum to one"""
        branches = [(float(w), s) for w, s in branches if w > 0.0]
        total = sum(w for w, _ in branches)
        if total <= 0.0:
            raise DomainError("total branch weight must be positive")
        return cls(tuple((w / total, s) for w, s in branches))

    @property
    def cutoff(self) -> int:
        return self.branches[0][1].cutoff

    @property
    def weights(self) -> Tuple[float, ...]:
        return tuple(w for w, _ in self.branches)

    def with_cutoff(self, cutoff: int) -> 'MixedTwoModeState':
        return MixedTwoModeState(tuple((w, s.with_cutoff(cutoff)) for w, s in self.branches))

    def density_matrix(self) -> np.ndarray:
        """Branch-summed density operator on the (cutoff+1)^2 dimensional space"""
        dim = (self.cutoff + 1) ** 2
        rho = np.zeros((dim, dim), dtype=complex)
        for w, s in self.branches:
            v = s.vector()
            rho += w * np.outer(v, v.conj())
        return rho

    def mean_photon_number(self, mode: int) -> float:
        return sum(w * s.mean_photon_number(mode) for w, s in self.branches)


def as_mixed(state) -> MixedTwoModeState:
    if isinstance(state, MixedTwoModeState):
        return state
    if isinstance(state, PureTwoModeState):
        return MixedTwoModeState.from_pure(state)
    raise DomainError(f"not a two-mode state: {type(state).__name__}")


def trace_distance(rho: MixedTwoModeState, sigma: MixedTwoModeState) -> float:
    """Half the trace norm of the difference of two branch-summed density operators"""
    cutoff = max(rho.cutoff, sigma.cutoff)
    diff = rho.with_cutoff(cutoff).density_matrix() - sigma.with_cutoff(cutoff).density_matrix()
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))


def make_basis(n_a: int, n_b: int, cutoff: int) -> PureTwoModeState:
    """Fock product state |n_A>|n_B>"""
    cutoff = _check_cutoff(cutoff)
    if min(n_a, n_b) < 0 or max(n_a, n_b) > cutoff:
        raise DomainError(f"basis index ({n_a}, {n_b}) outside 0..{cutoff}")
    amps = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
    amps[n_a, n_b] = 1.0
    return PureTwoModeState(amps, f"|{n_a}{n_b}>")


def make_psi2(cutoff: int = 2) -> PureTwoModeState:
    """(|2>|0> + |0>|2>)/sqrt(2)"""
    cutoff = _check_cutoff(cutoff)
    if cutoff < 2:
        raise DomainError(f"psi2 needs cutoff >= 2, got {cutoff}")
    amps = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
    amps[2, 0] = amps[0, 2] = 1.0 / math.sqrt(2.0)
    return PureTwoModeState(amps, "psi2")


def make_single_photon_path(cutoff: int = 1) -> PureTwoModeState:
    """(|1>|0> + |0>|1>)/sqrt(2)"""
    cutoff = _check_cutoff(cutoff)
    if cutoff < 1:
        raise DomainError(f"single-photon path state needs cutoff >= 1, got {cutoff}")
    amps = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
    amps[1, 0] = amps[0, 1] = 1.0 / math.sqrt(2.0)
    return PureTwoModeState(amps, "single_photon_path")


def tmss_tail(lam: float, cutoff: int) -> float:
    """Probability weight of the TMSS beyond the cutoff, lambda^(2(cutoff+1))"""
    return float(lam) ** (2 * (cutoff + 1))


def suggest_tmss_cutoff(lam: float, tol: float = TAIL_TOL) -> int:
    """Smallest cutoff whose TMSS truncation tail is below tol"""
    _check_lambda(lam)
    if lam == 0.0:
        return 0
    return max(0, math.ceil(math.log(tol) / (2.0 * math.log(lam))) - 1)


def _check_lambda(lam: float):
    if not 0.0 <= lam < 1.0:
        raise DomainError(f"lambda must lie in [0, 1), got {lam}")


def tmss_amplitudes(lam: float, cutoff: int) -> np.ndarray:
    """Truncated, not yet renormalized TMSS table sqrt(1-lambda^2) lambda^n on the diagonal"""
    _check_lambda(lam)
    cutoff = _check_cutoff(cutoff)
    diag = math.sqrt(1.0 - lam ** 2) * np.power(float(lam), np.arange(cutoff + 1))
    return np.diag(diag).astype(complex)


def make_tmss(lam: float, cutoff: int) -> PureTwoModeState:
    """Two-mode squeezed state sum_n lambda^n |n>|n>, renormalized after truncation"""
    amps = tmss_amplitudes(lam, cutoff)
    tail = tmss_tail(lam, cutoff)
    if tail > TAIL_TOL:
        logging.warning(f"TMSS lambda={lam} truncated at cutoff {cutoff} drops weight {tail:.3e}; "
                        f"cutoff {suggest_tmss_cutoff(lam)} would keep it below {TAIL_TOL:.0e}")
    return PureTwoModeState.from_unnormalized(amps, f"tmss(lambda={lam})")


def coherent_amplitudes(alpha: float, cutoff: int) -> np.ndarray:
    """<n|alpha> for n = 0..cutoff, real alpha"""
    cutoff = _check_cutoff(cutoff)
    ratios = np.ones(cutoff + 1)
    if cutoff > 0:
        ratios[1:] = alpha / np.sqrt(np.arange(1, cutoff + 1))
    return math.exp(-alpha ** 2 / 2.0) * np.cumprod(ratios)


def coherent_tail(alpha: float, cutoff: int) -> float:
    """Photon-number weight of |alpha> above the cutoff (Poisson survival function)"""
    return float(poisson.sf(cutoff, alpha ** 2))


def cat_amplitudes(alpha: float, cutoff: int) -> np.ndarray:
    """Unnormalized |alpha>|-alpha> + |-alpha>|alpha> on the truncated basis"""
    if not alpha > 0.0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    plus = coherent_amplitudes(alpha, cutoff)
    minus = coherent_amplitudes(-alpha, cutoff)
    return (np.outer(plus, minus) + np.outer(minus, plus)).astype(complex)


def make_cat(alpha: float, cutoff: int) -> PureTwoModeState:
    """Entangled coherent state |alpha>|-alpha> + |-alpha>|alpha>, numerically renormalized"""
    amps = cat_amplitudes(alpha, cutoff)
    tail = coherent_tail(alpha, cutoff)
    if tail > TAIL_TOL:
        logging.warning(f"cat state alpha={alpha} truncated at cutoff {cutoff} drops weight {tail:.3e} per mode")
    return PureTwoModeState.from_unnormalized(amps, f"cat(alpha={alpha})")


def cat_cutoff(alpha: float, minimum: Optional[int] = None) -> int:
    """Cutoff alpha^2 + 10 sqrt(alpha^2 + 1), enough for a per-mode tail below 1e-12"""
    cutoff = math.ceil(alpha ** 2 + 10.0 * math.sqrt(alpha ** 2 + 1.0))
    return max(cutoff, minimum or 0)
