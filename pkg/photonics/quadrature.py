"""
Quadrature Binning
Oscillator eigenfunctions, interval overlap integrals and the binning-region
effect operators used for homodyne statistics at any quadrature angle
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Tuple

import numpy as np
from scipy import integrate

from .errors import DomainError, NumericalError
from .fock import as_mixed

QUAD_ABS_TOL = 1e-12
QUAD_LIMIT = 200
HERMITIAN_TOL = 1e-12
EFFECT_TOL = 1e-9

_PI_QUARTER = math.pi ** -0.25


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise DomainError(f"interval bounds must be finite, got [{lo}, {hi}]")
        if not lo < hi:
            raise DomainError(f"interval needs lo < hi, got [{lo}, {hi}]")
        object.__setattr__(self, 'lo', lo)
        object.__setattr__(self, 'hi', hi)

    @property
    def is_symmetric(self) -> bool:
        return self.lo == -self.hi


@dataclass(frozen=True)
class BinRegion:
    """Union of intervals mapped to outcome +1; its complement maps to -1"""
    plus_intervals: Tuple[Interval, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'plus_intervals', _canonicalize(self.plus_intervals))

    @classmethod
    def symmetric(cls, z: float) -> 'BinRegion':
        """The region [-z, z]; z = 0 gives the empty region (every result maps to -1)"""
        if z == 0.0:
            return cls(())
        if not z > 0.0:
            raise DomainError(f"binning half-width z must be non-negative, got {z}")
        return cls((Interval(-z, z),))

    @classmethod
    def from_bounds(cls, bounds: Iterable[Tuple[float, float]]) -> 'BinRegion':
        return cls(tuple(Interval(lo, hi) for lo, hi in bounds))

    @property
    def is_empty(self) -> bool:
        return not self.plus_intervals

    def contains(self, x: float) -> bool:
        return any(iv.lo <= x <= iv.hi for iv in self.plus_intervals)


def _canonicalize(intervals: Iterable[Interval]) -> Tuple[Interval, ...]:
    # sorted, with overlapping or touching intervals merged
    merged = []
    for iv in sorted(intervals, key=lambda i: (i.lo, i.hi)):
        if merged and iv.lo <= merged[-1].hi:
            if iv.hi > merged[-1].hi:
                merged[-1] = Interval(merged[-1].lo, iv.hi)
        else:
            merged.append(iv)
    return tuple(merged)


@dataclass(frozen=True)
class QuadratureAngle:
    """Rotated quadrature angle in radians; 0 is X and pi/2 is P"""
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, 'theta', float(self.theta) % (2.0 * math.pi))


X_QUADRATURE = QuadratureAngle(0.0)
P_QUADRATURE = QuadratureAngle(math.pi / 2.0)


@dataclass(frozen=True, eq=False)
class RegionOperator:
    """Hermitian measurement effect over Fock levels 0..cutoff"""
    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise DomainError(f"effect must be a square matrix, got shape {entries.shape}")
        asym = float(np.max(np.abs(entries - entries.conj().T))) if entries.size else 0.0
        if asym > HERMITIAN_TOL:
            raise NumericalError("effect operator is not Hermitian", achieved_tolerance=asym)
        entries.setflags(write=False)
        object.__setattr__(self, 'entries', entries)

    @property
    def cutoff(self) -> int:
        return self.entries.shape[0] - 1

    def complement(self) -> 'RegionOperator':
        return RegionOperator(np.eye(self.cutoff + 1) - self.entries)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)

    def is_effect(self, tol: float = EFFECT_TOL) -> bool:
        """True when 0 <= M <= 1 in the operator sense"""
        ev = self.eigenvalues()
        return bool(ev.min() >= -tol and ev.max() <= 1.0 + tol)


def hermite_fns(nmax: int, x) -> np.ndarray:
    """
    Normalized oscillator eigenfunctions phi_0..phi_nmax evaluated at x

    Uses the upward recurrence on the normalized functions so factorials never appear.
    Returns an array of shape (nmax + 1,) + shape(x).
    """
    if nmax < 0:
        raise DomainError(f"level must be non-negative, got {nmax}")
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = _PI_QUARTER * np.exp(-0.5 * x * x)
    if nmax >= 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for n in range(1, nmax):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * x * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def hermite_fn(n: int, x: float) -> float:
    return float(hermite_fns(n, x)[n])


def overlap(m: int, n: int, interval: Interval) -> float:
    """Integral of phi_m * phi_n over the interval, to absolute tolerance 1e-12"""
    if interval.is_symmetric and (m + n) % 2 == 1:
        return 0.0
    top = max(m, n)

    def integrand(x):
        phis = hermite_fns(top, x)
        return phis[m] * phis[n]

    value, err = integrate.quad(integrand, interval.lo, interval.hi, epsabs=QUAD_ABS_TOL,
                                epsrel=0.0, limit=QUAD_LIMIT, full_output=1)[:2]
    if err > QUAD_ABS_TOL:
        logging.error(f"overlap({m}, {n}) over [{interval.lo}, {interval.hi}] did not converge: {err:.3e}")
        raise NumericalError(f"overlap integral ({m}, {n}) failed to converge", achieved_tolerance=err)
    return float(value)


def region_overlap(m: int, n: int, region: BinRegion, outcome: int = +1) -> float:
    """
    Overlap of phi_m and phi_n over the +1 region, or over its complement

    The complement is never integrated directly: it equals delta_mn minus the finite part.
    """
    plus = sum(overlap(m, n, iv) for iv in region.plus_intervals)
    if outcome == +1:
        return plus
    if outcome == -1:
        return float(m == n) - plus
    raise DomainError(f"outcome must be +1 or -1, got {outcome}")


@lru_cache(maxsize=256)
def _interval_overlap_matrix(nmax: int, lo: float, hi: float) -> np.ndarray:
    def integrand(x):
        phis = hermite_fns(nmax, x)
        return np.outer(phis, phis)

    result, err, info = integrate.quad_vec(integrand, lo, hi, epsabs=QUAD_ABS_TOL, epsrel=0.0,
                                           norm='max', limit=QUAD_LIMIT, full_output=True)
    # status 2 means rounding noise dominates, which is acceptable once err is within tolerance
    if info.status not in (0, 2) or err > QUAD_ABS_TOL:
        logging.error(f"overlap matrix up to level {nmax} over [{lo}, {hi}] stopped at error {err:.3e}")
        raise NumericalError(f"overlap matrix over [{lo}, {hi}] failed to converge", achieved_tolerance=err)
    logging.debug(f"overlap matrix nmax={nmax} [{lo:.6g}, {hi:.6g}]: {info.intervals.shape[0]} panels")
    result = 0.5 * (result + result.T)
    if lo == -hi:
        parity = np.add.outer(np.arange(nmax + 1), np.arange(nmax + 1)) % 2 == 1
        result[parity] = 0.0
    result.setflags(write=False)
    return result


def region_overlap_matrix(nmax: int, region: BinRegion) -> np.ndarray:
    """All overlaps 0..nmax over the +1 region, one adaptive vector quadrature per interval"""
    total = np.zeros((nmax + 1, nmax + 1))
    for iv in region.plus_intervals:
        total = total + _interval_overlap_matrix(nmax, iv.lo, iv.hi)
    return total


def rotation_phases(theta: QuadratureAngle, cutoff: int) -> np.ndarray:
    """Matrix of e^{i(m-n)theta}; level n picks up e^{-in theta} in the rotated amplitude"""
    levels = np.arange(cutoff + 1)
    return np.exp(1j * theta.theta * np.subtract.outer(levels, levels))


@lru_cache(maxsize=512)
def region_operator(theta: QuadratureAngle, region: BinRegion, cutoff: int) -> RegionOperator:
    """Effect for outcome +1 of a binned homodyne measurement at angle theta"""
    if cutoff < 0:
        raise DomainError(f"cutoff must be non-negative, got {cutoff}")
    return RegionOperator(rotation_phases(theta, cutoff) * region_overlap_matrix(cutoff, region))


def joint_quadrature_density(state, theta_a: QuadratureAngle, theta_b: QuadratureAngle, x, y) -> np.ndarray:
    """
    Joint density of the rotated quadratures of modes A and B on the grid x (rows) by y (columns)

    Computed directly from the Fock amplitudes, level n carrying e^{-in theta}.
    """
    state = as_mixed(state)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    levels = np.arange(state.cutoff + 1)
    basis_a = np.exp(-1j * theta_a.theta * levels)[:, None] * hermite_fns(state.cutoff, x)
    basis_b = np.exp(-1j * theta_b.theta * levels)[:, None] * hermite_fns(state.cutoff, y)
    density = np.zeros((x.size, y.size))
    for w, branch in state.branches:
        wavefunction = basis_a.T @ branch.amps @ basis_b
        density += w * np.abs(wavefunction) ** 2
    return density
