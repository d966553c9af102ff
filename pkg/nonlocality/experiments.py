"""
Bell Experiments
Scenario builders, parameter scans, the binning optimizer, the
efficiency-transmission frontier and the non-violation search
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from config_manager import get_config_manager
from photonics.channels import closed_form_rho
from photonics.errors import DomainError, NumericalError
from photonics.fock import cat_cutoff, make_cat, make_single_photon_path, make_tmss, suggest_tmss_cutoff
from photonics.measurement import QuadratureBinning, ScenarioTables, ThresholdDetector, scenario
from photonics.quadrature import BinRegion, P_QUADRATURE, X_QUADRATURE
from .functionals import CHSHResult, ch, chsh_max, eta_threshold

MONOTONE_TOL = 1e-6
STATE_KINDS = ('single_photon_path', 'cat')


@dataclass(frozen=True)
class ScanPoint:
    params: Dict[str, float]
    S: float
    arrangement: int
    sign: int = +1
    label: str = ""

    def __post_init__(self):
        if not math.isfinite(self.S):
            raise NumericalError(f"CHSH value is not finite at {self.params}")

    @classmethod
    def from_result(cls, params: Dict[str, float], result: CHSHResult, label: str = "") -> 'ScanPoint':
        return cls(dict(params), result.S, result.minus_position, result.sign, label)


@dataclass(frozen=True)
class FrontierPoint:
    """Minimal detector efficiency at transmission t and the binning that achieves it"""
    t: float
    eta_min: float
    z_opt: float
    eta_bisect: Optional[float] = field(default=None, compare=False)

    @property
    def feasible(self) -> bool:
        return 0.0 < self.eta_min <= 1.0


def grid_map(func: Callable, items: Iterable, workers: Optional[int] = None) -> list:
    """Evaluate func over items, optionally on a thread pool; order always follows items"""
    items = list(items)
    if workers is None:
        workers = get_config_manager().get_workers()
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def _psi2_cutoff(cutoff: Optional[int]) -> int:
    return int(cutoff if cutoff is not None else get_config_manager().get('cutoffs.psi2', 4))


def psi2_scenario(z: float, t: float = 1.0, eta: float = 1.0, cutoff: Optional[int] = None) -> ScenarioTables:
    """Both parties choose between X binned on [-z, z] and a threshold detector, on the lossy state"""
    x_bin = QuadratureBinning.x(z)
    detector = ThresholdDetector(eta)
    return scenario(closed_form_rho(t, _psi2_cutoff(cutoff)), x_bin, detector, x_bin, detector)


def psi2_chsh(z: float, t: float = 1.0, eta: float = 1.0, cutoff: Optional[int] = None) -> CHSHResult:
    return chsh_max(psi2_scenario(z, t, eta, cutoff))


def _check_positive(grid: Sequence[float], name: str):
    for value in grid:
        if not value > 0.0:
            raise DomainError(f"{name} values must be positive, got {value}")


def psi2_scan(z_grid: Sequence[float], t: float = 1.0, eta: float = 1.0,
              cutoff: Optional[int] = None, workers: Optional[int] = None) -> List[ScanPoint]:
    """CHSH value along a z grid for the lossy two-photon state"""
    _check_positive(z_grid, "z")

    def evaluate(z):
        return ScanPoint.from_result({'z': float(z), 't': t, 'eta': eta}, psi2_chsh(z, t, eta, cutoff))

    return grid_map(evaluate, z_grid, workers)


def psi2_curves(z_grid: Sequence[float], t_values: Sequence[float] = (1.0, 0.95, 0.9, 0.85),
                eta: float = 1.0, workers: Optional[int] = None) -> Dict[float, List[ScanPoint]]:
    """One psi2_scan per transmission, ideal line first"""
    return {t: psi2_scan(z_grid, t, eta, workers=workers) for t in t_values}


def two_stage_minimize(objective: Callable[[float], float], z_max: float, grid_points: int,
                       xtol: float, workers: Optional[int] = None) -> Tuple[float, float]:
    """
    Coarse grid over (0, z_max] followed by golden-section refinement

    The golden stage only runs when the grid minimum is strictly bracketed by its
    neighbours; otherwise the grid point is returned as is.
    """
    zs = np.linspace(z_max / grid_points, z_max, grid_points)
    values = grid_map(objective, zs, workers)
    i = int(np.argmin(values))
    best_z, best_value = float(zs[i]), float(values[i])
    bracketed = 0 < i < grid_points - 1 and values[i - 1] > best_value < values[i + 1]
    if not (bracketed and math.isfinite(best_value)):
        logging.debug(f"grid optimum z={best_z:.6g} not bracketed, skipping refinement")
        return best_z, best_value

    res = optimize.minimize_scalar(objective, bracket=(zs[i - 1], zs[i], zs[i + 1]), method='golden',
                                   options={'xtol': xtol / (2.0 * best_z)})
    logging.debug(f"golden refinement: grid z={best_z:.6g} -> z={float(res.x):.8g} "
                  f"({res.nfev} evaluations)")
    if res.fun <= best_value:
        return float(res.x), float(res.fun)
    return best_z, best_value


def _optimizer_settings(z_max, grid_points, xtol):
    settings = get_config_manager().get_optimizer_settings()
    return (z_max or settings['z_max'], grid_points or settings['grid_points'], xtol or settings['xtol'])


def optimize_z(t: float = 1.0, eta: float = 1.0, cutoff: Optional[int] = None,
               z_max: Optional[float] = None, grid_points: Optional[int] = None,
               xtol: Optional[float] = None, workers: Optional[int] = None) -> Tuple[float, float]:
    """Binning half-width maximizing the CHSH value; returns (z_opt, S_opt)"""
    z_max, grid_points, xtol = _optimizer_settings(z_max, grid_points, xtol)
    z_opt, neg_s = two_stage_minimize(lambda z: -psi2_chsh(z, t, eta, cutoff).S, z_max, grid_points, xtol, workers)
    logging.info(f"optimize_z(t={t}, eta={eta}): z={z_opt:.6f}, S={-neg_s:.6f}")
    return z_opt, -neg_s


def bisect_eta(t: float, z: float, cutoff: Optional[int] = None) -> float:
    """Smallest efficiency with a positive Clauser-Horne value, found on the full scenario"""
    def ch_value(eta):
        return ch(psi2_scenario(z, t, eta, cutoff)).value

    if ch_value(1.0) <= 0.0:
        return math.inf
    return float(optimize.brentq(ch_value, 0.0, 1.0, xtol=1e-12))


def _check_frontier(points: List[FrontierPoint]):
    # more transmission never demands a better detector
    ordered = sorted((p for p in points if p.feasible), key=lambda p: p.t)
    for lower, upper in zip(ordered, ordered[1:]):
        if upper.eta_min > lower.eta_min + MONOTONE_TOL:
            raise NumericalError(f"frontier increases from t={lower.t} to t={upper.t}",
                                 achieved_tolerance=upper.eta_min - lower.eta_min)


def frontier(t_grid: Sequence[float], cross_check: Optional[bool] = None, cutoff: Optional[int] = None,
             z_max: Optional[float] = None, grid_points: Optional[int] = None,
             xtol: Optional[float] = None, workers: Optional[int] = None) -> List[FrontierPoint]:
    """
    Minimal detector efficiency for a violation at each transmission, z optimized per point

    Each feasible point is cross-checked against root finding on the full
    Clauser-Horne evaluation. Infeasible transmissions are kept and flagged.
    """
    for t in t_grid:
        if not 0.0 < t <= 1.0:
            raise DomainError(f"frontier transmissions must lie in (0, 1], got {t}")
    config = get_config_manager()
    if cross_check is None:
        cross_check = bool(config.get('frontier.cross_check', True))
    agreement = float(config.get('frontier.agreement', 1e-4))
    z_max, grid_points, xtol = _optimizer_settings(z_max, grid_points, xtol)
    cutoff = _psi2_cutoff(cutoff)

    def evaluate(t):
        z_opt, eta_min = two_stage_minimize(lambda z: eta_threshold(t, z, cutoff), z_max, grid_points, xtol,
                                            workers=1)
        point = FrontierPoint(float(t), eta_min, z_opt)
        if not point.feasible:
            logging.info(f"no violation possible at t={t}: best threshold {eta_min:.6g} at z={z_opt:.4f}")
            return point
        if not cross_check:
            return point
        eta_b = bisect_eta(t, z_opt, cutoff)
        if abs(eta_b - eta_min) > agreement:
            raise NumericalError(f"efficiency threshold at t={t}, z={z_opt} disagrees with root finding "
                                 f"({eta_min:.8f} vs {eta_b:.8f})", achieved_tolerance=abs(eta_b - eta_min))
        return FrontierPoint(float(t), eta_min, z_opt, eta_b)

    points = grid_map(evaluate, t_grid, workers)
    _check_frontier(points)
    return points


def tmss_cutoff(lambda_grid: Sequence[float], cutoff: Optional[int] = None) -> int:
    if cutoff is not None:
        return int(cutoff)
    floor = int(get_config_manager().get('cutoffs.tmss', 60))
    return max(floor, suggest_tmss_cutoff(max(lambda_grid)))


def tmss_settings(z: float, eta: float = 1.0, z_b: Optional[float] = None):
    """Alice {X, N}, Bob {P, N}; both detectors with efficiency eta"""
    detector = ThresholdDetector(eta)
    return (QuadratureBinning.x(z), detector,
            QuadratureBinning.p(z if z_b is None else z_b), detector)


def tmss_scan(lambda_grid: Sequence[float], z_grid: Sequence[float], cutoff: Optional[int] = None,
              eta: float = 1.0, z_b: Optional[float] = None, workers: Optional[int] = None) -> List[ScanPoint]:
    """
    CHSH value of the two-mode squeezed state over a (lambda, z) grid

    Lines are lossless. Results are ordered lambda-major.
    """
    _check_positive(z_grid, "z")
    cutoff = tmss_cutoff(lambda_grid, cutoff)
    logging.info(f"TMSS scan over {len(lambda_grid)}x{len(z_grid)} points at cutoff {cutoff}, eta={eta}")

    def evaluate_lambda(lam):
        state = make_tmss(lam, cutoff)
        points = []
        for z in z_grid:
            params = {'lambda': float(lam), 'z': float(z)}
            if z_b is not None:
                params['z_b'] = float(z_b)
            result = chsh_max(scenario(state, *tmss_settings(z, eta, z_b)))
            points.append(ScanPoint.from_result(params, result))
        return points

    return [p for row in grid_map(evaluate_lambda, lambda_grid, workers) for p in row]


def _angle_pairs(include_p: bool):
    pairs = [(X_QUADRATURE, X_QUADRATURE)]
    if include_p:
        pairs += [(X_QUADRATURE, P_QUADRATURE), (P_QUADRATURE, X_QUADRATURE), (P_QUADRATURE, P_QUADRATURE)]
    return pairs


def nonviolation_scan(state_kind: str, param_grid: Optional[Sequence[float]], z_grid: Sequence[float],
                      cutoff: Optional[int] = None, include_p: bool = True,
                      workers: Optional[int] = None) -> ScanPoint:
    """
    Largest CHSH value found for the single-photon path state or the cat state

    Each party measures a threshold detector or a quadrature binned on [-z, z];
    X and P quadratures are both tried. z = 0 is allowed as a degenerate limit.
    """
    if state_kind not in STATE_KINDS:
        raise DomainError(f"state kind must be one of {STATE_KINDS}, got {state_kind!r}")
    for z in z_grid:
        if z < 0.0:
            raise DomainError(f"z values must be non-negative, got {z}")

    if state_kind == 'cat':
        if not param_grid:
            raise DomainError("cat scan needs at least one alpha")
        _check_positive(param_grid, "alpha")
        if cutoff is None:
            cutoff = cat_cutoff(max(param_grid), minimum=int(get_config_manager().get('cutoffs.cat', 60)))
        states = [(float(alpha), make_cat(alpha, cutoff)) for alpha in param_grid]
    else:
        states = [(None, make_single_photon_path(cutoff if cutoff is not None else 1))]

    detector = ThresholdDetector(1.0)
    angle_pairs = _angle_pairs(include_p)

    def best_at(z):
        best = None
        region = BinRegion.symmetric(z)
        for param, state in states:
            for angle_a, angle_b in angle_pairs:
                bin_a = QuadratureBinning(angle_a, region)
                bin_b = QuadratureBinning(angle_b, region)
                result = chsh_max(scenario(state, bin_a, detector, bin_b, detector))
                if best is None or result.S > best.S:
                    params = {'z': float(z)}
                    if param is not None:
                        params['alpha'] = param
                    best = ScanPoint.from_result(params, result, f"{bin_a.label}{bin_b.label}")
        return best

    best = max(grid_map(best_at, z_grid, workers), key=lambda p: p.S)
    logging.info(f"{state_kind}: largest CHSH value {best.S:.12f} at {best.params} ({best.label})")
    return best
