"""
Finite-Statistics Sampler
Monte Carlo estimate of the CHSH value from a finite number of shots drawn
from the exact binned joint tables
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from photonics.errors import DomainError
from photonics.measurement import Setting, scenario
from .experiments import grid_map
from .functionals import PAIR_ORDER, chsh_max

MIN_SHOTS = 4
# shots per independently seeded generator; part of the reproducibility contract
SHOT_BLOCK = 65536
# outcome index k = 2 * i_a + i_b over (++, +-, -+, --); product ab per index
_OUTCOME_PRODUCT = np.array([1, -1, -1, 1])


@dataclass(frozen=True)
class McEstimate:
    shots: int
    S_hat: float
    std_err: float
    seed: int
    valid: bool = True
    counts: Tuple[int, ...] = ()
    minus_position: int = 3
    sign: int = +1


def _sample_block(cdfs: np.ndarray, seed: int, block: int, size: int) -> Tuple[np.ndarray, np.ndarray]:
    """Shot counts and summed outcome products per setting pair for one block of shots"""
    rng = np.random.default_rng([seed, block])
    pairs = rng.integers(0, 4, size=size)
    u = rng.random(size)
    outcomes = (u[:, None] >= cdfs[pairs, :3]).sum(axis=1)
    products = _OUTCOME_PRODUCT[outcomes]
    counts = np.bincount(pairs, minlength=4)
    sums = np.bincount(pairs, weights=products, minlength=4).astype(np.int64)
    return counts, sums


def mc_sample(state, a1: Setting, a2: Setting, b1: Setting, b2: Setting, shots: int, seed: int,
              workers: Optional[int] = None) -> McEstimate:
    """
    Estimate S from shots with uniformly random setting pairs

    Shots are grouped into fixed blocks whose generator is seeded by (seed, block
    index), so the result depends only on (seed, shots) and never on how blocks
    are scheduled. The sign arrangement is the one maximizing the exact value.
    """
    if int(shots) != shots or shots < MIN_SHOTS:
        raise DomainError(f"need at least {MIN_SHOTS} shots, got {shots}")
    if not 0 <= seed < 2 ** 64:
        raise DomainError(f"seed must be a 64-bit unsigned integer, got {seed}")
    shots, seed = int(shots), int(seed)

    tables = scenario(state, a1, a2, b1, b2)
    exact = chsh_max(tables)
    probs = np.array([tables.table(i, j).p.reshape(-1) for i, j in PAIR_ORDER])
    cdfs = np.cumsum(probs, axis=1)

    blocks = [(b, min(SHOT_BLOCK, shots - b * SHOT_BLOCK)) for b in range(math.ceil(shots / SHOT_BLOCK))]
    results = grid_map(lambda blk: _sample_block(cdfs, seed, blk[0], blk[1]), blocks, workers)
    counts = sum(r[0] for r in results)
    sums = sum(r[1] for r in results)

    if np.any(counts == 0):
        logging.warning(f"mc: a setting pair received no shots (counts {counts.tolist()}); estimate invalid")
        return McEstimate(shots, math.nan, math.nan, seed, False, tuple(int(c) for c in counts),
                          exact.minus_position, exact.sign)

    e_hat = sums / counts
    signs = np.ones(4)
    signs[exact.minus_position] = -1.0
    s_hat = float(exact.sign * np.dot(signs, e_hat))
    # binomial variance of each correlator, floored at 1/n so deterministic pairs keep a nonzero error
    variances = np.maximum(1.0 - e_hat ** 2, 1.0 / counts) / counts
    std_err = float(math.sqrt(variances.sum()))
    logging.info(f"mc: {shots} shots, seed {seed}: S_hat={s_hat:.6f} +/- {std_err:.6f} (exact {exact.S:.6f})")
    return McEstimate(shots, s_hat, std_err, seed, True, tuple(int(c) for c in counts),
                      exact.minus_position, exact.sign)
