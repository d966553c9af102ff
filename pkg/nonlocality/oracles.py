"""
Gaussian Reference for the Two-Mode Squeezed State
Closed-form joint density of rotated quadratures, independent of the Fock computation
"""
import math

import numpy as np
from scipy.stats import multivariate_normal

from photonics.errors import DomainError


def tmss_covariance(lam: float, theta_a: float, theta_b: float) -> np.ndarray:
    """
    Covariance of (q_A(theta_a), q_B(theta_b)) with vacuum variance 1/2

    Each variance is (1 + lambda^2) / (2 (1 - lambda^2)) and the cross term is
    lambda cos(theta_a + theta_b) / (1 - lambda^2).
    """
    if not 0.0 <= lam < 1.0:
        raise DomainError(f"lambda must lie in [0, 1), got {lam}")
    var = (1.0 + lam ** 2) / (2.0 * (1.0 - lam ** 2))
    cov = lam * math.cos(theta_a + theta_b) / (1.0 - lam ** 2)
    return np.array([[var, cov], [cov, var]])


def tmss_gaussian_density(lam: float, theta_a: float, theta_b: float, x, y) -> np.ndarray:
    """Density on the grid x (rows) by y (columns)"""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    grid = np.stack(np.meshgrid(x, y, indexing='ij'), axis=-1)
    dist = multivariate_normal(mean=[0.0, 0.0], cov=tmss_covariance(lam, theta_a, theta_b))
    return dist.pdf(grid).reshape(x.size, y.size)
