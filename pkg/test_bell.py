"""
Tests for correlators, the CHSH and Clauser-Horne functionals and the efficiency threshold
"""
import itertools
import math
import sys
import os

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from nonlocality.experiments import bisect_eta, psi2_scenario
from nonlocality.functionals import ch, chsh, chsh_max, correlator, eta_threshold
from photonics.channels import closed_form_rho
from photonics.errors import DomainError
from photonics.fock import make_psi2
from photonics.measurement import JointTable, QuadratureBinning, ThresholdDetector, joint_table


def test_correlator_of_fixed_tables():
    assert correlator(JointTable([[1.0, 0.0], [0.0, 0.0]])) == pytest.approx(1.0)
    assert correlator(JointTable([[0.0, 0.5], [0.5, 0.0]])) == pytest.approx(-1.0)
    assert correlator(JointTable([[0.25, 0.25], [0.25, 0.25]])) == pytest.approx(0.0)


def test_ideal_psi2_violation():
    result = chsh(psi2_scenario(0.83))
    assert result.S == pytest.approx(2.25, abs=0.01)
    assert result.violates
    assert result.minus_label == "NN"
    best = chsh_max(psi2_scenario(0.83))
    assert best.S == pytest.approx(result.S, abs=1e-12)
    assert best.minus_position == 3


def test_chsh_max_dominates_every_placement():
    st = psi2_scenario(0.5, t=0.9, eta=0.8)
    best = chsh_max(st)
    for position in range(4):
        assert best.S >= abs(chsh(st, position).S) - 1e-15
    with pytest.raises(DomainError):
        chsh(st, 4)


def test_chsh_clauser_horne_identity():
    for t, eta, z in itertools.product((0.7, 0.9, 1.0), (0.5, 0.8, 1.0), (0.3, 0.83, 1.5)):
        st = psi2_scenario(z, t, eta)
        assert chsh(st).S == pytest.approx(4 * ch(st).value + 2, abs=1e-12)


def test_lossless_clauser_horne_value():
    st = psi2_scenario(0.83)
    assert ch(st).value == pytest.approx((chsh(st).S - 2) / 4, abs=1e-12)
    assert ch(st).violates
    assert ch(st).components['p_NN'] == pytest.approx(0.0, abs=1e-15)


def test_lossy_click_identity():
    z_values = np.linspace(0.3, 1.5, 5)
    reference = {z: joint_table(make_psi2(4), ThresholdDetector(1.0), QuadratureBinning.x(z)).prob(+1, +1)
                 for z in z_values}
    for t, eta, z in itertools.product(np.linspace(0.2, 1.0, 5), np.linspace(0.2, 1.0, 5), z_values):
        p_nx = joint_table(closed_form_rho(t, 4), ThresholdDetector(eta), QuadratureBinning.x(z)).prob(+1, +1)
        assert abs(p_nx - t * eta * (2 - t * eta) * reference[z]) < 1e-10


@pytest.mark.parametrize("t", [1.0, 0.95, 0.9])
def test_threshold_agrees_with_root_finding(t):
    z = 0.83
    assert eta_threshold(t, z) == pytest.approx(bisect_eta(t, z), abs=1e-8)


def test_threshold_edge_cases():
    assert eta_threshold(0.0, 0.83) == math.inf
    # far from the optimum no efficiency helps at low transmission
    assert not eta_threshold(0.5, 0.83) <= 1.0
    with pytest.raises(DomainError):
        eta_threshold(1.2, 0.83)
