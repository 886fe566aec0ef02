import math

import numpy as np
import pytest

from conftest import CLOSED_FAMILIES, family
from gim1n.dist import Deterministic, Erlang, Exponential, completion_probs, tail_cutoff
from gim1n.kernel import QueueSpec
from gim1n.roots import decay_coeff_from_probs, sigma_expansion, solve_sigma


@pytest.mark.parametrize("rho", [0.1, 0.5, 0.9, 0.99])
def test_mm1_root_is_rho(rho):
    sol = solve_sigma(QueueSpec(Exponential(rho), 1.0))
    assert sol.sigma == pytest.approx(rho, abs=1e-12)
    assert sol.residual <= 1e-14
    assert sol.delta == sol.sigma


@pytest.mark.parametrize("name", CLOSED_FAMILIES)
@pytest.mark.parametrize("rho", [1.0, 1.3, 4.0])
def test_root_is_one_at_or_above_criticality(name, rho):
    assert solve_sigma(QueueSpec(family(name, rho), 1.0)).sigma == 1.0


@pytest.mark.parametrize("name", CLOSED_FAMILIES)
@pytest.mark.parametrize("rho", [0.2, 0.6, 0.9, 0.999])
def test_root_properties(name, rho):
    q = QueueSpec(family(name, rho), 1.0)
    sol = solve_sigma(q)
    alpha = q.arrival.lst
    assert 0 < sol.sigma < 1 - 1e-9
    assert abs(sol.sigma - alpha(1.0 - sol.sigma)) <= 1e-14
    assert sol.decay_coeff > 0
    # f(0) < 0 and f > 0 strictly between the root and 1
    assert 0 - alpha(1.0) < 0
    mid = 0.5 * (sol.sigma + 1)
    assert mid - alpha(1.0 - mid) > 0


@pytest.mark.parametrize("name", CLOSED_FAMILIES)
@pytest.mark.parametrize("rho", [0.3, 0.7, 0.9])
def test_decay_coeff_two_routes(name, rho):
    q = QueueSpec(family(name, rho), 1.0)
    sol = solve_sigma(q)
    r = completion_probs(q.arrival, 1.0, tail_cutoff(q.arrival, 1.0, 1e-18) + 200)
    assert sol.decay_coeff == pytest.approx(decay_coeff_from_probs(r, sol.sigma), abs=1e-8)


def test_deterministic_root_self_consistent():
    q = QueueSpec(Deterministic(1.25), 1.0)
    sol = solve_sigma(q)
    assert abs(sol.sigma - math.exp(-1.25 * (1 - sol.sigma))) <= 1e-14


def test_expansion_examples():
    assert sigma_expansion(0.01, 2.0) == pytest.approx(0.99)
    assert sigma_expansion(0.0, 1.7) == 1.0
    assert sigma_expansion(0.05, 1.5) == pytest.approx(1 - 0.1 / 1.5)


def test_expansion_error_is_second_order_for_erlang():
    # rho = 1 - eps with the shape held fixed; rho2 at criticality is 1.5
    ratios = []
    for eps in (0.04, 0.02, 0.01, 0.005):
        sol = solve_sigma(QueueSpec(Erlang(2, 2 * (1 - eps)), 1.0))
        ratios.append(abs(sol.sigma - sigma_expansion(eps, 1.5)) / eps**2)
    assert max(ratios) / min(ratios) < 2
    sol = solve_sigma(QueueSpec(Erlang(2, 1.9), 1.0))
    assert abs(sol.sigma - sigma_expansion(0.05, 1.5)) <= 2 * max(ratios) * 0.05**2
