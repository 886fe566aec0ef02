"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are also collected and repeated in the terminal summary.
"""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, CLOSED_FAMILIES, family, mm1_loss
from gim1n.asympt import approx_subcritical, heavy_traffic_approx, limit_supercritical
from gim1n.dist import Erlang, Exponential, Quadrature, completion_probs, scaled_moment, tail_cutoff
from gim1n.kernel import QueueSpec, solve_loss_table
from gim1n.roots import sigma_expansion, solve_sigma
from gim1n.sim import simulate


def report(number, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number:>2}: {detail}"
    print(line)
    ACCEPTANCE_LINES[number] = line
    assert ok, line


def test_criterion_01_mm1_oracle():
    start = time.perf_counter()
    worst = 0.0
    for rho in (0.3, 0.5, 0.9, 1.0, 2.0):
        p = solve_loss_table(QueueSpec(Exponential(rho), 1.0, 200)).p
        exact = mm1_loss(rho, np.arange(201))
        worst = max(worst, float(np.max(np.abs(p / exact - 1))))
    elapsed = time.perf_counter() - start
    report(1, worst <= 1e-10 and elapsed < 1.0,
           f"M/M/1 max rel err {worst:.2e} (<= 1e-10), {elapsed:.3f}s (< 1s)")


def test_criterion_02_subcritical_exact_mm1():
    worst = 0.0
    for rho in (0.3, 0.5, 0.7, 0.9):
        q = QueueSpec(Exponential(rho), 1.0)
        sigma = solve_sigma(q)
        for n in range(101):
            worst = max(worst, abs(approx_subcritical(q, n, sigma).value / mm1_loss(rho, n) - 1))
    report(2, worst <= 1e-12, f"geometric approximation vs M/M/1, max rel err {worst:.2e} (<= 1e-12)")


def test_criterion_03_geometric_remainder_decay():
    start = time.perf_counter()
    parts, ok = [], True
    ns = np.arange(10, 61)
    for name in ("erlang2", "hyper2"):
        q = QueueSpec(family(name, 0.7), 1.0, 60)
        table = solve_loss_table(q)
        sigma = solve_sigma(q)
        errs = np.array([abs(approx_subcritical(q, int(n), sigma).value / table.p[n] - 1) for n in ns])
        with np.errstate(divide="ignore"):
            log_err = np.log(errs)
        decreasing = bool(np.all(np.diff(log_err) < 0))
        finite = np.isfinite(log_err)
        rate = np.polyfit(ns[finite], log_err[finite], 1)[0] if finite.sum() >= 2 else math.nan
        target = math.log(sigma.sigma)
        within = abs(rate - target) <= 0.2 * abs(target)
        ok &= decreasing and within
        parts.append(f"{name} decreasing={decreasing} rate={rate:.3f} vs log sigma={target:.3f}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 1.0
    report(3, ok, "; ".join(parts) + f"; {elapsed:.3f}s")


def test_criterion_04_critical_limit():
    n = 2000
    erl = QueueSpec(Erlang(2, 2.0), 1.0, n)
    rho2 = scaled_moment(erl.arrival, 1.0, 2)
    e = n * solve_loss_table(erl).p[n]
    m = n * solve_loss_table(QueueSpec(Exponential(1.0), 1.0, n)).p[n]
    ok = abs(e - rho2 / 2) <= 0.01 and abs(m - 1.0) <= 0.001
    report(4, ok, f"n*p_n at n=2000: Erlang-2 {e:.6f} (target {rho2 / 2}), M/M/1 {m:.6f} (target 1)")


def test_criterion_05_reciprocal_slope():
    parts, ok = [], True
    for name in ("exp", "det", "erlang2"):
        q = QueueSpec(family(name, 1.0), 1.0, 1001)
        p = solve_loss_table(q).p
        target = 2.0 / scaled_moment(q.arrival, 1.0, 2)
        dev = float(np.max(np.abs(np.diff(1.0 / p[500:1002]) - target)))
        ok &= dev <= 0.01
        parts.append(f"{name} {dev:.1e}")
    p = solve_loss_table(QueueSpec(Exponential(1.0), 1.0, 1000)).p
    mm1 = float(np.max(np.abs(np.diff(1.0 / p) - 1.0)))
    ok &= mm1 <= 1e-10
    report(5, ok, "max |increment - 2/rho2| over [500,1000]: " + ", ".join(parts)
           + f"; M/M/1 all n {mm1:.1e} (<= 1e-10)")


def test_criterion_06_heavy_traffic():
    gaps = []
    for eps, n in ((0.01, 100), (0.005, 200)):
        exact = solve_loss_table(QueueSpec(Exponential(1 - eps), 1.0, n)).p[n]
        approx = heavy_traffic_approx(eps, n, 2.0).value
        gaps.append((approx, exact, abs(approx / exact - 1)))
    ok = (abs(gaps[0][0] - 0.0058198) <= 5e-8 and gaps[0][2] <= 0.05
          and gaps[1][2] <= 0.025 and gaps[1][2] < gaps[0][2])
    report(6, ok, f"(0.01,100) {gaps[0][0]:.7f} vs {gaps[0][1]:.7f} gap {gaps[0][2]:.2%}; "
                  f"(0.005,200) gap {gaps[1][2]:.2%}")


def test_criterion_07_sigma():
    mm1 = max(abs(solve_sigma(QueueSpec(Exponential(rho), 1.0)).sigma - rho) for rho in np.linspace(0.05, 0.95, 19))
    worst_res = 0.0
    for name in CLOSED_FAMILIES:
        for rho in (0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 0.999):
            worst_res = max(worst_res, solve_sigma(QueueSpec(family(name, rho), 1.0)).residual)
    epss = (0.04, 0.02, 0.01, 0.005)
    ratio_ok, parts = True, []
    for name in ("exp", "erlang2"):
        # expansion hypothesis: 1/rho = 1 + eps
        ratios = []
        for eps in epss:
            q = QueueSpec(family(name, 1 / (1 + eps)), 1.0)
            rho2 = scaled_moment(q.arrival, 1.0, 2)
            ratios.append(abs(solve_sigma(q).sigma - sigma_expansion(eps, rho2)) / eps**2)
        changes = [b / a for a, b in zip(ratios, ratios[1:])]
        ratio_ok &= all(0.5 < c < 2.0 for c in changes)
        parts.append(f"{name} " + "/".join(f"{r:.3f}" for r in ratios))
    ok = mm1 <= 1e-12 and worst_res <= 1e-14 and ratio_ok
    report(7, ok, f"M/M/1 |sigma-rho| {mm1:.1e}, max residual {worst_res:.1e}, "
                  f"error/eps^2 " + "; ".join(parts))


def test_criterion_08_supercritical():
    parts, ok = [], True
    for name in ("exp", "hyper2"):
        q = QueueSpec(family(name, 2.0), 1.0, 80)
        limit = limit_supercritical(q).value
        dev = abs(solve_loss_table(q).p[80] - limit)
        ok &= dev <= 1e-4 and limit == 0.5
        parts.append(f"{name} |p_80 - {limit}| = {dev:.1e}")
    report(8, ok, ", ".join(parts))


@pytest.mark.slow
def test_criterion_09_simulation_agreement():
    start = time.perf_counter()
    worst_z, failures, seed = 0.0, [], 2024
    first = None
    for i, name in enumerate(CLOSED_FAMILIES):
        for j, rho in enumerate((0.8, 1.0, 1.25)):
            q = QueueSpec(family(name, rho), 1.0, 20)
            table = solve_loss_table(q)
            for n in (5, 20):
                est = simulate(q.with_n(n), 10**6, 20, seed=seed + 100 * i + 10 * j + n)
                z = abs(est.estimate - table.p[n]) / est.std_error
                worst_z = max(worst_z, z)
                if z > 4:
                    failures.append(f"{name}/rho={rho}/n={n} z={z:.2f}")
                if first is None:
                    first = (q.with_n(n), est)
    elapsed = time.perf_counter() - start
    again = simulate(first[0], 10**6, 20, seed=first[1].seed)
    repro = again == first[1]
    ok = not failures and repro and elapsed < 120
    report(9, ok, f"24 cells, max |z| {worst_z:.2f} (<= 4){' ' + ','.join(failures) if failures else ''}, "
                  f"reproducible={repro}, grid {elapsed:.1f}s (< 120s)")


def test_criterion_10_normalization():
    models = [(family(name, rho), mu) for name in CLOSED_FAMILIES for rho in (0.3, 0.8, 1.0, 1.25, 2.0)
              for mu in (1.0, 7.5)]
    models.append((Quadrature(lambda x: 0.5, 2.0), 1.0))
    models.append((Quadrature(lambda x: 4 * x * math.exp(-2 * x), 40.0), 1.3))
    worst_norm, worst_r01 = 0.0, 0.0
    for model, mu in models:
        r = completion_probs(model, mu, tail_cutoff(model, mu))
        worst_norm = max(worst_norm, abs(math.fsum(r) - 1.0))
        worst_r01 = max(worst_r01, r[0] + r[1])
    ok = worst_norm <= 1e-10 and worst_r01 < 1.0
    report(10, ok, f"{len(models)} models, max |sum r_j - 1| {worst_norm:.1e} (<= 1e-10), "
                   f"max r0+r1 {worst_r01:.4f} (< 1)")
