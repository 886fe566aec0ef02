"""Minimal root of ``z = alpha(mu - mu z)`` and the associated decay coefficient."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

from gim1n.errors import ConvergenceError

if TYPE_CHECKING:
    from gim1n.kernel import QueueSpec

#: |rho - 1| below this counts as critical
CRITICAL_TOL = 1e-9


@dataclass(frozen=True)
class SigmaSolution:
    """Root ``sigma`` of ``z = r(z)`` with ``r(z) = alpha(mu - mu z)``.

    ``decay_coeff`` is ``1 + mu * alpha'(mu - mu sigma) = 1 - r'(sigma)``.
    The same number plays the role of the least root ``delta`` in the
    renewal-recurrence limit theorem, so ``delta`` is provided as an alias.
    """

    sigma: float
    residual: float
    decay_coeff: float
    iterations: int

    @property
    def delta(self) -> float:
        return self.sigma


def _decay_coeff(queue, z):
    mu = queue.mu
    return 1.0 + mu * queue.arrival.lst_derivative(mu - mu * z, 1)


def solve_sigma(queue: QueueSpec, tol: float = 1e-14, max_iter: int = 10**6,
                newton_steps: int = 50) -> SigmaSolution:
    """Least nonnegative root of ``z = alpha(mu - mu z)``.

    Fixed-point iteration from ``z = 0`` climbs monotonically to the least
    root; Newton on ``f(z) = z - alpha(mu - mu z)`` then polishes it.  ``f``
    is concave with ``f' > 0`` left of the root, so Newton started from the
    left never overshoots.  For ``rho >= 1`` the answer is exactly 1.
    """
    alpha = queue.arrival.lst
    mu = queue.mu
    if queue.rho >= 1.0 - CRITICAL_TOL:
        return SigmaSolution(1.0, 0.0, _decay_coeff(queue, 1.0), 0)

    z = 0.0
    it = 0
    while it < max_iter:
        nxt = alpha(mu - mu * z)
        it += 1
        step = nxt - z
        z = nxt
        if step <= 1e-10:
            break
    else:
        raise ConvergenceError(f"fixed-point phase did not settle in {max_iter} steps", estimate=z)

    residual = abs(z - alpha(mu - mu * z))
    for _ in range(newton_steps):
        if residual <= tol * 0.25:
            break
        f = z - alpha(mu - mu * z)
        fprime = _decay_coeff(queue, z)
        cand = z - f / fprime
        it += 1
        cand_res = abs(cand - alpha(mu - mu * cand))
        if cand_res >= residual:
            break
        z, residual = cand, cand_res
    if residual > tol:
        raise ConvergenceError(f"root residual {residual:.3e} above tolerance {tol:.1e}", estimate=z)
    return SigmaSolution(z, residual, _decay_coeff(queue, z), it)


def sigma_expansion(epsilon: float, rho2: float) -> float:
    """First-order heavy-traffic expansion ``1 - 2 epsilon / rho2`` of the root."""
    if epsilon < 0 or rho2 <= 0:
        raise ValueError("need epsilon >= 0 and rho2 > 0")
    return 1.0 - 2.0 * epsilon / rho2


def decay_coeff_from_probs(r, sigma: float) -> float:
    """``1 - sum_j j r_j sigma^(j-1)``: the decay coefficient from the series side."""
    terms = [j * r[j] * sigma ** (j - 1) for j in range(1, len(r))]
    return 1.0 - math.fsum(terms)
