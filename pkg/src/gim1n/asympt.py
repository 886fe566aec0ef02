"""Large-buffer approximations of the loss probability and regime dispatch.

Each estimate carries a ``source`` tag naming the formula it came from and
the moment conditions it relies on:

=========  ==========================================================
``Eq35``   subcritical, ``(1-rho) K s^n / (1 - rho - rho K s^n)``
``Eq36``   critical, ``n p_n -> rho_2 / 2``
``Eq37``   supercritical limit ``(rho - 1) / rho``
``Eq312``  critical with finite third moment, ``rho_2 / (2n)``
``Eq313``  critical, ``1/p_{n+1} - 1/p_n -> 2 / rho_2``
``Eq317``  heavy traffic ``rho = 1 - eps``, ``eps n = C > 0``
``Eq319``  near-critical ``eps n -> 0``, ``rho_2 / (2n)``
=========  ==========================================================
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from gim1n.dist import scaled_moment
from gim1n.errors import DegenerateModelError, OutOfRegimeError
from gim1n.kernel import QueueSpec
from gim1n.roots import CRITICAL_TOL, SigmaSolution, solve_sigma

__all__ = [
    "Regime",
    "Source",
    "AsymptoticEstimate",
    "classify",
    "approx_subcritical",
    "limit_supercritical",
    "approx_critical",
    "reciprocal_increment",
    "heavy_traffic_approx",
    "near_critical_approx",
    "HEAVY_THRESHOLD",
]

#: eps * n above this is treated as heavy traffic, at or below as near-critical
HEAVY_THRESHOLD = 0.1


class Regime(str, enum.Enum):
    SUBCRITICAL = "Subcritical"
    CRITICAL = "Critical"
    SUPERCRITICAL = "Supercritical"
    HEAVY_TRAFFIC = "HeavyTraffic"
    NEAR_CRITICAL = "NearCritical"


class Source(str, enum.Enum):
    EQ35 = "Eq35"
    EQ36 = "Eq36"
    EQ37 = "Eq37"
    EQ312 = "Eq312"
    EQ313 = "Eq313"
    EQ317 = "Eq317"
    EQ319 = "Eq319"


_PROBABILITY_SOURCES = {Source.EQ35, Source.EQ37, Source.EQ312, Source.EQ36, Source.EQ317, Source.EQ319}


@dataclass(frozen=True)
class AsymptoticEstimate:
    """An approximate loss probability (or limit) and what it assumes.

    ``conditions`` pairs each assumed condition with ``True`` when it was
    checked numerically, ``False`` when it failed, ``None`` when it is only
    assumed.
    """

    value: float
    source: Source
    conditions: tuple = field(default=())

    def __post_init__(self):
        if self.source in _PROBABILITY_SOURCES and not (0.0 <= self.value <= 1.0 + 1e-12):
            raise OutOfRegimeError(f"estimate {self.value!r} is not a probability", self.source.value)


def _moment_finite(queue, m):
    try:
        return math.isfinite(scaled_moment(queue.arrival, queue.mu, m))
    except Exception:
        return False


def classify(queue: QueueSpec, heavy_params: tuple | None = None) -> Regime:
    """Pick the regime for ``queue``; ``heavy_params = (eps, n)`` opts into the
    ``rho = 1 - eps`` scalings."""
    rho = queue.rho
    if heavy_params is not None:
        eps, n = heavy_params
        if rho > 1.0 + CRITICAL_TOL:
            raise OutOfRegimeError(f"heavy-traffic parameters given but rho = {rho!r} > 1")
        if not (0.0 < eps < 1.0) or n < 1:
            raise ValueError(f"need 0 < eps < 1 and n >= 1, got eps={eps!r}, n={n!r}")
        if abs((1.0 - eps) - rho) > 1e-9 * max(1.0, rho):
            raise OutOfRegimeError(f"eps = {eps!r} contradicts rho = {rho!r} (expected rho = 1 - eps)")
        return Regime.HEAVY_TRAFFIC if eps * n > HEAVY_THRESHOLD else Regime.NEAR_CRITICAL
    if abs(rho - 1.0) < CRITICAL_TOL:
        return Regime.CRITICAL
    return Regime.SUBCRITICAL if rho < 1.0 else Regime.SUPERCRITICAL


def approx_subcritical(queue: QueueSpec, n: int | None = None,
                       sigma: SigmaSolution | None = None) -> AsymptoticEstimate:
    """Geometric-decay approximation for ``rho < 1``."""
    rho = queue.rho
    if rho >= 1.0 - CRITICAL_TOL:
        raise OutOfRegimeError(f"subcritical approximation needs rho < 1, got rho = {rho!r}", Source.EQ35.value)
    n = queue.n if n is None else n
    sigma = solve_sigma(queue) if sigma is None else sigma
    ks = sigma.decay_coeff * sigma.sigma**n
    denom = 1.0 - rho - rho * ks
    if denom <= 0.0:
        raise OutOfRegimeError(
            f"n = {n} is too small for the subcritical approximation (denominator {denom:.3g} <= 0)",
            Source.EQ35.value,
        )
    return AsymptoticEstimate((1.0 - rho) * ks / denom, Source.EQ35, (("rho<1", True),))


def limit_supercritical(queue: QueueSpec) -> AsymptoticEstimate:
    """Limit ``(rho - 1) / rho`` of ``p_n`` for ``rho > 1``."""
    rho = queue.rho
    if rho <= 1.0 + CRITICAL_TOL:
        raise OutOfRegimeError(f"supercritical limit needs rho > 1, got rho = {rho!r}", Source.EQ37.value)
    return AsymptoticEstimate((rho - 1.0) / rho, Source.EQ37, (("rho>1", True),))


def approx_critical(queue: QueueSpec, n: int | None = None) -> AsymptoticEstimate:
    """``rho_2 / (2n)`` at ``rho = 1``.

    With a finite third moment the error is ``O(log n / n^2)`` (tag
    ``Eq312``); otherwise only ``o(1/n)`` is claimed (tag ``Eq36``).
    """
    rho = queue.rho
    if abs(rho - 1.0) >= CRITICAL_TOL:
        raise OutOfRegimeError(f"critical approximation needs rho = 1, got rho = {rho!r}", Source.EQ36.value)
    n = queue.n if n is None else n
    if n < 1:
        raise OutOfRegimeError("critical approximation needs n >= 1", Source.EQ36.value)
    if not _moment_finite(queue, 2):
        raise OutOfRegimeError("critical approximation needs a finite second moment", Source.EQ36.value)
    rho2 = scaled_moment(queue.arrival, queue.mu, 2)
    third = _moment_finite(queue, 3)
    source = Source.EQ312 if third else Source.EQ36
    value = rho2 / (2.0 * n)
    if value > 1.0:
        raise OutOfRegimeError(f"n = {n} is too small: rho_2/(2n) = {value:.3g} exceeds 1", source.value)
    return AsymptoticEstimate(value, source, (("rho=1", True), ("rho2<inf", True), ("rho3<inf", third)))


def reciprocal_increment(queue: QueueSpec) -> float:
    """Limiting slope ``2 / rho_2`` of ``1 / p_n`` at ``rho = 1``.

    The underlying limit theorem needs ``r_0 + r_1 < 1``; that is checked
    numerically and a violation means the model is (close to) a point mass
    at zero.
    """
    rho = queue.rho
    if abs(rho - 1.0) >= CRITICAL_TOL:
        raise OutOfRegimeError(f"reciprocal increment needs rho = 1, got rho = {rho!r}", Source.EQ313.value)
    mu = queue.mu
    # r_0 + r_1 = alpha(mu) - mu alpha'(mu)
    r01 = queue.arrival.lst(mu) - mu * queue.arrival.lst_derivative(mu, 1)
    if r01 >= 1.0 - 1e-12:
        raise DegenerateModelError(f"r_0 + r_1 = {r01!r} is not below 1; interarrival law is degenerate")
    return 2.0 / scaled_moment(queue.arrival, mu, 2)


def heavy_traffic_approx(epsilon: float, n: int, rho2_tilde: float) -> AsymptoticEstimate:
    """``eps e^{-2C/rho2} / (1 - e^{-2C/rho2})`` with ``C = eps n``."""
    if not (0.0 < epsilon < 1.0) or n < 1 or rho2_tilde <= 0:
        raise ValueError(f"need 0 < eps < 1, n >= 1, rho2 > 0; got {epsilon!r}, {n!r}, {rho2_tilde!r}")
    c = epsilon * n
    if c == 0.0:
        raise OutOfRegimeError("C = eps n is zero; use the near-critical formula", Source.EQ317.value)
    x = 2.0 * c / rho2_tilde
    value = epsilon * math.exp(-x) / -math.expm1(-x)
    return AsymptoticEstimate(value, Source.EQ317, (("eps*n=C>0", True), ("rho3 bounded", None), ("rho2 convergent", None)))


def near_critical_approx(n: int, rho2_tilde: float) -> AsymptoticEstimate:
    """``rho2 / (2n)`` when ``eps n -> 0``."""
    if n < 1 or rho2_tilde <= 0:
        raise ValueError(f"need n >= 1 and rho2 > 0, got {n!r}, {rho2_tilde!r}")
    value = rho2_tilde / (2.0 * n)
    if value > 1.0:
        raise OutOfRegimeError(f"n = {n} is too small: rho_2/(2n) = {value:.3g} exceeds 1", Source.EQ319.value)
    return AsymptoticEstimate(value, Source.EQ319, (("eps*n->0", None), ("rho3 bounded", None)))
