"""Interarrival distributions and their transform-side quantities.

Every model exposes the Laplace-Stieltjes transform ``alpha(s)``, its
derivatives, raw moments, the completion probabilities

    r_j = int exp(-mu x) (mu x)^j / j! dA(x),

(the chance that a rate-``mu`` Poisson stream fires ``j`` times during one
interarrival gap) and a sampler.  The four closed-form families use exact
expressions evaluated in log space; :class:`Quadrature` integrates a
user-supplied density numerically.
"""

from __future__ import annotations

import abc
import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from gim1n.errors import NumericalError, UnsupportedModelError

__all__ = [
    "InterarrivalModel",
    "Exponential",
    "Erlang",
    "Hyperexponential",
    "Deterministic",
    "Quadrature",
    "QueueStats",
    "lst",
    "lst_derivative",
    "completion_probs",
    "scaled_moment",
    "sample",
    "tail_cutoff",
    "queue_stats",
    "parse_dist",
    "format_dist",
]

#: default bound on the neglected tail mass of the completion probabilities
TAIL_TOL = 1e-12
#: absolute tolerance for the generic quadrature family
QUAD_TOL = 1e-12


def _nbinom_logpmf(j, k, p):
    # failures before the k-th success, success probability p
    return (
        math.lgamma(j + k) - math.lgamma(k) - math.lgamma(j + 1)
        + k * math.log(p) + j * math.log1p(-p)
    )


def _poisson_logpmf(j, a):
    if a == 0.0:
        return 0.0 if j == 0 else -math.inf
    return -a + j * math.log(a) - math.lgamma(j + 1)


def _ratio_tail(logpmf_next, ratio_next):
    """Tail bound sum_{j>J} r_j <= r_{J+1} / (1 - r_{J+2}/r_{J+1}).

    Valid for pmfs whose successive ratio is nonincreasing (Poisson,
    negative binomial, geometric) once that ratio drops below one.
    """
    if ratio_next >= 1.0:
        return math.inf
    return math.exp(logpmf_next) / (1.0 - ratio_next)


class InterarrivalModel(abc.ABC):
    """A renewal interarrival distribution ``A(x)`` on ``[0, inf)``.

    Subclasses are frozen dataclasses; instances are immutable and can be
    shared between threads.
    """

    @property
    @abc.abstractmethod
    def mean(self) -> float:
        """Expected interarrival time ``1/lambda``."""

    @abc.abstractmethod
    def raw_moment(self, i: int) -> float:
        """``E[A^i]``."""

    @abc.abstractmethod
    def lst_derivative(self, s: float, i: int) -> float:
        """``i``-th derivative of the transform at ``s``."""

    @abc.abstractmethod
    def completion_probs(self, mu: float, count: int) -> np.ndarray:
        """Array ``r_0..r_count``."""

    @abc.abstractmethod
    def tail_bound(self, mu: float, cutoff: int) -> float:
        """Upper bound on ``sum_{j > cutoff} r_j``."""

    @abc.abstractmethod
    def sample(self, rng: np.random.Generator, size=None):
        """Draw interarrival times from ``rng``."""

    @abc.abstractmethod
    def spec_string(self) -> str:
        """Canonical form in the ``family:key=value`` grammar."""

    def lst(self, s: float) -> float:
        return self.lst_derivative(s, 0)


def _check_positive(name, value):
    if not (isinstance(value, (int, float, np.floating, np.integer)) and math.isfinite(value) and value > 0):
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")


@dataclass(frozen=True)
class Exponential(InterarrivalModel):
    rate: float

    def __post_init__(self):
        _check_positive("rate", self.rate)

    @property
    def mean(self):
        return 1.0 / self.rate

    def raw_moment(self, i):
        return math.factorial(i) / self.rate**i

    def lst_derivative(self, s, i):
        lam = self.rate
        return (-1) ** i * math.exp(math.lgamma(i + 1) + math.log(lam) - (i + 1) * math.log(lam + s))

    def completion_probs(self, mu, count):
        j = np.arange(count + 1)
        return np.exp(np.log(self.rate / (self.rate + mu)) + j * np.log(mu / (self.rate + mu)))

    def tail_bound(self, mu, cutoff):
        return (mu / (self.rate + mu)) ** (cutoff + 1)

    def sample(self, rng, size=None):
        return rng.exponential(1.0 / self.rate, size)

    def spec_string(self):
        return f"exp:rate={self.rate!r}"


@dataclass(frozen=True)
class Erlang(InterarrivalModel):
    """Sum of ``k`` exponential stages, each with rate ``rate``."""

    k: int
    rate: float

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"Erlang shape must be a positive integer, got {self.k!r}")
        object.__setattr__(self, "k", int(self.k))
        _check_positive("rate", self.rate)

    @property
    def mean(self):
        return self.k / self.rate

    def raw_moment(self, i):
        return math.exp(math.lgamma(self.k + i) - math.lgamma(self.k)) / self.rate**i

    def lst_derivative(self, s, i):
        k, beta = self.k, self.rate
        log_mag = math.lgamma(k + i) - math.lgamma(k) + k * math.log(beta) - (k + i) * math.log(beta + s)
        return (-1) ** i * math.exp(log_mag)

    def completion_probs(self, mu, count):
        # negative binomial with k successes, success probability beta/(beta+mu)
        k, beta = self.k, self.rate
        j = np.arange(count + 1)
        p = beta / (beta + mu)
        logr = gammaln(j + k) - gammaln(k) - gammaln(j + 1) + k * math.log(p) + j * math.log1p(-p)
        return np.exp(logr)

    def tail_bound(self, mu, cutoff):
        p = self.rate / (self.rate + mu)
        nxt = cutoff + 1
        ratio = (nxt + self.k) / (nxt + 1) * (1.0 - p)
        return _ratio_tail(_nbinom_logpmf(nxt, self.k, p), ratio)

    def sample(self, rng, size=None):
        return rng.gamma(self.k, 1.0 / self.rate, size)

    def spec_string(self):
        return f"erlang:k={self.k},rate={self.rate!r}"


@dataclass(frozen=True)
class Hyperexponential(InterarrivalModel):
    """Probability mixture of exponentials with any number of branches."""

    probs: Sequence[float]
    rates: Sequence[float]

    def __post_init__(self):
        probs = tuple(float(q) for q in self.probs)
        rates = tuple(float(r) for r in self.rates)
        if not probs or len(probs) != len(rates):
            raise ValueError("hyperexponential needs matching, nonempty probability and rate lists")
        if any(q < 0 or not math.isfinite(q) for q in probs):
            raise ValueError(f"branch probabilities must be nonnegative, got {probs}")
        if abs(math.fsum(probs) - 1.0) > 1e-12:
            raise ValueError(f"branch probabilities must sum to 1, got sum {math.fsum(probs)!r}")
        for r in rates:
            _check_positive("branch rate", r)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "rates", rates)

    @property
    def mean(self):
        return math.fsum(q / lam for q, lam in zip(self.probs, self.rates))

    def _branches(self):
        return [Exponential(lam) for lam in self.rates]

    def raw_moment(self, i):
        return math.fsum(q * b.raw_moment(i) for q, b in zip(self.probs, self._branches()))

    def lst_derivative(self, s, i):
        return math.fsum(q * b.lst_derivative(s, i) for q, b in zip(self.probs, self._branches()))

    def completion_probs(self, mu, count):
        out = np.zeros(count + 1)
        for q, b in zip(self.probs, self._branches()):
            out += q * b.completion_probs(mu, count)
        return out

    def tail_bound(self, mu, cutoff):
        return math.fsum(q * b.tail_bound(mu, cutoff) for q, b in zip(self.probs, self._branches()))

    def sample(self, rng, size=None):
        branch = rng.choice(len(self.probs), size=size, p=self.probs)
        return rng.exponential(1.0, size) / np.asarray(self.rates)[branch]

    def spec_string(self):
        q = ",".join(repr(x) for x in self.probs)
        r = ",".join(repr(x) for x in self.rates)
        return f"hyper:q={q};rates={r}"


@dataclass(frozen=True)
class Deterministic(InterarrivalModel):
    d: float

    def __post_init__(self):
        # d -> 0 is the point mass at zero; the recurrence has no solution there
        _check_positive("d", self.d)

    @property
    def mean(self):
        return float(self.d)

    def raw_moment(self, i):
        return float(self.d) ** i

    def lst_derivative(self, s, i):
        return (-self.d) ** i * math.exp(-s * self.d)

    def completion_probs(self, mu, count):
        a = mu * self.d
        j = np.arange(count + 1)
        return np.exp(-a + j * math.log(a) - gammaln(j + 1))

    def tail_bound(self, mu, cutoff):
        a = mu * self.d
        nxt = cutoff + 1
        return _ratio_tail(_poisson_logpmf(nxt, a), a / (nxt + 1))

    def sample(self, rng, size=None):
        if size is None:
            return float(self.d)
        return np.full(size, float(self.d))

    def spec_string(self):
        return f"det:d={self.d!r}"


@dataclass(frozen=True, eq=False)
class Quadrature(InterarrivalModel):
    """Generic interarrival law given by a density on ``[0, upper]``.

    ``upper`` is either the end of a finite support or the point past which
    the caller declares the density negligible.  Everything is obtained by
    adaptive quadrature; samples come from an inverted tabulated CDF.
    """

    density: Callable[[float], float]
    upper: float
    tol: float = QUAD_TOL
    grid_points: int = field(default=1 << 14, repr=False)

    def __post_init__(self):
        _check_positive("upper", self.upper)
        mass = self._integrate(lambda x: self.density(x))
        if abs(mass - 1.0) > 1e-8:
            raise UnsupportedModelError(f"density integrates to {mass!r} on [0, {self.upper}], not 1")

    def _integrate(self, fn, points=None):
        pts = None
        if points is not None:
            pts = [p for p in points if 0.0 < p < self.upper] or None
        val, err = integrate.quad(fn, 0.0, self.upper, epsabs=self.tol, epsrel=self.tol, limit=500, points=pts)
        if not math.isfinite(val) or err > max(1e3 * self.tol, 1e-9 * abs(val)):
            raise NumericalError(f"quadrature did not reach tolerance {self.tol}", estimate=err)
        return val

    @cached_property
    def mean(self):
        return self._integrate(lambda x: x * self.density(x))

    def raw_moment(self, i):
        return self._integrate(lambda x: x**i * self.density(x))

    def lst_derivative(self, s, i):
        return (-1) ** i * self._integrate(lambda x: x**i * math.exp(-s * x) * self.density(x))

    def completion_probs(self, mu, count):
        out = np.empty(count + 1)
        for j in range(count + 1):
            lg = math.lgamma(j + 1)

            def weight(x, j=j, lg=lg):
                if x <= 0.0:
                    return self.density(x) if j == 0 else 0.0
                return math.exp(-mu * x + j * math.log(mu * x) - lg) * self.density(x)

            # split at the mode of the Poisson weight
            out[j] = self._integrate(weight, points=[j / mu])
        return out

    def tail_bound(self, mu, cutoff):
        # N is dominated by Poisson(mu * upper) because A <= upper
        a = mu * self.upper
        nxt = cutoff + 1
        return _ratio_tail(_poisson_logpmf(nxt, a), a / (nxt + 1))

    @cached_property
    def _inverse_cdf(self):
        grid = np.linspace(0.0, self.upper, self.grid_points)
        dens = np.array([self.density(x) for x in grid])
        cdf = integrate.cumulative_trapezoid(dens, grid, initial=0.0)
        cdf /= cdf[-1]
        return cdf, grid

    def sample(self, rng, size=None):
        cdf, grid = self._inverse_cdf
        u = rng.random(size)
        return np.interp(u, cdf, grid) if size is not None else float(np.interp(u, cdf, grid))

    def spec_string(self):
        return f"quad:upper={self.upper!r}"


@dataclass(frozen=True)
class QueueStats:
    """Load and scaled moments of an interarrival law against service rate ``mu``.

    ``rho_m[m-1] = mu^m E[A^m]``; ``gamma_m`` are the derivatives at 1 of
    ``r(z) = alpha(mu - mu z)``, which coincide with ``rho_m``.
    """

    rho: float
    rho_m: tuple
    gamma_m: tuple


def lst(model: InterarrivalModel, s: float) -> float:
    """Laplace-Stieltjes transform ``alpha(s)`` for real ``s >= 0``."""
    if s < 0:
        raise ValueError(f"transform argument must be >= 0, got {s}")
    return model.lst(s)


def lst_derivative(model: InterarrivalModel, s: float, order: int) -> float:
    """``alpha^{(order)}(s) = (-1)^order * int x^order exp(-s x) dA(x)``."""
    if s < 0 or order < 0:
        raise ValueError("need s >= 0 and order >= 0")
    return model.lst_derivative(s, int(order))


def completion_probs(model: InterarrivalModel, mu: float, count: int) -> np.ndarray:
    """Completion probabilities ``r_0..r_count`` for service rate ``mu``."""
    _check_positive("mu", mu)
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    return model.completion_probs(float(mu), int(count))


def scaled_moment(model: InterarrivalModel, mu: float, m: int) -> float:
    """``rho_m = mu^m * E[A^m]``."""
    _check_positive("mu", mu)
    value = mu**m * model.raw_moment(m)
    if not math.isfinite(value):
        raise UnsupportedModelError(f"moment of order {m} diverges for {format_dist(model)}")
    return value


def sample(model: InterarrivalModel, rng: np.random.Generator, size=None):
    return model.sample(rng, size)


def tail_cutoff(model: InterarrivalModel, mu: float, tol: float = TAIL_TOL) -> int:
    """Smallest ``J`` whose analytic tail bound ``sum_{j>J} r_j`` is ``<= tol``."""
    if model.tail_bound(mu, 0) <= tol:
        return 0
    hi = 1
    while model.tail_bound(mu, hi) > tol:
        hi *= 2
        if hi > 1 << 40:
            raise NumericalError("tail bound never fell below tolerance")
    lo = hi // 2
    # bound is +inf before the pmf mode and decreasing after it
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if model.tail_bound(mu, mid) <= tol:
            hi = mid
        else:
            lo = mid
    return hi


def queue_stats(model: InterarrivalModel, mu: float) -> QueueStats:
    rho_m = tuple(scaled_moment(model, mu, m) for m in (1, 2, 3))
    return QueueStats(rho=1.0 / rho_m[0], rho_m=rho_m, gamma_m=rho_m)


_FAMILY_KEYS = {
    "exp": {"rate"},
    "erlang": {"k", "rate"},
    "hyper": {"q", "rates"},
    "det": {"d"},
}
_PARAM_RE = re.compile(r"(\w+)=(.*?)(?=[,;]\w+=|$)")


def parse_dist(text: str) -> InterarrivalModel:
    """Parse ``exp:rate=L``, ``erlang:k=K,rate=B``, ``hyper:q=..;rates=..`` or ``det:d=D``."""
    family, sep, body = text.strip().partition(":")
    family = family.lower()
    if not sep or family not in _FAMILY_KEYS:
        raise ValueError(f"unknown distribution {text!r}; expected one of {sorted(_FAMILY_KEYS)}")
    params = {m.group(1): m.group(2) for m in _PARAM_RE.finditer(body)}
    if set(params) != _FAMILY_KEYS[family]:
        raise ValueError(f"{family} needs parameters {sorted(_FAMILY_KEYS[family])}, got {sorted(params)}")

    def floats(key):
        try:
            return [float(v) for v in params[key].split(",") if v.strip()]
        except ValueError:
            raise ValueError(f"bad number in {key}={params[key]!r}") from None

    if family == "exp":
        return Exponential(*floats("rate"))
    if family == "erlang":
        (k,) = floats("k")
        if k != int(k):
            raise ValueError(f"Erlang shape must be an integer, got {params['k']}")
        return Erlang(int(k), *floats("rate"))
    if family == "hyper":
        return Hyperexponential(floats("q"), floats("rates"))
    return Deterministic(*floats("d"))


def format_dist(model: InterarrivalModel) -> str:
    return model.spec_string()
