"""Exact loss probabilities of GI/M/1/n by the tilde-pi recurrence.

The generating function ``alpha(mu - mu z) / (alpha(mu - mu z) - z)`` has
coefficients ``tilde_pi_k`` obeying

    tilde_pi_k = sum_{j=0}^{k} r_j tilde_pi_{k-j+1},    tilde_pi_0 = 1,

which is marched forward by solving for ``tilde_pi_{k+1}``.  The loss
probability with room for ``k`` customers is ``1 / tilde_pi_k``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from gim1n import _backend
from gim1n.dist import InterarrivalModel, QueueStats, completion_probs, queue_stats
from gim1n.errors import NumericalError

__all__ = [
    "QueueSpec",
    "LossTable",
    "Conditioning",
    "solve_loss_table",
    "loss_probability",
    "verify_recurrence",
]

#: unscaled entries above this switch the solver to the sigma-scaled sequence
OVERFLOW_LIMIT = 1e250
#: flag the table when the uncompensated error bound exceeds this
PRECISION_WARN = 1e-6
#: relative slack allowed when checking that tilde_pi is nondecreasing
MONOTONE_TOL = 1e-9
_UNIT_ROUNDOFF = 2.0**-53


@dataclass(frozen=True)
class QueueSpec:
    """A GI/M/1/n instance; ``n`` counts the server position."""

    arrival: InterarrivalModel
    mu: float
    n: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.mu) and self.mu > 0):
            raise ValueError(f"service rate must be positive, got {self.mu!r}")
        if int(self.n) != self.n or self.n < 0:
            raise ValueError(f"buffer size must be a nonnegative integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "mu", float(self.mu))

    @property
    def rho(self) -> float:
        return 1.0 / (self.mu * self.arrival.mean)

    def stats(self) -> QueueStats:
        return queue_stats(self.arrival, self.mu)

    def with_n(self, n: int) -> QueueSpec:
        return QueueSpec(self.arrival, self.mu, n)


class Conditioning(str, enum.Enum):
    WELL = "well-conditioned"
    WARNING = "precision-warning"


@dataclass(frozen=True, eq=False)
class LossTable:
    """Result of :func:`solve_loss_table` for buffer sizes ``0..n``.

    When the unscaled sequence would overflow, the solver carries
    ``u_k = tilde_pi_k * scale^k`` instead; ``scaled_tilde_pi`` then holds
    ``u`` and ``tilde_pi``/``pi`` may contain ``inf`` while ``p`` and
    ``log_p`` stay exact.
    """

    tilde_pi: np.ndarray
    pi: np.ndarray
    p: np.ndarray
    log_p: np.ndarray
    condition_flag: Conditioning
    cancellation_estimate: float
    scale: float = 1.0
    scaled_tilde_pi: np.ndarray | None = None

    @property
    def n(self) -> int:
        return len(self.p) - 1

    @property
    def scaled(self) -> bool:
        return self.scaled_tilde_pi is not None

    def working_sequence(self):
        """The sequence the recurrence was actually run on, with its scale."""
        if self.scaled_tilde_pi is None:
            return self.tilde_pi, 1.0
        return self.scaled_tilde_pi, self.scale


def _frozen(a):
    a = np.asarray(a, dtype=float)
    a.setflags(write=False)
    return a


def _march(r, n, limit):
    out = np.zeros(n + 1)
    out[0] = 1.0
    last, worst = _backend.kernels.march(np.ascontiguousarray(r, dtype=float), out, n, limit)
    return out, int(last), float(worst)


def solve_loss_table(queue: QueueSpec, scaled: bool | None = None) -> LossTable:
    """Loss probabilities ``p_0..p_n`` with diagnostics.

    ``scaled=None`` runs the plain recurrence and reruns on the
    ``sigma``-scaled sequence only if an entry passes ``OVERFLOW_LIMIT``;
    ``True``/``False`` force either mode.
    """
    n = queue.n
    r = completion_probs(queue.arrival, queue.mu, n)
    if not r[0] > 0.0:
        raise NumericalError(f"r_0 = alpha(mu) underflowed to {r[0]!r}; the recurrence cannot divide by it")

    sigma = 1.0
    if scaled is not True:
        u, last, worst = _march(r, n, OVERFLOW_LIMIT if scaled is None else math.inf)
        if last < n:
            scaled = True
    if scaled is True:
        from gim1n.roots import solve_sigma

        sigma = solve_sigma(queue).sigma
        j = np.arange(n + 1)
        # r~_j = r_j sigma^(j-1) keeps the recurrence form for u_k = tilde_pi_k sigma^k
        with np.errstate(divide="ignore"):
            r_scaled = np.exp(np.log(r) + (j - 1) * math.log(sigma)) if sigma < 1.0 else r
        u, last, worst = _march(r_scaled, n, math.inf)

    k = np.arange(n + 1)
    if not np.all(np.isfinite(u)) or np.any(u <= 0.0):
        bad = int(np.argmax(~np.isfinite(u) | (u <= 0.0)))
        raise NumericalError(f"tilde_pi_{bad} = {u[bad]!r} is not positive; completion probabilities are corrupt")
    # increments of tilde_pi, expressed on the working scale
    steps = u[1:] - sigma * u[:-1]
    if np.any(steps < -MONOTONE_TOL * u[1:]):
        bad = int(np.argmax(steps < -MONOTONE_TOL * u[1:])) + 1
        raise NumericalError(f"tilde_pi decreases at k={bad}; completion probabilities are corrupt")
    # rounding-level dips are within tolerance; restore exact monotonicity
    steps = np.maximum(steps, 0.0)

    log_sigma = math.log(sigma)
    log_tp = np.log(u) - k * log_sigma
    with np.errstate(over="ignore", invalid="ignore"):
        tilde_pi = np.exp(log_tp) if sigma < 1.0 else u.copy()
        pi = np.empty(n + 1)
        pi[0] = 1.0
        pi[1:] = np.exp(-k[1:] * log_sigma) * steps if sigma < 1.0 else steps
    if sigma == 1.0:
        tilde_pi = np.maximum.accumulate(tilde_pi)
        p = 1.0 / tilde_pi
        log_p = -np.log(tilde_pi)
    else:
        log_p = -log_tp
        p = np.exp(log_p)

    cancel = worst * _UNIT_ROUNDOFF
    flag = Conditioning.WARNING if cancel > PRECISION_WARN else Conditioning.WELL
    return LossTable(
        tilde_pi=_frozen(tilde_pi),
        pi=_frozen(pi),
        p=_frozen(p),
        log_p=_frozen(log_p),
        condition_flag=flag,
        cancellation_estimate=cancel,
        scale=sigma,
        scaled_tilde_pi=_frozen(u) if sigma < 1.0 else None,
    )


def loss_probability(queue: QueueSpec) -> float:
    """Stationary fraction of arrivals lost with buffer size ``queue.n``."""
    return float(solve_loss_table(queue).p[queue.n])


def verify_recurrence(table: LossTable, r) -> float:
    """Largest relative residual of the recurrence over the table.

    ``max_k |tilde_pi_k - sum_{j<=k} r_j tilde_pi_{k-j+1}| / tilde_pi_k``,
    evaluated on the scaled sequence when the table carries one.
    """
    seq, scale = table.working_sequence()
    r = np.asarray(r, dtype=float)
    if scale != 1.0:
        j = np.arange(len(r))
        r = r * np.power(scale, j - 1.0)
    worst = 0.0
    for k in range(table.n):
        terms = r[: k + 1] * seq[k + 1:0:-1][: k + 1]
        res = abs(math.fsum([seq[k], *(-terms).tolist()])) / seq[k]
        worst = max(worst, res)
    return worst
