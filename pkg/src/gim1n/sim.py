"""Monte Carlo loss estimates from the embedded chain at arrival epochs.

State is the number in system just before an arrival.  An arrival finding
``n`` customers is lost, otherwise admitted; during the following gap ``T``
the server completes ``N ~ Poisson(mu T)`` potential services, so the next
state is ``max(q + admitted - N, 0)``.  Memoryless service makes this exact.

Every replication draws from its own counter-based Philox stream keyed by
``(seed, replication)``, so results do not depend on worker count or
scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from gim1n import _backend
from gim1n.kernel import QueueSpec

__all__ = ["SimEstimate", "simulate", "warmup_policy", "replication_stream"]

#: arrivals simulated per vectorised batch
CHUNK = 1 << 17


@dataclass(frozen=True)
class SimEstimate:
    losses: int
    arrivals: int
    estimate: float
    std_error: float
    replications: int
    seed: int
    warmup: int = 0


def warmup_policy(queue: QueueSpec) -> int:
    """Arrivals discarded per replication before losses are counted."""
    return max(10_000, 50 * queue.n)


def replication_stream(seed: int, replication: int) -> np.random.Generator:
    """Independent Philox stream for one replication."""
    ss = np.random.SeedSequence(seed, spawn_key=(replication,))
    return np.random.Generator(np.random.Philox(ss))


def _run_chain(queue, rng, arrivals, warmup):
    n, mu = queue.n, queue.mu
    q = 0
    losses = 0
    for counting, total in ((False, warmup), (True, arrivals)):
        done = 0
        while done < total:
            size = min(CHUNK, total - done)
            gaps = queue.arrival.sample(rng, size)
            departures = rng.poisson(mu * gaps).astype(np.int64)
            lost, q = _backend.kernels.chain(departures, n, q, counting)
            losses += lost
            done += size
    return losses


def simulate(queue: QueueSpec, arrivals_per_rep: int, replications: int, seed: int,
             warmup: int | None = None, workers: int = 1) -> SimEstimate:
    """Estimate ``p_n`` as the mean per-replication loss fraction."""
    if arrivals_per_rep < 1 or replications < 1:
        raise ValueError("need arrivals_per_rep >= 1 and replications >= 1")
    warmup = warmup_policy(queue) if warmup is None else int(warmup)

    def one(rep):
        return _run_chain(queue, replication_stream(seed, rep), arrivals_per_rep, warmup)

    if workers > 1 and replications > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            losses = list(pool.map(one, range(replications)))
    else:
        losses = [one(rep) for rep in range(replications)]

    fractions = np.array(losses, dtype=float) / arrivals_per_rep
    estimate = math.fsum(fractions) / replications
    if replications > 1:
        std_error = float(np.std(fractions, ddof=1)) / math.sqrt(replications)
    else:
        std_error = 0.0
    return SimEstimate(
        losses=int(sum(losses)),
        arrivals=arrivals_per_rep * replications,
        estimate=estimate,
        std_error=std_error,
        replications=replications,
        seed=seed,
        warmup=warmup,
    )
