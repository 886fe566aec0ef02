"""Pure-Python versions of the compiled loops in ``_core``.

Same signatures and semantics; used when the extension is not built.
Summation goes through ``math.fsum``, which is correctly rounded and so at
least as accurate as the compensated loop it replaces.
"""

import math

import numpy as np


def march(r, out, n, limit):
    r = np.asarray(r, dtype=float)
    r0 = r[0]
    worst = 1.0
    for k in range(n):
        terms = -r[1:k + 1] * out[k:0:-1]
        s = math.fsum([out[k], *terms.tolist()])
        absum = abs(out[k]) + float(np.abs(terms).sum())
        cond = absum / abs(s) if s != 0.0 else math.inf
        worst = max(worst, cond)
        out[k + 1] = s / r0
        if out[k + 1] > limit:
            return k + 1, worst
    return n, worst


def chain(counts, n, q, count):
    losses = 0
    for c in counts.tolist():
        if q == n:
            if count:
                losses += 1
        else:
            q += 1
        q -= c
        if q < 0:
            q = 0
    return losses, q
