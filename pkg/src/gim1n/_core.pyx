# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: the tilde-pi recurrence march and the embedded chain."""

from libc.math cimport fabs, INFINITY


def march(const double[::1] r, double[::1] out, Py_ssize_t n, double limit):
    """Fill ``out[1..n]`` from ``out[0]`` by forward recurrence.

    Returns ``(last, worst_cond)`` where ``last`` is the highest index filled
    (less than ``n`` when an entry exceeded ``limit``) and ``worst_cond`` the
    largest ratio ``sum |terms| / |result|`` seen in the convolution.
    """
    cdef Py_ssize_t k, j, last = n
    cdef double s, c, t, tot, absum, cond, worst = 1.0
    cdef double r0 = r[0]
    with nogil:
        for k in range(n):
            # Neumaier compensated sum of out[k] - sum_{j>=1} r_j out[k-j+1]
            s = out[k]
            c = 0.0
            absum = fabs(s)
            for j in range(1, k + 1):
                t = -r[j] * out[k - j + 1]
                absum += fabs(t)
                tot = s + t
                if fabs(s) >= fabs(t):
                    c += (s - tot) + t
                else:
                    c += (t - tot) + s
                s = tot
            s += c
            if s != 0.0:
                cond = absum / fabs(s)
            else:
                cond = INFINITY
            if cond > worst:
                worst = cond
            out[k + 1] = s / r0
            if out[k + 1] > limit:
                last = k + 1
                break
    return last, worst


def chain(const long long[::1] counts, long long n, long long q, bint count):
    """Run the embedded chain over ``counts`` (departures per gap).

    Returns ``(losses, q)``; losses are tallied only when ``count`` is set.
    """
    cdef Py_ssize_t i, m = counts.shape[0]
    cdef long long losses = 0
    with nogil:
        for i in range(m):
            if q == n:
                if count:
                    losses += 1
            else:
                q += 1
            q -= counts[i]
            if q < 0:
                q = 0
    return losses, q
