"""Pure-Python lattice-sum kernels.

Reference implementation of the closed-channel sums; ``_kernels.pyx`` compiles
the same loops. Both sum over |m| >= 1 on each side of the Bloch index and skip
open channels (|qx + 2 pi m| < q); the m = 0 term and open channels are handled
by the caller.
"""

import math

TWO_PI = 2.0 * math.pi
_MAX_TERMS = 50_000_000


def _euler_maclaurin_tail(q, c, n):
    # sum_{m>=n} [1/sqrt(T^2 - q^2) - 1/(2 pi (m+1))], T = 2 pi m + c
    t = TWO_PI * n + c
    s = math.sqrt(t * t - q * q)
    f = 1.0 / s - 1.0 / (TWO_PI * (n + 1))
    integral = math.log(2.0 * TWO_PI * (n + 1) / (t + s)) / TWO_PI
    d1 = -TWO_PI * t / (s * s * s) + 1.0 / (TWO_PI * (n + 1) ** 2)
    s2 = s * s
    d3 = (-3.0 * TWO_PI ** 3 * t * (2.0 * t * t + 3.0 * q * q) / (s2 ** 3 * s)
          + 6.0 / (TWO_PI * (n + 1) ** 4))
    return integral + 0.5 * f - d1 / 12.0 + d3 / 720.0, abs(d3) / 720.0


def alpha_closed_sum(q, qx, tol, m_max=0):
    """Regularized closed-channel part of the alpha lattice sum.

    Returns ``(value, n)`` where ``value`` is the sum over closed |m| >= 1 of
    ``1/kappa_m - 1/(2 pi (|m| + 1))`` and ``n`` the index at which the
    Euler-Maclaurin tail takes over.
    """
    n = max(int((q + abs(qx)) / TWO_PI) + 2, m_max + 1)
    while True:
        bound = 0.0
        for c in (qx, -qx):
            bound += _euler_maclaurin_tail(q, c, n)[1]
        if bound < tol or n > 10_000_000:
            break
        n *= 2
    total = 0.0
    for c in (qx, -qx):
        for m in range(1, n):
            t = TWO_PI * m + c
            if t <= q:
                continue
            total += 1.0 / math.sqrt(t * t - q * q) - 1.0 / (TWO_PI * (m + 1))
        total += _euler_maclaurin_tail(q, c, n)[0]
    return total, n


def beta_closed_sum(q, qx, h, tol):
    """Closed-channel part of the beta lattice sum, sum exp(-2 h kappa)/kappa.

    Returns ``(value, n_terms)``. Consecutive closed terms shrink at least by
    exp(-4 pi h), which gives the geometric tail bound used to stop.
    """
    ratio = math.exp(-4.0 * math.pi * h)
    total = 0.0
    used = 0
    for c in (qx, -qx):
        m = 1
        while m < _MAX_TERMS:
            t = TWO_PI * m + c
            if t > q:
                kappa = math.sqrt(t * t - q * q)
                term = math.exp(-2.0 * h * kappa) / kappa
                total += term
                if term * ratio / (1.0 - ratio) < 0.5 * tol:
                    break
            m += 1
        used = max(used, m)
    return total, used
