"""Independent reference computations used as test oracles.

Nothing here imports the package; each function evaluates its quantity from
first principles in plain floating point or by brute force.
"""

from __future__ import annotations

import itertools
import math

import mpmath
import numpy as np


def ces_value(alpha, sigma, H, X):
    if sigma == 1.0:
        return H ** alpha * X ** (1.0 - alpha)
    k = (sigma - 1.0) / sigma
    return (alpha * H ** k + (1.0 - alpha) * X ** k) ** (1.0 / k)


def urban_outer_value(alpha, sigma_e, alpha_e, H, X):
    """H^alpha E(H, X)^(1-alpha) with a CES inner technology E."""
    return H ** alpha * ces_value(alpha_e, sigma_e, H, X) ** (1.0 - alpha)


def two_sector_grid(alpha, A1, A2, H=1.0, X=1.0, n=10_001, refine=True):
    """max over the labor split of A1 h^alpha X^(1-alpha) + A2 (H - h).

    A 10,001-point grid brackets the maximiser. Golden-section search on the
    bracketing cells then removes the grid error, using that the objective
    is concave.
    """
    f = lambda h: A1 * h ** alpha * X ** (1.0 - alpha) + A2 * (H - h)
    grid = np.linspace(0.0, H, n)
    vals = A1 * grid ** alpha * X ** (1.0 - alpha) + A2 * (H - grid)
    i = int(np.argmax(vals))
    best = float(vals[i])
    if not refine:
        return best
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, n - 1)]
    g = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - g * (b - a), a + g * (b - a)
    for _ in range(200):
        if f(c) > f(d):
            b, d = d, c
            c = b - g * (b - a)
        else:
            a, c = c, d
            d = a + g * (b - a)
    return max(best, f(0.5 * (a + b)), f(H))


def radius_2x2(K):
    K = np.asarray(K, dtype=float)
    tr = K[0, 0] + K[1, 1]
    det = K[0, 0] * K[1, 1] - K[0, 1] * K[1, 0]
    return tr / 2.0 + math.sqrt(tr * tr / 4.0 - det)


def solve_2x2(K):
    """(I - K)^-1 1 by cofactors."""
    a, b = 1.0 - K[0][0], -K[0][1]
    c, d = -K[1][0], 1.0 - K[1][1]
    det = a * d - b * c
    return ((d - b) / det, (a - c) / det)


def sigma_fd_values(F, H, X, rel=1e-12, dps=50):
    """sigma = F_H F_X / (F F_HX) from function values only.

    First derivatives by central differences, the cross derivative by the
    four-point mixed difference. ``F`` is evaluated in mpmath at ``dps``
    digits, so a tiny step leaves neither truncation nor cancellation error
    visible at double precision. ``F`` must accept mpf arguments.
    """
    with mpmath.workdps(dps):
        H, X = mpmath.mpf(H), mpmath.mpf(X)
        h, k = rel * H, rel * X
        FH = (F(H + h, X) - F(H - h, X)) / (2 * h)
        FX = (F(H, X + k) - F(H, X - k)) / (2 * k)
        FHX = (F(H + h, X + k) - F(H + h, X - k) - F(H - h, X + k) + F(H - h, X - k)) / (4 * h * k)
        return float(FH * FX / (F(H, X) * FHX))


def cobb_douglas_kappa(alpha, beta):
    """Per-period decay of discounted rent: m r_{t+1} / r_t under Cobb-Douglas."""
    return beta * alpha / (beta * alpha + 1.0 - alpha)


def enumerate_markov(Pi, log_growth, n0, logA0, T, rent_wage, beta):
    """Exact E[prod d], E[sum discounted rent]/P_0 and E[sum r/w] by listing every state path.

    ``log_growth[n][n']`` is the log growth on the transition n -> n';
    ``rent_wage(logA)`` returns r/w. Returns (gap/P0, V/P0, sum E[r/w]).
    """
    N = len(Pi)
    gap = value = upper = 0.0
    for seq in itertools.product(range(N), repeat=T):
        prob, prod, la, n = 1.0, 1.0, logA0, n0
        v = u = 0.0
        for n2 in seq:
            prob *= Pi[n][n2]
            if prob == 0.0:
                break
            la += log_growth[n][n2]
            c = rent_wage(la)
            prod *= 1.0 / (1.0 + c / beta)
            v += prod * c / beta
            u += c
            n = n2
        else:
            gap += prob * prod
            value += prob * v
            upper += prob * u
    return gap, value, upper
