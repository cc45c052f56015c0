"""Quadrature primitives: Gauss-Hermite tables and adaptive Simpson.

The Gauss-Hermite tables are rescaled to integrate against the standard
normal density and cached per order. The Simpson integrator supports
one-sided endpoint values and mandatory interior knots, which is how
piecewise integrands with known breakpoints (the reliable-decoding
transition) are integrated without chasing a jump.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable, Iterable, Optional

import numpy as np
from scipy.special import roots_hermite

from .errors import ConvergenceError


@lru_cache(maxsize=32)
def gauss_hermite_standard(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights such that sum(w * f(x)) ~ E[f(T)], T ~ N(0, 1)."""
    if order < 2:
        raise ValueError("Gauss-Hermite order must be >= 2")
    x, w = roots_hermite(order)
    return x * math.sqrt(2.0), w / math.sqrt(math.pi)


def _simpson(fa: float, fm: float, fb: float, h: float) -> float:
    return h / 6.0 * (fa + 4.0 * fm + fb)


def _adaptive(f, a, b, fa, fm, fb, whole, tol, depth, max_depth):
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = f(lm)
    frm = f(rm)
    left = _simpson(fa, flm, fm, m - a)
    right = _simpson(fm, frm, fb, b - m)
    delta = left + right - whole
    if abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    if depth >= max_depth:
        raise ConvergenceError(
            f"adaptive Simpson stalled on [{a}, {b}] with residual {abs(delta):.3e}")
    half = 0.5 * tol
    return (_adaptive(f, a, m, fa, flm, fm, left, half, depth + 1, max_depth)
            + _adaptive(f, m, b, fm, frm, fb, right, half, depth + 1, max_depth))


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-9,
    max_depth: int = 40,
    fa: Optional[float] = None,
    fb: Optional[float] = None,
    knots: Iterable[float] = (),
) -> float:
    """Integrate f over [a, b] to absolute tolerance ``tol``.

    ``fa``/``fb`` override the endpoint evaluations (one-sided limits for
    integrands with a removable endpoint mismatch; the Lebesgue integral is
    unchanged). ``knots`` are split points where the integrand may lose
    smoothness; each closed piece gets a proportional share of the budget.
    """
    if a == b:
        return 0.0
    if b < a:
        return -adaptive_simpson(f, b, a, tol, max_depth, fb, fa, knots)
    cuts = sorted({float(k) for k in knots if a < k < b})
    if cuts:
        edges = [a] + cuts + [b]
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            share = tol * (hi - lo) / (b - a)
            total += adaptive_simpson(f, lo, hi, share, max_depth,
                                      fa if lo == a else None,
                                      fb if hi == b else None)
        return total
    va = f(a) if fa is None else fa
    vb = f(b) if fb is None else fb
    vm = f(0.5 * (a + b))
    whole = _simpson(va, vm, vb, b - a)
    return _adaptive(f, a, b, va, vm, vb, whole, tol, 0, max_depth)


def project_simplex(v: np.ndarray, total: float) -> np.ndarray:
    """Euclidean projection of v onto {x >= 0, sum(x) = total}."""
    if total <= 0:
        raise ValueError("simplex total must be positive")
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - total
    ks = np.arange(1, len(v) + 1)
    cond = u - css / ks > 0
    rho = int(np.nonzero(cond)[0][-1])
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)
