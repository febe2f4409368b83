"""Redundancy of two-variable majorization criteria.

For ``k >= l`` and ``1 <= m <= l`` the symmetrized two-variable majorization
combination

    F(k+m, l-m) + F(l-m, k+m) - F(k, l) - F(l, k),   F(a, b) = <W_s^a W_i^b>,

is a nonnegative combination of the second differences
``E3(x-1, S-x-1, 1) = F(x+1, S-x-1) - 2F(x, S-x) + F(x-1, S-x+1)`` along the
anti-diagonal ``S = k + l``.  The weight of the difference centred at
``(x, S-x)`` is ``min(k+m-x, x-l+m, m)``.  Hence these criteria never detect
anything the E3 family misses.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from ..exceptions import InvalidIndices
from ..pmf import JointPMF, MomentVector
from .families import expand_e3
from .polynomial import Polynomial


def _check(k, l, m):
    if not (k >= l and 1 <= m <= l):
        raise InvalidIndices(f"requires k >= l and 1 <= m <= l, got ({k}, {l}, {m})")


def redundancy_lhs(k, l, m):
    """The symmetrized majorization combination as a moment polynomial."""
    _check(k, l, m)
    F = Polynomial.cell
    return F(k + m, l - m) + F(l - m, k + m) - F(k, l) - F(l, k)


def redundancy_weights(k, l, m):
    """``{x: weight}`` of the E3 differences centred at ``(x, k + l - x)``."""
    _check(k, l, m)
    a, b = k + m, l - m
    return {x: min(a - x, x - b, m) for x in range(b + 1, a)}


def redundancy_rhs(k, l, m):
    """Weighted sum of second differences (E3 criteria with l = 1)."""
    S = k + l
    out = Polynomial()
    for x, w in redundancy_weights(k, l, m).items():
        out = out + expand_e3(x - 1, S - x - 1, 1).scale(w)
    return out


def _exact_factorial_moments(pmf, max_order):
    probs = [[Fraction(float(v)) for v in row] for row in pmf.probs]
    ns, ni = len(probs), len(probs[0]) if probs else 0

    def ff(n, k):
        out = 1
        for j in range(k):
            out *= n - j
        return out

    table = {}
    for a in range(max_order + 1):
        for b in range(max_order + 1):
            table[a, b] = sum(
                (ff(x, a) * ff(y, b) * probs[x][y] for x in range(a, ns) for y in range(b, ni)),
                Fraction(0),
            )
    return table


def redundancy_residual(k, l, m, source):
    """``|LHS - RHS|`` of the redundancy identity on a pmf or a moment table.

    For a :class:`JointPMF` the factorial moments are accumulated in exact
    rationals from the stored doubles, so the residual is exactly zero unless
    the identity itself is wrong.  For a :class:`MomentVector` it is evaluated
    in double precision.
    """
    diff = redundancy_lhs(k, l, m) - redundancy_rhs(k, l, m)
    order = k + m
    if isinstance(source, JointPMF):
        table = _exact_factorial_moments(source, order)
        return float(abs(diff.evaluate_exact(lambda a, b: table[a, b])))
    if isinstance(source, MomentVector):
        value, _, _ = diff.evaluate(source.moment)
        return abs(value)
    raise TypeError("source must be a JointPMF or MomentVector")


def symbolic_redundancy_gap(k, l, m):
    """LHS - RHS as a polynomial; empty when the identity holds term by term."""
    return redundancy_lhs(k, l, m) - redundancy_rhs(k, l, m)
