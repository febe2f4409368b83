"""Sparse polynomials over table cells.

A :class:`Polynomial` is a sum of terms ``coef * x(a1, b1) * x(a2, b2) * ...``
where ``x`` is either a probability ``p(a, b)`` or a moment
``<W_s^a W_i^b>`` depending on how it is evaluated.  Coefficients are exact
rationals so that symbolic identities can be checked without rounding.
"""

from __future__ import annotations

import math
from collections import defaultdict
from fractions import Fraction
from typing import Callable, Iterable, Tuple

import numpy as np

Cell = Tuple[int, int]
VACUUM: Cell = (0, 0)

#: multiple of machine epsilon times the absolute term sum treated as rounding noise
ROUNDING_GUARD = 64 * np.finfo(float).eps


def _canon(cells):
    return tuple(sorted(cells))


class Polynomial:
    """Immutable sum of rational-coefficient monomials in table cells."""

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable = ()):
        acc = defaultdict(Fraction)
        for coef, cells in terms:
            acc[_canon(cells)] += Fraction(coef)
        # sorted by cells so that output and hashing are deterministic
        self.terms = tuple((acc[k], k) for k in sorted(acc) if acc[k] != 0)

    # construction helpers -------------------------------------------------

    @classmethod
    def cell(cls, a, b, coef=1):
        return cls([(coef, ((a, b),))])

    @classmethod
    def constant(cls, coef):
        return cls([(coef, ())])

    def __add__(self, other):
        return Polynomial(self.terms + other.terms)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            return self.scale(other)
        return Polynomial(
            (c1 * c2, k1 + k2) for c1, k1 in self.terms for c2, k2 in other.terms
        )

    __rmul__ = __mul__

    def __pow__(self, n):
        out = Polynomial.constant(1)
        for _ in range(n):
            out = out * self
        return out

    def scale(self, factor):
        f = Fraction(factor)
        return Polynomial((c * f, k) for c, k in self.terms)

    def __eq__(self, other):
        return isinstance(other, Polynomial) and self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def __repr__(self):
        return f"Polynomial({self.format()})"

    # structure --------------------------------------------------------------

    def cells(self):
        return sorted({c for _, k in self.terms for c in k})

    def degrees(self):
        return sorted({len(k) for _, k in self.terms})

    @property
    def degree(self):
        return max((len(k) for _, k in self.terms), default=0)

    def is_zero(self):
        return not self.terms

    def map_cells(self, fn: Callable[[Cell], Cell]):
        return Polynomial((c, tuple(fn(x) for x in k)) for c, k in self.terms)

    def swap(self):
        return self.map_cells(lambda x: (x[1], x[0]))

    def homogenize(self, degree=None):
        """Pad every monomial with vacuum factors up to ``degree``."""
        d = self.degree if degree is None else degree
        return Polynomial((c, k + (VACUUM,) * (d - len(k))) for c, k in self.terms)

    def drop_vacuum(self):
        """Remove vacuum factors (valid for moments, where <1> = 1)."""
        return Polynomial((c, tuple(x for x in k if x != VACUUM)) for c, k in self.terms)

    def moments_to_probabilities(self):
        """Substitute ``<W_s^a W_i^b> -> a! b! p(a, b) / p(0, 0)`` and clear denominators.

        The result equals the moment polynomial evaluated on the vacuum-weighted
        moments times ``p(0, 0)^degree``, a positive factor.
        """
        d = self.drop_vacuum().degree
        out = []
        for c, k in self.drop_vacuum().terms:
            w = 1
            for a, b in k:
                w *= math.factorial(a) * math.factorial(b)
            out.append((c * w, k + (VACUUM,) * (d - len(k))))
        return Polynomial(out)

    def probabilities_to_moments(self):
        """Inverse substitution ``p(a, b) -> <W_s^a W_i^b> / (a! b!)`` for homogeneous forms."""
        if len(self.degrees()) > 1:
            raise ValueError("inverse mapping needs a homogeneous probability polynomial")
        out = []
        for c, k in self.terms:
            w = Fraction(1)
            for a, b in k:
                w /= math.factorial(a) * math.factorial(b)
            out.append((c * w, k))
        return Polynomial(out).drop_vacuum()

    # evaluation ------------------------------------------------------------

    def term_values(self, getter):
        cache = {}

        def get(x):
            if x not in cache:
                cache[x] = getter(*x)
            return cache[x]

        vals = []
        for c, k in self.terms:
            # multiply in value order so mirrored inputs give identical bits
            v = float(c)
            for f in sorted(get(x) for x in k):
                v *= f
            vals.append(v)
        return vals

    def evaluate(self, getter):
        """Return ``(value, absolute term sum, per-term values)`` in double precision."""
        vals = self.term_values(getter)
        return math.fsum(vals), math.fsum(abs(v) for v in vals), vals

    def evaluate_exact(self, getter):
        """Exact rational value; ``getter`` should return Fractions or floats."""
        total = Fraction(0)
        for c, k in self.terms:
            v = Fraction(c)
            for x in k:
                v *= Fraction(getter(*x))
            total += v
        return total

    def format(self, symbol="p"):
        if not self.terms:
            return "0"
        parts = []
        for c, k in self.terms:
            mono = "*".join(f"{symbol}({a},{b})" for a, b in k) or "1"
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            coef = "" if mag == 1 and k else f"{mag}*" if k else f"{mag}"
            parts.append(f"{sign} {coef}{mono}")
        s = " ".join(parts)
        return s[2:] if s.startswith("+ ") else "-" + s[2:]
