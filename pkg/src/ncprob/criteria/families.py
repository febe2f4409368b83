"""Polynomial forms of every criterion family.

Each family has a moment form (cells are ``<W_s^a W_i^b>``) and a probability
form (cells are ``p(a, b)``).  For the polynomial families E3/E4 the
probability form is obtained by mapping the moment form through
``<W_s^a W_i^b> -> a! b! p(a, b) / p(0, 0)`` and dividing by a positive
normalization.  The remaining families have hand-written probability forms;
:func:`mapped_probability_polynomial` provides the mapped version for
cross-checking them.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb, factorial

from .polynomial import Polynomial
from .spec import Family, minball3_candidates, minball4_candidates

P = Polynomial.cell


def vfact(v):
    """Factorial of a vector index ``(a, b)``: ``a! b!``."""
    return factorial(v[0]) * factorial(v[1])


def _vadd(*vs):
    return (sum(v[0] for v in vs), sum(v[1] for v in vs))


def _vscale(c, v):
    return (c * v[0], c * v[1])


def _arm_cell(arm, m):
    return (m, 0) if arm == "signal" else (0, m)


def _g(a, b):
    return P(a, b) + P(b, a)


# moment forms ----------------------------------------------------------------


def expand_e3(ks, ki, l):
    """``<W_s^ks W_i^ki (W_s - W_i)^(2l)>`` as a sum of joint moments."""
    return Polynomial(
        ((-1) ** j * comb(2 * l, j), ((ks + 2 * l - j, ki + j),)) for j in range(2 * l + 1)
    )


def expand_e4(ks, ki, ls, li):
    """Central-moment form with ``<W_s>`` and ``<W_i>`` kept as separate factors."""
    terms = []
    for a in range(2 * ls + 1):
        for b in range(2 * li + 1):
            c = (-1) ** (a + b) * comb(2 * ls, a) * comb(2 * li, b)
            cells = ((ks + 2 * ls - a, ki + 2 * li - b),) + ((1, 0),) * a + ((0, 1),) * b
            terms.append((c, cells))
    return Polynomial(terms)


def _mom(v):
    return P(*v)


def cs_moment(N, L):
    M2N_L = _vadd(_vscale(2, N), _vscale(-1, L))
    return _mom(L) * _mom(M2N_L) - _mom(N) * _mom(N)


def m2_moment(L, N):
    return _mom(_vscale(2, L)) * _mom(_vscale(2, N)) - _mom(_vadd(L, N)) ** 2


def _det3(K, L, N, cell):
    a, b, c = cell(_vscale(2, K)), cell(_vscale(2, L)), cell(_vscale(2, N))
    d, e, f = cell(_vadd(K, L)), cell(_vadd(K, N)), cell(_vadd(L, N))
    return a * b * c + d * e * f * 2 - a * f * f - b * e * e - c * d * d


def m3_moment(K, L, N):
    return _det3(K, L, N, _mom)


def f3_moment(arm, k, l, m):
    ma = lambda x: P(*_arm_cell(arm, x))  # noqa: E731
    return _g(k, l) * ma(m) + _g(m, k) * ma(l) + _g(l, m) * ma(k)


def f4_moment(k, l, m, n):
    return _g(k, l) * _g(m, n) + _g(k, m) * _g(l, n) + _g(k, n) * _g(l, m)


def dmn_moment(k, l, m, n):
    r = (k + l) // 2 - 1
    half = Fraction(1, 2)
    lead = _g(k + m, l + n) + _g(k + m, 0) * _g(l + n, 0) * Fraction(k + l, 2)
    tail = _g(m, n) * _g(1, 1) * half + _g(m, 1) * _g(n, 1) * Fraction(k + l, 2)
    return lead - tail * (_g(1, 1) * half) ** r


# hand-written probability forms ----------------------------------------------


def cs_probability(N, L):
    M2N_L = _vadd(_vscale(2, N), _vscale(-1, L))
    w = Fraction(vfact(M2N_L) * vfact(L), vfact(N) ** 2)
    return P(*L) * P(*M2N_L) * w - P(*N) * P(*N)


def m2_probability(L, N):
    A, B, C = _vscale(2, L), _vscale(2, N), _vadd(L, N)
    return P(*A) * P(*B) * Fraction(vfact(A) * vfact(B), vfact(C) ** 2) - P(*C) * P(*C)


def m3_probability(K, L, N):
    two = lambda v: _vscale(2, v)  # noqa: E731
    den = vfact(two(K)) * vfact(two(L)) * vfact(two(N))

    def block(X, Y, Z):
        # p(2X)[p(2Y)p(2Z) - (Y+Z)!^2 / ((2Y)!(2Z)!) p^2(Y+Z)]
        YZ = _vadd(Y, Z)
        w = Fraction(vfact(YZ) ** 2, vfact(two(Y)) * vfact(two(Z)))
        return P(*two(X)) * (P(*two(Y)) * P(*two(Z)) - P(*YZ) * P(*YZ) * w)

    cyc = block(K, L, N) + block(N, K, L) + block(L, N, K)
    KL, KN, LN = _vadd(K, L), _vadd(K, N), _vadd(L, N)
    w = Fraction(vfact(KL) * vfact(KN) * vfact(LN), den)
    cross = P(*KL) * P(*KN) * P(*LN) * w - P(*two(K)) * P(*two(L)) * P(*two(N))
    return cyc + cross * 2


def f3_probability(arm, k, l, m):
    pa = lambda x: P(*_arm_cell(arm, x))  # noqa: E731
    body = _g(k, l) * pa(m) + _g(m, k) * pa(l) + _g(l, m) * pa(k)
    return body * (factorial(k) * factorial(l) * factorial(m))


def f4_probability(k, l, m, n):
    body = _g(k, l) * _g(m, n) + _g(k, m) * _g(l, n) + _g(k, n) * _g(l, m)
    return body * (factorial(k) * factorial(l) * factorial(m) * factorial(n))


def dmn_probability(k, l, m, n):
    r = (k + l) // 2 - 1
    h = Fraction(k + l, 2)
    p00, p11 = P(0, 0), P(1, 1)
    w = Fraction(factorial(k + m) * factorial(l + n), factorial(m) * factorial(n))
    lead = (_g(k + m, l + n) * p00 + _g(k + m, 0) * _g(l + n, 0) * h) * p00**r * w
    tail = (_g(m, n) * p11 + _g(m, 1) * _g(n, 1) * h) * p11**r
    return lead - tail


def e3_reference(ks, ki, l):
    """Probability forms centred at ``(K, I) = (ks + l, ki + l)`` for l = 1, 2, as printed."""
    K, I = ks + l, ki + l
    F = Fraction
    if l == 1:
        return (
            P(K + 1, I - 1) * F(K + 1, I)
            + P(K - 1, I + 1) * F(I + 1, K)
            - P(K, I) * 2
        )
    if l == 2:
        return (
            P(K + 2, I - 2) * F((K + 2) * (K + 1), I * (I - 1))
            + P(K, I) * 6
            + P(K - 2, I + 2) * F((I + 2) * (I + 1), K * (K - 1))
            - P(K + 1, I - 1) * F(4 * (K + 1), I)
            - P(K - 1, I + 1) * F(4 * (I + 1), K)
        )
    raise ValueError("printed forms exist for l = 1, 2 only")


def e4_reference(ks, ki, ls, li):
    """Printed probability forms for ``(ls, li) = (1, 0)`` and ``(0, 1)``; labels centred."""
    p00 = P(0, 0)
    if (ls, li) == (1, 0):
        K, I = ks + 1, ki
        return (
            P(K + 1, I) * p00 * p00 * (K + 1)
            + P(K - 1, I) * P(1, 0) * P(1, 0) * Fraction(1, K)
            - P(K, I) * P(1, 0) * p00 * 2
        )
    if (ls, li) == (0, 1):
        K, I = ks, ki + 1
        return (
            P(K, I + 1) * p00 * p00 * (I + 1)
            + P(K, I - 1) * P(0, 1) * P(0, 1) * Fraction(1, I)
            - P(K, I) * P(0, 1) * p00 * 2
        )
    raise ValueError("printed forms exist for (ls, li) in {(1, 0), (0, 1)} only")


# dispatch -------------------------------------------------------------------


def _vec(x, i):
    return (x[2 * i], x[2 * i + 1])


def _d3_pair(arm, x):
    return x[:3], x[3:]


def system_tuples(spec):
    """Majorizing and majorized tuples of a parametric majorization system."""
    k, l, m = spec.indices[:3]
    if spec.family is Family.Dsys1:
        return (k + m, k, l - m), (k, k, l)
    if spec.family is Family.Dsys2:
        return (k + m, k - m, l), (k, k, l)
    if spec.family is Family.Dsys3:
        return (k + m, k, l, l - m), (k, k, l, l)
    raise ValueError(f"{spec.family} is not a parametric system")


def minball_candidates(spec):
    x = spec.indices
    if spec.family is Family.DminBall3:
        return minball3_candidates(*x)
    if spec.family is Family.DminBall4:
        return minball4_candidates(*x)
    raise ValueError(f"{spec.family} is not a moved-ball minimum")


def _majorization_polys(arm, hi, lo, probability):
    if len(hi) == 3:
        f = f3_probability if probability else f3_moment
        return f(arm, *hi) - f(arm, *lo)
    f = f4_probability if probability else f4_moment
    return f(*hi) - f(*lo)


def moment_polynomial(spec):
    """Moment form of a single-polynomial criterion (moved-ball minima excluded)."""
    f, x = spec.family, spec.indices
    if f is Family.E3:
        return expand_e3(*x)
    if f is Family.E4:
        return expand_e4(*x)
    if f is Family.CS:
        return cs_moment(_vec(x, 0), _vec(x, 1))
    if f is Family.M2:
        return m2_moment(_vec(x, 0), _vec(x, 1))
    if f is Family.M3:
        return m3_moment(_vec(x, 0), _vec(x, 1), _vec(x, 2))
    if f in (Family.D3, Family.D4):
        h = len(x) // 2
        return _majorization_polys(spec.arm, x[:h], x[h:], False)
    if f in (Family.Dsys1, Family.Dsys2, Family.Dsys3):
        hi, lo = system_tuples(spec)
        return _majorization_polys(spec.arm, hi, lo, False)
    if f is Family.Dmn:
        return dmn_moment(*x)
    if f is Family.AppendixA:
        from .appendix import appendix_polynomial

        return appendix_polynomial(x[0], spec.arm).probabilities_to_moments()
    raise ValueError(f"{f.value} has no single moment polynomial")


def mapping_normalization(spec):
    """Positive constant dividing the mapped moment form to give the probability form.

    The vacuum power ``p(0,0)^degree`` is produced by the mapping itself.
    """
    f, x = spec.family, spec.indices
    if f is Family.E3:
        ks, ki, l = x
        return factorial(ks + l) * factorial(ki + l)
    if f is Family.E4:
        ks, ki, ls, li = x
        return factorial(ks + ls) * factorial(ki + li)
    if f is Family.CS:
        return vfact(_vec(x, 0)) ** 2
    if f is Family.M2:
        return vfact(_vadd(_vec(x, 0), _vec(x, 1))) ** 2
    if f is Family.M3:
        return vfact(_vscale(2, _vec(x, 0))) * vfact(_vscale(2, _vec(x, 1))) * vfact(
            _vscale(2, _vec(x, 2))
        )
    if f is Family.Dmn:
        return factorial(x[2]) * factorial(x[3])
    return 1


def mapped_probability_polynomial(spec):
    """Probability form derived purely by mapping the moment form."""
    return moment_polynomial(spec).moments_to_probabilities().scale(
        Fraction(1, mapping_normalization(spec))
    )


def probability_polynomial(spec):
    """Probability form used for evaluation (moved-ball minima excluded)."""
    f, x = spec.family, spec.indices
    if f in (Family.E3, Family.E4):
        return mapped_probability_polynomial(spec)
    if f is Family.CS:
        return cs_probability(_vec(x, 0), _vec(x, 1))
    if f is Family.M2:
        return m2_probability(_vec(x, 0), _vec(x, 1))
    if f is Family.M3:
        return m3_probability(_vec(x, 0), _vec(x, 1), _vec(x, 2))
    if f in (Family.D3, Family.D4):
        h = len(x) // 2
        return _majorization_polys(spec.arm, x[:h], x[h:], True)
    if f in (Family.Dsys1, Family.Dsys2, Family.Dsys3):
        hi, lo = system_tuples(spec)
        return _majorization_polys(spec.arm, hi, lo, True)
    if f is Family.Dmn:
        return dmn_probability(*x)
    if f is Family.AppendixA:
        from .appendix import appendix_polynomial

        return appendix_polynomial(x[0], spec.arm)
    raise ValueError(f"{f.value} has no single probability polynomial")


def candidate_polynomials(spec, probability=True):
    """``[(tuple, admissible, polynomial or None)]`` for a moved-ball minimum."""
    base = spec.indices
    out = []
    for hi, ok in minball_candidates(spec):
        poly = _majorization_polys(spec.arm, hi, base, probability) if ok else None
        out.append((hi, ok, poly))
    return out


def requires_vacuum(spec):
    """Families whose probability form is only meaningful when p(0,0) > 0."""
    if spec.family in (Family.E4, Family.Dmn):
        return True
    if spec.family is Family.AppendixA:
        from .appendix import APPENDIX

        return APPENDIX[spec.indices[0]].requires_vacuum
    return False
