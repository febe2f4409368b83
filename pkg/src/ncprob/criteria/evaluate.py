"""Evaluate criteria on probability tables or moment tables."""

from __future__ import annotations

from functools import lru_cache

from ..exceptions import DivisionByVacuum
from . import families
from .polynomial import ROUNDING_GUARD
from .spec import CriterionSpec, CriterionValue, Family, parse_label

_MINBALL = (Family.DminBall3, Family.DminBall4)


@lru_cache(maxsize=4096)
def _poly(spec_key, probability):
    spec = spec_key
    if probability:
        return families.probability_polynomial(spec)
    return families.moment_polynomial(spec)


@lru_cache(maxsize=1024)
def _candidates(spec, probability):
    return tuple(families.candidate_polynomials(spec, probability))


def polynomial(spec, representation=None):
    """The polynomial evaluated for ``spec`` (not defined for moved-ball minima)."""
    spec = _as_spec(spec)
    rep = representation or spec.representation
    return _poly(spec.with_representation("probability"), rep == "probability")


def _as_spec(spec):
    return parse_label(spec) if isinstance(spec, str) else spec


def _finish(poly, getter, eps_stat, details=None):
    value, scale, vals = poly.evaluate(getter)
    if abs(value) <= ROUNDING_GUARD * scale:
        value = 0.0
    terms = tuple((float(c), cells, v) for (c, cells), v in zip(poly.terms, vals))
    return CriterionValue(value, value < -eps_stat, terms, scale, eps_stat, dict(details or {}))


def _min_over(cands, getter, eps_stat):
    best = None
    diag = []
    for i, (hi, ok, poly) in enumerate(cands):
        if not ok:
            diag.append({"candidate": i + 1, "tuple": hi, "admissible": False, "value": None})
            continue
        cv = _finish(poly, getter, eps_stat)
        diag.append({"candidate": i + 1, "tuple": hi, "admissible": True, "value": cv.value})
        if best is None or cv.value < best[1].value:
            best = (i + 1, cv)
    idx, cv = best
    return CriterionValue(
        cv.value, cv.negative, cv.terms, cv.scale, eps_stat,
        {"attained_by": idx, "candidates": diag},
    )


def _prefetch(source, cells):
    pre = getattr(source, "prefetch", None)
    if pre is not None:
        pre(cells)


def eval_probability(spec, source, eps_stat=0.0):
    """Criterion value on a probability table.

    ``source`` is anything with a ``prob(n_s, n_i)`` accessor: a
    :class:`~ncprob.pmf.JointPMF` or one of the lazily transformed tables.
    """
    spec = _as_spec(spec).with_representation("probability")
    if families.requires_vacuum(spec) and source.prob(0, 0) == 0:
        raise DivisionByVacuum(f"{spec.label} needs p(0,0) > 0")
    getter = source.prob
    if spec.family in _MINBALL:
        cands = _candidates(spec, True)
        _prefetch(source, sorted({c for _, ok, p in cands if ok for c in p.cells()}))
        return _min_over(cands, getter, eps_stat)
    poly = _poly(spec, True)
    _prefetch(source, poly.cells())
    return _finish(poly, getter, eps_stat)


def eval_moment(spec, moments, eps_stat=0.0):
    """Criterion value on a :class:`~ncprob.pmf.MomentVector` (any ordering)."""
    spec = _as_spec(spec).with_representation("probability")
    getter = moments.moment
    if spec.family in _MINBALL:
        return _min_over(_candidates(spec, False), getter, eps_stat)
    return _finish(_poly(spec, False), getter, eps_stat)


def evaluate(spec, source, eps_stat=0.0):
    """Dispatch on ``spec.representation``."""
    spec = _as_spec(spec)
    if spec.representation == "moment":
        return eval_moment(spec, source, eps_stat)
    return eval_probability(spec, source, eps_stat)


def min_ball(spec, source, eps_stat=0.0):
    """Moved-ball minimum with per-candidate diagnostics in ``details``."""
    spec = _as_spec(spec)
    if spec.family not in _MINBALL:
        raise ValueError("min_ball expects a DminBall3 or DminBall4 criterion")
    return evaluate(spec, source, eps_stat)


def required_moment_order(spec):
    """Largest single-arm moment order the moment form touches."""
    spec = _as_spec(spec)
    if spec.family in _MINBALL:
        cells = [c for _, ok, p in _candidates(spec, False) if ok for c in p.cells()]
    else:
        cells = _poly(spec.with_representation("probability"), False).cells()
    return max((max(a, b) for a, b in cells), default=0)


def required_cells(spec):
    """Probability cells the probability form touches."""
    spec = _as_spec(spec).with_representation("probability")
    if spec.family in _MINBALL:
        return sorted({c for _, ok, p in _candidates(spec, True) if ok for c in p.cells()})
    return _poly(spec, True).cells()
