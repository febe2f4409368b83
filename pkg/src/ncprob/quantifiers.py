"""Non-classicality depth (tau) and counting parameter (nu) of any criterion.

Both quantities are thresholds of a one-parameter family of transformed
fields:

* depth: the criterion is evaluated on the s-ordered table and ``s`` is
  lowered from 1 until the negativity disappears; ``tau = (1 - s_th) / 2``;
* counting parameter: thermal noise with ``nu`` photons per mode in ``M``
  modes is mixed into each arm until the negativity disappears.

Roots are bracketed on a grid (depth) or by geometric expansion (counting
parameter) and refined by bisection.  When the criterion changes sign more
than once along the grid, the root closest to the untransformed field is
reported and the result is flagged.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np

from .criteria import CriterionSpec, CriterionValue, parse_label
from .criteria.evaluate import eval_moment, eval_probability, polynomial, required_moment_order
from .criteria.spec import Family
from .exceptions import MissingOrder, ValidationError
from .kernels import KernelCache, NoisedCells, OrderedCells, transform_moments
from .pmf import JointPMF, MomentVector, moment_vector

GRID_POINTS = 33
S_TOL = 1e-4
S_FLOOR_OFFSET = 1e-3
NU_START = 1e-3
NU_CAP = 1e3
NU_REL_TOL = 1e-4
MAX_BISECTIONS = 200

TAU_CAP = (1.0 - (-1.0 + S_FLOOR_OFFSET)) / 2.0


@dataclass(frozen=True)
class NCResult:
    """Outcome of a depth or counting-parameter search.

    ``bracket`` is the final interval in the reported quantity (tau or nu).
    ``flags`` may contain ``cap`` (negative down to the lowest s),
    ``unbounded`` (negative up to the noise cap), ``multiple_roots`` and
    ``boundary`` (zero on the untransformed field but negative right after
    the smallest transform step).
    """

    criterion: CriterionSpec
    tau: Optional[float] = None
    nu: Union[float, str, None] = None
    bracket: Tuple[float, float] = (0.0, 0.0)
    evaluations: int = 0
    modes_used: float = 1.0
    verdict_at_origin: Optional[CriterionValue] = field(default=None, repr=False)
    flags: Tuple[str, ...] = ()
    route: str = "probability"

    @property
    def modes_tau(self):
        """``M * tau``: mean thermal photons added per arm at the threshold."""
        return None if self.tau is None else self.modes_used * self.tau

    @property
    def value_at_origin(self):
        return None if self.verdict_at_origin is None else self.verdict_at_origin.value


def _spec(spec):
    return parse_label(spec) if isinstance(spec, str) else spec


def _degree(spec):
    if spec.family in (Family.DminBall3, Family.DminBall4):
        return 2
    return polynomial(spec, "probability").degree


class _Counter:
    def __init__(self, fn):
        self.fn = fn
        self.calls = 0

    def __call__(self, x):
        self.calls += 1
        return self.fn(x)


def _depth_search(spec, G, origin, modes, route):
    """Shared grid + bisection logic; ``G(s)`` returns a CriterionValue."""
    flags = []
    if not origin.negative:
        # a criterion sitting exactly on zero may still turn negative for s < 1
        if origin.value != 0.0 or not G(1.0 - S_TOL).negative:
            return NCResult(spec, tau=0.0, bracket=(0.0, 0.0), evaluations=G.calls,
                            modes_used=modes, verdict_at_origin=origin, route=route)
        flags.append("boundary")
    grid = np.linspace(1.0, -1.0 + S_FLOOR_OFFSET, GRID_POINTS)
    signs = [True]
    for s in grid[1:]:
        signs.append(G(float(s)).negative)
    first = next((j for j, neg in enumerate(signs) if not neg), None)
    if first is None:
        return NCResult(spec, tau=TAU_CAP, bracket=(TAU_CAP, 1.0), evaluations=G.calls,
                        modes_used=modes, verdict_at_origin=origin,
                        flags=tuple(flags) + ("cap",), route=route)
    if any(signs[first:]):
        flags.append("multiple_roots")
    hi, lo = float(grid[first - 1]), float(grid[first])  # G(hi) < 0 <= G(lo)
    while hi - lo > S_TOL:
        mid = 0.5 * (hi + lo)
        if G(mid).negative:
            hi = mid
        else:
            lo = mid
    s_root = 0.5 * (hi + lo)
    return NCResult(spec, tau=(1.0 - s_root) / 2.0, bracket=((1.0 - hi) / 2.0, (1.0 - lo) / 2.0),
                    evaluations=G.calls, modes_used=modes, verdict_at_origin=origin,
                    flags=tuple(flags), route=route)


def ncd(spec, pmf, M, M_idler=None, eps_stat=0.0, cache=None):
    """Non-classicality depth from the s-ordered probability table."""
    spec = _spec(spec).with_representation("probability")
    if M <= 0:
        raise ValidationError("mode count must be positive")
    cache = cache if cache is not None else KernelCache()
    origin = eval_probability(spec, pmf, eps_stat)

    def raw(s):
        return eval_probability(spec, OrderedCells(pmf, s, M, M_idler, cache), eps_stat)

    return _depth_search(spec, _Counter(raw), origin, float(M), "probability")


def moment_ncd(spec, moments, M, M_idler=None, eps_stat=0.0):
    """Non-classicality depth from s-ordered intensity moments.

    ``moments`` may also be a :class:`JointPMF`, whose normally ordered
    moments are then extracted up to the order the criterion needs.
    """
    spec = _spec(spec).with_representation("moment")
    need = required_moment_order(spec)
    if isinstance(moments, JointPMF):
        moments = moment_vector(moments, need)
    if need > moments.max_order:
        raise MissingOrder(f"{spec.label} needs moments up to order {need}")
    origin = eval_moment(spec, moments, eps_stat)

    def raw(s):
        return eval_moment(spec, transform_moments(moments, s, M, M_idler), eps_stat)

    return _depth_search(spec, _Counter(raw), origin, float(M), "moment")


def nccp(spec, pmf, M, nu_cap=NU_CAP, M_idler=None, eps_stat=0.0):
    """Non-classicality counting parameter from noise-mixed probability tables."""
    spec = _spec(spec).with_representation("probability")
    if nu_cap <= 0:
        raise ValidationError("nu_cap must be positive")
    if M <= 0:
        raise ValidationError("mode count must be positive")
    origin = eval_probability(spec, pmf, eps_stat)
    deg = _degree(spec)

    def raw(nu):
        cells = NoisedCells(pmf, nu, M, M_idler=M_idler)
        # the lazy table is scaled by 1/c; rescale the statistical threshold
        thr = eps_stat
        if eps_stat > 0:
            from .kernels import mandel_rice

            c = mandel_rice(0, nu, M) * mandel_rice(0, nu, M if M_idler is None else M_idler)
            thr = eps_stat / c**deg if c > 0 else math.inf
        return eval_probability(spec, cells, thr)

    H = _Counter(raw)
    flags = ()
    if not origin.negative:
        if origin.value != 0.0 or not H(NU_START * S_TOL).negative:
            return NCResult(spec, nu=0.0, bracket=(0.0, 0.0), evaluations=H.calls,
                            modes_used=float(M), verdict_at_origin=origin)
        flags = ("boundary",)
    lo, hi = 0.0, NU_START
    while H(hi).negative:
        if hi >= nu_cap:
            return NCResult(spec, nu="unbounded", bracket=(nu_cap, math.inf),
                            evaluations=H.calls, modes_used=float(M),
                            verdict_at_origin=origin, flags=flags + ("unbounded",))
        lo, hi = hi, min(2.0 * hi, nu_cap)
    it = 0
    while hi - lo > NU_REL_TOL * hi and it < MAX_BISECTIONS:
        mid = 0.5 * (lo + hi)
        if H(mid).negative:
            lo = mid
        else:
            hi = mid
        it += 1
    return NCResult(spec, nu=0.5 * (lo + hi), bracket=(lo, hi), evaluations=H.calls,
                    modes_used=float(M), verdict_at_origin=origin, flags=flags)


def ncd_many(specs, pmf, M, workers=1, **kw):
    """Depths for many criteria sharing one kernel cache; order is preserved."""
    cache = kw.pop("cache", None) or KernelCache()
    specs = [_spec(s) for s in specs]
    if workers <= 1:
        return [ncd(s, pmf, M, cache=cache, **kw) for s in specs]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(lambda s: ncd(s, pmf, M, cache=cache, **kw), specs))


def _num(x):
    if x is None:
        return ""
    return x if isinstance(x, str) else repr(float(x))


def results_to_csv(results, quantity="tau"):
    """One row per result: ``name,indices,value_at_origin,<quantity>,bracket_lo,bracket_hi,flags,route``."""
    if quantity not in ("tau", "nu"):
        raise ValidationError("quantity must be 'tau' or 'nu'")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "indices", "value_at_origin", quantity, "bracket_lo", "bracket_hi", "flags", "route"])
    for r in results:
        lo, hi = r.bracket
        w.writerow([
            r.criterion.label, " ".join(str(i) for i in r.criterion.indices),
            _num(r.value_at_origin), _num(getattr(r, quantity)), _num(lo), _num(hi),
            "|".join(r.flags), r.route,
        ])
    return buf.getvalue()
