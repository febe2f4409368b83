"""Systematic searches over criterion index sets.

Four scenarios are supported:

* ``grid``: one criterion per cell of an index plane (E3 strips, Dsys2/Dsys3);
* ``touching``: per photon-number cell, the best Cauchy-Schwarz criterion
  that involves that cell;
* ``local``: per cell N, the best 3x3 matrix criterion whose K and L lie
  within a box of radius d around N;
* ``index_sum``: per total index, the best moved-ball criterion.

Criteria are mapped by their raw index tuples.  Smoothing by s-ordering moves
mass upwards by about ``M * tau`` photons, so large-tau cells of a map do not
by themselves indicate where in the transformed table the negativity sits.
"""

from __future__ import annotations

import csv
import io
import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from .criteria import CriterionSpec, Family, evaluate
from .exceptions import InvalidIndices, NotCounts, ValidationError
from .kernels import KernelCache
from .pmf import JointPMF
from .quantifiers import NCResult, ncd

SCENARIOS = ("grid", "touching", "local", "index_sum")


@dataclass
class ScanReport:
    """Scan outcome.

    ``grid`` maps an index tuple to an :class:`NCResult`, or to ``None`` when no
    admissible criterion exists there.  For aggregated scenarios
    ``members[idx]`` names the criterion attaining the cell maximum.
    """

    scenario: str
    family: str
    grid: Dict[Tuple[int, ...], Optional[NCResult]]
    index_names: Tuple[str, ...]
    max_result: Optional[NCResult] = None
    max_index: Optional[Tuple[int, ...]] = None
    errors: Optional[Dict[Tuple[int, ...], float]] = None
    members: Dict[Tuple[int, ...], int] = field(default_factory=dict)

    def tau_map(self):
        """``{idx: tau or None}``."""
        return {k: (None if r is None else r.tau) for k, r in self.grid.items()}

    def to_array(self, fill=np.nan):
        """Two-index scans as a dense array (row = first index)."""
        if len(self.index_names) != 2:
            raise ValueError("only two-index scans convert to arrays")
        keys = list(self.grid)
        a = max(k[0] for k in keys) + 1
        b = max(k[1] for k in keys) + 1
        out = np.full((a, b), fill)
        for (i, j), r in self.grid.items():
            if r is not None:
                out[i, j] = r.tau
        return out

    def to_csv(self):
        """Long-form CSV: ``scenario,family,<index columns>,criterion,value,tau,nu,flag,error``."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(
            ["scenario", "family", *self.index_names, "criterion", "value", "tau", "nu", "flag", "error"]
        )
        for idx in sorted(self.grid):
            r = self.grid[idx]
            err = "" if not self.errors or idx not in self.errors else repr(self.errors[idx])
            if r is None:
                w.writerow([self.scenario, self.family, *idx, "", "", "", "", "inadmissible", err])
                continue
            w.writerow([
                self.scenario, self.family, *idx, r.criterion.label,
                repr(r.value_at_origin), repr(r.tau),
                "" if r.nu is None else (r.nu if isinstance(r.nu, str) else repr(r.nu)),
                "|".join(r.flags), err,
            ])
        return buf.getvalue()


def _finalize(scenario, family, grid, names, members=None):
    best_idx, best = None, None
    for idx in sorted(grid):
        r = grid[idx]
        if r is not None and (best is None or r.tau > best.tau):
            best_idx, best = idx, r
    return ScanReport(scenario, family, grid, names, best, best_idx, None, members or {})


def _run(specs, pmf, M, workers, cache, eps_stat):
    """Depth of each distinct spec, computed once each; returns ``{spec: NCResult}``."""
    uniq = sorted(set(specs), key=lambda s: (s.family.value, s.indices, s.arm or ""))
    job = lambda s: ncd(s, pmf, M, cache=cache, eps_stat=eps_stat)  # noqa: E731
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(job, uniq))
    else:
        results = [job(s) for s in uniq]
    return dict(zip(uniq, results))


def _range(r):
    lo, hi = r
    return range(int(lo), int(hi) + 1)


def _grid_spec(family, a, b, l, m, arm):
    try:
        if family == "E3":
            return CriterionSpec(Family.E3, (a - l, b - l, l))
        if family == "Dsys2":
            return CriterionSpec(Family.Dsys2, (a, b, m), arm or "signal")
        if family == "Dsys3":
            return CriterionSpec(Family.Dsys3, (a, b, m))
    except InvalidIndices:
        return None
    raise ValidationError(f"scan_grid supports E3, Dsys2, Dsys3; got {family!r}")


def scan_grid(family, pmf, M, ranges, l=1, m=1, arm=None, workers=1, cache=None, eps_stat=0.0):
    """Depth map of one criterion per cell.

    ``E3`` cells are photon-number pairs ``(n_s, n_i)`` at which the
    criterion with exponent ``2l`` is centred; the majorization systems take
    cells ``(k, l)`` with fixed ``m``.  ``ranges`` is ``((lo, hi), (lo, hi))``
    inclusive.
    """
    if family == "E3" and l not in (1, 2):
        raise ValidationError("E3 scans use l = 1 or l = 2")
    if family != "E3" and m != 1:
        raise ValidationError("majorization-system scans use m = 1")
    cache = cache or KernelCache()
    cells = {
        (a, b): _grid_spec(family, a, b, l, m, arm)
        for a in _range(ranges[0]) for b in _range(ranges[1])
    }
    res = _run([s for s in cells.values() if s is not None], pmf, M, workers, cache, eps_stat)
    grid = {k: (None if s is None else res[s]) for k, s in cells.items()}
    names = ("n_s", "n_i") if family == "E3" else ("k", "l")
    label = f"E3(l={l})" if family == "E3" else f"{family}(m={m})"
    return _finalize("grid", label, grid, names)


def _aggregate(cell_members, res):
    grid, members = {}, {}
    for cell, specs in cell_members.items():
        if not specs:
            grid[cell] = None
            continue
        best = None
        for i, s in enumerate(specs):
            r = res[s]
            if best is None or r.tau > best[1].tau:
                best = (i, r)
        grid[cell] = best[1]
        members[cell] = len(specs)
    return grid, members


def touching_criteria(box):
    """All nontrivial Cauchy-Schwarz criteria with N, L and 2N-L inside ``[0, box]^2``."""
    out = []
    for N in itertools.product(range(box + 1), repeat=2):
        for L in itertools.product(range(min(2 * N[0], box) + 1), range(min(2 * N[1], box) + 1)):
            R = (2 * N[0] - L[0], 2 * N[1] - L[1])
            if R[0] > box or R[1] > box or L == N:
                continue
            if L > R:  # C_N^L and C_N^(2N-L) coincide
                continue
            out.append(CriterionSpec(Family.CS, N + L))
    return out


def scan_touching(pmf, M, box, sum_max=None, workers=1, cache=None, eps_stat=0.0):
    """Per cell, max depth over Cauchy-Schwarz criteria whose index set contains it."""
    cache = cache or KernelCache()
    specs = touching_criteria(box)
    res = _run(specs, pmf, M, workers, cache, eps_stat)
    members = {}
    for a in range(box + 1):
        for b in range(box + 1):
            if sum_max is None or a + b <= sum_max:
                members[(a, b)] = []
    for s in specs:
        x = s.indices
        N, L = (x[0], x[1]), (x[2], x[3])
        R = (2 * N[0] - L[0], 2 * N[1] - L[1])
        for cell in {N, L, R}:
            if cell in members:
                members[cell].append(s)
    grid, counts = _aggregate(members, res)
    return _finalize("touching", "CS", grid, ("n_s", "n_i"), counts)


def local_criteria(N, d):
    """Distinct 3x3 matrix criteria with K, L within distance ``d`` of N (K <= L)."""
    box = [
        (a, b)
        for a in range(max(0, N[0] - d), N[0] + d + 1)
        for b in range(max(0, N[1] - d), N[1] + d + 1)
    ]
    out = []
    for K in box:
        for L in box:
            if K <= L:
                out.append(CriterionSpec(Family.M3, K + L + tuple(N)))
    return out


def scan_local(pmf, M, d, ranges, workers=1, cache=None, eps_stat=0.0):
    """Per cell N, max depth over 3x3 matrix criteria M_KLN within radius ``d``."""
    if d < 0:
        raise ValidationError("locality radius must be nonnegative")
    cache = cache or KernelCache()
    members = {
        (a, b): local_criteria((a, b), d)
        for a in _range(ranges[0]) for b in _range(ranges[1])
    }
    res = _run([s for v in members.values() for s in v], pmf, M, workers, cache, eps_stat)
    grid, counts = _aggregate(members, res)
    return _finalize("local", f"M3(d={d})", grid, ("n_s", "n_i"), counts)


def _tuples_with_sum(sigma, n):
    if n == 1:
        yield (sigma,)
        return
    for first in range(sigma + 1):
        for rest in _tuples_with_sum(sigma - first, n - 1):
            yield (first,) + rest


def index_sum_criteria(family, sigma, arm=None):
    fam = Family(family)
    n = 3 if fam is Family.DminBall3 else 4
    out = []
    for t in _tuples_with_sum(sigma, n):
        try:
            out.append(CriterionSpec(fam, t, arm if fam is Family.DminBall3 else None))
        except InvalidIndices:
            pass
    return out


def scan_index_sum(family, pmf, M, sum_range, arm=None, workers=1, cache=None, eps_stat=0.0):
    """Per index sum, max depth over admissible moved-ball criteria, with argmax."""
    if Family(family) not in (Family.DminBall3, Family.DminBall4):
        raise ValidationError("scan_index_sum supports DminBall3 and DminBall4")
    cache = cache or KernelCache()
    members = {}
    for sigma in _range(sum_range):
        specs = index_sum_criteria(family, sigma, arm)
        if specs:  # sums without admissible tuples are absent
            members[(sigma,)] = specs
    res = _run([s for v in members.values() for s in v], pmf, M, workers, cache, eps_stat)
    grid, counts = _aggregate(members, res)
    return _finalize("index_sum", Family(family).value, grid, ("sigma",), counts)


# bootstrap ------------------------------------------------------------------


def bootstrap_errors(pmf, specs, resamples=200, quantity="value", M=None, seed=0):
    """Standard errors of criterion values (or depths) under multinomial resampling.

    ``pmf`` must carry raw ``counts``.  Returns ``{spec: standard error}``.
    """
    if pmf.counts is None:
        raise NotCounts("bootstrap needs raw histogram counts, not probabilities")
    if not np.all(np.mod(pmf.counts, 1.0) == 0.0):
        raise NotCounts("bootstrap needs integer counts; the histogram holds fractions")
    if resamples < 100:
        raise ValidationError("at least 100 resamples are required")
    if quantity not in ("value", "tau"):
        raise ValidationError("quantity must be 'value' or 'tau'")
    if quantity == "tau" and M is None:
        raise ValidationError("depth bootstrap needs the mode count M")
    single = isinstance(specs, (CriterionSpec, str))
    specs = [specs] if single else list(specs)
    counts = pmf.counts
    total = int(round(counts.sum()))
    probs = counts.ravel() / counts.sum()
    rng = np.random.default_rng(seed)
    samples = {i: [] for i in range(len(specs))}
    for _ in range(resamples):
        draw = rng.multinomial(total, probs).reshape(counts.shape)
        sample = JointPMF.from_counts(draw)
        for i, s in enumerate(specs):
            if quantity == "value":
                samples[i].append(evaluate(s, sample).value)
            else:
                samples[i].append(ncd(s, sample, M).tau)
    out = {}
    for i, s in enumerate(specs):
        out[s] = float(np.std(samples[i], ddof=1))
    return out[specs[0]] if single else out
