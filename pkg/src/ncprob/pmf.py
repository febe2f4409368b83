"""Joint photocount / photon-number distributions and their moments.

A :class:`JointPMF` is a dense nonnegative table ``probs[n_s, n_i]`` with the
mass truncated away tracked in ``norm_deficit``.  Everything that consumes
probabilities (criteria, quantifiers) only needs the :meth:`JointPMF.prob`
cell accessor, so lazily transformed tables can stand in for it.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import (
    DivisionByVacuum,
    HistogramParseError,
    MissingOrder,
    NotChaoticLike,
    ValidationError,
)

#: tail mass tolerated when growing cutoffs or trimming tables
TAIL_TOL = 1e-12
NORM_TOL = 1e-12
SIGNED_NORM_TOL = 1e-9

ARMS = ("signal", "idler")


class TruncationWarning(UserWarning):
    """A moment order exceeds the support of the truncated distribution."""


def _arm_index(arm):
    if arm in ("signal", "s", 0):
        return 0
    if arm in ("idler", "i", 1):
        return 1
    raise ValueError(f"unknown arm {arm!r}; expected 'signal' or 'idler'")


@dataclass(frozen=True, eq=False)
class JointPMF:
    """Bipartite distribution over (n_s, n_i).

    Parameters
    ----------
    probs : array_like, shape (cutoff_s + 1, cutoff_i + 1)
        Cell probabilities.
    norm_deficit : float
        Probability mass lying outside the stored table.
    counts : array_like, optional
        Raw histogram counts the table was normalized from; required by
        bootstrap error estimation.
    signed : bool
        Allow negative cells (s-ordered quasi-probability tables).
    """

    probs: np.ndarray
    norm_deficit: float = 0.0
    counts: Optional[np.ndarray] = None
    signed: bool = False

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.ndim != 2 or p.shape[0] == 0 or p.shape[1] == 0:
            raise ValidationError("probs must be a non-empty 2-D array")
        if not np.all(np.isfinite(p)):
            raise ValidationError("probs contains non-finite entries")
        if not self.signed and np.any(p < 0):
            raise ValidationError("probabilities must be nonnegative")
        tol = SIGNED_NORM_TOL if self.signed else NORM_TOL
        total = math.fsum(p.ravel()) + float(self.norm_deficit)
        if abs(total - 1.0) > tol:
            raise ValidationError(
                f"probabilities plus norm_deficit sum to {total!r}, expected 1"
            )
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "norm_deficit", float(self.norm_deficit))
        if self.counts is not None:
            c = np.array(self.counts, dtype=float)
            if c.shape != p.shape:
                raise ValidationError("counts and probs must have the same shape")
            c.setflags(write=False)
            object.__setattr__(self, "counts", c)

    # construction -------------------------------------------------------

    @classmethod
    def from_counts(cls, counts):
        c = np.array(counts, dtype=float)
        if c.ndim != 2:
            raise ValidationError("counts must be a 2-D array")
        if np.any(c < 0):
            raise ValidationError("negative count")
        total = c.sum()
        if not total > 0:
            raise ValidationError("histogram has zero total count")
        probs = c / total
        return cls(probs, norm_deficit=0.0, counts=c)

    @classmethod
    def from_cells(cls, cells, norm_deficit=0.0):
        """Build from a mapping ``{(n_s, n_i): probability}``."""
        if not cells:
            raise ValidationError("no cells given")
        ns = max(k[0] for k in cells)
        ni = max(k[1] for k in cells)
        p = np.zeros((ns + 1, ni + 1))
        for (a, b), v in cells.items():
            p[a, b] += v
        return cls(p, norm_deficit=norm_deficit)

    @classmethod
    def delta(cls, n_s=0, n_i=0):
        p = np.zeros((n_s + 1, n_i + 1))
        p[n_s, n_i] = 1.0
        return cls(p)

    @classmethod
    def product(cls, q_s, q_i):
        q_s = np.asarray(q_s, dtype=float)
        q_i = np.asarray(q_i, dtype=float)
        p = np.outer(q_s, q_i)
        return cls(p, norm_deficit=max(0.0, 1.0 - math.fsum(p.ravel())))

    # accessors ----------------------------------------------------------

    @property
    def cutoff_s(self):
        return self.probs.shape[0] - 1

    @property
    def cutoff_i(self):
        return self.probs.shape[1] - 1

    @property
    def shape(self):
        return self.probs.shape

    def prob(self, n_s, n_i):
        """Probability of cell (n_s, n_i); zero outside the stored table."""
        if n_s < 0 or n_i < 0 or n_s > self.cutoff_s or n_i > self.cutoff_i:
            return 0.0
        return float(self.probs[n_s, n_i])

    def beyond_cutoff(self, n_s, n_i):
        return n_s > self.cutoff_s or n_i > self.cutoff_i

    def items(self):
        """Nonzero cells as ``((n_s, n_i), p)`` pairs in row-major order."""
        rows, cols = np.nonzero(self.probs)
        for a, b in zip(rows.tolist(), cols.tolist()):
            yield (a, b), float(self.probs[a, b])

    def swap(self):
        """Exchange the signal and idler arms."""
        counts = None if self.counts is None else self.counts.T
        return JointPMF(self.probs.T, self.norm_deficit, counts, self.signed)

    def total(self):
        return math.fsum(self.probs.ravel())

    def __repr__(self):
        kind = "signed table" if self.signed else "JointPMF"
        return (
            f"<{kind} cutoffs=({self.cutoff_s}, {self.cutoff_i}) "
            f"deficit={self.norm_deficit:.3g}>"
        )


@dataclass(frozen=True, eq=False)
class MomentVector:
    """Joint intensity moments ``<W_s^k W_i^l>`` for ``k, l <= max_order``.

    ``ordering`` is the ordering parameter s (1 = normal ordering).
    """

    moments: np.ndarray
    ordering: float = 1.0
    max_order: int = field(init=False)

    def __post_init__(self):
        m = np.array(self.moments, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError("moments must be a square 2-D table")
        if not np.all(np.isfinite(m)):
            raise ValidationError("moments must be finite")
        if not -1.0 <= self.ordering <= 1.0:
            raise ValidationError("ordering parameter must lie in [-1, 1]")
        m.setflags(write=False)
        object.__setattr__(self, "moments", m)
        object.__setattr__(self, "max_order", m.shape[0] - 1)

    def moment(self, k, l):
        if k < 0 or l < 0:
            raise ValueError("moment orders must be nonnegative")
        if k > self.max_order or l > self.max_order:
            raise MissingOrder(
                f"moment <W_s^{k} W_i^{l}> requested but max_order={self.max_order}"
            )
        return float(self.moments[k, l])

    def swap(self):
        return MomentVector(self.moments.T, self.ordering)


# ingestion ---------------------------------------------------------------


def _counts_from_triples(records, line_of=None):
    cells = {}
    for idx, rec in enumerate(records):
        loc = {"line": line_of(idx)} if line_of else {"offset": idx}
        if not isinstance(rec, (list, tuple)) or len(rec) != 3:
            raise HistogramParseError("expected an [n_s, n_i, count] triple", **loc)
        a, b, c = rec
        try:
            fa, fb, fc = float(a), float(b), float(c)
        except (TypeError, ValueError):
            raise HistogramParseError(f"non-numeric field in record {rec!r}", **loc)
        if not (fa.is_integer() and fb.is_integer()) or fa < 0 or fb < 0:
            raise HistogramParseError(
                f"indices must be nonnegative integers, got {a!r}, {b!r}", **loc
            )
        if not math.isfinite(fc):
            raise HistogramParseError(f"non-finite count {c!r}", **loc)
        if fc < 0:
            raise ValidationError(f"negative count {c!r} at cell ({a}, {b})")
        key = (int(fa), int(fb))
        cells[key] = cells.get(key, 0.0) + fc
    if not cells:
        raise ValidationError("histogram is empty")
    ns = max(k[0] for k in cells)
    ni = max(k[1] for k in cells)
    counts = np.zeros((ns + 1, ni + 1))
    for (a, b), c in cells.items():
        counts[a, b] = c
    return counts


def _parse_json(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise HistogramParseError(exc.msg, line=exc.lineno, offset=exc.pos) from exc
    if not isinstance(data, list):
        raise HistogramParseError("top-level JSON value must be an array", offset=0)
    return _counts_from_triples(data)


def _parse_csv(text):
    rows = [(i + 1, r) for i, r in enumerate(csv.reader(io.StringIO(text)))]
    rows = [(ln, r) for ln, r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise ValidationError("histogram is empty")
    header = [c.strip().lower() for c in rows[0][1]]
    if header == ["n_s", "n_i", "count"]:
        body = rows[1:]
        line_numbers = [ln for ln, _ in body]
        return _counts_from_triples(
            [r for _, r in body], line_of=lambda i: line_numbers[i]
        )
    # dense matrix: row index = n_s, column index = n_i
    width = len(rows[0][1])
    mat = []
    for ln, r in rows:
        if len(r) != width:
            raise HistogramParseError(
                f"dense CSV row has {len(r)} columns, expected {width}", line=ln
            )
        try:
            vals = [float(c) for c in r]
        except ValueError:
            raise HistogramParseError(f"non-numeric entry in row {r!r}", line=ln)
        if any(not math.isfinite(v) for v in vals):
            raise HistogramParseError("non-finite entry", line=ln)
        if any(v < 0 for v in vals):
            raise ValidationError(f"negative count on line {ln}")
        mat.append(vals)
    return np.array(mat)


def load_histogram(source, format="json"):
    """Read a histogram and normalize it into a :class:`JointPMF`.

    ``source`` may be bytes, text, or a binary/text file object.  JSON input
    is an array of ``[n_s, n_i, count]`` triples; CSV input either has the
    header ``n_s,n_i,count`` or is a dense matrix (row = n_s, column = n_i).
    Duplicate cells are summed.  Cutoffs equal the largest indices present.
    """
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, (bytes, bytearray)):
        source = source.decode("utf-8")
    fmt = format.lower()
    if fmt == "json":
        counts = _parse_json(source)
    elif fmt == "csv":
        counts = _parse_csv(source)
    else:
        raise ValueError(f"unsupported histogram format {format!r}")
    return JointPMF.from_counts(counts)


def dump_histogram(pmf, format="json", use_counts=False):
    """Serialize nonzero cells as JSON triples or ``n_s,n_i,count`` CSV."""
    table = pmf.counts if (use_counts and pmf.counts is not None) else pmf.probs
    rows, cols = np.nonzero(table)
    triples = [
        [int(a), int(b), float(table[a, b])] for a, b in zip(rows.tolist(), cols.tolist())
    ]
    if format == "json":
        return json.dumps(triples) + "\n"
    if format == "csv":
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["n_s", "n_i", "count"])
        for a, b, c in triples:
            w.writerow([a, b, repr(c)])
        return out.getvalue()
    raise ValueError(f"unsupported histogram format {format!r}")


# derived distributions ----------------------------------------------------


def marginal(pmf, arm):
    """One-dimensional distribution of the chosen arm."""
    return pmf.probs.sum(axis=1 - _arm_index(arm))


def _trim(table, tol=TAIL_TOL, keep=(1, 1)):
    """Drop trailing rows/columns whose combined mass stays below ``tol``.

    At least ``keep`` rows and columns survive.
    """
    row_tail = np.cumsum(table.sum(axis=1)[::-1])[::-1]
    col_tail = np.cumsum(table.sum(axis=0)[::-1])[::-1]
    half = tol / 2
    ns = table.shape[0]
    while ns > keep[0] and row_tail[ns - 1] < half:
        ns -= 1
    ni = table.shape[1]
    while ni > keep[1] and col_tail[ni - 1] < half:
        ni -= 1
    return table[:ns, :ni]


def convolve(pmf, noise_s, noise_i, tol=TAIL_TOL):
    """Add independent photon-number noise to each arm.

    ``output(n, m) = sum p(a, b) noise_s(n - a) noise_i(m - b)``.  The result
    keeps the full convolution support, then trailing rows/columns beyond the
    input cutoffs carrying less than ``tol`` of mass are dropped into
    ``norm_deficit``.
    """
    ns = np.asarray(noise_s, dtype=float)
    ni = np.asarray(noise_i, dtype=float)
    if ns.ndim != 1 or ni.ndim != 1 or ns.size == 0 or ni.size == 0:
        raise ValidationError("noise distributions must be non-empty 1-D arrays")
    if np.any(ns < 0) or np.any(ni < 0):
        raise ValidationError("noise distributions must be nonnegative")
    p = pmf.probs
    out = np.zeros((p.shape[0] + ns.size - 1, p.shape[1] + ni.size - 1))
    # separable kernel: rows first, then columns
    tmp = np.zeros((p.shape[0] + ns.size - 1, p.shape[1]))
    for j in range(p.shape[1]):
        tmp[:, j] = np.convolve(p[:, j], ns)
    for a in range(tmp.shape[0]):
        out[a, :] = np.convolve(tmp[a, :], ni)
    if not pmf.signed:
        np.clip(out, 0.0, None, out=out)
    # only the grown part is trimmed; the input support is kept
    out = _trim(out, tol, keep=p.shape)
    deficit = pmf.norm_deficit + math.fsum(p.ravel()) - math.fsum(out.ravel())
    if not pmf.signed:
        deficit = max(deficit, 0.0)
    return JointPMF(out, norm_deficit=deficit, signed=pmf.signed)


# moments -------------------------------------------------------------------


def falling_factorial(n, k):
    """Elementwise n (n-1) ... (n-k+1) for an integer array ``n``."""
    n = np.asarray(n, dtype=float)
    out = np.ones_like(n)
    for j in range(k):
        out = out * (n - j)
    return out


def factorial_moment(pmf, k, l):
    """Normally ordered joint intensity moment ``<W_s^k W_i^l>``.

    Equal to the joint falling-factorial moment of the photon numbers.  When an
    order exceeds the stored support a :class:`TruncationWarning` is emitted,
    since truncated tails bias high-order moments.
    """
    if k < 0 or l < 0:
        raise ValueError("moment orders must be nonnegative")
    if k > pmf.cutoff_s or l > pmf.cutoff_i:
        warnings.warn(
            f"order ({k}, {l}) exceeds cutoffs ({pmf.cutoff_s}, {pmf.cutoff_i})",
            TruncationWarning,
            stacklevel=2,
        )
    ws = falling_factorial(np.arange(pmf.cutoff_s + 1), k)
    wi = falling_factorial(np.arange(pmf.cutoff_i + 1), l)
    return float(ws @ pmf.probs @ wi)


def moment_vector(pmf, max_order):
    """All normally ordered moments up to ``max_order`` in each arm."""
    ns = np.arange(pmf.cutoff_s + 1)
    ni = np.arange(pmf.cutoff_i + 1)
    fs = np.array([falling_factorial(ns, k) for k in range(max_order + 1)])
    fi = np.array([falling_factorial(ni, l) for l in range(max_order + 1)])
    return MomentVector(fs @ pmf.probs @ fi.T, ordering=1.0)


def modified_moment(pmf, n_s, n_i):
    """``n_s! n_i! p(n_s, n_i) / p(0, 0)``: moments of the vacuum-weighted field."""
    p00 = pmf.prob(0, 0)
    if p00 == 0:
        raise DivisionByVacuum("p(0,0) = 0: modified moments are undefined")
    return math.factorial(n_s) * math.factorial(n_i) * pmf.prob(n_s, n_i) / p00


def modified_moments(pmf, max_order):
    """:class:`MomentVector` of modified moments up to ``max_order``."""
    p00 = pmf.prob(0, 0)
    if p00 == 0:
        raise DivisionByVacuum("p(0,0) = 0: modified moments are undefined")
    out = np.zeros((max_order + 1, max_order + 1))
    for a in range(max_order + 1):
        for b in range(max_order + 1):
            out[a, b] = math.factorial(a) * math.factorial(b) * pmf.prob(a, b) / p00
    return MomentVector(out, ordering=1.0)


def estimate_modes(pmf, arm="mean"):
    """Chaotic-field mode count ``<W>^2 / <(dW)^2>`` from factorial moments.

    ``arm='mean'`` averages the signal and idler estimates.
    """
    if arm == "mean":
        return 0.5 * (estimate_modes(pmf, "signal") + estimate_modes(pmf, "idler"))
    a = _arm_index(arm)
    k1, l1 = (1, 0) if a == 0 else (0, 1)
    k2, l2 = (2, 0) if a == 0 else (0, 2)
    w1 = factorial_moment(pmf, k1, l1)
    w2 = factorial_moment(pmf, k2, l2)
    var = w2 - w1 * w1
    if not var > 64 * np.finfo(float).eps * max(w2, w1 * w1, 1e-300):
        raise NotChaoticLike(
            f"normally ordered intensity variance {var:.3g} is not positive on the {ARMS[a]} arm"
        )
    return w1 * w1 / var
