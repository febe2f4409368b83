"""Criterion identifiers, their index constraints and text labels."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Optional, Tuple

from ..exceptions import InvalidIndices
from ..pmf import ARMS


class Family(str, enum.Enum):
    E3 = "E3"            # <W_s^ks W_i^ki (W_s - W_i)^2l>
    E4 = "E4"            # central-moment polynomial with exponents 2ls, 2li
    CS = "CS"            # Cauchy-Schwarz, vector indices N, L
    M2 = "M2"            # 2x2 moment matrix, vector indices L, N
    M3 = "M3"            # 3x3 moment matrix, vector indices K, L, N
    D3 = "D3"            # three-variable majorization {k l m} > {k' l' m'}
    D4 = "D4"            # four-variable majorization
    Dsys1 = "Dsys1"      # {k+m, k, l-m} > {k, k, l}
    Dsys2 = "Dsys2"      # {k+m, k-m, l} > {k, k, l}
    Dsys3 = "Dsys3"      # {k+m, k, l, l-m} > {k, k, l, l}
    DminBall3 = "DminBall3"
    DminBall4 = "DminBall4"
    Dmn = "Dmn"          # many-copy majorization with exponent (k+l)/2
    AppendixA = "AppendixA"


ARM_FAMILIES = {Family.D3, Family.Dsys1, Family.Dsys2, Family.DminBall3}

REPRESENTATIONS = ("probability", "moment")

_ARITY = {
    Family.E3: 3, Family.E4: 4, Family.CS: 4, Family.M2: 4, Family.M3: 6,
    Family.D3: 6, Family.D4: 8, Family.Dsys1: 3, Family.Dsys2: 3, Family.Dsys3: 3,
    Family.DminBall3: 3, Family.DminBall4: 4, Family.Dmn: 4, Family.AppendixA: 1,
}


def majorizes(a, b, strict=True):
    """True when the multiset ``a`` majorizes ``b`` (equal totals, dominating partial sums)."""
    if len(a) != len(b) or sum(a) != sum(b):
        return False
    sa, sb = sorted(a, reverse=True), sorted(b, reverse=True)
    ca = cb = 0
    for x, y in zip(sa, sb):
        ca, cb = ca + x, cb + y
        if ca < cb:
            return False
    return not (strict and sa == sb)


def minball3_candidates(k, l, m):
    """Moved-ball tuples for the three-variable minimum, each with its admissibility."""
    return [
        ((k + 1, l - 1, m), k - 1 >= l - 1 >= m >= 0),
        ((k + 1, l, m - 1), k >= l >= m >= 1),
        ((k, l + 1, m - 1), k - 1 >= l >= m >= 1),
    ]


def minball4_candidates(k, l, m, n):
    """Moved-ball tuples for the four-variable minimum, each with its admissibility."""
    return [
        ((k + 1, l, m, n - 1), k >= l >= m >= n >= 1),
        ((k + 1, l, m - 1, n), k - 1 >= l - 1 >= m - 1 >= n >= 0),
        ((k + 1, l - 1, m, n), k - 1 >= l - 1 >= m >= n >= 0),
        ((k, l + 1, m, n - 1), k - 1 >= l >= m >= n >= 1),
        ((k, l + 1, m - 1, n), k - 2 >= l - 1 >= m - 1 >= n >= 0),
        ((k, l, m + 1, n - 1), k - 1 >= l - 1 >= m >= n >= 1),
    ]


def _fail(spec, why):
    raise InvalidIndices(f"{format_label(spec)}: {why}")


@dataclass(frozen=True)
class CriterionSpec:
    """One criterion: family, flat integer index tuple, optional arm, representation.

    Index layout per family: ``E3 (ks, ki, l)``, ``E4 (ks, ki, ls, li)``,
    ``CS (Ns, Ni, Ls, Li)``, ``M2 (Ls, Li, Ns, Ni)``, ``M3 (Ks, Ki, Ls, Li, Ns, Ni)``,
    ``D3``/``D4`` the majorizing tuple followed by the majorized one, the
    parametric systems their three or four parameters, and ``AppendixA`` the
    appendix entry number 1..32.
    """

    family: Family
    indices: Tuple[int, ...]
    arm: Optional[str] = None
    representation: str = "probability"

    def __post_init__(self):
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        idx = tuple(int(i) for i in self.indices)
        object.__setattr__(self, "indices", idx)
        if self.representation not in REPRESENTATIONS:
            raise ValueError(f"unknown representation {self.representation!r}")
        if self.arm is not None and self.arm not in ARMS:
            raise ValueError(f"arm must be one of {ARMS}")
        if fam in ARM_FAMILIES and self.arm is None:
            object.__setattr__(self, "arm", "signal")
        if len(idx) != _ARITY[fam]:
            raise InvalidIndices(f"{fam.value} takes {_ARITY[fam]} indices, got {len(idx)}")
        self._validate()

    def with_representation(self, representation):
        return CriterionSpec(self.family, self.indices, self.arm, representation)

    @property
    def label(self):
        return format_label(self)

    def _validate(self):
        f, x = self.family, self.indices
        if f is Family.AppendixA:
            from .appendix import APPENDIX

            if x[0] not in APPENDIX:
                _fail(self, "appendix entries are numbered 1..32")
            entry = APPENDIX[x[0]]
            if entry.arm_dependent and self.arm is None:
                object.__setattr__(self, "arm", "signal")
            if not entry.arm_dependent and self.arm is not None:
                _fail(self, "this appendix criterion has no arm variant")
            return
        if f not in ARM_FAMILIES and self.arm is not None:
            _fail(self, "family has no arm variant")
        if any(i < 0 for i in x):
            _fail(self, "indices must be nonnegative")
        if f is Family.E3:
            if x[2] < 1:
                _fail(self, "requires l >= 1")
        elif f is Family.E4:
            if x[2] + x[3] < 1:
                _fail(self, "requires ls + li >= 1")
        elif f is Family.CS:
            if x[2] > 2 * x[0] or x[3] > 2 * x[1]:
                _fail(self, "requires 2N >= L componentwise")
        elif f in (Family.D3, Family.D4):
            h = len(x) // 2
            if not majorizes(x[:h], x[h:]):
                _fail(self, "first tuple must strictly majorize the second")
        elif f in (Family.Dsys1, Family.Dsys3):
            k, l, m = x
            if not k >= l >= m >= 1:
                _fail(self, "requires k >= l >= m >= 1")
        elif f is Family.Dsys2:
            k, l, m = x
            if not (k - m >= l and k >= 1 and m >= 1):
                _fail(self, "requires k - m >= l, k >= 1, m >= 1")
        elif f is Family.DminBall3:
            if not any(ok for _, ok in minball3_candidates(*x)):
                _fail(self, "no admissible moved-ball candidate")
        elif f is Family.DminBall4:
            if not any(ok for _, ok in minball4_candidates(*x)):
                _fail(self, "no admissible moved-ball candidate")
        elif f is Family.Dmn:
            k, l, m, n = x
            if not m >= n >= 1:
                _fail(self, "requires m >= n >= 1")
            if (k + l) % 2 or k + l < 2:
                _fail(self, "requires k + l even and at least 2")


@dataclass(frozen=True)
class CriterionValue:
    """Evaluated criterion.

    ``negative`` is the verdict ``value < -threshold``.  Values inside the
    rounding band ``64 eps * scale`` are reported as exactly 0.
    """

    value: float
    negative: bool
    terms: tuple = field(repr=False, default=())
    scale: float = 0.0
    threshold: float = 0.0
    details: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def verdict(self):
        if self.negative:
            return "nonclassical"
        return "classical boundary" if self.value == 0.0 else "classical"


# labels --------------------------------------------------------------------

_PREFIX = {
    Family.CS: "CS", Family.M2: "M2", Family.M3: "M", Family.D3: "D3", Family.D4: "D4",
    Family.Dsys1: "D3sys1", Family.Dsys2: "D3sys2", Family.Dsys3: "D4sys3",
    Family.DminBall3: "Dball3", Family.DminBall4: "Dball4", Family.Dmn: "Dmn",
}
_FROM_PREFIX = {v: k for k, v in _PREFIX.items()}


def _ints(text):
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError:
        raise InvalidIndices(f"cannot read indices from {text!r}") from None


def _vectors(body, names):
    parts = dict(p.split("=", 1) for p in body.split(";") if "=" in p)
    if set(parts) != set(names):
        raise InvalidIndices(f"expected vector indices {', '.join(names)}")
    out = ()
    for n in names:
        v = _ints(parts[n])
        if len(v) != 2:
            raise InvalidIndices(f"vector index {n} needs two components")
        out += v
    return out


def parse_label(label, representation="probability"):
    """Parse a text label such as ``E:2,1,1``, ``CS:N=1,1;L=2,0`` or ``A:E101@i``."""
    text = label.strip()
    arm = None
    m = re.fullmatch(r"(.*)@([si])", text)
    if m:
        text, arm = m.group(1), {"s": "signal", "i": "idler"}[m.group(2)]
    if ":" not in text:
        raise InvalidIndices(f"label {label!r} lacks a family prefix")
    prefix, body = text.split(":", 1)
    if prefix == "E":
        idx = _ints(body)
        fam = {3: Family.E3, 4: Family.E4}.get(len(idx))
        if fam is None:
            raise InvalidIndices("E labels take three or four indices")
        return CriterionSpec(fam, idx, arm, representation)
    if prefix == "A":
        from .appendix import resolve_appendix

        return CriterionSpec(Family.AppendixA, (resolve_appendix(body, arm),), arm, representation)
    if prefix not in _FROM_PREFIX:
        raise InvalidIndices(f"unknown criterion family {prefix!r}")
    fam = _FROM_PREFIX[prefix]
    if fam is Family.CS:
        idx = _vectors(body, ("N", "L"))
    elif fam is Family.M2:
        idx = _vectors(body, ("L", "N"))
    elif fam is Family.M3:
        idx = _vectors(body, ("K", "L", "N"))
    elif fam in (Family.D3, Family.D4):
        if ">" not in body:
            raise InvalidIndices("majorization labels read 'k,l,m>k2,l2,m2'")
        left, right = body.split(">", 1)
        idx = _ints(left) + _ints(right)
    else:
        idx = _ints(body)
    return CriterionSpec(fam, idx, arm, representation)


def format_label(spec):
    f, x = spec.family, spec.indices
    j = lambda t: ",".join(str(i) for i in t)  # noqa: E731
    if f in (Family.E3, Family.E4):
        s = f"E:{j(x)}"
    elif f is Family.AppendixA:
        from .appendix import APPENDIX

        entry = APPENDIX.get(x[0])
        s = f"A:{entry.name}" if entry else f"A:A{x[0]}"
    elif f is Family.CS:
        s = f"CS:N={j(x[:2])};L={j(x[2:])}"
    elif f is Family.M2:
        s = f"M2:L={j(x[:2])};N={j(x[2:])}"
    elif f is Family.M3:
        s = f"M:K={j(x[:2])};L={j(x[2:4])};N={j(x[4:])}"
    elif f in (Family.D3, Family.D4):
        h = len(x) // 2
        s = f"{_PREFIX[f]}:{j(x[:h])}>{j(x[h:])}"
    else:
        s = f"{_PREFIX[f]}:{j(x)}"
    if spec.arm is not None:
        s += "@" + spec.arm[0]
    return s


def swap_spec(spec):
    """The criterion that reads the signal/idler-swapped table identically."""
    f, x = spec.family, spec.indices
    arm = None if spec.arm is None else ARMS[1 - ARMS.index(spec.arm)]
    if f is Family.E3:
        x = (x[1], x[0], x[2])
    elif f is Family.E4:
        x = (x[1], x[0], x[3], x[2])
    elif f in (Family.CS, Family.M2, Family.M3):
        x = sum(((x[i + 1], x[i]) for i in range(0, len(x), 2)), ())
    elif f is Family.AppendixA:
        from .appendix import APPENDIX

        partner = APPENDIX[x[0]].swap_partner
        if partner is not None:
            x = (partner,)
        if not APPENDIX[x[0]].arm_dependent:
            arm = None
    # majorization families are symmetric in the two arms apart from ``arm``
    return CriterionSpec(f, x, arm, spec.representation)
