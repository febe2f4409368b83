"""Closed-form low-photon-number criteria, entries 1..32.

Names follow the usual moment-criterion nomenclature (``E001``,
``C12^10``, ``T1110^2100`` ...).  Entries whose name carries an arm
superscript take ``arm``; ``p_a(n, m)`` reads ``p(n, m)`` on the signal arm
and ``p(m, n)`` on the idler arm, and ``sum_b`` runs over both arms.
Where a general family contains the entry, ``general`` names it so that the
two can be cross-checked.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from ..exceptions import InvalidIndices
from .polynomial import Polynomial

P = Polynomial.cell
ARMS = ("signal", "idler")


def _pa(arm, n, m):
    return P(n, m) if arm == "signal" else P(m, n)


def _sum_b(fn):
    return fn("signal") + fn("idler")


p00, p10, p01, p11 = P(0, 0), P(1, 0), P(0, 1), P(1, 1)


def _e(*cells):
    return Polynomial((c, ((a, b),)) for c, a, b in cells)


def _a14(a):
    pa = lambda n, m: _pa(a, n, m)  # noqa: E731
    return (
        pa(3, 2) * p00**4 * 12
        + (pa(1, 0) ** 2 * pa(1, 2) + pa(0, 1) ** 2 * pa(3, 0) * 3 + p01 * p10 * pa(2, 1) * 4)
        * p00**2 * 2
        + pa(0, 1) ** 2 * pa(1, 0) ** 3
        - (pa(1, 0) * P(2, 2) * 2 + pa(0, 1) * pa(3, 1) * 3) * p00**3 * 4
        - (pa(0, 1) ** 2 * pa(1, 0) * pa(2, 0) * 2 + pa(1, 0) ** 2 * pa(0, 1) * p11) * p00 * 2
    )


def _a16(_):
    return (
        P(2, 2) * p00**3 * 4
        + (_sum_b(lambda b: _pa(b, 1, 0) ** 2 * _pa(b, 0, 2)) + p10 * p01 * p11 * 2) * p00 * 2
        - _sum_b(lambda b: _pa(b, 1, 0) * _pa(b, 1, 2)) * p00**2 * 4
        - p10**2 * p01**2 * 3
    )


def _a21(_):
    return (
        P(2, 0) * P(0, 2) * p00 * 4
        + p11 * p10 * p01 * 2
        - p11**2 * p00
        - _sum_b(lambda b: _pa(b, 2, 0) * _pa(b, 0, 1) ** 2) * 2
    )


def _a22(a):
    return (
        _pa(a, 2, 0) * _pa(a, 1, 0) * 2
        + _sum_b(lambda b: _pa(b, 2, 1)) * p00
        + _sum_b(lambda b: _pa(b, 2, 0) * _pa(b, 0, 1))
        - _pa(a, 1, 0) * p11 * 3
    )


def _a23(a):
    return (
        _pa(a, 2, 0) ** 2 * 2
        + P(2, 2) * p00 * 2
        + P(2, 0) * P(0, 2) * 2
        - _sum_b(lambda b: _pa(b, 2, 1)) * _pa(a, 1, 0)
        - _pa(a, 2, 0) * p11
    )


def _a24(_):
    return (
        _sum_b(lambda b: _pa(b, 2, 1)) * _sum_b(lambda c: _pa(c, 1, 0))
        + _sum_b(lambda b: _pa(b, 2, 0)) * p11
        - p11**2 * 3
    )


def _a25(_):
    return _sum_b(lambda b: _pa(b, 2, 0)) ** 2 * 2 + P(2, 2) * p00 * 4 - p11**2 * 3


def _a26(_):
    return _sum_b(lambda b: _pa(b, 4, 0)) * p00 * 12 - p11**2


def _a27(a):
    return (
        _sum_b(lambda b: _pa(b, 2, 1)) * p00**2 * 2
        + (_pa(a, 2, 0) * _pa(a, 1, 0) * 3 + _sum_b(lambda b: _pa(b, 2, 0) * _pa(b, 0, 1)))
        * p00 * 4
        - _pa(a, 1, 0) * p11 * p00 * 6
        - _pa(a, 1, 0) ** 2 * _sum_b(lambda b: _pa(b, 1, 0)) * 3
    )


def _a28(_):
    return (
        _sum_b(lambda b: _pa(b, 2, 1)) * p00**2 * 2
        + (
            _sum_b(lambda b: _pa(b, 2, 0) * _pa(b, 1, 0)) * 2
            + _sum_b(lambda b: _pa(b, 2, 0) * _pa(b, 0, 1)) * 3
        )
        * p00 * 2
        - _sum_b(lambda b: _pa(b, 1, 0)) * p11 * p00 * 3
        - _sum_b(lambda b: _pa(b, 1, 0) ** 2 * _pa(b, 0, 1)) * 3
    )


def _a29(a):
    return (
        P(2, 2) * p00**2 * 4
        + (_pa(a, 2, 0) ** 2 * 3 + P(2, 0) * P(0, 2) * 2) * p00 * 4
        - (_sum_b(lambda b: _pa(b, 2, 1)) * _pa(a, 1, 0) + _pa(a, 2, 0) * p11) * p00 * 2
        - _pa(a, 1, 0) ** 2 * _pa(a, 2, 0) * 2
        - _sum_b(lambda b: _pa(b, 2, 0)) * _pa(a, 1, 0) ** 2
        - _pa(a, 2, 0) * p01 * p10 * 2
    )


def _a30(_):
    return (
        P(2, 2) * p00**2 * 4
        + (_sum_b(lambda b: _pa(b, 2, 0) ** 2) + P(2, 0) * P(0, 2) * 3) * p00 * 4
        - (
            _sum_b(lambda b: _pa(b, 1, 0)) * _sum_b(lambda c: _pa(c, 2, 1))
            + _sum_b(lambda b: _pa(b, 2, 0)) * p11
        )
        * p00
        - _sum_b(lambda b: _pa(b, 2, 0)) * p10 * p01 * 2
        - _sum_b(lambda b: _pa(b, 2, 0) * _pa(b, 0, 1) ** 2)
    )


def _a31(a):
    return (
        (_sum_b(lambda b: _pa(b, 2, 1)) * _pa(a, 1, 0) + _pa(a, 2, 0) * p11) * p00 * 2
        + (_pa(a, 2, 0) * 3 + _pa(a, 0, 2)) * _pa(a, 1, 0) ** 2
        + _pa(a, 2, 0) * p10 * p01 * 2
        - _pa(a, 1, 0) ** 2 * p11 * 6
    )


def _a32(_):
    return (
        (
            _sum_b(lambda b: _pa(b, 1, 0)) * _sum_b(lambda c: _pa(c, 2, 1))
            + _sum_b(lambda b: _pa(b, 2, 0)) * p11
        )
        * p00
        + _sum_b(lambda b: _pa(b, 2, 0)) * p10 * p01 * 2
        + _sum_b(lambda b: _pa(b, 2, 0) * _pa(b, 0, 1) ** 2)
        - p10 * p01 * p11 * 6
    )


@dataclass(frozen=True)
class AppendixEntry:
    number: int
    name: str
    build: Callable[[Optional[str]], Polynomial]
    arm_dependent: bool = False
    general: Optional[str] = None
    swap_partner: Optional[int] = None
    requires_vacuum: bool = False

    def polynomial(self, arm=None):
        return self.build(arm)


def _const(poly):
    return lambda _arm: poly


_E_ROWS = [
    (1, "E001", [(1, 2, 0), (1, 0, 2), (-1, 1, 1)], None),
    (2, "E101", [(3, 3, 0), (1, 1, 2), (-2, 2, 1)], 3),
    (3, "E011", [(3, 0, 3), (1, 2, 1), (-2, 1, 2)], 2),
    (4, "E201", [(6, 4, 0), (1, 2, 2), (-3, 3, 1)], 5),
    (5, "E021", [(6, 0, 4), (1, 2, 2), (-3, 1, 3)], 4),
    (6, "E111", [(3, 3, 1), (3, 1, 3), (-4, 2, 2)], None),
    (7, "E301", [(10, 5, 0), (1, 3, 2), (-4, 4, 1)], 8),
    (8, "E031", [(10, 0, 5), (1, 2, 3), (-4, 1, 4)], 7),
    (9, "E211", [(2, 4, 1), (1, 2, 3), (-2, 3, 2)], 10),
    (10, "E121", [(2, 1, 4), (1, 3, 2), (-2, 2, 3)], 9),
    (11, "E002", [(1, 4, 0), (1, 2, 2), (1, 0, 4), (-1, 3, 1), (-1, 1, 3)], None),
    (12, "E102", [(5, 5, 0), (3, 3, 2), (1, 1, 4), (-4, 4, 1), (-2, 2, 3)], 13),
    (13, "E012", [(5, 0, 5), (3, 2, 3), (1, 4, 1), (-4, 1, 4), (-2, 3, 2)], 12),
]


def _registry():
    reg = {}
    for num, name, cells, partner in _E_ROWS:
        label = f"E:{name[1]},{name[2]},{name[3]}"
        reg[num] = AppendixEntry(num, name, _const(_e(*cells)), general=label, swap_partner=partner)
    rows = [
        (14, "E1011", lambda _a: _a14("signal"), False, "E:1,0,1,1", 15, True),
        (15, "E0111", lambda _a: _a14("idler"), False, "E:0,1,1,1", 14, True),
        (16, "E0011", _a16, False, "E:0,0,1,1", None, True),
        (17, "C12^10", _const(P(1, 2) * P(1, 0) * 2 - p11**2), False, "CS:N=1,1;L=1,0", 18, False),
        (18, "C01^21", _const(P(2, 1) * P(0, 1) * 2 - p11**2), False, "CS:N=1,1;L=0,1", 17, False),
        (19, "M1100", _const(P(2, 2) * p00 * 4 - p11**2), False, "M2:L=0,0;N=1,1", None, False),
        (20, "M1001", _const(P(2, 0) * P(0, 2) * 4 - p11**2), False, "M2:L=1,0;N=0,1", None, False),
        (21, "M001001", _a21, False, "M:K=0,0;L=1,0;N=0,1", None, False),
        (22, "D111^210", _a22, True, "D3:2,1,0>1,1,1", None, False),
        (23, "D211^220", _a23, True, "D3:2,2,0>2,1,1", None, False),
        (24, "D1111^2110", _a24, False, "D4:2,1,1,0>1,1,1,1", None, False),
        (25, "D1111^2200", _a25, False, "D4:2,2,0,0>1,1,1,1", None, False),
        (26, "D1111^4000", _a26, False, "D4:4,0,0,0>1,1,1,1", None, False),
        (27, "T1110^2100", _a27, True, None, None, False),
        (28, "T1110^2100", _a28, False, None, None, False),
        (29, "T2110^2200", _a29, True, None, None, False),
        (30, "T2110^2200", _a30, False, None, None, False),
        (31, "T1111^2110", _a31, True, None, None, False),
        (32, "T1111^2110", _a32, False, None, None, False),
    ]
    for num, name, build, arm_dep, general, partner, vac in rows:
        reg[num] = AppendixEntry(num, name, build, arm_dep, general, partner, vac)
    return reg


APPENDIX = _registry()


def appendix_polynomial(number, arm=None):
    entry = APPENDIX[number]
    return entry.build(arm if entry.arm_dependent else None)


def lookup_appendix(name, arm_given=None):
    """Entry number for ``A7``, ``E301`` or ``T1110^2100``.

    Names shared by an arm variant and a summed variant resolve to the summed
    one; the arm variant is selected when the label carries ``@s``/``@i``
    (handled by :func:`resolve_appendix`).
    """
    name = name.strip()
    if name.upper().startswith("A") and name[1:].isdigit():
        num = int(name[1:])
        if num in APPENDIX:
            return num
    matches = [e.number for e in APPENDIX.values() if e.name == name]
    if not matches:
        raise InvalidIndices(f"unknown appendix criterion {name!r}")
    return matches[0]


def resolve_appendix(name, arm):
    """Entry number honoring an explicit arm for names with two variants."""
    num = lookup_appendix(name)
    if name[:1] == "A" and name[1:].isdigit():
        return num
    variants = [e for e in APPENDIX.values() if e.name == APPENDIX[num].name]
    want_arm = arm is not None
    for e in variants:
        if e.arm_dependent == want_arm:
            return e.number
    return num


def list_appendix():
    """All 32 entries as criterion specs (arm variants on the signal arm)."""
    from .spec import CriterionSpec, Family

    return [
        CriterionSpec(Family.AppendixA, (n,), "signal" if APPENDIX[n].arm_dependent else None)
        for n in sorted(APPENDIX)
    ]
