"""Exception hierarchy shared by all modules."""


class NCError(Exception):
    """Base class for library errors."""


class ValidationError(NCError, ValueError):
    """Input data violates a documented invariant."""


class HistogramParseError(NCError, ValueError):
    """A histogram source could not be parsed.

    ``line`` is 1-based for CSV input; ``offset`` is the character offset
    reported by the JSON decoder or the record index in the triple array.
    """

    def __init__(self, message, line=None, offset=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if offset is not None:
            where.append(f"offset {offset}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.line = line
        self.offset = offset


class DivisionByVacuum(NCError, ZeroDivisionError):
    """p(0, 0) vanishes, so the probability <-> moment mapping is undefined."""


class NotChaoticLike(NCError, ValueError):
    """Normally ordered intensity variance is not positive."""


class InvalidIndices(NCError, ValueError):
    """Criterion indices violate the constraints of their family."""


class MissingOrder(NCError, KeyError):
    """A moment of the requested order is not available."""

    def __str__(self):
        return str(self.args[0]) if self.args else "missing moment order"


class NotCounts(NCError, ValueError):
    """Raw histogram counts are required but only probabilities are present."""


class PrecisionEscalation(NCError, ArithmeticError):
    """Interval evaluation of a kernel entry was too wide at the working precision."""

    def __init__(self, n, m, s, modes, bits, rel_width=None):
        self.n, self.m, self.s, self.modes, self.bits = n, m, s, modes, bits
        self.rel_width = rel_width
        msg = f"kernel entry K_s(n={n}, m={m}; s={s}, M={modes}) unresolved at {bits} bits"
        if rel_width is not None:
            msg += f" (relative interval width {rel_width:.3g})"
        super().__init__(msg)
