"""s-ordering and thermal-noise kernels acting on photon-number distributions.

Two linear maps take a photon-number distribution p(m) to a new one:

* the ordering kernel ``K_s(n, m; M)`` yields the distribution generated by
  the s-ordered quasi-distribution of an M-mode field;
* the noise kernel ``K_nu(n, m; M) = p_MR(n - m; nu, M)`` mixes in an M-mode
  chaotic field with ``nu`` mean photons per mode.

The ordering kernel is available in two independent forms.  The alternating
series is evaluated by :func:`kernel_entry` in exact rationals or interval
arithmetic.  The bulk routines use the equivalent positive form: the column
for input photon number m is a Binomial(m, (1 + s)/2) thinning convolved
with a Mandel-Rice distribution of ``M + m`` modes and ``(1 - s)/2`` photons
per mode.  It follows from the generating function of the series and has no
cancellation.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Optional

import mpmath
import numpy as np
from scipy.special import gammaln, poch

from .exceptions import PrecisionEscalation, ValidationError
from .pmf import TAIL_TOL, JointPMF, MomentVector

COLUMN_TOL = 1e-9
MAX_PRECISION_BITS = 4096
ENTRY_REL_TOL = 1e-12
LAST_ROW_TOL = 1e-20


def _check_ordering(s, allow_one=True):
    s = float(s)
    hi_ok = s <= 1.0 if allow_one else s < 1.0
    if not (-1.0 < s and hi_ok):
        raise ValidationError(f"ordering parameter s={s} outside (-1, 1]")
    return s


def _check_modes(M):
    M = float(M)
    if not M > 0 or not math.isfinite(M):
        raise ValidationError(f"mode count must be positive, got {M}")
    return M


# special functions ---------------------------------------------------------


def laguerre(k, alpha, x):
    """Generalized Laguerre polynomial ``L_k^alpha(x)`` by upward recurrence."""
    if k < 0:
        raise ValueError("degree must be nonnegative")
    prev, cur = 1.0, 1.0 + alpha - x
    if k == 0:
        return prev
    for j in range(1, k):
        prev, cur = cur, ((2 * j + 1 + alpha - x) * cur - (j + alpha) * prev) / (j + 1)
    return cur


def laguerre_coefficients(k, alpha):
    """Monomial coefficients ``c_j`` with ``L_k^alpha(x) = sum_j c_j x^j``."""
    j = np.arange(k + 1)
    # binom(k + alpha, k - j) = (alpha + j + 1)_(k - j) / (k - j)!
    binom = poch(alpha + j + 1, k - j) / np.exp(gammaln(k - j + 1))
    return (-1.0) ** j * binom / np.exp(gammaln(j + 1))


def ordering_coefficients(max_order, s, M):
    """Matrix ``C[k, j]`` with ``<W^k>_s = sum_j C[k, j] <W^j>``.

    Expands ``k! ((1-s)/2)^k L_k^{M-1}(2W/(s-1))`` into powers of W.  At
    ``s = 1`` the matrix is the identity.
    """
    s = _check_ordering(s)
    M = _check_modes(M)
    if s == 1.0:
        return np.eye(max_order + 1)
    b = (1.0 - s) / 2.0
    C = np.zeros((max_order + 1, max_order + 1))
    for k in range(max_order + 1):
        lag = laguerre_coefficients(k, M - 1.0)
        for j in range(k + 1):
            # (-1/b)^j b^k folded into b^(k-j) to stay finite at b -> 0
            C[k, j] = math.factorial(k) * lag[j] * (-1.0) ** j * b ** (k - j)
    return C


def transform_moments(moments, s, M, M_idler=None):
    """s-ordered joint moments from normally ordered ones, arm by arm."""
    if moments.ordering != 1.0:
        raise ValidationError("moment transform expects normally ordered input")
    if s == 1.0:
        return moments
    Mi = M if M_idler is None else M_idler
    Cs = ordering_coefficients(moments.max_order, s, M)
    Ci = ordering_coefficients(moments.max_order, s, Mi)
    return MomentVector(Cs @ moments.moments @ Ci.T, ordering=float(s))


def s_function(n, m, alpha):
    """``2^(m-n) sum_l (-1)^(m-l) C(m, l) C(n + l + alpha, n)`` in exact rationals.

    Floats are converted exactly, so the result is exact for any float alpha.
    """
    if n < 0 or m < 0:
        raise ValueError("n and m must be nonnegative")
    a = Fraction(alpha)
    total = Fraction(0)
    for l in range(m + 1):
        c = Fraction(1)
        for j in range(1, n + 1):
            c = c * (l + a + j) / j
        total += (-1) ** (m - l) * math.comb(m, l) * c
    return total * Fraction(2) ** (m - n)


def _default_bits(n, m, M):
    return 64 + 4 * (n + m + math.ceil(M))


def _series_exact(n, m, s, M):
    # every factor is rational when s and M are
    s, M = Fraction(s), Fraction(M)
    x = Fraction(4) / ((1 + s) * (3 - s))
    total = Fraction(0)
    for l in range(m + 1):
        c = Fraction(1)
        for j in range(1, n + 1):
            c = c * (l + M - 1 + j) / j
        total += (-1) ** (m - l) * math.comb(m, l) * c * x**l
    return ((1 + s) / (1 - s)) ** m * ((1 - s) / (3 - s)) ** n * total


def kernel_entry(n, m, s, M, precision_bits=None):
    """One entry of the ordering kernel from the alternating series.

    With ``s`` given as a :class:`fractions.Fraction` and an integer ``M`` the
    whole entry is computed exactly.  Otherwise the alternating sum runs in
    interval arithmetic at ``precision_bits``; if the enclosing interval is
    wider than 1e-12 relative, :class:`PrecisionEscalation` is raised so the
    caller can retry with more bits.  The value is rounded to double at the end.
    """
    if n < 0 or m < 0:
        raise ValueError("n and m must be nonnegative")
    if s == 1:
        return 1.0 if n == m else 0.0
    _check_ordering(s, allow_one=False)
    _check_modes(M)
    if isinstance(s, Rational) and float(M).is_integer():
        val = _series_exact(n, m, s, int(M))
        s_ = Fraction(s)
        return float(val * (Fraction(2) / (3 - s_)) ** int(M))
    bits = precision_bits or _default_bits(n, m, M)
    iv = mpmath.iv
    old = iv.prec
    try:
        iv.prec = bits
        sv = iv.mpf(s)
        Mv = iv.mpf(M)
        x = iv.mpf(4) / ((1 + sv) * (3 - sv))
        total = iv.mpf(0)
        xl = iv.mpf(1)
        for l in range(m + 1):
            c = iv.mpf(1)
            for j in range(1, n + 1):
                c = c * (l + Mv - 1 + j) / j
            term = math.comb(m, l) * c * xl
            total = total + term if (m - l) % 2 == 0 else total - term
            xl = xl * x
        pref = (
            (iv.mpf(2) / (3 - sv)) ** Mv
            * ((1 + sv) / (1 - sv)) ** m
            * ((1 - sv) / (3 - sv)) ** n
        )
        val = pref * total
        lo, hi = float(val.a), float(val.b)
        mid = float(val.mid)
        width = float(val.delta)
        scale = max(abs(lo), abs(hi))
        if scale == 0.0:
            return 0.0
        rel = width / scale
        if rel > ENTRY_REL_TOL:
            raise PrecisionEscalation(n, m, s, M, bits, rel)
        return mid
    finally:
        iv.prec = old


def kernel_entry_auto(n, m, s, M, precision_bits=None, max_bits=MAX_PRECISION_BITS):
    """:func:`kernel_entry` with precision doubling up to ``max_bits``."""
    bits = precision_bits or _default_bits(n, m, M)
    while True:
        try:
            return kernel_entry(n, m, s, M, bits), bits
        except PrecisionEscalation:
            if bits >= max_bits:
                raise
            bits = min(2 * bits, max_bits)


# closed form ---------------------------------------------------------------


def _log_mandel_rice(n, nu, M):
    n = np.asarray(n, dtype=float)
    return (
        gammaln(n + M)
        - gammaln(n + 1)
        - gammaln(M)
        + n * math.log(nu / (1 + nu))
        - M * math.log1p(nu)
    )


def kernel_rows(rows, s, M, n_in):
    """Rows ``K_s(n, 0..n_in; M)`` for each ``n`` in ``rows`` (positive closed form)."""
    s = _check_ordering(s)
    M = _check_modes(M)
    rows = np.asarray(rows, dtype=int)
    out = np.zeros((rows.size, n_in + 1))
    if s == 1.0:
        for r, n in enumerate(rows):
            if n <= n_in:
                out[r, n] = 1.0
        return out
    t = (1.0 + s) / 2.0
    b = (1.0 - s) / 2.0
    m = np.arange(n_in + 1)
    for r, n in enumerate(rows.tolist()):
        j = np.arange(min(n, n_in) + 1)
        jj, mm = np.meshgrid(j, m, indexing="ij")
        valid = jj <= mm
        jv, mv = np.where(valid, jj, 0), np.where(valid, mm, 0)
        log_bin = (
            gammaln(mv + 1)
            - gammaln(jv + 1)
            - gammaln(mv - jv + 1)
            + jv * math.log(t)
            + (mv - jv) * math.log1p(-t)
        )
        log_nb = _log_mandel_rice(n - jv, b, M + mv)
        terms = np.where(valid, np.exp(log_bin + log_nb), 0.0)
        out[r] = terms.sum(axis=0)
    return out


def _closed_columns(s, M, n_in, n_out):
    """Full ``(n_out + 1) x (n_in + 1)`` kernel by column convolution."""
    if s == 1.0:
        K = np.zeros((n_out + 1, n_in + 1))
        k = min(n_in, n_out) + 1
        K[np.arange(k), np.arange(k)] = 1.0
        return K
    t = (1.0 + s) / 2.0
    b = (1.0 - s) / 2.0
    K = np.zeros((n_out + 1, n_in + 1))
    n = np.arange(n_out + 1)
    for m in range(n_in + 1):
        j = np.arange(m + 1)
        binom = np.exp(
            gammaln(m + 1) - gammaln(j + 1) - gammaln(m - j + 1)
            + j * math.log(t) + (m - j) * math.log1p(-t)
        )
        nb = np.exp(_log_mandel_rice(n, b, M + m))
        K[:, m] = np.convolve(binom, nb)[: n_out + 1]
    return K


@dataclass(frozen=True, eq=False)
class OrderingKernel:
    """Materialized ordering kernel ``entries[n, m] = K_s(n, m; M)``."""

    s: float
    modes: float
    entries: np.ndarray
    precision_bits: int
    method: str
    column_norm_residuals: np.ndarray = field(repr=False)
    column_abs_sums: np.ndarray = field(repr=False)

    @property
    def n_in(self):
        return self.entries.shape[1] - 1

    @property
    def n_out(self):
        return self.entries.shape[0] - 1

    def to_csv(self):
        lines = ["n,m,value"]
        for n in range(self.entries.shape[0]):
            for m in range(self.entries.shape[1]):
                lines.append(f"{n},{m},{float(self.entries[n, m])!r}")
        return "\n".join(lines) + "\n"


def _initial_n_out(s, M, n_in):
    b = (1.0 - s) / 2.0
    mean = n_in * (1 + s) / 2 + b * (M + n_in)
    sd = math.sqrt(b * (1 + b) * (M + n_in) + n_in / 4)
    return int(math.ceil(mean + 12 * sd + 10))


def build_kernel(s, M, n_in, method="closed", tol=COLUMN_TOL, precision_bits=None):
    """Materialize the ordering kernel for input photon numbers ``0..n_in``.

    ``n_out`` grows until every column sums to 1 within ``tol`` and the last
    row has decayed below ``LAST_ROW_TOL``.
    ``method='series'`` evaluates every entry from the alternating series with
    precision escalation (slow, used for validation); ``'closed'`` uses the
    positive closed form in double precision.
    """
    s = _check_ordering(s)
    M = _check_modes(M)
    if method not in ("closed", "series"):
        raise ValueError(f"unknown kernel method {method!r}")
    if s == 1.0:
        K = np.eye(n_in + 1)
        ones = np.ones(n_in + 1)
        return OrderingKernel(s, M, K, 53, method, np.zeros(n_in + 1), ones)
    n_out = _initial_n_out(s, M, n_in)
    while True:
        if method == "closed":
            K = _closed_columns(s, M, n_in, n_out)
            bits = 53
        else:
            K = np.zeros((n_out + 1, n_in + 1))
            bits = 0
            for n in range(n_out + 1):
                for m in range(n_in + 1):
                    K[n, m], used = kernel_entry_auto(n, m, s, M, precision_bits)
                    bits = max(bits, used)
        resid = np.abs(1.0 - K.sum(axis=0))
        # a decayed last row keeps high-order moments of the output unbiased
        if np.all(resid < tol) and np.max(np.abs(K[-1])) < LAST_ROW_TOL:
            return OrderingKernel(s, M, K, bits, method, resid, np.abs(K).sum(axis=0))
        n_out = int(n_out * 1.5) + 1


def apply_ordering(pmf, s, M, M_idler=None, method="closed"):
    """s-ordered table ``p_s(n_s, n_i) = sum K_s(n_s, a) K_s(n_i, b) p(a, b)``.

    The same kernel acts on both arms unless ``M_idler`` is given.  The output
    is a signed table (entries are allowed to be negative) covering the full
    kernel output range.
    """
    s = _check_ordering(s)
    if s == 1.0:
        return pmf
    Mi = M if M_idler is None else M_idler
    Ks = build_kernel(s, M, pmf.cutoff_s, method=method).entries
    Ki = build_kernel(s, Mi, pmf.cutoff_i, method=method).entries
    # no tail trimming: even a 1e-12 tail carries visible weight in 4th-order moments
    out = Ks @ pmf.probs @ Ki.T
    deficit = 1.0 - math.fsum(out.ravel())
    return JointPMF(out, norm_deficit=deficit, signed=True)


# Mandel-Rice noise -----------------------------------------------------------


def mandel_rice(n, nu, M):
    """Probability of n photons in M-mode chaotic light with nu photons per mode."""
    M = _check_modes(M)
    if nu < 0:
        raise ValidationError("nu must be nonnegative")
    if n < 0:
        return 0.0
    if nu == 0:
        return 1.0 if n == 0 else 0.0
    return float(np.exp(_log_mandel_rice(n, nu, M)))


def mandel_rice_pmf(nu, M, tol=TAIL_TOL, n_max=None):
    """Mandel-Rice band ``p(0..N)`` with N grown until the tail is below ``tol``."""
    M = _check_modes(M)
    if nu < 0:
        raise ValidationError("nu must be nonnegative")
    if nu == 0:
        return np.array([1.0])
    if n_max is not None:
        return np.exp(_log_mandel_rice(np.arange(n_max + 1), nu, M))
    mean = M * nu
    sd = math.sqrt(M * nu * (1 + nu))
    N = int(math.ceil(mean + 10 * sd + 10))
    while True:
        band = np.exp(_log_mandel_rice(np.arange(N + 1), nu, M))
        if 1.0 - math.fsum(band) < tol:
            return band
        N = int(N * 1.5) + 1


@dataclass(frozen=True, eq=False)
class NoiseKernel:
    nu: float
    modes: float
    band: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, nu, M, tol=TAIL_TOL):
        return cls(float(nu), _check_modes(M), mandel_rice_pmf(nu, M, tol))

    def matrix(self, n_in, n_out=None):
        """Lower-triangular ``K_nu(n, m) = band[n - m]``."""
        n_out = n_in + self.band.size - 1 if n_out is None else n_out
        K = np.zeros((n_out + 1, n_in + 1))
        for m in range(n_in + 1):
            seg = self.band[: max(0, n_out + 1 - m)]
            K[m : m + seg.size, m] = seg
        return K


def apply_noise(pmf, nu, M, nu_idler=None, M_idler=None):
    """Mix each arm with M-mode thermal noise of ``nu`` photons per mode."""
    from .pmf import convolve

    nu_i = nu if nu_idler is None else nu_idler
    Mi = M if M_idler is None else M_idler
    if nu == 0 and nu_i == 0:
        return pmf
    return convolve(pmf, mandel_rice_pmf(nu, M), mandel_rice_pmf(nu_i, Mi))


# lazy cell sources used by the quantifiers -----------------------------------


def _contract(u, table, v):
    """``u @ table @ v`` computed so that transposing the problem is bit-exact.

    The elementwise products are summed once along rows and once along
    columns (each over contiguous memory) and the two totals averaged, so
    evaluating the swapped table at the swapped cell gives identical bits.
    """
    prod = np.multiply.outer(u, v) * table
    rows = math.fsum(prod.sum(axis=1))
    cols = math.fsum(np.ascontiguousarray(prod.T).sum(axis=1))
    return 0.5 * (rows + cols)


class KernelCache:
    """Ordering-kernel rows keyed by ``(s, M, n_in)``; safe for threads.

    Rows are deterministic functions of the key, so concurrent writers store
    identical values and last-writer-wins is harmless.
    """

    def __init__(self):
        self._rows = {}
        self._lock = threading.Lock()

    def rows(self, s, M, n_in, wanted):
        key = (float(s), float(M), int(n_in))
        with self._lock:
            store = self._rows.setdefault(key, {})
            missing = [n for n in wanted if n not in store]
        if missing:
            fresh = kernel_rows(missing, s, M, n_in)
            with self._lock:
                for n, row in zip(missing, fresh):
                    store[n] = row
        with self._lock:
            return np.array([store[n] for n in wanted])

    def __len__(self):
        return sum(len(v) for v in self._rows.values())


class OrderedCells:
    """Cells of the s-ordered table computed on demand.

    Only the kernel rows a criterion touches are ever built, so large output
    photon numbers cost nothing unless requested.
    """

    signed = True

    def __init__(self, pmf, s, M, M_idler=None, cache=None):
        self.pmf = pmf
        self.s = _check_ordering(s)
        self.M = _check_modes(M)
        self.M_idler = self.M if M_idler is None else _check_modes(M_idler)
        self.cache = cache if cache is not None else KernelCache()
        self._rs = {}
        self._ri = {}
        self._cells = {}

    def _row(self, store, n, M, n_in):
        if n not in store:
            store[n] = self.cache.rows(self.s, M, n_in, [n])[0]
        return store[n]

    def prefetch(self, cells):
        ns = sorted({a for a, _ in cells} - set(self._rs))
        ni = sorted({b for _, b in cells} - set(self._ri))
        if ns:
            for n, row in zip(ns, self.cache.rows(self.s, self.M, self.pmf.cutoff_s, ns)):
                self._rs[n] = row
        if ni:
            for n, row in zip(ni, self.cache.rows(self.s, self.M_idler, self.pmf.cutoff_i, ni)):
                self._ri[n] = row

    def prob(self, n_s, n_i):
        if n_s < 0 or n_i < 0:
            return 0.0
        key = (n_s, n_i)
        if key not in self._cells:
            if self.s == 1.0:
                self._cells[key] = self.pmf.prob(n_s, n_i)
            else:
                rs = self._row(self._rs, n_s, self.M, self.pmf.cutoff_s)
                ri = self._row(self._ri, n_i, self.M_idler, self.pmf.cutoff_i)
                self._cells[key] = _contract(rs, self.pmf.probs, ri)
        return self._cells[key]

    def beyond_cutoff(self, n_s, n_i):
        return False


class NoisedCells:
    """Cells of the noise-mixed table computed on demand, up to a common scale.

    Values are multiplied by ``1 / (p_MR(0; nu_s) p_MR(0; nu_i))`` so that very
    large noise levels do not underflow.  Every criterion is homogeneous in the
    probabilities, so the positive scale never changes a sign.
    """

    signed = False

    def __init__(self, pmf, nu, M, nu_idler=None, M_idler=None):
        self.pmf = pmf
        self.nu = float(nu)
        self.M = _check_modes(M)
        self.nu_i = self.nu if nu_idler is None else float(nu_idler)
        self.M_i = self.M if M_idler is None else _check_modes(M_idler)
        self._cells = {}

    @staticmethod
    def _scaled_band(nu, M, n):
        k = np.arange(n + 1)
        if nu == 0:
            out = np.zeros(n + 1)
            out[0] = 1.0
            return out
        return np.exp(_log_mandel_rice(k, nu, M) - _log_mandel_rice(0, nu, M))

    def prob(self, n_s, n_i):
        if n_s < 0 or n_i < 0:
            return 0.0
        key = (n_s, n_i)
        if key not in self._cells:
            a = min(n_s, self.pmf.cutoff_s)
            b = min(n_i, self.pmf.cutoff_i)
            # band index n - x for x = 0..a, reversed order
            bs = self._scaled_band(self.nu, self.M, n_s)[n_s - np.arange(a + 1)]
            bi = self._scaled_band(self.nu_i, self.M_i, n_i)[n_i - np.arange(b + 1)]
            self._cells[key] = _contract(bs, self.pmf.probs[: a + 1, : b + 1], bi)
        return self._cells[key]

    def beyond_cutoff(self, n_s, n_i):
        return False
