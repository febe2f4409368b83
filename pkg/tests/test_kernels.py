import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import eval_genlaguerre

from ncprob import JointPMF, gen_coherent_product
from ncprob.exceptions import PrecisionEscalation, ValidationError
from ncprob.kernels import (
    KernelCache,
    NoisedCells,
    NoiseKernel,
    OrderedCells,
    apply_noise,
    apply_ordering,
    build_kernel,
    kernel_entry,
    kernel_entry_auto,
    kernel_rows,
    laguerre,
    laguerre_coefficients,
    mandel_rice,
    mandel_rice_pmf,
    ordering_coefficients,
    s_function,
    transform_moments,
)
from ncprob.pmf import factorial_moment, moment_vector

from strategies import pmfs


def laguerre_series(k, alpha, x):
    return sum(
        (-1) ** j * math.gamma(k + alpha + 1) / (math.gamma(k - j + 1) * math.gamma(alpha + j + 1))
        * x**j / math.factorial(j)
        for j in range(k + 1)
    )


def test_laguerre_examples():
    assert laguerre(0, 2.5, 3.7) == 1.0
    for M in (1, 3, 80):
        assert laguerre(1, M - 1, 0.0) == pytest.approx(M)
    assert laguerre(3, 0, 1.0) == pytest.approx(laguerre_series(3, 0, 1.0), rel=1e-14)


@given(st.integers(0, 12), st.floats(-0.99, 90.0), st.floats(-20.0, 20.0))
def test_laguerre_matches_scipy_and_coefficients(k, alpha, x):
    ref = eval_genlaguerre(k, alpha, x)
    assert laguerre(k, alpha, x) == pytest.approx(ref, rel=1e-9, abs=1e-9)
    coefs = laguerre_coefficients(k, alpha)
    poly = np.polynomial.polynomial.polyval(x, coefs)
    # monomial form cancels; compare on the scale of the absolute term sum
    scale = np.polynomial.polynomial.polyval(abs(x), np.abs(coefs))
    assert abs(poly - ref) <= 1e-12 * scale + 1e-12


def test_s_function_examples():
    for alpha in (0, Fraction(1, 2), 3, 79):
        assert s_function(1, 2, alpha) == 0
    assert s_function(2, 2, 0) == 1
    assert s_function(2, 1, 0) == 1


def test_s_function_triangular():
    for alpha in (Fraction(0), Fraction(1, 2), Fraction(1), Fraction(79)):
        for n in range(21):
            for m in range(n, 21):
                assert s_function(n, m, alpha) == (1 if n == m else 0)


def test_kernel_entry_closed_forms():
    for M in (1, 2, 5):
        assert kernel_entry(0, 0, Fraction(0), M) == pytest.approx((2 / 3) ** M, rel=1e-15)
        assert kernel_entry(0, 0, 0.0, M) == pytest.approx((2 / 3) ** M, rel=1e-12)
    for n in range(8):
        assert kernel_entry(n, 0, Fraction(0), 1) == pytest.approx((2 / 3) * (1 / 3) ** n, rel=1e-15)


def test_kernel_entry_near_one_is_identity():
    s = Fraction(999999, 1000000)
    for n in range(4):
        for m in range(4):
            assert kernel_entry(n, m, s, 3) == pytest.approx(1.0 if n == m else 0.0, abs=1e-5)
    assert kernel_entry(2, 2, 1, 80) == 1.0 and kernel_entry(2, 1, 1, 80) == 0.0


def test_exact_and_interval_agree():
    for n, m in ((3, 1), (6, 6), (10, 4)):
        exact = kernel_entry(n, m, Fraction(1, 2), 4)
        iv = kernel_entry(n, m, 0.5, 4)
        assert iv == pytest.approx(exact, rel=1e-12)


def test_precision_escalation():
    with pytest.raises(PrecisionEscalation) as e:
        kernel_entry(30, 30, -0.5, 80, precision_bits=20)
    assert (e.value.n, e.value.m, e.value.modes) == (30, 30, 80)
    value, bits = kernel_entry_auto(30, 30, -0.5, 80, precision_bits=20)
    assert bits > 20
    assert value == pytest.approx(kernel_rows([30], -0.5, 80, 30)[0, 30], rel=1e-9)


def test_closed_form_matches_series():
    closed = build_kernel(0.25, 3, 8, method="closed").entries
    for n in range(0, 20, 3):
        for m in range(9):
            assert closed[n, m] == pytest.approx(kernel_entry(n, m, Fraction(1, 4), 3), rel=1e-10, abs=1e-16)


def test_kernel_rows_match_columns():
    K = build_kernel(-0.3, 2.5, 10).entries
    rows = kernel_rows([0, 4, 13], -0.3, 2.5, 10)
    assert np.allclose(rows, K[[0, 4, 13]], rtol=1e-12, atol=1e-17)


def test_build_kernel_examples():
    K = build_kernel(1.0, 80, 6)
    assert np.array_equal(K.entries, np.eye(7))
    assert abs(build_kernel(0.0, 1, 0).entries[:, 0].sum() - 1) < 1e-9
    K = build_kernel(0.5, 80, 30)
    assert K.column_norm_residuals.size == 31
    assert np.all(K.column_norm_residuals < 1e-9)
    assert np.all(np.isfinite(K.column_abs_sums))


def test_build_kernel_rejects_bad_inputs():
    with pytest.raises(ValidationError):
        build_kernel(-1.0, 1, 3)
    with pytest.raises(ValidationError):
        build_kernel(0.0, 0, 3)


def test_kernel_columns_are_mixtures_for_interior_s():
    # binomial thinning followed by chaotic noise: nonnegative, unit column sums
    K = build_kernel(-0.5, 3, 6)
    assert K.entries.min() >= 0
    assert np.allclose(K.column_abs_sums, 1.0, atol=1e-9)


def test_kernel_csv():
    text = build_kernel(0.5, 1, 1).to_csv()
    lines = text.splitlines()
    assert lines[0] == "n,m,value"
    n, m, v = lines[1].split(",")
    assert float(v) == pytest.approx(0.8)


def test_apply_ordering_examples():
    p = gen_coherent_product(1.0, 0.5)
    assert apply_ordering(p, 1.0, 3) is p
    vac = apply_ordering(JointPMF.delta(0, 0), 0.0, 1)
    geo = (2 / 3) * (1 / 3) ** np.arange(6)
    assert np.allclose(vac.probs[:6, :6], np.outer(geo, geo), rtol=1e-12)
    for s in (0.2, 0.5, 0.9):
        out = apply_ordering(p, s, 2)
        assert out.probs.min() >= -1e-12
        assert abs(out.total() + out.norm_deficit - 1) < 1e-9


@given(pmfs(max_side=4, vacuum=False), st.sampled_from([-0.5, 0.0, 0.5]), st.sampled_from([1, 80]))
def test_duality(p, s, M):
    direct = apply_ordering(p, s, M)
    via = transform_moments(moment_vector(p, 4), s, M)
    for k in range(5):
        for l in range(5 - k):
            assert factorial_moment(direct, k, l) == pytest.approx(via.moment(k, l), rel=1e-6, abs=1e-12)


def test_transform_moment_examples():
    vac = moment_vector(JointPMF.delta(0, 0), 2)
    assert transform_moments(vac, 0.0, 1).moment(1, 0) == pytest.approx(0.5)
    mv = moment_vector(gen_coherent_product(1.2, 0.4), 4)
    same = transform_moments(mv, 1.0, 7)
    assert np.array_equal(same.moments, mv.moments)
    assert np.array_equal(ordering_coefficients(4, 1.0, 7), np.eye(5))


def test_mandel_rice_examples():
    assert mandel_rice(0, 0.7, 3) == pytest.approx(1.7**-3)
    for n in range(6):
        assert mandel_rice(n, 0.4, 1) == pytest.approx(0.4**n / 1.4 ** (n + 1))
    band = mandel_rice_pmf(1.0, 80)
    assert abs(math.fsum(band) - 1) < 1e-12
    assert mandel_rice(500, 1.0, 80) > 0


def test_noise_kernel_is_stochastic():
    nk = NoiseKernel.build(0.3, 4)
    K = nk.matrix(5)
    assert np.all(K >= 0)
    assert np.allclose(K.sum(axis=0), 1.0, atol=1e-12)
    assert np.all(np.triu(K, 1) == 0)


def test_apply_noise_examples():
    p = gen_coherent_product(0.5, 0.5)
    assert apply_noise(p, 0.0, 3) is p
    out = apply_noise(JointPMF.delta(0, 0), 1.0, 1)
    geo = 0.5 ** (np.arange(6) + 1)
    assert np.allclose(out.probs[:6, :6], np.outer(geo, geo))
    M, nu = 3, 0.4
    q = apply_noise(p, nu, M)
    assert factorial_moment(q, 1, 0) == pytest.approx(0.5 + M * nu, rel=1e-10)
    assert q.probs.min() >= 0


def test_noise_semigroup_first_two_moments():
    p = gen_coherent_product(0.7, 1.1)
    M = 3
    two = apply_noise(apply_noise(p, 0.2, M), 0.3, M)
    one = apply_noise(p, 0.5, M)
    for k, l in ((1, 0), (0, 1), (1, 1)):
        assert factorial_moment(two, k, l) == pytest.approx(factorial_moment(one, k, l), rel=1e-10)
    # single-arm second moments differ: M nu1^2 + M nu2^2 != M (nu1 + nu2)^2
    assert factorial_moment(two, 2, 0) != pytest.approx(factorial_moment(one, 2, 0), rel=1e-6)


def test_lazy_tables_match_dense():
    p = gen_coherent_product(0.8, 0.3)
    cache = KernelCache()
    dense = apply_ordering(p, 0.3, 2)
    lazy = OrderedCells(p, 0.3, 2, cache=cache)
    for a, b in ((0, 0), (2, 1), (5, 3)):
        assert lazy.prob(a, b) == pytest.approx(dense.prob(a, b), rel=1e-12, abs=1e-18)
    assert len(cache) > 0
    noisy = apply_noise(p, 0.2, 2)
    cells = NoisedCells(p, 0.2, 2)
    c = mandel_rice(0, 0.2, 2) ** 2
    for a, b in ((0, 0), (1, 2), (4, 4)):
        assert cells.prob(a, b) * c == pytest.approx(noisy.prob(a, b), rel=1e-12)


def test_lazy_tables_swap_exact():
    rng = np.random.default_rng(5)
    p = JointPMF(rng.dirichlet(np.ones(30)).reshape(5, 6))
    for a, b in ((0, 0), (3, 1), (2, 5)):
        assert OrderedCells(p, -0.2, 3).prob(a, b) == OrderedCells(p.swap(), -0.2, 3).prob(b, a)
        assert NoisedCells(p, 0.4, 2).prob(a, b) == NoisedCells(p.swap(), 0.4, 2).prob(b, a)
