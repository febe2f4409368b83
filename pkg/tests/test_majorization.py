import numpy as np
import pytest
from hypothesis import given

from ncprob import gen_coherent_product
from ncprob.criteria import Polynomial, redundancy_residual
from ncprob.criteria.families import expand_e3
from ncprob.criteria.majorization import (
    redundancy_lhs,
    redundancy_rhs,
    redundancy_weights,
    symbolic_redundancy_gap,
)
from ncprob.exceptions import InvalidIndices
from ncprob.pmf import moment_vector

from strategies import pmfs

TRIPLES = [(k, l, m) for k in range(7) for l in range(5) for m in range(1, l + 1) if k >= l]


@pytest.mark.parametrize("k,l,m", TRIPLES)
def test_identity_holds_symbolically(k, l, m):
    assert symbolic_redundancy_gap(k, l, m).is_zero()


def test_m2_form():
    # (k, k, 2): E(k+1,k-1) + E(k-1,k+1) + 2 E(k,k), with E centred at the given cell
    for k in range(2, 6):
        e = lambda a, b: expand_e3(a - 1, b - 1, 1)  # noqa: E731
        assert redundancy_rhs(k, k, 2) == e(k + 1, k - 1) + e(k - 1, k + 1) + e(k, k).scale(2)


def test_m1_is_single_difference():
    # m = 1 collapses the sum to the one difference between the two moved cells
    for k, l in ((1, 1), (3, 1), (4, 2)):
        w = redundancy_weights(k, l, 1)
        assert all(v == 1 for v in w.values())
        assert redundancy_lhs(k, l, 1) == redundancy_rhs(k, l, 1)


def test_weights_nonnegative():
    for k, l, m in TRIPLES:
        assert all(v >= 0 for v in redundancy_weights(k, l, m).values())


@given(pmfs(max_side=6, vacuum=False))
def test_residual_on_random_pmfs(p):
    for k, l, m in TRIPLES:
        assert redundancy_residual(k, l, m, p) < 1e-10


def test_residual_on_moments_and_coherent():
    coh = gen_coherent_product(1.1, 0.9, cutoff=60)
    mv = moment_vector(coh, 10)
    for k, l, m in ((3, 2, 1), (4, 4, 2), (6, 4, 4)):
        value, _, _ = redundancy_lhs(k, l, m).evaluate(mv.moment)
        assert redundancy_residual(k, l, m, mv) <= 1e-10 * max(1.0, abs(value))
        assert redundancy_residual(k, l, m, coh) < 1e-10


def test_invalid():
    with pytest.raises(InvalidIndices):
        redundancy_residual(1, 2, 1, gen_coherent_product(1, 1))
    with pytest.raises(InvalidIndices):
        redundancy_lhs(2, 2, 0)
    with pytest.raises(TypeError):
        redundancy_residual(2, 2, 1, np.eye(3))
