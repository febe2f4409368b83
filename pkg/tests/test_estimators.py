import numpy as np
import pytest
from sklearn.base import clone

from ncprob import gen_coherent_product, gen_ideal_twin
from ncprob.estimators import (
    CountingParameter,
    NoiseTransformer,
    NonclassicalityDepth,
    OrderingTransformer,
    check_joint_pmf,
    check_pmf_batch,
)
from ncprob.exceptions import ValidationError
from ncprob.kernels import apply_noise, apply_ordering
from ncprob.quantifiers import ncd


def test_check_joint_pmf_normalizes():
    p = check_joint_pmf([[2.0, 1.0], [1.0, 0.0]])
    assert np.isclose(p.probs.sum(), 1.0)
    assert p.probs[0, 0] == 0.5


@pytest.mark.parametrize("bad", [[1.0, 2.0], [[1.0, -1.0]], [[np.nan, 1.0]], [[0.0, 0.0]]])
def test_check_joint_pmf_rejects(bad):
    with pytest.raises(ValidationError):
        check_joint_pmf(bad)


def test_batch_shapes():
    t = np.full((3, 3), 1 / 9)
    assert len(check_pmf_batch(t)) == 1
    assert len(check_pmf_batch(np.stack([t, t]))) == 2
    assert len(check_pmf_batch([t, np.full((2, 4), 1 / 8)])) == 2  # ragged
    with pytest.raises(ValidationError):
        check_pmf_batch([])
    with pytest.raises(ValidationError):
        check_pmf_batch("nope")


def test_params_and_clone():
    est = NonclassicalityDepth(criteria=("A:E001", "E:0,0,2"), modes=3.0)
    assert est.get_params()["modes"] == 3.0
    c = clone(est)
    assert c.get_params() == est.get_params()
    assert not hasattr(c, "criteria_")
    est.set_params(modes=5.0)
    assert est.modes == 5.0


def test_ordering_transformer_matches_function():
    pmf = gen_ideal_twin(1.0, 2, cutoff=10)
    out = OrderingTransformer(s=0.3, modes=2.0).fit_transform(pmf)
    ref = apply_ordering(pmf, 0.3, 2.0)
    assert np.array_equal(out[0].probs, ref.probs)


def test_noise_transformer_matches_function():
    pmf = gen_coherent_product(0.5, 0.5)
    out = NoiseTransformer(nu=0.2, modes=2.0).fit_transform([pmf, pmf])
    ref = apply_noise(pmf, 0.2, 2.0)
    assert len(out) == 2
    assert np.array_equal(out[1].probs, ref.probs)


def test_transformers_validate():
    with pytest.raises(ValidationError):
        OrderingTransformer(s=-1.0).fit()
    with pytest.raises(ValidationError):
        NoiseTransformer(nu=-0.1).fit()


def test_depth_estimator(small_twin):
    est = NonclassicalityDepth(criteria=("A:E001",), modes=1.0).fit()
    tau = est.transform([small_twin, gen_coherent_product(1.0, 1.0)])
    assert tau.shape == (2, 1)
    assert tau[0, 0] == ncd("A:E001", small_twin, 1.0).tau
    assert tau[1, 0] == 0.0


def test_counting_parameter_inf_for_unbounded(small_twin):
    est = CountingParameter(criteria="A:E001", modes=1.0, nu_cap=0.05)
    nu = est.fit_transform(small_twin)
    assert nu.shape == (1, 1)
    assert np.isinf(nu[0, 0])
