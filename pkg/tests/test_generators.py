import numpy as np
import pytest

from ncprob import FieldModel, JointPMF, gen_coherent_product, gen_ideal_twin, gen_noisy_twin, gen_thermal_product
from ncprob.criteria import evaluate
from ncprob.exceptions import ValidationError
from ncprob.kernels import mandel_rice_pmf
from ncprob.pmf import estimate_modes, factorial_moment, marginal


def test_ideal_twin_examples():
    assert np.array_equal(gen_ideal_twin(0.0, 3).probs, [[1.0]])
    geo = gen_ideal_twin(1.0, 1, cutoff=10)
    assert np.allclose(np.diag(geo.probs), 0.5 ** (np.arange(11) + 1))
    assert np.count_nonzero(geo.probs - np.diag(np.diag(geo.probs))) == 0


def test_reference_twin_beam_mean():
    twin = gen_ideal_twin(8.86, 80)
    for arm in ("signal", "idler"):
        m = marginal(twin, arm)
        assert abs(np.arange(m.size) @ m - 8.86) < 1e-6
    assert twin.norm_deficit < 1e-12
    assert np.allclose(marginal(twin, "signal"), mandel_rice_pmf(8.86 / 80, 80, n_max=twin.cutoff_s), atol=1e-18)


def test_classical_products():
    assert np.array_equal(gen_coherent_product(0.0, 0.0).probs, [[1.0]])
    coh = gen_coherent_product(0.6, 1.4)
    assert factorial_moment(coh, 2, 3) == pytest.approx(0.6**2 * 1.4**3, rel=1e-12)
    th = gen_thermal_product(0.3, 4, 1.2, 2)
    assert estimate_modes(th, "signal") == pytest.approx(4, rel=1e-9)
    assert estimate_modes(th, "idler") == pytest.approx(2, rel=1e-9)


def test_noisy_twin():
    base = gen_ideal_twin(2.0, 4)
    assert np.array_equal(gen_noisy_twin(2.0, 4).probs, base.probs)
    weak = gen_noisy_twin(2.0, 4, (0.3, 1), (0.3, 1))
    assert evaluate("A:E001", weak).negative
    # mean 20 per arm spread over 20 modes; in a single mode the same mean
    # is still below the counting parameter and leaves the criterion negative
    strong = gen_noisy_twin(2.0, 4, (20.0, 20), (20.0, 20))
    assert not evaluate("A:E001", strong).negative


def test_generator_outputs_are_valid():
    for p in (
        gen_ideal_twin(3.0, 5), gen_coherent_product(2.0, 0.1),
        gen_thermal_product(0.5, 1, 0.5, 3), gen_noisy_twin(1.0, 2, (0.5, 2), (0.2, 1)),
    ):
        assert isinstance(p, JointPMF) and p.probs.min() >= 0
        assert p.norm_deficit < 1e-12


def test_field_model():
    m = FieldModel("ideal_twin", {"B": 8.86, "Mp": 80})
    assert np.array_equal(m.build().probs, gen_ideal_twin(8.86, 80).probs)
    noisy = FieldModel("noisy_twin", {"B": 1.0, "Mp": 2, "noise_s": 0.5, "noise_modes_s": 2})
    assert np.array_equal(noisy.build().probs, gen_noisy_twin(1.0, 2, (0.5, 2)).probs)
    with pytest.raises(ValidationError):
        FieldModel("squeezed", {})


def test_invalid_parameters():
    with pytest.raises(ValidationError):
        gen_ideal_twin(-1.0, 2)
    with pytest.raises(ValidationError):
        gen_ideal_twin(1.0, 0.5)
    with pytest.raises(ValidationError):
        gen_noisy_twin(1.0, 2, (-0.1, 1))
