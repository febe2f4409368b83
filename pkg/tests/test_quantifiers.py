import csv
import io
import math

import numpy as np
import pytest

from ncprob import JointPMF, gen_coherent_product, gen_ideal_twin, gen_thermal_product
from ncprob.criteria import evaluate
from ncprob.exceptions import MissingOrder, ValidationError
from ncprob.kernels import KernelCache, OrderedCells
from ncprob.pmf import moment_vector
from ncprob.quantifiers import (
    S_TOL,
    TAU_CAP,
    moment_ncd,
    nccp,
    ncd,
    ncd_many,
    results_to_csv,
)


@pytest.fixture(scope="module")
def twin():
    return gen_ideal_twin(1.0, 2, cutoff=14)


def test_classical_fields_give_zero():
    coh = gen_coherent_product(1.0, 1.0)
    r = ncd("A:E001", coh, 1)
    assert r.tau == 0.0 and r.verdict_at_origin.verdict == "classical boundary"
    assert nccp("A:E001", gen_thermal_product(0.5, 2, 0.5, 2), 2).nu == 0.0
    assert moment_ncd("E:0,0,1", coh, 1).tau == 0.0


def test_depth_on_twin(twin):
    r = ncd("A:E001", twin, 2)
    assert 0 < r.tau < 1
    lo, hi = r.bracket
    assert lo <= r.tau <= hi and (hi - lo) * 2 <= S_TOL + 1e-15
    assert r.modes_tau == pytest.approx(2 * r.tau)
    assert r.verdict_at_origin.negative and r.route == "probability"


def test_root_is_a_sign_change(twin):
    r = ncd("A:E001", twin, 2)
    lo, hi = r.bracket
    s_hi, s_lo = 1 - 2 * lo, 1 - 2 * hi
    assert evaluate("A:E001", OrderedCells(twin, s_hi, 2)).negative
    assert not evaluate("A:E001", OrderedCells(twin, s_lo, 2)).negative


def test_counting_parameter_on_twin(twin):
    r = nccp("A:E001", twin, 2)
    lo, hi = r.bracket
    assert lo <= r.nu <= hi and hi - lo <= 1e-4 * hi
    assert r.nu >= ncd("A:E001", twin, 2).tau


def test_trends_in_modes(twin):
    taus = [ncd("A:E001", twin, M).tau for M in (1, 2, 5, 10)]
    nus = [nccp("A:E001", twin, M).nu for M in (1, 2, 5, 10)]
    assert taus == sorted(taus, reverse=True)
    assert nus == sorted(nus, reverse=True)


def test_unbounded_counting_parameter():
    r = nccp("A:E001", JointPMF.delta(1, 1), 1, nu_cap=0.05)
    assert r.nu == "unbounded" and "unbounded" in r.flags


def test_cap_flag():
    # a table that stays negative under every ordering is reported at the cap
    class Always:
        def prob(self, a, b):
            return 1.0 if (a, b) == (1, 1) else 0.0

    from ncprob.quantifiers import _Counter, _depth_search
    from ncprob.criteria import parse_label

    spec = parse_label("A:E001")
    G = _Counter(lambda s: evaluate(spec, Always()))
    r = _depth_search(spec, G, evaluate(spec, Always()), 1.0, "probability")
    assert r.tau == TAU_CAP and "cap" in r.flags


def test_moment_route(twin):
    r = moment_ncd("E:0,0,1", twin, 2)
    assert r.route == "moment" and 0 < r.tau < 1
    with pytest.raises(MissingOrder):
        moment_ncd("E:2,2,1", moment_vector(twin, 2), 2)
    mv = moment_vector(twin, 2)
    assert moment_ncd("E:0,0,1", mv, 2).tau == r.tau


def test_eps_stat_suppresses_small_negativity(twin):
    v = evaluate("A:E001", twin).value
    assert ncd("A:E001", twin, 2, eps_stat=2 * abs(v)).tau == 0.0
    assert nccp("A:E001", twin, 2, eps_stat=2 * abs(v)).nu == 0.0


def test_validation(twin):
    with pytest.raises(ValidationError):
        ncd("A:E001", twin, 0)
    with pytest.raises(ValidationError):
        nccp("A:E001", twin, 1, nu_cap=0)


def test_ncd_many_matches_serial(twin):
    labels = ["A:E001", "E:1,1,1", "CS:N=1,1;L=0,0", "A:E002"]
    serial = ncd_many(labels, twin, 2)
    threaded = ncd_many(labels, twin, 2, workers=3)
    assert [r.tau for r in serial] == [r.tau for r in threaded]
    assert [r.tau for r in serial] == [ncd(l, twin, 2).tau for l in labels]


def test_results_csv(twin):
    rows = list(csv.reader(io.StringIO(results_to_csv([ncd("A:E001", twin, 2)]))))
    assert rows[0] == ["name", "indices", "value_at_origin", "tau", "bracket_lo", "bracket_hi", "flags", "route"]
    assert rows[1][0] == "A:E001" and float(rows[1][3]) > 0
    rows = list(csv.reader(io.StringIO(results_to_csv([nccp("A:E001", JointPMF.delta(1, 1), 1, nu_cap=0.01)], "nu"))))
    assert rows[1][3] == "unbounded"


def test_bit_stable(twin):
    a = ncd("A:E002", twin, 3, cache=KernelCache())
    b = ncd("A:E002", twin, 3, cache=KernelCache())
    assert a.tau == b.tau and a.bracket == b.bracket
