"""Built-in property suites run by ``ncprob check``.

Each suite returns a :class:`SuiteResult` with a one-line summary.  All
random inputs come from fixed seeds and every reported number is formatted
with ``repr``, so the report is reproducible byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .criteria import CriterionSpec, Family, evaluate, list_appendix, parse_label
from .criteria.majorization import redundancy_residual
from .generators import gen_coherent_product, gen_thermal_product
from .kernels import apply_ordering, build_kernel, s_function, transform_moments
from .pmf import JointPMF, factorial_moment, moment_vector
from .quantifiers import nccp, ncd

CLASSICAL_FLOOR = -1e-10


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    detail: str

    def line(self):
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def random_pmf(rng, shape=(6, 6), vacuum=True):
    """Dirichlet-distributed table; ``vacuum`` keeps p(0, 0) away from zero."""
    p = rng.dirichlet(np.ones(shape[0] * shape[1])).reshape(shape)
    if vacuum:
        p[0, 0] += 0.05
        p /= p.sum()
    return JointPMF(p)


def representative_criteria():
    """A few members of every family plus all appendix criteria (both arms where relevant)."""
    labels = [
        "E:0,0,1", "E:1,2,1", "E:2,2,2", "E:1,0,1,1", "E:0,0,2,1",
        "CS:N=1,1;L=2,0", "CS:N=2,1;L=0,2", "M2:L=1,0;N=0,1", "M2:L=0,0;N=2,2",
        "M:K=0,0;L=1,0;N=0,1", "M:K=1,1;L=2,1;N=1,2",
        "D3:2,1,0>1,1,1@s", "D3:2,1,0>1,1,1@i", "D4:2,1,1,0>1,1,1,1",
        "D3sys1:2,1,1@s", "D3sys2:2,1,1@i", "D4sys3:2,2,1",
        "Dball3:2,1,1@s", "Dball4:2,1,1,1", "Dmn:1,1,1,1", "Dmn:2,0,2,1",
    ]
    specs = [parse_label(x) for x in labels]
    for spec in list_appendix():
        specs.append(spec)
        if spec.arm is not None:
            specs.append(CriterionSpec(spec.family, spec.indices, "idler"))
    return specs


def suite_kernel():
    bad = 0
    for alpha in (Fraction(0), Fraction(1, 2), Fraction(1), Fraction(79)):
        for n in range(21):
            for m in range(n, 21):
                # zero above the diagonal, one on it
                if s_function(n, m, alpha) != (1 if n == m else 0):
                    bad += 1
    worst = 0.0
    for s in (-0.5, 0.0, 0.5):
        for M in (1, 80):
            K = build_kernel(s, M, 30)
            worst = max(worst, float(np.max(np.abs(K.entries.sum(axis=0) - 1.0))))
    ident = build_kernel(1.0, 80, 30).entries
    exact = bool(np.array_equal(ident, np.eye(31)))
    ok = bad == 0 and worst <= 1e-9 and exact
    return SuiteResult(
        "kernel-identities", ok,
        f"triangular violations={bad} max column residual={worst!r} identity at s=1 exact={exact}",
    )


def suite_duality(n_pmfs=20, seed=1):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_pmfs):
        pmf = random_pmf(rng, (5, 5), vacuum=False)
        mv = moment_vector(pmf, 4)
        for s in (-0.5, 0.0, 0.5):
            for M in (1, 80):
                direct = apply_ordering(pmf, s, M)
                via = transform_moments(mv, s, M)
                for k in range(5):
                    for l in range(5 - k):
                        a = factorial_moment(direct, k, l)
                        b = via.moment(k, l)
                        worst = max(worst, abs(a - b) / max(abs(b), 1e-300))
    return SuiteResult("moment-duality", worst <= 1e-6, f"max relative deviation={worst!r}")


def suite_redundancy(n_pmfs=100, seed=2):
    rng = np.random.default_rng(seed)
    triples = [(k, l, m) for k in range(7) for l in range(5) for m in range(1, l + 1) if k >= l]
    worst = 0.0
    for _ in range(n_pmfs):
        pmf = random_pmf(rng, (6, 6), vacuum=False)
        for k, l, m in triples:
            worst = max(worst, redundancy_residual(k, l, m, pmf))
    return SuiteResult(
        "redundancy-identity", worst < 1e-10,
        f"{len(triples)} index triples x {n_pmfs} pmfs, max residual={worst!r}",
    )


def classical_fields():
    out = []
    for mu_s in (0.3, 1.0, 2.0):
        for mu_i in (0.3, 1.0, 2.0):
            out.append((f"coherent({mu_s},{mu_i})", gen_coherent_product(mu_s, mu_i)))
    for nu_s in (0.1, 0.5, 1.0):
        for nu_i in (0.1, 0.5, 1.0):
            out.append((f"thermal({nu_s},{nu_i};M=2)", gen_thermal_product(nu_s, 2, nu_i, 2)))
    return out


def suite_classical(M=2.0, quantifiers=True):
    worst_value, worst_where = 0.0, ""
    failures = 0
    specs = representative_criteria()
    for name, pmf in classical_fields():
        for spec in specs:
            v = evaluate(spec, pmf).value
            if v < worst_value:
                worst_value, worst_where = v, f" at {spec.label} on {name}"
            if v < CLASSICAL_FLOOR:
                failures += 1
            if quantifiers:
                if ncd(spec, pmf, M).tau != 0.0 or nccp(spec, pmf, M).nu != 0.0:
                    failures += 1
    return SuiteResult(
        "classical-soundness", failures == 0,
        f"{len(specs)} criteria x 18 fields, failures={failures}, min value={worst_value!r}{worst_where}",
    )


SUITES = {
    "kernel": suite_kernel,
    "duality": suite_duality,
    "redundancy": suite_redundancy,
    "classical": suite_classical,
}


def run_checks(names=None):
    """Run the named suites (all by default); returns the results in a fixed order."""
    names = list(SUITES) if not names else list(names)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(f"unknown suites {unknown}; choose from {sorted(SUITES)}")
    return [SUITES[n]() for n in names]


def format_report(results):
    lines = [r.line() for r in results]
    n_ok = sum(r.passed for r in results)
    lines.append(f"{n_ok}/{len(results)} suites passed")
    return "\n".join(lines) + "\n"
