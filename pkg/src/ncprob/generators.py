"""Synthetic bipartite fields: twin beams and classical controls."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.stats import nbinom, poisson

from .exceptions import ValidationError
from .kernels import mandel_rice_pmf
from .pmf import JointPMF, convolve

KINDS = ("ideal_twin", "coherent_product", "thermal_product", "noisy_twin")

#: default cutoffs also cover this tail, so moments of generated fields are
#: accurate to rounding rather than to the truncation tolerance
GEN_TAIL_TOL = 1e-16


def _nonneg(**kw):
    for k, v in kw.items():
        if v < 0:
            raise ValidationError(f"{k} must be nonnegative, got {v}")


def _modes(**kw):
    for k, v in kw.items():
        if v < 1:
            raise ValidationError(f"{k} must be at least 1, got {v}")


def default_cutoff(mean, var):
    """``mean + 10 * stddev`` rounded up."""
    return int(math.ceil(mean + 10.0 * math.sqrt(max(var, 0.0))))


def _mr_band(mean, modes, cutoff):
    """Mandel-Rice band with ``mean`` photons in ``modes`` modes."""
    if mean == 0:
        return np.array([1.0])
    nu = mean / modes
    if cutoff is None:
        tail = int(nbinom.isf(GEN_TAIL_TOL, modes, 1.0 / (1.0 + nu))) + 1
        cutoff = max(default_cutoff(mean, mean * (1 + nu)), tail)
    return mandel_rice_pmf(nu, modes, n_max=cutoff)


def _poisson_band(mu, cutoff):
    if mu == 0:
        return np.array([1.0])
    if cutoff is None:
        cutoff = max(default_cutoff(mu, mu), int(poisson.isf(GEN_TAIL_TOL, mu)) + 1)
    return poisson.pmf(np.arange(cutoff + 1), mu)


def _from_table(table):
    table = np.asarray(table, dtype=float)
    return JointPMF(table, norm_deficit=max(0.0, 1.0 - math.fsum(table.ravel())))


def gen_ideal_twin(B, M_p, cutoff=None):
    """Ideal twin beam: ``p(n, n)`` Mandel-Rice with B mean pairs in ``M_p`` modes."""
    _nonneg(B=B)
    _modes(M_p=M_p)
    diag = _mr_band(B, M_p, cutoff)
    return _from_table(np.diag(diag))


def gen_coherent_product(mu_s, mu_i, cutoff=None):
    _nonneg(mu_s=mu_s, mu_i=mu_i)
    return _from_table(np.outer(_poisson_band(mu_s, cutoff), _poisson_band(mu_i, cutoff)))


def gen_thermal_product(nu_s, M_s, nu_i, M_i, cutoff=None):
    """Product of Mandel-Rice marginals; ``nu`` is the mean photon number per mode."""
    _nonneg(nu_s=nu_s, nu_i=nu_i)
    _modes(M_s=M_s, M_i=M_i)
    return _from_table(
        np.outer(_mr_band(nu_s * M_s, M_s, cutoff), _mr_band(nu_i * M_i, M_i, cutoff))
    )


def gen_noisy_twin(B, M_p, noise_s=(0.0, 1.0), noise_i=(0.0, 1.0), cutoff=None):
    """Twin beam plus independent chaotic noise on each arm.

    ``noise_s`` and ``noise_i`` are ``(mean photons, modes)`` pairs.
    """
    (ms, Ms), (mi, Mi) = noise_s, noise_i
    _nonneg(noise_mean_s=ms, noise_mean_i=mi)
    _modes(noise_modes_s=Ms, noise_modes_i=Mi)
    twin = gen_ideal_twin(B, M_p, cutoff)
    return convolve(twin, _mr_band(ms, Ms, None), _mr_band(mi, Mi, None))


@dataclass(frozen=True)
class FieldModel:
    """A generator name and its keyword parameters."""

    kind: str
    params: dict = field(default_factory=dict)
    cutoff: Optional[int] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown field kind {self.kind!r}; choose from {KINDS}")

    def build(self):
        p = dict(self.params)
        if self.kind == "ideal_twin":
            return gen_ideal_twin(p.get("B", 0.0), p.get("Mp", 1.0), self.cutoff)
        if self.kind == "coherent_product":
            return gen_coherent_product(p.get("mu_s", 0.0), p.get("mu_i", 0.0), self.cutoff)
        if self.kind == "thermal_product":
            return gen_thermal_product(
                p.get("nu_s", 0.0), p.get("M_s", 1.0), p.get("nu_i", 0.0), p.get("M_i", 1.0),
                self.cutoff,
            )
        return gen_noisy_twin(
            p.get("B", 0.0), p.get("Mp", 1.0),
            (p.get("noise_s", 0.0), p.get("noise_modes_s", 1.0)),
            (p.get("noise_i", 0.0), p.get("noise_modes_i", 1.0)),
            self.cutoff,
        )
