"""scikit-learn style wrappers around the transforms and quantifiers.

The "samples" handled by these estimators are whole joint distributions:
``X`` is a :class:`JointPMF`, a 2-D probability table, or a list of either.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .criteria import CriterionSpec, parse_label
from .exceptions import ValidationError
from .kernels import KernelCache, apply_noise, apply_ordering
from .pmf import JointPMF
from .quantifiers import NU_CAP, nccp, ncd


def check_joint_pmf(X):
    """Coerce one table-like input into a :class:`JointPMF`."""
    if isinstance(X, JointPMF):
        return X
    arr = np.asarray(X, dtype=float)
    if arr.ndim != 2:
        raise ValidationError(f"expected a 2-D probability table, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("probability table contains non-finite entries")
    if np.any(arr < 0):
        raise ValidationError("probability table contains negative entries")
    total = arr.sum()
    if total <= 0:
        raise ValidationError("probability table is empty")
    return JointPMF(arr / total)


def check_pmf_batch(X):
    """Return a list of :class:`JointPMF` from a single table or a sequence of tables."""
    if isinstance(X, JointPMF):
        return [X]
    if isinstance(X, np.ndarray) and X.ndim == 2:
        return [check_joint_pmf(X)]
    if isinstance(X, np.ndarray) and X.ndim == 3:
        return [check_joint_pmf(x) for x in X]
    if isinstance(X, (list, tuple)):
        if not X:
            raise ValidationError("empty batch")
        if any(isinstance(x, JointPMF) for x in X):
            return [check_joint_pmf(x) for x in X]
        try:
            arr = np.asarray(X, dtype=float)
        except ValueError:  # ragged list of tables
            return [check_joint_pmf(x) for x in X]
        return check_pmf_batch(arr)
    raise ValidationError(f"cannot interpret {type(X).__name__} as joint distributions")


def check_criteria(criteria):
    if isinstance(criteria, (str, CriterionSpec)):
        criteria = [criteria]
    out = [parse_label(c) if isinstance(c, str) else c for c in criteria]
    if not out:
        raise ValidationError("at least one criterion is required")
    return out


class OrderingTransformer(TransformerMixin, BaseEstimator):
    """Map normally ordered tables to s-ordered ones."""

    def __init__(self, s=0.0, modes=1.0, modes_idler=None):
        self.s = s
        self.modes = modes
        self.modes_idler = modes_idler

    def fit(self, X=None, y=None):
        if not -1.0 < self.s <= 1.0:
            raise ValidationError("s must lie in (-1, 1]")
        if self.modes <= 0:
            raise ValidationError("modes must be positive")
        self.n_features_in_ = 2
        self.is_fitted_ = True
        return self

    def transform(self, X):
        check_is_fitted(self, "is_fitted_")
        return [apply_ordering(p, self.s, self.modes, self.modes_idler) for p in check_pmf_batch(X)]


class NoiseTransformer(TransformerMixin, BaseEstimator):
    """Mix independent chaotic noise into each arm."""

    def __init__(self, nu=0.0, modes=1.0, nu_idler=None, modes_idler=None):
        self.nu = nu
        self.modes = modes
        self.nu_idler = nu_idler
        self.modes_idler = modes_idler

    def fit(self, X=None, y=None):
        if self.nu < 0 or (self.nu_idler is not None and self.nu_idler < 0):
            raise ValidationError("noise must be nonnegative")
        if self.modes <= 0:
            raise ValidationError("modes must be positive")
        self.is_fitted_ = True
        return self

    def transform(self, X):
        check_is_fitted(self, "is_fitted_")
        return [
            apply_noise(p, self.nu, self.modes, self.nu_idler, self.modes_idler)
            for p in check_pmf_batch(X)
        ]


class NonclassicalityDepth(BaseEstimator):
    """Depth of a fixed list of criteria; ``transform`` gives an (n_fields, n_criteria) array."""

    def __init__(self, criteria=("A:E001",), modes=1.0, eps_stat=0.0):
        self.criteria = criteria
        self.modes = modes
        self.eps_stat = eps_stat

    def fit(self, X=None, y=None):
        self.criteria_ = check_criteria(self.criteria)
        if self.modes <= 0:
            raise ValidationError("modes must be positive")
        self.cache_ = KernelCache()
        return self

    def results(self, X):
        check_is_fitted(self, "criteria_")
        return [
            [ncd(c, p, self.modes, eps_stat=self.eps_stat, cache=self.cache_) for c in self.criteria_]
            for p in check_pmf_batch(X)
        ]

    def transform(self, X):
        return np.array([[r.tau for r in row] for row in self.results(X)])

    def fit_transform(self, X, y=None):
        return self.fit(X).transform(X)


class CountingParameter(BaseEstimator):
    """Counting parameter per criterion; unbounded results become ``inf``."""

    def __init__(self, criteria=("A:E001",), modes=1.0, nu_cap=NU_CAP, eps_stat=0.0):
        self.criteria = criteria
        self.modes = modes
        self.nu_cap = nu_cap
        self.eps_stat = eps_stat

    def fit(self, X=None, y=None):
        self.criteria_ = check_criteria(self.criteria)
        if self.modes <= 0 or self.nu_cap <= 0:
            raise ValidationError("modes and nu_cap must be positive")
        return self

    def results(self, X):
        check_is_fitted(self, "criteria_")
        return [
            [nccp(c, p, self.modes, nu_cap=self.nu_cap, eps_stat=self.eps_stat) for c in self.criteria_]
            for p in check_pmf_batch(X)
        ]

    def transform(self, X):
        return np.array(
            [[np.inf if isinstance(r.nu, str) else r.nu for r in row] for row in self.results(X)]
        )

    def fit_transform(self, X, y=None):
        return self.fit(X).transform(X)
