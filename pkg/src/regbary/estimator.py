"""scikit-learn style transformers over a fixed metric measure space.

The space is a hyperparameter; ``X`` holds one probability vector per row.
A :class:`RegularizedBarycenter` maps each row to its canonical
barycenter, so iterating the map is just a pipeline::

    >>> from sklearn.pipeline import make_pipeline
    >>> from regbary.space import build_circle
    >>> space = build_circle(16)
    >>> X = np.zeros((1, 16)); X[0, [0, 4, 8, 12]] = 0.25
    >>> twice = make_pipeline(RegularizedBarycenter(space), RegularizedBarycenter(space))
    >>> np.allclose(twice.fit_transform(X), X)
    True
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils import check_array
from sklearn.utils.validation import check_is_fitted

from .barycenter import barycenter_set, canonical_barycenter, minimize_f_epsilon
from .errors import InvalidArgumentError
from .ot import variance
from .space import DEFAULT_TOL_MASS, Measure, MetricMeasureSpace, check_space


def check_space_input(space, m=None, validate=True):
    """Coerce ``space`` to a :class:`MetricMeasureSpace`.

    A square distance table is accepted too, with ``m`` (default uniform)
    as the reference measure.
    """
    if not isinstance(space, MetricMeasureSpace):
        if space is None:
            raise InvalidArgumentError("a space is required")
        dist = check_array(space, dtype=np.float64, ensure_2d=True)
        space = MetricMeasureSpace(dist, m)
    if validate:
        check_space(space)
    return space


def check_measures(X, n_points, tol_mass=DEFAULT_TOL_MASS):
    """Validate a 2-D array whose rows are probability vectors on ``n_points``.

    A single :class:`Measure` or 1-D vector is promoted to one row.
    """
    if isinstance(X, Measure):
        X = X.weights
    X = check_array(np.atleast_2d(np.asarray(X, dtype=np.float64)), dtype=np.float64)
    if X.shape[1] != n_points:
        raise InvalidArgumentError(
            f"X has {X.shape[1]} columns but the space has {n_points} points"
        )
    if np.any(X < 0):
        raise InvalidArgumentError("measure rows must be nonnegative")
    bad = np.flatnonzero(np.abs(X.sum(axis=1) - 1.0) > tol_mass)
    if bad.size:
        raise InvalidArgumentError(f"rows {bad.tolist()} do not sum to 1")
    return X


class _SpaceTransformer(TransformerMixin, BaseEstimator):
    def fit(self, X=None, y=None):
        """Validate the space (and ``X`` when given); nothing is learned."""
        self.space_ = check_space_input(self.space)
        self.n_features_in_ = self.space_.n
        self.tol_b_ = self.space_.tol_b if self.tol_b is None else float(self.tol_b)
        self.tol_tie_ = self.space_.tol_tie if self.tol_tie is None else float(self.tol_tie)
        if self.tol_b_ < 0 or self.tol_tie_ < 0:
            raise InvalidArgumentError("tolerances must be nonnegative")
        if X is not None:
            check_measures(X, self.space_.n)
        return self

    def _rows(self, X):
        check_is_fitted(self, "space_")
        return check_measures(X, self.space_.n)


class RegularizedBarycenter(_SpaceTransformer):
    """Row-wise canonical barycenter ``mu -> B(mu)``.

    Parameters
    ----------
    space : MetricMeasureSpace or array of shape (n, n)
        The metric measure space the rows of ``X`` live on.
    tol_b : float, optional
        Barycenter-set tolerance; defaults to ``1e-9 * diameter**2``.
    tol_tie : float, optional
        Nearest-point tie tolerance; defaults to ``1e-9 * diameter``.
    """

    def __init__(self, space=None, tol_b=None, tol_tie=None):
        self.space = space
        self.tol_b = tol_b
        self.tol_tie = tol_tie

    def transform(self, X):
        rows = self._rows(X)
        out = np.empty_like(rows)
        for k, w in enumerate(rows):
            res = canonical_barycenter(self.space_, w, self.tol_b_, self.tol_tie_)
            out[k] = res.B.weights
        return out

    def barycenter_sets(self, X):
        """Barycenter-set index array of each row."""
        return [barycenter_set(self.space_, w, self.tol_b_) for w in self._rows(X)]

    def score_samples(self, X):
        """Variance of each row."""
        return np.array([variance(self.space_, w, self.tol_b_)[0] for w in self._rows(X)])


class EpsilonBarycenter(_SpaceTransformer):
    """Row-wise minimizer of ``<c_mu, nu> + epsilon * W2(m, nu)**2``.

    Parameters
    ----------
    space : MetricMeasureSpace or array of shape (n, n)
    epsilon : float
        Weight of the squared W2 distance to the reference measure.
    snap : bool
        Snap barycentric costs within ``tol_b`` of the minimum to it.
    tol_b, tol_tie : float, optional
        As for :class:`RegularizedBarycenter`.
    """

    def __init__(self, space=None, epsilon=1.0, snap=True, tol_b=None, tol_tie=None):
        self.space = space
        self.epsilon = epsilon
        self.snap = snap
        self.tol_b = tol_b
        self.tol_tie = tol_tie

    def transform(self, X):
        rows = self._rows(X)
        out = np.empty_like(rows)
        for k, w in enumerate(rows):
            out[k] = minimize_f_epsilon(
                self.space_, w, self.epsilon, snap=self.snap, tol_b=self.tol_b_, tol_tie=self.tol_tie_
            ).weights
        return out
