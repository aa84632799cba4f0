"""Rank-based pseudo-observations (empirical copula margins)."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_sample
from .special import as_stream

__all__ = ["RankTransformer", "to_pseudo_obs"]


def to_pseudo_obs(x, tie_seed=0) -> np.ndarray:
    """Map each column of ``x`` to ``rank / (N + 1)``.

    Ties are broken by a random permutation drawn from ``tie_seed`` (a seed or
    :class:`~cegof.special.RngStream`), so every column of the result is a
    permutation of ``{1/(N+1), ..., N/(N+1)}``.

    Parameters
    ----------
    x : array-like of shape (n_samples, n_features)
        Finite observations, ``n_samples >= 2``.
    tie_seed : int or RngStream

    Returns
    -------
    u : ndarray of shape (n_samples, n_features)
    """
    x = check_sample(x, min_rows=2)
    n, d = x.shape
    gen = as_stream(tie_seed).generator()
    # Tie-break keys are drawn for every column regardless of ties, so the
    # output depends on the data only through its within-column ordering.
    keys = gen.random((n, d))
    u = np.empty_like(x)
    ranks = np.arange(1, n + 1, dtype=float) / (n + 1)
    for j in range(d):
        order = np.lexsort((keys[:, j], x[:, j]))
        u[order, j] = ranks
    return u


class RankTransformer(TransformerMixin, BaseEstimator):
    """Stateless transformer wrapping :func:`to_pseudo_obs`.

    Parameters
    ----------
    random_state : int
        Seed for the tie-breaking permutation.
    """

    def __init__(self, random_state=0):
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_sample(X, min_rows=2)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        return to_pseudo_obs(X, self.random_state)
