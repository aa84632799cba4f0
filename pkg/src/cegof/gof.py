"""Copula-entropy goodness-of-fit statistic, family comparison and bootstrap."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator

from ._validation import check_sample
from .copulas import FAMILIES, FitResult, hypothesis_ce, make_copula
from .entropy import EntropyConfig, true_ce
from .exceptions import BootstrapError, CegofError, ConfigError
from .ranks import to_pseudo_obs
from .special import RngStream

__all__ = [
    "CopulaEntropyTest",
    "FamilyFailure",
    "TestReport",
    "bootstrap_p_value",
    "compare_families",
    "test_statistic",
]

REPORT_FIELDS = (
    "family", "t_stat", "hypothesis_ce", "true_ce", "fitted_params",
    "p_value", "bootstrap_reps", "entropy_config", "seed",
)

# Stream ids under the report seed.
_TIE_STREAM = 0
_BOOT_STREAM = 1


@dataclass(frozen=True)
class TestReport:
    """Outcome of one copula hypothesis test.

    ``t_stat`` is stored, not derived, but always equals
    ``hypothesis_ce - true_ce``.
    """

    __test__ = False  # not a pytest class

    family: str
    t_stat: float
    hypothesis_ce: float
    true_ce: float
    fitted_params: FitResult
    p_value: float | None
    bootstrap_reps: int
    entropy_config: EntropyConfig
    seed: int

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "t_stat": self.t_stat,
            "hypothesis_ce": self.hypothesis_ce,
            "true_ce": self.true_ce,
            "fitted_params": self.fitted_params.to_dict(),
            "p_value": self.p_value,
            "bootstrap_reps": self.bootstrap_reps,
            "entropy_config": self.entropy_config.to_dict(),
            "seed": self.seed,
        }

    def reject(self, level: float = 0.05) -> bool | None:
        if self.p_value is None:
            return None
        return self.p_value <= level


@dataclass(frozen=True)
class FamilyFailure:
    """A family that could not be fitted or evaluated in :func:`compare_families`."""

    family: str
    error: str


def _check_family(family: str, d: int) -> None:
    if family not in FAMILIES:
        raise ConfigError(f"unknown family {family!r}; expected one of {sorted(FAMILIES)}")
    if d < 2:
        raise ConfigError("copula tests need at least two columns")
    if family == "gumbel" and d != 2:
        raise ConfigError(f"the Gumbel hypothesis needs exactly 2 columns, got {d}")


def _report(u, family, cfg, seed, true_value) -> TestReport:
    model = make_copula(family).fit(u)
    h_hyp = hypothesis_ce(u, model)
    return TestReport(
        family=family,
        t_stat=h_hyp - true_value,
        hypothesis_ce=h_hyp,
        true_ce=true_value,
        fitted_params=model.fit_result_,
        p_value=None,
        bootstrap_reps=0,
        entropy_config=cfg,
        seed=seed,
    )


def _statistic(x, family, cfg, ties) -> TestReport:
    u = to_pseudo_obs(x, ties)
    return _report(u, family, cfg, ties.seed, true_ce(u, cfg))


def test_statistic(x, family: str, cfg: EntropyConfig | None = None, seed: int = 42) -> TestReport:
    """Estimate ``T = H(hypothesis) - H(true)`` for one copula family.

    Ranks ``x``, fits ``family`` to the pseudo-observations, and subtracts the
    nonparametric copula entropy from the fitted model's copula entropy. No
    p-value is attached.
    """
    cfg = cfg or EntropyConfig()
    x = check_sample(x, min_rows=2)
    _check_family(family, x.shape[1])
    return _statistic(x, family, cfg, RngStream(seed, _TIE_STREAM))


def _replicate(params, family, n, cfg, stream: RngStream, max_attempts: int):
    sampler = make_copula(family)
    sampler.params_ = params
    sampler.fit_result_ = None
    for attempt in range(max_attempts):
        rs = stream.child(attempt)
        try:
            x = sampler.sample(n, rs.child(0))
            return _statistic(x, family, cfg, rs.child(1)).t_stat, attempt + 1
        except CegofError:
            continue
    return math.nan, max_attempts


def _replicate_chunk(indices, params, family, n, cfg, root, max_attempts):
    return [_replicate(params, family, n, cfg, root.child(j), max_attempts) for j in indices]


def bootstrap_p_value(x, family: str, cfg: EntropyConfig | None = None, b: int = 200,
                      seed: int = 42, n_jobs: int = 1) -> TestReport:
    """Parametric-bootstrap p-value for the copula-entropy statistic.

    ``b`` samples of the original size are drawn from the fitted copula and
    re-tested; ``p = (1 + #{T* >= T}) / (b + 1)``. Replicates that fail to
    fit are redrawn, up to ``3 * b`` draws in total. Each replicate has its
    own stream, so the result does not depend on ``n_jobs``.
    """
    cfg = cfg or EntropyConfig()
    x = check_sample(x, min_rows=2)
    _check_family(family, x.shape[1])
    observed = _statistic(x, family, cfg, RngStream(seed, _TIE_STREAM))
    if b <= 0:
        return observed
    n = x.shape[0]
    root = RngStream(seed, _BOOT_STREAM)
    max_attempts = 2 * b + 1
    params = observed.fitted_params.params
    n_jobs = max(1, min(int(n_jobs), b))
    chunks = [list(range(i, b, n_jobs)) for i in range(n_jobs)]
    if n_jobs == 1:
        results = _replicate_chunk(chunks[0], params, family, n, cfg, root, max_attempts)
    else:
        parts = Parallel(n_jobs=n_jobs)(
            delayed(_replicate_chunk)(c, params, family, n, cfg, root, max_attempts)
            for c in chunks
        )
        results = [r for part in parts for r in part]
    draws = sum(a for _, a in results)
    t_star = np.array([t for t, _ in results])
    if draws > 3 * b or np.isnan(t_star).any():
        raise BootstrapError(f"bootstrap needed {draws} draws for {b} replicates (cap {3 * b})")
    exceed = int(np.sum(t_star >= observed.t_stat))
    return TestReport(
        family=family,
        t_stat=observed.t_stat,
        hypothesis_ce=observed.hypothesis_ce,
        true_ce=observed.true_ce,
        fitted_params=observed.fitted_params,
        p_value=(1 + exceed) / (b + 1),
        bootstrap_reps=b,
        entropy_config=cfg,
        seed=seed,
    )


def compare_families(x, families=("gaussian", "gumbel"), cfg: EntropyConfig | None = None,
                     seed: int = 42) -> list:
    """Test several families on shared pseudo-observations.

    The nonparametric copula entropy is computed once and reused, so the
    ranking depends only on the hypothesis term. Returns reports sorted by
    ``t_stat`` (ties by name) followed by any :class:`FamilyFailure`.
    """
    cfg = cfg or EntropyConfig()
    families = list(families)
    if len(families) < 2:
        raise ConfigError("compare_families needs at least two families")
    x = check_sample(x, min_rows=2)
    for fam in families:
        if fam not in FAMILIES:
            raise ConfigError(f"unknown family {fam!r}")
    u = to_pseudo_obs(x, RngStream(seed, _TIE_STREAM))
    shared = true_ce(u, cfg)
    reports, failures = [], []
    for fam in families:
        try:
            _check_family(fam, x.shape[1])
            reports.append(_report(u, fam, cfg, seed, shared))
        except CegofError as exc:
            failures.append(FamilyFailure(fam, f"{type(exc).__name__}: {exc}"))
    reports.sort(key=lambda r: (r.t_stat, r.family))
    return reports + failures


class CopulaEntropyTest(BaseEstimator):
    """Copula goodness-of-fit test based on copula entropy.

    Parameters
    ----------
    family : {"gaussian", "gumbel"}
        Hypothesised copula family.
    k : int
        Neighbour count of the entropy estimator.
    n_bootstrap : int
        Bootstrap replicates; 0 skips the p-value.
    random_state : int
        Seed for tie-breaking and bootstrap draws.
    n_jobs : int
        Parallel workers for the bootstrap.

    Attributes
    ----------
    report_ : TestReport
    statistic_ : float
    p_value_ : float or None
    """

    def __init__(self, family="gaussian", k=3, n_bootstrap=200, random_state=42, n_jobs=1):
        self.family = family
        self.k = k
        self.n_bootstrap = n_bootstrap
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        X = check_sample(X, min_rows=2)
        self.report_ = bootstrap_p_value(
            X, self.family, EntropyConfig(self.k), b=self.n_bootstrap,
            seed=self.random_state, n_jobs=self.n_jobs,
        )
        self.n_features_in_ = X.shape[1]
        self.statistic_ = self.report_.t_stat
        self.p_value_ = self.report_.p_value
        return self

    def reject(self, level=0.05):
        return self.report_.reject(level)


test_statistic.__test__ = False  # not a pytest test function
