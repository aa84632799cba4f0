"""Gaussian and Gumbel copula families: densities, fitting, sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_sample, check_unit_interior
from .exceptions import ConfigError, DomainError, EstimationError, InputError, ParameterError
from .special import as_stream, inv_norm_cdf, norm_cdf, sample_positive_stable

__all__ = [
    "FitResult",
    "GaussianCopula",
    "GaussianCopulaParams",
    "GumbelCopula",
    "GumbelCopulaParams",
    "apply_margins",
    "fit_gaussian",
    "fit_gumbel",
    "gaussian_log_density",
    "gumbel_log_density",
    "hypothesis_ce",
    "kendall_tau",
    "make_copula",
    "sample_gaussian_copula",
    "sample_gumbel_copula",
]

EIGEN_FLOOR = 1e-8
GUMBEL_BOUNDS = (1.0 + 1e-6, 50.0)
GUMBEL_XTOL = 1e-6
MARGINS = ("uniform", "standard-normal", "exponential")


@dataclass(frozen=True, eq=False)
class GaussianCopulaParams:
    sigma_rho: np.ndarray

    def __post_init__(self):
        s = np.array(self.sigma_rho, dtype=float)
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise ParameterError(f"correlation matrix must be square, got {s.shape}")
        if not np.all(np.isfinite(s)):
            raise ParameterError("correlation matrix has non-finite entries")
        if not np.array_equal(s, s.T):
            raise ParameterError("correlation matrix must be symmetric")
        if not np.all(np.diag(s) == 1.0):
            raise ParameterError("correlation matrix must have unit diagonal")
        if np.linalg.eigvalsh(s).min() <= 1e-10:
            raise ParameterError("correlation matrix must be positive definite")
        s.setflags(write=False)
        object.__setattr__(self, "sigma_rho", s)

    def __eq__(self, other):
        if not isinstance(other, GaussianCopulaParams):
            return NotImplemented
        return np.array_equal(self.sigma_rho, other.sigma_rho)

    def __hash__(self):
        return hash(self.sigma_rho.tobytes())

    @classmethod
    def bivariate(cls, rho: float) -> GaussianCopulaParams:
        return cls(np.array([[1.0, rho], [rho, 1.0]]))

    @property
    def dim(self) -> int:
        return self.sigma_rho.shape[0]

    def summary(self) -> float:
        """Scalar summary: the (0, 1) correlation."""
        return float(self.sigma_rho[0, 1])

    def to_dict(self) -> dict:
        return {"sigma_rho": self.sigma_rho.tolist()}


@dataclass(frozen=True)
class GumbelCopulaParams:
    alpha: float

    def __post_init__(self):
        a = float(self.alpha)
        if not math.isfinite(a) or a < 1.0:
            raise ParameterError(f"Gumbel alpha must be >= 1, got {self.alpha!r}")
        object.__setattr__(self, "alpha", a)

    dim = 2

    def summary(self) -> float:
        return self.alpha

    def to_dict(self) -> dict:
        return {"alpha": self.alpha}


@dataclass(frozen=True)
class FitResult:
    """Fitted parameters plus diagnostics.

    ``boundary`` marks a Gumbel optimum at the upper search bound, or a
    Gaussian correlation matrix that had to be regularised.
    """

    params: GaussianCopulaParams | GumbelCopulaParams
    log_likelihood: float
    iterations: int
    boundary: bool = False

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "log_likelihood": self.log_likelihood,
            "iterations": self.iterations,
            "boundary": self.boundary,
        }


# ---------------------------------------------------------------- Gaussian


def _gaussian_terms(sigma: np.ndarray) -> tuple[float, np.ndarray]:
    sign, logdet = np.linalg.slogdet(sigma)
    if sign <= 0:
        raise ParameterError("correlation matrix must be positive definite")
    return logdet, np.linalg.inv(sigma) - np.eye(sigma.shape[0])


def gaussian_log_density(u, p: GaussianCopulaParams):
    """Log density of the Gaussian copula.

    ``log c(u) = -0.5 log|S| - 0.5 z' (S^-1 - I) z`` with ``z`` the normal
    scores of ``u``. Accepts one point of shape (d,) or rows of shape (n, d).
    """
    single = np.ndim(u) == 1
    u = check_unit_interior(u)
    if u.shape[1] != p.dim:
        raise DomainError(f"point dimension {u.shape[1]} != copula dimension {p.dim}")
    if np.all(p.sigma_rho == np.eye(p.dim)):
        out = np.zeros(u.shape[0])
        return float(out[0]) if single else out
    z = inv_norm_cdf(u)
    if p.dim == 2:
        # Closed form keeps the density exactly symmetric in its arguments.
        rho = p.sigma_rho[0, 1]
        one_m = 1.0 - rho * rho
        ss = z[:, 0] * z[:, 0] + z[:, 1] * z[:, 1]
        cross = z[:, 0] * z[:, 1]
        quad = (ss - 2.0 * rho * cross) / one_m - ss
        out = -0.5 * math.log(one_m) - 0.5 * quad
    else:
        logdet, a = _gaussian_terms(p.sigma_rho)
        out = -0.5 * logdet - 0.5 * np.einsum("ij,jk,ik->i", z, a, z)
    return float(out[0]) if single else out


def fit_gaussian(u) -> FitResult:
    """Correlation matrix of the normal scores of ``u``.

    A near-singular estimate gets its eigenvalues floored at ``EIGEN_FLOOR``
    and is rescaled to unit diagonal; the result is then flagged.
    """
    u = check_unit_interior(check_sample(u, min_rows=2))
    n, d = u.shape
    if n <= d:
        raise InputError(f"need more rows than columns to fit, got {n}x{d}")
    z = inv_norm_cdf(u)
    z = z - z.mean(axis=0)
    sd = np.sqrt((z * z).sum(axis=0))
    if np.any(sd == 0.0):
        raise ParameterError("normal scores have zero variance")
    z = z / sd
    sigma = z.T @ z
    sigma = 0.5 * (sigma + sigma.T)
    np.fill_diagonal(sigma, 1.0)
    boundary = False
    w, v = np.linalg.eigh(sigma)
    if w.min() < EIGEN_FLOOR * 10:
        boundary = True
        sigma = (v * np.maximum(w, EIGEN_FLOOR)) @ v.T
        scale = 1.0 / np.sqrt(np.diag(sigma))
        sigma = sigma * np.outer(scale, scale)
        sigma = 0.5 * (sigma + sigma.T)
        np.fill_diagonal(sigma, 1.0)
    params = GaussianCopulaParams(sigma)
    ll = float(np.sum(gaussian_log_density(u, params)))
    return FitResult(params, ll, iterations=1, boundary=boundary)


def sample_gaussian_copula(p: GaussianCopulaParams, n: int, rng) -> np.ndarray:
    """Draw ``n`` points: ``Phi(L g)`` with ``L`` the Cholesky factor of the correlation."""
    if n < 1:
        raise InputError(f"n must be >= 1, got {n}")
    try:
        chol = np.linalg.cholesky(p.sigma_rho)
    except np.linalg.LinAlgError as exc:
        raise ParameterError("correlation matrix is not positive definite") from exc
    gen = as_stream(rng).generator()
    z = gen.standard_normal((n, p.dim)) @ chol.T
    return _clip_open(norm_cdf(z))


# ---------------------------------------------------------------- Gumbel


def gumbel_log_density(u, p: GumbelCopulaParams):
    """Log density of the bivariate Gumbel copula, evaluated in log space.

    With ``x_i = -ln u_i`` and ``t = x_1**a + x_2**a``::

        log c = -t**(1/a) + (a-1)(ln x_1 + ln x_2) - ln u_1 - ln u_2
                + (1/a - 2) ln t + ln(t**(1/a) + a - 1)
    """
    single = np.ndim(u) == 1
    u = check_unit_interior(u)
    if u.shape[1] != 2:
        raise DomainError("the Gumbel copula is bivariate")
    a = p.alpha
    if a == 1.0:
        out = np.zeros(u.shape[0])
        return float(out[0]) if single else out
    lu = np.log(u)
    lx = np.log(-lu)
    log_t = np.logaddexp(a * lx[:, 0], a * lx[:, 1])
    log_t_root = log_t / a
    out = (
        -np.exp(log_t_root)
        + (a - 1.0) * (lx[:, 0] + lx[:, 1])
        - lu[:, 0]
        - lu[:, 1]
        + (1.0 / a - 2.0) * log_t
        + np.logaddexp(log_t_root, math.log(a - 1.0))
    )
    return float(out[0]) if single else out


def gumbel_cdf(u, p: GumbelCopulaParams):
    """``C(u) = exp(-t**(1/a))``."""
    u = np.asarray(u, dtype=float)
    x = -np.log(u)
    return np.exp(-np.sum(x ** p.alpha, axis=-1) ** (1.0 / p.alpha))


def kendall_tau(u) -> float:
    """Exact sample Kendall tau: (concordant - discordant) / (N choose 2)."""
    u = check_sample(u, min_rows=2, min_cols=2)
    if u.shape[1] != 2:
        raise InputError("kendall_tau needs exactly two columns")
    x, y = u[:, 0], u[:, 1]
    n = x.size
    total = 0
    step = max(1, 4_000_000 // n)
    for start in range(0, n, step):
        stop = min(n, start + step)
        sx = np.sign(x[start:stop, None] - x[None, :])
        sy = np.sign(y[start:stop, None] - y[None, :])
        total += int(np.sum(sx * sy))
    # Every unordered pair was counted twice.
    return float(total / (n * (n - 1)))


def fit_gumbel(u) -> FitResult:
    """Maximum-likelihood Gumbel parameter on ``[1 + 1e-6, 50]``.

    Bounded Brent search to ``GUMBEL_XTOL``; the Kendall-tau inversion
    ``1 / (1 - tau)`` serves as the starting guess, and is returned instead
    when it scores at least as well as the search result.
    """
    u = check_unit_interior(check_sample(u, min_rows=10, min_cols=2))
    if u.shape[1] != 2:
        raise ConfigError("the Gumbel copula is bivariate")
    lo, hi = GUMBEL_BOUNDS
    tau = kendall_tau(u)
    alpha0 = min(max(1.0 / (1.0 - tau) if tau < 1.0 else hi, lo), hi)

    def negll(a):
        return -float(np.sum(gumbel_log_density(u, GumbelCopulaParams(a))))

    res = minimize_scalar(negll, bounds=(lo, hi), method="bounded",
                          options={"xatol": GUMBEL_XTOL, "maxiter": 500})
    if not np.isfinite(res.fun):
        raise EstimationError("Gumbel log-likelihood is not finite")
    alpha, best = float(res.x), float(res.fun)
    start = negll(alpha0)
    if start <= best:
        alpha, best = alpha0, start
    boundary = alpha >= hi - 10 * GUMBEL_XTOL
    return FitResult(GumbelCopulaParams(alpha), -best, int(res.nfev), boundary)


def sample_gumbel_copula(p: GumbelCopulaParams, n: int, rng) -> np.ndarray:
    """Marshall-Olkin sampler: ``u_i = exp(-(E_i / S)**(1/a))`` with ``S`` positive stable."""
    if n < 1:
        raise InputError(f"n must be >= 1, got {n}")
    gen = as_stream(rng).generator()
    a = p.alpha
    s = sample_positive_stable(1.0 / a, gen, size=n)
    e = gen.standard_exponential((n, 2))
    return _clip_open(np.exp(-((e / s[:, None]) ** (1.0 / a))))


# ---------------------------------------------------------------- shared


def _clip_open(u: np.ndarray) -> np.ndarray:
    # Keeps draws inside (0, 1) after floating-point rounding.
    return np.clip(u, np.finfo(float).tiny, 1.0 - 2.0 ** -53)


def apply_margins(u, margins: str) -> np.ndarray:
    """Apply an inverse marginal CDF to every column of ``u``."""
    u = check_unit_interior(u)
    if margins == "uniform":
        return u.copy()
    if margins == "standard-normal":
        return inv_norm_cdf(u)
    if margins in ("exponential", "exponential(1)"):
        return -np.log1p(-u)
    raise ConfigError(f"unknown margin {margins!r}; expected one of {MARGINS}")


def hypothesis_ce(u, model) -> float:
    """Copula entropy under a fitted model: ``-mean(log c(u_i))``.

    ``model`` is a fitted :class:`GaussianCopula` / :class:`GumbelCopula`, a
    :class:`FitResult`, or a bare parameter object.
    """
    if isinstance(model, (GaussianCopula, GumbelCopula)):
        check_is_fitted(model)
        params = model.params_
    elif isinstance(model, FitResult):
        params = model.params
    else:
        params = model
    logc = log_density(u, params)
    bad = np.flatnonzero(~np.isfinite(logc))
    if bad.size:
        raise EstimationError(f"non-finite log-density at row {bad[0]}")
    return -float(np.mean(logc))


def log_density(u, params):
    if isinstance(params, GaussianCopulaParams):
        return gaussian_log_density(u, params)
    if isinstance(params, GumbelCopulaParams):
        return gumbel_log_density(u, params)
    raise ConfigError(f"unsupported parameter object {params!r}")


# ---------------------------------------------------------------- estimators


class _CopulaBase(BaseEstimator):
    def score_samples(self, U):
        """Log density at each row of ``U``."""
        check_is_fitted(self)
        return log_density(np.asarray(U, dtype=float), self.params_)

    def score(self, U, y=None):
        """Mean log density, i.e. the negated copula entropy under the model."""
        return float(np.mean(self.score_samples(U)))

    def _store(self, result: FitResult):
        self.fit_result_ = result
        self.params_ = result.params
        self.log_likelihood_ = result.log_likelihood
        self.n_iter_ = result.iterations
        self.n_features_in_ = result.params.dim
        return self


class GaussianCopula(_CopulaBase):
    """Gaussian copula fitted by the correlation of normal scores.

    Fit on pseudo-observations; see :func:`cegof.ranks.to_pseudo_obs`.
    """

    family = "gaussian"

    def fit(self, U, y=None):
        return self._store(fit_gaussian(U))

    def sample(self, n_samples=1, random_state=0):
        check_is_fitted(self)
        return sample_gaussian_copula(self.params_, n_samples, random_state)


class GumbelCopula(_CopulaBase):
    """Bivariate Gumbel copula fitted by maximum likelihood."""

    family = "gumbel"

    def fit(self, U, y=None):
        return self._store(fit_gumbel(U))

    def sample(self, n_samples=1, random_state=0):
        check_is_fitted(self)
        return sample_gumbel_copula(self.params_, n_samples, random_state)


FAMILIES = {"gaussian": GaussianCopula, "gumbel": GumbelCopula}


def make_copula(family: str) -> _CopulaBase:
    try:
        return FAMILIES[family]()
    except KeyError:
        raise ConfigError(f"unknown family {family!r}; expected one of {sorted(FAMILIES)}") from None
