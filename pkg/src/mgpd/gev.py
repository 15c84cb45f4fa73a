"""Multivariate GEV distributions and their bridge to GP distributions.

A GEV model is specified by marginal parameters (mu, alpha, gamma) plus a
dependence structure: the built-in "independent" and "comonotone" evaluators,
a black-box log-cdf callable, or a role-R generator evaluated through the
point-process integral G(x) = exp(-integral of the joint exceedance tail).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._tintegrals import r_tail_integrand
from .core import GAMMA_ZERO_TOL, GeneratorSpec, MarginParams
from .exceptions import DomainError, ModelError
from .quadrature import DEFAULT_QUADRATURE, integrate_halfline
from .validation import as_float_vector, check_index, check_index_set

# tolerance below which log G(0) is treated as zero and Eq.-(5)-type ratios
# are refused as ill-conditioned
_LOG_G0_TOL = 1e-12


@dataclass(frozen=True)
class GevParams:
    """GEV marginal parameters: location mu, scale alpha > 0, shape gamma."""

    mu: np.ndarray
    alpha: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        mu = as_float_vector(self.mu, "mu")
        alpha = as_float_vector(self.alpha, "alpha", length=mu.shape[0])
        gamma = as_float_vector(self.gamma, "gamma", length=mu.shape[0])
        if np.any(alpha <= 0):
            raise ValueError("all GEV scales alpha must be strictly positive")
        for name, arr in (("mu", mu), ("alpha", alpha), ("gamma", gamma)):
            arr.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "gamma", gamma)

    @property
    def d(self) -> int:
        return self.mu.shape[0]

    def sigma(self) -> np.ndarray:
        return self.alpha - self.gamma * self.mu

    def margins(self) -> MarginParams:
        sigma = self.sigma()
        if np.any(sigma <= 0):
            raise ModelError("derived sigma = alpha - gamma*mu must be positive")
        return MarginParams(sigma, self.gamma)


def margin_log_cdf(params: GevParams, j: int, x: float) -> float:
    """log of the GEV marginal cdf; -inf below and 0 above the support."""
    j = check_index(j, params.d)
    mu, alpha, gamma = params.mu[j], params.alpha[j], params.gamma[j]
    z = (x - mu) / alpha
    if abs(gamma) < GAMMA_ZERO_TOL:
        return -math.exp(-z)
    arg = 1.0 + gamma * z
    if arg <= 0.0:
        return -math.inf if gamma > 0 else 0.0
    return -arg ** (-1.0 / gamma)


def margin_cdf(params: GevParams, j: int, x: float) -> float:
    """GEV marginal cdf (Gumbel limit at gamma = 0, 0/1 outside the support)."""
    return math.exp(margin_log_cdf(params, j, x))


def _surrogate_upper(margins: MarginParams, j: int) -> float:
    # real-scale stand-in for "+infinity" used only with black-box evaluators:
    # the image of 1e15 on the standardized scale, capped inside float range
    s, g = margins.sigma[j], margins.gamma[j]
    if abs(g) < GAMMA_ZERO_TOL:
        return s * 1e15
    if g < 0:
        return -s / g * (1.0 - 1e-15)
    return min(s / g * math.expm1(min(g * 1e15, 690.0)), 1e300)


class GevModel:
    """A d-variate GEV distribution with 0 < G(0) < 1."""

    def __init__(self, params: GevParams | None = None, dependence="independent",
                 margins: MarginParams | None = None, power: float = 1.0,
                 config=None):
        if power <= 0:
            raise ValueError("power must be positive")
        self.params = params
        self.dependence = dependence
        self.power = float(power)
        self.config = config or DEFAULT_QUADRATURE
        if isinstance(dependence, GeneratorSpec):
            if dependence.role != "R":
                raise ModelError("generator dependence must have role R")
            if margins is None:
                if params is None:
                    raise ModelError("generator dependence needs margins or params")
                margins = params.margins()
            if margins.d != dependence.d:
                raise ModelError("margins and generator dimensions differ")
            self._margins = margins
        else:
            if params is None:
                raise ModelError("explicit dependence requires GevParams")
            self._margins = params.margins()
        lg0 = self.log_cdf(np.zeros(self.d))
        if not (lg0 < -_LOG_G0_TOL) or not np.isfinite(lg0):
            raise ModelError(
                f"model must satisfy 0 < G(0) < 1; got log G(0) = {lg0:.3g}"
            )

    @property
    def d(self) -> int:
        return self._margins.d

    @property
    def margins(self) -> MarginParams:
        return self._margins

    def lower_endpoints(self) -> np.ndarray:
        return self._margins.lower_endpoints()

    def associated_power(self, t: float) -> "GevModel":
        """The GEV G^t on the curve associated with the same GP distribution."""
        return GevModel(self.params, self.dependence, self._margins,
                        power=self.power * t, config=self.config)

    # -- cdf evaluation ------------------------------------------------------

    def log_cdf(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return self.power * self._base_log_cdf_subset(tuple(range(self.d)), x)

    def cdf(self, x) -> float:
        return math.exp(self.log_cdf(x))

    def log_cdf_subset(self, J, xJ) -> float:
        J = check_index_set(J, self.d)
        xJ = np.asarray(xJ, dtype=float)
        if xJ.shape[0] != len(J):
            raise ValueError("xJ must match the index set length")
        return self.power * self._base_log_cdf_subset(J, xJ)

    def _base_log_cdf_subset(self, J, xJ) -> float:
        dep = self.dependence
        if dep == "independent":
            return sum(margin_log_cdf(self.params, j, xj) for j, xj in zip(J, xJ))
        if dep == "comonotone":
            return min(margin_log_cdf(self.params, j, xj) for j, xj in zip(J, xJ))
        full = np.full(self.d, np.inf)
        full[list(J)] = xJ
        if isinstance(dep, GeneratorSpec):
            # +inf coordinates drop out of the joint exceedance tail exactly
            analytic = dep.family.exceedance_time(full, self._margins)
            if analytic is not None:
                return -analytic
            value, _ = integrate_halfline(
                r_tail_integrand(dep.family, self._margins, full), self.config
            )
            return -value
        if callable(dep):
            for j in range(self.d):
                if np.isposinf(full[j]):
                    full[j] = _surrogate_upper(self._margins, j)
            return float(dep(full))
        raise ModelError(f"unknown dependence specification {dep!r}")


def exceedance_measure(model: GevModel, x) -> float:
    """Intensity-measure mass of the set not componentwise below x: -log G(x)."""
    x = np.asarray(x, dtype=float)
    eta = model.lower_endpoints()
    if np.any(x < eta):
        raise DomainError("x must be componentwise at or above the lower endpoints")
    return -model.log_cdf(x)


def gp_cdf_from_gev(model: GevModel, x) -> float:
    """The GP cdf associated with a GEV: log(G(x^0)/G(x)) / log G(0),
    where x^0 is the componentwise minimum of x and 0."""
    x = np.asarray(x, dtype=float)
    eta = model.lower_endpoints()
    if np.any(x < eta):
        return 0.0
    lg0 = model.log_cdf(np.zeros(model.d))
    if not (lg0 < -_LOG_G0_TOL):
        raise ModelError("gp_cdf_from_gev requires 0 < G(0) < 1")
    lgx = model.log_cdf(x)
    lgx0 = model.log_cdf(np.minimum(x, 0.0))
    return min(max((lgx0 - lgx) / lg0, 0.0), 1.0)


def conditional_margin_cdf(margins: MarginParams, j: int, x: float) -> float:
    """cdf of component j conditioned to be a positive exceedance:
    1 - (1 + gamma x / sigma)^(-1/gamma) for x >= 0."""
    j = check_index(j, margins.d)
    if x < 0:
        raise DomainError("the conditional margin is supported on x >= 0")
    s, g = margins.sigma[j], margins.gamma[j]
    if abs(g) < GAMMA_ZERO_TOL:
        return -math.expm1(-x / s)
    arg = 1.0 + g * x / s
    if arg <= 0.0:
        if g < 0:
            return 1.0
        raise DomainError("x violates sigma + gamma x > 0")
    return -math.expm1(-math.log(arg) / g)


def conditional_subset_cdf(model: GevModel, J, xJ) -> float:
    """cdf of the subvector J conditioned on at least one positive component in J."""
    J = check_index_set(J, model.d)
    xJ = np.asarray(xJ, dtype=float)
    eta = model.lower_endpoints()[list(J)]
    if np.any(xJ < eta):
        return 0.0
    lg0 = model.log_cdf_subset(J, np.zeros(len(J)))
    if not (lg0 < -_LOG_G0_TOL):
        raise ModelError("conditional subset cdf requires G_J(0) < 1")
    lgx = model.log_cdf_subset(J, xJ)
    lgx0 = model.log_cdf_subset(J, np.minimum(xJ, 0.0))
    return min(max((lgx0 - lgx) / lg0, 0.0), 1.0)


def max_stability_coefficients(margins: MarginParams, t: float):
    """Scale and location vectors (a_t, b_t) with G(a_t x + b_t)^t = G(x):
    a_t = t^gamma and b_t = sigma (t^gamma - 1) / gamma."""
    if t <= 0:
        raise DomainError("t must be positive")
    sigma, gamma = margins.sigma, margins.gamma
    zero = np.abs(gamma) < GAMMA_ZERO_TOL
    a = np.where(zero, 1.0, t ** gamma)
    with np.errstate(invalid="ignore"):
        b = np.where(zero, sigma * math.log(t), sigma * np.expm1(gamma * math.log(t)) / np.where(zero, 1.0, gamma))
    return a, b


def gev_cdf_from_generator(generator: GeneratorSpec, margins: MarginParams, x,
                           config=None) -> float:
    """G(x) = exp(-integral over t of P[R not <= t^gamma (x + sigma/gamma)] dt)."""
    if generator.role != "R":
        raise ModelError("generator must have role R")
    x = np.asarray(x, dtype=float)
    eta = margins.lower_endpoints()
    if np.any(x < eta):
        return 0.0
    analytic = generator.family.exceedance_time(x, margins)
    if analytic is not None:
        return math.exp(-analytic)
    value, _ = integrate_halfline(
        r_tail_integrand(generator.family, margins, x), config or DEFAULT_QUADRATURE
    )
    return math.exp(-value)
