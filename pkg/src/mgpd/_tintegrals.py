"""Shared internals for the one-dimensional time integrals of the (R) and (U)
representations: the scaled argument vectors and the normalizing integrals."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln, logsumexp

from .core import GAMMA_ZERO_TOL, MarginParams, zero_shape
from .gaussian import max_exp_moment
from .quadrature import DEFAULT_QUADRATURE, integrate_halfline


def scaled_args(t: float, margins: MarginParams, x) -> np.ndarray:
    """The argument vector t^gamma * (x + sigma/gamma), with the gamma = 0
    convention x + sigma * log(t), evaluated componentwise."""
    x = np.asarray(x, dtype=float)
    sigma, gamma = margins.sigma, margins.gamma
    zero = zero_shape(gamma)
    out = np.empty_like(x)
    logt = math.log(t)
    nz = ~zero
    with np.errstate(over="ignore", invalid="ignore"):
        out[nz] = np.exp(gamma[nz] * logt) * (x[nz] + sigma[nz] / gamma[nz])
    out[zero] = x[zero] + sigma[zero] * logt
    # x_j = +inf with gamma_j < 0 gives inf * t^gamma: keep +inf
    out[np.isposinf(x)] = np.inf
    return out


def r_tail_integrand(family, margins, x):
    """t -> P[R not <= t^gamma (x + sigma/gamma)]."""

    def integrand(t):
        if t <= 0.0:
            return 0.0
        return family.sf_any(scaled_args(t, margins, x))

    return integrand


def r_denominator(family, margins: MarginParams, config=None, prefer="auto"):
    """The normalizing integral of the (R) representation,
    integral over t of P[R not <= t^gamma sigma/gamma] dt.

    With prefer="auto", atomic families are integrated exactly and Gaussian
    families use the closed-form expectation of the exponentiated maximum;
    prefer="quadrature" forces the adaptive route.
    """
    config = config or DEFAULT_QUADRATURE
    zeros = np.zeros(margins.d)
    if prefer == "auto":
        analytic = r_denominator_analytic(family, margins)
        if analytic is not None:
            return analytic
    value, _ = integrate_halfline(r_tail_integrand(family, margins, zeros), config)
    return value


def r_denominator_analytic(family, margins: MarginParams):
    """Closed forms of the (R) normalizer, or None."""
    sigma, gamma = margins.sigma, margins.gamma
    zero = zero_shape(gamma)
    t = family.exceedance_time(np.zeros(margins.d), margins)
    if t is not None:
        return t
    kind = getattr(family, "kind", "")
    if kind == "IndepExponential":
        if not np.any(zero) and np.ptp(gamma) < 1e-12 and gamma[0] > 0:
            # inclusion-exclusion over which components exceed
            g = gamma[0]
            c = family.rates * sigma / g
            return _inclusion_exclusion_power(c, g)
        if np.all(zero):
            lam = family.rates * sigma
            total = 1.0  # the region t < 1 contributes exactly 1
            d = margins.d
            for mask in range(1, 1 << d):
                idx = [j for j in range(d) if mask >> j & 1]
                s = float(np.sum(lam[idx]))
                if s <= 1.0:
                    return None  # integral diverges; Condition 1 violated
                total += (-1.0) ** (len(idx) + 1) / (s - 1.0)
            return total
        return None
    if kind == "LogNormalR":
        if np.any(zero) or np.any(gamma <= 0):
            return None
        mean = (family.mean - np.log(sigma / gamma)) / gamma
        cov = family.cov / np.outer(gamma, gamma)
        return max_exp_moment(mean, cov)
    if kind == "MultivariateNormal":
        if not np.all(zero):
            return None
        mean = family.mean / sigma
        cov = family.cov / np.outer(sigma, sigma)
        return max_exp_moment(mean, cov)
    if kind == "RiverNetwork":
        if np.any(zero) or np.ptp(gamma) > 1e-12 or gamma[0] <= 0:
            return None
        if np.ptp(sigma) > 1e-12:
            return None
        g, s = gamma[0], sigma[0]
        if family.roots.size == 1:
            k = int(family.catchment_size[family.roots[0]])
            return (g / s) ** (1.0 / g) * math.exp(gammaln(k + 1.0 / g) - gammaln(k))
        return None
    return None


def _inclusion_exclusion_power(c, g):
    """sum over non-empty S of (-1)^{|S|+1} Gamma(1 + 1/g) (sum_S c_j)^{-1/g}."""
    d = c.size
    log_terms, signs = [], []
    for mask in range(1, 1 << d):
        idx = [j for j in range(d) if mask >> j & 1]
        s = float(np.sum(c[idx]))
        log_terms.append(-math.log(s) / g)
        signs.append((-1.0) ** (len(idx) + 1))
    total, sign = logsumexp(log_terms, b=signs, return_sign=True)
    return sign * math.exp(total + gammaln(1.0 + 1.0 / g))


def u_denominator(family, config=None, prefer="auto"):
    """The (U) normalizer E[exp(max_j U_j)] = integral of P[U not <= log(t) 1] dt."""
    config = config or DEFAULT_QUADRATURE
    if prefer == "auto":
        analytic = family.max_exp_moment()
        if analytic is not None:
            return analytic
    ones = np.ones(family.d)

    def integrand(t):
        return family.sf_any(math.log(t) * ones)

    value, _ = integrate_halfline(integrand, config)
    return value
