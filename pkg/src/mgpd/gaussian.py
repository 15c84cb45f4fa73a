"""Gaussian box probabilities and tilted Gaussian integrals.

Box probabilities are deterministic for dimension <= 3 (exact bivariate rule,
trivariate by conditioning plus adaptive quadrature) and use a seeded
randomized lattice beyond that, so results are reproducible at a documented
tolerance in every dimension.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad
from scipy.special import ndtr, ndtri
from scipy.stats import multivariate_normal

_LOG_2PI = math.log(2.0 * math.pi)


def norm_cdf(x):
    return ndtr(x)


def norm_logpdf(x):
    x = np.asarray(x, dtype=float)
    return -0.5 * (x * x + _LOG_2PI)


def _standardize_upper(upper, mean, cov):
    upper = np.asarray(upper, dtype=float)
    mean = np.asarray(mean, dtype=float)
    sd = np.sqrt(np.diag(cov))
    z = (upper - mean) / sd
    corr = cov / np.outer(sd, sd)
    return z, corr


def _trivariate_cdf(z, corr):
    """P[Z <= z] for standardized trivariate normal, by conditioning on Z_0."""
    if np.all(np.isinf(z) & (z > 0)):
        return 1.0
    # condition on the coordinate with the smallest upper limit for stability
    order = np.argsort(z)
    z = z[order]
    corr = corr[np.ix_(order, order)]
    r01, r02, r12 = corr[0, 1], corr[0, 2], corr[1, 2]
    c11 = 1.0 - r01 * r01
    c22 = 1.0 - r02 * r02
    c12 = r12 - r01 * r02
    cond_cov = np.array([[c11, c12], [c12, c22]])
    # guard against numerically singular conditionals
    jit = 1e-12 * max(1.0, c11, c22)
    cond_cov[0, 0] += jit
    cond_cov[1, 1] += jit

    def integrand(t):
        upper2 = np.array([z[1] - r01 * t, z[2] - r02 * t])
        inner = multivariate_normal.cdf(upper2, mean=np.zeros(2), cov=cond_cov)
        return math.exp(-0.5 * (t * t + _LOG_2PI)) * float(inner)

    lo = min(z[0], 8.5)
    val, _ = quad(integrand, -8.5, lo, epsabs=1e-12, epsrel=1e-10, limit=200)
    return float(val)


def _qmc_cdf(z, corr, n=2**14, seed=0):
    """Seeded randomized-shift lattice estimate of P[Z <= z] for d >= 4."""
    d = len(z)
    chol = np.linalg.cholesky(corr + 1e-12 * np.eye(d))
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    shifts = rng.random((8, d))
    primes = np.array([2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53])
    gen = np.sqrt(primes[:d])
    k = np.arange(1, n + 1)[:, None]
    estimates = []
    for shift in shifts:
        u = np.mod(k * gen[None, :] + shift[None, :], 1.0)
        u = np.clip(u, 1e-12, 1 - 1e-12)
        # sequential conditioning: Z = chol @ eps with eps from truncated normals
        prob = np.ones(n)
        y = np.zeros((n, d))
        for i in range(d):
            mu = y[:, :i] @ chol[i, :i] if i else 0.0
            hi = (z[i] - mu) / chol[i, i]
            p = ndtr(hi)
            prob *= p
            if i < d - 1:
                y[:, i] = ndtri(np.clip(u[:, i] * p, 1e-300, 1 - 1e-16))
        estimates.append(prob.mean())
    return float(np.mean(estimates))


def mvn_cdf(upper, mean, cov) -> float:
    """P[N(mean, cov) <= upper], componentwise; entries of upper may be +-inf."""
    upper = np.asarray(upper, dtype=float)
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    if np.any(np.isneginf(upper)):
        return 0.0
    active = ~np.isposinf(upper)
    if not np.any(active):
        return 1.0
    idx = np.flatnonzero(active)
    upper = upper[idx]
    mean = mean[idx]
    cov = cov[np.ix_(idx, idx)]
    d = len(idx)
    if d == 1:
        return float(ndtr((upper[0] - mean[0]) / math.sqrt(cov[0, 0])))
    z, corr = _standardize_upper(upper, mean, cov)
    if d == 2:
        return float(multivariate_normal.cdf(z, mean=np.zeros(2), cov=corr))
    if d == 3:
        return _trivariate_cdf(z, corr)
    return _qmc_cdf(z, corr)


def mvn_box(lower, upper, mean, cov) -> float:
    """P[lower < N(mean, cov) <= upper] by inclusion-exclusion over corners."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    d = len(upper)
    if np.any(lower >= upper):
        return 0.0
    total = 0.0
    for mask in range(1 << d):
        corner = upper.copy()
        sign = 1.0
        for j in range(d):
            if mask >> j & 1:
                corner[j] = lower[j]
                sign = -sign
        if np.any(np.isneginf(corner)):
            continue
        total += sign * mvn_cdf(corner, mean, cov)
    return min(max(total, 0.0), 1.0)


def max_exp_moment(mean, cov) -> float:
    """E[exp(max_j U_j)] for U ~ N(mean, cov), finite in closed form.

    Sum over j of the exponentially tilted probability that coordinate j is
    the maximum; each term needs one (d-1)-dimensional normal cdf.
    """
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    d = len(mean)
    if d == 1:
        return math.exp(mean[0] + 0.5 * cov[0, 0])
    total = 0.0
    for k in range(d):
        others = [j for j in range(d) if j != k]
        # under the tilt by e^{U_k}, U ~ N(mean + cov[:, k], cov)
        tilted = mean + cov[:, k]
        mu_diff = tilted[others] - tilted[k]
        cv = (
            cov[np.ix_(others, others)]
            - cov[np.ix_(others, [k])]
            - cov[np.ix_([k], others)]
            + cov[k, k]
        )
        term = math.exp(mean[k] + 0.5 * cov[k, k]) * mvn_cdf(np.zeros(d - 1), mu_diff, cv)
        total += term
    return total


def smax_cdf_normal(s, mean, cov) -> float:
    """F_{U - max U}(s) for U ~ N(mean, cov): P[U_j - max_k U_k <= s_j for all j]."""
    s = np.asarray(s, dtype=float)
    d = len(mean)
    if d == 1:
        return 1.0 if s[0] >= 0 else 0.0
    total = 0.0
    s0 = np.minimum(s, 0.0)
    for k in range(d):
        if s[k] < 0:
            continue
        others = [j for j in range(d) if j != k]
        mu_diff = np.asarray(mean)[others] - mean[k]
        cv = (
            cov[np.ix_(others, others)]
            - cov[np.ix_(others, [k])]
            - cov[np.ix_([k], others)]
            + cov[k, k]
        )
        total += mvn_cdf(s0[others], mu_diff, cv)
    return min(max(total, 0.0), 1.0)


class TiltedGaussianIntegral:
    """The 1-d Gaussian line integrals behind densities with Gaussian structure.

    Computes, in closed form up to one |C|-dimensional normal cdf,

        I = integral over s of  exp(tilt*s) * phi_O(c_O + s*beta_O)
                                * P[N_C <= b_C + s*beta_C | N_O = c_O + s*beta_O] ds

    for N ~ N(mean, cov) split into observed coordinates O and censored
    coordinates C.  This covers the uncensored case with C empty.
    """

    def __init__(self, mean, cov, obs_idx, cens_idx, beta, tilt=1.0):
        mean = np.asarray(mean, dtype=float)
        cov = np.asarray(cov, dtype=float)
        beta = np.asarray(beta, dtype=float)
        O = list(obs_idx)
        C = list(cens_idx)
        if not O:
            raise ValueError("at least one observed coordinate is required")
        self.m_O = mean[O]
        self.m_C = mean[C]
        self.cov_OO = cov[np.ix_(O, O)]
        self.A_O = np.linalg.inv(self.cov_OO)
        sign, logdet = np.linalg.slogdet(self.A_O)
        if sign <= 0:
            raise ValueError("observed covariance block is not positive definite")
        self._log_norm = 0.5 * logdet - 0.5 * len(O) * _LOG_2PI
        self.beta_O = beta[O]
        self.beta_C = beta[C]
        self.q = float(self.beta_O @ self.A_O @ self.beta_O)
        if self.q <= 0:
            raise ValueError("slope vector must be nonzero on observed coordinates")
        self.tilt = float(tilt)
        self.k_cens = len(C)
        if C:
            cov_CO = cov[np.ix_(C, O)]
            self.B = cov_CO @ self.A_O
            cond = cov[np.ix_(C, C)] - self.B @ cov_CO.T
            self.h = self.beta_C - self.B @ self.beta_O
            self.cov_phi = cond + np.outer(self.h, self.h) / self.q

    def log_value(self, c_O, b_C=None):
        """log I for one observation; c_O observed values, b_C censored bounds."""
        y = np.asarray(c_O, dtype=float) - self.m_O
        Ay = self.A_O @ y
        p = float(self.beta_O @ Ay)
        s0 = (self.tilt - p) / self.q
        log_val = (
            self._log_norm
            - 0.5 * float(y @ Ay)
            + 0.5 * self.q * s0 * s0
            + 0.5 * (_LOG_2PI - math.log(self.q))
        )
        if self.k_cens:
            a = self.m_C + self.B @ y
            arg = np.asarray(b_C, dtype=float) - a + s0 * self.h
            prob = mvn_cdf(arg, np.zeros(self.k_cens), self.cov_phi)
            if prob <= 0.0:
                return -math.inf
            log_val += math.log(prob)
        return log_val

    def log_value_rows(self, C_O, B_C=None):
        """Vectorized log I over rows of observed values (and censored bounds)."""
        Y = np.asarray(C_O, dtype=float) - self.m_O
        AY = Y @ self.A_O
        p = AY @ self.beta_O
        quad_form = np.einsum("ij,ij->i", Y, AY)
        s0 = (self.tilt - p) / self.q
        log_val = (
            self._log_norm
            - 0.5 * quad_form
            + 0.5 * self.q * s0 * s0
            + 0.5 * (_LOG_2PI - math.log(self.q))
        )
        if self.k_cens:
            A = self.m_C + Y @ self.B.T
            arg = np.asarray(B_C, dtype=float) - A + s0[:, None] * self.h
            if self.k_cens == 1:
                probs = ndtr(arg[:, 0] / math.sqrt(self.cov_phi[0, 0]))
            else:
                probs = np.array(
                    [mvn_cdf(a, np.zeros(self.k_cens), self.cov_phi) for a in arg]
                )
            with np.errstate(divide="ignore"):
                log_val = log_val + np.log(probs)
        return log_val
