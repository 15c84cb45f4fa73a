"""Shared one-dimensional quadrature engine.

All semi-infinite integrals in the package go through
:func:`integrate_halfline`, an adaptive routine on (0, inf) built on the
substitution t = s / (1 - s), which maps the half line to the unit interval
and keeps both polynomially and exponentially decaying integrands accurate.
The adaptive core is QUADPACK via :func:`scipy.integrate.quad`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .exceptions import IntegrationError


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_subdivisions: int = 200

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 10:
            raise ValueError("max_subdivisions must be at least 10")


DEFAULT_QUADRATURE = QuadratureConfig()

# QUADPACK flags that indicate a genuinely unusable result.  ier=2 (roundoff)
# and ier=1 (subdivision limit) still return the best estimate; we accept them
# only when the reported error meets the requested tolerance.
_HARD_FAILURES = {3: "badly behaved integrand", 4: "roundoff on extrapolation", 6: "invalid input"}


def _quad_unit(g, config, points=None):
    kwargs = {}
    if points:
        pts = sorted(p for p in points if 0.0 < p < 1.0)
        if pts:
            kwargs["points"] = pts
    out = quad(
        g,
        0.0,
        1.0,
        epsabs=config.abs_tol,
        epsrel=config.rel_tol,
        limit=config.max_subdivisions,
        full_output=1,
        **kwargs,
    )
    value, err, info = out[0], out[1], out[2]
    ier = 0 if len(out) < 4 else info.get("ier", 0) if isinstance(info, dict) else 0
    if len(out) == 4:
        # full_output with a message means quad flagged a problem
        message = out[3]
        last = info.get("last") if isinstance(info, dict) else None
        if err > config.rel_tol * max(abs(value), 1e-300) + config.abs_tol:
            raise IntegrationError(
                f"quadrature did not converge: {message}",
                subdivisions=last,
                estimate=value,
                error=err,
            )
    if not np.isfinite(value):
        raise IntegrationError("quadrature produced a non-finite value", estimate=value, error=err)
    return float(value), float(err)


def integrate_halfline(f, config: QuadratureConfig | None = None, points=None):
    """Integrate ``f`` over (0, inf).

    Returns (value, error_estimate).  ``points`` may list breakpoints in t
    where the integrand has kinks or jumps.  Raises IntegrationError when the
    error estimate cannot be brought below rel_tol * value + abs_tol.
    """
    config = config or DEFAULT_QUADRATURE

    def g(s):
        t = s / (1.0 - s)
        return f(t) / (1.0 - s) ** 2

    mapped = None
    if points:
        mapped = [t / (1.0 + t) for t in points if np.isfinite(t) and t > 0]
    return _quad_unit(g, config, points=mapped)


def integrate_halfline_log(log_f, config: QuadratureConfig | None = None, points=None,
                           probe=None):
    """Integrate exp(log_f) over (0, inf), assembled in log space.

    The integrand is only exponentiated after subtracting its approximate
    maximum, so products of many small density factors do not underflow.
    Returns (log_value, error_estimate_relative).
    """
    config = config or DEFAULT_QUADRATURE
    if probe is None:
        probe = np.geomspace(1e-8, 1e8, 121)
    with np.errstate(all="ignore"):
        vals = np.array([log_f(t) for t in probe], dtype=float)
    finite = vals[np.isfinite(vals)]
    if finite.size == 0:
        return -math.inf, 0.0
    shift = float(finite.max())

    def f(t):
        lv = log_f(t)
        if lv == -math.inf or np.isnan(lv):
            return 0.0
        return math.exp(lv - shift)

    value, err = integrate_halfline(f, config, points=points)
    if value <= 0.0:
        return -math.inf, err
    return math.log(value) + shift, err / value


def integrate_exponential_weight(f, config: QuadratureConfig | None = None, points_v=None):
    """Integrate f(v) * exp(-v) over v in (0, inf) via the substitution w = exp(-v)."""
    config = config or DEFAULT_QUADRATURE

    def g(w):
        return f(-math.log(w))

    mapped = None
    if points_v:
        mapped = [math.exp(-v) for v in points_v if np.isfinite(v) and v > 0]
    return _quad_unit(g, config, points=mapped)


def integrate_real_line(f, config: QuadratureConfig | None = None):
    """Integrate ``f`` over the whole real line (QUADPACK infinite-range rule)."""
    config = config or DEFAULT_QUADRATURE
    out = quad(f, -np.inf, np.inf, epsabs=config.abs_tol, epsrel=config.rel_tol,
               limit=config.max_subdivisions, full_output=1)
    value, err = out[0], out[1]
    if len(out) == 4 and err > config.rel_tol * max(abs(value), 1e-300) + config.abs_tol:
        info = out[2]
        raise IntegrationError(
            f"quadrature did not converge: {out[3]}",
            subdivisions=info.get("last") if isinstance(info, dict) else None,
            estimate=value,
            error=err,
        )
    return float(value), float(err)
