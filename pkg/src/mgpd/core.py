"""Parameter containers, the model object, standardization transforms,
model validation, and the model JSON schema.

A multivariate generalized Pareto model is a (representation, margins,
generator) triple.  The margins hold the per-component scale sigma > 0 and
shape gamma; the generator holds all dependence structure through the law of
a latent vector whose role (R, U, or T) must match the representation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .exceptions import DataError, DomainError, ModelError
from .validation import as_float_matrix, as_float_vector

# Shapes closer to zero than this are routed to the gamma = 0 limit
# expressions everywhere, avoiding cancellation in (exp(g*x) - 1) / g.
GAMMA_ZERO_TOL = 1e-8

REPRESENTATIONS = ("R", "U", "S", "T")
ROLES = ("R", "U", "T")
ROLE_FOR_REPRESENTATION = {"R": "R", "U": "U", "S": "T", "T": "T"}


def zero_shape(gamma) -> np.ndarray:
    return np.abs(np.asarray(gamma, dtype=float)) < GAMMA_ZERO_TOL


@dataclass(frozen=True)
class MarginParams:
    """Per-component GP marginal parameters (scale sigma > 0, shape gamma)."""

    sigma: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        sigma = as_float_vector(self.sigma, "sigma")
        gamma = as_float_vector(self.gamma, "gamma", length=sigma.shape[0])
        if np.any(sigma <= 0):
            raise ValueError("all scale parameters sigma must be strictly positive")
        sigma.setflags(write=False)
        gamma.setflags(write=False)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "gamma", gamma)

    @property
    def d(self) -> int:
        return self.sigma.shape[0]

    def lower_endpoints(self) -> np.ndarray:
        """Per-component lower support endpoint: -sigma/gamma if gamma > 0 else -inf."""
        eta = np.full(self.d, -np.inf)
        pos = self.gamma >= GAMMA_ZERO_TOL
        eta[pos] = -self.sigma[pos] / self.gamma[pos]
        return eta

    def upper_endpoints(self) -> np.ndarray:
        omega = np.full(self.d, np.inf)
        neg = self.gamma <= -GAMMA_ZERO_TOL
        omega[neg] = -self.sigma[neg] / self.gamma[neg]
        return omega

    def __eq__(self, other):
        if not isinstance(other, MarginParams):
            return NotImplemented
        return np.array_equal(self.sigma, other.sigma) and np.array_equal(self.gamma, other.gamma)

    def __hash__(self):
        return hash((self.sigma.tobytes(), self.gamma.tobytes()))


def standardize(x, margins: MarginParams) -> np.ndarray:
    """Map real-scale values to the standard exponential scale.

    Componentwise (1/gamma) * log(gamma * x / sigma + 1), with the limit
    x / sigma for gamma = 0.  Requires gamma * x + sigma > 0.
    """
    x = np.asarray(x, dtype=float)
    sigma, gamma = margins.sigma, margins.gamma
    ratio = gamma * x / sigma
    if np.any(ratio <= -1.0):
        raise DomainError("standardize requires gamma * x + sigma > 0 componentwise")
    zero = zero_shape(gamma)
    out = np.empty_like(x)
    with np.errstate(divide="ignore"):
        out[..., ~zero] = np.log1p(ratio[..., ~zero]) / gamma[~zero]
    out[..., zero] = x[..., zero] / sigma[zero]
    return out


def destandardize(x0, margins: MarginParams) -> np.ndarray:
    """Inverse of :func:`standardize`: sigma * (exp(gamma * x0) - 1) / gamma."""
    x0 = np.asarray(x0, dtype=float)
    sigma, gamma = margins.sigma, margins.gamma
    zero = zero_shape(gamma)
    out = np.empty_like(x0)
    with np.errstate(over="raise"):
        try:
            out[..., ~zero] = sigma[~zero] * np.expm1(gamma[~zero] * x0[..., ~zero]) / gamma[~zero]
        except FloatingPointError as exc:
            raise OverflowError("destandardize overflowed; x0 too large for this gamma") from exc
    out[..., zero] = sigma[zero] * x0[..., zero]
    return out


class GeneratorSpec:
    """Specification of the latent generator vector.

    ``kind`` selects the distribution family, ``params`` its parameters, and
    ``role`` declares which latent vector the spec describes: "R" (real
    scale), "U" (exponential standard scale) or "T" (unconstrained spectral
    reformulation; the max-zero vector is derived as T - max_j T_j).
    """

    def __init__(self, kind: str, params: dict | None = None, role: str = "R"):
        from . import generators  # deferred to avoid an import cycle

        if role not in ROLES:
            raise ValueError(f"role must be one of {ROLES}, got {role!r}")
        self.kind = str(kind)
        self.role = role
        self.params = dict(params or {})
        self._family = generators.build_family(self.kind, self.params)
        # canonical parameter dict (arrays normalized) for serialization
        self.params = self._family.canonical_params()

    @property
    def family(self):
        return self._family

    @property
    def d(self) -> int:
        return self._family.d

    def with_role(self, role: str) -> "GeneratorSpec":
        if role == self.role:
            return self
        return GeneratorSpec(self.kind, self.params, role)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": self._family.params_to_jsonable()}

    def __repr__(self):
        return f"GeneratorSpec(kind={self.kind!r}, d={self.d}, role={self.role!r})"

    def __eq__(self, other):
        if not isinstance(other, GeneratorSpec):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.role == other.role
            and self.to_dict() == other.to_dict()
        )


class GpModel:
    """A multivariate generalized Pareto model in one of four representations."""

    def __init__(self, representation: str, margins: MarginParams, generator: GeneratorSpec):
        if representation not in REPRESENTATIONS:
            raise ValueError(f"representation must be one of {REPRESENTATIONS}")
        expected_role = ROLE_FOR_REPRESENTATION[representation]
        if generator.role != expected_role:
            raise ModelError(
                f"generator role {generator.role!r} is incompatible with "
                f"representation {representation!r} (expected {expected_role!r})"
            )
        if generator.d != margins.d:
            raise ModelError(
                f"generator dimension {generator.d} does not match margins dimension {margins.d}"
            )
        self.representation = representation
        self.margins = margins
        self.generator = generator

    @property
    def d(self) -> int:
        return self.margins.d

    @property
    def sigma(self) -> np.ndarray:
        return self.margins.sigma

    @property
    def gamma(self) -> np.ndarray:
        return self.margins.gamma

    def to_dict(self) -> dict:
        return {
            "representation": self.representation,
            "sigma": self.margins.sigma.tolist(),
            "gamma": self.margins.gamma.tolist(),
            "generator": self.generator.to_dict(),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, doc: dict) -> "GpModel":
        try:
            representation = doc["representation"]
            margins = MarginParams(np.asarray(doc["sigma"], dtype=float),
                                   np.asarray(doc["gamma"], dtype=float))
            gen_doc = doc["generator"]
            role = ROLE_FOR_REPRESENTATION.get(representation)
            if role is None:
                raise ValueError(f"unknown representation {representation!r}")
            generator = GeneratorSpec(gen_doc["kind"], gen_doc.get("params", {}), role)
        except KeyError as exc:
            raise ModelError(f"model document is missing field {exc}") from exc
        return cls(representation, margins, generator)

    @classmethod
    def from_json(cls, text: str) -> "GpModel":
        return cls.from_dict(json.loads(text))

    def __repr__(self):
        return (
            f"GpModel(representation={self.representation!r}, d={self.d}, "
            f"generator={self.generator.kind!r})"
        )

    def __eq__(self, other):
        if not isinstance(other, GpModel):
            return NotImplemented
        return self.to_dict() == other.to_dict()


class ExceedanceData:
    """Observed excesses over the threshold, with optional censoring levels.

    Every row must be a genuine exceedance: at least one component strictly
    positive.  ``censor`` is either None (no censoring) or a length-d vector
    of thresholds v_j <= 0; components at or below v_j contribute through the
    integrated density.
    """

    def __init__(self, excesses, censor=None):
        X = as_float_matrix(excesses, "excesses", allow_inf=True)
        if np.any(np.isposinf(X)):
            raise DataError("excesses contain +inf")
        bad = np.flatnonzero(~np.any(X > 0, axis=1))
        if bad.size:
            raise DataError(
                f"rows {bad[:10].tolist()} are not exceedances (no component > 0)"
            )
        if censor is not None:
            censor = as_float_vector(censor, "censor", length=X.shape[1], allow_inf=True)
            if np.any(censor > 0):
                raise DataError("censoring thresholds must satisfy v_j <= 0")
            censor = censor.copy()
            censor.setflags(write=False)
        X = X.copy()
        X.setflags(write=False)
        self.excesses = X
        self.censor = censor

    @property
    def n(self) -> int:
        return self.excesses.shape[0]

    @property
    def d(self) -> int:
        return self.excesses.shape[1]

    def censored_mask(self) -> np.ndarray:
        """Boolean n x d mask of components that fall at or below their threshold."""
        if self.censor is None:
            return np.zeros(self.excesses.shape, dtype=bool)
        return self.excesses <= self.censor[None, :]


@dataclass
class ComponentCheck:
    component: int | None
    passed: bool
    reason: str


@dataclass
class ValidationReport:
    checks: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def __repr__(self):
        status = "ok" if self.ok else f"{len(self.failures())} violation(s)"
        return f"ValidationReport({status}, {len(self.checks)} checks)"


def validate_model(model: GpModel) -> ValidationReport:
    """Check the sign constraints and moment finiteness of the latent vector.

    For role R the components must live on [0, inf) when gamma_j > 0, on
    [-inf, inf) when gamma_j = 0 and on [-inf, 0) when gamma_j < 0, with
    0 < E|R_j|^(1/gamma_j) < inf (gamma_j != 0) or E[exp(R_j / sigma_j)] < inf
    (gamma_j = 0).  Role U requires 0 < E[exp(U_j)] < inf.  Role T needs no
    moment condition because T - max_j T_j is bounded above by zero.
    Violations are returned, not raised.
    """
    report = ValidationReport()
    fam = model.generator.family
    role = model.generator.role
    sigma, gamma = model.margins.sigma, model.margins.gamma
    zero = zero_shape(gamma)

    for j in range(model.d):
        if role == "R":
            lo, hi = fam.support_bounds(j)
            if not zero[j] and gamma[j] > 0:
                if lo < 0:
                    report.checks.append(ComponentCheck(
                        j, False, f"gamma[{j}] > 0 requires R_{j} >= 0 but support reaches {lo}"))
                    continue
                if not fam.power_moment_finite(j, 1.0 / gamma[j]):
                    report.checks.append(ComponentCheck(
                        j, False, f"E[R_{j}^(1/gamma)] is infinite for gamma[{j}]={gamma[j]:g}"))
                    continue
                if not fam.power_moment_positive(j, 1.0 / gamma[j]):
                    report.checks.append(ComponentCheck(
                        j, False, f"E[R_{j}^(1/gamma)] is zero"))
                    continue
            elif not zero[j] and gamma[j] < 0:
                if hi > 0:
                    report.checks.append(ComponentCheck(
                        j, False, f"gamma[{j}] < 0 requires R_{j} < 0 but support reaches {hi}"))
                    continue
                if not fam.power_moment_finite(j, 1.0 / gamma[j]):
                    report.checks.append(ComponentCheck(
                        j, False, f"E[|R_{j}|^(1/gamma)] is infinite for gamma[{j}]={gamma[j]:g}"))
                    continue
                if not fam.power_moment_positive(j, 1.0 / gamma[j]):
                    report.checks.append(ComponentCheck(j, False, f"E[|R_{j}|^(1/gamma)] is zero"))
                    continue
            else:
                if not fam.exp_moment_finite(j, 1.0 / sigma[j]):
                    report.checks.append(ComponentCheck(
                        j, False, f"E[exp(R_{j}/sigma)] is infinite for sigma[{j}]={sigma[j]:g}"))
                    continue
                if not fam.exp_moment_positive(j, 1.0 / sigma[j]):
                    report.checks.append(ComponentCheck(j, False, f"E[exp(R_{j}/sigma)] is zero"))
                    continue
            report.checks.append(ComponentCheck(j, True, "sign constraint and moment finite"))
        elif role == "U":
            if not fam.exp_moment_finite(j, 1.0):
                report.checks.append(ComponentCheck(j, False, f"E[exp(U_{j})] is infinite"))
                continue
            if not fam.exp_moment_positive(j, 1.0):
                report.checks.append(ComponentCheck(j, False, f"E[exp(U_{j})] is zero"))
                continue
            report.checks.append(ComponentCheck(j, True, "E[exp(U_j)] finite"))
        else:  # role T: bounded above after recentring, no moment condition
            report.checks.append(ComponentCheck(j, True, "no moment condition for role T"))

    note = fam.identifiability_note(role, zero)
    if note:
        report.notes.append(note)
    return report
