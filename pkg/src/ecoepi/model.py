"""Four-compartment prey-predator model with infection, vaccination and migration.

State variables are the densities of susceptible prey ``S``, infected prey
``I``, vaccinated prey ``V`` and predators ``P``.  The disease-free model keeps
``(S, V, P)`` and drops every infection term.

    dS/dt = r S (1 - (S + I)/k) - beta S I - phi S + theta V - p1 P S - (m1 + d1) S
    dI/dt = beta S I + sigma V I - p2 P I - (m2 + d2 + c) I
    dV/dt = phi S - theta V - sigma V I - p3 P V - (m3 + d3) V
    dP/dt = (q1 p1 S + q2 p2 I + q3 p3 V - d4) P
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

import numpy as np

# Negative round-off tolerated (and clamped to zero) in state components.
CLAMP_TOL = 1e-12

PARAM_NAMES = (
    "r", "k", "beta", "sigma", "phi", "theta",
    "p1", "p2", "p3", "q1", "q2", "q3",
    "m1", "m2", "m3", "d1", "d2", "d3", "d4", "c",
)


class InvalidParamsError(ValueError):
    pass


class InvalidStateError(ValueError):
    pass


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class ModelParams:
    """Rates and coefficients of the model.

    All values are plain floats in consistent (unenforced) units.  Conversion
    efficiencies ``q1..q3`` must be below one unless ``allow_q_ge_one`` is set;
    the dynamics stay well defined without it, only the boundedness argument
    is lost, so the override downgrades the error to a warning.
    """

    r: float
    k: float
    beta: float
    sigma: float
    phi: float
    theta: float
    p1: float
    p2: float
    p3: float
    q1: float
    q2: float
    q3: float
    m1: float = 0.0
    m2: float = 0.0
    m3: float = 0.0
    d1: float = 0.0
    d2: float = 0.0
    d3: float = 0.0
    d4: float = 0.0
    c: float = 0.0
    allow_q_ge_one: bool = field(default=False, compare=False, repr=False)

    def __post_init__(self):
        for name in PARAM_NAMES:
            value = getattr(self, name)
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise InvalidParamsError(f"{name} must be a real number, got {value!r}") from None
            if not math.isfinite(value):
                raise InvalidParamsError(f"{name} must be finite, got {value}")
            if value < 0:
                raise InvalidParamsError(f"{name} must be nonnegative, got {value}")
            object.__setattr__(self, name, value)
        if self.r <= 0:
            raise InvalidParamsError("r must be positive")
        if self.k <= 0:
            raise InvalidParamsError("k must be positive")
        high = [q for q in ("q1", "q2", "q3") if getattr(self, q) >= 1]
        if high:
            msg = f"conversion coefficients {', '.join(high)} >= 1; boundedness is no longer guaranteed"
            if not self.allow_q_ge_one:
                raise InvalidParamsError(msg)
            warnings.warn(msg, RuntimeWarning, stacklevel=3)

    @classmethod
    def from_mapping(cls, values: Mapping[str, float], **kwargs) -> "ModelParams":
        unknown = set(values) - set(PARAM_NAMES)
        if unknown:
            raise InvalidParamsError(f"unknown parameter(s): {', '.join(sorted(unknown))}")
        return cls(**values, **kwargs)

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in PARAM_NAMES}

    def replace(self, **changes) -> "ModelParams":
        return dataclasses.replace(self, **changes)

    @property
    def infected_loss(self) -> float:
        """Per-capita removal of infected prey: ``c + d2 + m2``."""
        return self.c + self.d2 + self.m2

    @property
    def vaccinated_outflow(self) -> float:
        """Per-capita outflow of vaccinated prey without predation: ``theta + d3 + m3``."""
        return self.theta + self.d3 + self.m3

    def lint(self) -> list[str]:
        """Soft modelling assumptions that the numerics do not need."""
        notes = []
        if not self.p2 > self.p1:
            notes.append("p2 <= p1: infected prey are not easier to catch than healthy prey")
        if not self.sigma < self.beta:
            notes.append("sigma >= beta: vaccinated prey are not less susceptible")
        return notes


class FullState(NamedTuple):
    S: float
    I: float
    V: float
    P: float


class ReducedState(NamedTuple):
    S: float
    V: float
    P: float


def _checked(state: Sequence[float], size: int) -> np.ndarray:
    x = np.array(state, dtype=float)
    if x.shape != (size,):
        raise InvalidStateError(f"expected {size} state components, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidStateError(f"non-finite state {x.tolist()}")
    if np.any(x < -CLAMP_TOL):
        raise InvalidStateError(f"negative state component in {x.tolist()}")
    return np.maximum(x, 0.0)


def vector_field(params: ModelParams, S, I, V, P):
    """Unchecked right-hand side; broadcasts over array arguments.

    Used where states outside the positive octant are legitimate inputs,
    e.g. when sampling polynomial identities at arbitrary nodes.
    """
    p = params
    dS = (p.r * S * (1 - (S + I) / p.k) - p.beta * S * I - p.phi * S + p.theta * V
          - p.p1 * P * S - (p.m1 + p.d1) * S)
    dI = p.beta * S * I + p.sigma * V * I - p.p2 * P * I - p.infected_loss * I
    dV = p.phi * S - p.theta * V - p.sigma * V * I - p.p3 * P * V - (p.m3 + p.d3) * V
    dP = (p.q1 * p.p1 * S + p.q2 * p.p2 * I + p.q3 * p.p3 * V - p.d4) * P
    return dS, dI, dV, dP


def rhs_full(params: ModelParams, state: Sequence[float]) -> np.ndarray:
    S, I, V, P = _checked(state, 4)
    return np.array(vector_field(params, S, I, V, P))


def rhs_reduced(params: ModelParams, state: Sequence[float]) -> np.ndarray:
    S, V, P = _checked(state, 3)
    dS, _, dV, dP = vector_field(params, S, 0.0, V, P)
    return np.array([dS, dV, dP])


def jacobian_full(params: ModelParams, state: Sequence[float]) -> np.ndarray:
    S, I, V, P = _checked(state, 4)
    p = params
    return np.array([
        [p.r - 2 * p.r * S / p.k - p.r * I / p.k - p.beta * I - p.phi - p.p1 * P - p.m1 - p.d1,
         -p.r * S / p.k - p.beta * S, p.theta, -p.p1 * S],
        [p.beta * I, p.beta * S + p.sigma * V - p.p2 * P - p.m2 - p.d2 - p.c,
         p.sigma * I, -p.p2 * I],
        [p.phi, -p.sigma * V, -p.sigma * I - p.theta - p.p3 * P - p.m3 - p.d3, -p.p3 * V],
        [p.q1 * p.p1 * P, p.q2 * p.p2 * P, p.q3 * p.p3 * P,
         p.q1 * p.p1 * S + p.q2 * p.p2 * I + p.q3 * p.p3 * V - p.d4],
    ])


def jacobian_reduced(params: ModelParams, state: Sequence[float]) -> np.ndarray:
    S, V, P = _checked(state, 3)
    p = params
    return np.array([
        [p.r - 2 * p.r * S / p.k - p.phi - p.p1 * P - p.m1 - p.d1, p.theta, -p.p1 * S],
        [p.phi, -p.theta - p.p3 * P - p.m3 - p.d3, -p.p3 * V],
        [p.q1 * p.p1 * P, p.q3 * p.p3 * P, p.q1 * p.p1 * S + p.q3 * p.p3 * V - p.d4],
    ])


def dulac_expression(params, s: float, v: float) -> float:
    """Divergence of the (S, V) vector field weighted by ``1/(S V)``.

    Equals ``-r/(k v) - theta/s**2 - phi/v**2``.  A strictly negative value on
    the open quadrant rules out closed orbits there.  ``params`` only needs
    attributes ``r, k, theta, phi``.
    """
    if not (s > 0 and v > 0):
        raise DomainError(f"Dulac expression needs s > 0 and v > 0, got s={s}, v={v}")
    value = -params.r / (params.k * v) - params.theta / s**2 - params.phi / v**2
    if value >= 0:
        warnings.warn("Dulac expression is not sign-definite for these parameters",
                      RuntimeWarning, stacklevel=2)
    return value


def chi(state: Sequence[float]) -> float:
    """Total density ``S + I + V + P`` (works for reduced states too)."""
    return float(np.sum(state))


def boundedness_constants(params: ModelParams, mu: float | None = None) -> tuple[float, float]:
    """Return ``(mu, eta)`` with ``d(chi)/dt + mu chi <= eta``.

    ``mu`` must lie in ``(0, min(m2 + d2 + c, m3 + d3, d4))``; by default half
    of that supremum is used.
    """
    limit = min(params.m2 + params.d2 + params.c, params.m3 + params.d3, params.d4)
    if limit <= 0:
        raise DomainError("boundedness needs positive removal rates for I, V and P")
    if mu is None:
        mu = 0.5 * limit
    if mu <= 0:
        raise DomainError("mu must be positive")
    eta = params.k * (params.r + mu) ** 2 / (4 * params.r)
    return mu, eta


# Reference parameter sets.  The base set has no migration and equal
# predation coefficients; the two cases use p1 = p3 = 0.1.
_BASE = dict(r=1.1, k=2.9, beta=1.2, phi=1.2, theta=1.2, sigma=0.2, c=0.35,
             p1=0.125, p2=0.125, p3=0.125, q1=0.75, q2=0.8, q3=0.75,
             d1=0.25, d2=0.125, d3=0.1, d4=0.25, m1=0.0, m2=0.0, m3=0.0)


def base_params() -> ModelParams:
    """Base set; its disease-free restriction is the three-species reference system."""
    return ModelParams(**_BASE)


def case_i() -> ModelParams:
    """Full model without migration."""
    return base_params().replace(p1=0.1, p3=0.1)


def case_ii() -> ModelParams:
    """Full model with prey migration."""
    return case_i().replace(m1=0.25, m2=0.125, m3=0.25)
