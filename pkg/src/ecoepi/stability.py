"""Local stability: characteristic polynomials, Routh-Hurwitz tests, spectra, R0."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .equilibria import (Equilibrium, Existence, disease_free_bracket, disease_free_point)
from .model import ModelParams, jacobian_full, jacobian_reduced
from .polynomials import EPS_POS, Poly

MARGINAL_TOL = 1e-9


class Verdict(str, enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    MARGINAL = "marginal"


class StabilityConsistencyError(RuntimeError):
    """Routh-Hurwitz and the computed spectrum disagree."""


class UndefinedR0Error(ValueError):
    pass


@dataclass(frozen=True)
class HurwitzResult:
    verdict: Verdict
    ledger: dict[str, float]


@dataclass(frozen=True)
class StabilityReport:
    equilibrium_label: str
    char_coeffs: tuple[float, ...]
    block_coeffs: tuple[float, ...]
    factored_eigenvalues: dict[str, float]
    hurwitz_conditions: dict[str, float]
    eigenvalues: tuple[complex, ...]
    verdict: Verdict

    def to_dict(self) -> dict:
        return {
            "equilibrium_label": self.equilibrium_label,
            "char_coeffs": list(self.char_coeffs),
            "block_coeffs": list(self.block_coeffs),
            "factored_eigenvalues": dict(self.factored_eigenvalues),
            "hurwitz_conditions": dict(self.hurwitz_conditions),
            "eigenvalues": [[z.real, z.imag] for z in self.eigenvalues],
            "verdict": self.verdict.value,
        }


@dataclass(frozen=True)
class R0Result:
    value: float
    S1: float
    V1: float
    endemic: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "endemic", self.value > 1)

    def to_dict(self) -> dict:
        return {"value": self.value, "S1": self.S1, "V1": self.V1, "endemic": self.endemic}


def char_poly(J) -> Poly:
    """Monic characteristic polynomial ``det(lambda I - J)``, ascending coefficients.

    The coefficient of ``lambda**(n-m)`` is ``(-1)**m`` times the sum of all
    ``m``-th order principal minors.
    """
    J = np.asarray(J, dtype=float)
    if J.ndim != 2 or J.shape[0] != J.shape[1]:
        raise ValueError(f"characteristic polynomial needs a square matrix, got shape {J.shape}")
    if not np.all(np.isfinite(J)):
        raise ValueError("matrix has non-finite entries")
    n = J.shape[0]
    desc = [1.0]
    for m in range(1, n + 1):
        total = sum(np.linalg.det(J[np.ix_(idx, idx)]) for idx in combinations(range(n), m))
        desc.append((-1) ** m * float(total))
    return Poly(tuple(reversed(desc)))


def _verdict_from_margins(margins: dict[str, float]) -> Verdict:
    values = list(margins.values())
    if any(v < -MARGINAL_TOL for v in values):
        return Verdict.UNSTABLE
    if any(v <= MARGINAL_TOL for v in values):
        return Verdict.MARGINAL
    return Verdict.STABLE


def hurwitz_linear(a1: float) -> HurwitzResult:
    ledger = {"A1": a1}
    return HurwitzResult(_verdict_from_margins(ledger), ledger)


def hurwitz_quadratic(a1: float, a2: float) -> HurwitzResult:
    ledger = {"A1": a1, "A2": a2}
    return HurwitzResult(_verdict_from_margins(ledger), ledger)


def hurwitz_cubic(b1: float, b2: float, b3: float) -> HurwitzResult:
    """``lambda**3 + b1 lambda**2 + b2 lambda + b3``: stable iff all ``b > 0`` and ``b1 b2 > b3``."""
    ledger = {"B1": b1, "B2": b2, "B3": b3, "B1*B2": b1 * b2, "B1*B2-B3": b1 * b2 - b3}
    margins = {k: v for k, v in ledger.items() if k != "B1*B2"}
    return HurwitzResult(_verdict_from_margins(margins), ledger)


def hurwitz_quartic(d1: float, d2: float, d3: float, d4: float) -> HurwitzResult:
    ledger = {
        "D1": d1, "D2": d2, "D3": d3, "D4": d4,
        "D1*D2-D3": d1 * d2 - d3,
        "D1*(D2*D3-D1*D4)-D3^2": d1 * (d2 * d3 - d1 * d4) - d3**2,
    }
    return HurwitzResult(_verdict_from_margins(ledger), ledger)


def hurwitz(p: Poly) -> HurwitzResult:
    """Dispatch on the degree of a monic polynomial."""
    desc = p.monic().descending()[1:]
    tests = {1: hurwitz_linear, 2: hurwitz_quadratic, 3: hurwitz_cubic, 4: hurwitz_quartic}
    if len(desc) not in tests:
        raise ValueError(f"no Hurwitz test for degree {len(desc)}")
    return tests[len(desc)](*desc)


def spectrum_verdict(eigenvalues) -> Verdict:
    re = np.real(np.asarray(eigenvalues))
    if np.any(re > MARGINAL_TOL):
        return Verdict.UNSTABLE
    if np.all(re < -MARGINAL_TOL):
        return Verdict.STABLE
    return Verdict.MARGINAL


def eigenvalues(J) -> tuple[complex, ...]:
    """Full spectrum of a small dense matrix, residual-checked."""
    J = np.asarray(J, dtype=float)
    w, v = np.linalg.eig(J)
    scale = max(1.0, float(np.linalg.norm(J, np.inf)))
    for i in range(len(w)):
        if np.linalg.norm(J @ v[:, i] - w[i] * v[:, i]) > 1e-8 * scale * np.linalg.norm(v[:, i]):
            raise StabilityConsistencyError(f"eigenpair {i} fails the residual check")
    return tuple(sorted((complex(z) for z in w), key=lambda z: (z.real, z.imag)))


_VARS_FULL = ("S", "I", "V", "P")
_VARS_REDUCED = ("S", "V", "P")


def _split_decoupled(J: np.ndarray) -> tuple[list[int], list[int]]:
    """Indices whose row or column is zero off the diagonal, and the rest.

    Each decoupled index contributes its diagonal entry as an eigenvalue;
    the remaining eigenvalues are those of the block on the other indices.
    """
    active = list(range(J.shape[0]))
    factors = []
    changed = True
    while changed and len(active) > 1:
        changed = False
        for i in list(active):
            others = [j for j in active if j != i]
            if np.all(J[i, others] == 0) or np.all(J[others, i] == 0):
                factors.append(i)
                active.remove(i)
                changed = True
                break
    return factors, active


def classify(params: ModelParams, eq: Equilibrium) -> StabilityReport:
    """Local stability of an existing equilibrium.

    Analytic factor eigenvalues are split off where the Jacobian is block
    triangular (e.g. the infected direction at E1 and E2, the predator
    direction at E1 and E4); the remaining block goes through the matching
    Routh-Hurwitz test.  The verdict is cross-checked against the spectrum.
    """
    if eq.exists is not Existence.EXISTS:
        raise ValueError(f"{eq.label} does not exist; nothing to classify")
    if eq.reduced:
        J = jacobian_reduced(params, eq.point)
        names = _VARS_REDUCED
    else:
        J = jacobian_full(params, eq.point)
        names = _VARS_FULL
    full_poly = char_poly(J)
    factor_idx, block_idx = _split_decoupled(J)
    factors = {f"lambda_{names[i]}": float(J[i, i]) for i in factor_idx}
    block_poly = char_poly(J[np.ix_(block_idx, block_idx)])
    block = hurwitz(block_poly)
    conditions = dict(block.ledger)
    for name, value in factors.items():
        conditions[f"-{name}"] = -value
    margins = {k: v for k, v in conditions.items() if k != "B1*B2"}
    verdict = _verdict_from_margins(margins)
    spectrum = eigenvalues(J)
    by_spectrum = spectrum_verdict(spectrum)
    if verdict is not by_spectrum:
        raise StabilityConsistencyError(
            f"{eq.label}: Routh-Hurwitz says {verdict.value}, spectrum says {by_spectrum.value}")
    return StabilityReport(
        equilibrium_label=eq.label,
        char_coeffs=full_poly.coeffs,
        block_coeffs=block_poly.coeffs,
        factored_eigenvalues=factors,
        hurwitz_conditions=conditions,
        eigenvalues=spectrum,
        verdict=verdict,
    )


def r0(params: ModelParams) -> R0Result:
    """Basic reproduction number at the disease-free equilibrium.

    The infected compartment is one-dimensional, so the next generation
    matrix is the scalar ``(beta S1 + sigma V1) / (c + m2 + d2)``.
    """
    if disease_free_bracket(params) <= EPS_POS:
        raise UndefinedR0Error("disease-free equilibrium does not exist")
    loss = params.infected_loss
    if loss <= 0:
        raise UndefinedR0Error("c + m2 + d2 must be positive")
    s1, v1 = disease_free_point(params)
    return R0Result((params.beta * s1 + params.sigma * v1) / loss, s1, v1)


def trace_coefficient_e4(params: ModelParams, S4: float, I4: float, V4: float) -> float:
    """Closed-form ``C1 = -(trace of the (S, I, V) block)`` at E4, written out term by term."""
    p = params
    return -(p.r - 2 * p.r * S4 / p.k - p.r * I4 / p.k - p.beta * I4 - p.phi - p.m1 - p.d1
             + p.beta * S4 + p.sigma * V4 - p.m2 - p.d2 - p.c
             - p.sigma * I4 - p.theta - p.m3 - p.d3)
