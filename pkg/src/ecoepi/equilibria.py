"""Equilibria of the full model (E0..E5) and of the disease-free model (E^0..E^2).

The implicit equilibria are reduced to one scalar polynomial each:

* E2 / E^2: cubic in the predator density ``P2``,
* E4: cubic in the infected density ``I4`` (after clearing a denominator),
* E5: cubic in the susceptible density ``S5``.

Their coefficients are recovered by exact-degree interpolation of the
cleared equilibrium conditions rather than by expanding them by hand.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from .model import ModelParams, rhs_full, rhs_reduced, vector_field
from .polynomials import EPS_POS, Poly, bracket_roots, recover_cubic, roots

log = logging.getLogger(__name__)

FULL_LABELS = ("E0", "E1", "E2", "E3", "E4", "E5")
REDUCED_LABELS = ("E^0", "E^1", "E^2")

_NODES = (0.0, 1.0, 2.0, 3.0)
_NODES_POSITIVE = (0.5, 1.0, 2.0, 3.0)
_E4_PANELS = 2000
_E4_AGREE = 1e-6


class Existence(str, enum.Enum):
    EXISTS = "exists"
    FAILS = "fails-condition"
    NO_ROOT = "no-positive-root"


class EquilibriumError(RuntimeError):
    pass


@dataclass(frozen=True)
class Equilibrium:
    label: str
    point: tuple[float, ...] | None
    exists: Existence
    notes: tuple[str, ...] = ()
    residual: float | None = None

    @property
    def reduced(self) -> bool:
        return self.label.startswith("E^")

    def full_point(self) -> tuple[float, float, float, float]:
        """The point embedded in (S, I, V, P) coordinates."""
        if self.point is None:
            raise EquilibriumError(f"{self.label} has no point")
        if self.reduced:
            S, V, P = self.point
            return (S, 0.0, V, P)
        return tuple(self.point)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "point": None if self.point is None else list(self.point),
            "exists": self.exists.value,
            "notes": list(self.notes),
            "residual": self.residual,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Equilibrium":
        point = data.get("point")
        return cls(label=data["label"],
                   point=None if point is None else tuple(point),
                   exists=Existence(data["exists"]),
                   notes=tuple(data.get("notes", ())),
                   residual=data.get("residual"))


def _positive(name: str, value: float, notes: list[str]) -> bool:
    """Apply the positivity threshold to one existence inequality."""
    if value > EPS_POS:
        return True
    if abs(value) <= EPS_POS:
        notes.append(f"{name} = {value:.6g} is degenerate (within {EPS_POS:g} of zero)")
    else:
        notes.append(f"{name} = {value:.6g} is not positive")
    return False


def _finish(params: ModelParams, label: str, point, ok: bool, notes: list[str]) -> Equilibrium:
    point = tuple(float(x) for x in point)
    if ok:
        clamped = tuple(0.0 if -1e-12 < x < 0 else x for x in point)
        f = rhs_reduced if label.startswith("E^") else rhs_full
        residual = float(np.max(np.abs(f(params, clamped))))
        if residual >= 1e-6 * (1 + max(abs(x) for x in clamped)):
            raise EquilibriumError(f"{label} at {clamped} has residual {residual:.3e}")
        return Equilibrium(label, clamped, Existence.EXISTS, tuple(notes), residual)
    return Equilibrium(label, point, Existence.FAILS, tuple(notes), None)


def eq_trivial(params: ModelParams | None = None, reduced: bool = False) -> Equilibrium:
    if reduced:
        return Equilibrium("E^0", (0.0, 0.0, 0.0), Existence.EXISTS, (), 0.0)
    return Equilibrium("E0", (0.0, 0.0, 0.0, 0.0), Existence.EXISTS, (), 0.0)


def disease_free_bracket(params: ModelParams) -> float:
    """``r - phi - m1 - d1 + theta phi / (theta + m3 + d3)``; E1 needs it positive."""
    p = params
    if p.vaccinated_outflow <= 0:
        raise ZeroDivisionError("theta + m3 + d3 must be positive")
    return p.r - p.phi - p.m1 - p.d1 + p.theta * p.phi / p.vaccinated_outflow


def disease_free_point(params: ModelParams) -> tuple[float, float]:
    """Closed-form ``(S1, V1)`` of the infection- and predator-free state."""
    s1 = params.k / params.r * disease_free_bracket(params)
    v1 = params.phi * s1 / params.vaccinated_outflow
    return s1, v1


def eq_disease_free(params: ModelParams, reduced: bool = False) -> Equilibrium:
    notes: list[str] = []
    ok = _positive("r - phi - m1 - d1 + theta*phi/(theta+m3+d3)", disease_free_bracket(params), notes)
    s1, v1 = disease_free_point(params)
    if reduced:
        return _finish(params, "E^1", (s1, v1, 0.0), ok, notes)
    return _finish(params, "E1", (s1, 0.0, v1, 0.0), ok, notes)


# -- E2: infection-free coexistence --------------------------------------------

def _e2_denominator(params: ModelParams, P):
    p = params
    return p.p1 * p.q1 * (p.vaccinated_outflow + p.p3 * P) + p.phi * p.p3 * p.q3


def e2_coordinates(params: ModelParams, P2: float) -> tuple[float, float]:
    """``(S2, V2)`` as functions of the predator density."""
    p = params
    V2 = p.phi * p.d4 / _e2_denominator(p, P2)
    S2 = (p.d4 - p.p3 * p.q3 * V2) / (p.p1 * p.q1)
    return S2, V2


def e2_cubic(params: ModelParams) -> Poly:
    """Monic cubic whose roots are the candidate predator densities ``P2``.

    On the predator and vaccinated nullclines ``S`` and ``V`` are rational in
    ``P`` with a common linear denominator ``D(P)``; the susceptible equation
    times ``D(P)**2`` is a cubic.
    """
    if params.p1 * params.q1 <= 0:
        raise EquilibriumError("E2 needs p1*q1 > 0")

    def cleared(P):
        S, V = e2_coordinates(params, P)
        return vector_field(params, S, 0.0, V, P)[0] * _e2_denominator(params, P) ** 2

    return recover_cubic(cleared, _NODES).monic()


def eq_e2(params: ModelParams, reduced: bool = False) -> list[Equilibrium]:
    label = "E^2" if reduced else "E2"
    cubic = e2_cubic(params)
    found = roots(cubic)
    candidates = found.positive_real_roots
    if not candidates:
        note = "cubic roots: " + ", ".join(f"{z:.6g}" for z in found.roots)
        extra = [f"degenerate root {x:.3g}" for x in found.degenerate_roots]
        return [Equilibrium(label, None, Existence.NO_ROOT, (note, *extra))]
    out = []
    for P2 in candidates:
        S2, V2 = e2_coordinates(params, P2)
        notes: list[str] = []
        ok = _positive("d4 - p3*q3*V2", params.d4 - params.p3 * params.q3 * V2, notes)
        ok &= _positive("S2", S2, notes)
        if params.phi == 0 and V2 == 0:
            notes.append("V2 = 0 because phi = 0")
        else:
            ok &= _positive("V2", V2, notes)
        point = (S2, V2, P2) if reduced else (S2, 0.0, V2, P2)
        out.append(_finish(params, label, point, ok, notes))
    return out


# -- E3: predator and infected prey only -----------------------------------------

def eq_e3(params: ModelParams) -> Equilibrium:
    """Susceptible- and vaccine-free state; its predator density is always negative."""
    p = params
    if p.q2 * p.p2 <= 0 or p.p2 <= 0:
        raise EquilibriumError("E3 needs p2 > 0 and q2*p2 > 0")
    I3 = p.d4 / (p.q2 * p.p2)
    P3 = -p.infected_loss / p.p2
    notes = [f"P3 = {P3:.6g}: a population density cannot be negative"]
    if P3 >= 0:
        notes = [f"P3 = {P3:.6g} is not positive (c + d2 + m2 = 0)"]
    return Equilibrium("E3", (0.0, I3, 0.0, P3), Existence.FAILS, tuple(notes))


# -- E4: predator-free endemic state ---------------------------------------------

def _e4_denominator(params: ModelParams, I):
    p = params
    return p.sigma * p.phi + p.beta * (p.vaccinated_outflow + p.sigma * I)


def e4_coordinates(params: ModelParams, I4: float) -> tuple[float, float]:
    """``(S4, V4)`` on the infected and vaccinated nullclines."""
    p = params
    D = _e4_denominator(p, I4)
    S4 = p.infected_loss * (p.vaccinated_outflow + p.sigma * I4) / D
    V4 = p.phi * p.infected_loss / D
    return S4, V4


def e4_function(params: ModelParams):
    """Rational function whose positive zeros are the infected densities ``I4``.

    ``g(I) = theta phi - (theta + d3 + m3 + sigma I)
    (phi + d1 + m1 + beta I - (r/k)(k - I - S4(I)))`` -- the susceptible
    equation divided by ``S`` and multiplied by ``(theta + d3 + m3 + sigma I)``.
    """
    p = params

    def g(I):
        S4, _ = e4_coordinates(p, I)
        a = p.vaccinated_outflow + p.sigma * I
        return p.theta * p.phi - a * (p.phi + p.d1 + p.m1 + p.beta * I - p.r / p.k * (p.k - I - S4))

    return g


def e4_pole(params: ModelParams) -> float | None:
    p = params
    if p.beta * p.sigma == 0:
        return None
    return -(p.sigma * p.phi + p.beta * p.vaccinated_outflow) / (p.beta * p.sigma)


def e4_cubic(params: ModelParams) -> Poly:
    """``g(I) * D(I)`` with ``D`` the denominator of ``S4``; a cubic in ``I``."""
    p = params

    def cleared(I):
        a = p.vaccinated_outflow + p.sigma * I
        D = _e4_denominator(p, I)
        return (p.theta * p.phi * D
                - a * ((p.phi + p.d1 + p.m1 + p.beta * I - p.r + p.r * I / p.k) * D
                       + p.r / p.k * p.infected_loss * a))

    return recover_cubic(cleared, _NODES).monic()


def e4_roots_bracketed(params: ModelParams, n_subdivisions: int = _E4_PANELS) -> list[float]:
    pole = e4_pole(params)
    found = bracket_roots(e4_function(params), 0.0, 10 * params.k, n_subdivisions,
                          poles=() if pole is None else (pole,))
    return [x for x in found if x > EPS_POS]


def eq_e4(params: ModelParams) -> list[Equilibrium]:
    p = params
    if p.beta == 0 and p.sigma == 0:
        return []
    cubic_roots = roots(e4_cubic(p)).positive_real_roots
    scanned = e4_roots_bracketed(p)
    pole = e4_pole(p)
    if pole is not None:
        cubic_roots = [x for x in cubic_roots if abs(x - pole) > 1e-9 * (1 + abs(pole))]
    in_range = [x for x in cubic_roots if x <= 10 * p.k]
    if len(in_range) != len(scanned) or any(
            abs(a - b) > _E4_AGREE * (1 + abs(a)) for a, b in zip(in_range, scanned)):
        log.warning("E4 root paths disagree: cubic %s, bracket scan %s", in_range, scanned)
    out = []
    for I4 in cubic_roots:
        S4, V4 = e4_coordinates(p, I4)
        notes: list[str] = []
        ok = _positive("S4", S4, notes)
        if p.phi == 0 and V4 == 0:
            notes.append("V4 = 0 because phi = 0")
        else:
            ok &= _positive("V4", V4, notes)
        out.append(_finish(p, "E4", (S4, I4, V4, 0.0), ok, notes))
    return out


# -- E5: coexistence of all four compartments ------------------------------------

def e5_pq(params: ModelParams, S5: float) -> tuple[float, float]:
    """Numerator and denominator of ``V5 = P/Q`` at a given ``S5``."""
    p = params
    r, k, beta, phi, theta, sigma, c = p.r, p.k, p.beta, p.phi, p.theta, p.sigma, p.c
    p1, p2, p3, q1, q2, q3 = p.p1, p.p2, p.p3, p.q1, p.q2, p.q3
    d1, d2, d4, m1, m2 = p.d1, p.d2, p.d4, p.m1, p.m2
    S = S5
    num = (r * d4 * S + k * beta * d4 * S - r * p1 * q1 * S**2 - k * beta * p1 * q1 * S**2
           - c * k * p1 * q2 * S + k * beta * p1 * q2 * S**2 - k * d2 * p1 * q2 * S
           - k * m2 * p1 * q2 * S - k * r * p2 * q2 * S + r * p2 * q2 * S**2
           + k * phi * p2 * q2 * S + k * d1 * p2 * q2 * S + k * m1 * p2 * q2 * S)
    den = -k * sigma * p1 * q2 * S + k * theta * p2 * q2 + r * p3 * q3 * S + k * beta * p3 * q3 * S
    return num, den


def e5_coordinates(params: ModelParams, S5: float, V5: float) -> tuple[float, float]:
    """``(I5, P5)`` from the predator and infected nullclines."""
    p = params
    I5 = (p.d4 - p.p1 * p.q1 * S5 - p.p3 * p.q3 * V5) / (p.p2 * p.q2)
    P5 = (p.beta * S5 + p.sigma * V5 - p.infected_loss) / p.p2
    return I5, P5


def e5_cubic(params: ModelParams) -> Poly:
    """Monic cubic whose roots are the candidate ``S5``.

    The vaccinated equation with ``V = P/Q`` substituted, multiplied by
    ``Q**2`` and divided by ``S`` (``P`` carries a factor ``S``).
    """
    p = params
    if p.p2 * p.q2 <= 0:
        raise EquilibriumError("E5 needs p2*q2 > 0")

    def cleared(S):
        num, den = e5_pq(p, S)
        # I*Q and P*Q written without dividing by Q
        IQ = ((p.d4 - p.q1 * p.p1 * S) * den - p.q3 * p.p3 * num) / (p.q2 * p.p2)
        PQ = ((p.beta * S - p.infected_loss) * den + p.sigma * num) / p.p2
        value = (p.phi * S * den**2 - num * (p.theta + p.m3 + p.d3) * den
                 - p.sigma * num * IQ - p.p3 * num * PQ)
        return value / S

    return recover_cubic(cleared, _NODES_POSITIVE).monic()


def eq_e5(params: ModelParams) -> list[Equilibrium]:
    p = params
    out = []
    for S5 in roots(e5_cubic(p)).positive_real_roots:
        num, den = e5_pq(p, S5)
        notes = [f"sign clause as stated: one of P > 0, Q < 0 (not simultaneously); "
                 f"here P = {num:.6g}, Q = {den:.6g}; applied as V5 = P/Q > 0"]
        if abs(den) < 1e-12:
            notes.append("singular denominator Q; candidate rejected")
            out.append(Equilibrium("E5", (S5, np.nan, np.nan, np.nan), Existence.FAILS, tuple(notes)))
            continue
        V5 = num / den
        I5, P5 = e5_coordinates(p, S5, V5)
        ok = _positive("d4 - p1*q1*S5 - p3*q3*V5", p.d4 - p.p1 * p.q1 * S5 - p.p3 * p.q3 * V5, notes)
        ok &= _positive("beta*S5 + sigma*V5 - c - d2 - m2",
                        p.beta * S5 + p.sigma * V5 - p.infected_loss, notes)
        ok &= _positive("V5", V5, notes)
        out.append(_finish(p, "E5", (S5, I5, V5, P5), ok, notes))
    return out


def eq_reduced(params: ModelParams) -> list[Equilibrium]:
    return [eq_trivial(params, reduced=True), eq_disease_free(params, reduced=True),
            *eq_e2(params, reduced=True)]


def eq_all(params: ModelParams, include_reduced: bool = False) -> list[Equilibrium]:
    """Every equilibrium candidate of the full model, in label order.

    E4 and E5 contribute nothing when their cubic has no positive root.
    """
    out = [eq_trivial(params), eq_disease_free(params), *eq_e2(params), eq_e3(params),
           *eq_e4(params), *eq_e5(params)]
    if include_reduced:
        out.extend(eq_reduced(params))
    return out
