"""Real polynomial helpers: roots, exact-degree interpolation, bracketing."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

EPS_POS = 1e-9          # threshold for calling a root (or any quantity) positive
ZERO_TOL = 1e-12        # relative tolerance when trimming leading coefficients
IMAG_TOL = 1e-9
RESIDUAL_TOL = 1e-8


class PolynomialError(ValueError):
    pass


class NoRootsError(PolynomialError):
    pass


class DegreeMismatchError(PolynomialError):
    pass


class IllConditionedError(PolynomialError):
    pass


@dataclass(frozen=True)
class Poly:
    """Polynomial with real coefficients stored in ascending degree."""

    coeffs: tuple[float, ...]

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float).ravel()
        if c.size == 0:
            raise PolynomialError("polynomial needs at least one coefficient")
        if not np.all(np.isfinite(c)):
            raise PolynomialError(f"non-finite coefficient in {c.tolist()}")
        scale = np.max(np.abs(c))
        nz = np.nonzero(np.abs(c) > ZERO_TOL * scale)[0] if scale > 0 else []
        last = nz[-1] if len(nz) else 0
        object.__setattr__(self, "coeffs", tuple(float(x) for x in c[: last + 1]))

    @classmethod
    def from_descending(cls, coeffs: Sequence[float]) -> "Poly":
        return cls(tuple(coeffs)[::-1])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def scale(self) -> float:
        return max(abs(c) for c in self.coeffs)

    def __call__(self, x):
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> "Poly":
        if self.degree == 0:
            return Poly((0.0,))
        return Poly(tuple(i * c for i, c in enumerate(self.coeffs) if i > 0))

    def monic(self) -> "Poly":
        lead = self.coeffs[-1]
        if lead == 0:
            raise PolynomialError("zero polynomial has no monic form")
        return Poly(tuple(c / lead for c in self.coeffs))

    def descending(self) -> list[float]:
        return list(reversed(self.coeffs))


@dataclass(frozen=True)
class RootSet:
    roots: tuple[complex, ...]

    @property
    def real_roots(self) -> list[float]:
        return sorted(z.real for z in self.roots if abs(z.imag) < IMAG_TOL * (1 + abs(z.real)))

    @property
    def positive_real_roots(self) -> list[float]:
        return [x for x in self.real_roots if x > EPS_POS]

    @property
    def degenerate_roots(self) -> list[float]:
        """Real roots too close to zero to classify as positive or negative."""
        return [x for x in self.real_roots if abs(x) <= EPS_POS]


def _residual_ok(p: Poly, z: complex) -> bool:
    return abs(p(z)) <= RESIDUAL_TOL * p.scale * max(1.0, abs(z) ** p.degree)


def roots(p: Poly) -> RootSet:
    """All complex roots from the eigenvalues of the companion matrix.

    Each eigenvalue gets a few Newton polishing steps (kept only when they
    lower the residual) and must pass the residual test afterwards.
    """
    if p.degree < 1:
        raise NoRootsError("constant polynomial has no roots")
    c = np.asarray(p.coeffs)
    n = p.degree
    companion = np.zeros((n, n))
    companion[1:, :-1] = np.eye(n - 1)
    companion[:, -1] = -c[:-1] / c[-1]
    dp = p.derivative()
    found = []
    for z in np.linalg.eigvals(companion):
        z = complex(z)
        for _ in range(3):
            d = dp(z)
            if d == 0:
                break
            z_new = z - p(z) / d
            if abs(p(z_new)) < abs(p(z)):
                z = z_new
            else:
                break
        if abs(z.imag) < IMAG_TOL * (1 + abs(z.real)):
            z = complex(z.real, 0.0)
        if not _residual_ok(p, z):
            raise PolynomialError(f"root {z} failed the residual check (|p| = {abs(p(z)):.3e})")
        found.append(z)
    found.sort(key=lambda z: (z.real, z.imag))
    return RootSet(tuple(found))


def recover_polynomial(f: Callable[[float], float], nodes: Sequence[float], degree: int,
                       verify_node: float | None = None) -> Poly:
    """Interpolate ``f`` by a polynomial of the given degree and check one more node.

    ``f`` is expected to be a polynomial of at most ``degree``; a mismatch at
    the verification node raises :class:`DegreeMismatchError`.
    """
    x = np.asarray(nodes, dtype=float)
    if x.size != degree + 1:
        raise PolynomialError(f"need {degree + 1} nodes for degree {degree}, got {x.size}")
    if len(np.unique(x)) != x.size:
        raise IllConditionedError("interpolation nodes must be distinct")
    vander = np.vander(x, degree + 1, increasing=True)
    if np.linalg.cond(vander) > 1e12:
        raise IllConditionedError("interpolation nodes are ill-conditioned")
    y = np.array([f(xi) for xi in x], dtype=float)
    if not np.all(np.isfinite(y)):
        raise PolynomialError("function is not finite at an interpolation node")
    coeffs = np.linalg.solve(vander, y)
    if verify_node is None:
        spread = x.max() - x.min()
        verify_node = x.min() + 0.3719 * spread
    fv = float(f(verify_node))
    p = Poly(tuple(coeffs))
    scale = max(np.max(np.abs(y)), abs(fv), 1.0)
    if abs(p(verify_node) - fv) >= 1e-6 * scale:
        raise DegreeMismatchError(
            f"function is not a polynomial of degree <= {degree}: "
            f"misfit {abs(p(verify_node) - fv):.3e} at x = {verify_node}")
    return p


def recover_cubic(f: Callable[[float], float], nodes: Sequence[float],
                  verify_node: float | None = None) -> Poly:
    return recover_polynomial(f, nodes, 3, verify_node)


def bracket_roots(f: Callable[[float], float], lo: float, hi: float, n_subdivisions: int,
                  poles: Iterable[float] = ()) -> list[float]:
    """Real roots of ``f`` on ``[lo, hi]`` found by sign changes and bisection.

    Panels that contain one of ``poles``, or where ``f`` is not finite at an
    end point, are skipped so a sign flip through a pole is not mistaken for
    a root.  Returns an empty list when no sign change is found.
    """
    if not lo < hi:
        raise ValueError("need lo < hi")
    if n_subdivisions < 1:
        raise ValueError("need at least one panel")
    poles = [q for q in poles if lo <= q <= hi]
    grid = np.linspace(lo, hi, n_subdivisions + 1)
    values = [float(f(x)) for x in grid]
    found: list[float] = []

    def add(x):
        if not found or abs(x - found[-1]) > 1e-10 * (1 + abs(x)):
            found.append(x)

    for a, b, fa, fb in zip(grid[:-1], grid[1:], values[:-1], values[1:]):
        if any(a <= q <= b for q in poles):
            continue
        if not (np.isfinite(fa) and np.isfinite(fb)):
            continue
        if fa == 0:
            add(float(a))
            continue
        if fa * fb > 0 or fb == 0:
            continue
        while b - a >= 1e-12 * (1 + abs(a)):
            mid = 0.5 * (a + b)
            fm = float(f(mid))
            if fm == 0:
                a = b = mid
                break
            if fa * fm < 0:
                b = mid
            else:
                a, fa = mid, fm
        add(0.5 * (a + b))
    if values[-1] == 0 and not any(q == hi for q in poles):
        add(float(hi))
    return found
