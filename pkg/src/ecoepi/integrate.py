"""Adaptive Dormand-Prince 5(4) integration of the full and disease-free models.

The 5th order solution is propagated and the embedded 4th order solution
provides the error estimate.  Step sizes follow a PI controller.  Proposed
steps that leave the positive octant by more than ``NEG_REJECT`` are
rejected; smaller negative round-off is clamped to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .model import ModelParams, boundedness_constants, vector_field

NEG_REJECT = 1e-10
EPS_BOUND = 1e-6
CONVERGED_STEPS = 3

# Dormand & Prince (1980), RK5(4)7M
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_A_DENSE = np.zeros((7, 7))
for _i, _row in enumerate(_A):
    _A_DENSE[_i, :len(_row)] = _row
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


class IntegrationError(RuntimeError):
    """Integration stopped early; ``partial`` holds what was computed."""

    def __init__(self, message: str, partial: "Trajectory | None" = None):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class IntegratorConfig:
    t_end: float
    rtol: float = 1e-8
    atol: float = 1e-10
    initial_step: float | None = None
    max_step: float = math.inf
    output_stride: float | None = None
    convergence_tol: float = 1e-8
    max_steps: int = 1_000_000

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("tolerances must be positive")
        if not self.t_end >= 0:
            raise ValueError("t_end must be nonnegative")
        if self.output_stride is not None and not self.output_stride > 0:
            raise ValueError("output_stride must be positive")
        if not self.max_step > 0:
            raise ValueError("max_step must be positive")


@dataclass(frozen=True)
class BoundednessCheck:
    mu: float
    eta: float
    bound: float
    max_chi_observed: float
    satisfied: bool
    applicable: bool = True

    def to_dict(self) -> dict:
        return {"mu": self.mu, "eta": self.eta, "bound": self.bound,
                "max_chi_observed": self.max_chi_observed,
                "satisfied": self.satisfied, "applicable": self.applicable}


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    converged_to: tuple[float, ...] | None = None
    boundedness: BoundednessCheck | None = None
    accepted_steps: int = 0
    rejected_steps: int = 0
    disease_free: bool = False

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def columns(self) -> tuple[str, ...]:
        return ("S", "V", "P") if self.disease_free else ("S", "I", "V", "P")


def dopri_step(f: Callable[[np.ndarray], np.ndarray], y: np.ndarray, h: float,
               k1: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One Dormand-Prince step of an autonomous system.

    Returns the 5th order solution, the local error estimate (difference to
    the embedded 4th order solution) and the derivative at the new point.
    """
    K = np.empty((7, y.size))
    K[0] = f(y) if k1 is None else k1
    for i in range(1, 7):
        K[i] = f(y + h * (_A_DENSE[i, :i] @ K[:i]))
    return y + h * (_B5 @ K), h * (_E @ K), K[6]


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(x * x)))


def _initial_step(f, y0, f0, cfg: IntegratorConfig) -> float:
    # Hairer, Norsett & Wanner, Solving ODEs I, II.4
    scale = cfg.atol + cfg.rtol * np.abs(y0)
    d0, d1 = _rms(y0 / scale), _rms(f0 / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + h0 * f0
    y1 = np.maximum(y1, 0.0)
    d2 = _rms((f(y1) - f0) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1)


def _dopri(f: Callable[[np.ndarray], np.ndarray], y0: np.ndarray, cfg: IntegratorConfig,
           disease_free: bool) -> Trajectory:
    rhs = f
    f = lambda x: rhs(np.maximum(x, 0.0))  # noqa: E731
    t, y = 0.0, y0.copy()
    times, states = [t], [y.copy()]
    accepted = rejected = 0
    k1 = f(y)
    converged_count = 0
    converged_to = None

    def partial():
        return Trajectory(np.array(times), np.array(states), None, None,
                          accepted, rejected, disease_free)

    if cfg.t_end == 0:
        return partial()
    h = cfg.initial_step or _initial_step(f, y, k1, cfg)
    h = min(h, cfg.max_step, cfg.t_end)
    stride = cfg.output_stride
    n_out = 1
    next_out = stride if stride is not None else None
    err_prev = 1e-4
    safety, alpha, beta = 0.9, 0.7 / 5, 0.4 / 5

    while t < cfg.t_end:
        if accepted + rejected >= cfg.max_steps:
            raise IntegrationError(f"step budget exhausted at t = {t}", partial())
        target = cfg.t_end if next_out is None else min(next_out, cfg.t_end)
        h = min(h, cfg.max_step)
        h_free = h
        hit = t + h >= target - 1e-12 * max(1.0, abs(target))
        if hit:
            h = target - t
        if h <= 1e-14 * max(1.0, abs(t)):
            raise IntegrationError(f"step size underflow at t = {t}", partial())

        y_new, err_vec, k_new = dopri_step(f, y, h, k1)
        if not np.all(np.isfinite(y_new)):
            raise IntegrationError(f"non-finite state at t = {t + h}", partial())
        scale = cfg.atol + cfg.rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = _rms(err_vec / scale)

        if err > 1.0 or np.any(y_new < -NEG_REJECT):
            rejected += 1
            if np.any(y_new < -NEG_REJECT) and err <= 1.0:
                h *= 0.5
            else:
                h *= max(0.2, safety * err ** (-1 / 5))
            continue

        accepted += 1
        t = target if hit else t + h
        y = np.maximum(y_new, 0.0)
        k1 = k_new  # f clamps its argument, so this is f(y)
        err = max(err, 1e-10)
        factor = safety * err ** (-alpha) * err_prev ** beta
        err_prev = err
        h_next = h * min(5.0, max(0.2, factor))
        if hit:
            h_next = max(h_next, h_free)

        if stride is None:
            times.append(t)
            states.append(y.copy())
        elif hit and next_out is not None and t >= next_out - 1e-12 * max(1.0, next_out):
            times.append(t)
            states.append(y.copy())
            n_out += 1
            next_out = n_out * stride
        elif hit and t >= cfg.t_end:
            times.append(t)
            states.append(y.copy())

        if float(np.max(np.abs(k1))) < cfg.convergence_tol:
            converged_count += 1
            if converged_count >= CONVERGED_STEPS:
                converged_to = tuple(float(v) for v in y)
                if times[-1] != t:
                    times.append(t)
                    states.append(y.copy())
                break
        else:
            converged_count = 0
        h = h_next

    if times[-1] != t:
        times.append(t)
        states.append(y.copy())
    return Trajectory(np.array(times), np.array(states), converged_to, None,
                      accepted, rejected, disease_free)


def _initial(initial: Sequence[float], size: int) -> np.ndarray:
    y0 = np.array(initial, dtype=float)
    if y0.shape != (size,):
        raise ValueError(f"expected {size} initial values, got shape {y0.shape}")
    if not np.all(np.isfinite(y0)) or np.any(y0 < 0):
        raise ValueError(f"initial state must be finite and nonnegative, got {y0.tolist()}")
    return y0


def _with_boundedness(traj: Trajectory, params: ModelParams) -> Trajectory:
    return Trajectory(traj.times, traj.states, traj.converged_to, check_boundedness(traj, params),
                      traj.accepted_steps, traj.rejected_steps, traj.disease_free)


def integrate(params: ModelParams, initial: Sequence[float], cfg: IntegratorConfig) -> Trajectory:
    """Integrate the full model from ``(S0, I0, V0, P0)``."""
    y0 = _initial(initial, 4)
    # _dopri clamps and checks finiteness itself, so the unchecked field is safe here
    traj = _dopri(lambda y: np.array(vector_field(params, *y.tolist())), y0, cfg, disease_free=False)
    return _with_boundedness(traj, params)


def integrate_reduced(params: ModelParams, initial: Sequence[float],
                      cfg: IntegratorConfig) -> Trajectory:
    """Integrate the disease-free model from ``(S0, V0, P0)``."""
    y0 = _initial(initial, 3)
    def f(y):
        S, V, P = y.tolist()
        dS, _, dV, dP = vector_field(params, S, 0.0, V, P)
        return np.array([dS, dV, dP])

    traj = _dopri(f, y0, cfg, disease_free=True)
    return _with_boundedness(traj, params)


def check_boundedness(traj: Trajectory, params: ModelParams, mu: float | None = None) -> BoundednessCheck:
    """Compare the total density over the last half of the samples with ``eta/mu``."""
    try:
        mu, eta = boundedness_constants(params, mu)
    except ValueError:
        return BoundednessCheck(math.nan, math.nan, math.nan, math.nan, False, applicable=False)
    bound = eta / mu
    n = len(traj.times)
    if n == 0:
        return BoundednessCheck(mu, eta, bound, math.nan, False, applicable=False)
    tail = traj.states[n // 2:] if n > 1 else traj.states
    max_chi = float(np.max(np.sum(tail, axis=1)))
    return BoundednessCheck(mu, eta, bound, max_chi, max_chi <= bound + EPS_BOUND)
