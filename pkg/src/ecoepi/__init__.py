"""Eco-epidemiological prey-predator model with vaccination and migration."""

__version__ = "0.1.0"

from .model import (FullState, ModelParams, ReducedState, base_params, case_i, case_ii,
                    chi, dulac_expression, jacobian_full, jacobian_reduced, rhs_full,
                    rhs_reduced)
from .equilibria import Equilibrium, Existence, eq_all
from .stability import classify, r0
from .integrate import IntegratorConfig, integrate, integrate_reduced

__all__ = [
    "FullState", "ModelParams", "ReducedState", "base_params", "case_i", "case_ii", "chi",
    "dulac_expression", "jacobian_full", "jacobian_reduced", "rhs_full", "rhs_reduced",
    "Equilibrium", "Existence", "eq_all", "classify", "r0",
    "IntegratorConfig", "integrate", "integrate_reduced",
]
