# morphforge/styletransfer/optimizer.py

"""Box-constrained limited-memory quasi-Newton minimization.

The ``projected`` backend is a projected L-BFGS: the two-loop recursion runs on
the free variables only (those not held at a bound by the gradient), steps are
projected onto the box and accepted by backtracking Armijo. The ``scipy``
backend hands the same problem to scipy's L-BFGS-B.
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from scipy.optimize import Bounds, minimize

from morphforge.core.arrays import BoolArray, FloatArray
from morphforge.core.exceptions import OptimizerError

logger = logging.getLogger(__name__)

Objective = Callable[[FloatArray], tuple[float, FloatArray]]
Backend = Literal["projected", "scipy"]

ARMIJO_C1 = 1e-4
CURVATURE_EPS = 1e-10
MAX_BACKTRACKS = 40


@dataclass(frozen=True)
class OptimizerConfig:
    memory: int = 10
    max_iters: int = 50
    grad_tol: float = 1e-6
    loss_rel_tol: float = 1e-9
    lower: float = 0.0
    upper: float = 1.0
    backend: Backend = "projected"

    def __post_init__(self) -> None:
        if self.memory < 1:
            raise OptimizerError(detail=f"memory must be at least 1, got {self.memory}")
        if self.max_iters < 0:
            raise OptimizerError(detail=f"max_iters must be non-negative, got {self.max_iters}")
        if self.lower > self.upper:
            raise OptimizerError(detail=f"Empty box [{self.lower}, {self.upper}]")
        if self.backend not in ("projected", "scipy"):
            raise OptimizerError(detail=f"Unknown optimizer backend '{self.backend}'")


@dataclass
class OptimizationResult:
    x: FloatArray
    trace: list[float] = field(default_factory=list)
    iterations: int = 0
    evaluations: int = 0
    reason: str = ""
    clamped: bool = False

    @property
    def initial_loss(self) -> float:
        return self.trace[0]

    @property
    def final_loss(self) -> float:
        return self.trace[-1]


def projected_gradient(x: FloatArray, g: FloatArray, lower: float, upper: float) -> FloatArray:
    """x - P(x - g): zero exactly where x is stationary for the box problem."""
    return x - np.clip(x - g, lower, upper)


def _evaluate(objective: Objective, x: FloatArray) -> tuple[float, FloatArray]:
    value, grad = objective(x)
    return float(value), np.asarray(grad, dtype=np.float64).reshape(x.shape)


def _two_loop(g: FloatArray, pairs: deque[tuple[FloatArray, FloatArray]], free: BoolArray) -> FloatArray:
    """L-BFGS inverse-Hessian product restricted to the free variables."""
    q = np.where(free, g, 0.0)
    history = []
    for s, y in reversed(pairs):
        s_f, y_f = np.where(free, s, 0.0), np.where(free, y, 0.0)
        sy = float(s_f @ y_f)
        if sy <= CURVATURE_EPS:
            continue
        rho = 1.0 / sy
        a = rho * float(s_f @ q)
        q = q - a * y_f
        history.append((s_f, y_f, rho, a))
    if history:
        s_f, y_f, rho, _ = history[0]
        q = q * (1.0 / (rho * float(y_f @ y_f)))
    for s_f, y_f, rho, a in reversed(history):
        b = rho * float(y_f @ q)
        q = q + (a - b) * s_f
    return -q


def _minimize_projected(objective: Objective, x0: FloatArray, cfg: OptimizerConfig, clamped: bool) -> OptimizationResult:
    lower, upper = cfg.lower, cfg.upper
    x = x0
    f, g = _evaluate(objective, x)
    if not (np.isfinite(f) and np.all(np.isfinite(g))):
        raise OptimizerError(detail="Objective is not finite at the starting point")

    result = OptimizationResult(x=x, trace=[f], evaluations=1, clamped=clamped)
    pairs: deque[tuple[FloatArray, FloatArray]] = deque(maxlen=cfg.memory)

    for _ in range(cfg.max_iters):
        if np.max(np.abs(projected_gradient(x, g, lower, upper)), initial=0.0) <= cfg.grad_tol:
            result.reason = "grad_tol"
            break

        free = ~(((x <= lower) & (g > 0)) | ((x >= upper) & (g < 0)))
        steepest = -np.where(free, g, 0.0)
        direction = _two_loop(g, pairs, free) if pairs else steepest
        if float(g @ direction) >= 0.0:
            direction = steepest

        accepted = None
        for candidate in (direction, steepest):
            step = 1.0 if pairs else min(1.0, 1.0 / max(float(np.max(np.abs(g))), 1e-300))
            for _ in range(MAX_BACKTRACKS):
                x_new = np.clip(x + step * candidate, lower, upper)
                s = x_new - x
                slope = float(g @ s)
                if slope >= 0.0:
                    break
                f_new, g_new = _evaluate(objective, x_new)
                result.evaluations += 1
                if np.isfinite(f_new) and np.all(np.isfinite(g_new)) and f_new <= f + ARMIJO_C1 * slope:
                    accepted = (x_new, f_new, g_new, s)
                    break
                step *= 0.5
            if accepted is not None or candidate is steepest:
                break

        if accepted is None:
            result.reason = "line_search"
            break

        x_new, f_new, g_new, s = accepted
        y = g_new - g
        if float(s @ y) > CURVATURE_EPS:
            pairs.append((s, y))
        relative = (f - f_new) / max(abs(f), abs(f_new), 1.0)
        x, f, g = x_new, f_new, g_new
        result.trace.append(f)
        result.iterations += 1
        logger.debug(f"iteration {result.iterations}: loss {f:.6e}")
        if relative <= cfg.loss_rel_tol:
            result.reason = "loss_rel_tol"
            break
    else:
        result.reason = "max_iters"

    result.x = x
    return result


def _minimize_scipy(objective: Objective, x0: FloatArray, cfg: OptimizerConfig, clamped: bool) -> OptimizationResult:
    f0, g0 = _evaluate(objective, x0)
    if not (np.isfinite(f0) and np.all(np.isfinite(g0))):
        raise OptimizerError(detail="Objective is not finite at the starting point")

    trace = [f0]

    def record(intermediate_result) -> None:
        trace.append(float(intermediate_result.fun))
        logger.debug(f"iteration {len(trace) - 1}: loss {trace[-1]:.6e}")

    outcome = minimize(
        objective,
        x0,
        jac=True,
        method="L-BFGS-B",
        bounds=Bounds(np.full(x0.shape, cfg.lower), np.full(x0.shape, cfg.upper)),
        callback=record,
        options={
            "maxcor": cfg.memory,
            "maxiter": cfg.max_iters,
            "gtol": cfg.grad_tol,
            "ftol": cfg.loss_rel_tol,
        },
    )
    return OptimizationResult(
        x=np.clip(outcome.x, cfg.lower, cfg.upper),
        trace=trace,
        iterations=int(outcome.nit),
        evaluations=int(outcome.nfev) + 1,
        reason=str(outcome.message),
        clamped=clamped,
    )


def lbfgsb_minimize(objective: Objective, x0: FloatArray, cfg: OptimizerConfig) -> OptimizationResult:
    """Minimize ``objective`` (value and gradient) over the box [cfg.lower, cfg.upper]."""
    x0 = np.asarray(x0, dtype=np.float64).ravel()
    start = np.clip(x0, cfg.lower, cfg.upper)
    clamped = not np.array_equal(start, x0)
    if clamped:
        logger.warning("Starting point outside the box, clamped before optimization")

    if cfg.backend == "scipy":
        result = _minimize_scipy(objective, start, cfg, clamped)
    else:
        result = _minimize_projected(objective, start, cfg, clamped)
    logger.debug(
        f"Optimizer stopped after {result.iterations} iterations ({result.reason}), "
        f"loss {result.initial_loss:.6e} -> {result.final_loss:.6e}"
    )
    return result
