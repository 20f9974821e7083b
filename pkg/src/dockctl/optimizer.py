"""Box-constrained smooth NLP solver.

Projected quasi-Newton (L-BFGS on the free variables) with a
backtracking Armijo search along the projection arc. Every iterate
stays inside the box and the objective never increases between
accepted iterates.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

Objective = Callable[[np.ndarray], float]
Gradient = Callable[[np.ndarray], np.ndarray]
ValueAndGrad = Callable[[np.ndarray], "tuple[float, np.ndarray]"]


class SolverDiverged(RuntimeError):
    """Raised when the objective evaluates to a non-finite value."""

    def __init__(self, message: str, last_iterate: np.ndarray):
        super().__init__(message)
        self.last_iterate = last_iterate


@dataclass
class NlpProblem:
    dim: int
    objective: Objective
    lower: np.ndarray
    upper: np.ndarray
    gradient: Optional[Gradient] = None
    # fused evaluation, used in preference to objective + gradient when present
    value_and_grad: Optional[ValueAndGrad] = None

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        self.lower = np.broadcast_to(np.asarray(self.lower, dtype=float), (self.dim,)).copy()
        self.upper = np.broadcast_to(np.asarray(self.upper, dtype=float), (self.dim,)).copy()
        if np.any(self.lower > self.upper):
            raise ValueError("lower bound exceeds upper bound")

    def clamp(self, z: np.ndarray) -> np.ndarray:
        return np.minimum(np.maximum(z, self.lower), self.upper)

    def evaluate(self, z: np.ndarray) -> tuple[float, np.ndarray]:
        if self.value_and_grad is not None:
            f, g = self.value_and_grad(z)
            return float(f), np.asarray(g, dtype=float)
        f = float(self.objective(z))
        if self.gradient is not None:
            g = np.asarray(self.gradient(z), dtype=float)
        else:
            g = finite_diff_gradient(self, z)
        return f, g


@dataclass
class SolverOptions:
    max_iter: int = 500
    tol: float = 1e-8
    memory: int = 10
    armijo_c: float = 1e-4
    shrink: float = 0.5
    initial_step: float = 1.0
    max_backtracks: int = 60


@dataclass
class NlpSolution:
    z_star: np.ndarray
    objective_value: float
    kkt_residual: float
    iterations: int
    converged: bool
    history: list[float] = field(default_factory=list, repr=False)


def finite_diff_gradient(problem: NlpProblem, z: np.ndarray) -> np.ndarray:
    """Central-difference gradient with per-coordinate step ``max(1e-6, 1e-7 |z_i|)``.

    Perturbed points are clamped to the box, and the quotient uses the
    actual (possibly one-sided) spacing.
    """
    z = np.asarray(z, dtype=float)
    grad = np.zeros(problem.dim)
    for i in range(problem.dim):
        h = max(1e-6, 1e-7 * abs(z[i]))
        zp = z.copy()
        zm = z.copy()
        zp[i] = min(z[i] + h, problem.upper[i])
        zm[i] = max(z[i] - h, problem.lower[i])
        span = zp[i] - zm[i]
        if span == 0.0:
            continue
        grad[i] = (problem.objective(zp) - problem.objective(zm)) / span
    return grad


def projected_gradient(problem: NlpProblem, z: np.ndarray, g: np.ndarray) -> np.ndarray:
    return z - problem.clamp(z - g)


def _two_loop(q: np.ndarray, pairs: deque, gamma: float) -> np.ndarray:
    alphas = []
    for s, y, rho in reversed(pairs):
        a = rho * s.dot(q)
        alphas.append(a)
        q = q - a * y
    r = gamma * q
    for (s, y, rho), a in zip(pairs, reversed(alphas)):
        b = rho * y.dot(r)
        r = r + (a - b) * s
    return r


def solve(
    problem: NlpProblem,
    z0: np.ndarray,
    opts: Optional[SolverOptions] = None,
) -> NlpSolution:
    """Minimize ``problem.objective`` over its box starting from ``z0``.

    Returns the final iterate; ``converged`` is set when the infinity norm
    of the projected gradient drops to ``opts.tol``.
    """
    opts = opts or SolverOptions()
    z0 = np.asarray(z0, dtype=float).reshape(problem.dim)
    if not np.all(np.isfinite(z0)):
        raise ValueError("z0 must be finite")
    z = problem.clamp(z0)
    f, g = problem.evaluate(z)
    if not math.isfinite(f):
        raise SolverDiverged("objective is not finite at the initial point", z.copy())

    pairs: deque = deque(maxlen=opts.memory)
    history = [f]
    lo, hi = problem.lower, problem.upper
    it = 0
    res = float(np.max(np.abs(projected_gradient(problem, z, g))))
    while res > opts.tol and it < opts.max_iter:
        it += 1
        gnorm = float(np.max(np.abs(g)))
        if pairs:
            s, y, _ = pairs[-1]
            gamma = s.dot(y) / y.dot(y)
        else:
            gamma = opts.initial_step / max(gnorm, 1.0)

        # epsilon-active set: coordinates pinned at a bound with the gradient pushing outward
        eps = min(1e-3, res)
        active = ((z - lo <= eps) & (g > 0)) | ((hi - z <= eps) & (g < 0))
        free = ~active

        d = np.where(free, -_two_loop(np.where(free, g, 0.0), pairs, gamma), -gamma * g)
        d[free & ~np.isfinite(d)] = 0.0

        accepted = False
        for attempt in range(2):
            if attempt == 1:
                pairs.clear()
                d = -gamma * g if gamma > 0 else -g / max(gnorm, 1.0)
            alpha = 1.0
            for _ in range(opts.max_backtracks):
                zt = problem.clamp(z + alpha * d)
                step = zt - z
                slope = g.dot(step)
                if slope >= 0.0:
                    alpha *= opts.shrink
                    continue
                ft, gt = problem.evaluate(zt)
                if not math.isfinite(ft):
                    raise SolverDiverged(
                        f"objective is not finite after {it} iterations", z.copy()
                    )
                if ft <= f + opts.armijo_c * slope:
                    accepted = True
                    break
                alpha *= opts.shrink
            if accepted:
                break
        if not accepted:
            break

        s = zt - z
        y = gt - g
        sy = s.dot(y)
        if sy > 1e-12 * math.sqrt(s.dot(s) * y.dot(y)) and sy > 0:
            pairs.append((s, y, 1.0 / sy))
        z, f, g = zt, ft, gt
        history.append(f)
        res = float(np.max(np.abs(projected_gradient(problem, z, g))))

    return NlpSolution(
        z_star=z,
        objective_value=f,
        kkt_residual=res,
        iterations=it,
        converged=res <= opts.tol,
        history=history,
    )
