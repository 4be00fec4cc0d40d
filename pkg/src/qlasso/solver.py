"""Projected gradient descent for the constrained quantized least-squares program.

The objective is L(x) = (1/2m) sum_i (mu * y_i - a_i^T x)^2 minimized over a
constraint set K via x+ = P_K(x - eta * grad L(x)) from x = 0, with
eta = 1 / Lipschitz(grad L) or backtracking. Internally the quadratic is
evaluated through the precomputed Gram matrix A^T A / m, so the per-iteration
cost does not grow with m.

Also houses the one-shot baselines: projected back projection (PBP) and the
regularized correlation maximizer, which coincide as P_K of the same point.
"""

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .ensemble import MeasurementMatrix
from .geometry import ConstraintSet
from .quantizer import QuantizedObservations


def _entries(A) -> np.ndarray:
    return A.entries if isinstance(A, MeasurementMatrix) else np.asarray(A, dtype=float)


def _yvec(y) -> np.ndarray:
    return y.y if isinstance(y, QuantizedObservations) else np.asarray(y, dtype=float)


@dataclass(frozen=True)
class GLassoProblem:
    A: MeasurementMatrix
    y: Union[QuantizedObservations, np.ndarray]
    mu: float
    K: ConstraintSet

    def __post_init__(self):
        if _entries(self.A).shape[0] != _yvec(self.y).shape[0]:
            raise ValueError("rows(A) must equal length(y)")
        if not np.isfinite(self.mu):
            raise ValueError("mu must be finite")


@dataclass(frozen=True)
class SolverOptions:
    max_iters: int = 10000
    rel_tol: float = 1e-10
    step_rule: str = "fixed_inverse_lipschitz"

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not (self.rel_tol > 0):
            raise ValueError("rel_tol must be positive")
        if self.step_rule not in ("fixed_inverse_lipschitz", "backtracking"):
            raise ValueError(f"unknown step rule {self.step_rule!r}")


@dataclass
class SolverResult:
    x_hat: np.ndarray
    objective_trace: np.ndarray
    iterations: int
    converged: bool
    step_size: float


def objective(p: GLassoProblem, x: np.ndarray) -> float:
    """L(x) = (1/2m) sum_i (mu * y_i - a_i^T x)^2."""
    A = _entries(p.A)
    x = np.asarray(x, dtype=float)
    if x.shape[0] != A.shape[1]:
        raise ValueError("dimension mismatch between x and A")
    r = p.mu * _yvec(p.y) - A @ x
    return float(r @ r) / (2.0 * A.shape[0])


def gradient(p: GLassoProblem, x: np.ndarray) -> np.ndarray:
    """grad L(x) = (1/m) A^T (A x - mu * y)."""
    A = _entries(p.A)
    x = np.asarray(x, dtype=float)
    if x.shape[0] != A.shape[1]:
        raise ValueError("dimension mismatch between x and A")
    return A.T @ (A @ x - p.mu * _yvec(p.y)) / A.shape[0]


def estimate_lipschitz(A) -> float:
    """lambda_max(A^T A) / m by power iteration, inflated 1% as a safety factor."""
    entries = _entries(A)
    if entries.size == 0:
        raise ValueError("A must be nonempty")
    m = entries.shape[0]
    G = entries.T @ entries / m
    rng = np.random.default_rng(0)
    v = rng.standard_normal(G.shape[0])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(100):
        w = G @ v
        lam_new = float(v @ w)
        norm_w = np.linalg.norm(w)
        if norm_w == 0:
            return 0.0
        v = w / norm_w
        if abs(lam_new - lam) <= 1e-8 * max(abs(lam_new), 1.0):
            lam = lam_new
            break
        lam = lam_new
    return 1.01 * lam


def glasso_solve(p: GLassoProblem, opts: SolverOptions = SolverOptions()) -> SolverResult:
    """Minimize the quantized least-squares objective over K from x = 0."""
    A = _entries(p.A)
    yv = _yvec(p.y)
    m, n = A.shape
    G = A.T @ A / m
    b = (p.mu / m) * (A.T @ yv)
    const = (p.mu**2 / m) * float(yv @ yv)

    def f(x, Gx):
        return 0.5 * float(x @ Gx) - float(b @ x) + 0.5 * const

    lipschitz = estimate_lipschitz(A)
    eta = 1.0 / lipschitz if lipschitz > 0 else 1.0
    x = np.zeros(n)
    Gx = np.zeros(n)
    trace = [f(x, Gx)]
    converged = False
    iterations = 0
    for k in range(opts.max_iters):
        grad = Gx - b
        if opts.step_rule == "fixed_inverse_lipschitz":
            x_new = p.K.project(x - eta * grad)
            Gx_new = G @ x_new
            f_new = f(x_new, Gx_new)
        else:
            # Backtrack from 1/L until the local quadratic model holds.
            step = eta
            while True:
                x_new = p.K.project(x - step * grad)
                Gx_new = G @ x_new
                f_new = f(x_new, Gx_new)
                d = x_new - x
                if f_new <= trace[-1] + float(grad @ d) + float(d @ d) / (2.0 * step) + 1e-12:
                    break
                step *= 0.5
                if step < 1e-20:
                    break
        if not np.isfinite(f_new):
            raise RuntimeError("objective diverged to a non-finite value")
        f_prev = trace[-1]
        trace.append(f_new)
        x, Gx = x_new, Gx_new
        iterations = k + 1
        denom = max(abs(f_prev), np.finfo(float).tiny)
        if (f_prev - f_new) / denom < opts.rel_tol and f_new <= f_prev:
            converged = True
            break
    return SolverResult(
        x_hat=x,
        objective_trace=np.asarray(trace),
        iterations=iterations,
        converged=converged,
        step_size=eta,
    )


def pbp_estimate(A, y, K: ConstraintSet, mu: float) -> np.ndarray:
    """Projected back projection: P_K((mu/m) A^T y)."""
    entries = _entries(A)
    yv = _yvec(y)
    if entries.shape[0] != yv.shape[0]:
        raise ValueError("rows(A) must equal length(y)")
    return K.project((mu / entries.shape[0]) * (entries.T @ yv))


def dm_estimate(A, y, K: ConstraintSet, lam: float) -> np.ndarray:
    """Maximizer of (1/m) sum y_i a_i^T x - ||x||^2 / (2 lam) over K.

    Completing the square reduces the program to projecting (lam/m) A^T y
    onto K, so this is computed exactly as pbp_estimate with mu = lam.
    """
    if not (lam > 0):
        raise ValueError("lam must be positive")
    return pbp_estimate(A, y, K, lam)
