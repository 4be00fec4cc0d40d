"""Constraint sets with exact Euclidean projections and tangent-cone diagnostics.

Shipped sets: scaled l1 ball, nuclear-norm ball on vectorized d x d matrices,
and the unconstrained (whole-space) set. The l1 projection is the sort-based
soft-threshold selection (Duchi et al.) in O(n log n); the nuclear projection
applies it to the singular values.
"""

import math
from dataclasses import dataclass

import numpy as np


def project_l1_ball(v: np.ndarray, radius: float) -> np.ndarray:
    """Euclidean projection onto {x : ||x||_1 <= radius}."""
    if not (radius > 0):
        raise ValueError(f"radius must be positive, got {radius}")
    v = np.asarray(v, dtype=float)
    u = np.abs(v)
    if u.sum() <= radius:
        return v.copy()
    # Largest-magnitude-first scan for the soft threshold; ties at the
    # threshold do not change theta, the sort is stable for determinism.
    u_sorted = np.sort(u, kind="stable")[::-1]
    cumsum = np.cumsum(u_sorted)
    ks = np.arange(1, u.size + 1)
    rho = np.nonzero(u_sorted * ks > cumsum - radius)[0][-1]
    theta = (cumsum[rho] - radius) / (rho + 1.0)
    return np.sign(v) * np.maximum(u - theta, 0.0)


def project_nuclear_ball(v: np.ndarray, radius: float) -> np.ndarray:
    """Projection onto the nuclear-norm ball, on row-major vectorized matrices."""
    if not (radius > 0):
        raise ValueError(f"radius must be positive, got {radius}")
    v = np.asarray(v, dtype=float)
    d = math.isqrt(v.size)
    if d * d != v.size:
        raise ValueError(f"length {v.size} is not a square; cannot reshape to d x d")
    X = v.reshape(d, d)
    U, s, Vt = np.linalg.svd(X, full_matrices=False)
    if s.sum() <= radius:
        return v.copy()
    s_proj = project_l1_ball(s, radius)
    return (U @ (s_proj[:, None] * Vt)).reshape(-1)


class ConstraintSet:
    """Feasible set K with an exact Euclidean projection."""

    def project(self, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def contains(self, v: np.ndarray, tol: float = 1e-9) -> bool:
        return bool(np.linalg.norm(self.project(v) - np.asarray(v, dtype=float)) <= tol)


@dataclass(frozen=True)
class L1Ball(ConstraintSet):
    radius: float

    def __post_init__(self):
        if not (self.radius > 0):
            raise ValueError("radius must be positive")

    def project(self, v):
        return project_l1_ball(v, self.radius)


@dataclass(frozen=True)
class NuclearBall(ConstraintSet):
    radius: float

    def __post_init__(self):
        if not (self.radius > 0):
            raise ValueError("radius must be positive")

    def project(self, v):
        return project_nuclear_ball(v, self.radius)


@dataclass(frozen=True)
class Unconstrained(ConstraintSet):
    def project(self, v):
        return np.asarray(v, dtype=float).copy()


def gw_bound_sparse(n: int, s: int) -> float:
    """Width bound sqrt(2 s ln(n/s) + 1.5 s) for the l1-ball tangent cone."""
    if not 1 <= s <= n:
        raise ValueError(f"need 1 <= s <= n, got s={s}, n={n}")
    return math.sqrt(2.0 * s * math.log(n / s) + 1.5 * s)


def gw_bound_lowrank(d: int, r: int) -> float:
    """Width bound sqrt(6 d r) for the nuclear-ball tangent cone (d = matrix side)."""
    if not 1 <= r <= d:
        raise ValueError(f"need 1 <= r <= d, got r={r}, d={d}")
    return math.sqrt(6.0 * d * r)


@dataclass(frozen=True)
class ConeDiagnostics:
    width_bound: float
    smallball_inf: float
    num_directions: int
    seed: int


def sample_descent_directions(
    K: ConstraintSet, x0: np.ndarray, count: int, rng: np.random.Generator
) -> np.ndarray:
    """Sample unit vectors in the descent cone of K at x0, stacked as rows.

    Each direction is the normalized displacement P_K(x0 + delta * g) - x0
    for standard normal g, with probe scale delta = 0.01 * ||x0||_2
    (0.01 when x0 = 0). Displacements below 1e-12 are discarded and resampled.
    """
    x0 = np.asarray(x0, dtype=float)
    if not K.contains(x0, tol=1e-9):
        raise ValueError("anchor x0 is not feasible for K")
    norm_x0 = np.linalg.norm(x0)
    delta = 0.01 * norm_x0 if norm_x0 > 0 else 0.01
    out = np.empty((count, x0.size))
    filled = 0
    while filled < count:
        g = rng.standard_normal(x0.size)
        w = K.project(x0 + delta * g) - x0
        norm_w = np.linalg.norm(w)
        if norm_w < 1e-12:
            continue
        out[filled] = w / norm_w
        filled += 1
    return out


def estimate_smallball_inf(A, K: ConstraintSet, x0, N_d: int, rng: np.random.Generator) -> float:
    """Minimum of (1/m) ||A w||_2^2 over N_d sampled descent directions.

    This is an upper estimate of the restricted-eigenvalue infimum used as a
    diagnostic that the lower-bound side of the error analysis is active.
    """
    entries = A.entries if hasattr(A, "entries") else np.asarray(A, dtype=float)
    if entries.shape[1] != np.asarray(x0).shape[0]:
        raise ValueError("dimension mismatch between A and x0")
    W = sample_descent_directions(K, x0, N_d, rng)
    vals = np.sum((entries @ W.T) ** 2, axis=0) / entries.shape[0]
    return float(vals.min())
