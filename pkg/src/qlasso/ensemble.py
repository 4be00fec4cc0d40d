"""Ground-truth signals and random isotropic measurement ensembles.

Signals are either exactly s-sparse vectors or vectorized d x d matrices of
rank r, rescaled to a prescribed l2 (Frobenius) norm. Measurement matrices
stack iid isotropic rows: standard Gaussian or Rademacher entries.
"""

import math
from dataclasses import dataclass
from typing import Union

import numpy as np


@dataclass(frozen=True)
class Sparse:
    """Sparse structure: exactly s nonzero entries."""

    s: int


@dataclass(frozen=True)
class LowRank:
    """Low-rank structure: a d x d matrix of rank r, stored vectorized."""

    d: int
    r: int


@dataclass(frozen=True)
class SignalSpec:
    n: int
    structure: Union[Sparse, LowRank]
    norm_target: float
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"ambient dimension must be positive, got n={self.n}")
        if self.norm_target <= 0:
            raise ValueError(f"norm_target must be positive, got {self.norm_target}")
        if isinstance(self.structure, Sparse):
            s = self.structure.s
            if not 1 <= s <= self.n:
                raise ValueError(f"sparsity must satisfy 1 <= s <= n, got s={s}, n={self.n}")
        elif isinstance(self.structure, LowRank):
            d, r = self.structure.d, self.structure.r
            if not 1 <= r <= d:
                raise ValueError(f"rank must satisfy 1 <= r <= d, got r={r}, d={d}")
            if self.n != d * d:
                raise ValueError(f"low-rank spec needs n = d^2, got n={self.n}, d={d}")
        else:
            raise ValueError(f"unknown structure {self.structure!r}")


@dataclass(frozen=True)
class EnsembleKind:
    """Measurement row distribution plus sub-gaussian metadata (L, alpha).

    L and alpha are reporting-only proxies; they never enter estimators.
    """

    kind: str
    L: float
    alpha: float

    def __post_init__(self):
        if self.kind not in ("gaussian", "rademacher"):
            raise ValueError(f"unknown ensemble kind {self.kind!r}")
        if self.L <= 0 or self.alpha <= 0:
            raise ValueError("L and alpha must be positive")


GAUSSIAN = EnsembleKind("gaussian", L=1.0, alpha=math.sqrt(2.0 / math.pi))
RADEMACHER = EnsembleKind("rademacher", L=1.0, alpha=1.0)


def ensemble_by_name(name: str) -> EnsembleKind:
    try:
        return {"gaussian": GAUSSIAN, "rademacher": RADEMACHER}[name]
    except KeyError:
        raise ValueError(f"unknown ensemble kind {name!r}") from None


@dataclass(frozen=True)
class MeasurementMatrix:
    entries: np.ndarray
    kind: EnsembleKind
    seed: int = 0

    def __post_init__(self):
        if self.entries.ndim != 2:
            raise ValueError("measurement matrix must be 2-d")
        if not np.all(np.isfinite(self.entries)):
            raise ValueError("measurement matrix has non-finite entries")

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    @property
    def n(self) -> int:
        return self.entries.shape[1]


def gen_sparse_signal(spec: SignalSpec, rng: np.random.Generator) -> np.ndarray:
    """Draw an s-sparse signal: uniform support, iid normal nonzeros, rescaled."""
    if not isinstance(spec.structure, Sparse):
        raise ValueError("spec.structure is not sparse")
    s = spec.structure.s
    support = rng.choice(spec.n, size=s, replace=False)
    while True:
        values = rng.standard_normal(s)
        norm = np.linalg.norm(values)
        if norm > 0:  # all-zero draw has probability zero
            break
    x0 = np.zeros(spec.n)
    x0[support] = values * (spec.norm_target / norm)
    return x0


def gen_lowrank_signal(spec: SignalSpec, rng: np.random.Generator) -> np.ndarray:
    """Draw X0 = U V^T with iid normal d x r factors, rescaled; row-major vectorized."""
    if not isinstance(spec.structure, LowRank):
        raise ValueError("spec.structure is not lowrank")
    d, r = spec.structure.d, spec.structure.r
    while True:
        U = rng.standard_normal((d, r))
        V = rng.standard_normal((d, r))
        X0 = U @ V.T
        norm = np.linalg.norm(X0)
        if norm > 0:
            break
    return (X0 * (spec.norm_target / norm)).reshape(-1)


def gen_signal(spec: SignalSpec, rng: np.random.Generator) -> np.ndarray:
    if isinstance(spec.structure, Sparse):
        return gen_sparse_signal(spec, rng)
    return gen_lowrank_signal(spec, rng)


def sample_measurements(
    kind: EnsembleKind, m: int, n: int, rng: np.random.Generator, seed: int = 0
) -> MeasurementMatrix:
    """Sample an m x n matrix with iid rows of the requested ensemble."""
    if m < 1 or n < 1:
        raise ValueError(f"need m >= 1 and n >= 1, got m={m}, n={n}")
    if kind.kind == "gaussian":
        entries = rng.standard_normal((m, n))
    elif kind.kind == "rademacher":
        entries = rng.integers(0, 2, size=(m, n)) * 2.0 - 1.0
    else:
        raise ValueError(f"unknown ensemble kind {kind.kind!r}")
    return MeasurementMatrix(entries=entries, kind=kind, seed=seed)
