"""Monte Carlo harness: error curves over m, rate fitting, resolution sweeps,
and verification of the Gaussian one-bit moment formulas.

Trial substreams are keyed by (master_seed, m, trial_id) plus a purpose tag,
never by estimator or by the quantizer resolution, so different estimators
and different resolutions see identical (x0, A, dither-uniforms) and paired
comparisons are valid.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import erfc

from .ensemble import (
    LowRank,
    SignalSpec,
    Sparse,
    ensemble_by_name,
    gen_signal,
    sample_measurements,
)
from .geometry import L1Ball, NuclearBall
from .quantizer import (
    OneBitQuantizer,
    UniformHalfOpenDither,
    UniformQuantizer,
    UniformSymmetricDither,
    measure,
)
from .solver import GLassoProblem, SolverOptions, dm_estimate, glasso_solve, pbp_estimate
from .streams import substream

ESTIMATORS = ("glasso", "pbp", "dm")


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    structure: Union[Sparse, LowRank]
    norm_target: float
    R: float
    ensemble: str  # "gaussian" | "rademacher"
    quantizer: str  # "uniform" | "one_bit"
    delta: Optional[float]  # resolution for the uniform scheme
    m_grid: Tuple[int, ...]
    trials: int
    master_seed: int
    estimators: Tuple[str, ...] = ("glasso",)

    def __post_init__(self):
        if self.R < self.norm_target:
            raise ValueError("R must be an upper bound on the signal norm")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if list(self.m_grid) != sorted(set(self.m_grid)):
            raise ValueError("m_grid must be strictly increasing")
        if self.quantizer not in ("uniform", "one_bit"):
            raise ValueError(f"unknown quantizer {self.quantizer!r}")
        if self.quantizer == "uniform" and not (self.delta and self.delta > 0):
            raise ValueError("uniform quantizer needs delta > 0")
        for est in self.estimators:
            if est not in ESTIMATORS:
                raise ValueError(f"unknown estimator {est!r}")
        ensemble_by_name(self.ensemble)  # validates


@dataclass(frozen=True)
class ErrorCurve:
    estimator: str
    m_grid: Tuple[int, ...]
    mean_err: np.ndarray
    std_err: np.ndarray
    trials: int
    master_seed: int
    errors: Optional[np.ndarray] = None  # (len(m_grid), trials) raw errors


@dataclass(frozen=True)
class RateFit:
    model: str  # "inv_sqrt_m" | "sqrtlog_m_over_sqrt_m"
    coefficient: float
    loglog_slope: float
    residual_rms: float


def onebit_dither_range(R: float, m: int) -> float:
    """Dither range rule T = R * sqrt(ln m) (also used as mu)."""
    return R * math.sqrt(math.log(m))


def run_trial(cfg: ExperimentConfig, m: int, trial_id: int, estimator: str) -> float:
    """One Monte Carlo trial: fresh (x0, A, dither), solve, return ||x_hat - x0||_2."""
    if m not in cfg.m_grid:
        raise ValueError(f"m={m} is not in the configured grid")
    spec = SignalSpec(cfg.n, cfg.structure, cfg.norm_target, seed=cfg.master_seed)
    x0 = gen_signal(spec, substream(cfg.master_seed, m, trial_id, "signal"))
    A = sample_measurements(
        ensemble_by_name(cfg.ensemble), m, cfg.n,
        substream(cfg.master_seed, m, trial_id, "matrix"),
        seed=cfg.master_seed,
    )

    if cfg.quantizer == "uniform":
        q = UniformQuantizer(cfg.delta)
        d = UniformHalfOpenDither(cfg.delta)
        mu = 1.0
    else:
        T = onebit_dither_range(cfg.R, m)
        q = OneBitQuantizer(T)
        d = UniformSymmetricDither(T)
        mu = T

    y = measure(A, x0, q, d, substream(cfg.master_seed, m, trial_id, "dither"))

    if isinstance(cfg.structure, Sparse):
        K = L1Ball(float(np.sum(np.abs(x0))))
    else:
        d_side = cfg.structure.d
        K = NuclearBall(float(np.linalg.norm(np.linalg.svd(x0.reshape(d_side, d_side), compute_uv=False), 1)))

    if estimator == "glasso":
        result = glasso_solve(GLassoProblem(A, y, mu, K), SolverOptions())
        x_hat = result.x_hat
    elif estimator == "pbp":
        x_hat = pbp_estimate(A, y, K, mu)
    elif estimator == "dm":
        x_hat = dm_estimate(A, y, K, mu)
    else:
        raise ValueError(f"unknown estimator {estimator!r}")
    return float(np.linalg.norm(x_hat - x0))


def _trial_star(args):
    return run_trial(*args)


def run_curve(cfg: ExperimentConfig, estimator: str, jobs: int = 1) -> ErrorCurve:
    """Mean/std of run_trial over cfg.trials independent trials, per m."""
    tasks = [(cfg, m, t, estimator) for m in cfg.m_grid for t in range(cfg.trials)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            flat = list(pool.map(_trial_star, tasks, chunksize=8))
    else:
        flat = [run_trial(*t) for t in tasks]
    errors = np.asarray(flat).reshape(len(cfg.m_grid), cfg.trials)
    return ErrorCurve(
        estimator=estimator,
        m_grid=tuple(cfg.m_grid),
        mean_err=errors.mean(axis=1),
        std_err=errors.std(axis=1),
        trials=cfg.trials,
        master_seed=cfg.master_seed,
        errors=errors,
    )


def fit_rate(curve: ErrorCurve, model: str) -> RateFit:
    """Fit c / sqrt(m) or c * sqrt(ln m / m) to a curve; also report log-log slope."""
    ms = np.asarray(curve.m_grid, dtype=float)
    errs = np.asarray(curve.mean_err, dtype=float)
    if ms.size < 3:
        raise ValueError("need at least 3 curve points")
    if np.any(errs <= 0):
        raise ValueError("all mean errors must be positive")
    slope = float(np.polyfit(np.log(ms), np.log(errs), 1)[0])
    if model == "inv_sqrt_m":
        basis = 1.0 / np.sqrt(ms)
    elif model == "sqrtlog_m_over_sqrt_m":
        basis = np.sqrt(np.log(ms) / ms)
    else:
        raise ValueError(f"unknown rate model {model!r}")
    coef = float(np.dot(errs, basis) / np.dot(basis, basis))
    rms = float(np.sqrt(np.mean((errs - coef * basis) ** 2)))
    return RateFit(model=model, coefficient=coef, loglog_slope=slope, residual_rms=rms)


def delta_sweep(
    cfg: ExperimentConfig,
    deltas: Sequence[float],
    estimators: Sequence[str] = ("glasso", "pbp"),
    jobs: int = 1,
) -> dict:
    """Per-resolution error curves at fixed m, paired seeds across deltas and estimators."""
    if len(cfg.m_grid) != 1:
        raise ValueError("delta_sweep expects a single fixed m in cfg.m_grid")
    out = {}
    for est in estimators:
        curves = []
        for delta in deltas:
            curves.append(run_curve(replace(cfg, delta=float(delta)), est, jobs=jobs))
        out[est] = {
            "deltas": tuple(float(d) for d in deltas),
            "mean_err": np.asarray([c.mean_err[0] for c in curves]),
            "std_err": np.asarray([c.std_err[0] for c in curves]),
            "errors": np.stack([c.errors[0] for c in curves]),
        }
    return out


# --- Gaussian one-bit moment formulas -------------------------------------

def qfunc(x: float) -> float:
    """Standard normal tail probability Q(x)."""
    return 0.5 * erfc(x / math.sqrt(2.0))


def onebit_xi_mean_literal(norm_x0: float, T: float, mu: float) -> float:
    """First-moment formula as printed: s(mu/T - 1) - 2(mu/T) Q(T/s), s = ||x0||.

    The second term lacks a factor of s relative to the derivation; it is
    reported verbatim next to the Monte Carlo truth rather than corrected.
    """
    t = T / norm_x0 if norm_x0 > 0 else math.inf
    return norm_x0 * (mu / T - 1.0) - 2.0 * (mu / T) * qfunc(t)


def onebit_xi_mean_norm_scaled(norm_x0: float, T: float, mu: float) -> float:
    """Dimensionally consistent variant with the ||x0|| factor restored."""
    t = T / norm_x0 if norm_x0 > 0 else math.inf
    return norm_x0 * (mu / T - 1.0) - 2.0 * (mu / T) * norm_x0 * qfunc(t)


def onebit_xi2_formula(norm_x0: float, T: float, mu: float) -> float:
    """Closed form for E[xi^2] in the Gaussian scalar model."""
    s = norm_x0
    t = T / s if s > 0 else math.inf
    expterm = math.exp(-(t * t) / 2.0) if math.isfinite(t) else 0.0
    return (
        3.0 * s * s
        + mu * mu
        - 6.0 * s * s * mu / T
        + 12.0 * s * s * (mu / T) * qfunc(t)
        + 2.0 * mu * math.sqrt(2.0 / math.pi) * s * expterm
    )


def onebit_eta2_formula(norm_x0: float, T: float, mu: float) -> float:
    """Closed form for E[eta^2]: mu^2 + s^2 - 2(mu/T) s^2 (1 - 2Q(T/s))."""
    s = norm_x0
    t = T / s if s > 0 else math.inf
    return mu * mu + s * s - 2.0 * (mu / T) * s * s * (1.0 - 2.0 * qfunc(t))


@dataclass(frozen=True)
class MomentReport:
    norm_x0: float
    T: float
    mu: float
    n_samples: int
    xi_mc: float
    xi_se: float
    xi_formula_literal: float
    xi_formula_norm_scaled: float
    xi2_mc: float
    xi2_se: float
    xi2_formula: float
    eta2_mc: float
    eta2_se: float
    eta2_formula: float


def onebit_moment_check(
    norm_x0: float, T: float, mu: float, N: int, rng: np.random.Generator
) -> MomentReport:
    """Monte Carlo moments of the one-bit Gaussian scalar model vs closed forms.

    Model: zeta ~ N(0,1), tau ~ Unif[-T, T],
    eta = mu * sign(norm_x0 * zeta + tau) - norm_x0 * zeta, xi = eta * zeta.
    """
    if N < 10**4:
        raise ValueError("N < 1e4 gives uninformative standard errors; refuse")
    zeta = rng.standard_normal(N)
    tau = T * (2.0 * rng.random(N) - 1.0)
    sgn = np.where(norm_x0 * zeta + tau >= 0, 1.0, -1.0)
    eta = mu * sgn - norm_x0 * zeta
    xi = eta * zeta
    sqn = math.sqrt(N)
    return MomentReport(
        norm_x0=norm_x0,
        T=T,
        mu=mu,
        n_samples=N,
        xi_mc=float(xi.mean()),
        xi_se=float(xi.std() / sqn),
        xi_formula_literal=onebit_xi_mean_literal(norm_x0, T, mu),
        xi_formula_norm_scaled=onebit_xi_mean_norm_scaled(norm_x0, T, mu),
        xi2_mc=float((xi**2).mean()),
        xi2_se=float((xi**2).std() / sqn),
        xi2_formula=onebit_xi2_formula(norm_x0, T, mu),
        eta2_mc=float((eta**2).mean()),
        eta2_se=float((eta**2).std() / sqn),
        eta2_formula=onebit_eta2_formula(norm_x0, T, mu),
    )
