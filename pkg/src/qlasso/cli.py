"""Command-line front end: experiment runs, sweeps, verification, and tables.

Subcommands: run-uniform, run-onebit, compare, delta-sweep, verify, widths,
quantize-demo. Configuration is a flat JSON file (keys: n, s, norm, R,
ensemble, quantizer, delta, m_grid, trials, seed, estimators, out_dir);
flags override config keys, which override defaults. QLASSO_SEED is a
fallback master seed. Exit codes: 0 success, 1 verification failure,
2 configuration error, 3 runtime failure.
"""

import argparse
import json
import math
import os
import sys

import numpy as np

from .ensemble import GAUSSIAN, Sparse, sample_measurements
from .experiment import (
    ExperimentConfig,
    delta_sweep,
    fit_rate,
    onebit_moment_check,
    run_curve,
)
from .geometry import (
    L1Ball,
    NuclearBall,
    Unconstrained,
    estimate_smallball_inf,
    gw_bound_lowrank,
    gw_bound_sparse,
    project_l1_ball,
    project_nuclear_ball,
)
from .output import (
    config_hash,
    inv_sqrt_guide,
    write_error_curves_csv,
    write_svg_lineplot,
)
from .quantizer import (
    KFoldUniformDither,
    OneBitQuantizer,
    UniformHalfOpenDither,
    UniformQuantizer,
    UniformSymmetricDither,
    dither_mean_residual,
    one_bit_mean_formula,
    uniform_quantize,
)
from .solver import GLassoProblem, gradient, objective
from .streams import substream


class ConfigError(Exception):
    pass


class VerificationFailure(Exception):
    pass


_CONFIG_KEYS = {
    "n", "s", "norm", "R", "ensemble", "quantizer", "delta",
    "m_grid", "trials", "seed", "estimators", "out_dir",
}

_DEFAULTS = {
    "n": 100,
    "s": 25,
    "norm": 8.0,
    "R": 10.0,
    "ensemble": "rademacher",
    "quantizer": "uniform",
    "delta": 3.0,
    "m_grid": None,  # filled per quantizer
    "trials": 200,
    "seed": 0,
    "estimators": ["glasso"],
    "out_dir": ".",
}

_DEFAULT_M_GRID = {
    "uniform": [200, 400, 700, 1000, 1400, 2000],
    "one_bit": [500, 1000, 2000, 4000, 8000],
}


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    for key in raw:
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"unknown config field {key!r}")
    return raw


def _resolve(args, quantizer):
    """Merge flag > config > env (seed only) > default into a settings dict."""
    cfg = dict(_DEFAULTS)
    cfg["quantizer"] = quantizer
    cfg.update(_load_config(getattr(args, "config", None)))
    if cfg["m_grid"] is None:
        cfg["m_grid"] = _DEFAULT_M_GRID[cfg["quantizer"]]
    env_seed = os.environ.get("QLASSO_SEED")
    if env_seed is not None and "seed" not in _load_config(getattr(args, "config", None)):
        try:
            cfg["seed"] = int(env_seed)
        except ValueError:
            raise ConfigError(f"QLASSO_SEED is not an integer: {env_seed!r}")
    if getattr(args, "seed", None) is not None:
        cfg["seed"] = args.seed
    if getattr(args, "out", None) is not None:
        cfg["out_dir"] = args.out
    return cfg


def _experiment_config(cfg):
    try:
        return ExperimentConfig(
            n=int(cfg["n"]),
            structure=Sparse(int(cfg["s"])),
            norm_target=float(cfg["norm"]),
            R=float(cfg["R"]),
            ensemble=cfg["ensemble"],
            quantizer=cfg["quantizer"],
            delta=None if cfg["quantizer"] == "one_bit" else _single_delta(cfg["delta"]),
            m_grid=tuple(int(m) for m in cfg["m_grid"]),
            trials=int(cfg["trials"]),
            master_seed=int(cfg["seed"]),
            estimators=tuple(cfg["estimators"]),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def _single_delta(delta):
    if isinstance(delta, (list, tuple)):
        raise ConfigError("this subcommand needs a scalar 'delta'; use delta-sweep for lists")
    return float(delta)


def _hashable(cfg):
    # out_dir does not affect the experiment, keep it out of the hash
    return {k: cfg[k] for k in sorted(_CONFIG_KEYS - {"out_dir"}) if k in cfg}


def _ensure_out(cfg):
    out = cfg["out_dir"]
    os.makedirs(out, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise OSError(f"output directory {out!r} is not writable")
    return out


def _cmd_run(args, quantizer):
    cfg = _resolve(args, quantizer)
    ecfg = _experiment_config(cfg)
    out = _ensure_out(cfg)
    chash = config_hash(_hashable(cfg))
    tag = "uniform" if quantizer == "uniform" else "onebit"
    rate_lines = ["estimator,model,coefficient,loglog_slope,residual_rms"]
    for est in ecfg.estimators:
        curve = run_curve(ecfg, est, jobs=args.jobs)
        csv_path = os.path.join(out, f"{tag}_{est}.csv")
        write_error_curves_csv(csv_path, [curve], chash)
        guide = inv_sqrt_guide(curve.m_grid, float(curve.mean_err[0]))
        write_svg_lineplot(
            os.path.join(out, f"{tag}_{est}.svg"),
            [(est, list(curve.m_grid), list(curve.mean_err))],
            title=f"{tag} quantization: recovery error vs m ({est})",
            xlabel="m",
            ylabel="l2 error",
            guide=guide,
        )
        for model in ("inv_sqrt_m", "sqrtlog_m_over_sqrt_m"):
            fit = fit_rate(curve, model)
            rate_lines.append(
                f"{est},{model},{fit.coefficient:.17g},{fit.loglog_slope:.17g},{fit.residual_rms:.17g}"
            )
        print(f"wrote {csv_path}")
    rates_path = os.path.join(out, f"{tag}_rates.csv")
    with open(rates_path, "w") as fh:
        fh.write(f"# master_seed={ecfg.master_seed} config_hash={chash}\n")
        fh.write("\n".join(rate_lines) + "\n")
    print(f"wrote {rates_path}")
    return 0


def _cmd_compare(args):
    cfg = _resolve(args, "uniform")
    if len(cfg["estimators"]) < 2:
        cfg["estimators"] = ["glasso", "pbp", "dm"]
    ecfg = _experiment_config(cfg)
    out = _ensure_out(cfg)
    chash = config_hash(_hashable(cfg))
    curves = {est: run_curve(ecfg, est, jobs=args.jobs) for est in ecfg.estimators}
    others = [e for e in ecfg.estimators if e != "glasso"]
    header = ["m"] + [f"{e}_mean_err" for e in ecfg.estimators]
    header += [f"winrate_glasso_vs_{e}" for e in others]
    lines = [f"# master_seed={ecfg.master_seed} config_hash={chash}", ",".join(header)]
    for i, m in enumerate(ecfg.m_grid):
        row = [str(m)] + [f"{curves[e].mean_err[i]:.17g}" for e in ecfg.estimators]
        for e in others:
            wins = np.mean(curves["glasso"].errors[i] < curves[e].errors[i])
            row.append(f"{wins:.17g}")
        lines.append(",".join(row))
    path = os.path.join(out, "compare.csv")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {path}")
    return 0


def _cmd_delta_sweep(args):
    cfg = _resolve(args, "uniform")
    deltas = cfg["delta"]
    if not isinstance(deltas, (list, tuple)):
        deltas = [4.0, 2.0, 1.0, 0.5, 0.25, 0.125]
    if not isinstance(cfg["m_grid"], (list, tuple)) or len(cfg["m_grid"]) != 1:
        cfg["m_grid"] = [cfg["m_grid"][0]] if isinstance(cfg["m_grid"], (list, tuple)) else [int(cfg["m_grid"])]
    if len(cfg["estimators"]) < 2:
        cfg["estimators"] = ["glasso", "pbp"]
    base = dict(cfg)
    base["delta"] = float(deltas[0])
    ecfg = _experiment_config(base)
    out = _ensure_out(cfg)
    chash = config_hash(_hashable(cfg))
    sweep = delta_sweep(ecfg, deltas, estimators=ecfg.estimators, jobs=args.jobs)
    lines = [
        f"# master_seed={ecfg.master_seed} config_hash={chash}",
        "estimator,delta,mean_err,std_err,trials",
    ]
    series = []
    for est, data in sweep.items():
        for d, mean, std in zip(data["deltas"], data["mean_err"], data["std_err"]):
            lines.append(f"{est},{d:.17g},{mean:.17g},{std:.17g},{ecfg.trials}")
        series.append((est, list(data["deltas"]), list(data["mean_err"])))
    path = os.path.join(out, "delta_sweep.csv")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    write_svg_lineplot(
        os.path.join(out, "delta_sweep.svg"),
        series,
        title=f"recovery error vs resolution (m={ecfg.m_grid[0]})",
        xlabel="delta",
        ylabel="l2 error",
    )
    print(f"wrote {path}")
    return 0


def _cmd_widths(args):
    rows = []
    for pair in args.sparse or []:
        n, s = (int(v) for v in pair.split(":"))
        rows.append(f"{n},{s},{gw_bound_sparse(n, s):.3f}")
    for pair in args.lowrank or []:
        d, r = (int(v) for v in pair.split(":"))
        rows.append(f"{d},{r},{gw_bound_lowrank(d, r):.3f}")
    if not rows:
        raise ConfigError("widths needs at least one --sparse n:s or --lowrank d:r")
    print("n_or_d,s_or_r,width")
    for row in rows:
        print(row)
    return 0


def _cmd_quantize_demo(args):
    deltas = args.delta or [2.0]
    xs = np.arange(args.xmin, args.xmax + 1e-12, args.step)
    header = "x," + ",".join(f"Q_delta_{d:g}" for d in deltas)
    print(header)
    for x in xs:
        vals = ",".join(f"{uniform_quantize(float(x), d):.6g}" for d in deltas)
        print(f"{x:.6g},{vals}")
    return 0


# --- verify ---------------------------------------------------------------

def _verify_checks(seed):
    """Run the hermetic verification suite; yield (name, passed, detail)."""
    N = 200_000

    # uniform dither unbiasedness on the (x, delta) grid
    for delta in (0.5, 1.0, 3.0):
        worst = 0.0
        ok = True
        for i, x in enumerate((-3.3, -1.0, 0.0, 0.25, 0.5, 7.9)):
            rng = substream(seed, "verify-uniform", i, int(delta * 1000))
            res = dither_mean_residual(
                x, UniformQuantizer(delta), UniformHalfOpenDither(delta), 1.0, N, rng
            )
            worst = max(worst, abs(res.mean) / max(res.stderr, 1e-300))
            ok &= abs(res.mean) <= 5 * res.stderr + 1e-12
        yield (f"uniform dither unbiased (delta={delta})", ok, f"worst |mean|/se = {worst:.2f}")

    # k-fold dither unbiasedness
    for k in (2, 3):
        ok = True
        worst = 0.0
        for i, x in enumerate((-1.0, 0.25, 7.9)):
            rng = substream(seed, "verify-kfold", k, i)
            res = dither_mean_residual(
                x, UniformQuantizer(1.0), KFoldUniformDither(k, 1.0), 1.0, N, rng
            )
            worst = max(worst, abs(res.mean) / max(res.stderr, 1e-300))
            ok &= abs(res.mean) <= 5 * res.stderr + 1e-12
        yield (f"{k}-fold dither unbiased", ok, f"worst |mean|/se = {worst:.2f}")

    # one-bit bias identity vs Monte Carlo
    T = 4.0
    ok = True
    worst = 0.0
    for i, x in enumerate((0.0, 0.5 * T, 2 * T, -2 * T, 3 * T, -3 * T)):
        rng = substream(seed, "verify-onebit", i)
        res = dither_mean_residual(
            x, OneBitQuantizer(T), UniformSymmetricDither(T), T, N, rng
        )
        exact = one_bit_mean_formula(x, T, T)
        worst = max(worst, abs(res.mean - exact) / max(res.stderr, 1e-300))
        ok &= abs(res.mean - exact) <= 5 * res.stderr + 1e-12
    yield ("one-bit bias identity", ok, f"worst |mc-exact|/se = {worst:.2f}")

    # projections: feasibility, idempotence, nonexpansiveness, candidate optimality
    rng = substream(seed, "verify-proj")
    ok = True
    worst = 0.0
    for _ in range(200):
        v = rng.standard_normal(16) * 3
        u = rng.standard_normal(16) * 3
        for proj, rad in ((project_l1_ball, 2.0), (project_nuclear_ball, 2.0)):
            pv, pu = proj(v, rad), proj(u, rad)
            ok &= np.linalg.norm(proj(pv, rad) - pv) <= 1e-12
            gap = np.linalg.norm(pv - pu) - np.linalg.norm(v - u)
            worst = max(worst, gap)
            ok &= gap <= 1e-12
    yield ("projection nonexpansive + idempotent", ok, f"worst expansion = {worst:.2e}")

    rng = substream(seed, "verify-proj-opt")
    ok = True
    for _ in range(20):
        v = rng.standard_normal(9) * 2
        best = np.linalg.norm(project_l1_ball(v, 1.0) - v)
        dirs = rng.standard_normal((1000, 9))
        cands = dirs / np.abs(dirs).sum(axis=1, keepdims=True) * rng.random((1000, 1))
        ok &= np.all(np.linalg.norm(cands - v, axis=1) >= best - 1e-9)
    yield ("l1 projection beats random feasible candidates", ok, "1000 candidates x 20 vectors")

    # gradient vs central finite differences
    rng = substream(seed, "verify-grad")
    A = sample_measurements(GAUSSIAN, 40, 15, rng)
    y = rng.standard_normal(40)
    p = GLassoProblem(A, y, 1.0, Unconstrained())
    x = rng.standard_normal(15)
    g = gradient(p, x)
    fd = np.empty(15)
    h = 1e-6
    for i in range(15):
        e = np.zeros(15)
        e[i] = h
        fd[i] = (objective(p, x + e) - objective(p, x - e)) / (2 * h)
    rel = np.linalg.norm(fd - g) / max(np.linalg.norm(g), 1e-300)
    yield ("gradient matches central differences", rel <= 1e-5, f"relative error {rel:.2e}")

    # one-bit second-moment formula, with the first-moment comparison reported
    ok = True
    details = []
    for i, (s, Tm) in enumerate(((4.0, 8.0), (8.0, 26.0), (1.0, 3.0))):
        rng = substream(seed, "verify-moments", i)
        rep = onebit_moment_check(s, Tm, Tm, N, rng)
        ok &= abs(rep.eta2_mc - rep.eta2_formula) <= 5 * rep.eta2_se
        details.append(
            f"s={s} T={Tm}: E[xi] mc={rep.xi_mc:.4f} literal={rep.xi_formula_literal:.4f} "
            f"norm-scaled={rep.xi_formula_norm_scaled:.4f}"
        )
    yield ("one-bit E[eta^2] closed form", ok, "; ".join(details))

    # small-ball diagnostic for an isotropic well-conditioned case
    rng = substream(seed, "verify-smallball")
    A = sample_measurements(GAUSSIAN, 1000, 20, rng)
    val = estimate_smallball_inf(A, Unconstrained(), np.zeros(20), 500, rng)
    yield ("small-ball diagnostic in [0.5, 1.5]", 0.5 <= val <= 1.5, f"inf estimate {val:.3f}")


def _cmd_verify(args):
    cfg = _resolve(args, "uniform")
    out = _ensure_out(cfg)
    lines = []
    all_ok = True
    for name, ok, detail in _verify_checks(int(cfg["seed"])):
        status = "PASS" if ok else "FAIL"
        all_ok &= ok
        line = f"[{status}] {name}: {detail}"
        lines.append(line)
        print(line)
    path = os.path.join(out, "verify.txt")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {path}")
    if not all_ok:
        raise VerificationFailure("one or more verification checks failed")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qlasso",
        description="Recovery from dithered quantized measurements via the Generalized Lasso.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--jobs", type=int, default=1, help="max concurrent trials")
        p.add_argument("--seed", type=int, help="master seed (overrides config)")
        p.add_argument("--out", help="output directory (overrides config)")

    for name in ("run-uniform", "run-onebit", "compare", "delta-sweep", "verify"):
        common(sub.add_parser(name))

    widths = sub.add_parser("widths")
    widths.add_argument("--sparse", action="append", metavar="N:S")
    widths.add_argument("--lowrank", action="append", metavar="D:R")

    demo = sub.add_parser("quantize-demo")
    demo.add_argument("--delta", type=float, action="append")
    demo.add_argument("--xmin", type=float, default=-5.0)
    demo.add_argument("--xmax", type=float, default=5.0)
    demo.add_argument("--step", type=float, default=0.5)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run-uniform":
            return _cmd_run(args, "uniform")
        if args.command == "run-onebit":
            return _cmd_run(args, "one_bit")
        if args.command == "compare":
            return _cmd_compare(args)
        if args.command == "delta-sweep":
            return _cmd_delta_sweep(args)
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "widths":
            return _cmd_widths(args)
        if args.command == "quantize-demo":
            return _cmd_quantize_demo(args)
        parser.error(f"unknown command {args.command!r}")
    except VerificationFailure as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 3
    return 0


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
