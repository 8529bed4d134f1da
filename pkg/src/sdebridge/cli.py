"""Command-line interface.

One executable, one subcommand per workflow stage:

    sdebridge simulate  -- emit an Euler path as CSV
    sdebridge estimate  -- QMLE / bridge / lasso / disjoint fit of a CSV path
    sdebridge tune      -- residual-based tuning-parameter search
    sdebridge mc        -- Monte Carlo study driven by a JSON config
    sdebridge predict   -- fit + parametric-bootstrap prediction study
    sdebridge compare   -- joint vs disjoint estimation study

Exit codes: 0 success, 1 runtime failure (JSON error object on stderr),
2 configuration error (every detected problem is listed, not just the first).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from .bridge import (
    PenaltyConfig,
    adaptive_weights,
    bridge_fit,
    disjoint_fit,
    penalty_validation_errors,
)
from .errors import SdeBridgeError
from .experiments import (
    McConfig,
    PredictConfig,
    compare_joint_disjoint,
    load_series_csv,
    run_mc,
    run_predict,
    write_bands_csv,
    write_mc_outputs,
)
from .model import ParamVector, get_model, model_names
from .qmle import qmle_fit
from .simulate import RngSpec, euler_simulate, high_freq_grid, write_path_csv
from .tuning import DEFAULT_PSI_SPACE, tune

log = logging.getLogger("sdebridge")

PSI_FIELDS = ("q1", "q2", "lambda0", "gamma0", "delta1", "delta2")

MC_SCHEMA = {
    "model": str, "truth": dict, "n": int, "N": int, "delta_rule": (str, float, int),
    "methods": list, "psi0": dict, "tune": bool, "seed": int, "x0": list,
    "output_dir": str, "threads": int, "zero_tol": (float, int), "lags": int,
    "acf_convention": str, "qmle_method": str, "sim_refine": int,
    "tune_eps": (float, int), "tune_max_iter": int, "max_redraws": int,
    "model_options": dict,
}
PREDICT_SCHEMA = {
    "model": str, "input": str, "delta": (float, int), "train_n": int,
    "methods": list, "psi0": dict, "N": int, "seed": int,
    "zero_tol": (float, int), "output_dir": str, "qmle_method": str,
    "model_options": dict,
}
# execution-only keys are not embedded into result files, so reruns with a
# different worker count hash identically
EXECUTION_KEYS = ("threads", "output_dir", "log_level")


def _parse_float_list(text: str) -> list[float]:
    return [float(c) for c in text.split(",") if c.strip() != ""]


def _psi_from_args(args, errors: list[str]) -> PenaltyConfig | None:
    defaults = {"q1": 1.0, "q2": 1.0, "lambda0": 0.0, "gamma0": 0.0,
                "delta1": 1.0, "delta2": 1.0}
    for name in PSI_FIELDS:
        val = getattr(args, name, None)
        if val is not None:
            defaults[name] = float(val)
    errs = penalty_validation_errors(**defaults)
    if errs:
        errors.extend(errs)
        return None
    return PenaltyConfig(**defaults)


def _psi_from_dict(d: dict, errors: list[str], path: str = "psi0") -> PenaltyConfig | None:
    unknown = sorted(set(d) - set(PSI_FIELDS))
    for k in unknown:
        errors.append(f"unknown key {path}.{k}")
    vals = {k: d[k] for k in PSI_FIELDS if k in d}
    for k, v in vals.items():
        if not isinstance(v, (int, float)):
            errors.append(f"{path}.{k} must be a number")
            return None
    if unknown:
        return None
    defaults = {"q1": 0.9, "q2": 0.9, "lambda0": 2.0, "gamma0": 2.0,
                "delta1": 1.0, "delta2": 1.0}
    defaults.update({k: float(v) for k, v in vals.items()})
    errs = penalty_validation_errors(**defaults)
    if errs:
        errors.extend(errs)
        return None
    return PenaltyConfig(**defaults)


def _check_schema(cfg: dict, schema: dict, errors: list[str], required=()):
    for key in cfg:
        if key not in schema:
            errors.append(f"unknown key {key}")
        else:
            expected = schema[key]
            if not isinstance(cfg[key], expected):
                name = getattr(expected, "__name__", str(expected))
                errors.append(f"{key} has the wrong type (expected {name})")
    for key in required:
        if key not in cfg:
            errors.append(f"missing required key {key}")


def _resolve_model(name: str, options: dict, errors: list[str]):
    try:
        return get_model(name, **options)
    except (KeyError, TypeError) as exc:
        errors.append(str(exc))
        return None


def _theta_from_config(model, truth: dict | None, errors: list[str]) -> ParamVector | None:
    if truth is None:
        if model.reference_theta is None:
            errors.append("truth must be given for models without reference values")
            return None
        return model.reference_theta
    unknown = sorted(set(truth) - {"alpha", "beta"})
    for k in unknown:
        errors.append(f"unknown key truth.{k}")
    if "alpha" not in truth or "beta" not in truth:
        errors.append("truth must contain alpha and beta arrays")
        return None
    alpha = np.asarray(truth["alpha"], dtype=float)
    beta = np.asarray(truth["beta"], dtype=float)
    if alpha.size != model.p1 or beta.size != model.p2:
        errors.append(
            f"truth has wrong sizes (expected p1={model.p1}, p2={model.p2})")
        return None
    return ParamVector(alpha, beta)


def _fail_config(errors: list[str]) -> int:
    for e in errors:
        print(f"config error: {e}", file=sys.stderr)
    return 2


def _embeddable(cfg: dict) -> dict:
    return {k: v for k, v in cfg.items() if k not in EXECUTION_KEYS}


# ---------------------------------------------------------------------------
# subcommand implementations
# ---------------------------------------------------------------------------


def _cmd_simulate(args) -> int:
    errors: list[str] = []
    model = _resolve_model(args.model, _truncate_opts(args), errors)
    if model is not None:
        if args.n < 1:
            errors.append("n must be at least 1")
        if args.delta is not None and args.delta <= 0:
            errors.append("delta must be positive")
        alpha = _parse_float_list(args.alpha) if args.alpha else None
        beta = _parse_float_list(args.beta) if args.beta else None
        if (alpha is None) != (beta is None):
            errors.append("provide both --alpha and --beta or neither")
        if alpha is not None and len(alpha) != model.p1:
            errors.append(f"alpha must have {model.p1} entries")
        if beta is not None and len(beta) != model.p2:
            errors.append(f"beta must have {model.p2} entries")
        if alpha is None and model.reference_theta is None:
            errors.append("model has no reference truth; provide --alpha/--beta")
    if errors:
        return _fail_config(errors)

    theta = (model.reference_theta if args.alpha is None
             else ParamVector(alpha, beta))
    delta = args.delta if args.delta is not None else high_freq_grid(args.n)
    x0 = (np.asarray(_parse_float_list(args.x0)) if args.x0
          else model.reference_x0 if model.reference_x0 is not None
          else np.ones(model.dim_state))
    path = euler_simulate(model, theta, x0, args.n, delta,
                          RngSpec(args.seed, args.stream), refine=args.refine)
    meta = {"command": "simulate", "model": args.model, "n": args.n,
            "delta": delta, "seed": args.seed, "stream": args.stream,
            "x0": list(map(float, x0)),
            "alpha": list(map(float, theta.alpha)),
            "beta": list(map(float, theta.beta))}
    if args.output:
        with open(args.output, "w") as fh:
            write_path_csv(path, fh, meta=meta)
        log.info("wrote %s", args.output)
    else:
        write_path_csv(path, sys.stdout, meta=meta)
    return 0


def _truncate_opts(args) -> dict:
    opts = {}
    if getattr(args, "truncate_sigma", None) is not None:
        opts["truncate_sigma"] = args.truncate_sigma
    return opts


def _cmd_estimate(args) -> int:
    errors: list[str] = []
    model = _resolve_model(args.model, _truncate_opts(args), errors)
    psi = _psi_from_args(args, errors)
    if args.method not in ("qmle", "bridge", "lasso", "disjoint"):
        errors.append("method must be one of qmle, bridge, lasso, disjoint")
    if args.zero_tol < 0:
        errors.append("zero-tol must be nonnegative")
    if errors:
        return _fail_config(errors)

    data = load_series_csv(args.input, delta=args.delta)
    init = None
    if args.init:
        vals = _parse_float_list(args.init)
        if len(vals) != model.p1 + model.p2:
            return _fail_config([f"init must have {model.p1 + model.p2} entries"])
        init = ParamVector(vals[:model.p1], vals[model.p1:])

    rng = RngSpec(args.seed, 0).generator()
    fit0 = qmle_fit(model, data, init=init, method=args.qmle_method, rng=rng)
    out = {
        "theta_hat": {"alpha": fit0.theta_hat.alpha.tolist(),
                      "beta": fit0.theta_hat.beta.tolist()},
        "objective": fit0.objective,
        "curvature": fit0.curvature.ravel().tolist(),
        "converged": fit0.converged,
        "gradient_norm": fit0.gradient_norm,
        "pd_repaired": fit0.pd_repaired,
        "method": args.method,
        "seed": args.seed,
        "config": {"input": args.input, "model": args.model,
                   "method": args.method, "delta": data.delta,
                   "qmle_method": args.qmle_method,
                   "zero_tol": args.zero_tol, "seed": args.seed},
    }

    if args.method != "qmle":
        if args.method == "lasso":
            psi = PenaltyConfig(**{**psi.as_dict(), "q1": 1.0, "q2": 1.0})
        w = adaptive_weights(fit0.theta_hat, psi)
        if args.method == "disjoint":
            p1 = model.p1
            res = disjoint_fit(fit0.theta_hat.alpha, fit0.theta_hat.beta,
                               fit0.curvature[:p1, :p1], fit0.curvature[p1:, p1:],
                               w, psi, model.bounds_alpha, model.bounds_beta)
            theta, act_a, act_b = res.theta_hat, res.active_alpha, res.active_beta
            objective = res.objective_alpha + res.objective_beta
        else:
            res = bridge_fit(fit0.theta_hat, fit0.curvature, w, psi,
                             model.bounds_concat())
            theta, act_a, act_b = res.theta_hat, res.active_alpha, res.active_beta
            objective = res.objective
        if args.zero_tol > 0:
            alpha = np.where(np.abs(theta.alpha) <= args.zero_tol, 0.0, theta.alpha)
            beta = np.where(np.abs(theta.beta) <= args.zero_tol, 0.0, theta.beta)
            theta = ParamVector(alpha, beta)
            act_a = tuple(int(i) for i in np.nonzero(theta.alpha)[0])
            act_b = tuple(int(i) for i in np.nonzero(theta.beta)[0])
        out["theta_hat"] = {"alpha": theta.alpha.tolist(),
                            "beta": theta.beta.tolist()}
        out["objective"] = objective
        out["active_alpha"] = list(act_a)
        out["active_beta"] = list(act_b)
        out["psi"] = psi.as_dict()

    text = json.dumps(out, indent=2)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def _cmd_tune(args) -> int:
    errors: list[str] = []
    model = _resolve_model(args.model, _truncate_opts(args), errors)
    psi0 = None
    if args.psi0:
        pairs = {}
        for item in args.psi0.split(","):
            if "=" not in item:
                errors.append(f"psi0 entries must look like key=value, got {item!r}")
                continue
            k, v = item.split("=", 1)
            try:
                pairs[k.strip()] = float(v)
            except ValueError:
                errors.append(f"psi0.{k.strip()} must be a number")
        if not errors:
            psi0 = _psi_from_dict(pairs, errors)
    else:
        psi0 = PenaltyConfig(q1=0.9, q2=0.9, lambda0=2.0, gamma0=2.0,
                             delta1=1.0, delta2=1.0)
    if args.eps <= 0 and not np.isinf(args.eps):
        errors.append("eps must be positive")
    if args.max_iter < 1:
        errors.append("max-iter must be at least 1")
    if args.lags < 1:
        errors.append("lags must be at least 1")
    if errors:
        return _fail_config(errors)

    data = load_series_csv(args.input, delta=args.delta)
    rng = RngSpec(args.seed, 0).generator()
    result = tune(model, data, psi0, space=DEFAULT_PSI_SPACE, eps=args.eps,
                  max_iter=args.max_iter, lags=args.lags,
                  acf_convention=args.acf_convention,
                  qmle_method=args.qmle_method, rng=rng)
    out = {
        "psi_star": result.psi_star.as_dict(),
        "score": result.score,
        "converged": result.converged,
        "iterations": result.iterations,
        "trace": [{"psi": p, "score": s} for p, s in result.trace],
        "theta_hat": {
            "alpha": result.best_fit.theta_hat.alpha.tolist(),
            "beta": result.best_fit.theta_hat.beta.tolist(),
        },
        "seed": args.seed,
        "config": {"input": args.input, "model": args.model,
                   "psi0": psi0.as_dict(), "eps": args.eps,
                   "max_iter": args.max_iter, "lags": args.lags,
                   "acf_convention": args.acf_convention,
                   "delta": data.delta, "seed": args.seed},
    }
    text = json.dumps(out, indent=2)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def _load_json_config(path: str, errors: list[str]) -> dict | None:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        errors.append(f"config file not found: {path}")
        return None
    except json.JSONDecodeError as exc:
        errors.append(f"config file is not valid JSON: {exc}")
        return None
    if not isinstance(cfg, dict):
        errors.append("config file must contain a JSON object")
        return None
    return cfg


def _mc_config_from_file(path: str, args, errors: list[str]) -> McConfig | None:
    cfg = _load_json_config(path, errors)
    if cfg is None:
        return None
    _check_schema(cfg, MC_SCHEMA, errors, required=("model", "n", "N"))
    if errors:
        return None

    model = _resolve_model(cfg["model"], cfg.get("model_options", {}), errors)
    if model is None:
        return None
    theta = _theta_from_config(model, cfg.get("truth"), errors)
    psi0 = _psi_from_dict(cfg.get("psi0", {}), errors)
    methods = tuple(cfg.get("methods", ["bridge"]))
    for m in methods:
        if m not in ("bridge", "lasso", "qmle", "disjoint"):
            errors.append(f"methods contains unknown method {m!r}")
    delta_rule = cfg.get("delta_rule", "cuberoot")
    delta = None
    if isinstance(delta_rule, str):
        if delta_rule != "cuberoot":
            errors.append("delta_rule must be 'cuberoot' or a positive number")
    elif delta_rule <= 0:
        errors.append("delta_rule must be 'cuberoot' or a positive number")
    else:
        delta = float(delta_rule)
    if cfg.get("n", 1) < 1:
        errors.append("n must be at least 1")
    if cfg.get("N", 1) < 1:
        errors.append("N must be at least 1")
    if cfg.get("acf_convention", "paper") not in ("paper", "standard"):
        errors.append("acf_convention must be 'paper' or 'standard'")
    if errors or theta is None or psi0 is None:
        return None

    x0 = np.asarray(cfg["x0"], dtype=float) if "x0" in cfg else None
    threads = args.threads if args.threads is not None else cfg.get("threads", 1)
    return McConfig(
        model=cfg["model"],
        theta_true=theta,
        mask=model.reference_mask,
        n=int(cfg["n"]),
        N=int(cfg["N"]),
        delta=delta,
        methods=methods,
        psi0=psi0,
        tune=bool(cfg.get("tune", False)),
        seed=int(args.seed if args.seed is not None else cfg.get("seed", 0)),
        x0=x0,
        threads=int(threads),
        qmle_method=cfg.get("qmle_method", "lbfgsb"),
        acf_convention=cfg.get("acf_convention", "paper"),
        lags=int(cfg.get("lags", 10)),
        zero_tol=float(cfg.get("zero_tol", 0.0)),
        sim_refine=int(cfg.get("sim_refine", 1)),
        max_redraws=int(cfg.get("max_redraws", 5)),
        tune_eps=float(cfg.get("tune_eps", 1e-4)),
        tune_max_iter=int(cfg.get("tune_max_iter", 100)),
        model_options=cfg.get("model_options", {}),
    )


def _cmd_mc(args) -> int:
    errors: list[str] = []
    cfg = _mc_config_from_file(args.config, args, errors)
    if cfg is None:
        return _fail_config(errors or ["invalid configuration"])
    outdir = args.output_dir or _json_value(args.config, "output_dir") or "."
    summary = run_mc(cfg)
    meta = _embeddable(_mc_meta(cfg))
    hashes = write_mc_outputs(summary, outdir, meta=meta)
    log.info("mc run complete: %s", json.dumps(hashes))
    print(json.dumps({"output_dir": outdir, "hashes": hashes,
                      "n_effective": summary.n_effective,
                      "failed_replicates": summary.failed_replicates}))
    return 0


def _json_value(path, key):
    try:
        with open(path) as fh:
            return json.load(fh).get(key)
    except Exception:
        return None


def _mc_meta(cfg: McConfig) -> dict:
    return {
        "model": cfg.model,
        "truth": {"alpha": cfg.theta_true.alpha.tolist(),
                  "beta": cfg.theta_true.beta.tolist()},
        "n": cfg.n,
        "N": cfg.N,
        "delta": cfg.resolved_delta(),
        "methods": list(cfg.methods),
        "psi0": cfg.psi0.as_dict(),
        "tune": cfg.tune,
        "seed": cfg.seed,
        "x0": None if cfg.x0 is None else list(map(float, cfg.x0)),
        "zero_tol": cfg.zero_tol,
        "lags": cfg.lags,
        "acf_convention": cfg.acf_convention,
        "qmle_method": cfg.qmle_method,
        "sim_refine": cfg.sim_refine,
    }


def _cmd_compare(args) -> int:
    errors: list[str] = []
    cfg = _mc_config_from_file(args.config, args, errors)
    if cfg is None:
        return _fail_config(errors or ["invalid configuration"])
    outdir = args.output_dir or _json_value(args.config, "output_dir") or "."
    summaries = compare_joint_disjoint(cfg)
    meta = _embeddable(_mc_meta(cfg))
    all_hashes = {}
    for label, summary in summaries.items():
        sub = os.path.join(outdir, label)
        all_hashes[label] = write_mc_outputs(summary, sub, meta={**meta, "arm": label})
    print(json.dumps({"output_dir": outdir, "hashes": all_hashes}))
    return 0


def _cmd_predict(args) -> int:
    errors: list[str] = []
    cfg_raw = _load_json_config(args.config, errors)
    if cfg_raw is not None:
        _check_schema(cfg_raw, PREDICT_SCHEMA, errors,
                      required=("model", "input", "delta", "train_n"))
    if errors:
        return _fail_config(errors)
    psi0 = _psi_from_dict(cfg_raw.get("psi0", {
        "q1": 0.9, "q2": 0.9, "lambda0": 10.0, "gamma0": 10.0,
        "delta1": 2.5, "delta2": 2.5}), errors)
    methods = tuple(cfg_raw.get("methods", ["bridge", "lasso", "qmle"]))
    for m in methods:
        if m not in ("bridge", "lasso", "qmle"):
            errors.append(f"methods contains unsupported method {m!r}")
    if errors or psi0 is None:
        return _fail_config(errors)

    cfg = PredictConfig(
        model=cfg_raw["model"],
        delta=float(cfg_raw["delta"]),
        train_n=int(cfg_raw["train_n"]),
        methods=methods,
        psi0=psi0,
        N=int(cfg_raw.get("N", 1000)),
        seed=int(args.seed if args.seed is not None else cfg_raw.get("seed", 0)),
        zero_tol=float(cfg_raw.get("zero_tol", 1e-3)),
        qmle_method=cfg_raw.get("qmle_method", "lbfgsb"),
        model_options=cfg_raw.get("model_options", {}),
    )
    data = load_series_csv(cfg_raw["input"], delta=cfg.delta)
    outdir = args.output_dir or cfg_raw.get("output_dir") or "."
    os.makedirs(outdir, exist_ok=True)
    reports = run_predict(cfg, data)

    meta = _embeddable({k: v for k, v in cfg_raw.items()})
    meta["seed"] = cfg.seed
    rows = []
    hashes = {}
    for method, rep in reports.items():
        for c in range(rep.mse.size):
            rows.append([method, f"X{c + 1}", float(rep.mse[c])])
        hashes.update(write_bands_csv(rep, outdir, meta=meta))
    from .experiments import _write_csv

    hashes["predict_mse.csv"] = _write_csv(outdir, "predict_mse.csv",
                                           ["method", "series", "mse"], rows, meta)
    with open(os.path.join(outdir, "run_meta.json"), "w") as fh:
        json.dump({"config": meta, "hashes": hashes}, fh, indent=2, sort_keys=True)
    print(json.dumps({"output_dir": outdir,
                      "mse": {m: r.mse.tolist() for m, r in reports.items()}}))
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdebridge",
        description="Adaptive Bridge-type penalized estimation for ergodic diffusions",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command")

    def add_common(p, seed_default=0):
        p.add_argument("--seed", type=int, default=seed_default)
        p.add_argument("--log-level", default="WARNING")
        p.add_argument("--output-dir", default=None)

    p = sub.add_parser("simulate", help="simulate an Euler path, emit CSV")
    add_common(p)
    p.add_argument("--model", required=True, choices=model_names())
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--delta", type=float, default=None,
                   help="observation step; defaults to n^(-1/3)")
    p.add_argument("--alpha", default=None, help="comma-separated drift parameters")
    p.add_argument("--beta", default=None, help="comma-separated diffusion parameters")
    p.add_argument("--x0", default=None, help="comma-separated initial state")
    p.add_argument("--stream", type=int, default=0)
    p.add_argument("--refine", type=int, default=1)
    p.add_argument("--truncate-sigma", type=float, default=None)
    p.add_argument("--output", default=None)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("estimate", help="fit a model to a CSV path")
    add_common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--model", required=True, choices=model_names())
    p.add_argument("--method", default="qmle")
    p.add_argument("--qmle-method", default="lbfgsb",
                   choices=("simplex", "lbfgsb"))
    p.add_argument("--init", default=None)
    for name in PSI_FIELDS:
        p.add_argument(f"--{name}", type=float, default=None)
    p.add_argument("--zero-tol", type=float, default=0.0)
    p.add_argument("--truncate-sigma", type=float, default=None)
    p.add_argument("--output", default=None)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("tune", help="select tuning parameters from residuals")
    add_common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--model", required=True, choices=model_names())
    p.add_argument("--psi0", default=None,
                   help="comma-separated key=value pairs, e.g. q1=0.9,lambda0=2")
    p.add_argument("--eps", type=float, default=1e-4)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--lags", type=int, default=10)
    p.add_argument("--acf-convention", default="paper", choices=("paper", "standard"))
    p.add_argument("--qmle-method", default="lbfgsb", choices=("simplex", "lbfgsb"))
    p.add_argument("--truncate-sigma", type=float, default=None)
    p.add_argument("--output", default=None)
    p.set_defaults(func=_cmd_tune)

    for name, fn, help_text in (
        ("mc", _cmd_mc, "Monte Carlo study from a JSON config"),
        ("predict", _cmd_predict, "bootstrap prediction study from a JSON config"),
        ("compare", _cmd_compare, "joint vs disjoint comparison from a JSON config"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--log-level", default="WARNING")
        p.add_argument("--output-dir", default=None)
        p.set_defaults(func=fn)

    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    if not hasattr(args, "func"):
        parser.print_usage(sys.stderr)
        return 2

    logging.basicConfig(level=getattr(logging, args.log_level.upper(), logging.WARNING))
    try:
        return args.func(args)
    except SdeBridgeError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
