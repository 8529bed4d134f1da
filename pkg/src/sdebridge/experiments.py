"""Monte Carlo and prediction experiment harnesses.

Replicates are pure functions of (config, replicate index): each replicate
owns disjoint random streams for its path (one per redraw attempt) and its
optimizer init, and aggregation reduces results in replicate order, so runs
are bit-reproducible regardless of how many workers execute them.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .bridge import (
    PenaltyConfig,
    adaptive_weights,
    bridge_fit,
    disjoint_fit,
)
from .errors import CsvParseError, ExplosionError, RunError, SdeBridgeError
from .model import ParamVector, SdeModel, SparsityMask, get_model
from .qmle import qmle_fit
from .simulate import RngSpec, SamplePath, euler_simulate, high_freq_grid
from .tuning import psi_as_vector, tune

# stream layout per replicate: attempts 0..(spacing-2) are path redraws,
# the last slot seeds the optimizer-init jitter
_STREAM_SPACING = 64
_INIT_SLOT = _STREAM_SPACING - 1

KNOWN_METHODS = ("bridge", "lasso", "qmle", "disjoint")


@dataclass
class McConfig:
    """Configuration of one Monte Carlo study."""

    model: str
    theta_true: ParamVector
    n: int
    N: int
    mask: SparsityMask | None = None
    delta: float | None = None  # None means the n^(-1/3) rule
    methods: tuple[str, ...] = ("bridge",)
    psi0: PenaltyConfig = field(default_factory=PenaltyConfig)
    tune: bool = False
    seed: int = 0
    x0: np.ndarray | None = None
    threads: int = 1
    qmle_method: str = "lbfgsb"
    qmle_max_iter: int | None = None
    acf_convention: str = "paper"
    lags: int = 10
    zero_tol: float = 0.0
    sim_refine: int = 1
    max_redraws: int = 5
    tune_eps: float = 1e-4
    tune_max_iter: int = 100
    zero_cross_blocks: bool = False
    model_options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be at least 1")
        if not self.methods:
            raise ValueError("methods must be nonempty")
        unknown = [m for m in self.methods if m not in KNOWN_METHODS]
        if unknown:
            raise ValueError(f"unknown methods: {unknown}")
        self.methods = tuple(self.methods)

    def resolved_delta(self) -> float:
        return self.delta if self.delta is not None else high_freq_grid(self.n)


@dataclass
class McSummary:
    """Aggregated replicate results for one Monte Carlo run."""

    model: str
    param_names: tuple[str, ...]
    true_values: np.ndarray
    methods: tuple[str, ...]
    n: int
    delta: float
    n_requested: int
    n_effective: int
    failed_replicates: int
    exploded_redraws: int
    estimates: dict[str, np.ndarray]       # method -> (n_effective, p)
    tuned_psi: np.ndarray | None = None    # (n_effective, 6) when tuned
    zero_tol: float = 0.0

    def mean(self, method: str) -> np.ndarray:
        return self.estimates[method].mean(axis=0)

    def std_err(self, method: str) -> np.ndarray:
        est = self.estimates[method]
        return est.std(axis=0, ddof=1) if est.shape[0] > 1 else np.zeros(est.shape[1])

    def mse(self, method: str) -> np.ndarray:
        err = self.estimates[method] - self.true_values
        return (err * err).mean(axis=0)

    def zero_frequency(self, method: str) -> np.ndarray:
        return (np.abs(self.estimates[method]) <= self.zero_tol).mean(axis=0)


def _simulate_replicate(model, cfg: McConfig, idx: int):
    delta = cfg.resolved_delta()
    x0 = cfg.x0 if cfg.x0 is not None else (
        model.reference_x0 if model.reference_x0 is not None else np.ones(model.dim_state))
    exploded = 0
    for attempt in range(cfg.max_redraws + 1):
        rng = RngSpec(cfg.seed, _STREAM_SPACING * idx + attempt)
        try:
            return euler_simulate(model, cfg.theta_true, x0, cfg.n, delta, rng,
                                  refine=cfg.sim_refine), exploded
        except ExplosionError:
            exploded += 1
    return None, exploded


def _run_replicate(cfg: McConfig, idx: int) -> dict:
    model = get_model(cfg.model, **cfg.model_options)
    out = {"idx": idx, "failed": False, "exploded": 0, "estimates": {},
           "tuned_psi": None}
    path, exploded = _simulate_replicate(model, cfg, idx)
    out["exploded"] = exploded
    if path is None:
        out["failed"] = True
        return out

    init_rng = RngSpec(cfg.seed, _STREAM_SPACING * idx + _INIT_SLOT).generator()
    try:
        fit0 = qmle_fit(model, path, method=cfg.qmle_method, rng=init_rng,
                        max_iter=cfg.qmle_max_iter)
    except SdeBridgeError:
        out["failed"] = True
        return out

    theta_tilde = fit0.theta_hat
    G = fit0.curvature
    p1 = model.p1
    if cfg.zero_cross_blocks:
        G = G.copy()
        G[:p1, p1:] = 0.0
        G[p1:, :p1] = 0.0
    bounds = model.bounds_concat()

    try:
        for method in cfg.methods:
            if method == "qmle":
                out["estimates"][method] = theta_tilde.concat()
            elif method == "bridge":
                if cfg.tune:
                    tr = tune(model, path, cfg.psi0, eps=cfg.tune_eps,
                              max_iter=cfg.tune_max_iter, lags=cfg.lags,
                              acf_convention=cfg.acf_convention,
                              theta_init=theta_tilde, curvature=G)
                    out["estimates"][method] = tr.best_fit.theta_hat.concat()
                    out["tuned_psi"] = psi_as_vector(tr.psi_star)
                else:
                    w = adaptive_weights(theta_tilde, cfg.psi0)
                    fit = bridge_fit(theta_tilde, G, w, cfg.psi0, bounds)
                    out["estimates"][method] = fit.theta_hat.concat()
            elif method == "lasso":
                lcfg = replace(cfg.psi0, q1=1.0, q2=1.0)
                w = adaptive_weights(theta_tilde, lcfg)
                fit = bridge_fit(theta_tilde, G, w, lcfg, bounds)
                out["estimates"][method] = fit.theta_hat.concat()
            elif method == "disjoint":
                w = adaptive_weights(theta_tilde, cfg.psi0)
                res = disjoint_fit(theta_tilde.alpha, theta_tilde.beta,
                                   G[:p1, :p1], G[p1:, p1:], w, cfg.psi0,
                                   model.bounds_alpha, model.bounds_beta)
                out["estimates"][method] = res.theta_hat.concat()
    except SdeBridgeError:
        out["failed"] = True
        out["estimates"] = {}
    return out


def _replicate_star(args):
    return _run_replicate(*args)


def run_mc(cfg: McConfig) -> McSummary:
    """Simulate -> initial fit -> penalized fits, aggregated over replicates.

    Individual replicate failures are skipped and counted; more than 20%
    failures aborts the run.
    """
    model = get_model(cfg.model, **cfg.model_options)
    jobs = [(cfg, idx) for idx in range(cfg.N)]
    if cfg.threads > 1 and cfg.N > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(_replicate_star, jobs, chunksize=1))
    else:
        results = [_run_replicate(cfg, idx) for idx in range(cfg.N)]

    results.sort(key=lambda r: r["idx"])
    good = [r for r in results if not r["failed"]]
    failed = cfg.N - len(good)
    if failed > 0.2 * cfg.N:
        raise RunError(f"{failed} of {cfg.N} replicates failed")
    if not good:
        raise RunError("all replicates failed")

    estimates = {
        m: np.vstack([r["estimates"][m] for r in good]) for m in cfg.methods
    }
    tuned = None
    if cfg.tune and "bridge" in cfg.methods:
        rows = [r["tuned_psi"] for r in good if r["tuned_psi"] is not None]
        tuned = np.vstack(rows) if rows else None

    return McSummary(
        model=cfg.model,
        param_names=model.param_names,
        true_values=cfg.theta_true.concat(),
        methods=cfg.methods,
        n=cfg.n,
        delta=cfg.resolved_delta(),
        n_requested=cfg.N,
        n_effective=len(good),
        failed_replicates=failed,
        exploded_redraws=int(sum(r["exploded"] for r in results)),
        estimates=estimates,
        tuned_psi=tuned,
        zero_tol=cfg.zero_tol,
    )


def compare_joint_disjoint(cfg: McConfig) -> dict[str, McSummary]:
    """Joint vs disjoint penalized fits on matched replicates.

    Both methods consume the same simulated paths and the same initial
    estimates within each replicate, so the comparison is seed-matched by
    construction.
    """
    paired = replace(cfg, methods=("bridge", "disjoint"), tune=False)
    summary = run_mc(paired)
    out = {}
    for label, method in (("joint", "bridge"), ("disjoint", "disjoint")):
        out[label] = McSummary(
            model=summary.model,
            param_names=summary.param_names,
            true_values=summary.true_values,
            methods=(method,),
            n=summary.n,
            delta=summary.delta,
            n_requested=summary.n_requested,
            n_effective=summary.n_effective,
            failed_replicates=summary.failed_replicates,
            exploded_redraws=summary.exploded_redraws,
            estimates={method: summary.estimates[method]},
            zero_tol=summary.zero_tol,
        )
    return out


# ---------------------------------------------------------------------------
# Parametric bootstrap prediction
# ---------------------------------------------------------------------------

BAND_LEVELS = (0.025, 0.10, 0.90, 0.975)


@dataclass
class PredictReport:
    """Predictive MSE and pointwise quantile bands for one fitted model."""

    method: str
    mse: np.ndarray                   # (d,)
    bands: np.ndarray                 # (len(BAND_LEVELS), n_te, d)
    band_levels: tuple[float, ...] = BAND_LEVELS
    n_paths: int = 0
    exploded_redraws: int = 0


def _test_values(test_data, last_train_state, n_te, d):
    if isinstance(test_data, SamplePath):
        vals = test_data.values
        if vals.shape[0] == n_te + 1 and np.allclose(vals[0], last_train_state):
            vals = vals[1:]
    else:
        vals = np.atleast_2d(np.asarray(test_data, dtype=float))
    if vals.shape != (n_te, d):
        raise ValueError(f"test data must provide {n_te} observations of dimension {d}")
    return vals


def bootstrap_predict(
    model: SdeModel,
    theta_fit: ParamVector,
    last_train_state: np.ndarray,
    n_te: int,
    delta: float,
    N: int,
    test_data,
    seed: int = 0,
    max_redraws: int = 5,
) -> PredictReport:
    """Simulate N paths from the fitted model and score them on test data.

    MSE is averaged over both test times and simulated paths; bands are the
    pointwise empirical quantiles at the 80% and 95% levels.
    """
    last = np.asarray(last_train_state, dtype=float).ravel()
    d = model.dim_state
    test = _test_values(test_data, last, n_te, d)

    sims = np.empty((N, n_te, d))
    exploded = 0
    for k in range(N):
        path = None
        for attempt in range(max_redraws + 1):
            rng = RngSpec(seed, _STREAM_SPACING * k + attempt)
            try:
                path = euler_simulate(model, theta_fit, last, n_te, delta, rng)
                break
            except ExplosionError:
                exploded += 1
        if path is None:
            raise RunError(f"bootstrap path {k} exploded on every redraw")
        sims[k] = path.values[1:]

    err = sims - test[None, :, :]
    mse = (err * err).mean(axis=(0, 1))
    bands = np.quantile(sims, BAND_LEVELS, axis=0)
    return PredictReport(method="", mse=mse, bands=bands, n_paths=N,
                         exploded_redraws=exploded)


@dataclass
class PredictConfig:
    """Fit-then-bootstrap study on a single observed series."""

    model: str
    delta: float
    train_n: int
    methods: tuple[str, ...] = ("bridge", "lasso", "qmle")
    psi0: PenaltyConfig = field(default_factory=lambda: PenaltyConfig(
        q1=0.9, q2=0.9, lambda0=10.0, gamma0=10.0, delta1=2.5, delta2=2.5))
    N: int = 1000
    seed: int = 0
    zero_tol: float = 1e-3
    qmle_method: str = "lbfgsb"
    model_options: dict = field(default_factory=dict)


def _hard_threshold(theta: ParamVector, tol: float) -> ParamVector:
    a = np.where(np.abs(theta.alpha) <= tol, 0.0, theta.alpha)
    b = np.where(np.abs(theta.beta) <= tol, 0.0, theta.beta)
    return ParamVector(a, b)


def run_predict(cfg: PredictConfig, data: SamplePath) -> dict[str, PredictReport]:
    """Train/test split, per-method fit with hard thresholding, bootstrap."""
    if data.n <= cfg.train_n:
        raise ValueError("series too short for the requested training size")
    n_te = data.n - cfg.train_n
    train = SamplePath(times=data.times[: cfg.train_n + 1],
                       values=data.values[: cfg.train_n + 1],
                       delta=data.delta)
    test_values = data.values[cfg.train_n + 1:]
    last = data.values[cfg.train_n]

    model = get_model(cfg.model, **cfg.model_options)
    init_rng = RngSpec(cfg.seed, _INIT_SLOT).generator()
    fit0 = qmle_fit(model, train, method=cfg.qmle_method, rng=init_rng)
    theta_tilde, G = fit0.theta_hat, fit0.curvature
    bounds = model.bounds_concat()

    fitted: dict[str, ParamVector] = {}
    for method in cfg.methods:
        if method == "qmle":
            fitted[method] = theta_tilde
        elif method in ("bridge", "lasso"):
            pcfg = cfg.psi0 if method == "bridge" else replace(cfg.psi0, q1=1.0, q2=1.0)
            w = adaptive_weights(theta_tilde, pcfg)
            fitted[method] = bridge_fit(theta_tilde, G, w, pcfg, bounds).theta_hat
        else:
            raise ValueError(f"unsupported predict method {method!r}")
        fitted[method] = _hard_threshold(fitted[method], cfg.zero_tol)

    out = {}
    for method, theta in fitted.items():
        rep = bootstrap_predict(model, theta, last, n_te, cfg.delta, cfg.N,
                                test_values, seed=cfg.seed + 1)
        rep.method = method
        out[method] = rep
    return out


# ---------------------------------------------------------------------------
# CSV input/output
# ---------------------------------------------------------------------------


def load_series_csv(source, delta: float | None = None) -> SamplePath:
    """Read an equally spaced multivariate series from CSV.

    Accepts a header ``t,X1,...,Xd`` (delta inferred from the t column when
    not supplied) or ``date,<names...>`` (delta required).  ``#``-prefixed
    lines are skipped.  Ragged rows, non-numeric or missing cells, and files
    with fewer than 3 data rows raise CsvParseError with the line number.
    """
    close = False
    if isinstance(source, (str, os.PathLike)):
        fileobj = open(source, "r", newline="")
        close = True
    else:
        fileobj = source
    try:
        reader = csv.reader(fileobj)
        header = None
        line_no = 0
        rows = []
        times = []
        for raw in reader:
            line_no = reader.line_num
            if not raw or (raw[0].startswith("#")):
                continue
            if header is None:
                header = [c.strip() for c in raw]
                if len(header) < 2:
                    raise CsvParseError(line_no, "need a time/date column plus data columns")
                first = header[0].lower()
                if first not in ("t", "date"):
                    raise CsvParseError(line_no, "header must start with 't' or 'date'")
                has_time = first == "t"
                if not has_time and delta is None:
                    raise CsvParseError(line_no, "date-indexed files require an explicit delta")
                continue
            if len(raw) != len(header):
                raise CsvParseError(line_no, f"expected {len(header)} cells, found {len(raw)}")
            cells = [c.strip() for c in raw]
            if any(c == "" for c in cells):
                raise CsvParseError(line_no, "blank cell")
            data_cells = cells[1:] if not has_time else cells
            try:
                vals = [float(c) for c in data_cells]
            except ValueError:
                raise CsvParseError(line_no, "non-numeric cell") from None
            if has_time:
                times.append(vals[0])
                rows.append(vals[1:])
            else:
                rows.append(vals)
        if header is None:
            raise CsvParseError(line_no or 1, "empty file")
        if len(rows) < 3:
            raise CsvParseError(line_no, "need at least 3 data rows")
    finally:
        if close:
            fileobj.close()

    values = np.asarray(rows, dtype=float)
    if delta is None:
        delta = times[1] - times[0]
        if delta <= 0:
            raise CsvParseError(3, "time column is not increasing")
    times = delta * np.arange(values.shape[0])
    return SamplePath(times=times, values=values, delta=float(delta))


def _content_hash(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def _write_csv(outdir, filename, header, rows, meta: dict | None) -> str:
    buf = io.StringIO()
    if meta:
        buf.write("# " + json.dumps(meta, sort_keys=True, default=str) + "\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt_cell(c) for c in row) + "\n")
    text = buf.getvalue()
    path = os.path.join(outdir, filename)
    with open(path, "w") as fh:
        fh.write(text)
    return _content_hash(text)


def _fmt_cell(c) -> str:
    if isinstance(c, float):
        return format(c, ".17g")
    return str(c)


def write_mc_outputs(summary: McSummary, outdir: str, meta: dict | None = None) -> dict:
    """Write summary.csv / selection.csv / tuning.csv plus a JSON sidecar.

    Returns the mapping of file names to content hashes (also stored in the
    sidecar ``run_meta.json``).
    """
    os.makedirs(outdir, exist_ok=True)
    meta = dict(meta or {})
    hashes = {}

    rows = []
    for method in summary.methods:
        mean = summary.mean(method)
        se = summary.std_err(method)
        mse = summary.mse(method)
        for j, name in enumerate(summary.param_names):
            rows.append([method, name, float(summary.true_values[j]),
                         float(mean[j]), float(se[j]), float(mse[j])])
    hashes["summary.csv"] = _write_csv(
        outdir, "summary.csv",
        ["method", "param", "true_value", "mean", "std_err", "mse"], rows, meta)

    # zero coordinates are read off the truth vector
    zero_idx = [j for j, v in enumerate(summary.true_values) if v == 0.0]
    rows = []
    for method in summary.methods:
        freq = summary.zero_frequency(method)
        for j in zero_idx:
            rows.append([method, summary.param_names[j], float(freq[j])])
    hashes["selection.csv"] = _write_csv(
        outdir, "selection.csv", ["method", "param", "zero_frequency"], rows, meta)

    if summary.tuned_psi is not None and summary.tuned_psi.size:
        stats = []
        names = ("q1", "q2", "lambda0", "gamma0", "delta1", "delta2")
        t = summary.tuned_psi
        for i, name in enumerate(names):
            col = t[:, i]
            stats.append([name, float(col.min()),
                          float(np.quantile(col, 0.25)), float(np.median(col)),
                          float(col.mean()), float(np.quantile(col, 0.75)),
                          float(col.max()),
                          float(col.std(ddof=1)) if col.size > 1 else 0.0])
        hashes["tuning.csv"] = _write_csv(
            outdir, "tuning.csv",
            ["param", "min", "q25", "median", "mean", "q75", "max", "sd"],
            stats, meta)

    sidecar = {
        "config": meta,
        "n_effective": summary.n_effective,
        "failed_replicates": summary.failed_replicates,
        "exploded_redraws": summary.exploded_redraws,
        "hashes": hashes,
    }
    with open(os.path.join(outdir, "run_meta.json"), "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True, default=str)
    return hashes


def write_bands_csv(report: PredictReport, outdir: str, series_names=None,
                    meta: dict | None = None) -> dict:
    """One bands_<series>.csv per component: time index and quantile columns."""
    os.makedirs(outdir, exist_ok=True)
    n_levels, n_te, d = report.bands.shape
    names = series_names or [f"X{i + 1}" for i in range(d)]
    hashes = {}
    for c, name in enumerate(names):
        rows = []
        for i in range(n_te):
            rows.append([i + 1] + [float(report.bands[l, i, c]) for l in range(n_levels)])
        header = ["step"] + [f"q{100 * lv:g}" for lv in report.band_levels]
        fname = f"bands_{name}_{report.method}.csv" if report.method else f"bands_{name}.csv"
        hashes[fname] = _write_csv(outdir, fname, header, rows, meta)
    return hashes
