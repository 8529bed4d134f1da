"""Residual-based selection of the penalty tuning vector.

Standardized one-step residuals are approximately iid standard normal under
a correctly specified model, so tuning parameters are scored by how far the
fitted residuals deviate from white noise: a Ljung-Box portmanteau statistic
per component (summed) plus the worst per-component Kolmogorov-Smirnov
distance to the standard normal.  The search loop refits the Bridge
estimator at each candidate psi, rescores its residuals, and stops when the
score stabilizes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from .bridge import PenaltyConfig, adaptive_weights, bridge_fit
from .errors import DegenerateSeriesError, SingularDiffusionError, TuningError
from .model import ParamVector, SdeModel
from .qmle import qmle_fit
from .simulate import SamplePath

PSI_KEYS = ("q1", "q2", "lambda0", "gamma0", "delta1", "delta2")

# search box spanned by the tuning ranges observed in practice
DEFAULT_PSI_SPACE = np.array([
    [0.01, 1.0],   # q1
    [0.01, 1.0],   # q2
    [0.1, 10.0],   # lambda0
    [0.1, 10.0],   # gamma0
    [0.1, 2.0],    # delta1
    [0.1, 2.0],    # delta2
])
DELTA_MARGIN = 1e-3


@dataclass
class ResidualSeries:
    """Standardized residuals, one row per increment."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if not np.all(np.isfinite(self.values)):
            raise ValueError("residuals contain non-finite entries")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]


@dataclass
class TuneResult:
    psi_star: PenaltyConfig
    score: float
    trace: list = field(default_factory=list)
    converged: bool = False
    iterations: int = 0
    best_fit: object = None
    initial_fit: object = None


def residuals(model: SdeModel, path: SamplePath, theta: ParamVector) -> ResidualSeries:
    """r_i = delta^(-1/2) Sigma^(-1/2)(X_i, beta) (X_{i+1} - X_i - delta b(X_i, alpha)).

    Sigma^(-1/2) is the symmetric inverse square root (eigendecomposition);
    for diagonal noise this reduces to dividing by |sigma_ii|.
    """
    x = path.values[:-1]
    dx = path.increments()
    dt = path.delta
    b = model.drift_rows(x, theta.alpha)
    innov = dx - dt * b
    sq_dt = np.sqrt(dt)

    if model.diagonal_noise and model.sigma_diag is not None:
        s = np.abs(model.sigma_diag_rows(x, theta.beta))
        s2 = s * s
        bad = s2.min(axis=1) < 1e-12 * s2.max(axis=1)
        if np.any(bad) or np.any(s2.max(axis=1) == 0.0):
            raise SingularDiffusionError(int(np.argmax(bad)))
        return ResidualSeries(innov / (s * sq_dt))

    if not model.state_dependent_diffusion:
        sig = np.asarray(model.diffusion(x[0], theta.beta), dtype=float)
        sigma = sig @ sig.T
        w, v = np.linalg.eigh(sigma)
        if w[0] < 1e-12 * w[-1] or w[-1] <= 0.0:
            raise SingularDiffusionError(0)
        inv_sqrt = (v / np.sqrt(w)) @ v.T
        return ResidualSeries(innov @ inv_sqrt.T / sq_dt)

    sdiff = model.diffusion_rows(x, theta.beta)
    sigma = np.einsum("nij,nkj->nik", sdiff, sdiff)
    w, v = np.linalg.eigh(sigma)
    bad = (w[:, 0] < 1e-12 * w[:, -1]) | (w[:, -1] <= 0.0)
    if np.any(bad):
        raise SingularDiffusionError(int(np.argmax(bad)))
    inv_sqrt = np.einsum("nik,nk,njk->nij", v, 1.0 / np.sqrt(w), v)
    out = np.einsum("nij,nj->ni", inv_sqrt, innov) / sq_dt
    return ResidualSeries(out)


def sample_acf(series: np.ndarray, lags: int, convention: str = "paper") -> np.ndarray:
    """Autocorrelations at lags 1..lags.

    ``paper`` uses a 1/(n-j) numerator against a 1/n denominator;
    ``standard`` uses 1/n in both (the usual estimator).
    """
    r = np.asarray(series, dtype=float).ravel()
    n = r.size
    if lags < 1 or n <= lags:
        raise ValueError("need n > lags >= 1")
    centered = r - r.mean()
    denom = float(centered @ centered) / n
    if denom == 0.0:
        raise DegenerateSeriesError("series has zero sample variance")
    out = np.empty(lags)
    for j in range(1, lags + 1):
        num = float(centered[:-j] @ centered[j:])
        num /= (n - j) if convention == "paper" else n
        out[j - 1] = num / denom
    return out


def ljung_box(series: np.ndarray, ell: int, convention: str = "paper") -> float:
    """Q_ell = n (n+2) sum_j rho_j^2 / (n - j)."""
    r = np.asarray(series, dtype=float).ravel()
    n = r.size
    rho = sample_acf(r, ell, convention)
    weights = 1.0 / (n - np.arange(1, ell + 1))
    return float(n * (n + 2.0) * np.sum(rho * rho * weights))


def ks_gaussian(series: np.ndarray) -> float:
    """sup_x |F_n(x) - Phi(x)|, evaluated exactly at the order statistics."""
    r = np.sort(np.asarray(series, dtype=float).ravel())
    n = r.size
    if n < 1:
        raise ValueError("need at least one observation")
    cdf = ndtr(r)
    upper = np.max(np.arange(1, n + 1) / n - cdf)
    lower = np.max(cdf - np.arange(0, n) / n)
    return float(max(upper, lower))


def combined_score(res: ResidualSeries, ell: int = 10,
                   convention: str = "paper") -> float:
    """Sum of per-component Ljung-Box statistics plus the worst
    per-component KS distance to the standard normal."""
    q_total = 0.0
    ks_worst = 0.0
    for c in range(res.dim):
        col = res.values[:, c]
        q_total += ljung_box(col, ell, convention)
        ks_worst = max(ks_worst, ks_gaussian(col))
    return q_total + ks_worst


def _project_psi(vec: np.ndarray, space: np.ndarray) -> np.ndarray:
    v = np.clip(np.asarray(vec, dtype=float), space[:, 0], space[:, 1])
    # adaptive-weight rate condition: delta_i > 1 - q_i
    for qi, di in ((0, 4), (1, 5)):
        need = 1.0 - v[qi] + DELTA_MARGIN
        if v[di] < need:
            v[di] = min(need, space[di, 1])
        if v[di] < 1.0 - v[qi] + DELTA_MARGIN / 2:
            v[qi] = max(v[qi], 1.0 - v[di] + DELTA_MARGIN)
    return v


def _psi_to_config(vec: np.ndarray, template: PenaltyConfig) -> PenaltyConfig:
    return PenaltyConfig(
        q1=float(vec[0]), q2=float(vec[1]),
        lambda0=float(vec[2]), gamma0=float(vec[3]),
        delta1=float(vec[4]), delta2=float(vec[5]),
        weight_floor=template.weight_floor, weight_cap=template.weight_cap,
    )


def psi_as_vector(cfg: PenaltyConfig) -> np.ndarray:
    return np.array([cfg.q1, cfg.q2, cfg.lambda0, cfg.gamma0, cfg.delta1, cfg.delta2])


def tune(
    model: SdeModel,
    path: SamplePath,
    psi0: PenaltyConfig,
    space: np.ndarray | None = None,
    eps: float = 1e-4,
    max_iter: int = 100,
    lags: int = 10,
    acf_convention: str = "paper",
    theta_init: ParamVector | None = None,
    curvature: np.ndarray | None = None,
    qmle_method: str = "lbfgsb",
    rng: np.random.Generator | None = None,
) -> TuneResult:
    """Iterative tuning-parameter selection.

    Repeats: fit Bridge at the current psi, residualize, score; a simplex
    step over the projected search box proposes the next psi; the loop stops
    when consecutive scores differ by less than ``eps`` (or at ``max_iter``).
    The best-scoring psi visited is returned.  The initial estimator and its
    curvature are computed once (or can be passed in) and reused by every
    candidate fit.
    """
    space = DEFAULT_PSI_SPACE if space is None else np.asarray(space, dtype=float)
    if space.shape != (6, 2):
        raise ValueError("psi search space must have shape (6, 2)")

    fit0 = None
    if theta_init is None or curvature is None:
        fit0 = qmle_fit(model, path, method=qmle_method, rng=rng)
        theta_init = fit0.theta_hat
        curvature = fit0.curvature
    bounds = model.bounds_concat()

    trace: list[tuple[dict, float]] = []
    best = {"score": np.inf, "psi": None, "fit": None}

    def evaluate(vec: np.ndarray) -> float:
        vec = _project_psi(vec, space)
        cfg = _psi_to_config(vec, psi0)
        try:
            w = adaptive_weights(theta_init, cfg)
            fit = bridge_fit(theta_init, curvature, w, cfg, bounds)
            res = residuals(model, path, fit.theta_hat)
            score = combined_score(res, lags, acf_convention)
        except Exception:
            trace.append((cfg.as_dict(), float("inf")))
            return np.inf
        trace.append((cfg.as_dict(), score))
        if score < best["score"]:
            best.update(score=score, psi=vec.copy(), fit=fit)
        return score

    x0 = _project_psi(psi_as_vector(psi0), space)
    s_prev = evaluate(x0)
    converged = bool(np.isinf(eps))
    iterations = 0

    if not converged:
        # Nelder-Mead over the box; modest initial steps (5% of each range)
        # keep the search local to the supplied psi0, which is the intended
        # fine-adjustment behavior of the procedure
        steps = 0.05 * (space[:, 1] - space[:, 0])
        simplex = [x0]
        fvals = [s_prev]
        for i in range(6):
            xi = x0.copy()
            xi[i] = xi[i] + steps[i] if xi[i] + steps[i] <= space[i, 1] else xi[i] - steps[i]
            simplex.append(_project_psi(xi, space))
            fvals.append(evaluate(simplex[-1]))
        simplex = np.array(simplex)
        fvals = np.array(fvals)

        for iterations in range(1, max_iter + 1):
            order = np.argsort(fvals, kind="stable")
            simplex, fvals = simplex[order], fvals[order]
            centroid = simplex[:-1].mean(axis=0)
            # reflect / expand / contract / shrink
            xr = _project_psi(centroid + (centroid - simplex[-1]), space)
            fr = evaluate(xr)
            if fr < fvals[0]:
                xe = _project_psi(centroid + 2.0 * (centroid - simplex[-1]), space)
                fe = evaluate(xe)
                simplex[-1], fvals[-1] = (xe, fe) if fe < fr else (xr, fr)
            elif fr < fvals[-2]:
                simplex[-1], fvals[-1] = xr, fr
            else:
                xc = _project_psi(centroid + 0.5 * (simplex[-1] - centroid), space)
                fc = evaluate(xc)
                if fc < fvals[-1]:
                    simplex[-1], fvals[-1] = xc, fc
                else:
                    for i in range(1, len(simplex)):
                        simplex[i] = _project_psi(
                            simplex[0] + 0.5 * (simplex[i] - simplex[0]), space)
                        fvals[i] = evaluate(simplex[i])
            s_cur = float(np.min(fvals))
            if abs(s_cur - s_prev) < eps:
                converged = True
                break
            s_prev = s_cur

    if best["psi"] is None:
        raise TuningError("every candidate psi failed to produce a valid fit",
                          trace=trace)
    return TuneResult(
        psi_star=_psi_to_config(best["psi"], psi0),
        score=float(best["score"]),
        trace=trace,
        converged=converged,
        iterations=iterations,
        best_fit=best["fit"],
        initial_fit=fit0,
    )
