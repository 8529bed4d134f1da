"""Quasi-likelihood contrast for discretely observed diffusions and its
minimization, producing the initial (unpenalized) estimator and the
curvature matrix used by the penalized step.

The contrast is the Gaussian Euler contrast with coefficients evaluated at
the left endpoint of each increment:

    0.5 * sum_i [ log det Sigma(X_{i-1}, beta)
                  + (dX_i - delta b(X_{i-1}, alpha))' Sigma^{-1}(X_{i-1}, beta)
                    (dX_i - delta b(X_{i-1}, alpha)) / delta ]
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import EvaluationError, SingularDiffusionError
from .model import ParamVector, SdeModel
from .simulate import SamplePath

MAX_CONDITION = 1e12
# large-but-finite objective value outside the contrast's domain, so
# finite-difference machinery never sees inf - inf
PENALTY_VALUE = 1e12


@dataclass
class FitResult:
    """Outcome of an unpenalized contrast minimization."""

    theta_hat: ParamVector
    objective: float
    curvature: np.ndarray
    iterations: int
    converged: bool
    gradient_norm: float
    pd_repaired: bool = False
    onesided_hessian: bool = False
    objective_trace: list = field(default_factory=list)


def quasi_neg_loglik(model: SdeModel, path: SamplePath, theta: ParamVector) -> float:
    """Negative quasi-log-likelihood of the path under theta."""
    x = path.values[:-1]
    dx = path.increments()
    dt = path.delta
    b = model.drift_rows(x, theta.alpha)
    resid = dx - dt * b

    if model.diagonal_noise and model.sigma_diag is not None:
        s = model.sigma_diag_rows(x, theta.beta)
        s2 = s * s
        smax = s2.max(axis=1)
        smin = s2.min(axis=1)
        bad = (smin <= 0.0) | (smax >= MAX_CONDITION * smin)
        if np.any(bad):
            raise SingularDiffusionError(int(np.argmax(bad)))
        logdet = float(np.log(s2).sum())
        quad = float((resid * resid / s2).sum())
    elif not model.state_dependent_diffusion:
        sig = np.asarray(model.diffusion(x[0], theta.beta), dtype=float)
        sigma = sig @ sig.T
        eig = np.linalg.eigvalsh(sigma)
        if eig[0] <= 0.0 or eig[-1] >= MAX_CONDITION * eig[0]:
            raise SingularDiffusionError(0)
        chol = np.linalg.cholesky(sigma)
        y = np.linalg.solve(chol, resid.T)
        logdet = path.n * 2.0 * float(np.log(np.diag(chol)).sum())
        quad = float((y * y).sum())
    else:
        s = model.diffusion_rows(x, theta.beta)
        sigma = np.einsum("nij,nkj->nik", s, s)
        eig = np.linalg.eigvalsh(sigma)
        bad = (eig[:, 0] <= 0.0) | (eig[:, -1] >= MAX_CONDITION * eig[:, 0])
        if np.any(bad):
            raise SingularDiffusionError(int(np.argmax(bad)))
        logdet = float(np.log(eig).sum())
        sol = np.linalg.solve(sigma, resid[..., None])[..., 0]
        quad = float(np.einsum("ni,ni->", resid, sol))

    value = 0.5 * (logdet + quad / dt)
    if not np.isfinite(value):
        raise EvaluationError("contrast accumulated a non-finite value")
    return value


def _objective_vec(model: SdeModel, path: SamplePath, p1: int):
    """Contrast as a function of the stacked theta, finite everywhere
    (a large penalty value stands in outside the contrast's domain)."""

    def f(tvec: np.ndarray) -> float:
        try:
            val = quasi_neg_loglik(model, path, ParamVector.from_concat(tvec, p1))
        except (SingularDiffusionError, EvaluationError):
            return PENALTY_VALUE
        return val if val < PENALTY_VALUE else PENALTY_VALUE

    return f


def gradient_fd(f, theta: np.ndarray, rel_step: float = 1e-6) -> np.ndarray:
    """Central finite-difference gradient."""
    theta = np.asarray(theta, dtype=float)
    g = np.empty_like(theta)
    for j in range(theta.size):
        h = rel_step * (1.0 + abs(theta[j]))
        up, dn = theta.copy(), theta.copy()
        up[j] += h
        dn[j] -= h
        g[j] = (f(up) - f(dn)) / (2.0 * h)
    return g


def gradient_fd_forward(f, theta: np.ndarray, rel_step: float = 1e-8) -> np.ndarray:
    """Forward finite-difference gradient (independent cross-check)."""
    theta = np.asarray(theta, dtype=float)
    f0 = f(theta)
    g = np.empty_like(theta)
    for j in range(theta.size):
        h = rel_step * (1.0 + abs(theta[j]))
        up = theta.copy()
        up[j] += h
        g[j] = (f(up) - f0) / h
    return g


def _projected_gradient_norm(f, theta, bounds, rel_step=1e-6):
    g = gradient_fd(f, theta, rel_step)
    pg = g.copy()
    edge = rel_step * (1.0 + np.abs(theta))
    at_lo = theta <= bounds[:, 0] + edge
    at_hi = theta >= bounds[:, 1] - edge
    pg[at_lo & (pg > 0)] = 0.0
    pg[at_hi & (pg < 0)] = 0.0
    return float(np.max(np.abs(pg))) if pg.size else 0.0


def _hessian_fd_vec(f, theta, bounds, rel_step=1e-4):
    """Central FD Hessian on [lo, hi]; one-sided stencils near the box edge.

    Returns (H, used_onesided).  Steps shrink (up to 3 times) when a stencil
    point evaluates non-finite.
    """
    theta = np.asarray(theta, dtype=float)
    p = theta.size
    lo, hi = bounds[:, 0], bounds[:, 1]
    h = rel_step * (1.0 + np.abs(theta))
    onesided = False

    def feval(t):
        v = f(t)
        return v

    # choose per-coordinate offsets: (plus, minus) steps that stay in the box
    plus = np.minimum(theta + h, hi) - theta
    minus = theta - np.maximum(theta - h, lo)
    for j in range(p):
        if plus[j] <= 0 and minus[j] <= 0:
            raise ValueError(f"coordinate {j} has no room for a finite-difference step")
        if plus[j] <= 0 or minus[j] <= 0:
            onesided = True

    f0 = feval(theta)
    if not np.isfinite(f0):
        raise EvaluationError("objective non-finite at the expansion point")

    H = np.empty((p, p))
    fp = np.empty(p)
    fm = np.empty(p)
    for j in range(p):
        for attempt in range(4):
            hp, hm = plus[j], minus[j]
            tp, tm = theta.copy(), theta.copy()
            if hp > 0 and hm > 0:
                tp[j] += hp
                tm[j] -= hm
                a, b = feval(tp), feval(tm)
                if np.isfinite(a) and np.isfinite(b):
                    fp[j], fm[j] = a, b
                    # generalized central second difference for hp != hm
                    H[j, j] = 2.0 * (hm * a + hp * b - (hp + hm) * f0) / (hp * hm * (hp + hm))
                    break
            else:
                step = hp if hp > 0 else -hm
                t1, t2 = theta.copy(), theta.copy()
                t1[j] += step
                t2[j] += 2.0 * step
                a, b = feval(t1), feval(t2)
                if np.isfinite(a) and np.isfinite(b):
                    fp[j] = a if step > 0 else f0
                    fm[j] = f0 if step > 0 else a
                    H[j, j] = (b - 2.0 * a + f0) / step ** 2
                    onesided = True
                    break
            plus[j] *= 0.1
            minus[j] *= 0.1
        else:
            raise EvaluationError(f"could not form a finite Hessian stencil at coordinate {j}")

    for j in range(p):
        for k in range(j + 1, p):
            hj = plus[j] if plus[j] > 0 else -minus[j]
            hk = plus[k] if plus[k] > 0 else -minus[k]
            for attempt in range(4):
                tpp = theta.copy()
                tpp[j] += hj
                tpp[k] += hk
                tpm = theta.copy()
                tpm[j] += hj
                tmp = theta.copy()
                tmp[k] += hk
                a = feval(tpp)
                if np.isfinite(a):
                    # f(+j,+k) - f(+j) - f(+k) + f0, exact for quadratics
                    fj = fp[j] if plus[j] > 0 else fm[j]
                    fk = fp[k] if plus[k] > 0 else fm[k]
                    fj = feval(tpm) if attempt > 0 else fj
                    fk = feval(tmp) if attempt > 0 else fk
                    H[j, k] = H[k, j] = (a - fj - fk + f0) / (hj * hk)
                    break
                hj *= 0.1
                hk *= 0.1
            else:
                raise EvaluationError(
                    f"could not form a finite Hessian stencil at coordinates ({j}, {k})"
                )
    return 0.5 * (H + H.T), onesided


def hessian_fd(model: SdeModel, path: SamplePath, theta: ParamVector,
               rel_step: float = 1e-4) -> np.ndarray:
    """Finite-difference Hessian of the contrast at theta, symmetrized."""
    f = _objective_vec(model, path, theta.p1)
    H, _ = _hessian_fd_vec(f, theta.concat(), model.bounds_concat(), rel_step)
    return H


def repair_pd(H: np.ndarray, rel_floor: float = 1e-8) -> tuple[np.ndarray, bool]:
    """Clip the spectrum at rel_floor * trace / p; report whether clipping fired."""
    p = H.shape[0]
    floor = rel_floor * max(abs(float(np.trace(H))), 1e-8) / p
    w, v = np.linalg.eigh(H)
    if w[0] >= floor:
        return H, False
    w = np.maximum(w, floor)
    return (v * w) @ v.T, True


def _newton_polish(f, theta, obj, H_pd, bounds, tol_grad, max_steps=4):
    """Damped projected Newton steps off the FD Hessian; only improving
    moves are accepted.  Returns (theta, obj, gradient)."""
    theta = theta.copy()
    lo, hi = bounds[:, 0], bounds[:, 1]
    g = gradient_fd(f, theta)
    for _ in range(max_steps):
        pg = g.copy()
        edge = 1e-9 * (1.0 + np.abs(theta))
        pg[(theta <= lo + edge) & (pg > 0)] = 0.0
        pg[(theta >= hi - edge) & (pg < 0)] = 0.0
        if np.max(np.abs(pg)) <= tol_grad * (1.0 + abs(obj)):
            break
        try:
            step = -np.linalg.solve(H_pd, g)
        except np.linalg.LinAlgError:
            break
        scale = 1.0
        improved = False
        for _ in range(10):
            cand = np.clip(theta + scale * step, lo, hi)
            fc = f(cand)
            if fc < obj:
                theta, obj = cand, fc
                improved = True
                break
            scale *= 0.5
        if not improved:
            break
        g = gradient_fd(f, theta)
    return theta, obj, g


def _coordinate_polish(f, theta, bounds, rel_step=1e-5, passes=2):
    """Quadratic line polish per coordinate; accepts only improving moves."""
    theta = theta.copy()
    f0 = f(theta)
    for _ in range(passes):
        improved = False
        for j in range(theta.size):
            h = rel_step * (1.0 + abs(theta[j]))
            tp, tm = theta.copy(), theta.copy()
            tp[j] = min(theta[j] + h, bounds[j, 1])
            tm[j] = max(theta[j] - h, bounds[j, 0])
            if tp[j] == theta[j] or tm[j] == theta[j]:
                continue
            a, b = f(tp), f(tm)
            if not (np.isfinite(a) and np.isfinite(b)):
                continue
            denom = a - 2.0 * f0 + b
            if denom <= 0:
                continue
            step = 0.5 * (b - a) / denom * h
            cand = theta.copy()
            cand[j] = float(np.clip(theta[j] + step, bounds[j, 0], bounds[j, 1]))
            fc = f(cand)
            if fc < f0:
                theta, f0 = cand, fc
                improved = True
        if not improved:
            break
    return theta, f0


def qmle_fit(
    model: SdeModel,
    path: SamplePath,
    init: ParamVector | None = None,
    method: str = "simplex",
    rng: np.random.Generator | None = None,
    tol_grad: float = 1e-6,
    max_iter: int | None = None,
    record_trace: bool = False,
    compute_curvature: bool = True,
) -> FitResult:
    """Minimize the contrast over the model box.

    ``method="simplex"`` runs a box-projected Nelder-Mead search restarted
    once from its best point and finished with a coordinate-wise quadratic
    polish; ``method="lbfgsb"`` runs L-BFGS-B on finite-difference gradients,
    which scales better for larger parameter counts.  When ``init`` is
    omitted the midpoint of the box is used, jittered by ``rng`` when given.
    """
    bounds = model.bounds_concat()
    p = bounds.shape[0]
    if init is None:
        if model.init_hint is not None:
            t0 = np.asarray(model.init_hint(path, rng), dtype=float)
        else:
            t0 = bounds.mean(axis=1)
            if rng is not None:
                width = bounds[:, 1] - bounds[:, 0]
                t0 = t0 + rng.uniform(-0.05, 0.05, size=p) * width
        t0 = np.clip(t0, bounds[:, 0], bounds[:, 1])
    else:
        t0 = np.clip(init.concat(), bounds[:, 0], bounds[:, 1])

    f = _objective_vec(model, path, model.p1)
    if f(t0) >= PENALTY_VALUE:
        raise EvaluationError(
            "contrast is undefined at the starting point; supply an explicit init"
        )

    trace: list[float] = []
    iterations = 0
    if method in ("simplex", "nelder-mead"):
        opts = {"maxiter": max_iter or 400 * p, "xatol": 1e-8, "fatol": 1e-10,
                "adaptive": p > 4}
        best = None

        def cb(xk):
            if record_trace:
                trace.append(f(xk))

        cur = t0
        for _ in range(2):  # one restart from the best point found
            res = minimize(f, cur, method="Nelder-Mead",
                           bounds=[tuple(b) for b in bounds], options=opts,
                           callback=cb if record_trace else None)
            iterations += int(res.nit)
            if best is None or res.fun < best.fun:
                best = res
            cur = best.x
        theta_vec, obj = _coordinate_polish(f, best.x, bounds)
    elif method in ("lbfgsb", "l-bfgs-b", "gradient"):
        res = minimize(f, t0, method="L-BFGS-B",
                       bounds=[tuple(b) for b in bounds],
                       options={"maxiter": max_iter or 500, "ftol": 1e-10,
                                "gtol": 1e-6, "maxfun": 10 ** 6})
        iterations = int(res.nit)
        theta_vec, obj = res.x, float(res.fun)
    else:
        raise ValueError(f"unknown optimization method {method!r}")

    theta = ParamVector.from_concat(theta_vec, model.p1)
    if model.canonicalize is not None:
        theta = model.canonicalize(theta)
    theta_vec = theta.concat()
    obj = f(theta_vec)

    pd_flag = False
    onesided = False
    if compute_curvature:
        H, onesided = _hessian_fd_vec(f, theta_vec, bounds)
        H, pd_flag = repair_pd(H)
        moved_from = theta_vec
        theta_vec, obj, g = _newton_polish(f, theta_vec, obj, H, bounds, tol_grad)
        if np.max(np.abs(theta_vec - moved_from)) > 1e-3 * (1.0 + np.max(np.abs(theta_vec))):
            H, onesided = _hessian_fd_vec(f, theta_vec, bounds)
            H, pd_flag = repair_pd(H)
        theta = ParamVector.from_concat(theta_vec, model.p1)
        if model.canonicalize is not None:
            recanon = model.canonicalize(theta)
            if not np.array_equal(recanon.concat(), theta_vec):
                theta = recanon
                theta_vec = theta.concat()
                obj = f(theta_vec)
                H, onesided = _hessian_fd_vec(f, theta_vec, bounds)
                H, pd_flag = repair_pd(H)
    else:
        H = np.eye(p)

    gnorm = _projected_gradient_norm(f, theta_vec, bounds)
    converged = bool(gnorm <= tol_grad * (1.0 + abs(obj)))

    return FitResult(
        theta_hat=theta,
        objective=float(obj),
        curvature=H,
        iterations=iterations,
        converged=converged,
        gradient_norm=gnorm,
        pd_repaired=pd_flag,
        onesided_hessian=onesided,
        objective_trace=trace,
    )
