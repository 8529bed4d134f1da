"""Parametric SDE families: dX = b(X, alpha) dt + sigma(X, beta) dW.

A model bundles the drift/diffusion evaluators with the parameter-group
dimensions (p1 drift parameters, p2 diffusion parameters) and the box
constraints used by every fitting routine.  Two families are built in:

* ``linear3d`` -- the 3-d affine model with diagonal state-dependent noise,
  dX = (alpha0 + A X) dt + diag(beta0 + B X) dW.
* ``trig2d``   -- the 2-d model with cubic/trigonometric drift and the
  constant diffusion matrix [[b11, 1], [1, b22]].

Evaluators of built-in models broadcast over a leading axis, so they can be
called with a single state ``(d,)`` or a whole path ``(m, d)``.  User-defined
models may supply plain single-state functions (``vectorized=False``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import EvaluationError


@dataclass
class ParamVector:
    """Grouped parameter theta = (alpha, beta)."""

    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=float).ravel()
        self.beta = np.asarray(self.beta, dtype=float).ravel()

    @property
    def p1(self) -> int:
        return self.alpha.size

    @property
    def p2(self) -> int:
        return self.beta.size

    @property
    def size(self) -> int:
        return self.alpha.size + self.beta.size

    def concat(self) -> np.ndarray:
        return np.concatenate([self.alpha, self.beta])

    @classmethod
    def from_concat(cls, theta: np.ndarray, p1: int) -> "ParamVector":
        theta = np.asarray(theta, dtype=float).ravel()
        return cls(theta[:p1], theta[p1:])

    def copy(self) -> "ParamVector":
        return ParamVector(self.alpha.copy(), self.beta.copy())


@dataclass(frozen=True)
class SparsityMask:
    """Index sets of the truly-zero coordinates, used only for scoring."""

    zero_alpha: tuple[int, ...] = ()
    zero_beta: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "zero_alpha", tuple(sorted(set(self.zero_alpha))))
        object.__setattr__(self, "zero_beta", tuple(sorted(set(self.zero_beta))))

    def nonzero_alpha(self, p1: int) -> tuple[int, ...]:
        return tuple(j for j in range(p1) if j not in self.zero_alpha)

    def nonzero_beta(self, p2: int) -> tuple[int, ...]:
        return tuple(k for k in range(p2) if k not in self.zero_beta)


@dataclass(frozen=True, eq=False)
class SdeModel:
    """Immutable description of one parametric diffusion family."""

    name: str
    dim_state: int
    dim_noise: int
    p1: int
    p2: int
    drift: Callable[[np.ndarray, np.ndarray], np.ndarray]
    diffusion: Callable[[np.ndarray, np.ndarray], np.ndarray]
    bounds_alpha: np.ndarray  # (p1, 2)
    bounds_beta: np.ndarray   # (p2, 2)
    vectorized: bool = True
    diagonal_noise: bool = False
    state_dependent_diffusion: bool = True
    # diagonal models may expose the diagonal of sigma directly (fast path)
    sigma_diag: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    # maps a fitted theta onto a canonical representative when the diffusion
    # parametrization is sign-unidentified (sigma enters only through sigma^2)
    canonicalize: Optional[Callable[[ParamVector], ParamVector]] = None
    # optional data-driven starting point for the contrast minimization,
    # (path, rng or None) -> stacked theta; used when the box midpoint is a
    # degenerate point of the family (e.g. identically-zero diffusion)
    init_hint: Optional[Callable] = None
    param_names_alpha: tuple[str, ...] = ()
    param_names_beta: tuple[str, ...] = ()
    reference_theta: Optional[ParamVector] = None
    reference_mask: Optional[SparsityMask] = None
    reference_x0: Optional[np.ndarray] = None

    def __post_init__(self):
        ba = np.asarray(self.bounds_alpha, dtype=float).reshape(self.p1, 2)
        bb = np.asarray(self.bounds_beta, dtype=float).reshape(self.p2, 2)
        if np.any(ba[:, 0] > ba[:, 1]) or np.any(bb[:, 0] > bb[:, 1]):
            raise ValueError("lower bounds must not exceed upper bounds")
        object.__setattr__(self, "bounds_alpha", ba)
        object.__setattr__(self, "bounds_beta", bb)
        if not self.param_names_alpha:
            object.__setattr__(
                self, "param_names_alpha", tuple(f"alpha[{j}]" for j in range(self.p1))
            )
        if not self.param_names_beta:
            object.__setattr__(
                self, "param_names_beta", tuple(f"beta[{k}]" for k in range(self.p2))
            )

    @property
    def param_names(self) -> tuple[str, ...]:
        return self.param_names_alpha + self.param_names_beta

    def bounds_concat(self) -> np.ndarray:
        """Box for the stacked theta, shape (p1+p2, 2)."""
        return np.vstack([self.bounds_alpha, self.bounds_beta])

    def drift_rows(self, x: np.ndarray, alpha: np.ndarray) -> np.ndarray:
        """Drift evaluated along an (m, d) batch of states."""
        x = np.asarray(x, dtype=float)
        if self.vectorized:
            return np.asarray(self.drift(x, alpha), dtype=float)
        return np.stack([np.asarray(self.drift(row, alpha), dtype=float) for row in x])

    def diffusion_rows(self, x: np.ndarray, beta: np.ndarray) -> np.ndarray:
        """Diffusion matrices along an (m, d) batch, shape (m, d, r)."""
        x = np.asarray(x, dtype=float)
        if self.vectorized:
            out = np.asarray(self.diffusion(x, beta), dtype=float)
            if out.ndim == 2:  # constant matrix, broadcast over the batch
                out = np.broadcast_to(out, (x.shape[0],) + out.shape)
            return out
        return np.stack([np.asarray(self.diffusion(row, beta), dtype=float) for row in x])

    def sigma_diag_rows(self, x: np.ndarray, beta: np.ndarray) -> np.ndarray:
        if self.sigma_diag is None:
            raise AttributeError(f"model {self.name!r} declares no diagonal fast path")
        x = np.asarray(x, dtype=float)
        if self.vectorized:
            return np.asarray(self.sigma_diag(x, beta), dtype=float)
        return np.stack([np.asarray(self.sigma_diag(row, beta), dtype=float) for row in x])


def drift_eval(model: SdeModel, x: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """b(x, alpha); raises EvaluationError on non-finite output."""
    x = np.asarray(x, dtype=float)
    out = np.asarray(model.drift(x, np.asarray(alpha, dtype=float)), dtype=float)
    if not np.all(np.isfinite(out)):
        raise EvaluationError("drift returned a non-finite value", x=x, params=alpha)
    return out


def sigma_eval(model: SdeModel, x: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """sigma(x, beta); raises EvaluationError on non-finite output."""
    x = np.asarray(x, dtype=float)
    out = np.asarray(model.diffusion(x, np.asarray(beta, dtype=float)), dtype=float)
    if not np.all(np.isfinite(out)):
        raise EvaluationError("diffusion returned a non-finite value", x=x, params=beta)
    return out


def sigma_sq(model: SdeModel, x: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Sigma(x, beta) = sigma sigma'(x, beta), symmetric PSD."""
    s = sigma_eval(model, x, beta)
    return s @ s.swapaxes(-1, -2) if s.ndim > 2 else s @ s.T


# ---------------------------------------------------------------------------
# Built-in models
# ---------------------------------------------------------------------------

# True values and zero pattern used throughout the 3-d simulation study.
LINEAR3D_ALPHA_TRUE = np.array(
    [-1.5, -1.5, 0.75, 0.75,
     -1.5, 0.0, -1.5, 0.75,
     1.5, 0.0, 0.0, 0.0]
)
LINEAR3D_BETA_TRUE = np.array(
    [1.5, 0.0, 0.4, 0.4,
     1.5, 0.0, 0.0, 0.4,
     1.5, 0.0, 0.0, 0.4]
)
LINEAR3D_MASK = SparsityMask(
    zero_alpha=(5, 9, 10, 11),
    zero_beta=(1, 5, 6, 9, 10),
)

TRIG2D_ALPHA_TRUE = np.array([1.0, 0.0, 0.0, 1.0])
TRIG2D_BETA_TRUE = np.array([0.0, 0.0])
TRIG2D_MASK = SparsityMask(zero_alpha=(1, 2), zero_beta=(0, 1))


def _affine_names(prefix: str, d: int) -> tuple[str, ...]:
    names = []
    for i in range(1, d + 1):
        for j in range(0, d + 1):
            names.append(f"{prefix}_{i}{j}")
    return tuple(names)


def make_linear_affine(d: int = 3, truncate_sigma: float | None = None,
                       bound: float = 10.0, name: str | None = None) -> SdeModel:
    """Affine model dX = (alpha0 + A X) dt + diag(beta0 + B X) dW in R^d.

    Each parameter group has d*(d+1) entries laid out row-wise as
    (intercept_i, slope_i1, ..., slope_id) for equation i.  With
    ``truncate_sigma=M`` every diagonal diffusion entry is capped at M
    (the bounded-volatility variant); by default no cap is applied.
    """
    p = d * (d + 1)

    def unpack(vec):
        m = np.asarray(vec, dtype=float).reshape(d, d + 1)
        return m[:, 0], m[:, 1:]

    def drift(x, alpha):
        a0, A = unpack(alpha)
        return a0 + np.asarray(x, dtype=float) @ A.T

    def sigma_diag(x, beta):
        b0, B = unpack(beta)
        s = b0 + np.asarray(x, dtype=float) @ B.T
        if truncate_sigma is not None:
            s = np.where(np.abs(s) < truncate_sigma, s, truncate_sigma)
        return s

    def diffusion(x, beta):
        s = sigma_diag(x, beta)
        return s[..., :, None] * np.eye(d)

    def canonicalize(theta: ParamVector) -> ParamVector:
        # sigma enters the transition only through sigma^2, so each diffusion
        # row has an unidentified sign; pick the representative with a
        # nonnegative intercept.
        rows = theta.beta.reshape(d, d + 1).copy()
        rows[rows[:, 0] < 0.0] *= -1.0
        return ParamVector(theta.alpha.copy(), rows.ravel())

    def init_hint(path, rng=None):
        # moment-based start: per row, OLS of dX/delta on (1, X) for the
        # drift and of |dX| sqrt(pi/2)/sqrt(delta) on (1, X) for sigma (the
        # box midpoint, beta = 0, makes sigma identically zero and the
        # contrast undefined there)
        x = path.values[:-1]
        dx = np.diff(path.values, axis=0)
        design = np.column_stack([np.ones(x.shape[0]), x])
        alpha_rows, _, _, _ = np.linalg.lstsq(design, dx / path.delta, rcond=None)
        scale = np.abs(dx) * np.sqrt(np.pi / 2.0) / np.sqrt(path.delta)
        beta_rows, _, _, _ = np.linalg.lstsq(design, scale, rcond=None)
        theta = np.concatenate([alpha_rows.T.ravel(), beta_rows.T.ravel()])
        theta = np.clip(theta, -bound, bound)
        if rng is not None:
            theta = theta + rng.uniform(-0.05, 0.05, size=2 * p) * (1.0 + np.abs(theta))
        return theta

    box = np.tile([-bound, bound], (p, 1))
    is_3d = d == 3
    return SdeModel(
        name=name or (f"linear{d}d"),
        dim_state=d,
        dim_noise=d,
        p1=p,
        p2=p,
        drift=drift,
        diffusion=diffusion,
        bounds_alpha=box,
        bounds_beta=box.copy(),
        diagonal_noise=True,
        state_dependent_diffusion=True,
        sigma_diag=sigma_diag,
        canonicalize=canonicalize,
        init_hint=init_hint,
        param_names_alpha=_affine_names("alpha", d),
        param_names_beta=_affine_names("beta", d),
        reference_theta=ParamVector(LINEAR3D_ALPHA_TRUE, LINEAR3D_BETA_TRUE) if is_3d else None,
        reference_mask=LINEAR3D_MASK if is_3d else None,
        reference_x0=np.ones(d),
    )


def make_trig2d() -> SdeModel:
    """2-d model with drift (-a11 x1^3 + a12 (sin x2 + 2),
    a21 (cos x1 + 2) - a22 x2) and diffusion [[b11, 1], [1, b22]]."""

    def drift(x, alpha):
        a11, a12, a21, a22 = np.asarray(alpha, dtype=float)
        x = np.asarray(x, dtype=float)
        x1, x2 = x[..., 0], x[..., 1]
        out = np.stack(
            [-a11 * x1 ** 3 + a12 * (np.sin(x2) + 2.0),
             a21 * (np.cos(x1) + 2.0) - a22 * x2],
            axis=-1,
        )
        return out

    def diffusion(x, beta):
        b11, b22 = np.asarray(beta, dtype=float)
        m = np.array([[b11, 1.0], [1.0, b22]])
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return m
        return np.broadcast_to(m, x.shape[:-1] + (2, 2))

    box_a = np.tile([0.0, 10.0], (4, 1))
    box_b = np.tile([0.0, 10.0], (2, 1))
    return SdeModel(
        name="trig2d",
        dim_state=2,
        dim_noise=2,
        p1=4,
        p2=2,
        drift=drift,
        diffusion=diffusion,
        bounds_alpha=box_a,
        bounds_beta=box_b,
        state_dependent_diffusion=False,
        param_names_alpha=("alpha_11", "alpha_12", "alpha_21", "alpha_22"),
        param_names_beta=("beta_11", "beta_22"),
        reference_theta=ParamVector(TRIG2D_ALPHA_TRUE, TRIG2D_BETA_TRUE),
        reference_mask=TRIG2D_MASK,
        reference_x0=np.ones(2),
    )


_REGISTRY: dict[str, Callable[..., SdeModel]] = {
    "linear3d": make_linear_affine,
    "linear4d": lambda **kw: make_linear_affine(d=4, **kw),
    "trig2d": lambda **kw: make_trig2d(),
}


def register_model(name: str, factory: Callable[..., SdeModel]) -> None:
    """Register a user model factory under a string id."""
    _REGISTRY[name] = factory


def model_names() -> tuple[str, ...]:
    return tuple(sorted(_REGISTRY))


def get_model(name: str, **options) -> SdeModel:
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise KeyError(
            f"unknown model {name!r}; registered models: {', '.join(model_names())}"
        ) from None
    return factory(**options)
