"""Euler-Maruyama path generation with reproducible multi-stream randomness.

Randomness is addressed by an (seed, stream) pair: the same pair always
yields the same draws, regardless of process or thread scheduling, which is
what makes parallel Monte Carlo runs bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ExplosionError
from .model import ParamVector, SdeModel

EXPLOSION_BOUND = 1e8


@dataclass(frozen=True)
class RngSpec:
    """Addressable random stream: (seed, stream) -> byte-identical draws."""

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream,))
        return np.random.Generator(np.random.PCG64(ss))


@dataclass
class SamplePath:
    """Equally spaced observations X_{t_0..t_n} with step delta."""

    times: np.ndarray
    values: np.ndarray
    delta: float

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float).ravel()
        self.values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if self.values.shape[0] == 1 and self.times.size > 1:
            self.values = self.values.T
        if self.times.size != self.values.shape[0]:
            raise ValueError("times and values disagree on the number of observations")
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("path values contain non-finite entries")
        steps = np.diff(self.times)
        if steps.size and np.max(np.abs(steps - self.delta)) > 1e-12 * max(1.0, abs(self.delta)):
            raise ValueError("observation times are not equally spaced at delta")
        self._increments = None

    @property
    def n(self) -> int:
        """Number of increments."""
        return self.values.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def increments(self) -> np.ndarray:
        if self._increments is None:
            self._increments = np.diff(self.values, axis=0)
        return self._increments


def high_freq_grid(n: int) -> float:
    """Observation step of the high-frequency design, delta = n^(-1/3)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return 1.0 / float(np.cbrt(float(n)))


def standard_normal_block(rng: RngSpec, count: int) -> np.ndarray:
    """`count` standard normal draws, a pure function of (seed, stream)."""
    return rng.generator().standard_normal(count)


def euler_simulate(
    model: SdeModel,
    theta: ParamVector,
    x0: np.ndarray,
    n: int,
    delta: float,
    rng: RngSpec,
    refine: int = 1,
    explosion_bound: float = EXPLOSION_BOUND,
) -> SamplePath:
    """Simulate n observation steps of the Euler scheme started at x0.

    With ``refine > 1`` the recursion is run on a grid finer by that factor
    and only every refine-th state is kept.  A state with a non-finite entry,
    or one exceeding ``explosion_bound`` in absolute value, raises
    ExplosionError carrying the (fine-grid) step index.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if delta <= 0:
        raise ValueError("delta must be positive")
    if refine < 1:
        raise ValueError("refine must be at least 1")
    x0 = np.asarray(x0, dtype=float).ravel()
    if x0.size != model.dim_state or not np.all(np.isfinite(x0)):
        raise ValueError("x0 must be a finite state of the model dimension")

    r = model.dim_noise
    total = n * refine
    z = standard_normal_block(rng, total * r).reshape(total, r)
    dt = delta / refine
    sq_dt = np.sqrt(dt)

    out = np.empty((n + 1, model.dim_state))
    out[0] = x0
    x = x0.copy()
    alpha, beta = theta.alpha, theta.beta
    drift, diffusion = model.drift, model.diffusion
    for i in range(total):
        b = drift(x, alpha)
        s = diffusion(x, beta)
        x = x + b * dt + (s @ z[i]) * sq_dt
        if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > explosion_bound:
            raise ExplosionError(step=i, value=x)
        if (i + 1) % refine == 0:
            out[(i + 1) // refine] = x

    times = delta * np.arange(n + 1)
    return SamplePath(times=times, values=out, delta=delta)


def write_path_csv(path: SamplePath, fileobj, meta: dict | None = None) -> None:
    """Emit ``t,X1,...,Xd`` rows at full (17 significant digit) precision.

    Optional metadata is written as ``#``-prefixed header comment lines that
    :func:`sdebridge.experiments.load_series_csv` skips on re-reading.
    """
    if meta:
        import json

        fileobj.write("# " + json.dumps(meta, sort_keys=True) + "\n")
    d = path.dim
    fileobj.write("t," + ",".join(f"X{i + 1}" for i in range(d)) + "\n")
    for t, row in zip(path.times, path.values):
        cells = [format(t, ".17g")] + [format(v, ".17g") for v in row]
        fileobj.write(",".join(cells) + "\n")
