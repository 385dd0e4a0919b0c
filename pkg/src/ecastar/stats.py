"""Seeded randomness, percentile/quartile primitives and the Levy-flight step generator.

Everything stochastic in this package draws from a :class:`RandomStream`, a
thin wrapper around numpy's counter-based Philox generator.  Philox is a
published, platform-independent algorithm, so a (seed, spawn_key) pair
reproduces the exact same draw sequence everywhere; the first few draws are
frozen by golden tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "RandomStream",
    "LevyParams",
    "percentile_rank",
    "percentile_ranks",
    "quartiles",
    "interquartile_mean",
    "uniform_in",
    "levy_step",
]


class RandomStream:
    """Deterministic random source backed by the Philox counter generator.

    Parameters
    ----------
    seed : int
        Master seed.
    spawn_key : tuple of int, optional
        Sub-stream path.  ``RandomStream(s).substream(i)`` equals
        ``RandomStream(s, (i,))``; derived streams are statistically
        independent and adding new ones never perturbs existing ones.
    """

    def __init__(self, seed: int, spawn_key: tuple[int, ...] = ()):
        self.seed = int(seed)
        self.spawn_key = tuple(int(k) for k in spawn_key)
        seq = np.random.SeedSequence(self.seed, spawn_key=self.spawn_key)
        self._gen = np.random.Generator(np.random.Philox(seq))

    def substream(self, index: int) -> "RandomStream":
        """Independent stream for run/worker ``index`` of this seed."""
        return RandomStream(self.seed, self.spawn_key + (int(index),))

    def random(self, size=None):
        return self._gen.random(size)

    def uniform(self, low, high, size=None):
        return self._gen.uniform(low, high, size)

    def normal(self, loc=0.0, scale=1.0, size=None):
        return self._gen.normal(loc, scale, size)

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size)

    def choice(self, a, size=None, replace=True, p=None):
        return self._gen.choice(a, size=size, replace=replace, p=p)

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed}, spawn_key={self.spawn_key})"


@dataclass(frozen=True)
class LevyParams:
    """Parameters of the heavy-tailed mutation step generator.

    ``alpha`` is the stability exponent (0 < alpha <= 2; values near 1 give
    Cauchy-like tails), ``scale`` multiplies every step and ``cap`` clamps the
    absolute step size.  ``cap`` may be a scalar or a per-dimension array and
    may be ``inf`` for uncapped draws.
    """

    alpha: float = 1.001
    scale: float = 1.0
    cap: float | np.ndarray = field(default=math.inf)

    def __post_init__(self):
        if not 0.0 < self.alpha <= 2.0:
            raise ValueError(f"alpha must be in (0, 2], got {self.alpha}")
        if not self.scale > 0.0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        if not np.all(np.asarray(self.cap) >= 0.0):
            raise ValueError("cap must be non-negative")


def percentile_rank(values, x: float) -> float:
    """Percentile rank of ``x`` within ``values``, in [0, 100].

    Ties use the midpoint convention:
    ``100 * (count(values < x) + 0.5 * count(values == x)) / len(values)``,
    so a value tied with every element ranks 50.
    """
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("percentile_rank of an empty array is undefined")
    less = np.count_nonzero(v < x)
    equal = np.count_nonzero(v == x)
    return 100.0 * (less + 0.5 * equal) / v.size


def percentile_ranks(values) -> np.ndarray:
    """Midpoint percentile rank of every element within its own array.

    Vectorised equivalent of ``[percentile_rank(values, x) for x in values]``.
    """
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("percentile_ranks of an empty array is undefined")
    s = np.sort(v)
    less = np.searchsorted(s, v, side="left")
    less_or_equal = np.searchsorted(s, v, side="right")
    return 100.0 * (less + 0.5 * (less_or_equal - less)) / v.size


def quartiles(values) -> tuple[float, float, float]:
    """(Q1, Q2, Q3) of ``values`` using linear interpolation at h = (n-1)p.

    The interpolation rule is fixed so results are platform-independent.
    """
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("quartiles of an empty array are undefined")
    q1, q2, q3 = np.quantile(v, (0.25, 0.5, 0.75))
    return float(q1), float(q2), float(q3)


def interquartile_mean(values) -> float:
    """Mean of the values lying inside [Q1, Q3] (inclusive).

    Rejects outliers outside the quartile band; falls back to the plain mean
    in the (theoretically unreachable) case that no value lands in the band.
    """
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("interquartile_mean of an empty array is undefined")
    q1, _, q3 = quartiles(v)
    inside = v[(v >= q1) & (v <= q3)]
    if inside.size == 0:
        return float(v.mean())
    return float(inside.mean())


def uniform_in(low, high, rng: RandomStream):
    """Uniform draw on [low, high]; returns ``low`` exactly when low == high.

    ``low``/``high`` may be scalars or broadcastable arrays; one draw is made
    per output element.
    """
    lo = np.asarray(low, dtype=float)
    hi = np.asarray(high, dtype=float)
    if np.any(lo > hi):
        raise ValueError("uniform_in requires low <= high elementwise")
    if lo.ndim == 0 and hi.ndim == 0:
        return float(rng.uniform(float(lo), float(hi)))
    shape = np.broadcast_shapes(lo.shape, hi.shape)
    return rng.uniform(np.broadcast_to(lo, shape), np.broadcast_to(hi, shape), size=shape)


def _mantegna_sigma(alpha: float) -> float:
    num = math.gamma(1.0 + alpha) * math.sin(math.pi * alpha / 2.0)
    den = math.gamma((1.0 + alpha) / 2.0) * alpha * 2.0 ** ((alpha - 1.0) / 2.0)
    return (num / den) ** (1.0 / alpha)


def levy_step(params: LevyParams, rng: RandomStream, size=None):
    """Symmetric heavy-tailed step(s) via Mantegna's construction.

    step = scale * u / |v|^(1/alpha) with u ~ N(0, sigma_u^2), v ~ N(0, 1) and
    sigma_u = (gamma(1+a) sin(pi a/2) / (gamma((1+a)/2) a 2^((a-1)/2)))^(1/a).
    Draws are clamped to [-cap, +cap]; a ``v`` underflowing |v| < 1e-300 is
    redrawn.
    """
    sigma = _mantegna_sigma(params.alpha)
    u = np.asarray(rng.normal(0.0, sigma, size), dtype=float)
    v = np.asarray(rng.normal(0.0, 1.0, size), dtype=float)
    if v.ndim == 0:
        while abs(v) < 1e-300:
            v = np.asarray(rng.normal(0.0, 1.0), dtype=float)
    else:
        bad = np.abs(v) < 1e-300
        while np.any(bad):
            v[bad] = rng.normal(0.0, 1.0, int(bad.sum()))
            bad = np.abs(v) < 1e-300
    step = params.scale * u / np.abs(v) ** (1.0 / params.alpha)
    step = np.clip(step, -np.asarray(params.cap), np.asarray(params.cap))
    if size is None:
        return float(step)
    return step
