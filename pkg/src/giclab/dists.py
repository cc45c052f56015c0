"""Scalar input distributions: the intended signal and the interferer.

Three kinds are supported: Gaussian, finite Discrete constellations and
Mixtures (nesting depth at most 2). All laws have finite variance. Values
are immutable after validated construction and safe to share across
threads. Sampling is counter-based: a draw is a pure function of
(distribution, seed, counter).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np
from scipy.special import ndtri

from .rng import DOMAIN_DIST, uniform_matrix

PROB_TOL = 1e-12
_MAX_MIXTURE_DEPTH = 2
_U_FLOOR = 2.0 ** -64  # keeps ndtri away from -inf when a uniform lands on 0


@dataclass(frozen=True)
class Gaussian:
    mean: float = 0.0
    variance: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.mean) and math.isfinite(self.variance)):
            raise ValueError("Gaussian mean/variance must be finite")
        if self.variance < 0:
            raise ValueError("Gaussian variance must be >= 0")


@dataclass(frozen=True)
class Discrete:
    points: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        points = tuple(float(p) for p in self.points)
        probs = tuple(float(p) for p in self.probs)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "probs", probs)
        if len(points) != len(probs) or not points:
            raise ValueError("points and probs must be nonempty and equal length")
        if any(not math.isfinite(p) for p in points):
            raise ValueError("points must be finite")
        if any(p < 0 for p in probs):
            raise ValueError("probs must be nonnegative")
        if abs(sum(probs) - 1.0) > PROB_TOL:
            raise ValueError("probs must sum to 1 within 1e-12")
        if len(set(points)) != len(points):
            raise ValueError("points must be pairwise distinct")


@dataclass(frozen=True)
class Mixture:
    components: tuple[tuple[float, "ScalarDistribution"], ...]

    def __post_init__(self):
        comps = tuple((float(w), d) for w, d in self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise ValueError("mixture needs at least one component")
        if any(w < 0 for w, _ in comps):
            raise ValueError("mixture weights must be nonnegative")
        if abs(sum(w for w, _ in comps) - 1.0) > PROB_TOL:
            raise ValueError("mixture weights must sum to 1 within 1e-12")
        if _depth(self) > _MAX_MIXTURE_DEPTH:
            raise ValueError("mixture nesting depth must be <= 2")


ScalarDistribution = Union[Gaussian, Discrete, Mixture]


def _depth(d: ScalarDistribution) -> int:
    if isinstance(d, Mixture):
        return 1 + max(_depth(c) for _, c in d.components)
    return 0


def mean(d: ScalarDistribution) -> float:
    """Exact first moment."""
    if isinstance(d, Gaussian):
        return d.mean
    if isinstance(d, Discrete):
        return float(np.dot(d.points, d.probs))
    return sum(w * mean(c) for w, c in d.components)


def variance(d: ScalarDistribution) -> float:
    """Exact second central moment (law of total variance for mixtures)."""
    if isinstance(d, Gaussian):
        return d.variance
    if isinstance(d, Discrete):
        pts = np.asarray(d.points)
        pr = np.asarray(d.probs)
        mu = float(pr @ pts)
        return float(pr @ (pts - mu) ** 2)
    mu = mean(d)
    return sum(w * (variance(c) + (mean(c) - mu) ** 2) for w, c in d.components)


def entropy_discrete(d: ScalarDistribution) -> float:
    """Entropy of a Discrete law in nats; rejects other kinds."""
    if not isinstance(d, Discrete):
        raise TypeError("entropy_discrete is defined for Discrete distributions only")
    pr = np.asarray(d.probs)
    pr = pr[pr > 0]
    return float(-(pr * np.log(pr)).sum())


@lru_cache(maxsize=512)
def atoms(d: ScalarDistribution) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Flatten into weighted Gaussian/point atoms: (weights, means, variances).

    A point mass is an atom with zero variance. Zero-weight atoms are
    dropped. Used by the conditional-mean machinery, which treats every
    atom through the same Gaussian-posterior formulas. Results are cached
    per (hashable, immutable) distribution and returned read-only.
    """
    w, mu, var = _atoms_uncached(d)
    for arr in (w, mu, var):
        arr.setflags(write=False)
    return w, mu, var


def _atoms_uncached(d: ScalarDistribution) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if isinstance(d, Gaussian):
        return np.array([1.0]), np.array([d.mean]), np.array([d.variance])
    if isinstance(d, Discrete):
        w = np.asarray(d.probs)
        keep = w > 0
        return w[keep], np.asarray(d.points)[keep], np.zeros(int(keep.sum()))
    ws, ms, vs = [], [], []
    for w, c in d.components:
        if w == 0:
            continue
        cw, cm, cv = _atoms_uncached(c)
        ws.append(w * cw)
        ms.append(cm)
        vs.append(cv)
    return np.concatenate(ws), np.concatenate(ms), np.concatenate(vs)


# --- sampling ---------------------------------------------------------------

# Per-sample uniform budget. Column 0 selects a mixture component, column 1
# drives the component draw (or a nested selection), columns 2-3 cover the
# deepest nesting level plus one spare.
SAMPLE_WIDTH = 4


@dataclass
class RandomStream:
    """Seeded stream with a monotone sample counter."""
    seed: int
    counter: int = 0


def draw_from_uniforms(d: ScalarDistribution, u: np.ndarray, col: int = 0) -> np.ndarray:
    """Map uniform rows (n, SAMPLE_WIDTH) to draws from d, one per row."""
    if isinstance(d, Gaussian):
        std = math.sqrt(d.variance)
        return d.mean + std * ndtri(np.maximum(u[:, col], _U_FLOOR))
    if isinstance(d, Discrete):
        cum = np.cumsum(d.probs)
        cum[-1] = 1.0
        idx = np.searchsorted(cum, u[:, col], side="right")
        return np.asarray(d.points)[np.minimum(idx, len(d.points) - 1)]
    wcum = np.cumsum([w for w, _ in d.components])
    wcum[-1] = 1.0
    which = np.minimum(np.searchsorted(wcum, u[:, col], side="right"),
                       len(d.components) - 1)
    out = np.empty(u.shape[0])
    for k, (_, comp) in enumerate(d.components):
        mask = which == k
        if mask.any():
            out[mask] = draw_from_uniforms(comp, u[mask], col + 1)
    return out


def sample(d: ScalarDistribution, stream: RandomStream) -> float:
    """One draw; identical (seed, counter) always yields the identical value."""
    u = uniform_matrix(stream.seed, DOMAIN_DIST, stream.counter, 1, SAMPLE_WIDTH)
    stream.counter += 1
    return float(draw_from_uniforms(d, u)[0])


def sample_array(d: ScalarDistribution, seed: int, count: int, start: int = 0) -> np.ndarray:
    """Vectorized draws for counters [start, start+count); bit-compatible
    with repeated scalar ``sample`` calls over the same counter range."""
    u = uniform_matrix(seed, DOMAIN_DIST, start, count, SAMPLE_WIDTH)
    return draw_from_uniforms(d, u)


# --- named constellations and JSON schema -----------------------------------

def bpsk() -> Discrete:
    return Discrete((-1.0, 1.0), (0.5, 0.5))


def pam(levels: int) -> Discrete:
    """Uniform PAM with the given even number of levels, unit power."""
    if levels < 2 or levels % 2:
        raise ValueError("PAM level count must be even and >= 2")
    raw = np.arange(-(levels - 1), levels, 2, dtype=float)
    scale = math.sqrt(float(np.mean(raw ** 2)))
    return Discrete(tuple(raw / scale), (1.0 / levels,) * levels)


_NAMED = {
    "gaussian": Gaussian,
    "bpsk": bpsk,
    "4pam": lambda: pam(4),
    "8pam": lambda: pam(8),
}


def named(name: str) -> ScalarDistribution:
    try:
        return _NAMED[name.lower()]()
    except KeyError:
        raise ValueError(f"unknown distribution name {name!r}; "
                         f"expected one of {sorted(_NAMED)}") from None


def to_dict(d: ScalarDistribution) -> dict:
    if isinstance(d, Gaussian):
        return {"kind": "gaussian", "mean": d.mean, "variance": d.variance}
    if isinstance(d, Discrete):
        return {"kind": "discrete", "points": list(d.points), "probs": list(d.probs)}
    return {"kind": "mixture",
            "components": [{"weight": w, "dist": to_dict(c)} for w, c in d.components]}


def from_dict(obj: dict) -> ScalarDistribution:
    kind = obj.get("kind")
    if kind == "gaussian":
        return Gaussian(float(obj["mean"]), float(obj["variance"]))
    if kind == "discrete":
        return Discrete(tuple(obj["points"]), tuple(obj["probs"]))
    if kind == "mixture":
        return Mixture(tuple((float(c["weight"]), from_dict(c["dist"]))
                             for c in obj["components"]))
    raise ValueError(f"unknown distribution kind {kind!r}")
