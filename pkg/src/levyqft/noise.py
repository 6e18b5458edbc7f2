"""Infinitely divisible site noise with finite discrete jump laws.

A :class:`LevyLaw` is the triplet (drift, Gaussian variance, jump rate)
plus a finite jump distribution.  Without a small-jump compensator the
cumulants are

    c_1 = a + lam E[Y],   c_2 = sigma^2 + lam E[Y^2],   c_l = lam E[Y^l]  (l >= 3).

On a lattice with cell volume ``v`` the site variable is the noise value
eta(x), i.e. the cell integral divided by ``v``; its l-th cumulant is
``c_l * v**(1 - l)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np
from scipy import integrate, stats

_SEED_MOD = 2**64


class NoDensityError(ValueError):
    """The law has atoms (no Gaussian part), so log-density is undefined."""


@dataclass(frozen=True)
class LevyLaw:
    drift: float = 0.0
    gaussian_var: float = 0.0
    jump_rate: float = 0.0
    jump_values: tuple[float, ...] = ()
    jump_probs: tuple[float, ...] = ()

    def __post_init__(self):
        values = tuple(float(y) for y in self.jump_values)
        probs = tuple(float(p) for p in self.jump_probs)
        if self.gaussian_var < 0:
            raise ValueError("gaussian_var must be >= 0")
        if self.jump_rate < 0:
            raise ValueError("jump_rate must be >= 0")
        if len(values) != len(probs):
            raise ValueError("jump_values and jump_probs differ in length")
        if any(p < 0 for p in probs):
            raise ValueError("jump probabilities must be >= 0")
        if values:
            total = sum(probs)
            if not math.isclose(total, 1.0, rel_tol=1e-12, abs_tol=1e-12):
                raise ValueError(f"jump probabilities sum to {total}, not 1")
            if any(y == 0 for y in values):
                raise ValueError("jump values must be nonzero")
        elif self.jump_rate > 0:
            raise ValueError("positive jump_rate needs a jump distribution")
        object.__setattr__(self, "jump_values", values)
        object.__setattr__(self, "jump_probs", probs)

    @classmethod
    def gaussian(cls, variance: float = 1.0, drift: float = 0.0) -> "LevyLaw":
        return cls(drift=drift, gaussian_var=variance)

    @classmethod
    def poisson(cls, rate: float, jump: float = 1.0, drift: float = 0.0,
                gaussian_var: float = 0.0) -> "LevyLaw":
        """Compound Poisson with a point-mass jump of size ``jump``."""
        return cls(drift, gaussian_var, rate, (jump,), (1.0,))

    @classmethod
    def symmetric_jumps(cls, rate: float, jump: float = 1.0, drift: float = 0.0,
                        gaussian_var: float = 0.0) -> "LevyLaw":
        return cls(drift, gaussian_var, rate, (jump, -jump), (0.5, 0.5))

    @classmethod
    def from_config(cls, cfg: Mapping[str, Any]) -> "LevyLaw":
        """Build from ``{drift, gaussian_var, jump_rate, jumps: {value: prob}}``."""
        allowed = {"drift", "gaussian_var", "jump_rate", "jumps"}
        unknown = set(cfg) - allowed
        if unknown:
            raise ValueError(f"unknown law keys: {sorted(unknown)}")
        jumps = cfg.get("jumps") or {}
        if isinstance(jumps, Mapping):
            items = [(float(y), float(p)) for y, p in jumps.items()]
        else:
            items = [(float(y), float(p)) for y, p in jumps]
        items.sort()
        return cls(
            drift=float(cfg.get("drift", 0.0)),
            gaussian_var=float(cfg.get("gaussian_var", 0.0)),
            jump_rate=float(cfg.get("jump_rate", 0.0)),
            jump_values=tuple(y for y, _ in items),
            jump_probs=tuple(p for _, p in items),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "drift": self.drift,
            "gaussian_var": self.gaussian_var,
            "jump_rate": self.jump_rate,
            "jumps": [[y, p] for y, p in zip(self.jump_values, self.jump_probs)],
        }

    def jump_moment(self, l: int) -> float:
        return float(sum(p * y**l for y, p in zip(self.jump_values, self.jump_probs)))

    @property
    def is_gaussian(self) -> bool:
        """True when every cumulant beyond the second vanishes."""
        return self.jump_rate == 0 or not self.jump_values


def cumulant(law: LevyLaw, l: int) -> float:
    """l-th cumulant of the unit-volume noise law."""
    if l < 1:
        raise ValueError("cumulant order must be >= 1")
    jumps = law.jump_rate * law.jump_moment(l) if law.jump_rate else 0.0
    if l == 1:
        return law.drift + jumps
    if l == 2:
        return law.gaussian_var + jumps
    return jumps


def cumulants(law: LevyLaw, nmax: int) -> np.ndarray:
    """Array ``[c_1, ..., c_nmax]``."""
    return np.array([cumulant(law, l) for l in range(1, nmax + 1)])


@dataclass(frozen=True)
class LatticeNoiseLaw:
    base: LevyLaw
    cell_volume: float = 1.0

    def __post_init__(self):
        if not self.cell_volume > 0:
            raise ValueError("cell_volume must be > 0")

    def cumulant(self, l: int) -> float:
        """Cumulant of the site variable: ``c_l * v**(1-l)``."""
        return cumulant(self.base, l) * self.cell_volume ** (1 - l)


def stream(seed: int, index: int = 0) -> np.random.Generator:
    """Counter-based generator for the pair (seed, index).

    Philox keyed through SeedSequence spawn keys, so sample ``index`` is
    reproducible regardless of how the work is scheduled.
    """
    ss = np.random.SeedSequence(entropy=int(seed) % _SEED_MOD, spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(ss))


def sample_site_noise(law: LatticeNoiseLaw, count: int, seed: int, index: int = 0) -> np.ndarray:
    """Draw ``count`` i.i.d. site values of the lattice noise.

    Each cell integral is N(a v, sigma^2 v) plus a compound Poisson sum
    with intensity ``lam v``; for a finite jump law the latter is the sum
    over jump values y_i of ``y_i * Poisson(lam v p_i)`` (Poisson
    thinning).  The returned value is the cell integral divided by v.
    """
    if count < 0:
        raise ValueError("count must be >= 0")
    rng = stream(seed, index)
    base, v = law.base, law.cell_volume
    out = np.full(count, base.drift * v, dtype=np.float64)
    if base.gaussian_var > 0:
        out += math.sqrt(base.gaussian_var * v) * rng.standard_normal(count)
    if base.jump_rate > 0:
        for y, p in zip(base.jump_values, base.jump_probs):
            if p > 0:
                out += y * rng.poisson(base.jump_rate * v * p, size=count)
    out /= v
    return out


# ---------------------------------------------------------------------------
# potential function V(t) = log rho(t) + c t^2

def _jump_sum_distribution(law: LevyLaw, k: int) -> dict[float, float]:
    """Law of the sum of k i.i.d. jumps as {value: probability}."""
    dist = {0.0: 1.0}
    for _ in range(k):
        nxt: dict[float, float] = {}
        for z, q in dist.items():
            for y, p in zip(law.jump_values, law.jump_probs):
                key = round(z + y, 12)
                nxt[key] = nxt.get(key, 0.0) + q * p
        dist = nxt
    return dist


def site_density(law: LevyLaw, t, cell_volume: float = 1.0, tail: float = 1e-14):
    """Lebesgue density of the site variable, as a Gaussian mixture.

    The number of jumps in a cell is Poisson(lam v); the series over the
    jump count stops once the remaining Poisson mass is below ``tail``.
    """
    if law.gaussian_var <= 0:
        raise NoDensityError("the law has no Gaussian part and hence no Lebesgue density")
    v = cell_volume
    x = np.asarray(t, dtype=np.float64) * v
    sd = math.sqrt(law.gaussian_var * v)
    mu = law.jump_rate * v
    dens = np.zeros_like(x)
    if mu == 0:
        dens = stats.norm.pdf(x, loc=law.drift * v, scale=sd)
        return dens * v
    k = 0
    while True:
        wk = stats.poisson.pmf(k, mu)
        for z, q in _jump_sum_distribution(law, k).items():
            dens += wk * q * stats.norm.pdf(x, loc=law.drift * v + z, scale=sd)
        if stats.poisson.sf(k, mu) < tail:
            break
        k += 1
    return dens * v


def site_second_moment(law: LevyLaw, cell_volume: float = 1.0) -> float:
    lat = LatticeNoiseLaw(law, cell_volume)
    return lat.cumulant(2) + lat.cumulant(1) ** 2


def potential_V(law: LevyLaw, t, cell_volume: float = 1.0):
    """``log rho(t) + c t**2`` with ``c`` the second moment of the site law.

    For a Gaussian law this is an explicit quadratic; any interaction shows
    up as a departure from a quadratic (see :func:`interaction_free`).
    """
    c = site_second_moment(law, cell_volume)
    t = np.asarray(t, dtype=np.float64)
    return np.log(site_density(law, t, cell_volume)) + c * t**2


def interaction_free(law: LevyLaw) -> bool:
    """Gaussian site law: V is a quadratic plus a constant."""
    return law.is_gaussian


def site_density_fourier(law: LevyLaw, t: float, cell_volume: float = 1.0) -> float:
    """Density by numerical Fourier inversion of the characteristic function.

    Independent of :func:`site_density`; used as a cross-check.
    """
    if law.gaussian_var <= 0:
        raise NoDensityError("the law has no Gaussian part and hence no Lebesgue density")
    v = cell_volume
    x = t * v
    ys = np.array(law.jump_values)
    ps = np.array(law.jump_probs)

    def integrand(u):
        lev = -0.5 * law.gaussian_var * v * u * u
        phase = u * (law.drift * v - x)
        if law.jump_rate:
            lev += law.jump_rate * v * (np.dot(ps, np.cos(u * ys)) - 1.0)
            phase += law.jump_rate * v * np.dot(ps, np.sin(u * ys))
        return math.exp(lev) * math.cos(phase)

    cutoff = math.sqrt(2 * 40.0 / (law.gaussian_var * v))
    val, _ = integrate.quad(integrand, 0.0, cutoff, limit=400, epsabs=1e-15, epsrel=1e-12)
    return val / math.pi * v


def kstatistics(x: np.ndarray) -> np.ndarray:
    """Unbiased k-statistics k_1..k_4 of a sample."""
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    m = x.mean()
    d = x - m
    s2 = np.dot(d, d)
    s3 = np.sum(d**3)
    s4 = np.sum(d**4)
    k2 = s2 / (n - 1)
    k3 = n * s3 / ((n - 1) * (n - 2))
    k4 = n * ((n + 1) * s4 - 3 * (n - 1) * s2**2 / n) / ((n - 1) * (n - 2) * (n - 3))
    return np.array([m, k2, k3, k4])


def batched_kstatistics(x: np.ndarray, batches: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """k-statistics with batch-means standard errors."""
    x = np.asarray(x, dtype=np.float64)
    usable = (x.size // batches) * batches
    parts = x[:usable].reshape(batches, -1)
    per = np.array([kstatistics(p) for p in parts])
    return kstatistics(x), per.std(axis=0, ddof=1) / math.sqrt(batches)
