"""Gaussian-times-polynomial test functions with exact calculus.

A term is

    coef * prod_i P_i(x_i - c_i) exp(-(x_i - c_i)^2 / (2 w_i^2)) exp(i theta_i x_i)

and a :class:`TestFunction` is a finite sum of terms.  The family is closed
under differentiation, translation and the unitary Fourier transform
``(2 pi)^(-D/2) int exp(-i k.x) f(x) dx``, all done on coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

MAX_DEGREE = 6


class UnsupportedTestFunction(ValueError):
    """Requested operation leaves the representable family."""


def _trim(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=np.complex128)
    nz = np.nonzero(p)[0]
    return p[: nz[-1] + 1] if nz.size else np.zeros(1, dtype=np.complex128)


@dataclass(frozen=True)
class GaussTerm:
    coef: complex
    center: np.ndarray
    width: np.ndarray
    freq: np.ndarray
    polys: tuple

    def __post_init__(self):
        for name in ("center", "width", "freq"):
            arr = np.array(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        polys = tuple(_trim(p) for p in self.polys)
        object.__setattr__(self, "polys", polys)
        d = self.center.shape[0]
        if not (self.width.shape == self.freq.shape == (d,) and len(polys) == d):
            raise ValueError("center, width, freq and polys must all have one entry per axis")
        if np.any(self.width <= 0) or not np.all(np.isfinite(self.width)):
            raise ValueError("widths must be finite and > 0")
        if max(len(p) - 1 for p in polys) > MAX_DEGREE:
            raise UnsupportedTestFunction(f"polynomial degree above {MAX_DEGREE}")

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(p) - 1 for p in self.polys)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        u = x - self.center
        expo = -0.5 * np.sum((u / self.width) ** 2, axis=-1) + 1j * (x @ self.freq)
        val = self.coef * np.exp(expo)
        for i, p in enumerate(self.polys):
            if len(p) > 1:
                val = val * npoly.polyval(u[..., i], p)
            elif p[0] != 1:
                val = val * p[0]
        return val

    def abs_factor(self, axis: int, u: np.ndarray) -> np.ndarray:
        """``|P_i(u) exp(-u^2 / 2 w_i^2)|`` along one axis."""
        return np.abs(npoly.polyval(u, self.polys[axis])) * np.exp(
            -0.5 * (u / self.width[axis]) ** 2)

    def derivative(self, axis: int) -> "GaussTerm":
        p = self.polys[axis]
        w2 = self.width[axis] ** 2
        new = np.zeros(len(p) + 1, dtype=np.complex128)
        new[: len(p) - 1] += npoly.polyder(p) if len(p) > 1 else 0
        new[1:] -= p / w2
        new[: len(p)] += 1j * self.freq[axis] * p
        polys = list(self.polys)
        polys[axis] = new
        return GaussTerm(self.coef, self.center, self.width, self.freq, tuple(polys))

    def fourier(self) -> "GaussTerm":
        polys = []
        for p, w in zip(self.polys, self.width):
            # F[u^p g](kappa) = i^p d^p/dkappa^p [w exp(-w^2 kappa^2 / 2)]
            q = np.array([w], dtype=np.complex128)
            acc = np.zeros(len(p), dtype=np.complex128)
            for deg, a in enumerate(p):
                acc[: len(q)] += a * (1j) ** deg * q
                d = npoly.polyder(q) if len(q) > 1 else np.zeros(1)
                nxt = np.zeros(len(q) + 1, dtype=np.complex128)
                nxt[: len(d)] += d
                nxt[1:] -= w * w * q
                q = nxt
            polys.append(acc)
        coef = self.coef * np.exp(1j * float(self.freq @ self.center))
        return GaussTerm(coef, self.freq, 1.0 / self.width, -self.center, tuple(polys))

    def translate(self, shift: np.ndarray) -> "GaussTerm":
        """The term of ``x -> f(x - shift)``."""
        shift = np.asarray(shift, dtype=np.float64)
        coef = self.coef * np.exp(-1j * float(self.freq @ shift))
        return GaussTerm(coef, self.center + shift, self.width, self.freq, self.polys)


class TestFunction:
    """Finite sum of :class:`GaussTerm` objects on ``R^dim``."""

    __test__ = False  # not a pytest class

    def __init__(self, terms: Sequence[GaussTerm]):
        terms = tuple(terms)
        if not terms:
            raise ValueError("a test function needs at least one term")
        dims = {t.dim for t in terms}
        if len(dims) != 1:
            raise ValueError("terms live in different dimensions")
        self.terms = terms
        self.dim = dims.pop()

    @classmethod
    def gaussian(cls, center, width, degrees=None, coef: complex = 1.0,
                 freq=None) -> "TestFunction":
        """One term ``coef * prod_i u_i^{deg_i} exp(-u_i^2/2w_i^2) exp(i freq.x)``."""
        center = np.atleast_1d(np.asarray(center, dtype=np.float64))
        d = center.shape[0]
        width = np.broadcast_to(np.asarray(width, dtype=np.float64), (d,))
        degrees = (0,) * d if degrees is None else tuple(int(p) for p in degrees)
        if len(degrees) != d or min(degrees) < 0:
            raise ValueError("need one nonnegative degree per axis")
        freq = np.zeros(d) if freq is None else np.broadcast_to(np.asarray(freq, float), (d,))
        polys = tuple(np.eye(p + 1, dtype=np.complex128)[p] for p in degrees)
        return cls([GaussTerm(complex(coef), center, width, freq, polys)])

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.dim:
            raise ValueError(f"points need {self.dim} coordinates, got {x.shape[-1]}")
        out = self.terms[0](x)
        for t in self.terms[1:]:
            out = out + t(x)
        return out

    def __add__(self, other: "TestFunction") -> "TestFunction":
        if not isinstance(other, TestFunction):
            return NotImplemented
        return TestFunction(self.terms + other.terms)

    def __mul__(self, scalar) -> "TestFunction":
        return TestFunction([GaussTerm(t.coef * scalar, t.center, t.width, t.freq, t.polys)
                             for t in self.terms])

    __rmul__ = __mul__

    def __neg__(self) -> "TestFunction":
        return self * -1.0

    def __repr__(self) -> str:
        return f"TestFunction(dim={self.dim}, terms={len(self.terms)})"

    def derivative(self, orders: Sequence[int]) -> "TestFunction":
        """Exact partial derivative with multi-index ``orders``."""
        orders = tuple(int(o) for o in orders)
        if len(orders) != self.dim or min(orders) < 0:
            raise ValueError(f"need a multi-index of length {self.dim}")
        terms = []
        for t in self.terms:
            for axis, o in enumerate(orders):
                for _ in range(o):
                    t = t.derivative(axis)
            terms.append(t)
        return TestFunction(terms)

    def fourier(self) -> "TestFunction":
        """Unitary Fourier transform, again in the family."""
        return TestFunction([t.fourier() for t in self.terms])

    def translate(self, shift) -> "TestFunction":
        return TestFunction([t.translate(shift) for t in self.terms])

    def support_box(self, reach: float = 7.0) -> tuple[np.ndarray, np.ndarray]:
        """Box outside of which every term is below ``exp(-reach^2/2)`` of its scale."""
        lo = np.full(self.dim, np.inf)
        hi = np.full(self.dim, -np.inf)
        for t in self.terms:
            r = t.width * (reach + np.sqrt(np.asarray(t.degrees, dtype=float)))
            lo = np.minimum(lo, t.center - r)
            hi = np.maximum(hi, t.center + r)
        return lo, hi

    @property
    def min_width(self) -> float:
        return float(min(t.width.min() for t in self.terms))
