"""The operator L = (-Laplacian + m^2)^alpha on periodic lattices and in the continuum.

Fractional powers are always taken spectrally.  Lattice Green functions
carry the cell volume, ``L G = delta / v``, so that ``sum_x G(x) v``
mimics an integral and ``G_alpha * G_beta * v = G_{alpha+beta}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import integrate, special

from .lattice import FieldSample, LatticeSpec, MomentumGrid, dft_backward, dft_forward

CONTINUUM = "continuum_symbol"
LATTICE = "lattice_laplacian_symbol"
SYMBOL_KINDS = (CONTINUUM, LATTICE)


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested accuracy."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class OperatorSpec:
    alpha: float
    mass: float = 1.0
    symbol_kind: str = LATTICE

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not self.mass > 0:
            raise ValueError(f"mass must be > 0, got {self.mass}")
        if self.symbol_kind not in SYMBOL_KINDS:
            raise ValueError(f"symbol_kind must be one of {SYMBOL_KINDS}")

    def with_alpha(self, alpha: float) -> "OperatorSpec":
        return OperatorSpec(alpha, self.mass, self.symbol_kind)


def symbol(spec: OperatorSpec, k, spacings=None) -> np.ndarray:
    """Symbol of L at momenta ``k`` (last axis = components).

    The lattice kind replaces ``k_i^2`` by ``4/a_i^2 sin^2(a_i k_i / 2)``
    and needs ``spacings``.
    """
    k = np.asarray(k, dtype=np.float64)
    if spec.symbol_kind == CONTINUUM:
        k2 = np.sum(k * k, axis=-1)
    else:
        if spacings is None:
            raise ValueError("lattice symbol needs the lattice spacings")
        a = np.asarray(spacings, dtype=np.float64)
        k2 = np.sum(4.0 / a**2 * np.sin(0.5 * a * k) ** 2, axis=-1)
    return (k2 + spec.mass**2) ** spec.alpha


def symbol_grid(spec: OperatorSpec, lattice: LatticeSpec) -> np.ndarray:
    """Symbol on every lattice momentum, FFT ordered, lattice-shaped."""
    mesh = MomentumGrid(lattice).mesh()
    k2 = 0.0
    for ki, a in zip(mesh, lattice.spacings):
        if spec.symbol_kind == CONTINUUM:
            k2 = k2 + ki**2
        else:
            k2 = k2 + 4.0 / a**2 * np.sin(0.5 * a * ki) ** 2
    k2 = np.broadcast_to(k2, lattice.shape)
    return (k2 + spec.mass**2) ** spec.alpha


def apply_inverse(spec: OperatorSpec, field: FieldSample) -> FieldSample:
    """Solve ``L phi = field`` spectrally."""
    sym = symbol_grid(spec, field.lattice)
    return dft_backward(dft_forward(field) / sym, field.lattice)


def apply_forward(spec: OperatorSpec, field: FieldSample) -> FieldSample:
    sym = symbol_grid(spec, field.lattice)
    return dft_backward(dft_forward(field) * sym, field.lattice)


def apply_inverse_batch(spec: OperatorSpec, lattice: LatticeSpec, values: np.ndarray) -> np.ndarray:
    """:func:`apply_inverse` over a stack of samples (leading axis)."""
    axes = tuple(range(1, values.ndim))
    sym = symbol_grid(spec, lattice)
    spec_vals = np.fft.fftn(values, axes=axes, norm="ortho") / sym
    return np.fft.ifftn(spec_vals, axes=axes, norm="ortho").real


def helmholtz_stencil(field: np.ndarray, lattice: LatticeSpec, mass: float) -> np.ndarray:
    """Direct second-difference evaluation of ``(-Delta_lattice + m^2) f``."""
    out = mass**2 * field
    for axis, a in enumerate(lattice.spacings):
        out = out + (2.0 * field - np.roll(field, 1, axis) - np.roll(field, -1, axis)) / a**2
    return out


@dataclass(frozen=True)
class GreenKernel:
    spec: OperatorSpec
    lattice: LatticeSpec
    values: np.ndarray = field(repr=False)

    def at(self, displacement) -> float:
        """G at an integer displacement (wrapped periodically)."""
        return float(self.values[self.lattice.wrap(displacement)])

    def shifted(self, point) -> np.ndarray:
        """Array over sites x of ``G(point - x)``."""
        reflected = np.roll(np.flip(self.values), 1, axis=tuple(range(self.lattice.dim)))
        return np.roll(reflected, tuple(point), axis=tuple(range(self.lattice.dim)))

    @cached_property
    def spectrum(self) -> np.ndarray:
        return dft_forward(self.values)

    def total(self) -> float:
        """``sum_x G(x) v``, equal to ``1 / m**(2 alpha)``."""
        return float(self.values.sum() * self.lattice.cell_volume)


def green_lattice(spec: OperatorSpec, lattice: LatticeSpec) -> GreenKernel:
    """Lattice Green function: ``L^{-1}`` applied to ``delta_0 / v``."""
    sym = symbol_grid(spec, lattice)
    # DFT of a unit delta at the origin is the constant 1/sqrt(N)
    spectrum = np.full(lattice.shape, 1.0 / math.sqrt(lattice.size)) / sym
    values = dft_backward(spectrum) / lattice.cell_volume
    values.setflags(write=False)
    return GreenKernel(spec, lattice, values)


def convolve(kernel_a: GreenKernel, kernel_b: GreenKernel) -> np.ndarray:
    """``(G_a * G_b)(x) v`` via the DFT."""
    lat = kernel_a.lattice
    if kernel_b.lattice != lat:
        raise ValueError("kernels live on different lattices")
    prod = kernel_a.spectrum * kernel_b.spectrum * math.sqrt(lat.size)
    return dft_backward(prod) * lat.cell_volume


# ---------------------------------------------------------------------------
# continuum Green function

def green_continuum(spec: OperatorSpec, r: float, dim: int, epsrel: float = 1e-10) -> float:
    """Continuum Green function of L in ``dim`` dimensions at distance r > 0.

    Uses the heat-kernel representation

        G(r) = 1/Gamma(alpha) int_0^inf t^(alpha-1) e^(-t m^2) (4 pi t)^(-d/2) e^(-r^2/4t) dt,

    integrated adaptively in ``log t``; absolutely convergent for r > 0.
    """
    if not r > 0:
        raise ValueError("green_continuum needs r > 0")
    alpha, m = spec.alpha, spec.mass
    lognorm = -math.lgamma(alpha) - 0.5 * dim * math.log(4 * math.pi)

    def integrand(y):
        if abs(y) > 700:
            return 0.0
        t = math.exp(y)
        e = (alpha - 0.5 * dim) * y - t * m * m - r * r / (4.0 * t) + lognorm
        return math.exp(e) if e > -745 else 0.0

    # saddle of the exponent in log t
    p = alpha - 0.5 * dim
    t0 = (p + math.sqrt(p * p + m * m * r * r)) / (2 * m * m)
    y0 = math.log(t0)
    total, err_total = 0.0, 0.0
    for lo, hi in ((-math.inf, y0), (y0, math.inf)):
        val, err, info = integrate.quad(
            integrand, lo, hi, epsabs=0.0, epsrel=epsrel, limit=500, full_output=1
        )[:3]
        total += val
        err_total += err
    if not math.isfinite(total) or total <= 0 or err_total > 1e3 * epsrel * abs(total):
        raise QuadratureError(
            "green_continuum quadrature did not converge",
            r=r, dim=dim, alpha=alpha, mass=m, value=total, error=err_total,
        )
    return total


def green_continuum_bessel(spec: OperatorSpec, r, dim: int):
    """Closed Bessel-K (Matern) form of the continuum Green function."""
    alpha, m = spec.alpha, spec.mass
    r = np.asarray(r, dtype=np.float64)
    nu = 0.5 * dim - alpha
    pref = 2.0 ** (1 - alpha) / ((2 * math.pi) ** (0.5 * dim) * math.gamma(alpha))
    return pref * (m / r) ** nu * special.kv(nu, m * r)
