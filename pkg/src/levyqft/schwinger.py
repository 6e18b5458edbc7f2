"""Lattice Schwinger functions of phi = L^{-1} eta from the partition formula.

The truncated function of a block of l points is

    S_l^T(x_1..x_l) = c_l * sum_x prod_r G(x_r - x) * v,

and the full moment sums the product of truncated blocks over every set
partition of the points.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .fracop import GreenKernel
from .lattice import dft_backward, dft_forward
from .noise import LevyLaw, cumulant
from .partitions import set_partitions, subsets

MAX_SCHWINGER_POINTS = 8


class LatticeMismatchError(ValueError):
    pass


def _normalize_points(points, green: GreenKernel) -> list[tuple[int, ...]]:
    pts = [tuple(int(c) for c in p) for p in points]
    if not pts:
        raise ValueError("need at least one point")
    for p in pts:
        if len(p) != green.lattice.dim:
            raise LatticeMismatchError(
                f"point {p} has {len(p)} coordinates, lattice has {green.lattice.dim}"
            )
    return [green.lattice.wrap(p) for p in pts]


def _block_direct(points, green: GreenKernel) -> float:
    prod = green.shifted(points[0]).copy()
    for p in points[1:]:
        prod *= green.shifted(p)
    return float(prod.sum())


def _block_spectral(points, green: GreenKernel) -> float:
    # sum_x G(p1 - x) F(x) is the convolution (G * F)(p1)
    lat = green.lattice
    rest = np.ones(lat.shape)
    for p in points[1:]:
        rest = rest * green.shifted(p)
    conv = dft_backward(green.spectrum * dft_forward(rest) * math.sqrt(lat.size))
    return float(conv[points[0]])


def truncated_schwinger(points, green: GreenKernel, c_l: float, method: str = "auto") -> float:
    """``c_l * sum_x prod_r G(x_r - x) * v`` for the given lattice points.

    ``method`` is ``"direct"``, ``"spectral"`` or ``"auto"`` (spectral when
    all points are distinct, direct otherwise).
    """
    pts = _normalize_points(points, green)
    if method == "auto":
        method = "spectral" if len(set(pts)) == len(pts) else "direct"
    if method == "direct":
        raw = _block_direct(pts, green)
    elif method == "spectral":
        raw = _block_spectral(pts, green)
    else:
        raise ValueError(f"unknown method {method!r}")
    return c_l * raw * green.lattice.cell_volume


def schwinger(points, law: LevyLaw | Sequence[float], green: GreenKernel,
              method: str = "direct") -> float:
    """Full moment ``E[phi(x_1)...phi(x_n)]`` from the partition sum.

    ``law`` may be a LevyLaw or an explicit cumulant list ``[c_1, c_2, ...]``.
    """
    pts = _normalize_points(points, green)
    n = len(pts)
    if n > MAX_SCHWINGER_POINTS:
        raise ValueError(f"at most {MAX_SCHWINGER_POINTS} points supported, got {n}")
    if isinstance(law, LevyLaw):
        cs = [cumulant(law, l) for l in range(1, n + 1)]
    else:
        cs = list(law)
        if len(cs) < n:
            raise ValueError(f"need {n} cumulants, got {len(cs)}")
    blocks: dict[tuple[int, ...], float] = {}

    def block_value(block):
        if block not in blocks:
            c = cs[len(block) - 1]
            blocks[block] = 0.0 if c == 0 else truncated_schwinger(
                [pts[i] for i in block], green, c, method=method
            )
        return blocks[block]

    terms = []
    for part in set_partitions(n):
        prod = 1.0
        for block in part:
            prod *= block_value(block)
            if prod == 0.0:
                break
        terms.append(prod)
    return math.fsum(terms)


def truncated_table(points, law: LevyLaw, green: GreenKernel) -> dict:
    """Truncated functions for every nonempty subset of the point indices."""
    pts = _normalize_points(points, green)
    return {
        s: truncated_schwinger([pts[i] for i in s], green, cumulant(law, len(s)))
        for s in subsets(len(pts))
    }


def moment_table(points, law: LevyLaw, green: GreenKernel) -> dict:
    """Full moments for every nonempty subset of the point indices."""
    pts = _normalize_points(points, green)
    return {s: schwinger([pts[i] for i in s], law, green) for s in subsets(len(pts))}
