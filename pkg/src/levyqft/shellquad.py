"""Shell-avoiding tensor quadrature for integrands singular on ``k^2 = m^2``.

Energy integrals are split at every point where a factor
``|k^2 - m^2|^-alpha`` (or a coincidence of two such points) becomes
singular.  Each panel keeps a short subpanel at either end whose
Gauss-Legendre nodes are mapped by ``t -> t^q``, so nodes
never touch a singular point and algebraic endpoint behaviour is
integrated accurately.  Spatial directions use plain composite
Gauss-Legendre rules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

CHUNK_POINTS = 2_000_000


@lru_cache(maxsize=None)
def _legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


END_FRACTION = 0.1
MIDDLE_SUBPANELS = 2
NODES_PER_ORDER = MIDDLE_SUBPANELS + 2


@lru_cache(maxsize=None)
def _graded_unit(order: int, q: float) -> tuple[np.ndarray, np.ndarray]:
    """Unit-panel rule: graded end subpanels plus plain Gauss in the middle."""
    t, w = _legendre(order)
    e = END_FRACTION
    left = e * t**q
    wleft = e * w * q * t ** (q - 1)
    h = (1.0 - 2 * e) / MIDDLE_SUBPANELS
    inner = [e + h * (j + t) for j in range(MIDDLE_SUBPANELS)]
    nodes = np.concatenate([left, *inner, 1.0 - left[::-1]])
    weights = np.concatenate([wleft, *([h * w] * MIDDLE_SUBPANELS), wleft[::-1]])
    return nodes, weights


def grading_for(exponent: float) -> float:
    """Grading for an endpoint singularity ``t^-exponent``.

    Aims at ``t^(q(1-exponent) - 1)`` with ``q(1-exponent) >= 2``; capped at 6
    so the closest node stays resolvable next to a shell energy of order one.
    """
    if exponent <= 0:
        return 1.0
    return float(min(6.0, max(2.0, math.ceil(2.0 / max(1e-9, 1.0 - exponent)))))


def graded_panels(breaks: np.ndarray, order: int, q: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights on consecutive panels ``breaks[..., j] .. breaks[..., j+1]``.

    ``breaks`` must be sorted along the last axis; empty panels get zero
    weight.  Returns arrays of shape
    ``breaks.shape[:-1] + (panels * NODES_PER_ORDER * order,)``.
    """
    phi, w = _graded_unit(order, q)
    a = breaks[..., :-1, None]
    h = breaks[..., 1:, None] - a
    nodes = a + h * phi
    weights = h * w
    shape = breaks.shape[:-1] + ((breaks.shape[-1] - 1) * phi.shape[0],)
    return nodes.reshape(shape), weights.reshape(shape)


def gauss_panels(lo, hi, panels: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre on ``[lo, hi]`` (arrays broadcast)."""
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    edges = lo[..., None] + (hi - lo)[..., None] * np.linspace(0.0, 1.0, panels + 1)
    t, w = _legendre(order)
    a = edges[..., :-1, None]
    h = np.maximum(edges[..., 1:, None] - a, 0.0)
    shape = edges.shape[:-1] + (-1,)
    return (a + h * t).reshape(shape), (h * w).reshape(shape)


def gauss_on_breaks(breaks: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre on consecutive panels of sorted ``breaks`` (last axis)."""
    t, w = _legendre(order)
    a = breaks[..., :-1, None]
    h = np.maximum(breaks[..., 1:, None] - a, 0.0)
    shape = breaks.shape[:-1] + ((breaks.shape[-1] - 1) * order,)
    return (a + h * t).reshape(shape), (h * w).reshape(shape)


APEX_RINGS = ()


def apex_breaks(lo, hi, apexes, m: float, panels: int) -> np.ndarray:
    """Spatial breaks: ``panels`` uniform pieces plus rings around shell apexes.

    Near an apex ``x = a`` the shell energy ``sqrt(m^2 + (x - a)^2)`` bends on
    the scale ``m``; breaks at ``a`` and ``a +- r m`` resolve it.
    """
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    pts = [lo + (hi - lo) * j / panels for j in range(1, panels)]
    for a in apexes:
        a = np.broadcast_to(np.asarray(a, dtype=np.float64), lo.shape)
        pts.append(a)
        for r in APEX_RINGS:
            pts += [a - r * m, a + r * m]
    return sorted_breaks(lo, hi, pts)


def sorted_breaks(lo, hi, points) -> np.ndarray:
    """``[lo, clip(points), hi]`` sorted along the last axis."""
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    pts = [np.clip(p, lo, hi) for p in points]
    return np.sort(np.stack([lo, *pts, hi], axis=-1), axis=-1)


def omega(m: float, kvec: np.ndarray) -> np.ndarray:
    return np.sqrt(m * m + np.sum(kvec * kvec, axis=-1))


@dataclass(frozen=True)
class Resolution:
    """Panel counts and Gauss orders; ``spatial_panels`` may be per axis."""

    spatial_panels: int | tuple[int, ...] = 4
    spatial_order: int = 8
    energy_order: int = 5

    def panels(self, axis: int) -> int:
        p = self.spatial_panels
        return p if isinstance(p, int) else p[axis]

    def refined(self, factor: float = 1.5, spatial: bool = True,
                energy: bool = True) -> "Resolution":
        so, eo = self.spatial_order, self.energy_order
        return Resolution(self.spatial_panels,
                          int(math.ceil(so * factor)) if spatial else so,
                          int(math.ceil(eo * factor)) if energy else eo)


def _spatial_product(lo, hi, res: Resolution):
    """Tensor Gauss rule over the box ``lo..hi`` (spatial components only)."""
    axes = [gauss_panels(a, b, res.panels(i), res.spatial_order)
            for i, (a, b) in enumerate(zip(lo, hi))]
    if not axes:
        return np.zeros((1, 0)), np.ones(1)
    grids = np.meshgrid(*[x for x, _ in axes], indexing="ij")
    wgrid = np.meshgrid(*[w for _, w in axes], indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=-1)
    weights = np.prod(np.stack([g.ravel() for g in wgrid], axis=-1), axis=-1)
    return nodes, weights


def integrate_spacetime(func: Callable[[np.ndarray], np.ndarray], lo, hi, m: float,
                        res: Resolution, q: float) -> tuple[complex, float]:
    """``int_box func(k) dk`` over a box in ``R^(s+1)``, split at ``k0 = +-omega``.

    Returns the integral and the integral of ``|func|``.
    """
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    if np.any(hi <= lo):
        return 0.0, 0.0
    xs, ws = _spatial_product(lo[1:], hi[1:], res)
    om = omega(m, xs)
    breaks = sorted_breaks(np.full_like(om, lo[0]), np.full_like(om, hi[0]), [-om, om])
    k0, w0 = graded_panels(breaks, res.energy_order, q)
    total, total_abs = 0.0 + 0.0j, 0.0
    per = k0.shape[1]
    step = max(1, CHUNK_POINTS // per)
    for i in range(0, xs.shape[0], step):
        sl = slice(i, i + step)
        kk = np.concatenate([k0[sl, :, None],
                             np.broadcast_to(xs[sl, None, :], k0[sl].shape + (xs.shape[1],))],
                            axis=-1)
        vals = func(kk)
        w = w0[sl] * ws[sl, None]
        total += np.sum(vals * w)
        total_abs += float(np.sum(np.abs(vals) * w))
    return total, total_abs


def integrate_three_point(func: Callable[[np.ndarray], np.ndarray], boxes, m: float,
                          res: Resolution, q: float,
                          support: Callable[[np.ndarray], np.ndarray] | None = None
                          ) -> tuple[complex, float]:
    """Integral over ``(k1, k2)`` with ``k3 = -k1 - k2``, for one spatial dimension.

    ``boxes`` gives ``(lo, hi)`` for each of the three momenta; ``k2`` is
    clipped so that ``k3`` stays in its box.  ``func`` receives momenta of
    shape ``(..., 3, 2)``.  If ``support`` is given, inner energy panels
    on which it vanishes at the midpoint are skipped; this is exact when
    its zero set is a union of panels, as for indicator-weighted densities.
    """
    (lo1, hi1), (lo2, hi2), (lo3, hi3) = [(np.asarray(a, float), np.asarray(b, float))
                                          for a, b in boxes]
    # spatial: k1 on its box, k2 per line; apexes where a spatial momentum vanishes
    x1, wx1 = gauss_on_breaks(apex_breaks(lo1[1], hi1[1], [0.0], m, res.panels(0)),
                              res.spatial_order)
    lo2x = np.maximum(lo2[1], -hi3[1] - x1)
    hi2x = np.maximum(np.minimum(hi2[1], -lo3[1] - x1), lo2x)
    x2, wx2 = gauss_on_breaks(apex_breaks(lo2x, hi2x, [0.0, -x1], m, res.panels(1)),
                              res.spatial_order)
    x1 = np.broadcast_to(x1[:, None], x2.shape).ravel()
    wsp = (wx1[:, None] * wx2).ravel()
    x2 = x2.ravel()
    keep = wsp > 0
    x1, x2, wsp = x1[keep], x2[keep], wsp[keep]
    om1 = omega(m, x1[:, None])
    om2 = omega(m, x2[:, None])
    om3 = omega(m, (x1 + x2)[:, None])
    # k1 energy: own shell plus coincidences of the k2-energy break points
    b1 = sorted_breaks(np.full_like(om1, lo1[0]), np.full_like(om1, hi1[0]),
                       [-om1, om1, om2 + om3, om2 - om3, -om2 + om3, -om2 - om3])
    k10, w10 = graded_panels(b1, res.energy_order, q)
    total, total_abs = 0.0 + 0.0j, 0.0
    per_panel = NODES_PER_ORDER * res.energy_order
    step = max(1, CHUNK_POINTS // (k10.shape[1] * 5 * per_panel))

    def momenta(e1, xa, xb, e2):
        k1 = np.stack([e1, xa], axis=-1)
        k2 = np.stack([e2, xb], axis=-1)
        return np.stack([k1, k2, -k1 - k2], axis=-2)

    for i in range(0, x1.shape[0], step):
        sl = slice(i, i + step)
        e1 = k10[sl]
        o2 = om2[sl, None]
        o3 = om3[sl, None]
        lo2e = np.maximum(lo2[0], -hi3[0] - e1)
        hi2e = np.maximum(np.minimum(hi2[0], -lo3[0] - e1), lo2e)
        b2 = sorted_breaks(lo2e, hi2e, [np.broadcast_to(-o2, e1.shape),
                                        np.broadcast_to(o2, e1.shape), -e1 - o3, -e1 + o3])
        xa = np.broadcast_to(x1[sl, None, None], b2.shape[:-1] + (b2.shape[-1] - 1,))
        xb = np.broadcast_to(x2[sl, None, None], xa.shape)
        ea = np.broadcast_to(e1[..., None], xa.shape)
        live = b2[..., 1:] > b2[..., :-1]
        if support is not None:
            mid = 0.5 * (b2[..., 1:] + b2[..., :-1])
            live &= support(momenta(ea, xa, xb, mid)) != 0
        k20, w20 = graded_panels(b2, res.energy_order, q)
        mask = np.repeat(live, per_panel, axis=-1)
        if not mask.any():
            continue
        w = (w20 * w10[sl, :, None] * wsp[sl, None, None])[mask]
        e1n = np.broadcast_to(e1[..., None], k20.shape)[mask]
        xan = np.broadcast_to(x1[sl, None, None], k20.shape)[mask]
        xbn = np.broadcast_to(x2[sl, None, None], k20.shape)[mask]
        vals = func(momenta(e1n, xan, xbn, k20[mask]))
        total += np.sum(vals * w)
        total_abs += float(np.sum(np.abs(vals) * w))
    return total, total_abs
