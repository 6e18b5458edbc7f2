"""Numerical side of the Hilbert-space-structure condition.

Contents:

* :func:`schwartz_norm`, the weighted sup norms ``||f||_{K,N}``;
* :func:`pairing`, ``int W_n^T f`` over the momentum hyperplane;
* :func:`bound_ratio_study`, the family study of ``|pairing| / ||f||_{0,2s+2}``;
* :func:`m_measure_density`, the majorising measures ``M_j`` (alpha < 1/2);
* :func:`local_integrability_study`, shell scaling of ``|k^2 - m^2|^-p``;
* :func:`hsc_split_check`, the Cauchy-Schwarz chain at ``j = l = 1``.

Constants that only exist abstractly (``a_n``, ``C_{j,l}``) are calibrated
as twice the largest ratio seen over a family; no value is claimed
beyond that.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
from scipy import integrate, optimize

from .partitions import set_partitions
from .reports import AxiomReport
from .shellquad import (Resolution, gauss_panels, grading_for, integrate_spacetime,
                        integrate_three_point, omega)
from .testfunctions import GaussTerm, TestFunction, UnsupportedTestFunction
from .wightman import (ShellSingularityError, density_evaluator, fused_density, minkowski_square,
                       two_point_shell_density)

PAIRING_RTOL = 1e-4
# absolute floor for pairings that vanish numerically (disjoint supports)
PAIRING_ATOL = 1e-14


# ---------------------------------------------------------------------------
# Schwartz norms

@dataclass(frozen=True)
class SchwartzNormSpec:
    K: int
    N: int

    def __post_init__(self):
        if self.K < 0 or self.N < 0:
            raise ValueError("K and N must be >= 0")


def _multi_indices(dim: int, max_order: int):
    for total in range(max_order + 1):
        for combo in itertools.combinations_with_replacement(range(dim), total):
            beta = [0] * dim
            for axis in combo:
                beta[axis] += 1
            yield tuple(beta)


def _maximize(func: Callable[[np.ndarray], np.ndarray], lo: np.ndarray, hi: np.ndarray,
              points_per_axis: int, starts: int = 6) -> float:
    """Grid search followed by Nelder-Mead polishing of the best cells."""
    axes = [np.linspace(a, b, points_per_axis) for a, b in zip(lo, hi)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(lo))
    vals = func(grid)
    best = float(vals.max())
    if best <= 0:
        return 0.0
    order = np.argsort(vals)[::-1][:starts]
    for i in order:
        res = optimize.minimize(lambda y: -float(func(y[None, :])[0]) / best, grid[i],
                                method="Nelder-Mead",
                                options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 4000})
        best = max(best, -res.fun * best)
    # boundary layer of the grid must be negligible (tail check)
    edge = np.zeros(len(grid), dtype=bool)
    idx = np.stack(np.meshgrid(*[np.arange(points_per_axis)] * len(lo), indexing="ij"),
                   axis=-1).reshape(-1, len(lo))
    edge |= np.any((idx == 0) | (idx == points_per_axis - 1), axis=1)
    if np.any(vals[edge] > 1e-3 * best):
        raise RuntimeError("sup search box too small")
    return best


def _sup_refined(func, lo, hi, base_points: int, rtol: float = 1e-3) -> float:
    # values returned are attained, so refinement can only raise them
    prev = _maximize(func, lo, hi, base_points)
    pts = base_points
    for _ in range(3):
        pts = int(pts * 1.6) + 1
        cur = _maximize(func, lo, hi, pts)
        if abs(cur - prev) <= rtol * max(cur, 1e-300):
            return max(cur, prev)
        prev = max(cur, prev)
    return prev


def _search_box(terms: Sequence[GaussTerm], axes: Sequence[int], N: int):
    lo = np.full(len(axes), np.inf)
    hi = np.full(len(axes), -np.inf)
    for t in terms:
        for j, ax in enumerate(axes):
            # beyond sqrt(deg + N) widths the profile u^(deg+N) exp(-u^2/2w^2) decreases
            reach = t.width[ax] * (math.sqrt(2.0 * (t.degrees[ax] + N + 1)) + 6.0)
            lo[j] = min(lo[j], min(t.center[ax], 0.0) - reach)
            hi[j] = max(hi[j], max(t.center[ax], 0.0) + reach)
    return lo, hi


def _grid_points(dim: int) -> int:
    return max(7, int(round(4e4 ** (1.0 / dim))))


def schwartz_norm(f: TestFunction, spec: SchwartzNormSpec, n: int, s: int,
                  rtol: float = 1e-3) -> float:
    """``sup_{x, |beta_l| <= K} |prod_l (1+|x_l|^2)^(N/2) d^beta_l f(x)|``.

    Every returned value is attained at a concrete point, so the result
    never overestimates the supremum; grid refinement stops once two
    levels agree to ``rtol``.  Single-term functions factor over the n
    point groups and are searched group by group.
    """
    g = s + 1
    if f.dim != g * n:
        raise ValueError(f"test function has dimension {f.dim}, expected {(s + 1) * n}")
    if spec.K > 2:
        raise UnsupportedTestFunction("derivative order K > 2 is not supported")
    if spec.N > 4 * s + 4:
        raise UnsupportedTestFunction(f"weight N > {4 * s + 4} is not supported")
    groups = [list(range(l * g, (l + 1) * g)) for l in range(n)]
    betas = list(_multi_indices(g, spec.K))

    if len(f.terms) == 1:
        term = f.terms[0]
        total = abs(term.coef)
        for axes in groups:
            best = 0.0
            for beta in betas:
                t = GaussTerm(1.0, term.center, term.width, term.freq, term.polys)
                for ax, order in zip(axes, beta):
                    for _ in range(order):
                        t = t.derivative(ax)
                lo, hi = _search_box([t], axes, spec.N)

                def h(y, t=t, axes=axes):
                    val = (1.0 + np.sum(y * y, axis=-1)) ** (0.5 * spec.N)
                    for j, ax in enumerate(axes):
                        val = val * t.abs_factor(ax, y[..., j] - t.center[ax])
                    return val

                best = max(best, _sup_refined(h, lo, hi, _grid_points(g), rtol))
            total *= best
        return float(total)

    best = 0.0
    for beta_all in itertools.product(betas, repeat=n):
        d = f.derivative([b for beta in beta_all for b in beta])
        lo, hi = _search_box(d.terms, list(range(f.dim)), spec.N * n)

        def h(x, d=d):
            w = 1.0
            for axes in groups:
                w = w * (1.0 + np.sum(x[..., axes] ** 2, axis=-1)) ** (0.5 * spec.N)
            return w * np.abs(d(x))

        best = max(best, _sup_refined(h, lo, hi, _grid_points(f.dim), rtol))
    return float(best)


# ---------------------------------------------------------------------------
# pairings

@dataclass(frozen=True)
class ShellMeasure:
    """The alpha = 1/2 two-point measure ``2 pi c_2 / (2 omega) d^s k`` on ``k_1^0 = -omega``."""

    m: float
    s: int
    c_2: float = 1.0

    def density(self, kvec: np.ndarray) -> np.ndarray:
        return two_point_shell_density(self.m, self.s, kvec, self.c_2)


@dataclass
class PairingResult:
    value: complex
    error: float
    abs_integral: float
    converged: bool
    route: str
    details: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {"real": float(np.real(self.value)), "imag": float(np.imag(self.value)),
                "error": self.error, "abs_integral": self.abs_integral,
                "converged": self.converged, "route": self.route, "details": self.details}


def _refine(run: Callable[[Resolution], tuple[complex, float]], res: Resolution,
            rtol: float, max_refinements: int, atol: float = PAIRING_ATOL,
            split_energy: bool = False):
    """Refine until successive levels agree.

    With ``split_energy`` the energy order is first raised at the coarsest
    spatial level until it meets half the tolerance, then held fixed; that
    energy error is added to the spatial differences.
    """
    prev = run(res)
    energy_err = 0.0
    if split_energy:
        for _ in range(max_refinements):
            res = res.refined(spatial=False)
            cur = run(res)
            energy_err = abs(cur[0] - prev[0])
            prev = cur
            if energy_err <= 0.5 * (rtol * abs(cur[0]) + atol):
                break
    cur, err = prev, math.inf
    for _ in range(max_refinements):
        res = res.refined(energy=not split_energy)
        cur = run(res)
        err = abs(cur[0] - prev[0]) + energy_err
        if err <= rtol * abs(cur[0]) + atol:
            return cur, err, True, res
        prev = cur
    return cur, err, False, res


# pairings can be carried by Gaussian tails alone, so truncate only at e^(-49/2)
PAIRING_REACH = 7.0


def _group_boxes(f: TestFunction, n: int, s: int):
    lo, hi = f.support_box(PAIRING_REACH)
    g = s + 1
    return [(lo[l * g:(l + 1) * g], hi[l * g:(l + 1) * g]) for l in range(n)]


def _shell_cartesian(measure: ShellMeasure, f: TestFunction, rtol: float,
                     max_refinements: int) -> PairingResult:
    (lo1, hi1), (lo2, hi2) = _group_boxes(f, 2, measure.s)
    lo = np.maximum(lo1[1:], -hi2[1:])
    hi = np.minimum(hi1[1:], -lo2[1:])
    if np.any(hi <= lo):
        return PairingResult(0.0, 0.0, 0.0, True, "shell-cartesian")

    def run(res: Resolution):
        axes = [gauss_panels(a, b, res.spatial_panels, res.spatial_order)
                for a, b in zip(lo, hi)]
        kv = np.stack(np.meshgrid(*[x for x, _ in axes], indexing="ij"), -1)
        kv = kv.reshape(-1, measure.s)
        w = np.prod(np.stack(np.meshgrid(*[x for _, x in axes], indexing="ij"), -1)
                    .reshape(-1, measure.s), axis=-1)
        om = omega(measure.m, kv)
        k1 = np.concatenate([-om[:, None], kv], axis=-1)
        vals = measure.density(kv) * f(np.concatenate([k1, -k1], axis=-1))
        return np.sum(vals * w), float(np.sum(np.abs(vals) * w))

    (val, l1), err, ok, res = _refine(run, Resolution(4, 12, 1), rtol, max_refinements)
    return PairingResult(complex(val), err, l1, ok, "shell-cartesian",
                         {"spatial_order": res.spatial_order})


def _sphere_rule(s: int, count: int):
    """Directions and weights integrating over the unit sphere ``S^(s-1)``."""
    if s == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    phi = 2 * math.pi * np.arange(count) / count
    if s == 2:
        return np.stack([np.cos(phi), np.sin(phi)], -1), np.full(count, 2 * math.pi / count)
    if s == 3:
        x, w = np.polynomial.legendre.leggauss(count // 2)
        ct, ph = np.meshgrid(x, phi, indexing="ij")
        st = np.sqrt(1 - ct**2)
        dirs = np.stack([st * np.cos(ph), st * np.sin(ph), ct], -1).reshape(-1, 3)
        wts = (w[:, None] * np.full(count, 2 * math.pi / count)[None, :]).ravel()
        return dirs, wts
    raise ValueError("spherical route supports s <= 3")


def shell_pairing_spherical(measure: ShellMeasure, f: TestFunction, epsrel: float = 1e-11,
                            angular: int = 64) -> complex:
    """Independent route: rapidity ``|k| = m sinh(eta)`` plus an angular rule.

    ``d^s k / omega = (m sinh eta)^(s-1) d eta d Omega``.
    """
    s, m = measure.s, measure.m
    lo, hi = f.support_box()
    kmax = float(np.max(np.abs(np.concatenate([lo, hi]))))
    eta_max = math.asinh(kmax / m)
    dirs, wts = _sphere_rule(s, angular)

    def radial(eta: float, part) -> float:
        r = m * math.sinh(eta)
        kv = r * dirs
        om = math.sqrt(m * m + r * r)
        k1 = np.concatenate([np.full((len(kv), 1), -om), kv], axis=-1)
        vals = f(np.concatenate([k1, -k1], axis=-1))
        ang = np.sum(part(vals) * wts)
        return math.pi * measure.c_2 * r ** (s - 1) * ang

    out = []
    for part in (np.real, np.imag):
        v, _ = integrate.quad(radial, 0.0, eta_max, args=(part,), epsabs=0.0,
                              epsrel=epsrel, limit=400)
        out.append(v)
    return complex(out[0], out[1])


def pairing(n: int, density, f: TestFunction, m: float, s: int, alpha: float = 0.25,
            rtol: float = PAIRING_RTOL, atol: float = PAIRING_ATOL, max_refinements: int = 4,
            resolution: Resolution | None = None) -> PairingResult:
    """``int W_n^T(k) f(k)`` over the hyperplane ``sum k = 0``.

    ``density`` is a callable on momenta of shape ``(..., n, s+1)`` (its
    values are taken with respect to ``dk_1 .. dk_{n-1}``) or a
    :class:`ShellMeasure` for the alpha = 1/2 two-point function.
    ``alpha`` only sets the endpoint grading of the energy panels.  The
    error is the change between the last two refinement levels; the
    result is flagged unconverged unless it is below
    ``rtol * |value| + atol``.
    """
    if n not in (2, 3):
        raise ValueError("pairing supports n = 2 and n = 3")
    if f.dim != (s + 1) * n:
        raise ValueError(f"test function has dimension {f.dim}, expected {(s + 1) * n}")
    if isinstance(density, ShellMeasure):
        if n != 2 or density.s != s or density.m != m:
            raise ValueError("shell measure does not match n, s or m")
        return _shell_cartesian(density, f, rtol, max_refinements)
    q = grading_for(2 * alpha)
    boxes = _group_boxes(f, n, s)

    def integrand(mom: np.ndarray) -> np.ndarray:
        with np.errstate(invalid="ignore"):
            vals = _drop_shell_nodes(density(mom))
        return vals * f(mom.reshape(mom.shape[:-2] + (f.dim,)))

    if n == 2:
        (lo1, hi1), (lo2, hi2) = boxes
        lo, hi = np.maximum(lo1, -hi2), np.minimum(hi1, -lo2)
        if np.any(hi <= lo):
            return PairingResult(0.0, 0.0, 0.0, True, "hyperplane-2")
        spatial_panels = int(np.clip(np.ceil(np.max(hi - lo) / (4 * f.min_width)), 2, 8))

        def run(res):
            return integrate_spacetime(lambda k: integrand(np.stack([k, -k], axis=-2)),
                                       lo, hi, m, res, q)
        res0 = resolution or Resolution(spatial_panels, 8, 5)
        route = "hyperplane-2"
    else:
        if s != 1:
            raise ValueError("the three-point pairing is implemented for s = 1")
        # apex rings resolve the scale m; uniform panels resolve the width
        spatial_panels = tuple(
            int(np.clip(np.ceil((boxes[l][1][1] - boxes[l][0][1]) / (4 * f.min_width)), 1, 6))
            for l in range(2))

        def support(mom):
            with np.errstate(invalid="ignore", divide="ignore"):
                return _drop_shell_nodes(density(mom))

        def run(res):
            return integrate_three_point(integrand, boxes, m, res, q, support)
        res0 = resolution or Resolution(spatial_panels, 6, 6)
        route = "hyperplane-3"
    (val, l1), err, ok, res = _refine(run, res0, rtol, max_refinements, atol,
                                      split_energy=(n == 3))
    return PairingResult(complex(val), float(err), float(l1), ok, route,
                         {"spatial_panels": res.spatial_panels,
                          "spatial_order": res.spatial_order,
                          "energy_order": res.energy_order, "grading": q})


def _drop_shell_nodes(vals: np.ndarray) -> np.ndarray:
    # a node of a near-degenerate panel can round onto the shell; its weight is ~1e-16
    return np.where(np.isfinite(vals), vals, 0.0)


def offshell_density(n: int, alpha: float, m: float, s: int, c_n: float = 1.0):
    """Density evaluator for quadrature: no shell guard, since nodes never sit on it."""
    return fused_density(n, alpha, m, s, c_n)


# ---------------------------------------------------------------------------
# bound-ratio family study

def _hyperplane_centers(n: int, s: int, kind: str, rng: np.random.Generator, m: float,
                        scale: float = 3.0) -> np.ndarray:
    """Group centers ``c_1..c_n`` with ``sum c = 0`` of the requested kind."""
    g = s + 1

    def timelike(sign):
        kv = rng.uniform(-scale, scale, s) * 0.6
        k0 = sign * (omega(m, kv) + rng.uniform(0.2, scale))
        return np.concatenate([[k0], kv])

    def on_shell(sign):
        kv = rng.uniform(-scale, scale, s) * 0.6
        return np.concatenate([[sign * omega(m, kv)], kv])

    cs = np.zeros((n, g))
    if kind == "inside":
        for l in range(n - 1):
            cs[l] = timelike(-1.0)
    elif kind == "shell":
        cs[0] = on_shell(-1.0)
        for l in range(1, n - 1):
            cs[l] = timelike(-1.0)
    elif kind == "outside":
        for l in range(n - 1):
            cs[l] = timelike(+1.0)
    elif kind == "spacelike":
        for l in range(n - 1):
            kv = rng.uniform(1.0, scale, s) * rng.choice([-1, 1], s)
            cs[l] = np.concatenate([[rng.uniform(-0.5, 0.5) * np.linalg.norm(kv)], kv])
    else:
        raise ValueError(kind)
    cs[n - 1] = -cs[: n - 1].sum(axis=0)
    return cs


CENTER_KINDS = ("inside", "shell", "outside", "spacelike")


def make_family(n: int, s: int, size: int, seed: int = 0, m: float = 1.0,
                widths: tuple[float, float] = (0.25, 4.0),
                max_degree: int = 4) -> list[dict[str, Any]]:
    """Reproducible test-function family for the bound study.

    One width per member, log-uniform over ``widths``; center kinds cycle
    through inside / on-shell / outside / spacelike placements; total
    polynomial degree runs over ``0..max_degree``.
    """
    rng = np.random.default_rng(seed)
    dim = (s + 1) * n
    out = []
    for i in range(size):
        kind = CENTER_KINDS[i % len(CENTER_KINDS)]
        centers = _hyperplane_centers(n, s, kind, rng, m).ravel()
        w = np.full(dim, math.exp(rng.uniform(math.log(widths[0]), math.log(widths[1]))))
        total = i % (max_degree + 1)
        degrees = np.zeros(dim, dtype=int)
        for ax in rng.integers(0, dim, total):
            degrees[ax] += 1
        f = TestFunction.gaussian(centers, w, degrees)
        out.append({"f": f, "kind": kind, "centers": centers, "widths": w,
                    "degrees": degrees, "mean_width": float(np.exp(np.mean(np.log(w))))})
    return out


@dataclass
class BoundReport:
    n: int
    alpha: float
    mass: float
    s: int
    members: list[dict[str, Any]]
    narrowing: list[dict[str, Any]]
    spreading: list[dict[str, Any]]
    narrowing_slope: float
    spreading_slope_weighted: float
    spreading_slope_unweighted: float

    @property
    def max_ratio(self) -> float:
        return max(r["ratio"] for r in self.members)

    @property
    def calibrated_constant(self) -> float:
        return 2.0 * self.max_ratio

    @property
    def all_finite(self) -> bool:
        return all(math.isfinite(r["ratio"]) and r["converged"] for r in self.members)

    @property
    def no_blowup(self) -> bool:
        return self.narrowing_slope <= 0.0 and self.spreading_slope_weighted <= 0.0

    @property
    def control_diverges(self) -> bool:
        return self.spreading_slope_unweighted > 0.25

    @property
    def passed(self) -> bool:
        return self.all_finite and self.no_blowup and self.control_diverges

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n, "alpha": self.alpha, "mass": self.mass, "s": self.s,
            "family_size": len(self.members), "max_ratio": self.max_ratio,
            "calibrated_constant": self.calibrated_constant,
            "all_finite": self.all_finite, "no_blowup": self.no_blowup,
            "control_diverges": self.control_diverges, "passed": self.passed,
            "narrowing_slope": self.narrowing_slope,
            "spreading_slope_weighted": self.spreading_slope_weighted,
            "spreading_slope_unweighted": self.spreading_slope_unweighted,
            "members": self.members, "narrowing": self.narrowing, "spreading": self.spreading,
        }


def _slope(x, y) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def _narrowing_sequence(n: int, s: int, m: float, widths) -> list[TestFunction]:
    # first momentum on the backward shell, others timelike, all inside the support
    kv = np.full(s, 0.5)
    c1 = np.concatenate([[-omega(m, kv)], kv])
    cs = [c1] + [np.concatenate([[-2.0 * m], -0.3 * kv])] * (n - 2)
    cs.append(-np.sum(cs, axis=0))
    center = np.concatenate(cs)
    return [TestFunction.gaussian(center, w) for w in widths]


def _spreading_sequence(n: int, s: int, radii) -> list[TestFunction]:
    if n == 2:
        direction = np.concatenate([[-1.0], np.full(s, 0.2)])
        base = np.concatenate([direction, -direction])
    else:
        a = np.concatenate([[-1.0], np.full(s, 0.2)])
        b = np.concatenate([[-1.0], np.full(s, -0.2)])
        base = np.concatenate([a, b, -a - b])
    return [TestFunction.gaussian(r * base, r / 8.0) for r in radii]


def bound_ratio_study(n: int, alpha: float, m: float = 1.0, s: int = 1, family_size: int = 50,
                      seed: int = 0, c_n: float = 1.0,
                      narrowing_widths=(1.0, 0.5, 0.25, 0.125),
                      spreading_radii=(2.0, 4.0, 8.0, 16.0)) -> BoundReport:
    """Ratios ``|int W_n^T f| / ||f||_{0,2s+2}`` over a family and two sequences.

    The narrowing sequence shrinks Gaussians centred on the mass shell; the
    spreading sequence moves them to infinity inside the support cone and
    is evaluated with weight ``N = 2s+2`` and, as a negative control,
    ``N = 0``.
    """
    if n not in (2, 3):
        raise ValueError("n must be 2 or 3")
    if family_size < 1:
        raise ValueError("family_size must be >= 1")
    if not 0 < alpha < 0.5:
        raise ValueError("the bound study needs 0 < alpha < 1/2")
    dens = offshell_density(n, alpha, m, s, c_n)
    weight = SchwartzNormSpec(0, 2 * s + 2)

    def ratio(f, spec):
        p = pairing(n, dens, f, m, s, alpha)
        norm = schwartz_norm(f, spec, n, s)
        return p, norm, abs(p.value) / norm

    members = []
    for item in make_family(n, s, family_size, seed, m):
        p, norm, r = ratio(item["f"], weight)
        members.append({"kind": item["kind"], "centers": item["centers"].tolist(),
                        "widths": item["widths"].tolist(), "degrees": item["degrees"].tolist(),
                        "pairing": abs(p.value), "quadrature_error": p.error,
                        "converged": p.converged, "norm": norm, "ratio": r})
    narrowing = []
    for w, f in zip(narrowing_widths, _narrowing_sequence(n, s, m, narrowing_widths)):
        p, norm, r = ratio(f, weight)
        narrowing.append({"width": w, "pairing": abs(p.value), "norm": norm, "ratio": r,
                          "converged": p.converged})
    spreading = []
    for rad, f in zip(spreading_radii, _spreading_sequence(n, s, spreading_radii)):
        p = pairing(n, dens, f, m, s, alpha)
        nw = schwartz_norm(f, weight, n, s)
        n0 = schwartz_norm(f, SchwartzNormSpec(0, 0), n, s)
        spreading.append({"radius": rad, "pairing": abs(p.value), "converged": p.converged,
                          "norm_weighted": nw, "norm_unweighted": n0,
                          "ratio_weighted": abs(p.value) / nw,
                          "ratio_unweighted": abs(p.value) / n0})
    return BoundReport(
        n, alpha, m, s, members, narrowing, spreading,
        narrowing_slope=_slope([1 / r["width"] for r in narrowing],
                               [r["ratio"] for r in narrowing]),
        spreading_slope_weighted=_slope(spreading_radii,
                                        [r["ratio_weighted"] for r in spreading]),
        spreading_slope_unweighted=_slope(spreading_radii,
                                          [r["ratio_unweighted"] for r in spreading]),
    )


# ---------------------------------------------------------------------------
# majorising measures M_j

@dataclass
class MDensity:
    """Absolutely continuous density of ``M_j`` with its term breakdown.

    ``terms`` maps ``"<partition>|<term per block>"`` to values; ``total``
    is their sum.  Partitions containing a two-element block contribute
    only to the singular part (see :func:`m_measure_singular`).
    """

    total: np.ndarray
    terms: dict[str, np.ndarray]
    singular_partitions: list[tuple[tuple[int, ...], ...]]


def _weight(k: np.ndarray, s: int) -> np.ndarray:
    return (1.0 + np.sum(k * k, axis=-1)) ** (s + 1)


def _block_terms(block, k, u, alpha, m, s) -> dict[str, np.ndarray]:
    """Absolutely continuous bracket terms of one block, including its weights."""
    l = len(block)
    w = np.ones(k.shape[:-2])
    for j in block:
        w = w * _weight(k[..., j, :], s)
    au = np.abs(u)
    out = {}
    if l == 1:
        out["single"] = w * au[..., block[0]] ** (-2 * alpha)
    if l != 2:
        prod = np.ones(k.shape[:-2])
        for j in block:
            prod = prod * au[..., j] ** (-alpha)
        out["product"] = w * prod
        if l != 1:
            tot = k[..., list(block), :].sum(axis=-2)
            out["sum"] = w * np.abs(minkowski_square(tot) - m * m) ** (-alpha) * prod
    return out


def _label(part) -> str:
    return "".join("{" + ",".join(str(i + 1) for i in b) + "}" for b in part)


def _check_m_inputs(j, alpha, m, s, momenta, shell_tol):
    if not 0 < alpha < 0.5:
        raise ValueError("the M_j formula is stated for 0 < alpha < 1/2")
    k = np.asarray(momenta, dtype=np.float64)
    if k.shape[-2:] != (j, s + 1):
        raise ValueError(f"momenta must have trailing shape {(j, s + 1)}")
    u = minkowski_square(k) - m * m
    if shell_tol > 0 and np.any(np.abs(u) < shell_tol):
        raise ShellSingularityError("momentum on the mass shell")
    return k, u


def m_measure_density(j: int, alpha: float, m: float, s: int, momenta,
                      shell_tol: float = 1e-12) -> MDensity:
    """Absolutely continuous density of ``dM_j`` as typeset, term by term.

    Each block ``{j_1..j_l}`` of a partition contributes
    ``prod_r (1+|k_{j_r}|^2)^(s+1)`` times

    * ``delta_{l,1} |u_{j_1}|^(-2 alpha)``                       ("single")
    * ``delta_{l,2} |u_{j_1}|^(-2 alpha) delta(k_{j_1}+k_{j_2})`` (singular part)
    * ``(1 - delta_{l,2}) prod_r |u_{j_r}|^-alpha``                ("product")
    * ``(1 - delta_{l,1} - delta_{l,2}) |(sum k)^2 - m^2|^-alpha / prod_r |u_{j_r}|^alpha`` ("sum")

    with ``u = k^2 - m^2`` and ``|k|`` the Euclidean norm.  The l = 1
    block therefore carries both "single" and "product".  Momenta have
    shape ``(..., j, s+1)``.
    """
    k, u = _check_m_inputs(j, alpha, m, s, momenta, shell_tol)
    terms: dict[str, np.ndarray] = {}
    singular = []
    for part in set_partitions(j):
        if any(len(b) == 2 for b in part):
            singular.append(part)
            continue
        per_block = [_block_terms(b, k, u, alpha, m, s) for b in part]
        for combo in itertools.product(*[sorted(d.items()) for d in per_block]):
            key = _label(part) + "|" + ",".join(name for name, _ in combo)
            val = np.ones(k.shape[:-2])
            for _, v in combo:
                val = val * v
            terms[key] = val
    total = np.zeros(k.shape[:-2])
    for v in terms.values():
        total = total + v
    return MDensity(total, terms, singular)


def m_measure_singular(j: int, alpha: float, m: float, s: int, momenta, partition,
                       shell_tol: float = 1e-12, constraint_tol: float = 1e-12) -> np.ndarray:
    """Density of one partition's singular part on its pair hyperplane.

    Every two-element block ``{a, b}`` must satisfy ``k_a + k_b = 0``; the
    value is with respect to Lebesgue measure in the remaining
    coordinates (``k_a`` kept, ``k_b`` dropped, per pair).
    """
    k, u = _check_m_inputs(j, alpha, m, s, momenta, shell_tol)
    part = tuple(tuple(sorted(b)) for b in partition)
    if sorted(i for b in part for i in b) != list(range(j)):
        raise ValueError("not a partition of the momentum indices")
    val = np.ones(k.shape[:-2])
    for b in part:
        if len(b) == 2:
            a, c = b
            if np.max(np.abs(k[..., a, :] + k[..., c, :])) > constraint_tol:
                raise ValueError(f"momenta violate k_{a + 1} + k_{c + 1} = 0")
            val = val * _weight(k[..., a, :], s) * _weight(k[..., c, :], s) \
                * np.abs(u[..., a]) ** (-2 * alpha)
        else:
            bt = _block_terms(b, k, u, alpha, m, s)
            val = val * sum(bt.values())
    return val


def check_m_nonnegative(j: int, alpha: float, m: float = 1.0, s: int = 1,
                        points: int = 100_000, seed: int = 0, scale: float = 3.0,
                        shell_gap: float = 1e-6) -> AxiomReport:
    """Sample ``dM_j`` (continuous density and every pair-hyperplane part) for negativity."""
    rng = np.random.default_rng(seed)
    report = AxiomReport("m-measure-nonnegativity", j, alpha)
    k = rng.normal(0.0, scale, size=(points, j, s + 1))
    off = np.all(np.abs(minkowski_square(k) - m * m) >= shell_gap, axis=-1)
    k = k[off]
    dens = m_measure_density(j, alpha, m, s, k, shell_tol=0.0)
    checks = [("continuous", k, dens.total)]
    for part in dens.singular_partitions:
        kp = k.copy()
        for b in part:
            if len(b) == 2:
                kp[:, b[1]] = -kp[:, b[0]]
        checks.append((_label(part), kp, m_measure_singular(j, alpha, m, s, kp, part,
                                                            shell_tol=0.0)))
    minimum = math.inf
    for name, kk, vals in checks:
        minimum = min(minimum, float(np.min(vals, initial=math.inf)))
        for idx in np.flatnonzero(~(vals >= 0)):
            report.add_violation(kk[idx], vals[idx], f"negative or undefined M_{j} part {name}")
        report.points_checked += len(vals)
    report.details = {"parts": [c[0] for c in checks], "min_value": minimum, "seed": seed}
    return report


# ---------------------------------------------------------------------------
# local integrability near the shell

@dataclass
class ConvergenceReport:
    alpha: float
    exponent: float
    epsilons: list[float]
    annuli: list[float]
    shell_integrals: list[float]
    fitted_slope: float
    expected_slope: float
    tolerance: float = 0.05

    @property
    def converges(self) -> bool:
        return self.fitted_slope > 0.0

    @property
    def matches(self) -> bool:
        return abs(self.fitted_slope - self.expected_slope) <= self.tolerance

    def to_dict(self) -> dict[str, Any]:
        return {"alpha": self.alpha, "exponent": self.exponent, "epsilons": self.epsilons,
                "annuli": self.annuli, "shell_integrals": self.shell_integrals,
                "fitted_slope": self.fitted_slope, "expected_slope": self.expected_slope,
                "converges": self.converges, "matches": self.matches}


def shell_annulus(exponent: float, m: float, s: int, eps: float, box: float,
                  spatial_order: int = 48, energy_order: int = 24) -> float:
    """``int |k^2 - m^2|^-p dk`` over ``eps/2 < |k^2 - m^2| < eps`` with ``|k_vec|_inf < box``.

    Both energy signs and both sides of the shell are included; the energy
    integral uses Cartesian ``k0`` nodes on each of the four thin slabs.
    """
    if not eps < m * m:
        raise ValueError("eps must be below m^2 so the inner slab exists")
    xs, ws = gauss_panels(np.full(s, -box), np.full(s, box), 4, spatial_order)
    grids = np.meshgrid(*xs, indexing="ij")
    wgrid = np.meshgrid(*ws, indexing="ij")
    kv = np.stack([g.ravel() for g in grids], -1)
    wv = np.prod(np.stack([g.ravel() for g in wgrid], -1), -1)
    om2 = np.sum(kv * kv, -1) + m * m
    total = 0.0
    for a, b in ((0.5 * eps, eps), (-eps, -0.5 * eps)):
        lo, hi = np.sqrt(om2 + a), np.sqrt(om2 + b)
        k0, w0 = gauss_panels(lo, hi, 1, energy_order)
        uu = np.abs(k0 * k0 - om2[:, None])
        # two energy signs contribute equally
        total += 2.0 * float(np.sum(uu ** (-exponent) * w0 * wv[:, None]))
    return total


def local_integrability_study(alpha: float, m: float = 1.0, s: int = 1,
                              exponent: float | None = None, box: float = 3.0,
                              epsilons: Sequence[float] | None = None,
                              tolerance: float = 0.05) -> ConvergenceReport:
    """Scaling of ``int_{|k^2-m^2|<eps} |k^2-m^2|^-p dk`` as ``eps -> 0``.

    ``p`` defaults to ``2 alpha``.  The slope of log(annulus) against
    log(eps) is fitted; it equals ``1 - p`` when the shell contribution is
    integrable.  A non-positive slope signals divergence.
    """
    if not 0 < alpha < 0.5:
        raise ValueError("alpha must lie in (0, 1/2)")
    p = 2 * alpha if exponent is None else float(exponent)
    eps = list(epsilons) if epsilons is not None else [0.25 * m * m * 2.0**-i for i in range(12)]
    annuli = [shell_annulus(p, m, s, e, box) for e in eps]
    slope = _slope(eps, annuli)
    shells = []
    for i in range(len(eps)):
        tail = annuli[i:]
        if slope > 0:
            r = 2.0 ** (-slope)
            shells.append(float(sum(tail) + tail[-1] * r / (1 - r)))
        else:
            shells.append(math.inf)
    return ConvergenceReport(alpha, p, eps, annuli, shells, slope, 1.0 - p, tolerance)


# ---------------------------------------------------------------------------
# Cauchy-Schwarz split at j = l = 1

@dataclass
class SplitReport:
    alpha: float
    mass: float
    s: int
    constant: float
    rows: list[dict[str, Any]]
    calibration_ratios: list[float]
    translation_max_relative: float

    @property
    def passed(self) -> bool:
        return all(r["holds"] for r in self.rows)

    def to_dict(self) -> dict[str, Any]:
        return {"alpha": self.alpha, "mass": self.mass, "s": self.s,
                "calibrated_constant": self.constant, "passed": self.passed,
                "translation_max_relative": self.translation_max_relative,
                "calibration_ratios": self.calibration_ratios, "rows": self.rows}


class TwoPointIntegrals:
    """Momentum-space integrals entering the j = l = 1 split.

    ``rho(k)`` is the truncated two-point density in ``k_1`` (with
    ``k_2 = -k_1``); position-space functions enter through their exact
    Fourier transforms.
    """

    def __init__(self, alpha: float, m: float, s: int, c_2: float = 1.0,
                 rtol: float = PAIRING_RTOL):
        self.alpha, self.m, self.s, self.c_2, self.rtol = alpha, m, s, c_2, rtol
        self._dens = offshell_density(2, alpha, m, s, c_2)
        self.q = grading_for(2 * alpha)

    def rho(self, k: np.ndarray) -> np.ndarray:
        with np.errstate(invalid="ignore"):
            return _drop_shell_nodes(self._dens(np.stack([k, -k], axis=-2)))

    def m1(self, k: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return _drop_shell_nodes(m_measure_density(1, self.alpha, self.m, self.s,
                                                       k[..., None, :], shell_tol=0.0).total)

    def integrate(self, func, lo, hi, min_width: float) -> PairingResult:
        lo, hi = np.asarray(lo), np.asarray(hi)
        if np.any(hi <= lo):
            return PairingResult(0.0, 0.0, 0.0, True, "split")
        panels = int(np.clip(np.ceil(np.max(hi - lo) / (4 * min_width)), 2, 8))
        (val, l1), err, ok, _ = _refine(
            lambda res: integrate_spacetime(func, lo, hi, self.m, res, self.q),
            Resolution(panels, 8, 5), self.rtol, 3)
        return PairingResult(complex(val), float(err), float(l1), ok, "split")

    def cross(self, fh: TestFunction, gh: TestFunction) -> PairingResult:
        """``int rho(k) fh(k) gh(-k) dk``."""
        flo, fhi = fh.support_box()
        glo, ghi = gh.support_box()
        return self.integrate(lambda k: self.rho(k) * fh(k) * gh(-k),
                              np.maximum(flo, -ghi), np.minimum(fhi, -glo),
                              min(fh.min_width, gh.min_width))

    def rho_norm(self, fh: TestFunction, reflect: bool = False) -> PairingResult:
        """``int rho(+-k) |fh(k)|^2 dk``."""
        lo, hi = fh.support_box()
        sign = -1.0 if reflect else 1.0
        return self.integrate(lambda k: self.rho(sign * k) * np.abs(fh(k)) ** 2,
                              lo, hi, fh.min_width)

    def m1_norm(self, fh: TestFunction) -> PairingResult:
        """``int |fh|^2 dM_1``."""
        lo, hi = fh.support_box()
        return self.integrate(lambda k: self.m1(k) * np.abs(fh(k)) ** 2, lo, hi, fh.min_width)


def p_seminorm(f: TestFunction, constant: float, integrals: TwoPointIntegrals) -> float:
    """``p_1(f) = (C + 1) (int |f^|^2 dM_1)^(1/2)`` for a position-space f."""
    return (constant + 1.0) * math.sqrt(integrals.m1_norm(f.fourier()).value.real)


def split_family(s: int, size: int, seed: int = 0, m: float = 1.0
                 ) -> list[tuple[TestFunction, TestFunction]]:
    """Pairs ``(f, g)`` whose transforms meet the two-point support.

    The density lives on ``k_1`` in the backward cone, so ``f^`` is centred
    at negative and ``g^`` at positive energy, near or inside the shell.
    Momentum widths are log-uniform in 0.25..2; total degree 0..2.  The
    last pair is diagonal, ``(h, h)`` with ``h^`` straddling both cones.
    """
    rng = np.random.default_rng(seed)

    def draw(i: int, sign: float) -> TestFunction:
        kv = rng.uniform(-1.5, 1.5, s)
        k0 = sign * (omega(m, kv) + rng.uniform(-0.3, 2.0))
        kw = np.exp(rng.uniform(math.log(0.25), math.log(2.0), s + 1))
        degrees = np.zeros(s + 1, dtype=int)
        for ax in rng.integers(0, s + 1, i % 3):
            degrees[ax] += 1
        x0 = rng.uniform(-2.0, 2.0, s + 1)
        coef = np.exp(1j * rng.uniform(0, 2 * math.pi))
        return TestFunction.gaussian(x0, 1.0 / kw, degrees, coef=coef,
                                     freq=np.concatenate([[k0], kv]))

    pairs = [(draw(i, -1.0), draw(i + 1, 1.0)) for i in range(size - 1)]
    h = TestFunction.gaussian(rng.uniform(-2.0, 2.0, s + 1), [0.4] + [1.0] * s,
                              freq=np.concatenate([[0.0], rng.uniform(-0.5, 0.5, s)]))
    return pairs + [(h, h)]


def hsc_split_check(alpha: float, m: float = 1.0, s: int = 1, pairs=None, c_2: float = 1.0,
                    size: int = 20, seed: int = 0, safety: float = 2.0,
                    translations: int = 5, rtol_chain: float = 1e-6) -> SplitReport:
    """Chain ``|W_2(f (x) g)| <= middle <= p_1(f) p_1(g)`` for j = l = 1.

    The law is taken with ``c_1 = 0`` so ``W_2 = W_2^T``.  ``middle`` is
    the product of square roots of ``int rho |f^|^2`` and
    ``int rho(-k) |g^|^2``; the constant ``C_{1,1}`` is ``safety`` times
    the largest ratio of those integrals to ``int |.^|^2 dM_1`` over every
    function involved.  Diagonal pairs ``(f, f)`` are included.
    """
    if not 0 < alpha < 0.5:
        raise ValueError("the split check needs 0 < alpha < 1/2")
    ints = TwoPointIntegrals(alpha, m, s, c_2)
    pairs = list(split_family(s, size, seed, m) if pairs is None else pairs)
    cache: dict[int, dict[str, float]] = {}

    def info(f: TestFunction) -> dict[str, float]:
        if id(f) not in cache:
            fh = f.fourier()
            cache[id(f)] = {"rho": ints.rho_norm(fh).value.real,
                            "rho_reflected": ints.rho_norm(fh, reflect=True).value.real,
                            "m1": ints.m1_norm(fh).value.real}
        return cache[id(f)]

    ratios = []
    for f, g in pairs:
        ratios.append(info(f)["rho"] / info(f)["m1"])
        ratios.append(info(g)["rho_reflected"] / info(g)["m1"])
    constant = safety * max(ratios)
    rows = []
    for f, g in pairs:
        cross = ints.cross(f.fourier(), g.fourier())
        lhs = abs(cross.value)
        middle = math.sqrt(info(f)["rho"] * info(g)["rho_reflected"])
        p_f = (constant + 1.0) * math.sqrt(info(f)["m1"])
        p_g = (constant + 1.0) * math.sqrt(info(g)["m1"])
        rhs = p_f * p_g
        holds = (lhs <= middle * (1 + rtol_chain)) and (middle <= rhs)
        rows.append({"lhs": lhs, "middle": middle, "rhs": rhs, "p_f": p_f, "p_g": p_g,
                     "diagonal": f is g, "converged": cross.converged, "holds": bool(holds)})
    rng = np.random.default_rng(seed + 1)
    worst = 0.0
    for f, _ in pairs[:translations]:
        base = p_seminorm(f, constant, ints)
        moved = p_seminorm(f.translate(rng.uniform(-5, 5, s + 1)), constant, ints)
        worst = max(worst, abs(moved - base) / base)
    return SplitReport(alpha, m, s, constant, rows, ratios, worst)
