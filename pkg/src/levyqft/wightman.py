"""Momentum-space truncated Wightman densities and their axiom checks.

Momenta are arrays whose last axis holds ``(k0, k1, ..., ks)`` with the
Minkowski square ``k^2 = k0^2 - |k_vec|^2``.  An n-point density lives on
the hyperplane ``k_1 + ... + k_n = 0`` and is reported with respect to
``dk_1 ... dk_{n-1}``; the last momentum is always derived.

Fourier convention (fixed once, checked end to end by
:func:`continuation_check_n2`)::

    S_n^T(x) = (2 pi)^(-(s+1) n / 2) int exp(sum_l -k_l^0 x_l^0 + i k_l.x_l) W_n^T(k) dk

for time-ordered Euclidean points ``x_1^0 < ... < x_n^0``.  With this
convention the alpha = 1/2 two-point shell measure reproduces
``c_2 G_1(x)`` with ``G_1`` the continuum Green function of
``-Laplacian + m^2`` normalised by ``int d^d k / (2 pi)^d``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, special
from scipy.stats import special_ortho_group

from .fracop import OperatorSpec, QuadratureError, green_continuum
from .partitions import set_partitions
from .reports import AxiomReport

FOURIER_CONVENTION = (
    "S_n^T(x) = (2 pi)^(-(s+1) n/2) int exp(sum_l -k_l^0 x_l^0 + i k_l.x_l) W_n^T(k) dk, "
    "x_1^0 < ... < x_n^0; densities w.r.t. dk_1..dk_{n-1} on sum_l k_l = 0; "
    "W_n^T prefactor c_n 2^(n-1) (2 pi)^(s+1); alpha=1/2 two-point shell density "
    "2 pi c_2 / (2 omega) w.r.t. d^s k on the negative-energy branch"
)

SHELL_TOL = 1e-12
CONSTRAINT_TOL = 1e-12


class ShellSingularityError(ValueError):
    """A momentum sits on the mass shell where |k^2 - m^2|^-alpha is infinite."""


class ConstraintError(ValueError):
    """Momenta do not sum to zero."""


def minkowski_square(k) -> np.ndarray:
    k = np.asarray(k, dtype=np.float64)
    return k[..., 0] ** 2 - np.sum(k[..., 1:] ** 2, axis=-1)


def _check_alpha(alpha: float) -> None:
    if not 0 < alpha <= 0.5:
        raise ValueError(f"alpha must lie in (0, 1/2], got {alpha}")


def _offshell(alpha, m, s, k, shell_tol):
    _check_alpha(alpha)
    k = np.asarray(k, dtype=np.float64)
    if k.shape[-1] != s + 1:
        raise ValueError(f"momenta need {s + 1} components, got {k.shape[-1]}")
    u = minkowski_square(k) - m * m
    if shell_tol > 0 and np.any(np.abs(u) < shell_tol):
        raise ShellSingularityError(
            f"momentum within {shell_tol:g} of the mass shell k^2 = {m * m:g}"
        )
    return k, u


def _power(u, alpha):
    # |u|^-alpha, with zeros left at zero (only used under an indicator)
    au = np.abs(u)
    with np.errstate(divide="ignore"):
        return np.where(au > 0, au ** -alpha, np.inf)


def mu_plus(alpha: float, m: float, s: int, k, shell_tol: float = SHELL_TOL) -> np.ndarray:
    """Forward-cone factor: nonzero only for ``k^2 > m^2`` and ``k0 > 0``."""
    k, u = _offshell(alpha, m, s, k, shell_tol)
    pref = (2 * math.pi) ** (-(s + 1) / 2) * math.sin(math.pi * alpha)
    ind = (u > 0) & (k[..., 0] > 0)
    return np.where(ind, pref * _power(u, alpha), 0.0)


def mu_minus(alpha: float, m: float, s: int, k, shell_tol: float = SHELL_TOL) -> np.ndarray:
    """Backward-cone factor: nonzero only for ``k^2 > m^2`` and ``k0 < 0``."""
    k, u = _offshell(alpha, m, s, k, shell_tol)
    pref = (2 * math.pi) ** (-(s + 1) / 2) * math.sin(math.pi * alpha)
    ind = (u > 0) & (k[..., 0] < 0)
    return np.where(ind, pref * _power(u, alpha), 0.0)


def mu_zero(alpha: float, m: float, s: int, k, shell_tol: float = SHELL_TOL) -> np.ndarray:
    """Middle factor ``(cos(pi alpha) 1{k^2>m^2} + 1{k^2<m^2}) |k^2-m^2|^-alpha``."""
    k, u = _offshell(alpha, m, s, k, shell_tol)
    pref = (2 * math.pi) ** (-(s + 1) / 2)
    # cos(pi/2) is 6e-17 in floating point; pin it to zero
    c = 0.0 if alpha == 0.5 else math.cos(math.pi * alpha)
    weight = np.where(u > 0, c, 1.0)
    return np.where(weight != 0, pref * weight * _power(u, alpha), 0.0)


def prefactor(n: int, s: int, c_n: float) -> float:
    """``c_n' = c_n 2^(n-1) (2 pi)^(s+1)``."""
    return c_n * 2.0 ** (n - 1) * (2 * math.pi) ** (s + 1)


def _check_constraint(momenta, tol):
    total = np.asarray(momenta).sum(axis=-2)
    err = np.max(np.abs(total)) if total.size else 0.0
    if err > tol:
        raise ConstraintError(f"momenta do not sum to zero (max |sum k| = {err:.3e})")


def complete_momenta(free) -> np.ndarray:
    """Append ``k_n = -(k_1 + ... + k_{n-1})`` to an array of free momenta."""
    free = np.asarray(free, dtype=np.float64)
    last = -free.sum(axis=-2, keepdims=True)
    return np.concatenate([free, last], axis=-2)


def wightman_truncated_density(n: int, alpha: float, m: float, s: int, c_n: float, momenta,
                               method: str = "factored", shell_tol: float = SHELL_TOL,
                               constraint_tol: float = CONSTRAINT_TOL,
                               factors: dict[str, Callable] | None = None) -> np.ndarray:
    """Truncated n-point density on the ``sum k = 0`` hyperplane.

    ``c_n' * sum_j [prod_{l<j} mu_minus(k_l)] mu_zero(k_j) [prod_{l>j} mu_plus(k_l)]``,
    with empty products equal to one.  ``momenta`` has shape ``(..., n, s+1)``.
    ``method`` selects the explicit term sum (``"terms"``) or prefix/suffix
    products (``"factored"``).  ``factors`` overrides the three factor
    functions and exists for mutation tests.
    """
    _check_alpha(alpha)
    if n < 2 or (n == 2 and alpha >= 0.5):
        raise ValueError("this density needs n >= 3, or n = 2 with alpha < 1/2")
    k = np.asarray(momenta, dtype=np.float64)
    if k.shape[-2:] != (n, s + 1):
        raise ValueError(f"momenta must have trailing shape {(n, s + 1)}, got {k.shape[-2:]}")
    _check_constraint(k, constraint_tol)
    f = {"minus": mu_minus, "zero": mu_zero, "plus": mu_plus}
    if factors:
        f.update(factors)
    mm = f["minus"](alpha, m, s, k, shell_tol)
    m0 = f["zero"](alpha, m, s, k, shell_tol)
    mp = f["plus"](alpha, m, s, k, shell_tol)
    if method == "terms":
        total = np.zeros(k.shape[:-2])
        for j in range(n):
            term = m0[..., j]
            for l in range(j):
                term = term * mm[..., l]
            for l in range(j + 1, n):
                term = term * mp[..., l]
            total = total + term
    elif method == "factored":
        ones = np.ones(k.shape[:-2] + (1,))
        before = np.cumprod(np.concatenate([ones, mm[..., :-1]], axis=-1), axis=-1)
        after = np.flip(np.cumprod(np.concatenate(
            [ones, np.flip(mp[..., 1:], axis=-1)], axis=-1), axis=-1), axis=-1)
        total = np.sum(before * m0 * after, axis=-1)
    else:
        raise ValueError(f"unknown method {method!r}")
    return prefactor(n, s, c_n) * total


def density_evaluator(n: int, alpha: float, m: float, s: int, c_n: float = 1.0,
                      **kwargs) -> Callable[[np.ndarray], np.ndarray]:
    """Closure ``momenta -> density`` for the truncated n-point function."""
    return lambda k: wightman_truncated_density(n, alpha, m, s, c_n, k, **kwargs)


def fused_density(n: int, alpha: float, m: float, s: int, c_n: float = 1.0
                  ) -> Callable[[np.ndarray], np.ndarray]:
    """Fast quadrature evaluator of the same density.

    No shell or constraint checks; ``|k^2 - m^2|^-alpha`` is computed once per
    momentum.  Nodes on the shell give ``inf`` or ``nan``.
    """
    _check_alpha(alpha)
    amp = (2 * math.pi) ** (-(s + 1) / 2)
    sin_a = math.sin(math.pi * alpha)
    cos_a = 0.0 if alpha == 0.5 else math.cos(math.pi * alpha)
    pre = prefactor(n, s, c_n)

    def density(k: np.ndarray) -> np.ndarray:
        k = np.asarray(k, dtype=np.float64)
        k0 = k[..., 0]
        u = k0 * k0 - np.sum(k[..., 1:] ** 2, axis=-1) - m * m
        with np.errstate(divide="ignore"):
            p = amp * np.abs(u) ** -alpha
        timelike = u > 0
        minus = np.where(timelike & (k0 < 0), sin_a * p, 0.0)
        plus = np.where(timelike & (k0 > 0), sin_a * p, 0.0)
        zero = np.where(timelike, cos_a * p, p) if cos_a else np.where(timelike, 0.0, p)
        total = 0.0
        before = 1.0
        for j in range(n):
            after = 1.0
            for l in range(j + 1, n):
                after = after * plus[..., l]
            total = total + before * zero[..., j] * after
            before = before * minus[..., j]
        return pre * total

    return density


def mutant_density(n: int, alpha: float, m: float, s: int, c_n: float = 1.0,
                   flip_slot: int = 0) -> Callable[[np.ndarray], np.ndarray]:
    """Deliberately broken density: mu_minus replaced by mu_plus in one slot.

    Used as a negative control for the spectral-support check.
    """
    def minus(alpha_, m_, s_, k, tol):
        out = mu_minus(alpha_, m_, s_, k, tol)
        out[..., flip_slot] = mu_plus(alpha_, m_, s_, k[..., flip_slot, :], tol)
        return out

    return lambda k: wightman_truncated_density(n, alpha, m, s, c_n, k, factors={"minus": minus})


# ---------------------------------------------------------------------------
# alpha = 1/2, n = 2: measure on the mass shell

NEGATIVE = "negative-energy"
POSITIVE = "positive-energy"


@dataclass(frozen=True)
class MassShellPoint:
    kvec: tuple[float, ...]
    branch: str
    mass: float = 1.0

    def __post_init__(self):
        if self.branch not in (NEGATIVE, POSITIVE):
            raise ValueError(f"branch must be {NEGATIVE!r} or {POSITIVE!r}")
        object.__setattr__(self, "kvec", tuple(float(x) for x in self.kvec))

    @property
    def omega(self) -> float:
        return math.sqrt(sum(x * x for x in self.kvec) + self.mass**2)

    @property
    def k0(self) -> float:
        return -self.omega if self.branch == NEGATIVE else self.omega

    @property
    def weight(self) -> float:
        """Shell measure density ``1 / (2 omega)``."""
        return 0.5 / self.omega

    def momentum(self) -> np.ndarray:
        return np.array((self.k0,) + self.kvec)


def two_point_shell_density(m: float, s: int, kvec, c_2: float = 1.0, negative=True) -> np.ndarray:
    """alpha = 1/2 two-point density with respect to ``d^s k`` on the shell.

    ``2 pi c_2 / (2 omega)`` on the negative-energy branch, zero on the
    positive one.  Vectorised over ``kvec[..., s]``; ``negative`` may be an
    array of branch flags.
    """
    kvec = np.asarray(kvec, dtype=np.float64)
    if kvec.shape[-1] != s:
        raise ValueError(f"kvec needs {s} components")
    omega = np.sqrt(np.sum(kvec**2, axis=-1) + m * m)
    return np.where(negative, 2 * math.pi * c_2 * 0.5 / omega, 0.0)


def shell_density_at(point: MassShellPoint, s: int, c_2: float = 1.0) -> float:
    return float(two_point_shell_density(point.mass, s, point.kvec, c_2,
                                         negative=point.branch == NEGATIVE))


# ---------------------------------------------------------------------------
# sampling grids

def sample_hyperplane(n: int, s: int, count: int, m: float, rng: np.random.Generator,
                      scale: float = 3.0, shell_gap: float = 1e-6) -> np.ndarray:
    """Random points on ``sum k = 0`` kept at least ``shell_gap`` off every shell."""
    out = []
    have = 0
    while have < count:
        want = int((count - have) * 1.1) + 16
        k = complete_momenta(rng.normal(0.0, scale, size=(want, n - 1, s + 1)))
        ok = np.all(np.abs(minkowski_square(k) - m * m) >= shell_gap, axis=-1)
        k = k[ok]
        out.append(k)
        have += len(k)
    return np.concatenate(out)[:count]


def sample_shell(s: int, count: int, m: float, rng: np.random.Generator, scale: float = 3.0):
    """Random shell points: returns ``(kvec, negative_flags, k1)``."""
    kvec = rng.normal(0.0, scale, size=(count, s))
    negative = rng.random(count) < 0.5
    omega = np.sqrt(np.sum(kvec**2, axis=-1) + m * m)
    k0 = np.where(negative, -omega, omega)
    return kvec, negative, np.concatenate([k0[:, None], kvec], axis=-1)


def _in_backward_cone(q, tol=1e-12) -> np.ndarray:
    scale = np.maximum(1.0, np.sum(q * q, axis=-1))
    return (minkowski_square(q) >= -tol * scale) & (q[..., 0] <= tol * np.sqrt(scale))


# ---------------------------------------------------------------------------
# axiom checks

def check_spectral_support(n: int, alpha: float, m: float, s: int, points: int = 10**6,
                           seed: int = 0, c_n: float = 1.0, density: Callable | None = None,
                           chunk: int = 200_000, scale: float = 3.0) -> AxiomReport:
    """Nonzero density must put every partial sum ``k_1+..+k_r`` in the closed backward cone."""
    rng = np.random.default_rng(seed)
    report = AxiomReport("spectral-condition", n, alpha)
    nonzero = 0
    shell_case = n == 2 and alpha == 0.5
    if not shell_case and density is None:
        density = density_evaluator(n, alpha, m, s, c_n)
    done = 0
    while done < points:
        size = min(chunk, points - done)
        if shell_case:
            kvec, neg, k1 = sample_shell(s, size, m, rng, scale)
            if density is None:
                vals = two_point_shell_density(m, s, kvec, c_n, negative=neg)
            else:
                vals = density(kvec, neg)
            k = np.stack([k1, -k1], axis=1)
        else:
            k = sample_hyperplane(n, s, size, m, rng, scale)
            vals = density(k)
        hit = vals != 0
        nonzero += int(hit.sum())
        partial = np.cumsum(k[hit], axis=1)[:, :-1, :]
        ok = np.all(_in_backward_cone(partial), axis=-1)
        for idx in np.flatnonzero(~ok):
            report.add_violation(k[hit][idx], vals[hit][idx],
                                 "partial momentum sum outside the closed backward cone")
        done += size
    report.points_checked = done
    report.details = {"nonzero_points": nonzero, "seed": seed, "scale": scale,
                      "convention": FOURIER_CONVENTION}
    return report


def check_hermiticity(n: int, alpha: float, m: float, s: int, points: int = 10**5, seed: int = 0,
                      c_n: float = 1.0, density: Callable | None = None,
                      rtol: float = 1e-12) -> AxiomReport:
    """``W(k_1, .., k_n) == W(-k_n, .., -k_1)`` (densities are real)."""
    rng = np.random.default_rng(seed)
    report = AxiomReport("hermiticity", n, alpha)
    if n == 2 and alpha == 0.5:
        kvec, neg, k1 = sample_shell(s, points, m, rng)
        a = two_point_shell_density(m, s, kvec, c_n, negative=neg)
        # (-k_2, -k_1) = (k_1, -k_1): the same shell point
        rk1 = -(-k1)
        b = two_point_shell_density(m, s, rk1[:, 1:], c_n, negative=rk1[:, 0] < 0)
        k = np.stack([k1, -k1], axis=1)
    else:
        density = density or density_evaluator(n, alpha, m, s, c_n)
        k = sample_hyperplane(n, s, points, m, rng)
        a = density(k)
        b = density(-np.flip(k, axis=-2))
    bad = np.abs(a - b) > rtol * np.maximum(np.abs(a), np.abs(b))
    for idx in np.flatnonzero(bad):
        report.add_violation(k[idx], a[idx] - b[idx], "density changes under reversal and k -> -k")
    report.points_checked = points
    report.details = {"nonzero_points": int(np.count_nonzero(a)), "rtol": rtol, "seed": seed}
    return report


def boost_matrix(rapidity: float, direction) -> np.ndarray:
    """Proper orthochronous boost along the spatial unit vector ``direction``."""
    d = np.asarray(direction, dtype=np.float64)
    d = d / np.linalg.norm(d)
    s = d.size
    lam = np.eye(s + 1)
    ch, sh = math.cosh(rapidity), math.sinh(rapidity)
    lam[0, 0] = ch
    lam[0, 1:] = sh * d
    lam[1:, 0] = sh * d
    lam[1:, 1:] += (ch - 1.0) * np.outer(d, d)
    return lam


def random_lorentz(s: int, rng: np.random.Generator, max_rapidity: float = 1.5) -> np.ndarray:
    """Boost with random rapidity and direction, composed with a random rotation."""
    direction = rng.normal(size=s)
    lam = boost_matrix(rng.uniform(-max_rapidity, max_rapidity), direction)
    if s >= 2:
        rot = np.eye(s + 1)
        rot[1:, 1:] = special_ortho_group.rvs(s, random_state=rng)
        lam = rot @ lam
    return lam


def transform(momenta: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Apply ``lam`` to the free momenta and re-derive the last one."""
    free = momenta[..., :-1, :] @ lam.T
    return complete_momenta(free)


def check_lorentz_invariance(n: int, alpha: float, m: float, s: int, transforms: int = 10,
                             points: int = 20_000, seed: int = 0, c_n: float = 1.0,
                             rapidities: Sequence[float] | None = None, rtol: float = 1e-10,
                             shell_gap: float = 0.05, improper: bool = False) -> AxiomReport:
    """Density invariance under proper orthochronous Lorentz transformations.

    Grid points are kept ``shell_gap`` away from every shell so that
    floating boost arithmetic cannot move a point across it.  With
    ``improper=True`` the time reflection ``k0 -> -k0`` is applied instead
    and the report counts points whose density changes (negative control).
    """
    rng = np.random.default_rng(seed)
    report = AxiomReport("poincare-invariance" if not improper else "time-reflection", n, alpha)
    k = sample_hyperplane(n, s, points, m, rng, shell_gap=shell_gap)
    if n == 2 and alpha == 0.5:
        def density(q):
            # density w.r.t. the invariant measure d^s k / (2 omega)
            kv = q[..., 0, 1:]
            w = np.sqrt(np.sum(kv * kv, axis=-1) + m * m)
            return 2 * w * two_point_shell_density(m, s, kv, c_n, negative=q[..., 0, 0] < 0)
        # put the first momentum on the shell
        omega = np.sqrt(np.sum(k[:, 0, 1:] ** 2, axis=-1) + m * m)
        k[:, 0, 0] = np.where(k[:, 0, 0] < 0, -omega, omega)
        k = complete_momenta(k[:, :-1])
    else:
        density = density_evaluator(n, alpha, m, s, c_n, shell_tol=0.0)
    base = density(k)
    if improper:
        lams = [np.diag([-1.0] + [1.0] * s)]
    elif rapidities is not None:
        lams = [boost_matrix(r, np.eye(s)[0]) for r in rapidities]
    else:
        lams = [random_lorentz(s, rng) for _ in range(transforms)]
    changed = 0
    worst = 0.0
    for lam in lams:
        moved = transform(k, lam)
        if n == 2 and alpha == 0.5:
            # re-project onto the shell: boosts keep it up to rounding
            w = np.sqrt(np.sum(moved[:, 0, 1:] ** 2, axis=-1) + m * m)
            moved[:, 0, 0] = np.sign(moved[:, 0, 0]) * w
            moved = complete_momenta(moved[:, :-1])
        val = density(moved)
        diff = np.abs(val - base)
        scale = np.maximum(np.abs(val), np.abs(base))
        bad = diff > rtol * scale
        rel = np.where(scale > 0, diff / np.where(scale > 0, scale, 1.0), 0.0)
        worst = max(worst, float(rel.max(initial=0.0)))
        changed += int(bad.sum())
        reason = ("density changes under time reflection" if improper
                  else "density not invariant under Lorentz transform")
        for idx in np.flatnonzero(bad):
            report.add_violation(k[idx], val[idx] - base[idx], reason)
    report.points_checked = points * len(lams)
    report.details = {"transforms": len(lams), "max_relative_change": worst,
                      "changed_points": changed, "rtol": rtol, "seed": seed}
    return report


def _one_point_density(alpha: float, m: float, s: int, c_1: float) -> float:
    # W_1 = c_1 / m^(2 alpha) is constant; its transform is (2 pi)^((s+1)/2) W_1 delta(k)
    return (2 * math.pi) ** ((s + 1) / 2) * c_1 * m ** (-2 * alpha)


def full_density_strata(n: int, alpha: float, m: float, s: int, cs: Sequence[float],
                        count: int, rng: np.random.Generator) -> dict:
    """Sample the full n-point measure on each partition stratum.

    For a partition of ``{1..n}`` the stratum is the subspace where every
    block sums to zero; there the full density is the product of block
    densities (singletons contribute the constant one-point weight,
    alpha = 1/2 pairs live on the shell).  Returns ``{partition: (momenta, values)}``.
    """
    out = {}
    for part in set_partitions(n):
        k = np.zeros((count, n, s + 1))
        vals = np.ones(count)
        for block in part:
            l = len(block)
            c_l = cs[l - 1]
            if l == 1:
                vals = vals * _one_point_density(alpha, m, s, c_l)
            elif l == 2 and alpha == 0.5:
                kvec, neg, k1 = sample_shell(s, count, m, rng)
                k[:, block[0]] = k1
                k[:, block[1]] = -k1
                vals = vals * two_point_shell_density(m, s, kvec, c_l, negative=neg)
            else:
                kb = sample_hyperplane(l, s, count, m, rng)
                k[:, list(block)] = kb
                vals = vals * wightman_truncated_density(l, alpha, m, s, c_l, kb)
        out[part] = (k, vals)
    return out


def check_positivity(n: int, alpha: float, m: float, s: int, cs: Sequence[float],
                     points: int = 20_000, seed: int = 0, floor: float = -1e-12) -> AxiomReport:
    """Full (non-truncated) densities are nonnegative on every stratum."""
    if len(cs) < n:
        raise ValueError(f"need cumulants c_1..c_{n}")
    rng = np.random.default_rng(seed)
    report = AxiomReport("positivity", n, alpha)
    strata = full_density_strata(n, alpha, m, s, cs, points, rng)
    minimum = math.inf
    for part, (k, vals) in strata.items():
        minimum = min(minimum, float(vals.min()))
        for idx in np.flatnonzero(vals < floor):
            report.add_violation(k[idx], vals[idx], f"negative density on stratum {part}")
        report.points_checked += len(vals)
    report.details = {"strata": len(strata), "min_value": minimum, "floor": floor,
                      "cumulants": list(cs[:n]), "seed": seed}
    return report


# ---------------------------------------------------------------------------
# n = 2 continuation back to Euclidean time

def _radial_fourier(func: Callable[[float], float], s: int, r: float, epsrel: float) -> float:
    """``int d^s k func(|k|) exp(i k.x)`` for ``|x| = r``."""
    if r == 0:
        area = 2 * math.pi ** (s / 2) / math.gamma(s / 2)
        val, err = integrate.quad(lambda q: q ** (s - 1) * func(q), 0, math.inf,
                                  epsabs=0, epsrel=epsrel, limit=400)
        return area * val
    if s == 1:
        val, err = integrate.quad(func, 0, math.inf, weight="cos", wvar=r, limit=400)
        return 2.0 * val
    nu = s / 2 - 1
    pref = (2 * math.pi) ** (s / 2) * r ** (1 - s / 2)
    val, err = integrate.quad(lambda q: q ** (s / 2) * special.jv(nu, q * r) * func(q),
                              0, math.inf, epsabs=0, epsrel=epsrel, limit=1000)
    return pref * val


def shell_two_point_function(tau: float, xvec, m: float, s: int, c_2: float = 1.0,
                             epsrel: float = 1e-10) -> float:
    """Euclidean two-point function from the alpha = 1/2 shell measure.

    ``(2 pi)^-(s+1) int d^s k [2 pi c_2 / (2 omega)] exp(-omega |tau| + i k.x)``.
    """
    if tau == 0:
        raise ValueError("coincident Euclidean times are not allowed")
    tau = abs(tau)
    r = float(np.linalg.norm(np.atleast_1d(xvec))) if s else 0.0

    def radial(q):
        w = math.sqrt(q * q + m * m)
        return float(two_point_shell_density(m, s, [q] + [0.0] * (s - 1), c_2)) * math.exp(-w * tau)

    return (2 * math.pi) ** (-(s + 1)) * _radial_fourier(radial, s, r, epsrel)


def spectral_two_point_function(tau: float, xvec, alpha: float, m: float, s: int,
                                c_2: float = 1.0, epsrel: float = 1e-9) -> float:
    """Euclidean two-point function from the alpha < 1/2 density, by quadrature.

    Integrates the n = 2 truncated density over the backward timelike
    region in coordinates ``(mu, k_vec)`` with ``k0 = -sqrt(mu^2 + k^2)``,
    ``dk0 = mu dmu / omega``.
    """
    if not 0 < alpha < 0.5:
        raise ValueError("spectral route needs 0 < alpha < 1/2")
    if tau == 0:
        raise ValueError("coincident Euclidean times are not allowed")
    tau = abs(tau)
    r = float(np.linalg.norm(np.atleast_1d(xvec)))
    q_exp = 1.0 / (1.0 - 2 * alpha)

    def density_at(mu):
        k1 = np.zeros(s + 1)
        k1[0] = -mu
        k = np.stack([k1, -k1])
        return float(wightman_truncated_density(2, alpha, m, s, c_2, k, shell_tol=0.0))

    def inner(mu):
        # spatial integral of exp(-omega tau) / omega at mass mu
        return _radial_fourier(lambda q: math.exp(-math.sqrt(q * q + mu * mu) * tau)
                               / math.sqrt(q * q + mu * mu), s, r, epsrel)

    def outer(t):
        # mu = m + t^q removes the (mu - m)^(-2 alpha) endpoint singularity
        if t == 0:
            return 0.0
        mu = m + t**q_exp
        jac = q_exp * t ** (q_exp - 1)
        return jac * mu * density_at(mu) * inner(mu)

    val, err = integrate.quad(outer, 0, math.inf, epsabs=0, epsrel=epsrel, limit=400)
    if not math.isfinite(val):
        raise QuadratureError("spectral two-point quadrature failed", tau=tau, r=r, error=err)
    return (2 * math.pi) ** (-(s + 1)) * val


@dataclass
class ContinuationReport:
    alpha: float
    mass: float
    s: int
    rtol: float
    rows: list[dict] = field(default_factory=list)
    log_slope: float | None = None
    log_slope_tau: float | None = None
    convention: str = FOURIER_CONVENTION

    @property
    def max_relative_error(self) -> float:
        return max((r["relative_error"] for r in self.rows), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_relative_error <= self.rtol

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "mass": self.mass, "s": self.s, "rtol": self.rtol,
                "passed": self.passed, "max_relative_error": self.max_relative_error,
                "log_slope": self.log_slope, "log_slope_tau": self.log_slope_tau,
                "convention": self.convention, "rows": self.rows}


def continuation_check_n2(alpha: float, m: float, s: int, separations, c_2: float = 1.0,
                          rtol: float = 1e-3) -> ContinuationReport:
    """Compare the momentum-space route with ``c_2 G_{2 alpha}`` in ``d = s + 1``.

    ``separations`` is a list of ``(tau, x_vec)``.  alpha = 1/2 uses the
    shell measure; alpha < 1/2 integrates the n = 2 density.
    """
    _check_alpha(alpha)
    spec = OperatorSpec(2 * alpha, m, "continuum_symbol")
    report = ContinuationReport(alpha, m, s, rtol)
    for tau, xvec in separations:
        xvec = np.atleast_1d(np.asarray(xvec, dtype=np.float64))
        if alpha == 0.5:
            val = shell_two_point_function(tau, xvec, m, s, c_2)
        else:
            val = spectral_two_point_function(tau, xvec, alpha, m, s, c_2)
        r = math.sqrt(tau * tau + float(xvec @ xvec))
        ref = c_2 * green_continuum(spec, r, s + 1)
        report.rows.append({"tau": float(tau), "x": xvec.tolist(), "momentum_route": val,
                            "green_route": ref, "relative_error": abs(val - ref) / abs(ref)})
    return report


def shell_log_slope(m: float, s: int, tau: float, h: float = 0.5) -> float:
    """Central-difference ``d log S_2^T / d tau`` at spatial separation zero."""
    zero = np.zeros(s)
    up = shell_two_point_function(tau + h, zero, m, s)
    down = shell_two_point_function(tau - h, zero, m, s)
    return (math.log(up) - math.log(down)) / (2 * h)
