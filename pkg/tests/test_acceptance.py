"""Acceptance criteria at their stated tolerances; one summary line each."""

import json
import math
import re
import time

import numpy as np
import pytest

from levyqft.cli import run
from levyqft.fracop import CONTINUUM, OperatorSpec, convolve, green_continuum, green_lattice
from levyqft.hsc import (TwoPointIntegrals, bound_ratio_study, check_m_nonnegative,
                         hsc_split_check, local_integrability_study, p_seminorm, split_family)
from levyqft.lattice import LatticeSpec
from levyqft.montecarlo import compare, default_point_tuples, simulate
from levyqft.noise import LevyLaw
from levyqft.partitions import (bell_number, cumulants_from_moments, moments_from_cumulants,
                                set_partitions, subsets)
from levyqft.wightman import (check_hermiticity, check_lorentz_invariance, check_positivity,
                              check_spectral_support, continuation_check_n2, mutant_density,
                              shell_log_slope)

pytestmark = pytest.mark.acceptance


def test_moment_formula_reproduction(criterion):
    with criterion(1, "moment formula vs Monte Carlo") as c:
        start = time.perf_counter()
        lat = LatticeSpec((32, 32))
        laws = {"gaussian": LevyLaw.gaussian(1.0),
                "poisson": LevyLaw.poisson(1.0, drift=-1.0)}
        tuples = default_point_tuples(lat, (2, 3, 4), 20, seed=0)
        worst, third_nonzero, ok = 0.0, False, True
        for alpha in (0.25, 0.5):
            for name, law in laws.items():
                ens = simulate(lat, OperatorSpec(alpha, 1.0), law, 20_000, seed=1)
                rep = compare(ens, tuples)
                worst = max(worst, rep.max_abs_z)
                ok = ok and rep.passed
                if name == "poisson":
                    third = [r.analytic for r in rep.rows if r.n == 3]
                    third_nonzero = bool(third) and all(abs(v) > 1e-12 for v in third)
                    ok = ok and third_nonzero
        elapsed = time.perf_counter() - start
        c.passed = ok and elapsed < 300
        c.detail = f"max |z| {worst:.2f}, Poisson third order nonzero {third_nonzero}, {elapsed:.0f} s"
    assert c.passed


def test_green_kernel_semigroup(criterion):
    with criterion(2, "lattice Green semigroup") as c:
        worst = 0.0
        for extents in ((64, 64), (16, 16, 16, 16)):
            lat = LatticeSpec(extents)
            for alpha in (0.2, 0.25, 0.5):
                g = green_lattice(OperatorSpec(alpha, 1.0), lat)
                g2 = green_lattice(OperatorSpec(2 * alpha, 1.0), lat)
                err = np.max(np.abs(convolve(g, g) - g2.values)) / np.max(np.abs(g2.values))
                worst = max(worst, float(err))
        c.passed = worst <= 1e-10
        c.detail = f"max relative deviation {worst:.1e}"
    assert c.passed


def test_continuum_green_oracle(criterion):
    with criterion(3, "continuum Green vs Yukawa") as c:
        spec = OperatorSpec(1.0, 1.0, CONTINUUM)
        worst = 0.0
        for r in np.geomspace(0.1, 10.0, 41):
            exact = math.exp(-r) / (4 * math.pi * r)
            worst = max(worst, abs(green_continuum(spec, r, 3) - exact) / exact)
        c.passed = worst <= 1e-6
        c.detail = f"max relative error {worst:.1e}"
    assert c.passed


def test_axiom_grids(criterion):
    with criterion(4, "axiom grids") as c:
        start = time.perf_counter()
        cases = [(2, 0.25), (3, 0.25), (4, 0.25), (2, 0.5)]
        failed = []
        for n, alpha in cases:
            reports = [
                check_spectral_support(n, alpha, 1.0, 1, points=1_000_000),
                check_hermiticity(n, alpha, 1.0, 1, points=100_000, rtol=1e-12),
                check_lorentz_invariance(n, alpha, 1.0, 1, transforms=10, rtol=1e-10),
                check_positivity(n, alpha, 1.0, 1, [0.5, 1.0, 1.0, 1.0], floor=-1e-12),
            ]
            failed += [f"{r.axiom}[n={n},a={alpha}]" for r in reports if not r.passed]
        controls = [
            check_spectral_support(3, 0.25, 1.0, 1, points=100_000,
                                   density=mutant_density(3, 0.25, 1.0, 1)),
            check_spectral_support(4, 0.25, 1.0, 1, points=100_000,
                                   density=mutant_density(4, 0.25, 1.0, 1, flip_slot=1)),
            check_lorentz_invariance(3, 0.25, 1.0, 1, improper=True),
            check_positivity(3, 0.25, 1.0, 1, [0.5, 1.0, -1.0]),
        ]
        missed = [r.axiom for r in controls if r.passed]
        elapsed = time.perf_counter() - start
        c.passed = not failed and not missed and elapsed < 120
        c.detail = (f"{4 * len(cases)} grids, failures {failed or 'none'}, "
                    f"controls caught {len(controls) - len(missed)}/{len(controls)}, "
                    f"{elapsed:.0f} s")
    assert c.passed


def test_continuation_identity(criterion):
    with criterion(5, "n=2 shell continuation") as c:
        taus = np.linspace(0.5, 5.0, 10)
        rep = continuation_check_n2(0.5, 1.0, 1, [(t, [0.0]) for t in taus], rtol=1e-3)
        slope = shell_log_slope(1.0, 1, 40.0)
        slope_ok = abs(slope + 1.0) <= 0.02
        c.passed = rep.passed and slope_ok
        c.detail = f"max relative error {rep.max_relative_error:.1e}, log slope {slope:.4f}"
    assert c.passed


@pytest.mark.slow
@pytest.mark.parametrize("n", [2, 3])
def test_bound_study(criterion, n):
    with criterion(6, f"bound study n={n}") as c:
        rep = bound_ratio_study(n, 0.25, family_size=50)
        c.passed = rep.passed and len(rep.members) == 50
        c.detail = (f"50 members finite {rep.all_finite}, max ratio {rep.max_ratio:.3g}, "
                    f"narrowing slope {rep.narrowing_slope:+.3f}, weighted spreading slope "
                    f"{rep.spreading_slope_weighted:+.3f}, N=0 slope "
                    f"{rep.spreading_slope_unweighted:+.3f}")
    assert c.passed


def test_m_measures(criterion):
    with criterion(7, "M_j measures and split chain") as c:
        nonneg = all(check_m_nonnegative(j, 0.25, points=100_000).passed for j in (1, 2))
        slopes = {a: local_integrability_study(a).fitted_slope for a in (0.1, 0.2, 0.3, 0.4)}
        slopes_ok = all(abs(v - (1 - 2 * a)) <= 0.05 for a, v in slopes.items())
        ints = TwoPointIntegrals(0.25, 1.0, 1)
        rng = np.random.default_rng(7)
        worst = 0.0
        for f, _ in split_family(1, 5, seed=3):
            base = p_seminorm(f, 1.0, ints)
            moved = p_seminorm(f.translate(rng.uniform(-10, 10, 2)), 1.0, ints)
            worst = max(worst, abs(moved - base) / base)
        split = hsc_split_check(0.25, size=20)
        c.passed = (nonneg and slopes_ok and worst <= 1e-10 and split.passed
                    and len(split.rows) == 20)
        c.detail = (f"nonnegative {nonneg}, slopes "
                    + ", ".join(f"{v:.3f}" for v in slopes.values())
                    + f", translation {worst:.1e}, chain {sum(r['holds'] for r in split.rows)}"
                    f"/20 with C={split.constant:.3g}")
    assert c.passed


def test_combinatorics(criterion):
    with criterion(8, "partitions and moment-cumulant inversion") as c:
        bell_ok = all(len(set_partitions(n)) == bell_number(n) for n in range(1, 11))
        rng = np.random.default_rng(8)
        worst = 0.0
        for n in range(1, 7):
            for _ in range(5):
                k = {s: rng.uniform(-2, 2) for s in subsets(n)}
                back = cumulants_from_moments(moments_from_cumulants(k, n), n)
                worst = max(worst, max(abs(back[s] - k[s]) for s in k))
        c.passed = bell_ok and worst <= 1e-10
        c.detail = f"Bell counts through 10 {bell_ok}, round trip error {worst:.1e}"
    assert c.passed


SMALL_RUNS = {
    "simulate": ["--samples", "500"],
    "compare-moments": ["--samples", "500"],
    "eval-wightman": [],
    "check-axioms": ["--set", "checks.axioms.support_points=100000"],
    "check-hsc": ["--n", "2", "--family-size", "3", "--set", "checks.hsc.split_pairs=4"],
    "report": [],
}


def test_reproducibility(criterion, tmp_path):
    with criterion(9, "byte-identical re-runs") as c:
        differing, codes = [], {}
        for command, extra in SMALL_RUNS.items():
            snapshots = []
            for _ in range(2):
                codes[command] = run([command, "--quiet", "--output-dir", str(tmp_path), *extra])
                snapshots.append({p.name: p.read_bytes() for p in sorted(tmp_path.iterdir())})
            for name in snapshots[0]:
                a, b = snapshots[0][name], snapshots[1][name]
                if name.endswith(".json"):
                    a = re.sub(rb'"timestamp": "[^"]*"', b"", a)
                    b = re.sub(rb'"timestamp": "[^"]*"', b"", b)
                if a != b:
                    differing.append(name)
        stamped = json.loads((tmp_path / "simulate.json").read_text())["timestamp"]
        c.passed = not differing and all(v == 0 for v in codes.values()) and bool(stamped)
        c.detail = f"{len(SMALL_RUNS)} subcommands, differing files {differing or 'none'}"
    assert c.passed
