"""Direct sampling of phi = L^{-1} eta and statistical moment comparison.

Every sample is a deterministic function of ``(seed, index)``; standard
errors come from batch means over contiguous blocks of samples.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .fracop import OperatorSpec, apply_inverse_batch, green_lattice, green_continuum, symbol_grid
from .lattice import FieldSample, LatticeSpec
from .noise import LatticeNoiseLaw, LevyLaw, cumulant, sample_site_noise
from .schwinger import schwinger, truncated_schwinger

Z_THRESHOLD = 4.0
DEFAULT_BATCHES = 32
CHUNK = 256


@dataclass
class Ensemble:
    lattice: LatticeSpec
    op_spec: OperatorSpec | None
    law: LevyLaw | None
    samples: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        self.samples = samples.reshape((-1,) + self.lattice.shape)

    def __len__(self) -> int:
        return self.samples.shape[0]

    def __getitem__(self, i: int) -> FieldSample:
        return FieldSample(self.lattice, self.samples[i])

    def model_dict(self) -> dict[str, Any]:
        op = None
        if self.op_spec is not None:
            op = {"alpha": self.op_spec.alpha, "mass": self.op_spec.mass,
                  "symbol_kind": self.op_spec.symbol_kind}
        return {"operator": op, "law": self.law.to_dict() if self.law else None}

    @classmethod
    def from_model_dict(cls, lattice, samples, seed, model) -> "Ensemble":
        op = OperatorSpec(**model["operator"]) if model.get("operator") else None
        law = LevyLaw.from_config(model["law"]) if model.get("law") else None
        return cls(lattice, op, law, samples, seed)


def _simulate_chunk(lattice, op_spec, noise_law, seed, start, stop) -> np.ndarray:
    noise = np.stack([
        sample_site_noise(noise_law, lattice.size, seed, i).reshape(lattice.shape)
        for i in range(start, stop)
    ])
    return apply_inverse_batch(op_spec, lattice, noise)


def simulate(lattice: LatticeSpec, op_spec: OperatorSpec, law: LevyLaw, n_samples: int,
             seed: int, threads: int = 1) -> Ensemble:
    """Draw ``n_samples`` fields ``phi = L^{-1} eta``.

    Work is cut into fixed chunks of sample indices, so the result does not
    depend on ``threads``.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    noise_law = LatticeNoiseLaw(law, lattice.cell_volume)
    out = np.empty((n_samples,) + lattice.shape)
    bounds = [(s, min(s + CHUNK, n_samples)) for s in range(0, n_samples, CHUNK)]

    def work(b):
        out[b[0]:b[1]] = _simulate_chunk(lattice, op_spec, noise_law, seed, *b)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, bounds))
    else:
        for b in bounds:
            work(b)
    return Ensemble(lattice, op_spec, law, out, seed)


def spectral_site_variance(lattice: LatticeSpec, op_spec: OperatorSpec, law: LevyLaw) -> float:
    """``c_2 / (N v) * sum_k symbol(k)^-2``, the exact one-site variance."""
    sym = symbol_grid(op_spec, lattice)
    return cumulant(law, 2) * float(np.sum(sym**-2.0)) / (lattice.size * lattice.cell_volume)


@dataclass
class MomentEstimate:
    value: float
    std_error: float
    sample_count: int


def batch_means(stat: np.ndarray, batches: int = DEFAULT_BATCHES) -> MomentEstimate:
    stat = np.asarray(stat, dtype=np.float64)
    n = stat.size
    if n < 2:
        raise ValueError("need at least two samples for an error estimate")
    b = min(batches, n)
    edges = np.linspace(0, n, b + 1).astype(int)
    means = np.array([stat[lo:hi].mean() for lo, hi in zip(edges[:-1], edges[1:])])
    sizes = np.diff(edges)
    value = float(np.dot(means, sizes) / n)
    se = float(means.std(ddof=1) / math.sqrt(b))
    return MomentEstimate(value, se, n)


def product_statistic(samples: np.ndarray, lattice: LatticeSpec, points,
                      translation_average: bool) -> np.ndarray:
    """Per-sample value of ``prod_i phi(x_i)``, optionally averaged over all torus shifts."""
    axes = tuple(range(1, lattice.dim + 1))
    stats = np.empty(samples.shape[0])
    for lo in range(0, samples.shape[0], 2048):
        chunk = samples[lo:lo + 2048]
        if translation_average:
            prod = None
            for p in points:
                shifted = np.roll(chunk, tuple(-int(c) for c in p), axis=axes)
                prod = shifted if prod is None else prod * shifted
            stats[lo:lo + len(chunk)] = prod.reshape(len(chunk), -1).mean(axis=1)
        else:
            prod = np.ones(len(chunk))
            for p in points:
                prod = prod * chunk[(slice(None),) + lattice.wrap(p)]
            stats[lo:lo + len(chunk)] = prod
    return stats


def estimate_moment(ensemble: Ensemble, points, translation_average: bool | None = None,
                    batches: int = DEFAULT_BATCHES) -> MomentEstimate:
    """Sample mean of ``prod_i phi(x_i)`` with a batch-means standard error.

    Translation averaging defaults to on for at most three points.
    """
    if len(ensemble) == 0:
        raise ValueError("empty ensemble")
    pts = [ensemble.lattice.wrap(p) for p in points]
    if translation_average is None:
        translation_average = len(pts) <= 3
    stat = product_statistic(ensemble.samples, ensemble.lattice, pts, translation_average)
    return batch_means(stat, batches)


@dataclass
class ComparisonRow:
    points: list[list[int]]
    n: int
    estimate: float
    std_error: float
    analytic: float
    z: float
    flagged: bool


@dataclass
class ComparisonReport:
    rows: list[ComparisonRow] = field(default_factory=list)
    threshold: float = Z_THRESHOLD
    sample_count: int = 0
    meta: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not any(r.flagged for r in self.rows)

    @property
    def max_abs_z(self) -> float:
        return max((abs(r.z) for r in self.rows), default=0.0)

    def to_dict(self) -> dict[str, Any]:
        return {
            "passed": self.passed,
            "threshold": self.threshold,
            "sample_count": self.sample_count,
            "max_abs_z": self.max_abs_z,
            "meta": self.meta,
            "rows": [asdict(r) for r in self.rows],
        }

    def to_text(self) -> str:
        head = f"{'points':<36} {'n':>2} {'estimate':>14} {'std_err':>11} {'analytic':>14} {'z':>8}"
        lines = [head, "-" * len(head)]
        for r in self.rows:
            pts = " ".join("(" + ",".join(str(c) for c in p) + ")" for p in r.points)
            flag = "  !" if r.flagged else ""
            lines.append(
                f"{pts:<36} {r.n:>2} {r.estimate:>14.6e} {r.std_error:>11.3e} "
                f"{r.analytic:>14.6e} {r.z:>8.3f}{flag}"
            )
        lines.append(f"max |z| = {self.max_abs_z:.3f}  ({'pass' if self.passed else 'FAIL'})")
        return "\n".join(lines)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["points", "n", "estimate", "std_error", "analytic", "z", "flagged"])
        for r in self.rows:
            w.writerow([" ".join(":".join(map(str, p)) for p in r.points), r.n,
                        repr(r.estimate), repr(r.std_error), repr(r.analytic), repr(r.z),
                        int(r.flagged)])
        return buf.getvalue()


def analytic_oracle(lattice: LatticeSpec, op_spec: OperatorSpec, law: LevyLaw) -> Callable:
    """Partition-formula moments for the given model on ``lattice``."""
    green = green_lattice(op_spec, lattice)
    return lambda points: schwinger(points, law, green)


def compare(ensemble: Ensemble, points_list: Sequence, oracle: Callable | None = None,
            threshold: float = Z_THRESHOLD, translation_average: bool | None = None,
            batches: int = DEFAULT_BATCHES) -> ComparisonReport:
    """z-score every point tuple against the analytic moments.

    Without an explicit ``oracle`` the ensemble's own model is used.
    """
    if oracle is None:
        oracle = analytic_oracle(ensemble.lattice, ensemble.op_spec, ensemble.law)
    report = ComparisonReport(threshold=threshold, sample_count=len(ensemble))
    for points in points_list:
        if len(points) > 6:
            raise ValueError("compare supports tuples of at most 6 points")
        est = estimate_moment(ensemble, points, translation_average, batches)
        exact = oracle(points)
        if est.std_error > 0:
            z = (est.value - exact) / est.std_error
        else:
            z = 0.0 if math.isclose(est.value, exact, rel_tol=1e-12, abs_tol=1e-300) else math.inf
        report.rows.append(ComparisonRow(
            points=[list(map(int, p)) for p in points], n=len(points),
            estimate=est.value, std_error=est.std_error, analytic=exact, z=float(z),
            flagged=bool(abs(z) > threshold),
        ))
    return report


def default_point_tuples(lattice: LatticeSpec, orders=(2, 3, 4), count: int = 20,
                         seed: int = 0, reach: int = 3) -> list[list[tuple[int, ...]]]:
    """Reproducible point tuples clustered within ``reach`` sites of the origin."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        n = orders[i % len(orders)]
        pts = [tuple(int(c) for c in rng.integers(-reach, reach + 1, lattice.dim)) for _ in range(n)]
        out.append([lattice.wrap(p) for p in pts])
    return out


def spacing_convergence_table(op_spec: OperatorSpec, law: LevyLaw, dim: int, box: float,
                              separation: float, spacings: Sequence[float]) -> list[dict]:
    """Lattice two-point truncated function at a fixed physical separation.

    Rows give the lattice value for each spacing next to the continuum
    value ``c_2 G_{2 alpha}(r)``.  No convergence rate is fitted.
    """
    c2 = cumulant(law, 2)
    continuum = c2 * green_continuum(op_spec.with_alpha(2 * op_spec.alpha), separation, dim)
    rows = []
    for a in spacings:
        n = int(round(box / a))
        steps = separation / a
        if abs(steps - round(steps)) > 1e-9:
            raise ValueError(f"separation {separation} is not a multiple of spacing {a}")
        lattice = LatticeSpec((n,) * dim, (a,) * dim)
        green = green_lattice(op_spec, lattice)
        x2 = (int(round(steps)),) + (0,) * (dim - 1)
        val = truncated_schwinger([(0,) * dim, x2], green, c2)
        rows.append({"spacing": a, "sites": n, "lattice": val, "continuum": continuum,
                     "relative_difference": (val - continuum) / continuum})
    return rows
