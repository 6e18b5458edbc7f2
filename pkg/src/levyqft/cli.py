"""Command line front end: ``levyqft <subcommand> [options]``.

Exit status is 0 when every check passes, 1 when a check fails and 2 for
usage or configuration errors.  Reports are deterministic JSON; the only
run-dependent value is the separate ``timestamp`` field.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import platform
import sys
from datetime import datetime, timezone
from typing import Any, Callable

import numpy as np
import scipy

from . import __version__
from .config import CONFIG_ENV, ConfigError, load_config, parse_override
from .fracop import OperatorSpec
from .hsc import (bound_ratio_study, check_m_nonnegative, hsc_split_check,
                  local_integrability_study)
from .lattice import LatticeSpec, load_ensemble, save_ensemble
from .montecarlo import analytic_oracle, compare, default_point_tuples, simulate
from .noise import LevyLaw, cumulants
from .wightman import (FOURIER_CONVENTION, check_hermiticity, check_lorentz_invariance,
                       check_positivity, check_spectral_support,
                       continuation_check_n2, mutant_density, sample_hyperplane,
                       shell_log_slope, two_point_shell_density, wightman_truncated_density)

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

TAGS = {
    "simulate": ["field-equation-sampling"],
    "compare-moments": ["moment-formula", "partition-sum"],
    "eval-wightman": ["wightman-density", "euclidean-continuation"],
    "check-axioms": ["spectral-condition", "hermiticity", "poincare-invariance", "positivity"],
    "check-hsc": ["schwartz-norm-bound", "majorising-measures", "shell-integrability",
                  "cauchy-schwarz-split"],
    "report": ["summary"],
}

# log slope of the shell two-point function is read off at this m * tau
LOG_SLOPE_MTAU = 40.0


class UsageError(ValueError):
    """Arguments are inconsistent with the requested subcommand."""


def versions() -> dict[str, str]:
    return {"levyqft": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def _hash(cfg) -> str:
    from .reports import config_hash
    return config_hash(cfg)


def envelope(command: str, cfg: dict, passed: bool, result: dict) -> dict:
    return {"command": command, "tags": TAGS[command], "config": cfg, "config_hash": _hash(cfg),
            "versions": versions(), "passed": bool(passed), "result": result,
            "timestamp": datetime.now(timezone.utc).isoformat()}


def _model(cfg):
    m = cfg["model"]
    lat = LatticeSpec(tuple(cfg["lattice"]["extents"]),
                      tuple(float(a) for a in cfg["lattice"]["spacings"]))
    return lat, OperatorSpec(m["alpha"], m["mass"]), LevyLaw.from_config(m["law"])


# ---------------------------------------------------------------------------
# subcommands; each returns (passed, result dict, text summary, extra files)

def cmd_simulate(cfg, args):
    lat, op, law = _model(cfg)
    run = cfg["run"]
    ens = simulate(lat, op, law, run["samples"], run["seed"], threads=run["threads"])
    path = os.path.join(cfg["output"]["directory"], "ensemble.bin")
    save_ensemble(ens, path)
    digest = hashlib.sha256(np.ascontiguousarray(ens.samples, dtype="<f8").tobytes()).hexdigest()
    finite = bool(np.all(np.isfinite(ens.samples)))
    result = {"ensemble": "ensemble.bin", "samples": len(ens), "sha256": digest,
              "site_mean": float(ens.samples.mean()), "site_variance": float(ens.samples.var()),
              "all_finite": finite}
    text = f"simulated {len(ens)} samples on {lat.shape}; sha256 {digest[:16]}"
    return finite, result, text, {}


def cmd_compare_moments(cfg, args):
    lat, op, law = _model(cfg)
    mc = cfg["checks"]["moments"]
    if args.ensemble:
        ens = load_ensemble(args.ensemble)
        if ens.lattice != lat:
            raise UsageError("ensemble lattice differs from the configured lattice")
    else:
        run = cfg["run"]
        ens = simulate(lat, op, law, run["samples"], run["seed"], threads=run["threads"])
    oracle_mass = mc["oracle_mass"] if mc["oracle_mass"] is not None else op.mass
    oracle = analytic_oracle(lat, OperatorSpec(op.alpha, oracle_mass), law)
    tuples = default_point_tuples(lat, tuple(mc["orders"]), mc["tuples"], cfg["run"]["seed"],
                                  mc["reach"])
    rep = compare(ens, tuples, oracle, threshold=mc["z_threshold"], batches=mc["batches"])
    third = [r.analytic for r in rep.rows if r.n == 3]
    rep.meta = {"oracle_mass": oracle_mass, "model_mass": op.mass,
                "cumulants": cumulants(law, 4).tolist(),
                "third_order_nonzero": bool(third) and any(abs(v) > 0 for v in third)}
    return rep.passed, rep.to_dict(), rep.to_text(), {"csv": rep.to_csv()}


def cmd_eval_wightman(cfg, args):
    m = cfg["model"]
    wc = cfg["checks"]["wightman"]
    alpha, mass, s = m["alpha"], m["mass"], m["s"]
    n = args.n if args.n is not None else wc["n"]
    rng = np.random.default_rng(cfg["run"]["seed"])
    c_n = float(cumulants(LevyLaw.from_config(m["law"]), n)[n - 1])
    rows = []
    if n == 2 and alpha == 0.5:
        kvec = rng.normal(0.0, 2.0, (wc["points"], s))
        vals = two_point_shell_density(mass, s, kvec, c_n)
        for kv, v in zip(kvec, vals):
            rows.append({"kvec": kv.tolist(), "branch": "negative-energy", "density": float(v)})
    elif n >= 2:
        k = sample_hyperplane(n, s, wc["points"], mass, rng)
        vals = wightman_truncated_density(n, alpha, mass, s, c_n, k)
        rows = [{"momenta": kk.tolist(), "density": float(v)} for kk, v in zip(k, vals)]
    else:
        raise UsageError("eval-wightman needs n >= 2")
    c2 = float(cumulants(LevyLaw.from_config(m["law"]), 2)[1])
    seps = [(t / mass, np.zeros(s)) for t in wc["continuation_taus"]]
    cont = continuation_check_n2(alpha, mass, s, seps, c_2=c2, rtol=wc["continuation_rtol"])
    passed = cont.passed
    result = {"n": n, "c_n": c_n, "convention": FOURIER_CONVENTION, "density_rows": rows,
              "continuation": cont.to_dict()}
    if alpha == 0.5:
        slope = shell_log_slope(mass, s, LOG_SLOPE_MTAU / mass)
        ok = abs(slope + mass) <= 0.02 * mass
        result["log_slope"] = {"m_tau": LOG_SLOPE_MTAU, "slope": slope, "within_2pct": ok}
        passed = passed and ok
    text = (f"n={n}: {len(rows)} density values; continuation max rel. error "
            f"{cont.max_relative_error:.2e} ({'pass' if cont.passed else 'FAIL'})")
    return passed, result, text, {}


def cmd_check_axioms(cfg, args):
    m = cfg["model"]
    ac = cfg["checks"]["axioms"]
    alpha, mass, s = m["alpha"], m["mass"], m["s"]
    seed = cfg["run"]["seed"]
    checks = []

    def add(name, report, expect_pass=True):
        checks.append({"name": name, "expect_pass": expect_pass,
                       "ok": report.passed == expect_pass, "report": report.to_dict()})

    cases = [(n, alpha) for n in ac["orders"] if not (n == 2 and alpha == 0.5)]
    if ac["shell_case"] or alpha == 0.5:
        cases.insert(0, (2, 0.5))
    for n, a in cases:
        tag = f"n={n},alpha={a:g}"
        add(f"spectral-condition[{tag}]",
            check_spectral_support(n, a, mass, s, ac["support_points"], seed))
        add(f"hermiticity[{tag}]", check_hermiticity(n, a, mass, s, ac["hermiticity_points"], seed))
        add(f"poincare-invariance[{tag}]",
            check_lorentz_invariance(n, a, mass, s, ac["boosts"], ac["lorentz_points"], seed))
        if n <= len(ac["positivity_cumulants"]):
            add(f"positivity[{tag}]", check_positivity(n, a, mass, s, ac["positivity_cumulants"],
                                                       ac["positivity_points"], seed))
    if ac["mutants"]:
        n = max(o for o in ac["orders"] if o >= 2)
        a = alpha if alpha < 0.5 or n > 2 else 0.25
        add(f"mutant-spectral-condition[n={n}]",
            check_spectral_support(n, a, mass, s, 100_000, seed,
                                   density=mutant_density(n, a, mass, s)), expect_pass=False)
        add(f"time-reflection-control[n={n}]",
            check_lorentz_invariance(n, a, mass, s, points=ac["lorentz_points"], seed=seed,
                                     improper=True), expect_pass=False)
    passed = all(c["ok"] for c in checks)
    text = "\n".join(f"{c['name']:<44} {'ok' if c['ok'] else 'FAIL'}"
                     f"{'' if c['expect_pass'] else '  (negative control)'}" for c in checks)
    return passed, {"convention": FOURIER_CONVENTION, "checks": checks}, text, {}


def cmd_check_hsc(cfg, args):
    m = cfg["model"]
    hc = cfg["checks"]["hsc"]
    alpha, mass, s = m["alpha"], m["mass"], m["s"]
    if not alpha < 0.5:
        raise UsageError("check-hsc needs alpha < 1/2 (the bound and M_j formulas assume it)")
    orders = [args.n] if args.n is not None else hc["n"]
    size = args.family_size if args.family_size is not None else hc["family_size"]
    seed = cfg["run"]["seed"]
    parts: dict[str, Any] = {}
    lines = []
    for n in orders:
        if n == 3 and s != 1:
            raise UsageError("the three-point bound study is implemented for s = 1")
        rep = bound_ratio_study(n, alpha, mass, s, family_size=size, seed=seed)
        parts[f"bound_n{n}"] = rep.to_dict()
        lines.append(f"bound n={n}: max ratio {rep.max_ratio:.3e}, "
                     f"narrowing slope {rep.narrowing_slope:+.3f}, "
                     f"spreading slopes {rep.spreading_slope_weighted:+.3f} (N=2s+2) / "
                     f"{rep.spreading_slope_unweighted:+.3f} (N=0)  "
                     f"{'pass' if rep.passed else 'FAIL'}")
    oks = [parts[k]["passed"] for k in parts]
    for j in (1, 2):
        rep = check_m_nonnegative(j, alpha, mass, s, hc["m_points"], seed)
        parts[f"m{j}_nonnegative"] = rep.to_dict()
        oks.append(rep.passed)
        lines.append(f"M_{j} nonnegative on {rep.points_checked} points: "
                     f"{'pass' if rep.passed else 'FAIL'}")
    integ = []
    for a in hc["integrability_alphas"]:
        rep = local_integrability_study(a, mass, s)
        integ.append(rep.to_dict())
        oks.append(rep.matches and rep.converges)
        lines.append(f"shell integrability alpha={a:g}: slope {rep.fitted_slope:.4f} "
                     f"(expected {rep.expected_slope:.4f})")
    control = local_integrability_study(0.3, mass, s, exponent=1.2)
    oks.append(not control.converges)
    lines.append(f"divergence control exponent 1.2: slope {control.fitted_slope:.4f} "
                 f"({'detected' if not control.converges else 'MISSED'})")
    parts["integrability"] = integ
    parts["integrability_control"] = control.to_dict()
    split = hsc_split_check(alpha, mass, s, size=hc["split_pairs"], seed=seed)
    parts["split"] = split.to_dict()
    oks.append(split.passed and split.translation_max_relative <= 1e-10)
    lines.append(f"split chain over {len(split.rows)} pairs, C = {split.constant:.4g}: "
                 f"{'pass' if split.passed else 'FAIL'}")
    return all(oks), parts, "\n".join(lines), {}


def _collect_reports(directory: str) -> list[dict]:
    out = []
    if not os.path.isdir(directory):
        return out
    for name in sorted(os.listdir(directory)):
        if not name.endswith(".json") or name.endswith(".bin.json"):
            continue
        try:
            with open(os.path.join(directory, name), encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, ValueError):
            continue
        if isinstance(data, dict) and "command" in data and data["command"] != "report":
            out.append({"file": name, "command": data["command"], "passed": data.get("passed"),
                        "config_hash": data.get("config_hash"), "tags": data.get("tags")})
    return out


def cmd_report(cfg, args):
    directory = args.input_dir or cfg["output"]["directory"]
    found = _collect_reports(directory)
    passed = bool(found) and all(r["passed"] for r in found)
    lines = [f"{r['command']:<18} {'pass' if r['passed'] else 'FAIL'}  {r['file']}"
             for r in found] or [f"no reports in {directory}"]
    return passed, {"reports": found}, "\n".join(lines), {}


COMMANDS: dict[str, Callable] = {
    "simulate": cmd_simulate,
    "compare-moments": cmd_compare_moments,
    "eval-wightman": cmd_eval_wightman,
    "check-axioms": cmd_check_axioms,
    "check-hsc": cmd_check_hsc,
    "report": cmd_report,
}


# ---------------------------------------------------------------------------
# argument handling

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"YAML config file (default: ${CONFIG_ENV})")
    common.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override any config key, e.g. run.seed=3")
    common.add_argument("--alpha", type=float, help="model.alpha, in (0, 1/2]")
    common.add_argument("--mass", type=float, help="model.mass")
    common.add_argument("--s", type=int, help="model.s (spatial dimensions)")
    common.add_argument("--seed", type=int, help="run.seed")
    common.add_argument("--samples", type=int, help="run.samples")
    common.add_argument("--threads", type=int, help="run.threads (worker cap)")
    common.add_argument("--output-dir", help="output.directory")
    common.add_argument("--report", help="write the JSON report to this path")
    common.add_argument("--quiet", action="store_true", help="no text summary on stdout")

    p = argparse.ArgumentParser(prog="levyqft",
                                description="Levy-noise field simulations and Wightman checks")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="sample fields and save the ensemble")
    cm = sub.add_parser("compare-moments", parents=[common],
                        help="z-score sampled moments against the partition formula")
    cm.add_argument("--ensemble", help="use a saved ensemble instead of sampling")
    cm.add_argument("--oracle-mass", type=float,
                    help="mass used by the analytic oracle (negative control)")
    ew = sub.add_parser("eval-wightman", parents=[common],
                        help="evaluate momentum densities and the n=2 continuation")
    ew.add_argument("--n", type=int, help="order of the density")
    sub.add_parser("check-axioms", parents=[common],
                   help="spectral condition, hermiticity, invariance and positivity grids")
    ch = sub.add_parser("check-hsc", parents=[common],
                        help="Schwartz-norm bounds, M_j measures and the split chain")
    ch.add_argument("--n", type=int, choices=(2, 3), help="run the bound study for this n only")
    ch.add_argument("--family-size", type=int, help="members of the bound-study family")
    rp = sub.add_parser("report", parents=[common], help="summarise reports in a directory")
    rp.add_argument("--input-dir", help="directory to scan (default: output.directory)")
    return p


def _overrides(args) -> list:
    pairs = [parse_override(o) for o in args.overrides]
    flag_keys = {"alpha": "model.alpha", "mass": "model.mass", "s": "model.s",
                 "seed": "run.seed", "samples": "run.samples", "threads": "run.threads",
                 "output_dir": "output.directory"}
    for attr, key in flag_keys.items():
        val = getattr(args, attr)
        if val is not None:
            pairs.append((key.split("."), val))
    if getattr(args, "oracle_mass", None) is not None:
        pairs.append((["checks", "moments", "oracle_mass"], args.oracle_mass))
    return pairs


def _write(path: str, text: str) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def run(argv=None) -> int:
    from .reports import dumps

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_PASS
    try:
        cfg = load_config(args.config, _overrides(args))
        if getattr(args, "family_size", None) is not None and args.family_size < 1:
            raise UsageError("--family-size must be >= 1")
        outdir = cfg["output"]["directory"]
        os.makedirs(outdir, exist_ok=True)
        passed, result, text, extra = COMMANDS[args.command](cfg, args)
    except (ConfigError, UsageError) as exc:
        print(f"levyqft: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = envelope(args.command, cfg, passed, result)
    fmts = cfg["output"]["formats"]
    if "json" in fmts or args.report:
        _write(args.report or os.path.join(outdir, f"{args.command}.json"), dumps(report))
    if "csv" in fmts and "csv" in extra:
        _write(os.path.join(outdir, f"{args.command}.csv"), extra["csv"])
    if "text" in fmts:
        _write(os.path.join(outdir, f"{args.command}.txt"), text + "\n")
    if not args.quiet:
        print(text)
        print(f"{args.command}: {'PASS' if passed else 'FAIL'} (config {report['config_hash'][:12]})")
    if not passed:
        print(json.dumps({"command": args.command, "passed": False,
                          "failures": _failures(result)}, default=str), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_PASS


def _failures(result) -> list:
    """Names or rows of failed items, for the stderr detail line."""
    out = []
    if isinstance(result, dict):
        for c in result.get("checks", []):
            if not c.get("ok", True):
                out.append(c["name"])
        for r in result.get("rows", []):
            if isinstance(r, dict) and r.get("flagged"):
                out.append({"points": r["points"], "z": r["z"]})
        for r in result.get("reports", []):
            if not r.get("passed"):
                out.append(r["file"])
        for key, val in result.items():
            if isinstance(val, dict) and val.get("passed") is False:
                out.append(key)
    return out


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
