import json
import re
import subprocess
import sys

import pytest

from levyqft.cli import TAGS, run

SMALL = ["--samples", "400", "--set", "lattice.extents=[8,8]", "--set", "checks.moments.tuples=6"]
FAST_AXIOMS = ["--set", "checks.axioms.support_points=20000",
               "--set", "checks.axioms.hermiticity_points=5000",
               "--set", "checks.axioms.lorentz_points=2000",
               "--set", "checks.axioms.positivity_points=2000", "--set", "checks.axioms.boosts=3"]
FAST_HSC = ["--n", "2", "--family-size", "2", "--set", "checks.hsc.integrability_alphas=[0.2]",
            "--set", "checks.hsc.split_pairs=3", "--set", "checks.hsc.m_points=5000"]


def invoke(tmp_path, *args):
    return run([args[0], "--output-dir", str(tmp_path), "--quiet", *args[1:]])


def load(tmp_path, command):
    return json.loads((tmp_path / f"{command}.json").read_text())


def test_simulate_writes_ensemble_and_report(tmp_path):
    assert invoke(tmp_path, "simulate", *SMALL) == 0
    rep = load(tmp_path, "simulate")
    assert rep["passed"] and rep["tags"] == TAGS["simulate"]
    assert {"config_hash", "versions", "timestamp", "config"} <= set(rep)
    assert (tmp_path / "ensemble.bin").exists() and (tmp_path / "ensemble.bin.json").exists()


def test_compare_moments_pass_and_saved_ensemble(tmp_path):
    assert invoke(tmp_path, "simulate", *SMALL) == 0
    assert invoke(tmp_path, "compare-moments", *SMALL,
                  "--ensemble", str(tmp_path / "ensemble.bin")) == 0
    rows = (tmp_path / "compare-moments.csv").read_text().splitlines()
    assert len(rows) == 7


def test_compare_moments_wrong_oracle_mass_fails(tmp_path, capsys):
    code = invoke(tmp_path, "compare-moments", "--samples", "4000", "--set",
                  "lattice.extents=[8,8]", "--set", "checks.moments.reach=1",
                  "--oracle-mass", "1.5")
    assert code == 1
    detail = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert detail["passed"] is False and detail["failures"]


def test_ensemble_lattice_mismatch_is_usage_error(tmp_path):
    assert invoke(tmp_path, "simulate", *SMALL) == 0
    assert invoke(tmp_path, "compare-moments", "--set", "lattice.extents=[6,6]",
                  "--ensemble", str(tmp_path / "ensemble.bin")) == 2


def test_malformed_alpha_exit_two(tmp_path, capsys):
    assert invoke(tmp_path, "simulate", "--alpha", "0.7") == 2
    assert "(0, 1/2]" in capsys.readouterr().err


def test_unknown_key_and_bad_arguments(tmp_path):
    assert invoke(tmp_path, "simulate", "--set", "run.speed=3") == 2
    assert run(["no-such-command"]) == 2
    assert run(["check-hsc", "--n", "5"]) == 2
    assert invoke(tmp_path, "check-hsc", "--alpha", "0.5") == 2
    assert invoke(tmp_path, "check-hsc", "--family-size", "0") == 2


def test_eval_wightman(tmp_path):
    assert invoke(tmp_path, "eval-wightman", "--alpha", "0.5", "--set", "checks.wightman.n=2") == 0
    res = load(tmp_path, "eval-wightman")["result"]
    assert res["continuation"]["passed"] and res["log_slope"]["within_2pct"]
    assert invoke(tmp_path, "eval-wightman", "--set", "checks.wightman.n=3",
                  "--set", "checks.wightman.continuation_taus=[1.0]") == 0


def test_check_axioms_lists_controls(tmp_path):
    assert invoke(tmp_path, "check-axioms", *FAST_AXIOMS) == 0
    checks = load(tmp_path, "check-axioms")["result"]["checks"]
    names = [c["name"] for c in checks]
    for prefix in ("spectral-condition", "hermiticity", "poincare-invariance", "positivity"):
        assert any(n.startswith(prefix) for n in names)
    controls = [c for c in checks if not c["expect_pass"]]
    assert controls and all(c["ok"] and not c["report"]["passed"] for c in controls)


def test_check_hsc_small(tmp_path):
    assert invoke(tmp_path, "check-hsc", *FAST_HSC) == 0
    res = load(tmp_path, "check-hsc")["result"]
    assert {"bound_n2", "m1_nonnegative", "m2_nonnegative", "split"} <= set(res)


def test_report_summarises_directory(tmp_path):
    assert invoke(tmp_path, "simulate", *SMALL) == 0
    assert invoke(tmp_path, "report") == 0
    assert load(tmp_path, "report")["result"]["reports"][0]["command"] == "simulate"
    empty = tmp_path / "empty"
    assert run(["report", "--quiet", "--output-dir", str(empty)]) == 1


def _strip_timestamp(text):
    return re.sub(r'"timestamp": "[^"]*"', '"timestamp": ""', text)


@pytest.mark.parametrize("command,extra", [
    ("simulate", SMALL), ("compare-moments", SMALL),
    ("eval-wightman", ["--set", "checks.wightman.continuation_taus=[1.0]"]),
    ("check-axioms", FAST_AXIOMS), ("check-hsc", FAST_HSC),
])
def test_reports_reproduce_byte_for_byte(tmp_path, command, extra):
    outputs = []
    for _ in range(2):
        assert invoke(tmp_path, command, *extra) == 0
        files = sorted(p for p in tmp_path.iterdir() if p.is_file())
        outputs.append({p.name: p.read_bytes() for p in files})
    assert outputs[0].keys() == outputs[1].keys()
    for name in outputs[0]:
        a, b = outputs[0][name], outputs[1][name]
        if name.endswith(".json"):
            a, b = _strip_timestamp(a.decode()), _strip_timestamp(b.decode())
        assert a == b, name


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "levyqft", "--version"], capture_output=True,
                          text=True)
    assert proc.returncode == 0 and "levyqft" in proc.stdout
