import pytest

from levyqft.config import CONFIG_ENV, DEFAULTS, ConfigError, load_config, parse_override


def test_defaults_are_valid():
    cfg = load_config(env={})
    assert cfg == DEFAULTS
    assert cfg is not DEFAULTS


def test_yaml_file_and_overrides(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("model:\n  alpha: 0.5\n  law: {jump_rate: 2.0, jumps: {1.0: 1.0}}\n"
                    "run: {samples: 100}\n")
    cfg = load_config(path, [parse_override("run.seed=7"), parse_override("model.mass=2")])
    assert cfg["model"]["alpha"] == 0.5
    assert cfg["model"]["law"]["jumps"] == {1.0: 1.0}
    assert cfg["model"]["law"]["gaussian_var"] == 1.0
    assert cfg["run"] == {"samples": 100, "seed": 7, "threads": 1}
    assert cfg["model"]["mass"] == 2


def test_environment_variable_supplies_path(tmp_path):
    path = tmp_path / "env.yaml"
    path.write_text("run: {seed: 42}\n")
    assert load_config(env={CONFIG_ENV: str(path)})["run"]["seed"] == 42


def test_alpha_outside_model_range():
    with pytest.raises(ConfigError, match=r"\(0, 1/2\]"):
        load_config(overrides=[(["model", "alpha"], 0.7)], env={})


@pytest.mark.parametrize("override", [
    "model.colour=3", "run.samples=0", "run.samples=1.5", "model.mass=-1", "lattice.extents=[8]",
    "model.law.sigma=1", "checks.hsc.n=[4]", "output.formats=[xml]", "model.alpha=true",
    "checks.moments.orders=[9]", "model=3",
])
def test_invalid_values_rejected(override):
    with pytest.raises(ConfigError):
        load_config(overrides=[parse_override(override)], env={})


def test_lattice_length_follows_s():
    cfg = load_config(overrides=[parse_override("model.s=2"),
                                 parse_override("lattice.extents=[8,8,8]"),
                                 parse_override("lattice.spacings=[1,1,1]")], env={})
    assert cfg["model"]["s"] == 2


def test_bad_files(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("model: [unclosed\n")
    with pytest.raises(ConfigError):
        load_config(bad, env={})
    scalar = tmp_path / "scalar.yaml"
    scalar.write_text("3\n")
    with pytest.raises(ConfigError):
        load_config(scalar, env={})
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml", env={})


def test_override_syntax():
    assert parse_override("a.b=[1, 2]") == (["a", "b"], [1, 2])
    with pytest.raises(ConfigError):
        parse_override("no-equals-sign")
