import pytest

from prodnet.config import (
    apply_overrides,
    coerce,
    config_hash,
    default_config,
    load_config,
)


def test_load_with_comments_and_blanks(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(
        "# experiment settings\n"
        "\n"
        "seed = 7   # rng\n"
        "scenario_count=12\n"
        "tol = 1e-6\n"
        "report_residual = yes\n"
        "out_dir = results/run7\n"
    )
    cfg = load_config(path)
    assert cfg["seed"] == 7
    assert cfg["scenario_count"] == 12
    assert cfg["tol"] == 1e-6
    assert cfg["report_residual"] is True
    assert cfg["out_dir"] == "results/run7"
    # untouched keys keep their defaults
    assert cfg["mode"] == "glpf"


def test_unknown_key_rejected(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("serpent = 3\n")
    with pytest.raises(ValueError, match="unknown config key"):
        load_config(path)


def test_missing_equals_rejected(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("just a line\n")
    with pytest.raises(ValueError, match="expected key = value"):
        load_config(path)


def test_coercion_follows_default_type():
    assert coerce("seed", " 3 ") == 3
    assert isinstance(coerce("seed", "3"), int)
    assert coerce("epsilon", "0.5") == 0.5
    assert coerce("report_residual", "off") is False
    assert coerce("donor", "beta(2,8)") == "beta(2,8)"
    with pytest.raises(ValueError):
        coerce("seed", "seven")
    with pytest.raises(ValueError):
        coerce("report_residual", "maybe")
    with pytest.raises(KeyError):
        coerce("nope", "1")


def test_apply_overrides_skips_none():
    cfg = default_config()
    out = apply_overrides(cfg, {"seed": "5", "mode": None, "epsilon": 0.02})
    assert out["seed"] == 5
    assert out["mode"] == "glpf"
    assert out["epsilon"] == 0.02
    assert cfg["seed"] == 0  # original untouched


def test_hash_stable_and_seed_sensitive():
    a = default_config()
    b = default_config()
    assert config_hash(a) == config_hash(b)
    assert len(config_hash(a)) == 12
    b["seed"] = 1
    assert config_hash(a) != config_hash(b)


def test_hash_ignores_out_dir():
    a = default_config()
    b = default_config()
    b["out_dir"] = "elsewhere/deep"
    assert config_hash(a) == config_hash(b)
