"""Flat key=value experiment configuration.

One option per line, `#` starts a comment, unknown keys are rejected.
Values are coerced to the type of the default.  A short content hash of
the effective configuration is embedded in every output file so a report
can be traced back to the exact settings that produced it.
"""

from __future__ import annotations

import hashlib

DEFAULTS: dict = {
    # input files; empty string means "not provided"
    "edges": "",
    "meta": "",
    "employment": "",
    "shock": "",
    "essentiality": "",
    "sampling_meta": "",
    "prev_edges": "",
    "prev_meta": "",
    # synthetic network (used when no edges file is given)
    "n_firms": 1000,
    "n_industries": 20,
    "topology": "powerlaw",
    "out_exponent": 2.2,
    "min_out_degree": 1,
    "weight_mu": 0.0,
    "weight_sigma": 1.0,
    "industry_alpha": 3.0,
    # base shock construction: random | file | employment
    "base_shock": "random",
    "base_beta_a": 2.0,
    "base_beta_b": 8.0,
    "impute_draws": 11,
    # propagation
    "mode": "glpf",
    "tol": 1e-9,
    "max_iter": 100000,
    # scenario sampling
    "epsilon": 0.01,
    "scenario_count": 100,
    "seed": 0,
    "donor": "empirical",
    "max_rescale_iters": 1000,
    "max_scenario_retries": 5,
    "lock_rule": "clamped",
    # reporting
    "bins": 30,
    "report_residual": False,
    "out_dir": "out",
}

_TRUE = {"true", "1", "yes", "on"}
_FALSE = {"false", "0", "no", "off"}


def coerce(key: str, text: str):
    """Parse a raw string into the type the default for `key` has."""
    if key not in DEFAULTS:
        raise KeyError(f"unknown config key {key!r}")
    default = DEFAULTS[key]
    text = text.strip()
    if isinstance(default, bool):
        low = text.lower()
        if low in _TRUE:
            return True
        if low in _FALSE:
            return False
        raise ValueError(f"{key}: expected a boolean, got {text!r}")
    if isinstance(default, int):
        return int(text)
    if isinstance(default, float):
        return float(text)
    return text


def default_config() -> dict:
    return dict(DEFAULTS)


def load_config(path) -> dict:
    """Read a key=value file on top of the defaults."""
    cfg = default_config()
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, _, value = line.partition("=")
            key = key.strip()
            try:
                cfg[key] = coerce(key, value)
            except KeyError:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}") from None
    return cfg


def apply_overrides(cfg: dict, overrides: dict) -> dict:
    """Overlay already-typed or string overrides (e.g. CLI flags)."""
    out = dict(cfg)
    for key, value in overrides.items():
        if value is None:
            continue
        out[key] = coerce(key, value) if isinstance(value, str) else value
    return out


def _canon(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


# Keys that only say where outputs land, not what they contain.
_UNHASHED = {"out_dir"}


def config_hash(cfg: dict) -> str:
    """Short stable digest of the result-determining configuration."""
    lines = "".join(f"{k}={_canon(cfg[k])}\n" for k in sorted(cfg) if k not in _UNHASHED)
    return hashlib.sha256(lines.encode()).hexdigest()[:12]
