"""Plasma-vacuum free-interface MHD simulator and verification harness."""

import json
from pathlib import Path

from ._mhd2d import Error, check_names, normalize_config
from . import _mhd2d

__all__ = ["Error", "check_names", "load_config", "run", "verify", "refine"]


def load_config(source):
    """Config as a dict, from a path (.toml or .json) or a dict; validated."""
    if isinstance(source, dict):
        return json.loads(normalize_config(json.dumps(source), "json"))
    path = Path(source)
    fmt = "toml" if path.suffix == ".toml" else "json"
    return json.loads(normalize_config(path.read_text(), fmt))


def _merge(config, overrides):
    merged = load_config(config if config is not None else {})
    for key, value in overrides.items():
        section, _, field = key.partition("__")
        if field:
            merged.setdefault(section, {})[field] = value
        else:
            merged[section] = value
    return json.dumps(merged)


def run(config=None, **overrides):
    """Run a scenario. Overrides use section__field keys, e.g. time__dt=1e-3."""
    result = _mhd2d.run(_merge(config, overrides))
    result["suite"] = json.loads(result.pop("suite_json"))
    return result


def verify(checks=None, seed=0):
    """Residual suite reports as a list of dicts."""
    return json.loads(_mhd2d.verify(checks, seed))


def refine(config=None, levels=3, **overrides):
    return json.loads(_mhd2d.refine(_merge(config, overrides), levels))
