"""Run configuration: one human-editable YAML file, validated strictly.

Unknown keys anywhere in the tree are errors (fail fast).  The resolved
semantic config (law, observable, command section, seed, tolerances)
hashes to a stable 12-hex id embedded in every output; the execution
parameters (threads, output directory) are deliberately outside the
hash and outside all file contents so rethreaded reruns stay
byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import yaml

from .errors import ConfigError
from .laws import StepLaw, make_step_law
from .observables import (Observable, make_constant, make_heaviside, make_ocean,
                          make_ocean_multidim, make_periodic, make_quasiperiodic,
                          make_scenery, make_table_observable)
from .reports import config_hash

_TOP_KEYS = {"command", "seed", "law", "observable", "tolerances", "threads", "out",
             "simulate", "exact", "ocean_demo", "beta_fit", "llt_report", "chain_sweep"}
_EXEC_KEYS = {"threads", "out"}

_SECTION_KEYS = {
    "simulate": {"trials", "checkpoints", "x0", "analysis"},
    "exact": {"horizon", "n_grid", "x0", "pairs", "oracle_max", "scan"},
    "ocean_demo": {"blocks", "trace_blocks", "event_n_list", "walk_seed"},
    "beta_fit": {"gamma", "L_list", "z_samples", "box_a", "box_b", "f_bar"},
    "llt_report": {"n_list"},
    "chain_sweep": {"grid", "explicit", "delta", "mc_every", "mc_trials"},
}
_ANALYSIS_KEYS = {"arcsine", "growth_statistic", "quantile", "weak_lln_deltas", "slope_band"}
_CHECKPOINT_KEYS = {"start", "stop", "ratio"}
_LAW_KEYS = {"preset", "d", "hold", "v", "beta", "k_max", "alpha", "sites", "probs"}
_OBS_KEYS = {"kind", "d", "period", "table", "profile", "rotations", "omega", "seed",
             "values", "alpha", "b1", "a_rule", "base", "sites", "csv", "default", "c"}
_TOL_KEYS = {"kernel_trunc", "cube_budget"}


def _check_keys(mapping: dict, allowed: set, where: str) -> None:
    if not isinstance(mapping, dict):
        raise ConfigError(f"{where} must be a mapping")
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {where}; allowed: {sorted(allowed)}")


@dataclass
class RunConfig:
    command: str
    semantic: dict          # the hashed part
    threads: Optional[int]
    out: Optional[str]

    @property
    def seed(self) -> int:
        return int(self.semantic["seed"])

    @property
    def hash(self) -> str:
        return config_hash(self.semantic)

    def section(self) -> dict:
        return self.semantic.get(self.command, {})

    def tolerances(self) -> dict:
        return self.semantic.get("tolerances", {})

    def law(self) -> StepLaw:
        spec = self.semantic.get("law")
        if spec is None:
            raise ConfigError("config needs a `law` section for this command")
        params = {k: v for k, v in spec.items() if k != "preset"}
        return make_step_law(spec["preset"], params)

    def observable(self, law: Optional[StepLaw] = None) -> Observable:
        spec = self.semantic.get("observable")
        if spec is None:
            raise ConfigError("config needs an `observable` section for this command")
        return build_observable(spec, default_d=law.d if law is not None else None)

    def meta(self) -> dict:
        return {"config": self.hash, "seed": self.seed}

    def to_json(self) -> str:
        return json.dumps(self.semantic, sort_keys=True)

    @staticmethod
    def from_json(command: str, blob: str, threads=None, out=None) -> "RunConfig":
        return RunConfig(command, json.loads(blob), threads, out)


def build_observable(spec: dict, default_d: Optional[int] = None) -> Observable:
    _check_keys(spec, _OBS_KEYS, "observable")
    kind = spec.get("kind")
    d = int(spec.get("d", default_d or 1))
    if kind == "heaviside":
        return make_heaviside()
    if kind == "constant":
        return make_constant(d, float(spec.get("c", 0.0)))
    if kind == "periodic":
        return make_periodic(d, spec["period"], spec["table"])
    if kind == "quasiperiodic":
        return make_quasiperiodic(d, spec.get("profile", "cos"),
                                  spec.get("rotations", "golden"), spec.get("omega"))
    if kind == "scenery":
        return make_scenery(d, int(spec["seed"]), tuple(spec.get("values", (-1.0, 1.0))))
    if kind == "ocean":
        obs, _ = make_ocean(float(spec.get("alpha", 2.0)), int(spec.get("b1", 16)),
                            spec.get("a_rule", "log2"))
        return obs
    if kind == "ocean_multidim":
        base = spec.get("base", {})
        inner, _ = make_ocean(float(base.get("alpha", 2.0)), int(base.get("b1", 16)),
                              base.get("a_rule", "log2"))
        return make_ocean_multidim(d, inner)
    if kind == "table":
        if "csv" in spec:
            sites, values = _read_table_csv(spec["csv"], d)
        else:
            sites, values = spec["sites"], spec["values"]
        return make_table_observable(d, sites, values, float(spec.get("default", 0.0)))
    raise ConfigError(f"unknown observable kind {kind!r}")


def _read_table_csv(path, d: int):
    """CSV of (site coordinates..., value) rows; a non-numeric first row is a header."""
    sites, values = [], []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) != d + 1:
            raise ConfigError(f"table CSV row has {len(parts)} fields, expected {d + 1}: {line!r}")
        try:
            row = [float(p) for p in parts]
        except ValueError:
            continue  # header row
        sites.append([int(c) for c in row[:d]])
        values.append(row[d])
    if not sites:
        raise ConfigError(f"table CSV {path} has no data rows")
    return sites, values


def _validate(tree: dict) -> None:
    _check_keys(tree, _TOP_KEYS, "config")
    if "law" in tree:
        _check_keys(tree["law"], _LAW_KEYS, "law")
        if "preset" not in tree["law"]:
            raise ConfigError("law section needs a `preset`")
    if "observable" in tree:
        _check_keys(tree["observable"], _OBS_KEYS, "observable")
    if "tolerances" in tree:
        _check_keys(tree["tolerances"], _TOL_KEYS, "tolerances")
    for name, keys in _SECTION_KEYS.items():
        if name in tree:
            _check_keys(tree[name], keys, name)
    sim = tree.get("simulate", {})
    if "analysis" in sim:
        _check_keys(sim["analysis"], _ANALYSIS_KEYS, "simulate.analysis")
    if isinstance(sim.get("checkpoints"), dict):
        _check_keys(sim["checkpoints"], _CHECKPOINT_KEYS, "simulate.checkpoints")


def load_config(path, command: str, seed_override=None, threads=None, out=None) -> RunConfig:
    """Parse + validate the YAML file; CLI overrides fold into the semantic dict."""
    try:
        tree = yaml.safe_load(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except yaml.YAMLError as e:
        raise ConfigError(f"config parse error in {path}: {e}") from None
    if not isinstance(tree, dict):
        raise ConfigError("config root must be a mapping")
    _validate(tree)
    declared = tree.get("command")
    if declared is not None and declared != command:
        raise ConfigError(f"config declares command {declared!r} but {command!r} was invoked")
    if seed_override is not None:
        tree["seed"] = int(seed_override)
    if "seed" not in tree:
        raise ConfigError("config needs a master `seed` (or pass --seed)")
    cfg_threads = tree.pop("threads", None)
    cfg_out = tree.pop("out", None)
    tree.pop("command", None)
    semantic = json.loads(json.dumps(tree))  # normalize to plain JSON types
    return RunConfig(command, semantic,
                     threads if threads is not None else cfg_threads,
                     out if out is not None else cfg_out)
