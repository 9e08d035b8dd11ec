"""Pipeline configuration: a TOML file plus command-line overrides.

Relative paths in the file resolve against the file's own directory, so a
config can travel with its fixture bundle.  Every knob has a default; the
file and then the CLI flags override in that order.
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import AuditError
from .survey import CATEGORIES

ENV_CONFIG = "AUDIT_CONFIG"

PATH_KEYS = (
    "faces",
    "faces_dex",
    "faces_insightface",
    "nsfw",
    "predictions_resnet50",
    "predictions_nasnet_mobile",
    "embeddings",
    "embeddings_2d",
    "class_index",
    "vocabulary",
    "group_mapping",
    "instruments",
    "denylist",
    "dog_survey",
    "image_root",
    "survey_log",
    "static_dir",
    "out_dir",
)
WATCHLIST_PREFIX = "watchlist_"


@dataclass(frozen=True)
class AuditConfig:
    name: str = "dataset"
    paths: Mapping[str, Path] = field(default_factory=dict)
    watchlists: Mapping[str, Path] = field(default_factory=dict)
    gender_threshold: float = 0.5
    nsfw_positive: tuple[str, ...] = ("hentai", "porn", "sexy")
    ap_preference: float | str = "median"
    ap_damping: float = 0.5
    ap_max_iter: int = 200
    ap_convergence_iter: int = 15
    survey_quorum: int = 3
    survey_categories: tuple[str, ...] = CATEGORIES
    survey_host: str = "127.0.0.1"
    survey_port: int = 8765
    accuracy_top_n: int = 25
    threads: int = 0
    generated: str | None = None

    def path(self, key: str) -> Path | None:
        return self.paths.get(key)

    def require_path(self, key: str) -> Path:
        value = self.paths.get(key)
        if value is None:
            raise AuditError(f"paths.{key} is not configured")
        return value

    @property
    def out_dir(self) -> Path:
        return self.paths.get("out_dir", Path("."))

    @property
    def effective_threads(self) -> int:
        return self.threads if self.threads > 0 else (os.cpu_count() or 1)


def _as_tuple(value: Any, key: str) -> tuple[str, ...]:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ValueError(f"{key} must be an array of strings")
    return tuple(value)


def load_config(path: str | Path | None, overrides: Mapping[str, Any] | None = None) -> AuditConfig:
    """Build an AuditConfig from an optional TOML file and override pairs.

    ``path`` falls back to the AUDIT_CONFIG environment variable.  Unknown
    keys in the file are rejected so typos surface instead of silently
    using defaults.
    """
    if path is None:
        env = os.environ.get(ENV_CONFIG)
        path = Path(env) if env else None

    config = AuditConfig()
    if path is not None:
        base = Path(path).resolve().parent
        with open(path, "rb") as handle:
            raw = tomllib.load(handle)
        config = _apply_file(config, raw, base)
    if overrides:
        config = _apply_overrides(config, overrides)
    return config


def _apply_file(config: AuditConfig, raw: Mapping[str, Any], base: Path) -> AuditConfig:
    known_tables = {"paths", "gender", "nsfw", "ap", "survey", "accuracy", "card"}
    for key in raw:
        if key != "name" and key not in known_tables:
            raise ValueError(f"unknown config key {key!r}")

    fields: dict[str, Any] = {}
    if "name" in raw:
        fields["name"] = str(raw["name"])

    paths: dict[str, Path] = {}
    watchlists: dict[str, Path] = {}
    for key, value in raw.get("paths", {}).items():
        resolved = (base / str(value)).resolve() if not Path(str(value)).is_absolute() else Path(str(value))
        if key.startswith(WATCHLIST_PREFIX):
            watchlists[key[len(WATCHLIST_PREFIX):]] = resolved
        elif key in PATH_KEYS:
            paths[key] = resolved
        else:
            raise ValueError(f"unknown paths key {key!r}")
    if paths:
        fields["paths"] = paths
    if watchlists:
        fields["watchlists"] = watchlists

    gender = raw.get("gender", {})
    if "threshold" in gender:
        fields["gender_threshold"] = float(gender["threshold"])

    nsfw = raw.get("nsfw", {})
    if "positive" in nsfw:
        fields["nsfw_positive"] = _as_tuple(nsfw["positive"], "nsfw.positive")

    ap = raw.get("ap", {})
    if "preference" in ap:
        pref = ap["preference"]
        fields["ap_preference"] = pref if pref == "median" else float(pref)
    if "damping" in ap:
        fields["ap_damping"] = float(ap["damping"])
    if "max_iter" in ap:
        fields["ap_max_iter"] = int(ap["max_iter"])
    if "convergence_iter" in ap:
        fields["ap_convergence_iter"] = int(ap["convergence_iter"])

    survey = raw.get("survey", {})
    if "quorum" in survey:
        fields["survey_quorum"] = int(survey["quorum"])
    if "categories" in survey:
        fields["survey_categories"] = _as_tuple(survey["categories"], "survey.categories")
    if "host" in survey:
        fields["survey_host"] = str(survey["host"])
    if "port" in survey:
        fields["survey_port"] = int(survey["port"])

    accuracy = raw.get("accuracy", {})
    if "top_n" in accuracy:
        fields["accuracy_top_n"] = int(accuracy["top_n"])

    card = raw.get("card", {})
    if "generated" in card:
        fields["generated"] = str(card["generated"]) or None

    return replace(config, **fields)


def _apply_overrides(config: AuditConfig, overrides: Mapping[str, Any]) -> AuditConfig:
    fields: dict[str, Any] = {}
    paths = dict(config.paths)
    watchlists = dict(config.watchlists)
    for key, value in overrides.items():
        if value is None:
            continue
        if key in PATH_KEYS:
            paths[key] = Path(value).resolve()
        elif key.startswith(WATCHLIST_PREFIX):
            watchlists[key[len(WATCHLIST_PREFIX):]] = Path(value).resolve()
        else:
            fields[key] = value
    fields["paths"] = paths
    fields["watchlists"] = watchlists
    return replace(config, **fields)
