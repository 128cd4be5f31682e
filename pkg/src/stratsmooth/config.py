"""Run configuration: a small validated JSON schema, no expression language."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

SCHEMA_VERSION = 1

DEFAULT_COUNTS = {
    "closeness": 10000,
    "tangency": 100,
    "lipschitz": 10000,
    "certify": 120,
    "constancy": 100,
    "tube": 150,
}


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


@dataclass
class RunConfig:
    problem: str
    field_spec: object
    epsilon_spec: object
    target_order: int = 1
    pre_smooth: str = "auto"
    freeze_width: Optional[float] = None
    support_box: Optional[tuple] = None
    bessel_delta: float = 1.0
    seed: int = 0
    box: Optional[tuple] = None
    box_halfwidth: float = 2.0
    counts: dict = field(default_factory=lambda: dict(DEFAULT_COUNTS))
    checks: Optional[list[str]] = None
    report_path: str = "report.json"
    samples_path: str = "samples.csv"
    raw: dict = field(default_factory=dict)

    def resolved_box(self, dim: int) -> tuple[np.ndarray, np.ndarray]:
        if self.box is not None:
            lo, hi = np.asarray(self.box[0], float), np.asarray(self.box[1], float)
            if lo.shape != (dim,) or hi.shape != (dim,):
                raise ConfigError(f"sampling box must have {dim} coordinates")
            if np.any(lo >= hi):
                raise ConfigError("sampling box must satisfy lo < hi componentwise")
            return lo, hi
        hw = float(self.box_halfwidth)
        return -hw * np.ones(dim), hw * np.ones(dim)


_KNOWN_CHECKS = {"closeness", "tangency", "lipschitz", "constancy", "observable"}
_KNOWN_TOP = {"schema_version", "problem", "field", "epsilon", "options", "sampling", "checks", "outputs"}


def parse_config(source) -> RunConfig:
    """Parse and validate a config from a path, JSON string, or dict."""
    if isinstance(source, dict):
        doc = source
    else:
        text = source
        try:
            if "{" not in str(source):
                with open(source, "r", encoding="utf-8") as fh:
                    text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {source!r}: {exc}") from None
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(doc) - _KNOWN_TOP
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version}; this build reads {SCHEMA_VERSION}")
    if "problem" not in doc:
        raise ConfigError("config requires a 'problem' catalog id")
    if "field" not in doc:
        raise ConfigError("config requires a 'field' spec")

    options = doc.get("options", {})
    sampling = doc.get("sampling", {})
    outputs = doc.get("outputs", {})
    counts = dict(DEFAULT_COUNTS)
    counts.update(sampling.get("counts", {}))
    checks = doc.get("checks")
    if checks is not None:
        bad = set(checks) - _KNOWN_CHECKS
        if bad:
            raise ConfigError(f"unknown checks: {sorted(bad)}; known: {sorted(_KNOWN_CHECKS)}")

    box = None
    if "box" in sampling:
        try:
            box = (sampling["box"]["lo"], sampling["box"]["hi"])
        except (KeyError, TypeError):
            raise ConfigError("sampling.box must carry 'lo' and 'hi' arrays") from None

    support_box = options.get("support_box")
    if support_box is not None:
        try:
            support_box = (np.asarray(support_box["lo"], float), np.asarray(support_box["hi"], float))
        except (KeyError, TypeError):
            raise ConfigError("options.support_box must carry 'lo' and 'hi' arrays") from None

    pre_smooth = options.get("pre_smooth", "auto")
    if pre_smooth not in ("auto", "always", "never"):
        raise ConfigError("options.pre_smooth must be one of auto/always/never")

    return RunConfig(
        problem=doc["problem"],
        field_spec=doc["field"],
        epsilon_spec=doc.get("epsilon", 0.05),
        target_order=int(options.get("target_order", 1)),
        pre_smooth=pre_smooth,
        freeze_width=options.get("freeze_width"),
        support_box=support_box,
        bessel_delta=float(options.get("bessel_delta", 1.0)),
        seed=int(sampling.get("seed", 0)),
        box=box,
        box_halfwidth=float(sampling.get("box_halfwidth", 2.0)),
        counts=counts,
        checks=checks,
        report_path=outputs.get("report", "report.json"),
        samples_path=outputs.get("samples", "samples.csv"),
        raw=doc,
    )
