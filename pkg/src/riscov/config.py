"""Scenario files.

A scenario is a flat TOML document of dotted keys::

    radio.power_w = 2.0
    radio.noise_dbm = -96
    panel.M = 25
    site.D_h = 100
    solver.K = 50

Every key is optional; omitted keys take the reference link-budget values.
Noise is given in dBm and the sensitivity, margin and threshold in dB; they
are converted to linear units here and nowhere else.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .channel import RadioConfig, RisPanel
from .coverage import SolverConfig
from .geometry import SiteGeometry

DEFAULTS: dict[str, dict[str, Any]] = {
    "radio": {
        "power_w": 2.0,
        "noise_dbm": -96.0,
        "wavelength_m": 0.1,
        "gain": 1.0,
        "pathloss_exponent": 2.0,
        "sensitivity_db": 8.0,
        "margin_db": 28.0,
        "threshold_db": 36.0,
    },
    "panel": {"M": 25, "N": 25, "s_M": 0.04, "s_N": 0.04},
    "site": {
        "H_B": 35.0,
        "H_U": 1.5,
        "H_R": 2.0,
        "D_h": 100.0,
        "psi": math.pi / 2,
        "incidence_mode": "3d",
    },
    "solver": {"K": 50, "tol_root": 1e-9, "d_max": 1000.0, "n_phi": 360},
}

_INT_KEYS = {("panel", "M"), ("panel", "N"), ("solver", "K"), ("solver", "n_phi")}
_STR_KEYS = {("site", "incidence_mode")}


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    radio: RadioConfig
    panel: RisPanel
    site: SiteGeometry
    solver: SolverConfig
    values: dict[str, dict[str, Any]]

    def echo(self) -> dict[str, dict[str, Any]]:
        return {section: dict(keys) for section, keys in self.values.items()}

    def with_values(self, **dotted: Any) -> "Scenario":
        """Copy with overrides given as ``section__key=value``."""
        items = [(k.replace("__", "."), v) for k, v in dotted.items()]
        return build_scenario(_merge(self.values, items))


def _merge(base: dict[str, dict[str, Any]], items: Iterable[tuple[str, Any]]) -> dict[str, dict[str, Any]]:
    out = {section: dict(keys) for section, keys in base.items()}
    for dotted, value in items:
        section, _, key = dotted.partition(".")
        if section not in DEFAULTS or key not in DEFAULTS[section]:
            raise ScenarioError(f"unknown scenario key {dotted!r}")
        out[section][key] = value
    return out


def _coerce(section: str, key: str, value: Any) -> Any:
    if (section, key) in _STR_KEYS:
        if not isinstance(value, str):
            raise ScenarioError(f"{section}.{key} must be a string, got {value!r}")
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{section}.{key} must be a number, got {value!r}")
    if (section, key) in _INT_KEYS:
        if int(value) != value:
            raise ScenarioError(f"{section}.{key} must be an integer, got {value!r}")
        return int(value)
    return float(value)


def _flatten(doc: dict[str, Any]) -> list[tuple[str, Any]]:
    items = []
    for section, keys in doc.items():
        if not isinstance(keys, dict):
            raise ScenarioError(f"top-level key {section!r} is not a section")
        for key, value in keys.items():
            items.append((f"{section}.{key}", value))
    return items


def build_scenario(values: dict[str, dict[str, Any]], explicit_threshold: bool = True) -> Scenario:
    values = {s: {k: _coerce(s, k, v) for k, v in keys.items()} for s, keys in values.items()}
    r = values["radio"]
    try:
        radio = RadioConfig.from_db(
            power_w=r["power_w"],
            noise_dbm=r["noise_dbm"],
            wavelength_m=r["wavelength_m"],
            gain=r["gain"],
            pathloss_exponent=r["pathloss_exponent"],
            sensitivity_db=r["sensitivity_db"],
            margin_db=r["margin_db"],
            threshold_db=r["threshold_db"] if explicit_threshold else None,
        )
        panel = RisPanel(**values["panel"])
        site = SiteGeometry(**values["site"])
        solver = SolverConfig(**values["solver"])
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc
    panel.check_subwavelength(radio.wavelength)
    return Scenario(radio, panel, site, solver, values)


def load_scenario(
    path: str | Path | None = None,
    overrides: Iterable[str] = (),
    degrees: bool = False,
) -> Scenario:
    """Read a scenario file (or none), apply ``key=value`` overrides, validate.

    With ``degrees`` the orientation angle is read in degrees.
    """
    items: list[tuple[str, Any]] = []
    if path is not None:
        try:
            with open(path, "rb") as fh:
                doc = tomllib.load(fh)
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
        items.extend(_flatten(doc))
    for text in overrides:
        key, sep, raw = text.partition("=")
        if not sep:
            raise ScenarioError(f"override {text!r} is not of the form key=value")
        items.append((key.strip(), _parse_value(raw.strip())))

    given = {k for k, _ in items}
    values = {
        s: {k: _coerce(s, k, v) for k, v in keys.items()} for s, keys in _merge(DEFAULTS, items).items()
    }
    # a threshold not stated explicitly follows sensitivity + margin
    explicit = "radio.threshold_db" in given
    if not explicit:
        values["radio"]["threshold_db"] = values["radio"]["sensitivity_db"] + values["radio"]["margin_db"]
    if degrees and "site.psi" in given:
        values["site"]["psi"] = math.radians(values["site"]["psi"])
    return build_scenario(values, explicit_threshold=explicit)


def _parse_value(raw: str) -> Any:
    try:
        return tomllib.loads(f"v = {raw}")["v"]
    except tomllib.TOMLDecodeError:
        return raw
