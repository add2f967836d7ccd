"""Physical parameters and configuration handling.

Every rate and frequency in the package is expressed in units of the first
mechanical frequency omega_m (so ``omega_m1 = 1`` by convention), and time is
measured in tau = 1/omega_m.  hbar = 1 throughout; the thermal bath enters
only through the mean phonon occupancy ``n_thermal`` -- there is no
temperature-to-phonon conversion here.

Configuration files are YAML documents with a ``schema_version`` field and a
``params`` mapping.  Unknown keys are rejected so that a typo in a physics
parameter cannot silently fall back to a default.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import yaml

CONFIG_SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Raised for malformed or unknown configuration content."""


@dataclass(frozen=True)
class SystemParams:
    """All physical constants of the coupled cavity pair, in units of omega_m.

    Field defaults are the parameter set used throughout the study:
    opposite unit detunings, kappa = 0.1, asymmetric mechanical damping
    (gamma_m1/gamma_m2 = 100), g0 = 1e-4 and J = 0.03.  The drive amplitude
    defaults to zero; scenarios set it explicitly.
    """

    omega_m1: float = 1.0
    omega_m2: float = 1.008
    delta1: float = -1.0
    delta2: float = 1.0
    kappa: float = 0.1
    gamma_m1: float = 1e-2
    gamma_m2: float = 1e-4
    g0: float = 1e-4
    j_coupling: float = 0.03
    drive: float = 0.0
    n_thermal: float = 0.0

    def replace(self, **changes) -> "SystemParams":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def field_names(cls) -> tuple:
        return tuple(f.name for f in dataclasses.fields(cls))

    @classmethod
    def from_dict(cls, data: dict) -> "SystemParams":
        if not isinstance(data, dict):
            raise ConfigError(f"params must be a mapping, got {type(data).__name__}")
        known = set(cls.field_names())
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown parameter keys: {', '.join(unknown)}")
        values = {}
        for key, val in data.items():
            try:
                values[key] = float(val)
            except (TypeError, ValueError):
                raise ConfigError(f"parameter {key!r} is not a number: {val!r}") from None
        return cls(**values)


#: Parameter set of the reference study (drive varies per scenario).
PAPER_DEFAULTS = SystemParams()


@dataclass
class ValidationReport:
    errors: list
    warnings: list

    @property
    def ok(self) -> bool:
        return not self.errors


def validate(params: SystemParams) -> ValidationReport:
    """Check hard sign constraints and the soft smallness assumptions.

    Violated hard constraints become errors; the perturbative assumptions
    (J and the frequency mismatch small against omega_m1) only warn, since
    they bound where the two-mode effective picture is trustworthy, not
    where the simulation itself is defined.
    """
    errors = []
    warnings = []

    for name in params.field_names():
        value = getattr(params, name)
        if not _is_finite(value):
            errors.append(f"{name} must be finite, got {value!r}")
    if errors:
        return ValidationReport(errors, warnings)

    if params.kappa <= 0:
        errors.append("kappa must be positive")
    if params.gamma_m1 <= 0:
        errors.append("gamma_m1 must be positive")
    if params.gamma_m2 <= 0:
        errors.append("gamma_m2 must be positive")
    if params.g0 < 0:
        errors.append("g0 must be non-negative")
    if params.drive < 0:
        errors.append("drive must be non-negative")
    if params.n_thermal < 0:
        errors.append("n_thermal must be non-negative")
    if params.omega_m1 <= 0:
        errors.append("omega_m1 must be positive")
    if params.omega_m2 <= 0:
        errors.append("omega_m2 must be positive")

    if not errors:
        if params.j_coupling > 0.1 * params.omega_m1:
            warnings.append(
                "J not small relative to omega_m1 "
                f"(j_coupling={params.j_coupling:g} > 0.1*omega_m1)"
            )
        if abs(params.omega_m1 - params.omega_m2) > 0.05 * params.omega_m1:
            warnings.append(
                "mechanical frequency mismatch exceeds 5% of omega_m1; "
                "the near-degenerate two-mode approximation degrades"
            )
    return ValidationReport(errors, warnings)


def _is_finite(x) -> bool:
    try:
        x = float(x)
    except (TypeError, ValueError):
        return False
    return x == x and abs(x) != float("inf")


def serialize_config(params: SystemParams) -> str:
    """Render a params config document; floats round-trip exactly."""
    doc = {"schema_version": CONFIG_SCHEMA_VERSION, "params": params.to_dict()}
    return yaml.safe_dump(doc, sort_keys=True)


def parse_config(text: str) -> SystemParams:
    """Parse a config document produced by :func:`serialize_config`.

    Unknown top-level keys or parameter keys raise :class:`ConfigError`.
    """
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a mapping")
    unknown = sorted(set(doc) - {"schema_version", "params"})
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    if "schema_version" not in doc:
        raise ConfigError("missing schema_version")
    if doc["schema_version"] != CONFIG_SCHEMA_VERSION:
        raise ConfigError(
            f"unsupported schema_version {doc['schema_version']!r}, "
            f"expected {CONFIG_SCHEMA_VERSION}"
        )
    return SystemParams.from_dict(doc.get("params") or {})


def apply_overrides(params: SystemParams, overrides) -> SystemParams:
    """Apply ``key=value`` override strings (CLI ``--param``) after parsing."""
    known = set(params.field_names())
    changes = {}
    for item in overrides:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key = key.strip()
        if key not in known:
            raise ConfigError(f"unknown parameter key: {key}")
        try:
            changes[key] = float(value)
        except ValueError:
            raise ConfigError(f"override {key!r} has non-numeric value {value!r}") from None
    return params.replace(**changes)
