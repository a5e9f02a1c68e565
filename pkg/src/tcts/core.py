"""Oscillator units, thermal angles and the validated state specification.

A state is described by a complex displacement ``alpha`` and two thermal
(Bogoliubov) angles: ``theta1`` acts before the displacement, ``theta2`` after
it.  Temperatures are accepted as an alternative input but the angle is the
canonical internal representation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional

__all__ = [
    "ValidationError",
    "OscillatorConfig",
    "ThermalChannel",
    "StateSpec",
    "theta_from_temperature",
    "temperature_from_theta",
    "mean_occupancy",
    "validate_spec",
    "make_spec",
    "spec_to_dict",
    "spec_from_dict",
]

UNITS = ("natural", "custom")


class ValidationError(ValueError):
    """Invalid input; ``field`` names the offending parameter."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


def _finite(value: float) -> bool:
    try:
        return math.isfinite(value)
    except TypeError:
        return False


@dataclass(frozen=True)
class OscillatorConfig:
    """Mass, angular frequency and hbar of the oscillator.

    ``k_b`` only enters temperature conversions.
    """

    mass: float = 1.0
    omega: float = 1.0
    hbar: float = 1.0
    units: str = "natural"
    k_b: float = 1.0

    def __post_init__(self):
        for name in ("mass", "omega", "hbar", "k_b"):
            value = getattr(self, name)
            if not _finite(value) or value <= 0:
                raise ValidationError(name, f"must be positive and finite, got {value!r}")
        if self.units not in UNITS:
            raise ValidationError("units", f"must be one of {UNITS}, got {self.units!r}")
        if self.units == "natural" and not (
            self.mass == 1.0 and self.omega == 1.0 and self.hbar == 1.0 and self.k_b == 1.0
        ):
            raise ValidationError("units", "natural units require mass = omega = hbar = k_b = 1")

    @classmethod
    def natural(cls) -> "OscillatorConfig":
        return cls()

    @classmethod
    def custom(cls, mass: float, omega: float, hbar: float, k_b: float = 1.0) -> "OscillatorConfig":
        return cls(mass=mass, omega=omega, hbar=hbar, units="custom", k_b=k_b)

    @property
    def length_scale(self) -> float:
        """sqrt(hbar / (m omega)), the ground-state length."""
        return math.sqrt(self.hbar / (self.mass * self.omega))

    @property
    def momentum_scale(self) -> float:
        """sqrt(m hbar omega)."""
        return math.sqrt(self.mass * self.hbar * self.omega)


def theta_from_temperature(T: float, osc: OscillatorConfig) -> float:
    """Bogoliubov angle for temperature ``T``: ``tanh(theta) = exp(-hbar omega / (2 k_b T))``.

    ``T = 0`` maps to ``theta = 0`` (the zero-temperature limit).
    """
    if not _finite(T) or T < 0:
        raise ValidationError("temperature", f"must be non-negative and finite, got {T!r}")
    if T == 0:
        return 0.0
    half_x = osc.hbar * osc.omega / (2.0 * osc.k_b * T)
    e = math.exp(-half_x)
    if e == 0.0:
        return 0.0
    if e < 0.5:
        return math.atanh(e)
    # near e = 1, take 1 - e from expm1 instead of rounding e first
    return 0.5 * (math.log1p(e) - math.log(-math.expm1(-half_x)))


def temperature_from_theta(theta: float, osc: OscillatorConfig) -> float:
    """Inverse of :func:`theta_from_temperature`."""
    if not _finite(theta) or theta < 0:
        raise ValidationError("theta", f"must be non-negative and finite, got {theta!r}")
    if theta == 0:
        return 0.0
    if theta < 0.5:
        log_tanh = math.log(math.tanh(theta))
    else:
        # log(tanh theta) without cancellation for large theta
        q = math.exp(-2.0 * theta)
        log_tanh = math.log1p(-q) - math.log1p(q)
    return osc.hbar * osc.omega / (osc.k_b * (-2.0 * log_tanh))


def mean_occupancy(theta: float) -> float:
    """Mean thermal occupancy sinh^2(theta) = 1 / (exp(beta hbar omega) - 1)."""
    if not _finite(theta) or theta < 0:
        raise ValidationError("theta", f"must be non-negative and finite, got {theta!r}")
    return math.sinh(theta) ** 2


@dataclass(frozen=True)
class ThermalChannel:
    """One thermal stage, stored as its Bogoliubov angle.

    ``temperature`` is kept only as provenance when the channel was built from
    one.
    """

    theta: float = 0.0
    temperature: Optional[float] = None

    @classmethod
    def from_temperature(cls, T: float, osc: OscillatorConfig) -> "ThermalChannel":
        return cls(theta=theta_from_temperature(T, osc), temperature=float(T))

    def check(self, name: str, index: str = "") -> None:
        if not _finite(self.theta) or self.theta < 0:
            raise ValidationError(name, f"theta{index} must be non-negative and finite, got {self.theta!r}")
        if self.temperature is not None:
            if not _finite(self.temperature) or self.temperature < 0:
                raise ValidationError(name, f"temp{index} must be non-negative, got {self.temperature!r}")
            if self.temperature == 0 and self.theta != 0:
                raise ValidationError(name, "temperature = 0 must coincide with theta = 0")

    @property
    def occupancy(self) -> float:
        return mean_occupancy(self.theta)


@dataclass(frozen=True)
class StateSpec:
    """Displacement ``alpha`` between thermal stages ``channel1`` and ``channel2``."""

    alpha: complex = 0j
    channel1: ThermalChannel = field(default_factory=ThermalChannel)
    channel2: ThermalChannel = field(default_factory=ThermalChannel)
    osc: OscillatorConfig = field(default_factory=OscillatorConfig)

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        validate_spec(self)

    @property
    def theta1(self) -> float:
        return self.channel1.theta

    @property
    def theta2(self) -> float:
        return self.channel2.theta

    @property
    def big_theta(self) -> float:
        """Combined angle theta1 + theta2 governing every variance."""
        return self.channel1.theta + self.channel2.theta

    def replace(self, **changes: Any) -> "StateSpec":
        """Copy with ``alpha``, ``theta1``, ``theta2`` or ``osc`` replaced."""
        alpha = changes.pop("alpha", self.alpha)
        osc = changes.pop("osc", self.osc)
        ch1 = ThermalChannel(changes.pop("theta1")) if "theta1" in changes else self.channel1
        ch2 = ThermalChannel(changes.pop("theta2")) if "theta2" in changes else self.channel2
        if changes:
            raise TypeError(f"unknown fields {sorted(changes)}")
        return StateSpec(alpha, ch1, ch2, osc)


def validate_spec(spec: StateSpec) -> StateSpec:
    """Check every invariant of ``spec`` and return it unchanged.

    Errors are :class:`ValidationError` instances whose ``field`` is one of
    ``alpha``, ``channel1``, ``channel2`` or ``osc``.
    """
    alpha = complex(spec.alpha)
    if not (_finite(alpha.real) and _finite(alpha.imag)):
        raise ValidationError("alpha", f"must be finite, got {spec.alpha!r}")
    spec.channel1.check("channel1", "1")
    spec.channel2.check("channel2", "2")
    if not isinstance(spec.osc, OscillatorConfig):
        raise ValidationError("osc", "must be an OscillatorConfig")
    return spec


def make_spec(
    alpha: complex = 0j,
    theta1: Optional[float] = None,
    theta2: Optional[float] = None,
    *,
    temp1: Optional[float] = None,
    temp2: Optional[float] = None,
    osc: Optional[OscillatorConfig] = None,
) -> StateSpec:
    """Build a :class:`StateSpec` from angles or temperatures.

    Giving both an angle and a temperature for the same channel is an error.
    """
    osc = osc or OscillatorConfig()
    channels = []
    for name, theta, temp in (("channel1", theta1, temp1), ("channel2", theta2, temp2)):
        if theta is not None and temp is not None:
            raise ValidationError(name, "give either theta or temperature, not both")
        if temp is not None:
            try:
                channels.append(ThermalChannel.from_temperature(temp, osc))
            except ValidationError:
                raise ValidationError(name, f"temp{name[-1]} must be non-negative and finite, got {temp!r}") from None
        else:
            channels.append(ThermalChannel(0.0 if theta is None else float(theta)))
    return StateSpec(alpha, channels[0], channels[1], osc)


def spec_to_dict(spec: StateSpec) -> dict:
    return {
        "alpha_re": spec.alpha.real,
        "alpha_im": spec.alpha.imag,
        "theta1": spec.theta1,
        "theta2": spec.theta2,
        "mass": spec.osc.mass,
        "omega": spec.osc.omega,
        "hbar": spec.osc.hbar,
        "units": spec.osc.units,
    }


_KNOWN_KEYS = {"alpha_re", "alpha_im", "theta1", "theta2", "temp1", "temp2",
               "mass", "omega", "hbar", "units", "k_b"}


def _number(data: Mapping[str, Any], key: str, default: Optional[float] = None) -> Optional[float]:
    if key not in data or data[key] is None:
        return default
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(key, f"must be a number, got {value!r}")
    return float(value)


def osc_from_dict(data: Mapping[str, Any]) -> OscillatorConfig:
    mass = _number(data, "mass", 1.0)
    omega = _number(data, "omega", 1.0)
    hbar = _number(data, "hbar", 1.0)
    k_b = _number(data, "k_b", 1.0)
    units = data.get("units")
    if units is None:
        units = "natural" if (mass, omega, hbar, k_b) == (1.0, 1.0, 1.0, 1.0) else "custom"
    return OscillatorConfig(mass=mass, omega=omega, hbar=hbar, units=units, k_b=k_b)


def spec_from_dict(data: Mapping[str, Any]) -> StateSpec:
    """Parse the JSON object form of a state (see :func:`spec_to_dict`)."""
    unknown = set(data) - _KNOWN_KEYS
    if unknown:
        raise ValidationError(sorted(unknown)[0], "unknown key")
    osc = osc_from_dict(data)
    alpha = complex(_number(data, "alpha_re", 0.0), _number(data, "alpha_im", 0.0))
    for i in (1, 2):
        if data.get(f"theta{i}") is not None and data.get(f"temp{i}") is not None:
            raise ValidationError(f"theta{i}", f"theta{i} and temp{i} are mutually exclusive")
    return make_spec(
        alpha,
        _number(data, "theta1"),
        _number(data, "theta2"),
        temp1=_number(data, "temp1"),
        temp2=_number(data, "temp2"),
        osc=osc,
    )
