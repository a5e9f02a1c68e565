"""Thermalized coherent thermal states of a harmonic oscillator.

Closed-form observables (:mod:`tcts.closed_form`), an independent two-mode
Fock-space construction (:mod:`tcts.fock`) and a harness comparing the two
(:mod:`tcts.consistency`).
"""

from .core import (
    OscillatorConfig,
    StateSpec,
    ThermalChannel,
    ValidationError,
    make_spec,
    mean_occupancy,
    spec_from_dict,
    spec_to_dict,
    temperature_from_theta,
    theta_from_temperature,
    validate_spec,
)
from .closed_form import MomentsReport, moments_report

__version__ = "0.1.0"
