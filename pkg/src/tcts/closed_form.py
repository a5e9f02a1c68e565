"""Closed-form observables of the thermalized coherent thermal state.

The factor groupings follow the analytic results directly: ``cosh(th) +
sinh(th)`` and ``cosh(th) - sinh(th)`` are kept as written rather than folded
into exponentials, and ``A = cos(wt) + i sin(wt)`` carries the time
dependence.  Every function takes a validated :class:`~tcts.core.StateSpec`.

The off-diagonal width of the position density matrix is ``cosh(2 Theta)``.
The alternative ``coth(2 Theta)`` coefficient is kept selectable through
``coherence_width="coth"`` for reference; it does not reduce to the diagonal
density and disagrees with the Fock-space construction.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Tuple

import numpy as np
from scipy.special import gammaln

from .core import OscillatorConfig, StateSpec
from .special import log_laguerre_neg

__all__ = [
    "PhaseFactor",
    "MomentsReport",
    "phase_factor",
    "coherent_wavefunction",
    "two_mode_wavefunction",
    "density_matrix_element",
    "position_density",
    "position_moments",
    "momentum_density",
    "momentum_moments",
    "number_distribution",
    "number_moments",
    "purity",
    "moments_report",
]

POISSON_THRESHOLD = 1e-8
IMAG_RESIDUE_TOL = 1e-13


@dataclass(frozen=True)
class PhaseFactor:
    t: float
    A: complex

    def __post_init__(self):
        if abs(abs(self.A) - 1.0) > 1e-14:
            raise ValueError(f"|A| must be 1, got {abs(self.A)!r}")


@dataclass(frozen=True)
class MomentsReport:
    t: float
    x_mean: float
    p_mean: float
    x_var: float
    p_var: float
    n_mean: float
    n_var: float
    uncertainty_product: float
    purity: float

    def as_dict(self) -> dict:
        return asdict(self)


def phase_factor(t: float, osc: OscillatorConfig) -> PhaseFactor:
    wt = osc.omega * t
    return PhaseFactor(t=t, A=complex(math.cos(wt), math.sin(wt)))


def _k(osc: OscillatorConfig) -> float:
    return osc.mass * osc.omega / osc.hbar


def _rotated(t: float, spec: StateSpec) -> Tuple[complex, complex]:
    A = phase_factor(t, spec.osc).A
    return spec.alpha / A, spec.alpha.conjugate() / A.conjugate()


def coherent_wavefunction(x, alpha: complex, osc: OscillatorConfig = OscillatorConfig()):
    """Position wavefunction of the coherent state |alpha> = D(alpha)|0>."""
    x = np.asarray(x, dtype=float)
    k = _k(osc)
    a1, a2 = alpha.real, alpha.imag
    out = ((k / math.pi) ** 0.25 * np.exp(-1j * a1 * a2)
           * np.exp(-0.5 * k * (x - math.sqrt(2.0 / k) * a1) ** 2 + 1j * math.sqrt(2.0 * k) * a2 * x))
    return out if out.ndim else complex(out)


def two_mode_wavefunction(x, x_tilde, t: float, spec: StateSpec):
    """Joint wavefunction <x_tilde, x | state(t)> of physical and tilde modes."""
    x = np.asarray(x, dtype=float)
    xt = np.asarray(x_tilde, dtype=float)
    osc = spec.osc
    k = _k(osc)
    th1, Th = spec.theta1, spec.big_theta
    alpha = spec.alpha
    A = phase_factor(t, osc).A
    a_A, ac_Ac = _rotated(t, spec)
    shrink1 = math.cosh(th1) - math.sinh(th1)
    C, S = math.cosh(Th), math.sinh(Th)
    root = math.sqrt(2.0 / k)
    pref = math.sqrt(k / math.pi) * np.exp(
        shrink1**2 * ((alpha**2 / A + alpha.conjugate() ** 2 / A.conjugate()) * math.cos(osc.omega * t)
                      - 2.0 * alpha.real**2)
    )
    first = x * C - xt * S - root * a_A * shrink1
    second = xt * C - x * S - root * ac_Ac * shrink1
    out = pref * np.exp(-0.5 * k * (first**2 + second**2))
    return out if out.ndim else complex(out)


def density_matrix_element(x_prime, x, t: float, spec: StateSpec, coherence_width: str = "cosh"):
    """Reduced position density matrix rho(x', x) = <x|rho|x'>.

    Hermitian: ``rho(x', x) == conj(rho(x, x'))``.
    """
    xp = np.asarray(x_prime, dtype=float)
    x = np.asarray(x, dtype=float)
    k = _k(spec.osc)
    th2, Th = spec.theta2, spec.big_theta
    c2 = math.cosh(2.0 * Th)
    if coherence_width == "cosh":
        width = c2
    elif coherence_width == "coth":
        width = math.cosh(2.0 * Th) / math.sinh(2.0 * Th) if Th > 0 else math.inf
    else:
        raise ValueError(f"coherence_width must be 'cosh' or 'coth', got {coherence_width!r}")
    a_A, ac_Ac = _rotated(t, spec)
    grow2 = math.cosh(th2) + math.sinh(th2)
    root = math.sqrt(2.0 / k)
    diff = a_A - ac_Ac
    pref = math.sqrt(k / math.pi) * math.sqrt(1.0 / c2) * np.exp(grow2**2 * diff**2 / (2.0 * c2))
    plus = x + xp - root * grow2 * (a_A + ac_Ac)
    minus = x - xp - root * grow2 / c2 * diff
    out = pref * np.exp(-0.25 * k / c2 * plus**2 - 0.25 * k * width * minus**2)
    return out if out.ndim else complex(out)


def position_density(x, t: float, spec: StateSpec):
    """Gaussian position probability density at time ``t``."""
    x = np.asarray(x, dtype=float)
    k = _k(spec.osc)
    c2 = math.cosh(2.0 * spec.big_theta)
    grow2 = math.cosh(spec.theta2) + math.sinh(spec.theta2)
    a_A, ac_Ac = _rotated(t, spec)
    center = (math.sqrt(1.0 / (2.0 * k)) * grow2 * (a_A + ac_Ac)).real
    out = math.sqrt(k / (math.pi * c2)) * np.exp(-k / c2 * (x - center) ** 2)
    return out if out.ndim else float(out)


def position_moments(t: float, spec: StateSpec) -> Tuple[float, float]:
    """``(<x>, (Delta x)^2)``; the variance does not depend on ``t``."""
    osc = spec.osc
    scale = osc.hbar / (2.0 * osc.mass * osc.omega)
    grow2 = math.cosh(spec.theta2) + math.sinh(spec.theta2)
    a_A, ac_Ac = _rotated(t, spec)
    mean = math.sqrt(scale) * grow2 * (a_A + ac_Ac)
    return mean.real, scale * math.cosh(2.0 * spec.big_theta)


def _momentum_shift(t: float, spec: StateSpec) -> float:
    osc = spec.osc
    grow2 = math.cosh(spec.theta2) + math.sinh(spec.theta2)
    a_A, ac_Ac = _rotated(t, spec)
    mean = -1j * math.sqrt(osc.mass * osc.hbar * osc.omega / 2.0) * grow2 * (a_A - ac_Ac)
    if abs(mean.imag) > IMAG_RESIDUE_TOL:
        raise ArithmeticError(f"momentum mean has imaginary residue {mean.imag!r}")
    return mean.real


def momentum_density(p, t: float, spec: StateSpec):
    """Gaussian momentum probability density at time ``t``."""
    p = np.asarray(p, dtype=float)
    osc = spec.osc
    s2 = osc.mass * osc.hbar * osc.omega * math.cosh(2.0 * spec.big_theta)
    # p + i sqrt(m hbar w / 2) e^th2 (a/A - a*/A*) is p - <p>, which is real
    out = math.sqrt(1.0 / (math.pi * s2)) * np.exp(-((p - _momentum_shift(t, spec)) ** 2) / s2)
    return out if out.ndim else float(out)


def momentum_moments(t: float, spec: StateSpec) -> Tuple[float, float]:
    """``(<p>, (Delta p)^2)``; the variance does not depend on ``t``."""
    osc = spec.osc
    var = 0.5 * osc.mass * osc.hbar * osc.omega * math.cosh(2.0 * spec.big_theta)
    return _momentum_shift(t, spec), var


def number_distribution(n, spec: StateSpec):
    """Photon-number probabilities rho_nn (time independent).

    Evaluated in the log domain.  Below ``Theta = 1e-8`` the Poisson law of the
    displaced vacuum is used instead, since the general form divides by
    ``sinh(2 Theta)``.
    """
    ns = np.atleast_1d(np.asarray(n))
    if ns.size and (ns.min() < 0 or not np.issubdtype(ns.dtype, np.integer)):
        raise ValueError("n must be non-negative integers")
    ns = ns.astype(int)
    th2, Th = spec.theta2, spec.big_theta
    grow2 = math.cosh(th2) + math.sinh(th2)
    amp2 = abs(spec.alpha) ** 2
    if Th < POISSON_THRESHOLD:
        mu = grow2**2 * amp2
        if mu == 0:
            out = (ns == 0).astype(float)
        else:
            out = np.exp(-mu + ns * math.log(mu) - gammaln(ns + 1))
    else:
        tanh = math.tanh(Th)
        arg = -4.0 * (grow2 / math.sinh(2.0 * Th)) ** 2 * amp2
        log_p = (-2.0 * math.log(math.cosh(Th)) + 2.0 * ns * math.log(tanh)
                 - grow2**2 * (1.0 - tanh**2) * amp2 + log_laguerre_neg(ns, arg))
        out = np.exp(log_p)
    return out if np.ndim(n) else float(out[0])


def number_moments(spec: StateSpec) -> Tuple[float, float]:
    """``(<n>, (Delta n)^2)``."""
    c2 = math.cosh(2.0 * spec.big_theta)
    grow2 = math.cosh(spec.theta2) + math.sinh(spec.theta2)
    amp2 = abs(spec.alpha) ** 2
    mean = 0.5 * c2 + grow2**2 * amp2 - 0.5
    var = grow2**2 * c2 * amp2 + 0.25 * (c2**2 - 1.0)
    return mean, var


def purity(spec: StateSpec) -> float:
    """Tr rho^2 of the physical mode, 1 / cosh(2 Theta)."""
    return 1.0 / math.cosh(2.0 * spec.big_theta)


def moments_report(t: float, spec: StateSpec) -> MomentsReport:
    x_mean, x_var = position_moments(t, spec)
    p_mean, p_var = momentum_moments(t, spec)
    n_mean, n_var = number_moments(spec)
    return MomentsReport(
        t=float(t),
        x_mean=x_mean,
        p_mean=p_mean,
        x_var=x_var,
        p_var=p_var,
        n_mean=n_mean,
        n_var=n_var,
        uncertainty_product=0.5 * spec.osc.hbar * math.cosh(2.0 * spec.big_theta),
        purity=purity(spec),
    )
