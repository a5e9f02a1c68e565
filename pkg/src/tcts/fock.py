"""Brute-force two-mode Fock-space construction of the state.

The doubled system is an ``N x N`` amplitude tensor ``c[n, n_tilde]``.  The
state is built from the vacuum by applying, in order, the thermal
transformation at ``theta1``, the physical displacement by ``alpha``, the tilde
displacement by ``conj(alpha)`` and the thermal transformation at ``theta2``.
Unitaries act on the tensor through a scaled truncated Taylor series; no
operator is ever exponentiated densely.

The thermal transformation is ``exp(-theta (a a~ - a^dag a~^dag))``, the
two-mode Bogoliubov transformation whose vacuum image has amplitudes
``tanh(theta)^n / cosh(theta)`` on the diagonal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from .closed_form import MomentsReport, number_distribution, number_moments
from .core import OscillatorConfig, StateSpec, ValidationError
from .special import momentum_state_basis, number_state_basis

__all__ = [
    "CutoffTooSmallError",
    "TwoModeState",
    "ReducedDensity",
    "ladder_matrices",
    "vacuum",
    "expm_action",
    "apply_displacement",
    "apply_thermal",
    "build_state",
    "evolve",
    "reduced_density",
    "oracle_observables",
    "oracle_position_density",
    "oracle_density_element",
    "oracle_momentum_density",
    "choose_cutoff",
]

DEFAULT_EPSILON = 1e-10
DEFAULT_CUTOFF = 64
MIN_CUTOFF = 8
MAX_CUTOFF = 256


class CutoffTooSmallError(ValidationError):
    """Probability leaked into the top Fock levels beyond the tolerance."""

    def __init__(self, cutoff: int, tail_mass: float, suggested: int):
        self.cutoff = cutoff
        self.tail_mass = tail_mass
        self.suggested = suggested
        if math.isnan(tail_mass):
            detail = f"below the minimum of {MIN_CUTOFF} levels"
        else:
            detail = f"tail mass {tail_mass:.3g}"
        super().__init__("cutoff", f"cutoff {cutoff} too small ({detail}); try cutoff >= {suggested}")


@dataclass(frozen=True)
class TwoModeState:
    cutoff: int
    amplitudes: np.ndarray
    tail_mass: float = 0.0

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)


@dataclass(frozen=True)
class ReducedDensity:
    cutoff: int
    matrix: np.ndarray

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)


def ladder_matrices(N: int) -> Tuple[sp.csr_matrix, sp.csr_matrix]:
    """Truncated annihilation and creation operators on levels 0..N-1."""
    if N < 2:
        raise ValidationError("cutoff", f"need at least 2 levels, got {N}")
    a = sp.diags(np.sqrt(np.arange(1, N, dtype=float)), 1, shape=(N, N), format="csr")
    return a, a.conj().T.tocsr()


def vacuum(N: int) -> TwoModeState:
    c = np.zeros((N, N), dtype=complex)
    c[0, 0] = 1.0
    return TwoModeState(N, c, 0.0)


def tail_mass(c: np.ndarray) -> float:
    """Weight on the top two levels of either mode."""
    p = np.abs(c) ** 2
    return float(p[-2:, :].sum() + p[:-2, -2:].sum())


# Ladder actions on the amplitude tensor.  Axis 0 is the physical mode and
# axis 1 the tilde mode.

def _lower(c: np.ndarray, axis: int, sq: np.ndarray) -> np.ndarray:
    out = np.zeros_like(c)
    if axis == 0:
        out[:-1] = sq[:, None] * c[1:]
    else:
        out[:, :-1] = c[:, 1:] * sq[None, :]
    return out


def _raise(c: np.ndarray, axis: int, sq: np.ndarray) -> np.ndarray:
    out = np.zeros_like(c)
    if axis == 0:
        out[1:] = sq[:, None] * c[:-1]
    else:
        out[:, 1:] = c[:, :-1] * sq[None, :]
    return out


def expm_action(generator: Callable[[np.ndarray], np.ndarray], c: np.ndarray, norm_bound: float,
                tol: float = 1e-16, max_terms: int = 60) -> np.ndarray:
    """exp(G) c for a linear map G with operator norm at most ``norm_bound``.

    The exponent is split into ``s`` steps with ``||G|| / s <= 1`` and each step
    summed as a Taylor series until the term norm falls below ``tol`` relative
    to the running sum.
    """
    steps = max(1, int(math.ceil(norm_bound)))
    out = c.copy()
    for _ in range(steps):
        term = out
        acc = out.copy()
        for j in range(1, max_terms + 1):
            term = generator(term) / (steps * j)
            acc += term
            if np.linalg.norm(term) <= tol * np.linalg.norm(acc):
                break
        else:
            raise ArithmeticError("Taylor series did not converge")
        out = acc
    return out


def _check_tail(c: np.ndarray, epsilon: float) -> float:
    tm = tail_mass(c)
    if tm >= epsilon:
        N = c.shape[0]
        raise CutoffTooSmallError(N, tm, N + max(16, N // 4))
    return tm


def apply_displacement(amplitude: complex, state: TwoModeState, mode: str = "physical",
                       epsilon: float = DEFAULT_EPSILON) -> TwoModeState:
    """Displace one mode: ``exp(alpha a^dag - conj(alpha) a)`` for ``mode="physical"``,
    ``exp(conj(alpha) a~^dag - alpha a~)`` for ``mode="tilde"``.
    """
    if mode not in ("physical", "tilde"):
        raise ValueError(f"mode must be 'physical' or 'tilde', got {mode!r}")
    amplitude = complex(amplitude)
    if amplitude == 0:
        return state
    if mode == "tilde":
        amplitude = amplitude.conjugate()
    N = state.cutoff
    sq = np.sqrt(np.arange(1, N, dtype=float))
    axis = 0 if mode == "physical" else 1
    conj_amp = amplitude.conjugate()

    def gen(v):
        return amplitude * _raise(v, axis, sq) - conj_amp * _lower(v, axis, sq)

    c = expm_action(gen, state.amplitudes, 2.0 * abs(amplitude) * math.sqrt(N - 1))
    tm = _check_tail(c, epsilon)
    return TwoModeState(N, c, max(state.tail_mass, tm))


def apply_thermal(theta: float, state: TwoModeState, epsilon: float = DEFAULT_EPSILON) -> TwoModeState:
    """Apply the two-mode Bogoliubov transformation ``exp(-theta (a a~ - a^dag a~^dag))``."""
    if theta < 0:
        raise ValidationError("theta", f"must be non-negative, got {theta!r}")
    if theta == 0:
        return state
    N = state.cutoff
    sq = np.sqrt(np.arange(1, N, dtype=float))

    def gen(v):
        up = _raise(_raise(v, 0, sq), 1, sq)
        down = _lower(_lower(v, 0, sq), 1, sq)
        return theta * (up - down)

    c = expm_action(gen, state.amplitudes, 2.0 * theta * (N - 1))
    tm = _check_tail(c, epsilon)
    return TwoModeState(N, c, max(state.tail_mass, tm))


def build_state(spec: StateSpec, N: int = DEFAULT_CUTOFF, epsilon: float = DEFAULT_EPSILON) -> TwoModeState:
    """Prepare the state from the two-mode vacuum (time zero)."""
    if N < MIN_CUTOFF:
        raise CutoffTooSmallError(N, float("nan"), max(MIN_CUTOFF, choose_cutoff(spec, epsilon)))
    if N > MAX_CUTOFF:
        raise ValidationError("cutoff", f"at most {MAX_CUTOFF} levels are supported, got {N}")
    try:
        state = vacuum(N)
        state = apply_thermal(spec.theta1, state, epsilon)
        state = apply_displacement(spec.alpha, state, "physical", epsilon)
        state = apply_displacement(spec.alpha, state, "tilde", epsilon)
        state = apply_thermal(spec.theta2, state, epsilon)
    except CutoffTooSmallError as exc:
        raise CutoffTooSmallError(N, exc.tail_mass, max(exc.suggested, _heuristic_cutoff(spec))) from None
    return state


def evolve(state: TwoModeState, t: float, osc: OscillatorConfig = OscillatorConfig()) -> TwoModeState:
    """Apply ``exp(-i (H - H~) t / hbar)``, diagonal with phases ``exp(-i w t (n - n~))``."""
    if t == 0:
        return state
    n = np.arange(state.cutoff)
    # reduce the winding mod 2 pi first so that full periods are exact
    phase = np.mod(osc.omega * t * (n[:, None] - n[None, :]), 2.0 * math.pi)
    rot = np.exp(-1j * phase)
    return replace(state, amplitudes=state.amplitudes * rot)


def reduced_density(state: TwoModeState) -> ReducedDensity:
    """Trace out the tilde mode: ``rho[m, n] = sum_k c[m, k] conj(c[n, k])``."""
    c = state.amplitudes
    return ReducedDensity(state.cutoff, c @ c.conj().T)


def oracle_observables(rho: ReducedDensity, osc: OscillatorConfig = OscillatorConfig(),
                       t: float = 0.0) -> MomentsReport:
    """Moments from traces of ``rho`` against ladder-operator expressions."""
    N = rho.cutoff
    a, ad = ladder_matrices(N)
    a, ad = a.toarray(), ad.toarray()
    lx = math.sqrt(osc.hbar / (2.0 * osc.mass * osc.omega))
    lp = math.sqrt(osc.mass * osc.hbar * osc.omega / 2.0)
    X = lx * (a + ad)
    P = 1j * lp * (ad - a)
    n = np.arange(N, dtype=float)
    r = rho.matrix

    def expect(op):
        return np.trace(r @ op).real

    x_mean, p_mean = expect(X), expect(P)
    x_var = expect(X @ X) - x_mean**2
    p_var = expect(P @ P) - p_mean**2
    diag = np.diag(r).real
    n_mean = float(diag @ n)
    n_var = float(diag @ n**2) - n_mean**2
    return MomentsReport(
        t=float(t),
        x_mean=float(x_mean),
        p_mean=float(p_mean),
        x_var=float(x_var),
        p_var=float(p_var),
        n_mean=n_mean,
        n_var=n_var,
        uncertainty_product=float(math.sqrt(x_var * p_var)),
        purity=float(np.vdot(r, r).real),
    )


def _sandwich(r: np.ndarray, f_left: np.ndarray, f_right: np.ndarray) -> np.ndarray:
    # sum_mn r[m, n] f_left[m] conj(f_right[n]), vectorised over trailing axes
    return np.einsum("mn,m...,n...->...", r, f_left, f_right.conj())


def oracle_density_element(rho: ReducedDensity, x_prime, x, osc: OscillatorConfig = OscillatorConfig()):
    """<x|rho|x'> reconstructed from the Fock matrix."""
    xp, x = np.broadcast_arrays(np.asarray(x_prime, dtype=float), np.asarray(x, dtype=float))
    out = _sandwich(rho.matrix, number_state_basis(rho.cutoff, x, osc), number_state_basis(rho.cutoff, xp, osc))
    return out if np.ndim(out) else complex(out)


def oracle_position_density(rho: ReducedDensity, x, osc: OscillatorConfig = OscillatorConfig()):
    f = number_state_basis(rho.cutoff, np.asarray(x, dtype=float), osc)
    out = _sandwich(rho.matrix, f, f).real
    return out if np.ndim(out) else float(out)


def oracle_momentum_density(rho: ReducedDensity, p, osc: OscillatorConfig = OscillatorConfig()):
    f = momentum_state_basis(rho.cutoff, np.asarray(p, dtype=float), osc)
    out = _sandwich(rho.matrix, f, f).real
    return out if np.ndim(out) else float(out)


def _heuristic_cutoff(spec: StateSpec) -> int:
    mu, var = number_moments(spec)
    return int(math.ceil(mu + 10.0 * math.sqrt(var) + 10.0))


def choose_cutoff(spec: StateSpec, epsilon: float = DEFAULT_EPSILON) -> int:
    """Per-mode cutoff, starting from ``ceil(mu + 10 sigma + 10)`` clamped to [16, 256].

    The start is raised until the predicted number-distribution mass on the
    top two levels and beyond is below ``epsilon / 2`` (the tilde mode has the
    same marginal).  :func:`build_state` still measures the actual tail.
    """
    if not 0 < epsilon < 1:
        raise ValidationError("epsilon", f"must lie in (0, 1), got {epsilon!r}")
    N = max(16, _heuristic_cutoff(spec))
    if N > MAX_CUTOFF:
        raise ValidationError("cutoff", f"parameters need cutoff {N} > {MAX_CUTOFF}; unsupported")
    mu, var = number_moments(spec)
    top = int(math.ceil(mu + 60.0 * math.sqrt(var) + 200.0))
    p = number_distribution(np.arange(max(top, N + 1)), spec)
    while N <= MAX_CUTOFF and p[N - 2:].sum() >= 0.5 * epsilon:
        N += 1
    if N > MAX_CUTOFF:
        raise ValidationError("cutoff", f"parameters need cutoff > {MAX_CUTOFF}; unsupported")
    return N


def build_state_auto(spec: StateSpec, epsilon: float = DEFAULT_EPSILON,
                     N: Optional[int] = None) -> TwoModeState:
    """:func:`build_state` starting at :func:`choose_cutoff`, growing until the tail fits."""
    N = N or choose_cutoff(spec, epsilon)
    while True:
        try:
            return build_state(spec, N, epsilon)
        except CutoffTooSmallError as exc:
            if N >= MAX_CUTOFF:
                raise
            N = min(MAX_CUTOFF, max(exc.suggested, N + 16))
