"""Hermite and Laguerre polynomials, number-state wavefunctions and quadrature.

Everything here is vectorised over the evaluation point.  Large orders are
handled in the log domain as ``(sign, log|value|)`` pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np
from scipy.special import gammaln, logsumexp, roots_hermite

from .core import OscillatorConfig, ValidationError

__all__ = [
    "hermite_phys",
    "hermite_phys_log",
    "laguerre",
    "laguerre_series",
    "log_laguerre_neg",
    "number_state_wavefunction",
    "number_state_basis",
    "momentum_state_basis",
    "QuadratureRule",
    "gauss_hermite_rule",
    "legendre_rule",
]

LOG_DOMAIN_THRESHOLD = 30
MAX_QUADRATURE_ORDER = 512
_RESCALE = 1e150
_TINY_WEIGHT = 1e-280


def hermite_phys(n: int, y):
    """Physicists' Hermite polynomial H_n(y) by the three-term recurrence."""
    if n < 0:
        raise ValueError("n must be non-negative")
    y = np.asarray(y, dtype=float)
    h_prev = np.ones_like(y)
    if n == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    h = 2.0 * y
    for k in range(1, n):
        h_prev, h = h, 2.0 * y * h - 2.0 * k * h_prev
    return h if h.ndim else float(h)


def hermite_phys_log(n: int, y) -> Tuple[np.ndarray, np.ndarray]:
    """H_n(y) as ``(sign, log|H_n(y)|)``; safe for n up to several thousand.

    The recurrence runs on rescaled values and the scale is accumulated in
    ``log``.  Exact zeros give ``sign = 0`` and ``log = -inf``.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    y = np.atleast_1d(np.asarray(y, dtype=float))
    log_scale = np.zeros_like(y)
    h_prev = np.ones_like(y)
    h = 2.0 * y if n > 0 else h_prev
    for k in range(1, n):
        h_prev, h = h, 2.0 * y * h - 2.0 * k * h_prev
        big = np.abs(h) > _RESCALE
        if big.any():
            s = np.where(big, np.abs(h), 1.0)
            h = h / s
            h_prev = h_prev / s
            log_scale += np.log(s)
    sign = np.sign(h)
    with np.errstate(divide="ignore"):
        logabs = np.log(np.abs(h)) + log_scale
    return sign, logabs


def laguerre(n: int, y):
    """Laguerre polynomial L_n(y) by (k+1) L_{k+1} = (2k+1-y) L_k - k L_{k-1}."""
    if n < 0:
        raise ValueError("n must be non-negative")
    y = np.asarray(y, dtype=float)
    l_prev = np.ones_like(y)
    if n == 0:
        return l_prev if l_prev.ndim else float(l_prev)
    l = 1.0 - y
    for k in range(1, n):
        l_prev, l = l, ((2 * k + 1 - y) * l - k * l_prev) / (k + 1)
    return l if l.ndim else float(l)


def laguerre_series(n: int, y: float) -> float:
    """Direct sum of C(n, k) (-y)^k / k!.  Safe without cancellation for y <= 0."""
    total = 0.0
    term_pow = 1.0
    for k in range(n + 1):
        total += math.comb(n, k) * term_pow / math.factorial(k)
        term_pow *= -y
    return total


def log_laguerre_neg(n, y):
    """log L_n(y) for y <= 0, where every series term is non-negative.

    ``n`` may be an integer array; ``y`` is a scalar.
    """
    if y > 0:
        raise ValueError("log_laguerre_neg needs y <= 0")
    ns = np.atleast_1d(np.asarray(n, dtype=int))
    if y == 0:
        out = np.zeros(ns.shape)
    else:
        log_u = math.log(-y)
        out = np.empty(ns.shape)
        for i, m in enumerate(ns):
            k = np.arange(m + 1)
            terms = gammaln(m + 1) - gammaln(k + 1) - gammaln(m - k + 1) - gammaln(k + 1) + k * log_u
            out[i] = logsumexp(terms)
    return out if np.ndim(n) else float(out[0])


def number_state_wavefunction(n: int, x, osc: OscillatorConfig = OscillatorConfig()):
    """Position wavefunction <x|n> of the n-th oscillator eigenstate (real)."""
    x = np.asarray(x, dtype=float)
    k = osc.mass * osc.omega / osc.hbar
    xi = math.sqrt(k) * x
    if n <= LOG_DOMAIN_THRESHOLD:
        norm = (k / math.pi) ** 0.25 / math.sqrt(2.0**n * math.factorial(n))
        out = norm * np.exp(-0.5 * xi * xi) * hermite_phys(n, xi)
    else:
        sign, logh = hermite_phys_log(n, xi)
        log_norm = 0.25 * math.log(k / math.pi) - 0.5 * (n * math.log(2.0) + gammaln(n + 1))
        out = sign * np.exp(log_norm - 0.5 * xi * xi + logh)
        out = out.reshape(x.shape)
    return out if np.ndim(out) else float(out)


def _hermite_functions(N: int, xi: np.ndarray) -> np.ndarray:
    # normalised recurrence; no 2^n n! growth
    out = np.empty((N,) + xi.shape)
    out[0] = math.pi**-0.25 * np.exp(-0.5 * xi * xi)
    if N > 1:
        out[1] = math.sqrt(2.0) * xi * out[0]
    for n in range(1, N - 1):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * xi * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def number_state_basis(N: int, x, osc: OscillatorConfig = OscillatorConfig()) -> np.ndarray:
    """Rows ``<x|n>`` for n = 0..N-1; shape ``(N,) + x.shape``."""
    x = np.asarray(x, dtype=float)
    k = osc.mass * osc.omega / osc.hbar
    return k**0.25 * _hermite_functions(N, math.sqrt(k) * x)


def momentum_state_basis(N: int, p, osc: OscillatorConfig = OscillatorConfig()) -> np.ndarray:
    """Rows ``<p|n> = (-i)^n (pi m hbar omega)^(-1/4) ... H_n(p / sqrt(m hbar omega))``."""
    p = np.asarray(p, dtype=float)
    s = osc.momentum_scale
    phases = (-1j) ** np.arange(N)
    real = _hermite_functions(N, p / s) / math.sqrt(s)
    return phases.reshape((N,) + (1,) * p.ndim) * real


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Hermite rule for integrals against exp(-y^2).

    ``log_weights`` is authoritative; ``weights`` underflows to zero for the
    outermost nodes once the order exceeds a few hundred.
    """

    nodes: np.ndarray
    weights: np.ndarray
    order: int
    log_weights: np.ndarray

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        """Sum of w_i f(y_i), i.e. the integral of exp(-y^2) f(y)."""
        return float(np.sum(self.weights * f(self.nodes)))

    def for_gaussian(self, mean: float, std: float) -> Tuple[np.ndarray, np.ndarray]:
        """Nodes and weights for expectations under N(mean, std^2)."""
        return mean + math.sqrt(2.0) * std * self.nodes, self.weights / math.sqrt(math.pi)

    def unweighted(self, center: float, scale: float) -> Tuple[np.ndarray, np.ndarray]:
        """Nodes and weights for a plain integral of f(x) dx.

        Accurate when f decays like a Gaussian of width ``scale`` about ``center``.
        """
        x = center + math.sqrt(2.0) * scale * self.nodes
        w = math.sqrt(2.0) * scale * np.exp(self.log_weights + self.nodes**2)
        return x, w


@lru_cache(maxsize=32)
def gauss_hermite_rule(order: int) -> QuadratureRule:
    """Nodes and weights for the integral of exp(-y^2) f(y)."""
    if not isinstance(order, (int, np.integer)) or not 1 <= order <= MAX_QUADRATURE_ORDER:
        raise ValidationError("order", f"must be an integer in [1, {MAX_QUADRATURE_ORDER}], got {order!r}")
    order = int(order)
    nodes, w = roots_hermite(order)
    idx = np.argsort(nodes)
    nodes, w = nodes[idx], w[idx]
    log_w = np.log(np.where(w > _TINY_WEIGHT, w, 1.0))
    tiny = w <= _TINY_WEIGHT
    if tiny.any():
        # w_i = 2^(n-1) n! sqrt(pi) / (n^2 H_{n-1}(y_i)^2)
        _, log_h = hermite_phys_log(order - 1, nodes[tiny])
        log_w[tiny] = ((order - 1) * math.log(2.0) + gammaln(order + 1) + 0.5 * math.log(math.pi)
                       - 2.0 * math.log(order) - 2.0 * log_h)
    nodes.setflags(write=False)
    log_w.setflags(write=False)
    weights = np.exp(log_w)
    weights.setflags(write=False)
    return QuadratureRule(nodes=nodes, weights=weights, order=order, log_weights=log_w)


def legendre_rule(a: float, b: float, order: int = 200) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [a, b]."""
    y, w = np.polynomial.legendre.leggauss(order)
    half = 0.5 * (b - a)
    return 0.5 * (a + b) + half * y, half * w
