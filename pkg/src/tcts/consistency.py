"""Closed forms checked against the Fock-space oracle and against quadrature.

Each compared quantity becomes one :class:`Entry` with its own tolerance.
Relative tolerances are taken against ``max(|oracle|, floor)`` where the
floor is the natural scale of the quantity, so that quantities whose exact
value is zero (``<x>`` at ``alpha = 0``) are still judged meaningfully.
"""

from __future__ import annotations

import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np

from . import closed_form as cf
from . import fock
from .core import OscillatorConfig, StateSpec, ThermalChannel, spec_to_dict
from .special import legendre_rule

__all__ = [
    "DEFAULT_TOLERANCES",
    "Entry",
    "ComparisonReport",
    "SweepResult",
    "compare_point",
    "sweep_compare",
    "reduction_checks",
    "ReductionReport",
]

MOMENT_NAMES = ("x_mean", "x_var", "p_mean", "p_var", "n_mean", "n_var", "purity", "uncertainty_product")

DEFAULT_TOLERANCES: Dict[str, float] = {
    **{name: 1e-8 for name in MOMENT_NAMES},
    "number_distribution": 1e-9,
    "position_density": 1e-8,
    "momentum_density": 1e-8,
    "density_matrix": 1e-8,
    "norm_position": 1e-9,
    "norm_momentum": 1e-9,
    "norm_number": 1e-9,
}

NORM_QUADRATURE_ORDER = 200
NORM_HALF_WIDTH = 12.0
GRID_HALF_WIDTH = 4.0


@dataclass
class Entry:
    name: str
    closed: object
    oracle: object
    abs_dev: float
    rel_dev: float
    tolerance: float
    mode: str
    passed: bool

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "closed_value": self.closed,
            "oracle_value": self.oracle,
            "abs_dev": self.abs_dev,
            "rel_dev": self.rel_dev,
            "tolerance": self.tolerance,
            "mode": self.mode,
            "pass": self.passed,
        }


@dataclass
class ComparisonReport:
    spec: StateSpec
    t_values: List[float]
    cutoff: int
    entries: List[Entry]
    tail_mass: float
    wall_time: float = 0.0

    @property
    def overall_pass(self) -> bool:
        return all(e.passed for e in self.entries)

    def entry(self, name: str) -> Entry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    @property
    def failures(self) -> List[str]:
        return [e.name for e in self.entries if not e.passed]

    def as_dict(self, include_timing: bool = False) -> dict:
        out = {
            "spec": spec_to_dict(self.spec),
            "t_values": list(self.t_values),
            "cutoff": self.cutoff,
            "tail_mass": self.tail_mass,
            "overall_pass": self.overall_pass,
            "entries": [e.as_dict() for e in self.entries],
        }
        if include_timing:
            out["wall_time"] = self.wall_time
        return out


def _floors(spec: StateSpec) -> Dict[str, float]:
    osc = spec.osc
    lx2 = osc.hbar / (2.0 * osc.mass * osc.omega)
    lp2 = 0.5 * osc.mass * osc.hbar * osc.omega
    return {
        "x_mean": math.sqrt(lx2),
        "x_var": lx2,
        "p_mean": math.sqrt(lp2),
        "p_var": lp2,
        "n_mean": 1.0,
        "n_var": 1.0,
        "purity": 1.0,
        "uncertainty_product": 0.5 * osc.hbar,
    }


def _entry(name, closed, oracle, tol, floor=None) -> Entry:
    c = np.asarray(closed)
    o = np.asarray(oracle)
    abs_dev = float(np.max(np.abs(c - o))) if c.size else 0.0
    ref = float(np.max(np.abs(o))) if o.size else 0.0
    if floor is not None:
        ref = max(ref, floor)
    rel_dev = abs_dev / ref if ref > 0 else abs_dev
    mode = "relative" if floor is not None else "absolute"
    passed = bool((rel_dev if floor is not None else abs_dev) <= tol)
    # complex values serialise as [re, im] pairs
    def plain(a):
        return a.tolist() if a.ndim else (complex(a) if np.iscomplexobj(a) else float(a))
    return Entry(name, plain(c), plain(o), abs_dev, rel_dev, tol, mode, passed)


def _oracle_state(spec: StateSpec, cutoff: int, epsilon: float, grow_cutoff: bool) -> fock.TwoModeState:
    if not grow_cutoff:
        return fock.build_state(spec, cutoff, epsilon)
    return fock.build_state_auto(spec, epsilon, N=cutoff)


def compare_point(
    spec: StateSpec,
    t: float = 0.0,
    cutoff: int = fock.DEFAULT_CUTOFF,
    tolerances: Optional[Mapping[str, float]] = None,
    *,
    epsilon: float = fock.DEFAULT_EPSILON,
    grow_cutoff: bool = False,
    perturb: Optional[Mapping[str, float]] = None,
) -> ComparisonReport:
    """Compare every closed form at ``(spec, t)`` with its oracle.

    ``perturb`` adds a constant to the closed-form side of the named entries;
    it exists to test that the harness notices a fault.  With ``grow_cutoff``
    the cutoff is raised until the tail mass is below ``epsilon``; otherwise a
    too-small cutoff raises :class:`~tcts.fock.CutoffTooSmallError`.
    """
    start = time.perf_counter()
    tol = dict(DEFAULT_TOLERANCES)
    if tolerances:
        unknown = set(tolerances) - set(tol)
        if unknown:
            raise KeyError(f"unknown tolerance keys {sorted(unknown)}")
        tol.update(tolerances)
    perturb = dict(perturb or {})
    unknown = set(perturb) - set(tol)
    if unknown:
        raise KeyError(f"unknown perturbation keys {sorted(unknown)}")

    def bump(name, value):
        return np.asarray(value) + perturb.get(name, 0.0)

    osc = spec.osc
    state = _oracle_state(spec, cutoff, epsilon, grow_cutoff)
    N = state.cutoff
    rho = fock.reduced_density(fock.evolve(state, t, osc))
    closed = cf.moments_report(t, spec)
    oracle = fock.oracle_observables(rho, osc, t)
    floors = _floors(spec)

    entries = [
        _entry(name, bump(name, getattr(closed, name)), getattr(oracle, name), tol[name], floors[name])
        for name in MOMENT_NAMES
    ]

    ns = np.arange(N - 3)
    entries.append(_entry("number_distribution", bump("number_distribution", cf.number_distribution(ns, spec)),
                          np.diag(rho.matrix).real[: N - 3], tol["number_distribution"]))

    x_std, p_std = math.sqrt(closed.x_var), math.sqrt(closed.p_var)
    xs = np.linspace(closed.x_mean - GRID_HALF_WIDTH * x_std, closed.x_mean + GRID_HALF_WIDTH * x_std, 11)
    ps = np.linspace(closed.p_mean - GRID_HALF_WIDTH * p_std, closed.p_mean + GRID_HALF_WIDTH * p_std, 11)
    entries.append(_entry("position_density", bump("position_density", cf.position_density(xs, t, spec)),
                          fock.oracle_position_density(rho, xs, osc), tol["position_density"]))
    entries.append(_entry("momentum_density", bump("momentum_density", cf.momentum_density(ps, t, spec)),
                          fock.oracle_momentum_density(rho, ps, osc), tol["momentum_density"]))

    offsets = closed.x_mean + x_std * np.array([-1.0, 0.0, 1.0])
    xp, xx = (a.ravel() for a in np.meshgrid(offsets, offsets, indexing="ij"))
    entries.append(_entry("density_matrix",
                          bump("density_matrix", cf.density_matrix_element(xp, xx, t, spec)),
                          fock.oracle_density_element(rho, xp, xx, osc), tol["density_matrix"]))

    grid, w = legendre_rule(closed.x_mean - NORM_HALF_WIDTH * x_std, closed.x_mean + NORM_HALF_WIDTH * x_std,
                            NORM_QUADRATURE_ORDER)
    entries.append(_entry("norm_position", bump("norm_position", w @ cf.position_density(grid, t, spec)),
                          1.0, tol["norm_position"]))
    grid, w = legendre_rule(closed.p_mean - NORM_HALF_WIDTH * p_std, closed.p_mean + NORM_HALF_WIDTH * p_std,
                            NORM_QUADRATURE_ORDER)
    entries.append(_entry("norm_momentum", bump("norm_momentum", w @ cf.momentum_density(grid, t, spec)),
                          1.0, tol["norm_momentum"]))
    n_hi = int(math.ceil(closed.n_mean + 40.0 * math.sqrt(closed.n_var) + 60))
    total = float(np.sum(cf.number_distribution(np.arange(n_hi + 1), spec)))
    entries.append(_entry("norm_number", bump("norm_number", total), 1.0, tol["norm_number"]))

    return ComparisonReport(spec=spec, t_values=[float(t)], cutoff=N, entries=entries,
                            tail_mass=state.tail_mass, wall_time=time.perf_counter() - start)


@dataclass
class SweepResult:
    reports: List[Optional[ComparisonReport]]
    points: List[dict]
    errors: List[dict] = field(default_factory=list)

    @property
    def overall_pass(self) -> bool:
        return not self.errors and all(r is not None and r.overall_pass for r in self.reports)

    def summary(self) -> dict:
        """Worst deviation per quantity across the sweep."""
        worst: Dict[str, dict] = {}
        for idx, rep in enumerate(self.reports):
            if rep is None:
                continue
            for e in rep.entries:
                key = e.rel_dev if e.mode == "relative" else e.abs_dev
                cur = worst.get(e.name)
                if cur is None or key > cur["worst_dev"]:
                    worst[e.name] = {"worst_dev": key, "mode": e.mode, "tolerance": e.tolerance, "point": idx}
        for name, w in worst.items():
            w["all_pass"] = all(r.entry(name).passed for r in self.reports if r is not None)
        return {
            "points": len(self.points),
            "passed": sum(1 for r in self.reports if r is not None and r.overall_pass),
            "errors": len(self.errors),
            "overall_pass": self.overall_pass,
            "worst": worst,
        }

    def as_dict(self, include_timing: bool = False) -> dict:
        return {
            "summary": self.summary(),
            "errors": self.errors,
            "reports": [r.as_dict(include_timing) if r is not None else None for r in self.reports],
        }


def _run_point(args):
    spec, t, kwargs = args
    try:
        return compare_point(spec, t, **kwargs), None
    except Exception as exc:  # recorded per point; the sweep carries on
        return None, f"{type(exc).__name__}: {exc}"


def sweep_compare(
    alphas: Sequence[complex],
    theta1s: Sequence[float],
    theta2s: Sequence[float],
    ts: Sequence[float],
    cutoff: int = fock.DEFAULT_CUTOFF,
    tolerances: Optional[Mapping[str, float]] = None,
    *,
    osc=None,
    workers: int = 1,
    **kwargs,
) -> SweepResult:
    """Run :func:`compare_point` over the Cartesian product of the grids.

    Points are ordered alpha-major, then theta1, theta2, t.  The result does
    not depend on ``workers``.
    """
    grids = [list(alphas), list(theta1s), list(theta2s), list(ts)]
    if any(not g for g in grids):
        raise ValueError("every grid must be non-empty")
    osc = osc or OscillatorConfig()
    points, jobs = [], []
    for alpha, th1, th2, t in itertools.product(*grids):
        spec = StateSpec(complex(alpha), ThermalChannel(float(th1)), ThermalChannel(float(th2)), osc)
        points.append({"alpha": complex(alpha), "theta1": float(th1), "theta2": float(th2), "t": float(t)})
        jobs.append((spec, float(t), dict(cutoff=cutoff, tolerances=tolerances, **kwargs)))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_point, jobs))
    else:
        outcomes = [_run_point(j) for j in jobs]
    result = SweepResult(reports=[r for r, _ in outcomes], points=points)
    for idx, (_, err) in enumerate(outcomes):
        if err is not None:
            result.errors.append({"index": idx, **points[idx], "error": err})
    return result


@dataclass
class ReductionReport:
    spec: StateSpec
    checks: List[Entry]

    @property
    def overall_pass(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {"spec": spec_to_dict(self.spec), "overall_pass": self.overall_pass,
                "checks": [c.as_dict() for c in self.checks]}


def _pipeline(spec: StateSpec, N: int, skip_first: bool = False, skip_second: bool = False):
    state = fock.vacuum(N)
    if not skip_first:
        state = fock.apply_thermal(spec.theta1, state)
    state = fock.apply_displacement(spec.alpha, state, "physical")
    state = fock.apply_displacement(spec.alpha, state, "tilde")
    if not skip_second:
        state = fock.apply_thermal(spec.theta2, state)
    return state


def reduction_checks(spec: StateSpec, t: float = 0.0, cutoff: Optional[int] = None,
                     tol: float = 1e-8, exact_tol: float = 1e-12) -> ReductionReport:
    """Special cases obtained by switching off one or both thermal stages.

    (a) ``theta1 = 0`` against an oracle pipeline without the first stage,
    (b) ``theta2 = 0`` against one without the second stage plus the explicit
    reduced mean and number variance, (c) both off against coherent-state
    values.
    """
    osc = spec.osc
    floors = _floors(spec)
    checks: List[Entry] = []
    alpha = spec.alpha

    for label, sub, kw in (
        ("thermalized_coherent", spec.replace(theta1=0.0), {"skip_first": True}),
        ("coherent_thermal", spec.replace(theta2=0.0), {"skip_second": True}),
    ):
        N = cutoff or max(fock.DEFAULT_CUTOFF, fock.choose_cutoff(sub))
        rho = fock.reduced_density(fock.evolve(_pipeline(sub, N, **kw), t, osc))
        closed = cf.moments_report(t, sub)
        oracle = fock.oracle_observables(rho, osc, t)
        for name in MOMENT_NAMES:
            checks.append(_entry(f"{label}.{name}", getattr(closed, name), getattr(oracle, name), tol, floors[name]))

    th1 = spec.theta1
    ct = spec.replace(theta2=0.0)
    x0 = math.sqrt(2.0 * osc.hbar / (osc.mass * osc.omega)) * (alpha * complex(math.cos(osc.omega * t),
                                                                              -math.sin(osc.omega * t))).real
    checks.append(_entry("coherent_thermal.x_mean_unamplified", cf.position_moments(t, ct)[0], x0,
                         exact_tol, floors["x_mean"]))
    c1 = math.cosh(2.0 * th1)
    checks.append(_entry("coherent_thermal.n_var_reduced", cf.number_moments(ct)[1],
                         c1 * abs(alpha) ** 2 + 0.25 * (c1**2 - 1.0), exact_tol, 1.0))

    coh = spec.replace(theta1=0.0, theta2=0.0)
    rep = cf.moments_report(t, coh)
    rot = alpha * complex(math.cos(osc.omega * t), -math.sin(osc.omega * t))
    expected = {
        "x_mean": math.sqrt(2.0 * osc.hbar / (osc.mass * osc.omega)) * rot.real,
        "p_mean": math.sqrt(2.0 * osc.mass * osc.hbar * osc.omega) * rot.imag,
        "x_var": osc.hbar / (2.0 * osc.mass * osc.omega),
        "p_var": 0.5 * osc.mass * osc.hbar * osc.omega,
        "n_mean": abs(alpha) ** 2,
        "n_var": abs(alpha) ** 2,
        "purity": 1.0,
        "uncertainty_product": 0.5 * osc.hbar,
    }
    for name, value in expected.items():
        checks.append(_entry(f"coherent.{name}", getattr(rep, name), value, exact_tol, floors[name]))
    return ReductionReport(spec, checks)
