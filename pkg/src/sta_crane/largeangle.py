"""Shortcuts beyond small oscillations.

Extra coefficients of the alpha polynomial are tuned so that the exact
pendulum, released at rest from chosen initial angles, ends the transport
with the energy it started with.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .model import CraneParams, LoadState, ModelValidityError, TransportTask, integrate
from .simplex import nelder_mead
from .sta import design_alpha, to_physical, trolley_from_alpha

# coarse pre-search grid, in units of the largest base-design coefficient
_SEARCH_MULTIPLES = np.linspace(-8.0, 8.0, 33)


def reference_kinetic_energy(params: CraneParams, task: TransportTask) -> float:
    """K0 = m d^2 / (2 t_f^2), kinetic energy of a constant-velocity transport."""
    return params.m * task.d**2 / (2.0 * task.t_f**2)


@dataclass(frozen=True)
class ExcitationResult:
    theta_i: float  # degrees
    dE: float
    dE_scaled: float
    K0: float
    valid: bool = True

    @property
    def theta_i_rad(self) -> float:
        return math.radians(self.theta_i)


def _excitation(protocol, theta_i_deg, params, task, steps, K0):
    if not abs(theta_i_deg) < 90.0:
        raise ValueError(f"initial angle must lie in (-90, 90) degrees, got {theta_i_deg}")
    init = LoadState.from_angle(0.0, math.radians(theta_i_deg), 0.0, params)
    try:
        trace = integrate(protocol, params, init, model="exact", steps=steps)
    except ModelValidityError:
        return ExcitationResult(theta_i_deg, math.inf, math.inf, K0, valid=False)
    dE = abs(trace.E_end - trace.E_start)
    scaled = dE / K0 if K0 > 0 else (0.0 if dE == 0 else math.inf)
    return ExcitationResult(theta_i_deg, dE, scaled, K0)


def final_excitation(free_values: Sequence[float], theta_i: float, params: CraneParams,
                     task: TransportTask, steps: int | None = None) -> ExcitationResult:
    """|E(t_f) - E(0)| of the exact model for a load released at rest from ``theta_i`` degrees.

    ``free_values`` are tau-basis coefficients (see :mod:`sta_crane.sta`).
    Leaving the supported angle range gives ``dE = inf`` with ``valid=False``.
    """
    protocol = trolley_from_alpha(design_alpha(params, task, free_values), params, task)
    return _excitation(protocol, theta_i, params, task, steps, reference_kinetic_energy(params, task))


def excitation_scan(free_values: Sequence[float], theta_grid: Sequence[float], params: CraneParams,
                    task: TransportTask, steps: int | None = None) -> list[ExcitationResult]:
    protocol = trolley_from_alpha(design_alpha(params, task, free_values), params, task)
    K0 = reference_kinetic_energy(params, task)
    return [_excitation(protocol, float(th), params, task, steps, K0) for th in theta_grid]


@dataclass
class AngleOptimization:
    theta_targets: list[float]
    free_values: np.ndarray
    objective: float
    converged: bool
    iterations: int
    evaluations: int
    message: str
    t_f: float = 1.0
    excitations: list[ExcitationResult] = field(default_factory=list)

    @property
    def free_values_physical(self) -> np.ndarray:
        return to_physical(self.free_values, self.t_f)

    @property
    def success(self) -> bool:
        return all(e.dE_scaled < 1e-3 for e in self.excitations)


def optimize_excitation(theta_targets: Sequence[float], params: CraneParams, task: TransportTask,
                        n_free: int | None = None, init_scale: float = 0.25,
                        steps: int | None = None, max_iter: int = 500) -> AngleOptimization:
    """Tune one free alpha coefficient per target angle (degrees).

    The objective is the unweighted sum of dE/K0 over the targets.  A coarse
    coordinate-wise search over multiples of the base design's largest
    coefficient picks the starting point; Nelder-Mead then refines it with an
    initial step of ``init_scale`` times that coefficient.
    """
    targets = [float(th) for th in theta_targets]
    n = len(targets) if n_free is None else int(n_free)
    if n != len(targets):
        raise ValueError(f"n_free={n} must equal the number of target angles ({len(targets)})")
    if n == 0:
        return AngleOptimization([], np.zeros(0), 0.0, True, 0, 0, "nothing to optimise", task.t_f)

    K0 = reference_kinetic_energy(params, task)

    def objective(values):
        protocol = trolley_from_alpha(design_alpha(params, task, values), params, task)
        return sum(_excitation(protocol, th, params, task, steps, K0).dE_scaled for th in targets)

    typical = float(np.abs(design_alpha(params, task).scaled_coeffs).max()) or 1.0
    start = np.zeros(n)
    best = objective(start)
    for j in range(n):
        for k in _SEARCH_MULTIPLES:
            trial = start.copy()
            trial[j] = k * typical
            value = objective(trial)
            if value < best:
                best, candidate = value, trial
        if best < objective(start):
            start = candidate

    res = nelder_mead(objective, start, init_scale * typical, max_iter=max_iter)
    excitations = [final_excitation(res.x, th, params, task, steps) for th in targets]
    return AngleOptimization(targets, res.x, res.fun, res.converged, res.iterations,
                             res.evaluations, res.message, task.t_f, excitations)
