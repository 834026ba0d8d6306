"""Engine power and energy consumption.

The engine delivers the power ``P_total = F_a * x'``.  Braking phases
(negative power) are weighted by a constant ``eta`` in [-1, 1]:
``E = E_plus + eta * E_minus``.  ``eta = 1`` is perfect regenerative
braking, ``eta = -1`` an engine that also pays for braking.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import CraneParams, SimTrace, TransportTask, TrolleyProtocol, actuating_force
from .optimal import minimal_consumption_bound, simple_lower_bound


def total_power_harmonic(q, protocol: TrolleyProtocol, params: CraneParams, t):
    """Small-oscillation engine power (M x'' - m omega^2 q + gamma x') x'."""
    xdot, xddot = protocol.xdot(t), protocol.xddot(t)
    return (params.M * xddot - params.m * params.omega2 * q + params.gamma * xdot) * xdot


def total_power_exact(F_a, xdot):
    return F_a * xdot


def load_power(q, params: CraneParams, xdot):
    """Rate of change of the load energy in the harmonic model."""
    return -params.m * params.omega2 * q * xdot


@dataclass(frozen=True)
class PowerTrace:
    t: np.ndarray
    P_total: np.ndarray
    P_load: np.ndarray
    E_load: np.ndarray
    E_total: np.ndarray
    jump_work_start: float
    jump_work_end: float
    params: CraneParams
    task: TransportTask
    model: str


def power_trace(trace: SimTrace) -> PowerTrace:
    """Engine and load power along a simulated run.

    Work done by the edge impulses goes into the trolley's kinetic energy
    only (the load's lab-frame velocity is continuous) and is reported
    separately from the sampled power.
    """
    params = trace.params
    protocol = trace.protocol
    if trace.model == "harmonic":
        P_total = (params.M * trace.xddot - params.m * params.omega2 * trace.q
                   + params.gamma * trace.xdot) * trace.xdot
        P_load = load_power(trace.q, params, trace.xdot)
    else:
        F_a = actuating_force(trace.theta, trace.theta_dot, trace.theta_ddot,
                              trace.xdot, trace.xddot, params)
        P_total = total_power_exact(F_a, trace.xdot)
        P_load = (F_a - params.M * trace.xddot - params.gamma * trace.xdot) * trace.xdot
    v_end = float(trace.xdot[-1])
    work_start = 0.5 * params.M * protocol.jump_start**2
    work_end = 0.5 * params.M * ((v_end + protocol.jump_end) ** 2 - v_end**2)
    return PowerTrace(trace.t, P_total, P_load, trace.E_load, trace.E_total,
                      work_start, work_end, params, protocol.task, trace.model)


def signed_integrals(t, p) -> tuple[float, float]:
    """Integrals of max(p, 0) and min(p, 0) over the sampled grid.

    Trapezoidal rule per interval; an interval whose ends differ in sign is
    split at the linearly interpolated zero.
    """
    t = np.asarray(t, dtype=float)
    p = np.asarray(p, dtype=float)
    h = np.diff(t)
    a, b = p[:-1], p[1:]
    plus = np.where((a >= 0) & (b >= 0), 0.5 * h * (a + b), 0.0)
    minus = np.where((a <= 0) & (b <= 0), 0.5 * h * (a + b), 0.0)
    cross = (a * b) < 0
    if np.any(cross):
        ac, bc, hc = a[cross], b[cross], h[cross]
        frac = ac / (ac - bc)
        left = 0.5 * frac * hc * ac
        right = 0.5 * (1.0 - frac) * hc * bc
        plus[cross] = np.where(ac > 0, left, right)
        minus[cross] = np.where(ac < 0, left, right)
    return float(plus.sum()), float(minus.sum())


@dataclass(frozen=True)
class EnergyReport:
    e_plus: float
    e_minus: float
    eta: float
    e_total: float
    bound_simple: float
    bound_tight: float

    def at(self, eta: float) -> float:
        _check_eta(eta)
        return self.e_plus + eta * self.e_minus


def _check_eta(eta):
    if not (-1.0 <= eta <= 1.0) or math.isnan(eta):
        raise ValueError(f"eta must lie in [-1, 1], got {eta}")


def consumption(trace: PowerTrace, eta: float = 1.0) -> EnergyReport:
    _check_eta(eta)
    e_plus, e_minus = signed_integrals(trace.t, trace.P_total)
    for work in (trace.jump_work_start, trace.jump_work_end):
        if work >= 0:
            e_plus += work
        else:
            e_minus += work
    return EnergyReport(
        e_plus=e_plus,
        e_minus=e_minus,
        eta=eta,
        e_total=e_plus + eta * e_minus,
        bound_simple=simple_lower_bound(trace.params, trace.task),
        bound_tight=minimal_consumption_bound(trace.params, trace.task),
    )


@dataclass(frozen=True)
class PeakPowerBounds:
    trolley: float
    friction: float
    load_long_time: float
    load_short_time: float
    regime_ratio: float


def peak_power_bounds(params: CraneParams, task: TransportTask, E0: float = 0.0) -> PeakPowerBounds:
    """Mean-value estimates of the power peak when one term dominates.

    ``regime_ratio`` is sqrt(2 E0 / m) / (omega d); the short-time estimate
    assumes it is small.
    """
    d, t_f, w = task.d, task.t_f, params.omega
    d2 = d * d
    ratio = math.sqrt(2.0 * E0 / params.m) / (w * abs(d)) if d != 0 else math.inf
    return PeakPowerBounds(
        trolley=params.M * d2 / t_f**3,
        friction=params.gamma * d2 / t_f**2,
        load_long_time=params.m * d2 / t_f**3,
        load_short_time=4.0 * params.m * d2 / (w**2 * t_f**5),
        regime_ratio=ratio,
    )
