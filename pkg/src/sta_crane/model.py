"""Overhead crane dynamics.

The load hangs from a trolley by a massless rope of fixed length.  Two
models of the swing are provided:

* ``exact``: the full pendulum, ``l*theta'' + x''*cos(theta) + g*sin(theta) = 0``
* ``harmonic``: small oscillations of the horizontal deviation
  ``q = l*sin(theta)``, ``q'' + omega**2 * q = -x''``

Both are driven by a prescribed trolley trajectory (a :class:`TrolleyProtocol`)
and propagated with a fixed-step classical RK4 scheme.
"""
from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numba import njit

DEFAULT_STEPS = 20_000
MIN_STEPS = 1_000
STEPS_ENV = "STA_CRANE_STEPS"


class ModelValidityError(ValueError):
    """Raised when the load leaves the regime the exact model supports."""


def default_steps() -> int:
    """Integrator step count, overridable through ``STA_CRANE_STEPS``."""
    raw = os.environ.get(STEPS_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_STEPS
    try:
        steps = int(raw)
    except ValueError:
        raise ValueError(f"{STEPS_ENV} must be an integer, got {raw!r}") from None
    if steps < MIN_STEPS:
        raise ValueError(f"{STEPS_ENV}={steps} is below the minimum of {MIN_STEPS}")
    return steps


@dataclass(frozen=True)
class CraneParams:
    """Physical constants of the trolley + load system (SI units)."""

    m: float = 10.0
    M: float = 0.0
    l: float = 5.0
    gamma: float = 0.0
    g: float = 9.8

    def __post_init__(self):
        for name in ("m", "M", "l", "gamma", "g"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
        if self.m <= 0:
            raise ValueError(f"load mass m must be positive, got {self.m}")
        if self.l <= 0:
            raise ValueError(f"rope length l must be positive, got {self.l}")
        if self.g <= 0:
            raise ValueError(f"gravity g must be positive, got {self.g}")
        if self.M < 0:
            raise ValueError(f"trolley mass M must be non-negative, got {self.M}")
        if self.gamma < 0:
            raise ValueError(f"friction gamma must be non-negative, got {self.gamma}")

    @property
    def omega(self) -> float:
        return math.sqrt(self.g / self.l)

    @property
    def omega2(self) -> float:
        return self.g / self.l


@dataclass(frozen=True)
class TransportTask:
    """Move the trolley from 0 to ``d`` in time ``t_f``."""

    d: float
    t_f: float

    def __post_init__(self):
        if not math.isfinite(self.d):
            raise ValueError(f"transport distance d must be finite, got {self.d}")
        if not (math.isfinite(self.t_f) and self.t_f > 0):
            raise ValueError(f"duration t_f must be positive, got {self.t_f}")


@dataclass(frozen=True)
class LoadState:
    """Load state in both angle and deviation coordinates.

    ``X`` is the lab-frame horizontal position of the load, ``q + x``.
    """

    t: float
    theta: float
    theta_dot: float
    q: float
    q_dot: float
    X: float = 0.0

    @classmethod
    def from_angle(cls, t, theta, theta_dot, params: CraneParams, x=0.0):
        q = params.l * math.sin(theta)
        q_dot = params.l * theta_dot * math.cos(theta)
        return cls(t, theta, theta_dot, q, q_dot, q + x)

    @classmethod
    def from_deviation(cls, t, q, q_dot, params: CraneParams, x=0.0):
        if abs(q) >= params.l:
            raise ModelValidityError(f"deviation |q|={abs(q)} exceeds rope length {params.l}")
        theta = math.asin(q / params.l)
        theta_dot = q_dot / (params.l * math.cos(theta))
        return cls(t, theta, theta_dot, q, q_dot, q + x)

    @classmethod
    def at_rest(cls, t=0.0):
        return cls(t, 0.0, 0.0, 0.0, 0.0, 0.0)


class ProtocolKind(str, enum.Enum):
    POLYNOMIAL_STA = "sta"
    OPTIMAL_OCT = "oct"
    CUSTOM = "custom"


@dataclass(frozen=True)
class TrolleyProtocol:
    """Trolley trajectory on ``[0, t_f]``.

    ``position``, ``velocity`` and ``acceleration`` evaluate the smooth part
    on the open interval (at the endpoints they give the one-sided limits).
    Outside the interval the trolley sits at 0 or ``d``.  Instantaneous
    velocity jumps at the edges are carried in ``jump_start``/``jump_end``;
    the corresponding Dirac impulses in the acceleration are never sampled.
    """

    kind: ProtocolKind
    task: TransportTask
    position: Callable[[np.ndarray], np.ndarray]
    velocity: Callable[[np.ndarray], np.ndarray]
    acceleration: Callable[[np.ndarray], np.ndarray]
    jump_start: float = 0.0
    jump_end: float = 0.0

    def _inside(self, t):
        t = np.asarray(t, dtype=float)
        return t, (t >= 0.0) & (t <= self.task.t_f)

    def x(self, t):
        t, inside = self._inside(t)
        clamped = np.clip(t, 0.0, self.task.t_f)
        outside = np.where(t < 0.0, 0.0, self.task.d)
        return np.where(inside, self.position(clamped), outside)

    def xdot(self, t):
        t, inside = self._inside(t)
        return np.where(inside, self.velocity(np.clip(t, 0.0, self.task.t_f)), 0.0)

    def xddot(self, t):
        t, inside = self._inside(t)
        return np.where(inside, self.acceleration(np.clip(t, 0.0, self.task.t_f)), 0.0)


def resting_protocol(task: TransportTask) -> TrolleyProtocol:
    """Trolley that never moves (``d`` is ignored by the evaluators)."""
    zero = lambda t: np.zeros_like(np.asarray(t, dtype=float))  # noqa: E731
    return TrolleyProtocol(ProtocolKind.CUSTOM, TransportTask(0.0, task.t_f), zero, zero, zero)


# -- pointwise dynamics -------------------------------------------------------

def angular_acceleration(theta, xddot, params: CraneParams):
    """theta'' of the exact model; vectorised, no regime check."""
    return -(xddot * np.cos(theta) + params.g * np.sin(theta)) / params.l


def _check_angle(theta):
    if np.any(np.abs(theta) >= math.pi / 2):
        raise ModelValidityError("swing angle reached pi/2; exact model not valid there")


def exact_rhs(state: LoadState, protocol: TrolleyProtocol, params: CraneParams, t: float) -> float:
    _check_angle(state.theta)
    return float(angular_acceleration(state.theta, protocol.xddot(t), params))


def harmonic_rhs(q, q_dot, protocol: TrolleyProtocol, params: CraneParams, t):
    return -params.omega2 * q - protocol.xddot(t)


def actuating_force(theta, theta_dot, theta_ddot, xdot, xddot, params: CraneParams):
    """Engine force F_a needed to realise the trolley motion (exact model)."""
    m, l = params.m, params.l
    swing = m * l * (theta_ddot * np.cos(theta) - theta_dot**2 * np.sin(theta))
    return (params.M + m) * xddot + swing + params.gamma * xdot


def required_force(state: LoadState, thetaddot: float, protocol: TrolleyProtocol,
                   params: CraneParams, t: float) -> float:
    return float(actuating_force(state.theta, state.theta_dot, thetaddot,
                                 protocol.xdot(t), protocol.xddot(t), params))


def exact_energy(theta, theta_dot, xdot, params: CraneParams):
    """Load mechanical energy, potential zero at the hanging equilibrium."""
    m, l, g = params.m, params.l, params.g
    kinetic = 0.5 * m * (xdot**2 + l**2 * theta_dot**2 + 2 * l * xdot * theta_dot * np.cos(theta))
    return kinetic + m * g * l * (1.0 - np.cos(theta))


def harmonic_energy(q, q_dot, xdot, params: CraneParams):
    return 0.5 * params.m * (xdot + q_dot) ** 2 + 0.5 * params.m * params.omega2 * q**2


def load_energy(state: LoadState, protocol: TrolleyProtocol, params: CraneParams, t: float,
                model: str = "harmonic") -> float:
    xdot = protocol.xdot(t)
    if model == "exact":
        return float(exact_energy(state.theta, state.theta_dot, xdot, params))
    if model == "harmonic":
        return float(harmonic_energy(state.q, state.q_dot, xdot, params))
    raise ValueError(f"unknown model {model!r}")


def invariant_I(q, p, alpha, alpha_dot, params: CraneParams):
    """Lewis-Riesenfeld invariant of the forced oscillator centred on alpha."""
    m = params.m
    return (p - m * alpha_dot) ** 2 / (2 * m) + 0.5 * m * params.omega2 * (q - alpha) ** 2


def moving_frame_hamiltonian(q, p, protocol: TrolleyProtocol, params: CraneParams, t):
    m = params.m
    return p**2 / (2 * m) + 0.5 * m * params.omega2 * q**2 + m * protocol.xddot(t) * q


# -- integration --------------------------------------------------------------

@njit(cache=True)
def _rk4_exact(theta0, omega0, acc, h, l, g):
    n = (acc.shape[0] - 1) // 2
    th = np.empty(n + 1)
    om = np.empty(n + 1)
    th[0] = theta0
    om[0] = omega0
    limit = 0.5 * np.pi
    for k in range(n):
        a0 = acc[2 * k]
        am = acc[2 * k + 1]
        a1 = acc[2 * k + 2]
        y = th[k]
        v = om[k]
        k1y = v
        k1v = -(a0 * np.cos(y) + g * np.sin(y)) / l
        y2 = y + 0.5 * h * k1y
        k2y = v + 0.5 * h * k1v
        k2v = -(am * np.cos(y2) + g * np.sin(y2)) / l
        y3 = y + 0.5 * h * k2y
        k3y = v + 0.5 * h * k2v
        k3v = -(am * np.cos(y3) + g * np.sin(y3)) / l
        y4 = y + h * k3y
        k4y = v + h * k3v
        k4v = -(a1 * np.cos(y4) + g * np.sin(y4)) / l
        th[k + 1] = y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        om[k + 1] = v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        if abs(th[k + 1]) >= limit:
            return th, om, k + 1
    return th, om, -1


@njit(cache=True)
def _rk4_harmonic(q0, v0, acc, h, w2):
    n = (acc.shape[0] - 1) // 2
    q = np.empty(n + 1)
    v = np.empty(n + 1)
    q[0] = q0
    v[0] = v0
    for k in range(n):
        a0 = acc[2 * k]
        am = acc[2 * k + 1]
        a1 = acc[2 * k + 2]
        y = q[k]
        u = v[k]
        k1y = u
        k1v = -w2 * y - a0
        k2y = u + 0.5 * h * k1v
        k2v = -w2 * (y + 0.5 * h * k1y) - am
        k3y = u + 0.5 * h * k2v
        k3v = -w2 * (y + 0.5 * h * k2y) - am
        k4y = u + h * k3v
        k4v = -w2 * (y + h * k3y) - a1
        q[k + 1] = y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        v[k + 1] = u + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    return q, v


@dataclass(frozen=True)
class SimTrace:
    """Uniformly sampled run on ``[0+, t_f-]`` plus the states outside the jumps.

    Row 0 is the state just after the start jump (``0+``) and the last row the
    state just before the end jump (``t_f-``).  ``start``/``end`` hold the
    load at ``0-`` and ``t_f+``, with the matching energies in
    ``E_start``/``E_end``.
    """

    model: str
    params: CraneParams
    protocol: TrolleyProtocol
    t: np.ndarray
    x: np.ndarray
    xdot: np.ndarray
    xddot: np.ndarray
    theta: np.ndarray
    theta_dot: np.ndarray
    theta_ddot: np.ndarray
    q: np.ndarray
    q_dot: np.ndarray
    q_ddot: np.ndarray
    E_load: np.ndarray
    E_total: np.ndarray
    start: LoadState
    end: LoadState
    E_start: float
    E_end: float

    @property
    def X(self):
        return self.q + self.x

    @property
    def p(self):
        return self.params.m * self.q_dot


def integrate(protocol: TrolleyProtocol, params: CraneParams, init: LoadState | None = None,
              model: str = "harmonic", steps: int | None = None) -> SimTrace:
    """Propagate the load under ``protocol`` with fixed-step RK4.

    ``init`` is the load state at ``0-`` (before any start jump).  Boundary
    jumps of the trolley velocity are applied as discrete updates holding the
    lab-frame load velocity continuous.
    """
    if model not in ("exact", "harmonic"):
        raise ValueError(f"unknown model {model!r}")
    steps = default_steps() if steps is None else int(steps)
    if steps < MIN_STEPS:
        raise ValueError(f"steps={steps} below the accuracy floor of {MIN_STEPS}")
    init = LoadState.at_rest() if init is None else init
    l, t_f = params.l, protocol.task.t_f
    h = t_f / steps
    t = np.linspace(0.0, t_f, steps + 1)
    acc = np.asarray(protocol.xddot(np.linspace(0.0, t_f, 2 * steps + 1)), dtype=float)
    x = np.asarray(protocol.x(t), dtype=float)
    xdot = np.asarray(protocol.xdot(t), dtype=float)
    xddot = acc[::2].copy()
    dv0, dvf = protocol.jump_start, protocol.jump_end

    if model == "exact":
        theta0 = init.theta
        _check_angle(theta0)
        # X' = x' + l*theta'*cos(theta) stays continuous through the jump
        omega0 = init.theta_dot - dv0 / (l * math.cos(theta0))
        theta, theta_dot, fail = _rk4_exact(theta0, omega0, acc, h, l, params.g)
        if fail >= 0:
            raise ModelValidityError(
                f"swing angle reached pi/2 at t={t[fail]:.6g} s; exact model not valid there")
        theta_ddot = angular_acceleration(theta, xddot, params)
        q = l * np.sin(theta)
        q_dot = l * theta_dot * np.cos(theta)
        q_ddot = l * (theta_ddot * np.cos(theta) - theta_dot**2 * np.sin(theta))
        E_load = exact_energy(theta, theta_dot, xdot, params)
        th_f = float(theta[-1])
        end = LoadState.from_angle(t_f, th_f, float(theta_dot[-1]) - dvf / (l * math.cos(th_f)),
                                   params, x=protocol.task.d)
        E_start = float(exact_energy(init.theta, init.theta_dot, 0.0, params))
        E_end = float(exact_energy(end.theta, end.theta_dot, 0.0, params))
    else:
        q, q_dot = _rk4_harmonic(init.q, init.q_dot - dv0, acc, h, params.omega2)
        q_ddot = -params.omega2 * q - xddot
        with np.errstate(invalid="ignore"):
            theta = np.arcsin(q / l)
            theta_dot = q_dot / (l * np.cos(theta))
            theta_ddot = (q_ddot / l + theta_dot**2 * np.sin(theta)) / np.cos(theta)
        E_load = harmonic_energy(q, q_dot, xdot, params)
        qf, qdf = float(q[-1]), float(q_dot[-1]) - dvf
        th_f = math.asin(qf / l) if abs(qf) < l else math.nan
        end = LoadState(t_f, th_f, qdf / (l * math.cos(th_f)), qf, qdf, qf + protocol.task.d)
        E_start = float(harmonic_energy(init.q, init.q_dot, 0.0, params))
        E_end = float(harmonic_energy(qf, qdf, 0.0, params))

    E_total = E_load + 0.5 * params.M * xdot**2
    return SimTrace(
        model=model, params=params, protocol=protocol, t=t, x=x, xdot=xdot, xddot=xddot,
        theta=theta, theta_dot=theta_dot, theta_ddot=theta_ddot, q=q, q_dot=q_dot,
        q_ddot=q_ddot, E_load=E_load, E_total=E_total, start=init, end=end,
        E_start=E_start, E_end=E_end,
    )
