"""Minimal-consumption transport from Pontryagin's maximum principle.

With friction as the only non-vanishing contribution to the consumption at
perfect regenerative braking, the cost is the integral of x'(t)**2.  The
lab-frame load position follows X'' + omega**2 (X - x) = 0 and the optimal
trolley trajectory is a line plus a resonant sinusoid,

    x(t) = c3 + c4 t - c2/(2 k0) cos(omega t) + c1/(2 k0 omega) sin(omega t),

completed by velocity jumps at both ends so that the trolley starts and
stops at rest.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import CraneParams, LoadState, ProtocolKind, TransportTask, TrolleyProtocol, integrate

K0 = -1.0


class DegenerateDurationError(ValueError):
    """The optimal-protocol denominator vanishes for this omega * t_f."""


def _resonance_denominator(z: float) -> float:
    """z^2 + z sin z + 4 (cos z - 1), series for small z (leading term z^6/360)."""
    if abs(z) < 1.0:
        total, j = 0.0, 3
        while j < 30:
            term = (-1) ** (j - 1) * (2 * j - 4) / math.factorial(2 * j) * z ** (2 * j)
            total += term
            if abs(term) < 1e-18 * abs(total):
                break
            j += 1
        return total
    return z * z + z * math.sin(z) + 4.0 * (math.cos(z) - 1.0)


def _checked_denominator(params: CraneParams, task: TransportTask) -> float:
    z = params.omega * task.t_f
    D = _resonance_denominator(z)
    if not math.isfinite(D) or D <= 0.0 or abs(D) < 1e-12 * z * z * min(1.0, z**4):
        raise DegenerateDurationError(f"optimal protocol undefined for omega*t_f={z:.6g}")
    return D


def costates(c1, c2, omega, t):
    """Costates (k1, k2) conjugate to (xi, xi')."""
    wt = omega * np.asarray(t, dtype=float)
    k1 = c1 * np.cos(wt) + omega * c2 * np.sin(wt)
    k2 = c2 * np.cos(wt) - c1 / omega * np.sin(wt)
    return k1, k2


@dataclass(frozen=True)
class OCTSolution:
    """Optimal trolley protocol and the load trajectory it produces from rest.

    ``xi`` is the lab-frame load position; it starts at 0, ends at ``d`` and
    has vanishing velocity and acceleration at both ends.
    """

    c1: float
    c2: float
    c3: float
    c4: float
    k0: float
    omega: float
    protocol: TrolleyProtocol
    # homogeneous part of xi: hc cos(wt) + hs sin(wt)
    hc: float
    hs: float

    @property
    def task(self) -> TransportTask:
        return self.protocol.task

    def _parts(self):
        # x = c3 + c4 t + A cos(wt) + B sin(wt)
        return -self.c2 / (2 * self.k0), self.c1 / (2 * self.k0 * self.omega)

    def xi(self, t, deriv: int = 0):
        t = np.asarray(t, dtype=float)
        w = self.omega
        A, B = self._parts()
        c, s = np.cos(w * t), np.sin(w * t)
        # particular solution of xi'' + w^2 xi = w^2 x, resonant terms give t*sin / t*cos
        if deriv == 0:
            return (self.c3 + self.c4 * t + 0.5 * w * t * (A * s - B * c)
                    + self.hc * c + self.hs * s)
        if deriv == 1:
            return (self.c4 + 0.5 * w * (A * s - B * c) + 0.5 * w * w * t * (A * c + B * s)
                    - w * self.hc * s + w * self.hs * c)
        if deriv == 2:
            return self.omega**2 * (self.protocol.x(t) - self.xi(t))
        raise ValueError("deriv must be 0, 1 or 2")

    def costates(self, t):
        return costates(self.c1, self.c2, self.omega, t)


def optimal_protocol(params: CraneParams, task: TransportTask) -> OCTSolution:
    """Closed-form minimal-consumption protocol with its boundary jumps."""
    w, d, t_f = params.omega, task.d, task.t_f
    D = _checked_denominator(params, task)
    cb, sb = math.cos(w * t_f), math.sin(w * t_f)

    def position(t):
        t = np.asarray(t, dtype=float)
        return d * (-2 + w * w * t_f * t + 2 * np.cos(w * t) - 2 * np.cos(w * (t - t_f))
                    + 2 * cb + w * t * sb) / D

    def velocity(t):
        t = np.asarray(t, dtype=float)
        return d * w * (w * t_f - 2 * np.sin(w * t) + 2 * np.sin(w * (t - t_f)) + sb) / D

    def acceleration(t):
        t = np.asarray(t, dtype=float)
        return 2 * d * w * w * (np.cos(w * (t - t_f)) - np.cos(w * t)) / D

    v_edge = d * w * (w * t_f - sb) / D
    protocol = TrolleyProtocol(ProtocolKind.OPTIMAL_OCT, task, position, velocity, acceleration,
                               jump_start=v_edge, jump_end=-v_edge)

    # x = c3 + c4 t + A cos + B sin with A = 2d(1 - cb)/D, B = -2d sb/D
    A, B = 2 * d * (1 - cb) / D, -2 * d * sb / D
    c3 = d * (2 * cb - 2) / D
    c4 = d * (w * w * t_f + w * sb) / D
    c2 = -2 * K0 * A
    c1 = 2 * K0 * w * B
    # xi(0) = 0 and xi'(0) = 0 fix the homogeneous part
    hc = -c3
    hs = -(c4 - 0.5 * w * B) / w
    return OCTSolution(c1, c2, c3, c4, K0, w, protocol, hc, hs)


def constants_from_boundary_conditions(params: CraneParams, task: TransportTask,
                                       k0: float = K0) -> np.ndarray:
    """Solve for (c1, c2, c3, c4) from the load boundary conditions.

    Independent of the closed form: the unknowns are the four trajectory
    constants and the two homogeneous amplitudes of xi; the conditions are
    xi(0) = xi'(0) = 0, xi(t_f) = d, xi'(t_f) = 0 and xi'' = 0 at both
    ends (equivalently x(0+) = 0, x(t_f-) = d).
    """
    w, d, T = params.omega, task.d, task.t_f
    _checked_denominator(params, task)

    def basis(t):
        # columns: c1, c2, c3, c4, hc, hs ; rows: xi, xi', x
        c, s = math.cos(w * t), math.sin(w * t)
        a_of_c2 = -1.0 / (2 * k0)          # A per unit c2
        b_of_c1 = 1.0 / (2 * k0 * w)       # B per unit c1
        xi = [b_of_c1 * (-0.5 * w * t * c), a_of_c2 * (0.5 * w * t * s), 1.0, t, c, s]
        xi_dot = [b_of_c1 * (-0.5 * w * c + 0.5 * w * w * t * s),
                  a_of_c2 * (0.5 * w * s + 0.5 * w * w * t * c), 0.0, 1.0, -w * s, w * c]
        x = [b_of_c1 * s, a_of_c2 * c, 1.0, t, 0.0, 0.0]
        return np.array(xi), np.array(xi_dot), np.array(x)

    xi0, v0, x0 = basis(0.0)
    xiT, vT, xT = basis(T)
    system = np.vstack([xi0, v0, xiT, vT, x0, xT])
    rhs = np.array([0.0, 0.0, d, 0.0, 0.0, d])
    return np.linalg.solve(system, rhs)[:4]


def simple_lower_bound(params: CraneParams, task: TransportTask) -> float:
    """gamma d^2 / t_f: consumption floor valid for every protocol and eta."""
    return params.gamma * task.d**2 / task.t_f


def minimal_consumption_bound(params: CraneParams, task: TransportTask) -> float:
    """Consumption of the optimal protocol; no shortcut can use less."""
    if params.gamma == 0.0:
        return 0.0
    w, t_f = params.omega, task.t_f
    z = w * t_f
    D = _checked_denominator(params, task)
    # t_f + 4(cos z - 1)/(w (z + sin z)) == D / (w (z + sin z))
    return params.gamma * task.d**2 * w * (z + math.sin(z)) / D


def short_time_asymptote(params: CraneParams, task: TransportTask) -> float:
    """Leading small omega*t_f behaviour of the minimal consumption."""
    return params.gamma * 720.0 * task.d**2 / (params.omega**4 * task.t_f**5)


@dataclass(frozen=True)
class PMPReport:
    hamiltonian_drift: float
    hamiltonian_value: float
    stationarity_residual: float
    endpoint_residuals: np.ndarray
    fitted_c1: float
    fitted_c2: float

    @property
    def max_endpoint_residual(self) -> float:
        return float(np.abs(self.endpoint_residuals).max())


def verify_pmp(solution: OCTSolution | TrolleyProtocol, params: CraneParams, task: TransportTask,
               samples: int = 2001, steps: int | None = None) -> PMPReport:
    """Check the necessary optimality conditions along a protocol.

    The costate amplitudes are fitted by least squares to the stationarity
    condition ``k2 omega^2 = 2 k0 x''``; the reported stationarity residual is
    the max misfit relative to max |2 k0 x''|, so a non-optimal protocol
    shows an O(1) value.  With the trolley velocity treated as the control,
    the maximised Hamiltonian is ``k1 xi' - k2 omega^2 (xi - x) - k0 x'^2``,
    whose relative drift is reported.  Endpoint residuals are
    ``xi(0), xi'(0), xi(t_f) - d, xi'(t_f)``, divided by ``d`` (positions)
    and ``d / t_f`` (velocities).  Plain protocols have their ``xi`` taken
    from a harmonic run started at rest.
    """
    w, d, t_f = params.omega, task.d, task.t_f
    if isinstance(solution, OCTSolution):
        protocol = solution.protocol
        t = np.linspace(0.0, t_f, samples)
        xi, xi_dot = solution.xi(t), solution.xi(t, 1)
        xi_end = np.array([solution.xi(0.0), solution.xi(0.0, 1), solution.xi(t_f), solution.xi(t_f, 1)])
    else:
        protocol = solution
        trace = integrate(protocol, params, LoadState.at_rest(), model="harmonic", steps=steps)
        stride = max(1, (trace.t.size - 1) // (samples - 1))
        t = trace.t[::stride]
        xi = trace.X[::stride]
        xi_dot = (trace.q_dot + trace.xdot)[::stride]
        xi_end = np.array([trace.start.X, trace.start.q_dot,
                           trace.end.X, trace.end.q_dot])

    u, u_dot, u_ddot = protocol.x(t), protocol.xdot(t), protocol.xddot(t)
    k0 = K0
    # k2 = c2 cos - (c1/w) sin ; fit w^2 k2 = 2 k0 u''
    design = w * w * np.column_stack([-np.sin(w * t) / w, np.cos(w * t)])
    target = 2 * k0 * u_ddot
    (c1, c2), *_ = np.linalg.lstsq(design, target, rcond=None)
    scale = max(np.abs(target).max(), 1e-300)
    stationarity = float(np.abs(design @ np.array([c1, c2]) - target).max() / scale)

    k1, k2 = costates(c1, c2, w, t)
    H = k1 * xi_dot - k2 * w * w * (xi - u) - k0 * u_dot**2
    h_scale = max(np.abs(k1 * xi_dot).max(), np.abs(k0 * u_dot**2).max(), 1e-300)
    drift = float((H.max() - H.min()) / h_scale)

    norms = np.array([d, d / t_f, d, d / t_f]) if d != 0 else np.ones(4)
    ends = (xi_end - np.array([0.0, 0.0, d, 0.0])) / norms
    return PMPReport(drift, float(H[0]), stationarity, ends, float(c1), float(c2))
