"""Invariant-based inverse engineering of shortcut trolley trajectories.

The auxiliary trajectory alpha(t) is a polynomial that vanishes with its
first two derivatives at both ends.  Any trolley motion built from it as

    x(t) = -alpha(t) - omega**2 * int_0^t int_0^t' alpha

returns the load to its initial energy whatever the initial conditions.
The remaining two conditions (x(t_f) = d, x'(t_f) = 0) reduce to

    int_0^tf alpha = 0,    int_0^tf int_0^t' alpha = -d / omega**2.

Coefficients are solved for in the scaled time tau = t / t_f; ``A_i`` below
is the coefficient of tau**i (units of metres).  Physical-time coefficients
``a_i = A_i / t_f**i`` are available for reporting.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .model import CraneParams, ProtocolKind, TransportTask, TrolleyProtocol

BASE_DEGREE = 7
_SOLVED = range(3, BASE_DEGREE + 1)


class DesignError(RuntimeError):
    pass


def _constraint_row(i: int) -> np.ndarray:
    # alpha(1), alpha'(1), alpha''(1), int alpha, iterated int alpha  (in tau)
    return np.array([1.0, i, i * (i - 1), 1.0 / (i + 1), 1.0 / ((i + 1) * (i + 2))])


def to_physical(scaled, t_f: float, first_power: int = BASE_DEGREE + 1) -> np.ndarray:
    """Convert tau-basis coefficients starting at ``first_power`` to physical time."""
    scaled = np.asarray(scaled, dtype=float)
    powers = first_power + np.arange(scaled.size)
    return scaled / t_f**powers


def to_scaled(physical, t_f: float, first_power: int = BASE_DEGREE + 1) -> np.ndarray:
    physical = np.asarray(physical, dtype=float)
    powers = first_power + np.arange(physical.size)
    return physical * t_f**powers


@dataclass(frozen=True)
class PolynomialAnsatz:
    """alpha(t) = sum_i A_i (t/t_f)**i with i = 0 .. 7 + n_free."""

    t_f: float
    scaled_coeffs: np.ndarray
    n_free: int
    residual: float = 0.0

    @property
    def degree(self) -> int:
        return BASE_DEGREE + self.n_free

    @property
    def coeffs(self) -> np.ndarray:
        """Coefficients of t**i in physical time."""
        return to_physical(self.scaled_coeffs, self.t_f, first_power=0)

    @property
    def free_values(self) -> np.ndarray:
        return self.scaled_coeffs[BASE_DEGREE + 1:].copy()

    @property
    def poly(self) -> Polynomial:
        return Polynomial(self.scaled_coeffs)

    def alpha(self, t, deriv: int = 0):
        p = self.poly.deriv(deriv) if deriv else self.poly
        return p(np.asarray(t, dtype=float) / self.t_f) / self.t_f**deriv

    def boundary_residuals(self, d: float, omega: float) -> np.ndarray:
        """Six endpoint values of alpha and derivatives, plus the two integral conditions."""
        p = self.poly
        ends = [p.deriv(k)(tau) / self.t_f**k if k else p(tau)
                for tau in (0.0, 1.0) for k in range(3)]
        integral = p.integ()(1.0) * self.t_f
        iterated = p.integ(2)(1.0) * self.t_f**2
        return np.array(ends + [integral, iterated + d / omega**2])


def design_alpha(params: CraneParams, task: TransportTask,
                 free_values: Sequence[float] = (), basis: str = "scaled") -> PolynomialAnsatz:
    """Solve for alpha given the trailing free coefficients.

    ``free_values`` are the coefficients of powers 8, 9, ... either in the
    tau basis (``basis="scaled"``, metres) or in physical time.
    """
    free = np.asarray(free_values, dtype=float).ravel()
    if basis == "physical":
        free = to_scaled(free, task.t_f)
    elif basis != "scaled":
        raise ValueError(f"basis must be 'scaled' or 'physical', got {basis!r}")
    n = free.size
    A = np.column_stack([_constraint_row(i) for i in _SOLVED])
    rhs = np.array([0.0, 0.0, 0.0, 0.0, -task.d / (params.omega2 * task.t_f**2)])
    for j, value in enumerate(free):
        rhs -= value * _constraint_row(BASE_DEGREE + 1 + j)
    try:
        solved = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - monomial system is regular
        raise DesignError("singular design system") from exc
    coeffs = np.concatenate([np.zeros(3), solved, free])
    scale = max(np.abs(rhs).max(), np.abs(coeffs).max(), 1.0)
    residual = float(np.abs(A @ solved - rhs).max() / scale)
    if residual > 1e-10:
        raise DesignError(f"design system residual {residual:.3g} exceeds 1e-10")
    return PolynomialAnsatz(task.t_f, coeffs, n, residual)


def trolley_from_alpha(ansatz: PolynomialAnsatz, params: CraneParams,
                       task: TransportTask) -> TrolleyProtocol:
    t_f = ansatz.t_f
    alpha = ansatz.poly
    xpoly = -alpha - params.omega2 * t_f**2 * alpha.integ(2)
    vpoly = xpoly.deriv()
    apoly = vpoly.deriv()

    def position(t):
        return xpoly(np.asarray(t, dtype=float) / t_f)

    def velocity(t):
        return vpoly(np.asarray(t, dtype=float) / t_f) / t_f

    def acceleration(t):
        return apoly(np.asarray(t, dtype=float) / t_f) / t_f**2

    return TrolleyProtocol(ProtocolKind.POLYNOMIAL_STA, task, position, velocity, acceleration)


def sta_protocol(params: CraneParams, task: TransportTask, free_values: Sequence[float] = (),
                 basis: str = "scaled") -> TrolleyProtocol:
    """Shortcut trolley trajectory in one call."""
    return trolley_from_alpha(design_alpha(params, task, free_values, basis), params, task)
