"""Nelder-Mead downhill simplex minimisation."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass
class SimplexResult:
    x: np.ndarray
    fun: float
    converged: bool
    iterations: int
    evaluations: int
    message: str


def nelder_mead(func: Callable[[np.ndarray], float], x0, step, *, xtol=1e-8, ftarget=1e-8,
                max_iter=500, reflect=1.0, expand=2.0, contract=0.5, shrink=0.5) -> SimplexResult:
    """Minimise ``func`` starting from ``x0``.

    ``step`` (scalar or per-coordinate) sets the initial simplex edge along
    each axis.  Stops when the simplex diameter falls below ``xtol`` relative
    to the size of the best vertex, when the best value drops below
    ``ftarget``, or after ``max_iter`` iterations (``converged=False``).
    """
    x0 = np.asarray(x0, dtype=float).ravel()
    n = x0.size
    steps = np.broadcast_to(np.asarray(step, dtype=float), (n,))
    nfev = 0

    def f(x):
        nonlocal nfev
        nfev += 1
        value = float(func(x))
        return value if np.isfinite(value) else np.inf

    simplex = np.vstack([x0] + [x0 + steps[i] * np.eye(n)[i] for i in range(n)])
    values = np.array([f(v) for v in simplex])

    for it in range(1, max_iter + 1):
        order = np.argsort(values, kind="stable")
        simplex, values = simplex[order], values[order]
        best = simplex[0]
        if values[0] < ftarget:
            return SimplexResult(best.copy(), values[0], True, it - 1, nfev, "objective below target")
        diameter = np.max(np.abs(simplex[1:] - best)) if n else 0.0
        if diameter <= xtol * max(1.0, np.max(np.abs(best), initial=0.0)):
            return SimplexResult(best.copy(), values[0], True, it - 1, nfev, "simplex collapsed")

        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]
        xr = centroid + reflect * (centroid - worst)
        fr = f(xr)
        if fr < values[0]:
            xe = centroid + expand * (xr - centroid)
            fe = f(xe)
            simplex[-1], values[-1] = (xe, fe) if fe < fr else (xr, fr)
            continue
        if fr < values[-2]:
            simplex[-1], values[-1] = xr, fr
            continue
        if fr < values[-1]:
            xc = centroid + contract * (xr - centroid)
            fc = f(xc)
            if fc <= fr:
                simplex[-1], values[-1] = xc, fc
                continue
        else:
            xc = centroid + contract * (worst - centroid)
            fc = f(xc)
            if fc < values[-1]:
                simplex[-1], values[-1] = xc, fc
                continue
        simplex[1:] = best + shrink * (simplex[1:] - best)
        values[1:] = [f(v) for v in simplex[1:]]

    order = np.argsort(values, kind="stable")
    return SimplexResult(simplex[order[0]].copy(), values[order[0]], False, max_iter, nfev,
                         "maximum iterations reached")
