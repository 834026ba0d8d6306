"""Scenario runners behind the CLI subcommands.

Each runner turns a :class:`ScenarioConfig` into a :class:`Report`: CSV
header and rows, summary lines for the terminal, and a plot description.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import ConfigError, ScenarioConfig
from .energy import consumption, peak_power_bounds, power_trace
from .largeangle import excitation_scan, optimize_excitation, reference_kinetic_energy
from .model import exact_energy, harmonic_energy, integrate
from .optimal import (minimal_consumption_bound, optimal_protocol, short_time_asymptote,
                      simple_lower_bound, verify_pmp)
from .plotting import PlotSpec
from .sta import design_alpha, sta_protocol, to_physical, trolley_from_alpha

TRACE_HEADER = ["t", "x", "xdot", "xddot", "theta", "thetadot", "q", "qdot",
                "E_load", "E_total", "P_load", "P_total"]
ENERGY_HEADER = ["M", "gamma", "eta", "E_plus", "E_minus", "E_total", "bound_simple", "bound_tight"]
SCAN_HEADER = ["theta_i_deg", "dE", "dE_over_K0"]
DESIGN_HEADER = ["t", "x", "xdot", "xddot", "alpha", "xi"]
OPTIMAL_HEADER = ["t", "x_op", "xdot_op", "xddot_op", "xi_op", "x_sta", "xi_sta"]
BOUNDS_HEADER = ["t_f", "omega_tf", "bound_simple", "bound_tight", "short_time", "peak_trolley",
                 "peak_friction", "peak_load_long", "peak_load_short", "regime_ratio"]


@dataclass
class Report:
    header: list
    rows: list
    summary: list
    plot: PlotSpec | None = None
    ok: bool = True


def _free_values(cfg: ScenarioConfig) -> np.ndarray:
    if cfg.free_basis == "physical":
        return np.asarray(cfg.free_values, dtype=float) * cfg.t_f ** (8 + np.arange(len(cfg.free_values)))
    return np.asarray(cfg.free_values, dtype=float)


def build_protocol(cfg: ScenarioConfig):
    if cfg.protocol == "oct":
        return optimal_protocol(cfg.params(), cfg.task()).protocol
    return sta_protocol(cfg.params(), cfg.task(), _free_values(cfg))


def _sweep_points(cfg: ScenarioConfig, allowed, required=()):
    for name in required:
        if name not in cfg.sweeps:
            raise ConfigError(f"this command needs sweep_{name}", key=f"sweep_{name}")
    for name in cfg.sweeps:
        if name not in allowed:
            raise ConfigError(f"sweep over {name!r} not supported here (allowed: {', '.join(allowed)})",
                              key=f"sweep_{name}")
    names = [n for n in allowed if n in cfg.sweeps]
    axes = [cfg.sweeps[n].values() for n in names]
    points = []
    for combo in itertools.product(*axes):
        points.append(cfg.with_values(**{n: float(v) for n, v in zip(names, combo)}))
    return names, points


def _pmap(func, items, jobs):
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(func, items))
    return [func(item) for item in items]


def _thin(n_rows, samples):
    if not samples or samples >= n_rows:
        return slice(None)
    return slice(None, None, max(1, (n_rows - 1) // (samples - 1)))


def _simulate(cfg: ScenarioConfig):
    trace = integrate(build_protocol(cfg), cfg.params(), cfg.initial_state(), cfg.model, cfg.steps)
    return trace, power_trace(trace)


def run_design(cfg: ScenarioConfig, jobs: int = 1) -> Report:
    params, task = cfg.params(), cfg.task()
    t = np.linspace(0.0, task.t_f, cfg.samples or 401)
    if cfg.protocol == "sta":
        ansatz = design_alpha(params, task, _free_values(cfg))
        protocol = trolley_from_alpha(ansatz, params, task)
        alpha = ansatz.alpha(t)
        xi = alpha + protocol.x(t)
        summary = [f"polynomial shortcut, degree {ansatz.degree} in alpha",
                   "alpha coefficients (tau basis, m): " + " ".join(f"{c:.8g}" for c in ansatz.scaled_coeffs),
                   "alpha coefficients (physical t):   " + " ".join(f"{c:.8g}" for c in ansatz.coeffs),
                   f"design residual: {ansatz.residual:.3g}"]
    else:
        sol = optimal_protocol(params, task)
        protocol = sol.protocol
        xi = sol.xi(t)
        alpha = xi - protocol.x(t)
        summary = ["minimal-consumption protocol",
                   f"c1={sol.c1:.10g} c2={sol.c2:.10g} c3={sol.c3:.10g} c4={sol.c4:.10g} (k0={sol.k0:g})",
                   f"velocity jumps: start {protocol.jump_start:.10g} m/s, end {protocol.jump_end:.10g} m/s"]
    rows = list(zip(t, protocol.x(t), protocol.xdot(t), protocol.xddot(t), alpha, xi))
    plot = PlotSpec("line", "t", ("x", "xi", "alpha"), "t (s)", "position (m)", f"{cfg.protocol} design")
    return Report(DESIGN_HEADER, rows, summary, plot)


def run_simulate(cfg: ScenarioConfig, jobs: int = 1) -> Report:
    trace, power = _simulate(cfg)
    cols = (trace.t, trace.x, trace.xdot, trace.xddot, trace.theta, trace.theta_dot, trace.q,
            trace.q_dot, trace.E_load, trace.E_total, power.P_load, power.P_total)
    sl = _thin(trace.t.size, cfg.samples)
    rows = list(zip(*(c[sl] for c in cols)))
    rel = abs(trace.E_end - trace.E_start) / max(abs(trace.E_start), 1e-300)
    summary = [f"{cfg.model} model, {cfg.protocol} protocol, {trace.t.size - 1} RK4 steps",
               f"E(0-) = {trace.E_start:.10g} J, E(t_f+) = {trace.E_end:.10g} J, |dE|/E0 = {rel:.3g}",
               f"max |theta| = {math.degrees(np.nanmax(np.abs(trace.theta))):.6g} deg"]
    plot = PlotSpec("line", "t", ("q", "x"), "t (s)", "m", "load deviation and trolley position")
    return Report(TRACE_HEADER, rows, summary, plot)


def _power_point(cfg):
    _, power = _simulate(cfg)
    return power


def run_power(cfg: ScenarioConfig, jobs: int = 1) -> Report:
    names, points = _sweep_points(cfg, ("M", "gamma", "t_f", "m"))
    if len(names) > 1:
        raise ConfigError("power supports at most one sweep axis", key=f"sweep_{names[1]}")
    traces = _pmap(_power_point, points, jobs)
    header = names + ["t", "P_load", "P_total", "E_load", "E_total"]
    rows, summary = [], []
    for point, pw in zip(points, traces):
        sl = _thin(pw.t.size, cfg.samples)
        lead = [getattr(point, n) for n in names]
        for r in zip(pw.t[sl], pw.P_load[sl], pw.P_total[sl], pw.E_load[sl], pw.E_total[sl]):
            rows.append((*lead, *r))
        tag = ", ".join(f"{n}={getattr(point, n):g}" for n in names) or "base"
        summary.append(f"{tag}: peak |P_total| = {np.abs(pw.P_total).max():.6g} W, "
                       f"peak |P_load| = {np.abs(pw.P_load).max():.6g} W, "
                       f"jump work {pw.jump_work_start:.6g}/{pw.jump_work_end:.6g} J")
    plot = PlotSpec("line", "t", ("P_total", "P_load"), "t (s)", "power (W)", f"{cfg.model} power",
                    group=names[0] if names else None)
    return Report(header, rows, summary, plot)


def _energy_point(cfg):
    _, power = _simulate(cfg)
    rep = consumption(power, cfg.eta)
    return (cfg.M, cfg.gamma, cfg.eta, rep.e_plus, rep.e_minus, rep.e_total,
            rep.bound_simple, rep.bound_tight)


def run_consumption(cfg: ScenarioConfig, jobs: int = 1) -> Report:
    _, points = _sweep_points(cfg, ("M", "gamma", "eta"))
    rows = _pmap(_energy_point, points, jobs)
    summary = [f"M={r[0]:g} gamma={r[1]:g} eta={r[2]:g}: E+={r[3]:.8g} E-={r[4]:.8g} "
               f"E={r[5]:.8g} J (bounds {r[6]:.6g}, {r[7]:.6g})" for r in rows]
    return Report(ENERGY_HEADER, rows, summary,
                  PlotSpec("line", "eta", ("E_total",), "eta", "consumption (J)", "energy consumption"))


def run_energy_map(cfg: ScenarioConfig, jobs: int = 1) -> Report:
    _, points = _sweep_points(cfg, ("M", "gamma"), required=("M", "gamma"))
    rows = _pmap(_energy_point, points, jobs)
    e = np.array([r[5] for r in rows])
    summary = [f"{len(rows)} grid points at eta={cfg.eta:g}",
               f"consumption range: {e.min():.8g} .. {e.max():.8g} J"]
    plot = PlotSpec("contour", "M", ("E_total",), "M (kg)", "gamma (kg/s)",
                    f"consumption, eta={cfg.eta:g}", extra={"y": "gamma"})
    return Report(ENERGY_HEADER, rows, summary, plot)


def run_optimal(cfg: ScenarioConfig, jobs: int = 1) -> Report:
    params, task = cfg.params(), cfg.task()
    sol = optimal_protocol(params, task)
    ansatz = design_alpha(params, task, _free_values(cfg))
    sta = trolley_from_alpha(ansatz, params, task)
    t = np.linspace(0.0, task.t_f, cfg.samples or 401)
    p = sol.protocol
    rows = list(zip(t, p.x(t), p.xdot(t), p.xddot(t), sol.xi(t), sta.x(t), ansatz.alpha(t) + sta.x(t)))
    trace = integrate(p, params, cfg.initial_state(), "harmonic", cfg.steps)
    rep = consumption(power_trace(trace), cfg.eta)
    pmp = verify_pmp(sol, params, task)
    qx = trace.q * trace.xdot
    summary = [
        f"c1={sol.c1:.10g} c2={sol.c2:.10g} c3={sol.c3:.10g} c4={sol.c4:.10g} (k0={sol.k0:g})",
        f"edge velocity x'(0+) = x'(t_f-) = {p.jump_start:.10g} m/s",
        f"minimal consumption bound = {rep.bound_tight:.10g} J (simple bound {rep.bound_simple:.10g} J)",
        f"simulated consumption at eta={cfg.eta:g}: {rep.e_total:.10g} J "
        f"(E+={rep.e_plus:.8g}, E-={rep.e_minus:.8g})",
        f"int q x' dt = {np.trapezoid(qx, trace.t):.3g} (scale {np.trapezoid(np.abs(qx), trace.t):.3g})",
        f"E(0-) = {trace.E_start:.6g} J, E(t_f+) = {trace.E_end:.6g} J",
        f"PMP: Hamiltonian drift {pmp.hamiltonian_drift:.3g}, stationarity {pmp.stationarity_residual:.3g}, "
        f"endpoints {pmp.max_endpoint_residual:.3g}",
    ]
    plot = PlotSpec("line", "t", ("x_op", "x_sta", "xi_op", "xi_sta"), "t (s)", "position (m)",
                    "optimal vs polynomial shortcut")
    return Report(OPTIMAL_HEADER, rows, summary, plot)


def _initial_energy(cfg: ScenarioConfig) -> float:
    s, params = cfg.initial_state(), cfg.params()
    if cfg.theta0_deg is not None:
        return float(exact_energy(s.theta, s.theta_dot, 0.0, params))
    return float(harmonic_energy(s.q, s.q_dot, 0.0, params))


def run_bounds(cfg: ScenarioConfig, jobs: int = 1) -> Report:
    _, points = _sweep_points(cfg, ("t_f",))
    E0 = _initial_energy(cfg)
    rows = []
    for point in points:
        params, task = point.params(), point.task()
        peaks = peak_power_bounds(params, task, E0)
        rows.append((task.t_f, params.omega * task.t_f, simple_lower_bound(params, task),
                     minimal_consumption_bound(params, task), short_time_asymptote(params, task),
                     peaks.trolley, peaks.friction, peaks.load_long_time, peaks.load_short_time,
                     peaks.regime_ratio))
    summary = [f"t_f={r[0]:g} s (omega t_f={r[1]:.4g}): consumption >= {r[3]:.8g} J "
               f"(simple {r[2]:.8g}, short-time {r[4]:.6g}); peak power bounds "
               f"M {r[5]:.4g}, gamma {r[6]:.4g}, m long {r[7]:.4g}, m short {r[8]:.4g} W" for r in rows]
    plot = PlotSpec("line", "t_f", ("bound_simple", "bound_tight"), "t_f (s)", "energy (J)",
                    "consumption bounds")
    return Report(BOUNDS_HEADER, rows, summary, plot)


def _scan_rows(results):
    return [(r.theta_i, r.dE, r.dE_scaled) for r in results]


def _scan_grid(cfg):
    lo, hi, count = cfg.scan_deg
    return np.linspace(lo, hi, int(count))


def run_excitation_scan(cfg: ScenarioConfig, jobs: int = 1) -> Report:
    params, task = cfg.params(), cfg.task()
    results = excitation_scan(_free_values(cfg), _scan_grid(cfg), params, task, cfg.steps)
    K0 = reference_kinetic_energy(params, task)
    bad = [r.theta_i for r in results if not r.valid]
    summary = [f"K0 = {K0:.8g} J, free values (tau basis) = {list(_free_values(cfg))}",
               f"max dE/K0 = {max(r.dE_scaled for r in results):.6g}"]
    if bad:
        summary.append(f"exact model left its valid range at theta_i = {bad}")
    plot = PlotSpec("line", "theta_i_deg", ("dE_over_K0",), "initial angle (deg)", "dE / K0",
                    "final excitation")
    return Report(SCAN_HEADER, _scan_rows(results), summary, plot, ok=not bad)


def run_optimize_angles(cfg: ScenarioConfig, jobs: int = 1) -> Report:
    if not cfg.theta_targets_deg:
        raise ConfigError("optimize-angles needs theta_targets_deg", key="theta_targets_deg")
    params, task = cfg.params(), cfg.task()
    opt = optimize_excitation(cfg.theta_targets_deg, params, task, init_scale=cfg.init_scale,
                              steps=cfg.steps)
    results = excitation_scan(opt.free_values, _scan_grid(cfg), params, task, cfg.steps)
    summary = [
        f"targets {opt.theta_targets} deg: {opt.message} after {opt.iterations} iterations "
        f"({opt.evaluations} evaluations)",
        "free values (tau basis, m): " + " ".join(f"{v:.10g}" for v in opt.free_values),
        "free values (physical t):   " + " ".join(f"{v:.10g}" for v in to_physical(opt.free_values, task.t_f)),
    ] + [f"dE/K0 at {e.theta_i:g} deg = {e.dE_scaled:.3g}" for e in opt.excitations]
    if not opt.success:
        summary.append("WARNING: excitation target 1e-3 K0 not reached")
    plot = PlotSpec("line", "theta_i_deg", ("dE_over_K0",), "initial angle (deg)", "dE / K0",
                    f"optimised for {opt.theta_targets} deg")
    return Report(SCAN_HEADER, _scan_rows(results), summary, plot, ok=opt.success)


RUNNERS = {
    "design": run_design,
    "simulate": run_simulate,
    "power": run_power,
    "consumption": run_consumption,
    "energy-map": run_energy_map,
    "optimal": run_optimal,
    "bounds": run_bounds,
    "excitation-scan": run_excitation_scan,
    "optimize-angles": run_optimize_angles,
}
