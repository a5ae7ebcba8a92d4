"""Certificate suite: every certified inequality in one runnable bundle."""

from __future__ import annotations

from typing import List, Optional

import numpy as np

from .certificates import Certificate, comparison_certificate
from .coarsegrain import CoarseGrainConfig, lower_bound_certificate
from .energy import energy_gradient, tilde_energy, total_energy
from .instanton import build_trial_profile, solve_instanton
from .minimize import restart_rng
from .model import (ModelParams, eval_F, eval_F_double_prime, eval_tilde_F,
                    rp_spectrum_check)
from .profiles import GridProfile, StepProfile
from .sharp import (cell_specific_energy, chessboard_lower_bound,
                    check_eh_bounds, energy_per_length, optimal_h)

__all__ = ["run_certificates", "random_in_k_step", "appendix_well_certificates"]


def random_in_k_step(rng: np.random.Generator, L: float, m_beta: float,
                     m_bar: float, mean_spacing: float) -> StepProfile:
    """Random step profile with |values| >= m_bar and random signs."""
    edges = [0.0]
    while edges[-1] < L:
        edges.append(edges[-1] + rng.uniform(0.4, 1.6) * mean_spacing)
    edges[-1] = L
    if len(edges) < 3:
        edges = [0.0, L / 2.0, L]
    n = len(edges) - 1
    mags = np.clip(m_beta + 0.2 * rng.standard_normal(n), m_bar, 1.0)
    signs = rng.choice([-1.0, 1.0], size=n)
    return StepProfile(breakpoints=np.array(edges), values=signs * mags,
                       m_bar=m_bar)


def appendix_well_certificates(params: ModelParams) -> List[Certificate]:
    """Pointwise well inequalities on a dense magnetization grid."""
    t = np.linspace(-1.0, 1.0, 10_000)
    F = eval_F(t, params)
    Ft = eval_tilde_F(t, params)
    certs = [comparison_certificate(
        "tilde_F_half_F", float(np.min(F / 2.0 - Ft)), 0.0,
        params={"grid": t.size}, tol=1e-14)]
    # curvature gap at the well bottom, by central differences
    h = 1e-5
    m = params.m_beta
    fpp = (eval_F(m + h, params) - 2.0 * eval_F(m, params)
           + eval_F(m - h, params)) / h ** 2
    certs.append(comparison_certificate(
        "curvature_gap", float(fpp), 2.0 * params.f0 / m ** 2,
        params={"fd_step": h, "analytic": eval_F_double_prime(m, params)}))
    quad = params.f0 / m ** 2 * (np.abs(t) - m) ** 2
    certs.append(comparison_certificate(
        "F_above_quadratic", float(np.min(F - quad)), 0.0,
        params={"grid": t.size}, tol=1e-12))
    return certs


def run_certificates(params: ModelParams, gamma: Optional[float] = None,
                     seed: int = 0, n_step_profiles: int = 20,
                     fast: bool = False) -> List[Certificate]:
    """Assemble and evaluate the full suite; never raises on failure.

    Solves the instanton for an independent surface tension; a configured
    ``params.tau`` is kept for the effective-functional side so that an
    inconsistent value is caught by the cell-energy identity.
    """
    gamma = params.gamma if gamma is None else gamma
    certs: List[Certificate] = []
    certs.append(rp_spectrum_check(params.measure,
                                   np.concatenate([[0.0], np.geomspace(1e-3, 1e3, 25)])))
    certs.extend(appendix_well_certificates(params))
    inst = solve_instanton(params, half_width=20.0 if fast else 30.0,
                           dx=1.0 / 32.0 if fast else 1.0 / 64.0)
    tau_solved = inst.tau
    tau_used = params.tau if params.tau is not None else tau_solved
    p_used = params.with_tau(tau_used)
    p_solved = params.with_tau(tau_solved)
    certs.append(comparison_certificate(
        "tau_positive", tau_solved, 0.0, params={"tau": tau_solved}))
    # cell-energy identity: effective side with the configured tau, closed
    # form with the solved tau; breaks when the configuration lies about tau
    h_star, e_star, _, _ = optimal_h(p_solved, gamma)
    worst = 0.0
    for fac in (0.5, 1.0, 2.0, 5.0):
        h = fac * h_star
        cell = StepProfile(breakpoints=np.array([0.0, h]),
                           values=np.array([params.m_beta]))
        lhs = cell_specific_energy(p_used, cell, gamma=gamma)
        rhs = energy_per_length(p_solved, h, gamma)
        worst = max(worst, abs(lhs - rhs))
    certs.append(Certificate(
        name="cell_energy_identity", lhs=worst, rhs=1e-8, slack=1e-8 - worst,
        passed=bool(worst <= 1e-8),
        params={"h_star": h_star, "tau_used": tau_used,
                "tau_solved": tau_solved}))
    certs.append(check_eh_bounds(p_solved, gamma))
    # gradient versus central differences on a seeded random profile
    rng = restart_rng(seed, 9001)
    n, dx = (128, 1.0 / 8.0) if fast else (512, 1.0 / 32.0)
    prof = GridProfile(L=n * dx, dx=dx,
                       samples=rng.uniform(-0.95, 0.95, n), bc="open")
    g = energy_gradient(p_solved, prof, gamma)
    h_fd = 1e-6
    idx = rng.choice(n, 24, replace=False)
    fd = np.empty(idx.size)
    for j, i in enumerate(idx):
        up = prof.samples.copy(); up[i] += h_fd
        dn = prof.samples.copy(); dn[i] -= h_fd
        fd[j] = (total_energy(p_solved, prof.with_samples(up), gamma).total
                 - total_energy(p_solved, prof.with_samples(dn), gamma).total
                 ) / (2.0 * h_fd * dx)
    scale = max(float(np.max(np.abs(fd))), 1e-10)
    rel = float(np.max(np.abs(g[idx] - fd))) / scale
    certs.append(Certificate(
        name="gradient_vs_fd", lhs=rel, rhs=1e-6, slack=1e-6 - rel,
        passed=bool(rel <= 1e-6), params={"n": n, "step": h_fd}))
    # chessboard and RP lower bounds on a random in-K corpus
    cfg = CoarseGrainConfig()
    m_bar = cfg.m_bar(params.m_beta, gamma)
    L = (4.0 if fast else 20.0) * h_star
    worst_cb = np.inf
    worst_c000 = np.inf
    for k in range(2 if fast else n_step_profiles):
        rng_k = restart_rng(seed, 100 + k)
        step = random_in_k_step(rng_k, L, params.m_beta, m_bar, h_star)
        e_tilde = tilde_energy(p_used, step, gamma, bc="open")
        bound, _ = chessboard_lower_bound(p_used, step, gamma, bc="open")
        worst_cb = min(worst_cb, e_tilde - bound)
        h_j = step.interval_lengths()
        rhs = (L * e_star
               + 0.5 * sum(h * (energy_per_length(p_solved, h, gamma) - e_star)
                           for h in h_j)
               + params.f0 / (4.0 * params.m_beta ** 2)
               * float(np.sum(step.widths
                              * (np.abs(step.values) - params.m_beta) ** 2)))
        worst_c000 = min(worst_c000, e_tilde - rhs)
    certs.append(Certificate(
        name="chessboard_lower_bound", lhs=worst_cb, rhs=-1e-9 * L,
        slack=worst_cb + 1e-9 * L, passed=bool(worst_cb >= -1e-9 * L),
        params={"L": L, "n_profiles": n_step_profiles}))
    allowance = 10.0 * gamma ** (4.0 / 3.0) * L
    certs.append(Certificate(
        name="rp_lower_bound_c000", lhs=worst_c000, rhs=-allowance,
        slack=worst_c000 + allowance, passed=bool(worst_c000 >= -allowance),
        params={"L": L, "C": 10.0}))
    # coarse-graining certificate on the trial profile
    h_cell = round(h_star / inst.dx) * inst.dx
    trial = build_trial_profile(h_cell, (4 if fast else 8) * h_cell, inst,
                                bc="periodic")
    certs.append(lower_bound_certificate(p_used, trial, gamma, cfg))
    return certs
