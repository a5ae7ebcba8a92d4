"""Box-constrained projected-gradient minimization of the discrete functional,
with optional mean constraint and seeded multistart."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .energy import energy_gradient, total_energy
from .errors import LineSearchFailure, ValidationError
from .model import ModelParams
from .profiles import GridProfile

__all__ = [
    "MinimizeOptions",
    "MinimizeResult",
    "minimize_energy",
    "minimize_with_mean_constraint",
    "multistart",
    "restart_rng",
]


@dataclass(frozen=True)
class MinimizeOptions:
    max_iters: int = 20000
    grad_tol: float = 1e-6
    step0: float = 1.0
    backtrack: float = 0.5
    step_grow: float = 1.3
    min_step: float = 1e-16
    restarts: int = 1
    seed: int = 0
    armijo: float = 1e-4

    def __post_init__(self):
        if self.grad_tol <= 0 or self.step0 <= 0:
            raise ValidationError("grad_tol and step0 must be positive")
        if not (0.0 < self.backtrack < 1.0):
            raise ValidationError("backtrack factor must lie in (0, 1)")


@dataclass
class MinimizeResult:
    profile: GridProfile
    energy: float
    grad_norm: float
    iterations: int
    converged: bool
    trace: np.ndarray            # rows: iter, energy, grad_norm, step
    status: str = "ok"

    def breakdown(self, params: ModelParams, gamma: float):
        return total_energy(params, self.profile, gamma)


def _projected_grad_norm(phi, g, tol=1e-12):
    """Sup-norm of the gradient with active box faces masked out."""
    pg = g.copy()
    pg[(phi >= 1.0 - tol) & (g < 0.0)] = 0.0
    pg[(phi <= -1.0 + tol) & (g > 0.0)] = 0.0
    return float(np.max(np.abs(pg))) if pg.size else 0.0


def _mean_slice_grad_norm(phi, g, tol=1e-12):
    """Stationarity residual on {mean = const} intersected with the box.

    On the slice the multiplier is the gradient mean over free samples;
    box-active samples only count when they push off their face.
    """
    free = np.abs(phi) < 1.0 - tol
    mu = float(g[free].mean()) if np.any(free) else float(g.mean())
    r = g - mu
    r[(phi >= 1.0 - tol) & (r < 0.0)] = 0.0
    r[(phi <= -1.0 + tol) & (r > 0.0)] = 0.0
    return float(np.max(np.abs(r))) if r.size else 0.0


def _project_box(phi):
    return np.clip(phi, -1.0, 1.0)


def _project_mean_box(phi, mean, rounds=100, tol=1e-13):
    """Dykstra projection onto {mean(phi) = mean} intersected with the box."""
    x = phi.copy()
    p = np.zeros_like(x)   # correction for the box step
    q = np.zeros_like(x)
    for _ in range(rounds):
        y = _project_box(x + p)
        p = x + p - y
        x = y + q + (mean - np.mean(y + q))
        q = y + q - x
        if abs(np.mean(_project_box(x)) - mean) < tol and np.all(np.abs(x) <= 1 + 1e-12):
            break
    x = _project_box(x)
    # final exact mean restoration on inactive samples
    for _ in range(50):
        resid = mean - np.mean(x)
        if abs(resid) < 1e-14:
            break
        free = (np.abs(x) < 1.0) | (np.sign(resid) != np.sign(x))
        if not np.any(free):
            break
        x[free] += resid * x.size / np.count_nonzero(free)
        x = _project_box(x)
    return x


def _descend(params: ModelParams, profile: GridProfile, gamma: float,
             options: MinimizeOptions, project, keep_trace: bool = True,
             stationarity=_projected_grad_norm) -> MinimizeResult:
    phi = project(profile.samples.copy())
    prof = profile.with_samples(phi)
    energy = total_energy(params, prof, gamma).total
    step = options.step0
    rows: List[Tuple[float, float, float, float]] = []
    status = "max_iters"
    converged = False
    it = 0
    for it in range(1, options.max_iters + 1):
        g = energy_gradient(params, prof, gamma)
        gnorm = stationarity(phi, g)
        if keep_trace:
            rows.append((it - 1, energy, gnorm, step))
        if gnorm <= options.grad_tol:
            converged = True
            status = "converged"
            break
        accepted = False
        while step >= options.min_step:
            # L2 gradient flow step: g is the discrete functional derivative
            cand = project(phi - step * g)
            cand_prof = prof.with_samples(cand)
            cand_energy = total_energy(params, cand_prof, gamma).total
            decrease = prof.dx * float(np.sum((cand - phi) ** 2)) / max(step, 1e-300)
            if cand_energy <= energy - options.armijo * decrease:
                accepted = True
                break
            step *= options.backtrack
        if not accepted:
            status = "line_search_failure"
            break
        phi, prof, energy = cand, cand_prof, cand_energy
        step = min(step * options.step_grow, 1e6)
    g = energy_gradient(params, prof, gamma)
    gnorm = stationarity(phi, g)
    if keep_trace:
        rows.append((it, energy, gnorm, step))
    result = MinimizeResult(profile=prof, energy=energy, grad_norm=gnorm,
                            iterations=it, converged=converged,
                            trace=np.array(rows), status=status)
    if status == "line_search_failure":
        raise LineSearchFailure("backtracking underflowed", result=result)
    return result


def minimize_energy(params: ModelParams, init: GridProfile,
                    gamma: Optional[float] = None,
                    options: Optional[MinimizeOptions] = None
                    ) -> MinimizeResult:
    """Projected gradient descent with Armijo backtracking on [-1, 1]^N.

    Energy decreases monotonically along accepted steps; stops when the
    projected-gradient sup-norm reaches grad_tol or max_iters is exhausted.
    """
    gamma = params.gamma if gamma is None else gamma
    options = MinimizeOptions() if options is None else options
    return _descend(params, init, gamma, options, _project_box)


def minimize_with_mean_constraint(params: ModelParams, length: float,
                                  mean: float, bc: str = "open",
                                  gamma: float = 0.0,
                                  options: Optional[MinimizeOptions] = None,
                                  dx: float = 1.0 / 32.0,
                                  init: Optional[GridProfile] = None
                                  ) -> MinimizeResult:
    """Gradient descent on the slice {<phi> = mean} intersected with the box."""
    if abs(mean) > 1.0:
        raise ValidationError("|mean| must not exceed 1")
    options = MinimizeOptions() if options is None else options
    if init is None:
        init = GridProfile.constant(mean, L=length, dx=dx, bc=bc)
    project = lambda phi: _project_mean_box(phi, mean)
    return _descend(params, init, gamma, options, project,
                    stationarity=_mean_slice_grad_norm)


def restart_rng(seed: int, restart_index: int) -> np.random.Generator:
    """Counter-based generator split: one independent stream per restart."""
    key = np.array([seed, restart_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def multistart(params: ModelParams, gamma: float, L: float, bc: str,
               n_starts: int, options: Optional[MinimizeOptions] = None,
               dx: float = 1.0 / 16.0,
               init: Optional[GridProfile] = None):
    """Best of ``n_starts`` seeded random initializations.

    Deterministic given options.seed; returns (best result, table of final
    energies). When ``init`` is given it is used for restart 0.
    """
    if n_starts < 1:
        raise ValidationError("n_starts must be at least 1")
    options = MinimizeOptions() if options is None else options
    n = int(round(L / dx))
    best = None
    table = []
    for k in range(n_starts):
        if k == 0 and init is not None:
            start = init
        else:
            rng = restart_rng(options.seed, k)
            start = GridProfile(L=n * dx, dx=dx,
                                samples=rng.uniform(-1.0, 1.0, n), bc=bc)
        try:
            res = _descend(params, start, gamma, options, _project_box,
                           keep_trace=False)
        except LineSearchFailure as err:
            res = err.result
        table.append((k, res.energy, res.grad_norm, res.converged))
        if best is None or res.energy < best.energy:
            best = res
    return best, table
