"""Energy functionals on grid and step profiles, and the analytic gradient.

The double integrals are midpoint sums. The exchange term is a banded sum
over the unit support of J; the long-range term is evaluated per exponential
atom with two-pass linear recursions (O(N)), cyclically closed for periodic
boundary conditions. Step-profile dipole energies use closed-form pair
integrals instead of any grid.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.signal import lfilter

from .certificates import fmt17
from .errors import AlignmentError, MissingBoundaryData, ValidationError
from .model import (ModelParams, eval_F, eval_F_prime, eval_tilde_F)
from .profiles import GridProfile, StepProfile

__all__ = [
    "EnergyBreakdown",
    "short_range_energy",
    "total_energy",
    "dipole_energy",
    "dipole_energy_direct",
    "tilde_energy",
    "energy_gradient",
    "step_dipole_energy",
    "DIPOLE_CUTOFF",
]

# gamma * distance beyond which exp(-gamma alpha d) < 1e-20 for alpha >= 1;
# cross terms are truncated there (exact to machine precision).
DIPOLE_CUTOFF = 46.0


@dataclass(frozen=True)
class EnergyBreakdown:
    local: float
    exchange: float
    dipole: float
    boundary: float

    @property
    def total(self) -> float:
        return self.local + self.exchange + self.dipole + self.boundary

    def to_dict(self) -> dict:
        return {"local": fmt17(self.local), "exchange": fmt17(self.exchange),
                "dipole": fmt17(self.dipole), "boundary": fmt17(self.boundary),
                "total": fmt17(self.total)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


# ---------------------------------------------------------------------------
# exponential convolutions

def _exp_conv_open(phi: np.ndarray, rho: float) -> np.ndarray:
    """A_i = sum_j rho^{|i-j|} phi_j via two linear recursions."""
    if rho == 0.0:
        return phi.copy()
    # left pass: l_i = rho (l_{i-1} + phi_{i-1})
    u = lfilter([1.0], [1.0, -rho], phi)
    left = np.empty_like(phi)
    left[0] = 0.0
    left[1:] = rho * u[:-1]
    # right pass, mirrored
    ur = lfilter([1.0], [1.0, -rho], phi[::-1])
    right = np.empty_like(phi)
    right[-1] = 0.0
    right[:-1] = (rho * ur[:-1])[::-1]
    return phi + left + right


def _exp_conv_cyclic(phi: np.ndarray, rho: float) -> np.ndarray:
    """T_i = sum_j sum_n rho^{|i-j+nN|} phi_j on the N-cycle.

    Open-chain recursions plus the geometric closure of the wrap-around
    contribution; all factors decay, so the closure is stable.
    """
    n = phi.size
    qn = rho ** n
    if rho == 0.0:
        return phi.copy()
    u = lfilter([1.0], [1.0, -rho], phi)          # u_i = sum_{j<=i} rho^{i-j} phi_j
    l_open = np.empty_like(phi)
    l_open[0] = 0.0
    l_open[1:] = rho * u[:-1]
    l0 = rho * (l_open[-1] + phi[-1]) / (1.0 - qn)
    left = l_open + l0 * rho ** np.arange(n)
    ur = lfilter([1.0], [1.0, -rho], phi[::-1])
    r_open = np.empty_like(phi)
    r_open[-1] = 0.0
    r_open[:-1] = (rho * ur[:-1])[::-1]
    r_last = rho * (r_open[0] + phi[0]) / (1.0 - qn)
    right = r_open + r_last * rho ** np.arange(n - 1, -1, -1)
    return phi + left + right


# ---------------------------------------------------------------------------
# boundary-condition plumbing

def _out_reach(params: ModelParams, gamma: float) -> float:
    """Distance over which out-of-domain data matters (J range or v cutoff)."""
    if gamma <= 0.0:
        return 1.0
    return max(1.0, DIPOLE_CUTOFF / (gamma * params.measure.alpha_min))


def _neumann_extension(samples: np.ndarray, n_out: int):
    """Reflected samples and their source indices for one side.

    For the right side of [0, L]: position L + (j+1/2)dx maps to the
    repeated-reflection source index; pattern period is 2N.
    """
    n = samples.size
    j = np.arange(n_out)
    m = j % (2 * n)
    src = np.where(m < n, n - 1 - m, m - n)
    return samples[src], src


def _bc_out_arrays(profile: GridProfile, params: ModelParams, gamma: float):
    """(out_left, src_left, out_right, src_right) sample arrays.

    ``src`` arrays map out-samples back to in-domain sample indices for
    boundary conditions whose extension depends on the profile itself
    (neumann); they are None otherwise.
    """
    n_out = int(np.ceil(_out_reach(params, gamma) / profile.dx))
    bc = profile.bc
    if bc == "open" or bc == "periodic":
        return None, None, None, None
    if bc in ("plus", "minus"):
        val = params.m_beta if bc == "plus" else -params.m_beta
        arr = np.full(n_out, val)
        return arr, None, arr, None
    if bc == "neumann":
        right, src_r = _neumann_extension(profile.samples, n_out)
        # left of 0: position -(j+1/2)dx reflects to index j, then onward
        left_src_raw = np.arange(n_out)
        m = left_src_raw % (2 * profile.n)
        src_l = np.where(m < profile.n, m, 2 * profile.n - 1 - m)
        return profile.samples[src_l], src_l, right, src_r
    if bc == "custom":
        if profile.out_left is None or profile.out_right is None:
            raise MissingBoundaryData("custom bc requires out_left/out_right")
        if profile.out_left.size < n_out or profile.out_right.size < n_out:
            raise MissingBoundaryData(
                f"custom bc needs {n_out} out samples per side "
                f"(reach {n_out * profile.dx:.3g}), got "
                f"{profile.out_left.size}/{profile.out_right.size}")
        return (profile.out_left[:n_out], None,
                profile.out_right[:n_out], None)
    raise ValidationError(f"unhandled bc {bc!r}")


# ---------------------------------------------------------------------------
# short-range (gamma = 0) energy

def _exchange_banded(samples: np.ndarray, jband: np.ndarray, dx: float) -> float:
    """(1/4) double sum of J(x-y)(phi(x)-phi(y))^2 over one interval."""
    acc = 0.0
    for k, jk in enumerate(jband, start=1):
        if jk == 0.0 or k >= samples.size:
            continue
        d = samples[k:] - samples[:-k]
        acc += jk * float(d @ d)
    return 0.5 * dx * dx * acc


def short_range_energy(params: ModelParams, profile: GridProfile,
                       interval: Optional[Tuple[float, float]] = None) -> float:
    """Internal energy of the interval: local term plus exchange, open ends."""
    if interval is None:
        seg = profile.samples
    else:
        a, b = interval
        ia = a / profile.dx
        ib = b / profile.dx
        if not (abs(ia - round(ia)) < 1e-6 and abs(ib - round(ib)) < 1e-6):
            raise AlignmentError(f"interval ({a}, {b}) not grid aligned")
        seg = profile.samples[int(round(ia)):int(round(ib))]
    if seg.size == 0:
        return 0.0
    local = profile.dx * float(np.sum(eval_F(seg, params)))
    jband = params.kernel.band(profile.dx)
    return local + _exchange_banded(seg, jband, profile.dx)


# ---------------------------------------------------------------------------
# dipole energy on grids

def dipole_energy(params: ModelParams, profile: GridProfile,
                  gamma: Optional[float] = None) -> float:
    """(gamma/2) double integral of phi v(gamma(x-y)) phi over [0, L]^2.

    O(N) per atom via the two-pass recursion; ignores boundary conditions.
    """
    gamma = params.gamma if gamma is None else gamma
    if gamma <= 0.0:
        return 0.0
    phi = profile.samples
    meas = params.measure
    acc = 0.0
    for w, a in meas.atoms:
        rho = np.exp(-gamma * a * profile.dx)
        conv = _exp_conv_open(phi, rho)
        acc += w * float(phi @ conv)
    return 0.5 * gamma * meas.lam * profile.dx ** 2 * acc


def dipole_energy_direct(params: ModelParams, profile: GridProfile,
                         gamma: Optional[float] = None) -> float:
    """O(N^2) reference evaluation of the same midpoint sum."""
    gamma = params.gamma if gamma is None else gamma
    if gamma <= 0.0:
        return 0.0
    x = profile.x
    kern = params.measure.v(gamma * (x[:, None] - x[None, :]))
    return 0.5 * gamma * profile.dx ** 2 * float(
        profile.samples @ kern @ profile.samples)


def _dipole_cyclic(params: ModelParams, profile: GridProfile,
                   gamma: float) -> float:
    phi = profile.samples
    meas = params.measure
    acc = 0.0
    for w, a in meas.atoms:
        rho = np.exp(-gamma * a * profile.dx)
        conv = _exp_conv_cyclic(phi, rho)
        acc += w * float(phi @ conv)
    return 0.5 * gamma * meas.lam * profile.dx ** 2 * acc


# ---------------------------------------------------------------------------
# total energy with boundary conditions

def _cross_terms(params: ModelParams, profile: GridProfile, gamma: float,
                 out_left, out_right) -> float:
    """Remark-style cross energy between [0, L] and fixed outside data."""
    dx = profile.dx
    phi = profile.samples
    jband = params.kernel.band(dx)
    r = jband.size
    acc_j = 0.0
    # J cross term: (1/2) sum over pairs within distance 1 of each end
    if out_left is not None:
        for k in range(1, r + 1):
            # in-sample i pairs with out-sample j when i + j + 1 == k
            for j in range(min(k, out_left.size)):
                i = k - 1 - j
                if i < phi.size and jband[k - 1] != 0.0:
                    acc_j += jband[k - 1] * (phi[i] - out_left[j]) ** 2
    if out_right is not None:
        n = phi.size
        for k in range(1, r + 1):
            for j in range(min(k, out_right.size)):
                i = n - 1 - (k - 1 - j)
                if 0 <= i < n and jband[k - 1] != 0.0:
                    acc_j += jband[k - 1] * (phi[i] - out_right[j]) ** 2
    cross = 0.5 * dx * dx * acc_j
    # v cross term: gamma * sum phi(x) v(gamma(x-y)) phi_out(y), separable
    if gamma > 0.0:
        meas = params.measure
        n = phi.size
        acc_v = 0.0
        for w, a in meas.atoms:
            b = gamma * a
            decay_in_r = np.exp(-b * dx * (n - 1 - np.arange(n) + 0.5))
            decay_in_l = np.exp(-b * dx * (np.arange(n) + 0.5))
            if out_right is not None:
                jj = np.arange(out_right.size)
                decay_out = np.exp(-b * dx * (jj + 0.5))
                acc_v += w * float(phi @ decay_in_r) * float(out_right @ decay_out)
            if out_left is not None:
                jj = np.arange(out_left.size)
                decay_out = np.exp(-b * dx * (jj + 0.5))
                acc_v += w * float(phi @ decay_in_l) * float(out_left @ decay_out)
        cross += gamma * meas.lam * dx * dx * acc_v
    return cross


def total_energy(params: ModelParams, profile: GridProfile,
                 gamma: Optional[float] = None) -> EnergyBreakdown:
    """Full energy under the profile's boundary condition.

    Open bc has zero boundary term. Periodic bc uses the torus kernels
    (geometric closed form for the dipole); the wrap contributions are
    reported as the boundary term. The other bcs add cross terms against the
    constant / reflected / user-supplied extension.
    """
    gamma = params.gamma if gamma is None else gamma
    dx = profile.dx
    phi = profile.samples
    local = dx * float(np.sum(eval_F(phi, params)))
    jband = params.kernel.band(dx)
    exchange = _exchange_banded(phi, jband, dx)
    dip = dipole_energy(params, profile, gamma)
    if profile.bc == "open":
        boundary = 0.0
    elif profile.bc == "periodic":
        n = phi.size
        acc = 0.0
        for k, jk in enumerate(jband, start=1):
            if jk == 0.0 or k >= n:
                continue
            d = phi[np.arange(n)] - phi[(np.arange(n) + k) % n]
            # only the wrapped pairs are new relative to the open sum
            dw = d[n - k:]
            acc += jk * float(dw @ dw)
        exchange_wrap = 0.5 * dx * dx * acc
        dip_wrap = (_dipole_cyclic(params, profile, gamma) - dip) if gamma > 0 else 0.0
        boundary = exchange_wrap + dip_wrap
    else:
        out_l, _, out_r, _ = _bc_out_arrays(profile, params, gamma)
        boundary = _cross_terms(params, profile, gamma, out_l, out_r)
    return EnergyBreakdown(local=local, exchange=exchange, dipole=dip,
                           boundary=boundary)


# ---------------------------------------------------------------------------
# analytic gradient

def energy_gradient(params: ModelParams, profile: GridProfile,
                    gamma: Optional[float] = None) -> np.ndarray:
    """g_i = dE/dphi_i / dx, the discrete first variation.

    Matches central finite differences of ``total_energy``; the neumann case
    differentiates through the reflected extension.
    """
    gamma = params.gamma if gamma is None else gamma
    dx = profile.dx
    phi = profile.samples
    n = phi.size
    g = eval_F_prime(phi, params).astype(float)
    jband = params.kernel.band(dx)
    periodic = profile.bc == "periodic"
    # exchange: dx sum_k J_k [(phi_i - phi_{i+k}) + (phi_i - phi_{i-k})]
    for k, jk in enumerate(jband, start=1):
        if jk == 0.0:
            continue
        if periodic:
            idx = np.arange(n)
            g += dx * jk * (2.0 * phi - phi[(idx + k) % n] - phi[(idx - k) % n])
        else:
            if k >= n:
                continue
            d = phi[:-k] - phi[k:]
            g[:-k] += dx * jk * d
            g[k:] -= dx * jk * d
    # dipole
    if gamma > 0.0:
        meas = params.measure
        for w, a in meas.atoms:
            rho = np.exp(-gamma * a * dx)
            conv = (_exp_conv_cyclic(phi, rho) if periodic
                    else _exp_conv_open(phi, rho))
            g += gamma * meas.lam * dx * w * conv
    # fixed or reflected outside data
    if profile.bc in ("plus", "minus", "neumann", "custom"):
        out_l, src_l, out_r, src_r = _bc_out_arrays(profile, params, gamma)
        _accumulate_bc_gradient(params, profile, gamma, g,
                                out_l, src_l, out_r, src_r)
    return g


def _accumulate_bc_gradient(params, profile, gamma, g,
                            out_l, src_l, out_r, src_r):
    dx = profile.dx
    phi = profile.samples
    n = phi.size
    jband = params.kernel.band(dx)
    r = jband.size
    # J cross terms (direct dependence, plus mirror dependence for neumann)
    for k in range(1, r + 1):
        jk = jband[k - 1]
        if jk == 0.0:
            continue
        for j in range(k):
            i_l = k - 1 - j
            if out_l is not None and j < out_l.size and i_l < n:
                diff = phi[i_l] - out_l[j]
                g[i_l] += dx * jk * diff
                if src_l is not None:
                    g[src_l[j]] -= dx * jk * diff
            i_r = n - 1 - (k - 1 - j)
            if out_r is not None and j < out_r.size and 0 <= i_r < n:
                diff = phi[i_r] - out_r[j]
                g[i_r] += dx * jk * diff
                if src_r is not None:
                    g[src_r[j]] -= dx * jk * diff
    if gamma <= 0.0:
        return
    meas = params.measure
    for w, a in meas.atoms:
        b = gamma * a
        pref = gamma * meas.lam * w * dx
        for out, src, inward in ((out_l, src_l, True), (out_r, src_r, False)):
            if out is None:
                continue
            jj = np.arange(out.size)
            decay_out = np.exp(-b * dx * (jj + 0.5))
            s_out = float(out @ decay_out)
            if inward:
                decay_in = np.exp(-b * dx * (np.arange(n) + 0.5))
            else:
                decay_in = np.exp(-b * dx * (n - 0.5 - np.arange(n)))
            # direct: d/dphi_i of gamma phi V phi_out
            g += pref * s_out * decay_in
            if src is not None:
                # mirror: each out sample j is phi[src[j]]
                s_in = float(phi @ decay_in)
                np.add.at(g, src, pref * s_in * decay_out)


# ---------------------------------------------------------------------------
# step profiles: exact dipole and the effective functional

def _pair_integral_open(b: float, edges: np.ndarray) -> np.ndarray:
    """Matrix of closed-form integrals of exp(-b|x-y|) over cell pairs."""
    w = np.diff(edges)
    left = edges[:-1]
    right = edges[1:]
    f = (1.0 - np.exp(-b * w)) / b
    gap = left[None, :] - right[:, None]          # gap between cell i and j > i
    with np.errstate(over="ignore"):
        mat = np.outer(f, f) * np.where(gap >= 0.0, np.exp(-b * np.maximum(gap, 0.0)), 0.0)
    mat = mat + mat.T
    np.fill_diagonal(mat, (2.0 / b / b) * (b * w - 1.0 + np.exp(-b * w)))
    return mat


def _pair_integral_wrap(b: float, edges: np.ndarray, L: float) -> np.ndarray:
    """Same for exp(-b(L - |x-y|)), the complementary torus distance."""
    w = np.diff(edges)
    left = edges[:-1]
    right = edges[1:]
    fgrow = (1.0 - np.exp(-b * w)) / b            # normalized growing-exp factor
    gap = left[None, :] - right[:, None]
    comp = L - gap - w[:, None] - w[None, :]      # wrap distance between far edges
    mat = np.outer(fgrow, fgrow) * np.where(gap >= 0.0,
                                            np.exp(-b * np.maximum(comp, 0.0)), 0.0)
    mat = mat + mat.T
    diag = (2.0 / b / b) * (np.exp(-b * (L - w)) - np.exp(-b * L)
                            - b * w * np.exp(-b * L))
    np.fill_diagonal(mat, diag)
    return mat


def step_dipole_energy(params: ModelParams, step: StepProfile,
                       gamma: Optional[float] = None,
                       bc: str = "open") -> float:
    """Exact (gamma/2) dipole energy of a step profile, open or periodic."""
    gamma = params.gamma if gamma is None else gamma
    if gamma <= 0.0:
        return 0.0
    if bc not in ("open", "periodic"):
        raise ValidationError("step dipole supports open or periodic bc")
    vals = step.values
    edges = step.breakpoints
    meas = params.measure
    acc = 0.0
    for w_k, a_k in meas.atoms:
        b = gamma * a_k
        mat = _pair_integral_open(b, edges)
        if bc == "periodic":
            qL = np.exp(-b * step.L)
            mat = (mat + _pair_integral_wrap(b, edges, step.L)) / (1.0 - qL)
        acc += w_k * float(vals @ mat @ vals)
    return 0.5 * gamma * meas.lam * acc


def tilde_energy(params: ModelParams, step: StepProfile,
                 gamma: Optional[float] = None, bc: str = "open",
                 breakdown: bool = False):
    """Effective functional: well term + tau per sign change + dipole.

    The surface part implements (tau/2) * total variation of sigma/|sigma|,
    i.e. tau times the number of sign changes (wrap jump included for
    periodic bc). Computed in closed form; no quadrature.
    """
    gamma = params.gamma if gamma is None else gamma
    tau = params.require_tau()
    widths = step.widths
    well = float(np.sum(widths * eval_tilde_F(step.values, params)))
    surface = tau * step.n_jumps(periodic=(bc == "periodic"))
    dip = step_dipole_energy(params, step, gamma, bc=bc)
    if step.m_bar is not None and not step.in_K:
        warnings.warn("step profile leaves K (some |value| < m_bar)",
                      stacklevel=2)
    if breakdown:
        return well + surface + dip, {"well": well, "surface": surface,
                                      "dipole": dip, "in_K": step.in_K}
    return well + surface + dip


def sharp_energy(params: ModelParams, step: StepProfile,
                 gamma: Optional[float] = None, bc: str = "open") -> float:
    """Sharp-interface energy tau * N_jumps + dipole for +-m_beta profiles."""
    m = params.m_beta
    if np.any(np.abs(np.abs(step.values) - m) > 1e-12):
        raise ValueError("sharp_energy requires all |values| = m_beta")
    tau = params.require_tau()
    gamma = params.gamma if gamma is None else gamma
    return (tau * step.n_jumps(periodic=(bc == "periodic"))
            + step_dipole_energy(params, step, gamma, bc=bc))
