"""Sharp-interface machinery: e(h), the optimal period, the reflected
kernel, per-cell specific energies, the chessboard lower bound and the
rescaled limit functional.

Everything here is closed-form in the exponential atoms; the only quadrature
is the well term of a per-cell energy, and even that is exact for
piecewise-constant inputs because the bilinear form integrates the kernel
analytically over cell pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .certificates import Certificate
from .errors import (BracketError, CertificateFailure, DomainError, SignError,
                     ValidationError)
from .model import KacMeasure, ModelParams, eval_tilde_F, v_prime_at_zero
from .profiles import GridProfile, StepProfile

__all__ = [
    "EhCurve",
    "energy_per_length",
    "eh_derivative",
    "optimal_h",
    "eh_curve",
    "check_eh_bounds",
    "tilde_v_kernel",
    "tilde_v_kernel_direct",
    "cell_specific_energy",
    "chessboard_lower_bound",
    "gamma_limit_energy",
    "golden_section",
]


def energy_per_length(params: ModelParams, h: float,
                      gamma: Optional[float] = None,
                      tau: Optional[float] = None) -> float:
    """e(h) = tau/h + lambda m^2 sum_k (w_k/a_k)(1 - tanh(a_k g h/2)/(a_k g h/2))."""
    if h <= 0:
        raise DomainError(f"h must be positive, got {h}")
    gamma = params.gamma if gamma is None else gamma
    tau = params.require_tau() if tau is None else tau
    m2 = params.m_beta ** 2
    meas = params.measure
    x = 0.5 * meas.rates * gamma * h
    lr = meas.lam * m2 * np.sum((meas.weights / meas.rates) * (1.0 - np.tanh(x) / x))
    return tau / h + float(lr)


def eh_derivative(params: ModelParams, h: float,
                  gamma: Optional[float] = None, step: float = 1e-5) -> float:
    """e'(h) by central differences of the closed form."""
    d = step * max(1.0, abs(h))
    return (energy_per_length(params, h + d, gamma)
            - energy_per_length(params, h - d, gamma)) / (2.0 * d)


def golden_section(f, a: float, b: float, rtol: float = 1e-10,
                   max_iter: int = 400) -> Tuple[float, float]:
    """Minimize a unimodal function on [a, b]; returns (x_min, f(x_min))."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if (b - a) <= rtol * (abs(a) + abs(b)):
            break
        if f1 < f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = f(x2)
    x = 0.5 * (a + b)
    return x, f(x)


def optimal_h(params: ModelParams, gamma: Optional[float] = None,
              tau: Optional[float] = None) -> Tuple[float, float, float, float]:
    """(h*, e(h*), h*_asym, e*_asym); the asymptotics are the leading-order laws.

    Minimizes e(h) by golden section on [gamma^{-1/3}, gamma^{-1}]; raises
    BracketError if the minimum sits at a bracket end.
    """
    gamma = params.gamma if gamma is None else gamma
    if not (0.0 < gamma < 0.2):
        raise ValidationError(f"gamma must lie in (0, 0.2), got {gamma}")
    tau = params.require_tau() if tau is None else tau
    lo, hi = gamma ** (-1.0 / 3.0), gamma ** -1.0
    h_star, e_star = golden_section(
        lambda h: energy_per_length(params, h, gamma, tau=tau), lo, hi)
    if h_star - lo < 1e-6 * lo or hi - h_star < 1e-6 * hi:
        raise BracketError(f"minimum of e(h) at bracket end (h={h_star:.4g})")
    vp = v_prime_at_zero(params.measure)
    m2 = params.m_beta ** 2
    h_asym = (6.0 * tau / (vp * m2)) ** (1.0 / 3.0) * gamma ** (-2.0 / 3.0)
    e_asym = (9.0 / 16.0 * tau ** 2 * m2 * vp) ** (1.0 / 3.0) * gamma ** (2.0 / 3.0)
    return h_star, e_star, h_asym, e_asym


@dataclass(frozen=True)
class EhCurve:
    """Sampled e(h) curve with its minimizer and leading-order asymptotics."""

    gamma: float
    tau: float
    h: np.ndarray
    e: np.ndarray
    h_star: float
    e_star: float
    h_star_asym: float
    e_star_asym: float

    def __post_init__(self):
        if np.any(self.e <= 0.0):
            raise ValidationError("e(h) must be positive")
        if self.e_star > np.min(self.e) + 1e-15:
            raise ValidationError("e(h*) must not exceed sampled values")


def eh_curve(params: ModelParams, gamma: Optional[float] = None,
             n_samples: int = 200, span: Tuple[float, float] = (0.02, 50.0)
             ) -> EhCurve:
    """Log-spaced samples of e(h) around h*, plus the optimum."""
    gamma = params.gamma if gamma is None else gamma
    h_star, e_star, h_asym, e_asym = optimal_h(params, gamma)
    h = np.geomspace(span[0] * h_star, span[1] * h_star, n_samples)
    e = np.array([energy_per_length(params, hh, gamma) for hh in h])
    return EhCurve(gamma=gamma, tau=params.require_tau(), h=h, e=e,
                   h_star=h_star, e_star=e_star,
                   h_star_asym=h_asym, e_star_asym=e_asym)


def check_eh_bounds(params: ModelParams, gamma: Optional[float] = None,
                    n_samples: int = 240,
                    c_prime_grid: Sequence[float] = (0.5, 0.3, 0.7),
                    C_prime_grid: Sequence[float] = (1.0, 0.5, 2.0),
                    c_min: float = 1e-8, C_max: float = 1e8) -> Certificate:
    """Fit the three-regime bounds on e(h) - e(h*) and |e'(h)|.

    Scans a log-spaced h grid, fits the best constants c (largest lower
    bound) and C (smallest upper bound) for candidate regime boundaries
    c' h* and C' gamma^{-1}; passes when 0 < c and C < C_max.
    """
    gamma = params.gamma if gamma is None else gamma
    h_star, e_star, _, _ = optimal_h(params, gamma)
    if h_star < 10.0:
        raise ValidationError("check_eh_bounds needs h* >= 10 (gamma too large)")
    hgrid = np.geomspace(1.0, 100.0 / gamma, n_samples)
    e_vals = np.array([energy_per_length(params, h, gamma) for h in hgrid])
    de_vals = np.array([abs(eh_derivative(params, h, gamma)) for h in hgrid])
    diff = e_vals - e_star
    last_err = "no candidate regime boundaries admitted positive constants"
    for cp in c_prime_grid:
        for Cp in C_prime_grid:
            lowshape = np.where(
                hgrid <= cp * h_star, 1.0 / hgrid,
                np.where(hgrid >= Cp / gamma, 1.0,
                         gamma ** 2 * (hgrid - h_star) ** 2))
            upshape = np.where(
                hgrid <= cp * h_star, hgrid ** -2.0,
                np.where(hgrid >= Cp / gamma, gamma ** -1.0 * hgrid ** -2.0,
                         gamma ** 2 * np.abs(hgrid - h_star)))
            # the middle-regime shapes vanish at h = h*; both sides do there
            ok = lowshape > 0.0
            c_fit = float(np.min(diff[ok] / lowshape[ok]))
            okd = upshape > 0.0
            C_fit = float(np.max(de_vals[okd] / upshape[okd]))
            if c_fit >= c_min and C_fit <= C_max:
                return Certificate(
                    name="eh_bounds", lhs=c_fit, rhs=0.0, slack=c_fit,
                    passed=True,
                    params={"c": c_fit, "C": C_fit, "c_prime": cp,
                            "C_prime": Cp, "gamma": gamma, "h_star": h_star,
                            "n_samples": n_samples})
            last_err = (f"c={c_fit:.3e}, C={C_fit:.3e} outside "
                        f"[{c_min:.0e}, {C_max:.0e}] at c'={cp}, C'={Cp}")
    raise CertificateFailure(last_err)


# ---------------------------------------------------------------------------
# reflected kernel of the chessboard estimate

def tilde_v_kernel(h: float, gamma: float, x, y, measure: KacMeasure):
    """Closed form of the reflected kernel on [0, h]^2 (geometric resummation).

    Per atom, with a = gamma alpha, q = exp(-2 a h), G = 1/(1 - q),
    d = y - x, s = x + y:

        v~_h/(gamma lam w) = e^{-a|d|} + 2 q G cosh(a d)
                             - e^{-a s} - e^{-a(2h-s)} - q G e^{-a s}
                             - q^2 G e^{a s}

    symmetric in (x, y) and pointwise positive.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = y - x
    s = y + x
    total = 0.0
    for w, alpha in measure.atoms:
        a = gamma * alpha
        q = np.exp(-2.0 * a * h)
        G = 1.0 / (1.0 - q)
        term = (np.exp(-a * np.abs(d)) + q * G * 2.0 * np.cosh(a * d)
                - np.exp(-a * s) - np.exp(-a * (2.0 * h - s))
                - q * G * np.exp(-a * s) - q * q * G * np.exp(a * s))
        total = total + w * term
    out = gamma * measure.lam * total
    return out if np.ndim(out) else float(out)


def tilde_v_kernel_direct(h: float, gamma: float, x, y, measure: KacMeasure,
                          n_max: int = 60):
    """Truncated image-sum definition (|n| <= n_max), the reference oracle."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    total = np.zeros(np.broadcast(x, y).shape)
    for n in range(-n_max, n_max + 1):
        total = total + (measure.v(gamma * (2 * n * h + y - x))
                         - measure.v(gamma * (2 * n * h + y + x)))
    out = gamma * total
    return out if np.ndim(out) else float(out)


def _vh_quadratic_form(values: np.ndarray, edges: np.ndarray, h: float,
                       gamma: float, measure: KacMeasure) -> float:
    """<sigma, sigma>_{v~_h} for sigma piecewise constant on the given cells.

    All kernel terms are integrated in closed form over cell pairs, so the
    constant-profile identity <m, m>_{v~_h}/(2h) = long-range part of e(h)
    holds to machine precision.
    """
    w = np.diff(edges)
    total = 0.0
    for wk, alpha in measure.atoms:
        a = gamma * alpha
        q = math.exp(-2.0 * a * h)
        G = 1.0 / (1.0 - q)
        E = math.exp(-a * h)
        # 1D cell integrals of decaying exponentials from either wall
        P = (np.exp(-a * edges[:-1]) - np.exp(-a * edges[1:])) / a      # e^{-ax}
        Q = (np.exp(-a * (h - edges[1:])) - np.exp(-a * (h - edges[:-1]))) / a
        Sp = float(values @ P)
        Sq = float(values @ Q)
        # |d| part: exponential-kernel quadratic form over cells
        f = (1.0 - np.exp(-a * w)) / a
        gap = edges[None, :-1] - edges[1:, None]
        mat = np.outer(f, f) * np.where(gap >= 0.0,
                                        np.exp(-a * np.maximum(gap, 0.0)), 0.0)
        mat = mat + mat.T
        np.fill_diagonal(mat, (2.0 / a / a) * (a * w - 1.0 + np.exp(-a * w)))
        abs_part = float(values @ mat @ values)
        # cosh(ad) part: q G [e^{-a(y-x)} + e^{a(y-x)}] integrates to
        # 2 G E Sp Sq after regrouping with the prefactor
        quad = abs_part + 2.0 * G * E * Sp * Sq - G * (Sp * Sp + Sq * Sq)
        total += wk * quad
    return gamma * measure.lam * total


def cell_specific_energy(params: ModelParams, sigma, h: Optional[float] = None,
                         gamma: Optional[float] = None) -> float:
    """e~_h[sigma] = (1/h) int F~(sigma) + tau/h + (1/2h) <sigma, sigma>_{v~_h}.

    ``sigma`` is a GridProfile or StepProfile on [0, h] with constant sign
    (the antiperiodic cell of the chessboard estimate); a negative cell is
    evaluated through |sigma|.
    """
    gamma = params.gamma if gamma is None else gamma
    tau = params.require_tau()
    if isinstance(sigma, GridProfile):
        values = sigma.samples
        edges = np.arange(sigma.n + 1) * sigma.dx
        length = sigma.L
    elif isinstance(sigma, StepProfile):
        values = sigma.values
        edges = sigma.breakpoints
        length = sigma.L
    else:
        raise ValidationError("sigma must be a GridProfile or StepProfile")
    if h is None:
        h = length
    elif abs(h - length) > 1e-9 * max(1.0, h):
        raise ValidationError("sigma must live on [0, h]")
    signs = np.sign(values[np.abs(values) > 0.0])
    if signs.size and (np.any(signs > 0) and np.any(signs < 0)):
        raise SignError("cell profile must have constant sign")
    vals = np.abs(values)
    widths = np.diff(edges)
    well = float(np.sum(widths * eval_tilde_F(vals, params))) / h
    quad = _vh_quadratic_form(vals, edges, h, gamma, params.measure)
    return well + tau / h + quad / (2.0 * h)


def chessboard_lower_bound(params: ModelParams, step: StepProfile,
                           gamma: Optional[float] = None, bc: str = "open"
                           ) -> Tuple[float, list]:
    """Reflection-positivity lower bound: sum_i h_i e~_{h_i}[sigma~_i].

    Each maximal constant-sign interval is antiperiodized and charged its
    specific energy. Returns (bound, per-interval terms).
    """
    gamma = params.gamma if gamma is None else gamma
    per = []
    for a, b, _sign in step.sign_intervals(periodic=(bc == "periodic")):
        h_i = b - a
        if a < 0.0:
            # wrapped interval (periodic merge): glue the two arcs
            head = step.restrict(step.L + a, step.L)
            tail = step.restrict(0.0, b)
            cell = StepProfile(
                breakpoints=np.concatenate([head.breakpoints,
                                            head.L + tail.breakpoints[1:]]),
                values=np.concatenate([head.values, tail.values]),
                m_bar=step.m_bar)
        else:
            cell = step.restrict(a, b)
        term = h_i * cell_specific_energy(params, cell, gamma=gamma)
        per.append((h_i, term))
    return float(sum(t for _, t in per)), per


# ---------------------------------------------------------------------------
# rescaled limit functional

def gamma_limit_energy(u: GridProfile, params: ModelParams,
                       constant_alpha: Optional[float] = None,
                       mean_tol: float = 1e-8) -> float:
    """Limit functional: (tau/2m) TV(u) + lam <alpha> |(-Delta)^{-1/2} u|^2.

    Defined for periodic mean-zero profiles on [0, L0]; returns +inf when the
    mean exceeds ``mean_tol``. ``constant_alpha`` defaults to sum w_k alpha_k.
    """
    tau = params.require_tau()
    if constant_alpha is None:
        constant_alpha = params.measure.mean_rate()
    vals = u.samples
    if abs(vals.mean()) > mean_tol:
        return float("inf")
    tv = float(np.sum(np.abs(np.diff(vals)))) + abs(float(vals[0] - vals[-1]))
    uhat = np.fft.rfft(vals) / vals.size
    k = 2.0 * np.pi * np.arange(uhat.size) / u.L
    mags = np.abs(uhat[1:]) ** 2
    # one-sided spectrum: modes 1..N/2-1 appear twice, Nyquist once
    mult = np.full(mags.size, 2.0)
    if vals.size % 2 == 0:
        mult[-1] = 1.0
    sobolev = u.L * float(np.sum(mult * mags / k[1:] ** 2))
    return (tau / (2.0 * params.m_beta)) * tv + params.measure.lam * constant_alpha * sobolev
