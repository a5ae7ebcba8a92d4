"""Model parameters and local/nonlocal interaction kernels.

The free energy density combines a double-well local term built from the
mean-field magnetization entropy, a compactly supported even exchange kernel
J with unit range, and a long-range kernel v given by a finite mixture of
decaying exponentials (a Laplace transform of an atomic measure, hence
reflection positive by construction).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.special import xlogy

from .certificates import Certificate
from .errors import DomainError, SubcriticalError, ValidationError

__all__ = [
    "KacMeasure",
    "ShortRangeKernel",
    "ModelParams",
    "solve_m_beta",
    "eval_F",
    "eval_F_prime",
    "eval_F_double_prime",
    "eval_tilde_F",
    "eval_v",
    "v_prime_at_zero",
    "rp_spectrum_check",
]


@dataclass(frozen=True)
class KacMeasure:
    """Finite atomic mixture lambda * sum_k w_k exp(-alpha_k |x|).

    ``atoms`` is a sequence of (weight, rate) pairs; weights are positive and
    sum to one, rates are positive and bounded away from zero.
    """

    atoms: Tuple[Tuple[float, float], ...]
    lam: float = 1.0

    def __post_init__(self):
        atoms = tuple((float(w), float(a)) for w, a in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        if not atoms:
            raise ValidationError("measure needs at least one atom")
        if self.lam <= 0:
            raise ValidationError("lambda must be positive")
        for i, (w, a) in enumerate(atoms):
            if w <= 0:
                raise ValidationError(f"weight must be positive, got {w}",
                                      pointer=f"/measure/{i}/weight")
            if a <= 0:
                raise ValidationError(f"rate must be positive, got {a}",
                                      pointer=f"/measure/{i}/alpha")
        total = math.fsum(w for w, _ in atoms)
        if abs(total - 1.0) > 1e-12:
            raise ValidationError(f"weights must sum to 1, got {total!r}")

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.atoms])

    @property
    def rates(self) -> np.ndarray:
        return np.array([a for _, a in self.atoms])

    @property
    def alpha_min(self) -> float:
        return float(self.rates.min())

    def v(self, x):
        """v(x) = lambda sum_k w_k exp(-alpha_k |x|)."""
        x = np.abs(np.asarray(x, dtype=float))
        r = self.rates.reshape((-1,) + (1,) * x.ndim)
        w = self.weights.reshape((-1,) + (1,) * x.ndim)
        out = self.lam * np.sum(w * np.exp(-r * x), axis=0)
        return out if np.ndim(out) else float(out)

    def v_hat(self, k):
        """Fourier transform: lambda sum_k w_k 2 alpha_k / (alpha_k^2 + k^2)."""
        k = np.asarray(k, dtype=float)
        r = self.rates.reshape((-1,) + (1,) * k.ndim)
        w = self.weights.reshape((-1,) + (1,) * k.ndim)
        out = self.lam * np.sum(w * 2.0 * r / (r * r + k * k), axis=0)
        return out if np.ndim(out) else float(out)

    def v_integral(self) -> float:
        """Total integral of v over the line: lambda sum_k 2 w_k / alpha_k."""
        return float(self.lam * np.sum(2.0 * self.weights / self.rates))

    def mean_rate(self) -> float:
        """sum_k w_k alpha_k (the default long-wavelength coefficient)."""
        return float(np.sum(self.weights * self.rates))


def eval_v(x, measure: KacMeasure):
    """Long-range kernel value v(x); even and decreasing in |x|."""
    return measure.v(x)


def v_prime_at_zero(measure: KacMeasure) -> float:
    """|v'(0+)| = lambda sum_k w_k alpha_k."""
    return float(measure.lam * np.sum(measure.weights * measure.rates))


def rp_spectrum_check(measure: KacMeasure, k_samples) -> Certificate:
    """Certify v_hat(k) > 0 at every sampled wavenumber.

    A valid atomic measure always passes; the check guards hand-edited
    configurations.
    """
    k = np.atleast_1d(np.asarray(k_samples, dtype=float))
    if k.size == 0:
        raise ValidationError("k_samples must be nonempty")
    vals = measure.lam * (
        (2.0 * measure.rates[:, None]
         / (measure.rates[:, None] ** 2 + k[None, :] ** 2))
        * measure.weights[:, None]).sum(axis=0)
    worst = int(np.argmin(vals))
    return Certificate(
        name="rp_spectrum",
        lhs=float(vals[worst]), rhs=0.0, slack=float(vals[worst]),
        passed=bool(np.all(vals > 0.0)),
        params={"k_worst": float(k[worst]), "n_samples": int(k.size)})


def _quartic_bump(c: float) -> Callable[[np.ndarray], np.ndarray]:
    def j(x):
        x = np.asarray(x, dtype=float)
        out = np.where(np.abs(x) <= 1.0, c * (1.0 - x * x) ** 2, 0.0)
        return out if out.ndim else float(out)
    return j


@dataclass(frozen=True)
class ShortRangeKernel:
    """Even, nonnegative exchange kernel with support [-1, 1].

    ``j0_hat`` is its total integral. The default is c (1-x^2)^2 with c fixed
    so that the integral equals the requested j0_hat.
    """

    evaluator: Callable
    j0_hat: float

    @classmethod
    def default_quartic(cls, j0_hat: float = 1.0) -> "ShortRangeKernel":
        if j0_hat <= 0:
            raise ValidationError("J0_hat must be positive")
        c = (15.0 / 16.0) * j0_hat
        return cls(evaluator=_quartic_bump(c), j0_hat=float(j0_hat))

    def __post_init__(self):
        if self.j0_hat <= 0:
            raise ValidationError("J0_hat must be positive")
        probe = np.linspace(0.0, 1.0, 257)
        vals = self.evaluator(probe)
        if np.any(vals < -1e-14):
            raise ValidationError("J must be nonnegative on [0, 1]")
        if np.any(np.diff(vals) > 1e-12):
            raise ValidationError("J must be nonincreasing on [0, 1]")
        neg = self.evaluator(-probe)
        if np.max(np.abs(neg - vals)) > 1e-12:
            raise ValidationError("J must be even")
        if abs(float(self.evaluator(1.0 + 1e-9))) > 0.0:
            raise ValidationError("J must vanish outside [-1, 1]")

    def __call__(self, x):
        return self.evaluator(x)

    def band(self, dx: float) -> np.ndarray:
        """J evaluated at the positive grid offsets k*dx, k = 1..1/dx."""
        r = int(round(1.0 / dx))
        return np.asarray(self.evaluator(dx * np.arange(1, r + 1)), dtype=float)


def solve_m_beta(beta_j0: float) -> float:
    """Positive root of m = tanh(beta_j0 * m), by bisection plus Newton polish.

    Raises SubcriticalError when beta_j0 <= 1 (only the trivial root exists).
    """
    if beta_j0 <= 1.0:
        raise SubcriticalError(
            f"beta * J0_hat = {beta_j0} <= 1: no spontaneous magnetization")
    f = lambda m: m - math.tanh(beta_j0 * m)
    lo, hi = 1e-8, 1.0 - 1e-12
    if f(lo) >= 0.0:
        # at supercritical beta_j0 the function is negative near 0+
        lo = 1e-14
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    m = 0.5 * (lo + hi)
    for _ in range(2):
        t = math.tanh(beta_j0 * m)
        fp = 1.0 - beta_j0 * (1.0 - t * t)
        if fp != 0.0:
            m -= (m - t) / fp
    m = min(max(m, 0.0), 1.0)
    if abs(m - math.tanh(beta_j0 * m)) > 1e-12:
        raise SubcriticalError(f"failed to solve m = tanh({beta_j0} m)")
    return m


def _entropy(t):
    # (1+t)/2 log((1+t)/2) + (1-t)/2 log((1-t)/2), with x log x -> 0 at x = 0
    p = (1.0 + t) / 2.0
    q = (1.0 - t) / 2.0
    return xlogy(p, p) + xlogy(q, q)


@dataclass(frozen=True)
class ModelParams:
    """Full parameterization of the functional.

    ``tau`` (the surface tension) is filled once the instanton has been
    solved; operations that need it raise if it is missing.
    """

    beta: float
    kernel: ShortRangeKernel
    measure: KacMeasure
    gamma: float
    m_beta: float
    f0: float
    tau: Optional[float] = None

    @classmethod
    def create(cls, beta: float, kernel: Optional[ShortRangeKernel] = None,
               measure: Optional[KacMeasure] = None, gamma: float = 1e-2,
               tau: Optional[float] = None) -> "ModelParams":
        if kernel is None:
            kernel = ShortRangeKernel.default_quartic(1.0)
        if measure is None:
            measure = KacMeasure(atoms=((1.0, 1.0),), lam=1.0)
        if beta <= 0:
            raise ValidationError("beta must be positive", pointer="/beta")
        if not (0.0 < gamma < 1.0):
            raise ValidationError(f"gamma must lie in (0, 1), got {gamma}",
                                  pointer="/gamma")
        bj = beta * kernel.j0_hat
        if bj <= 1.0:
            raise SubcriticalError(
                f"beta * J0_hat = {bj} <= 1 (supercritical regime required)")
        m = solve_m_beta(bj)
        p = cls(beta=float(beta), kernel=kernel, measure=measure,
                gamma=float(gamma), m_beta=m, f0=0.0, tau=tau)
        return replace(p, f0=float(eval_F(0.0, p)))

    @classmethod
    def from_dict(cls, doc: dict, pointer: str = "") -> "ModelParams":
        """Build from the JSON model document; errors carry JSON-pointer paths."""
        if not isinstance(doc, dict):
            raise ValidationError("model must be an object", pointer=pointer or "/")
        allowed = {"beta", "J0_hat", "lambda", "measure", "gamma", "tau"}
        for key in doc:
            if key not in allowed:
                raise ValidationError("unknown key", pointer=f"{pointer}/{key}")
        for key in ("beta", "J0_hat", "lambda", "measure", "gamma"):
            if key not in doc:
                raise ValidationError("missing", pointer=f"{pointer}/{key}")
        def num(key):
            val = doc[key]
            if not isinstance(val, (int, float)) or isinstance(val, bool):
                raise ValidationError("expected a number",
                                      pointer=f"{pointer}/{key}")
            return float(val)
        beta, j0, lam, gamma = num("beta"), num("J0_hat"), num("lambda"), num("gamma")
        raw = doc["measure"]
        if not isinstance(raw, list) or not raw:
            raise ValidationError("expected a nonempty array",
                                  pointer=f"{pointer}/measure")
        atoms = []
        for i, entry in enumerate(raw):
            if not isinstance(entry, dict) or set(entry) != {"weight", "alpha"}:
                raise ValidationError("expected {weight, alpha}",
                                      pointer=f"{pointer}/measure/{i}")
            atoms.append((float(entry["weight"]), float(entry["alpha"])))
        tau = None
        if "tau" in doc:
            tau = num("tau")
            if tau <= 0:
                raise ValidationError("tau must be positive",
                                      pointer=f"{pointer}/tau")
        try:
            measure = KacMeasure(atoms=tuple(atoms), lam=lam)
            kernel = ShortRangeKernel.default_quartic(j0)
            return cls.create(beta=beta, kernel=kernel, measure=measure,
                              gamma=gamma, tau=tau)
        except ValidationError as err:
            if err.pointer is not None and pointer:
                raise ValidationError(str(err).split(": ", 1)[-1],
                                      pointer=pointer + err.pointer) from err
            raise

    def with_tau(self, tau: float) -> "ModelParams":
        if tau <= 0:
            raise ValidationError("tau must be positive")
        return replace(self, tau=float(tau))

    def with_gamma(self, gamma: float) -> "ModelParams":
        if not (0.0 < gamma < 1.0):
            raise ValidationError(f"gamma must lie in (0, 1), got {gamma}")
        return replace(self, gamma=float(gamma))

    def require_tau(self) -> float:
        if self.tau is None:
            raise ValidationError("tau not set; solve the instanton first")
        return self.tau


def _check_domain(t):
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1.0 + 1e-12):
        raise DomainError("magnetization outside [-1, 1]")
    return np.clip(t, -1.0, 1.0)


def eval_F(t, params: ModelParams):
    """Double-well density F(t) = a(t) - a(m_beta), nonnegative and even."""
    t = _check_domain(t)
    j0 = params.kernel.j0_hat
    a_t = -0.5 * j0 * t * t + _entropy(t) / params.beta
    m = params.m_beta
    a_min = -0.5 * j0 * m * m + _entropy(m) / params.beta
    out = a_t - a_min
    return out if np.ndim(out) else float(out)


def eval_F_prime(t, params: ModelParams, clamp: float = 1e-12):
    """a'(t) = -J0_hat t + arctanh(t)/beta, clamped near t = +-1.

    The entropy slope diverges at the box boundary; evaluation is clamped at
    |t| = 1 - ``clamp`` so projected-gradient iterations stay finite.
    """
    t = np.clip(np.asarray(t, dtype=float), -1.0 + clamp, 1.0 - clamp)
    out = -params.kernel.j0_hat * t + np.arctanh(t) / params.beta
    return out if out.ndim else float(out)


def eval_F_double_prime(t, params: ModelParams):
    """a''(t) = -J0_hat + 1/(beta (1 - t^2))."""
    t = np.asarray(t, dtype=float)
    out = -params.kernel.j0_hat + 1.0 / (params.beta * (1.0 - t * t))
    return out if out.ndim else float(out)


def eval_tilde_F(t, params: ModelParams):
    """Quadratic comparison well F~(t) = F(0)/(2 m_beta^2) (|t| - m_beta)^2."""
    t = _check_domain(t)
    m = params.m_beta
    out = params.f0 / (2.0 * m * m) * (np.abs(t) - m) ** 2
    return out if np.ndim(out) else float(out)
