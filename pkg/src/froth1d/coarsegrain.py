"""Block coarse graining: regular partition, flat-segment search, adapted
partition and the mean-preserving replacement map phi -> sigma_phi.

The construction keeps exact per-block means and labels every replacement
with the case that produced it. Thresholds are computed literally from the
configured exponents; branches that degenerate at desk-scale gamma demote a
block to the generic bad-block rule instead of aborting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .certificates import Certificate
from .energy import short_range_energy, tilde_energy, total_energy
from .errors import FlatSegmentNotFound, InvariantError, ValidationError
from .model import ModelParams, eval_F_double_prime
from .profiles import (BlockPartition, GridProfile, StepProfile, alpha_L,
                       average_over)

__all__ = [
    "CoarseGrainConfig",
    "AdaptedPartition",
    "regular_partition",
    "classify_blocks",
    "find_flat_segment",
    "adapted_partition",
    "replace_block",
    "coarse_grain",
    "lower_bound_certificate",
]


@dataclass(frozen=True)
class CoarseGrainConfig:
    """Exponents and prefactors of the coarse-graining construction.

    ``delta`` sets the block scale gamma^-delta, ``rho`` the flat-segment
    tolerance gamma^rho, ``ell_minus`` the small-block size (a power of two
    so blocks divide the unit J-range), ``c0`` the tolerance prefactor of
    zeta = c0 gamma^delta log^2(gamma), ``kappa`` the margin of
    m_bar = m_beta - kappa gamma^{delta/2}.
    """

    delta: float = 0.2
    rho: float = 0.04
    ell_minus: float = 0.25
    c0: float = 0.05
    kappa: float = 1.0
    energy_cutoff_multiplier: float = 2.0

    def __post_init__(self):
        if not (0.0 < self.delta < 1.0 / 3.0):
            raise ValidationError("delta must lie in (0, 1/3)")
        if not (0.0 < self.rho < self.delta / 4.0):
            raise ValidationError("rho must lie in (0, delta/4)")
        n = -math.log2(self.ell_minus)
        if abs(n - round(n)) > 1e-12 or self.ell_minus > 0.5:
            raise ValidationError("ell_minus must be 2^-n for integer n >= 1")
        if self.c0 <= 0 or self.kappa <= 0 or self.energy_cutoff_multiplier <= 0:
            raise ValidationError("c0, kappa and the cutoff multiplier must be positive")

    def zeta(self, gamma: float) -> float:
        return self.c0 * gamma ** self.delta * math.log(gamma) ** 2

    def m_bar(self, m_beta: float, gamma: float) -> float:
        return m_beta - self.kappa * gamma ** (self.delta / 2.0)


def regular_partition(L: float, delta: float, gamma: float) -> BlockPartition:
    """Equal blocks of length alpha_L(delta) gamma^-delta, integer count."""
    alpha, n = alpha_L(L, delta, gamma)
    edges = np.linspace(0.0, L, n + 1)
    return BlockPartition(edges=edges, kind="regular_delta",
                          labels={"alpha_L": alpha})


def classify_blocks(params: ModelParams, profile: GridProfile,
                    partition: BlockPartition, tau: Optional[float] = None,
                    cutoff_multiplier: float = 2.0) -> dict:
    """Label blocks low-energy iff their internal energy is <= cutoff * tau."""
    tau = params.require_tau() if tau is None else tau
    cutoff = cutoff_multiplier * tau
    energies = np.array([
        short_range_energy(params, profile, (a, b))
        for a, b in partition.blocks()])
    return {"energy": energies, "low": energies <= cutoff, "cutoff": cutoff}


def _small_block_means(profile: GridProfile, ell_minus: float):
    """Means over the absolute small-block grid cells covering [0, L]."""
    per = int(round(ell_minus / profile.dx))
    if abs(per * profile.dx - ell_minus) > 1e-12:
        raise ValidationError("ell_minus must be a multiple of dx")
    n_small = profile.n // per
    trimmed = profile.samples[:n_small * per]
    return trimmed.reshape(n_small, per).mean(axis=1), per


def find_flat_segment(params: ModelParams, profile: GridProfile,
                      block: Tuple[float, float], config: CoarseGrainConfig,
                      gamma: Optional[float] = None,
                      margin_left: Optional[float] = None,
                      margin_right: Optional[float] = None):
    """Longest run of small blocks with mean within gamma^rho of +-m_beta.

    The run must sit at distance >= ell_plus/4 from the block boundary
    (``margin_left``/``margin_right`` override that default, used to keep
    domain-boundary blocks long enough). Ties break to the longest run, then
    leftmost. Returns (omega, (start, stop), run_length).
    """
    gamma = params.gamma if gamma is None else gamma
    a, b = block
    ell_plus = b - a
    tol = gamma ** config.rho
    ml = ell_plus / 4.0 if margin_left is None else margin_left
    mr = ell_plus / 4.0 if margin_right is None else margin_right
    means, _ = _small_block_means(profile, config.ell_minus)
    lm = config.ell_minus
    # admissible small blocks: fully inside [a + ml, b - mr]
    j0 = int(math.ceil((a + ml) / lm - 1e-9))
    j1 = int(math.floor((b - mr) / lm + 1e-9))
    if j1 <= j0:
        raise FlatSegmentNotFound("no admissible small blocks in the block core")
    best = None  # (length, start_index, omega, stop_index)
    for omega in (1.0, -1.0):
        ok = np.abs(means[j0:j1] - omega * params.m_beta) <= tol
        start = None
        for idx, flag in enumerate(np.append(ok, False)):
            if flag and start is None:
                start = idx
            elif not flag and start is not None:
                run = idx - start
                cand = (run, -(j0 + start), omega, j0 + idx)
                if best is None or (cand[0], cand[1]) > (best[0], best[1]):
                    best = cand
                start = None
    if best is None:
        raise FlatSegmentNotFound("no small block stays near +-m_beta")
    run, neg_start, omega, stop = best
    start = -neg_start
    return omega, (start * lm, stop * lm), run * lm


@dataclass(frozen=True)
class AdaptedPartition:
    """Profile-adapted partition with per-block replacement contexts.

    ``kinds`` is one of good / bad / boundary_good per block; ``signs`` holds
    (omega_left, omega_right) for good blocks, (side, omega) for boundary
    good blocks, None for bad ones.
    """

    partition: BlockPartition
    kinds: Tuple[str, ...]
    signs: Tuple[Optional[tuple], ...]
    segments: Tuple[dict, ...] = field(default_factory=tuple)
    ell_plus: float = 0.0

    def __post_init__(self):
        if len(self.kinds) != self.partition.n_blocks:
            raise ValidationError("one kind per block required")
        widths = self.partition.widths
        lo, hi = 0.5 * self.ell_plus, 2.5 * self.ell_plus
        if self.ell_plus > 0 and (np.any(widths < lo - 1e-9)
                                  or np.any(widths > hi + 1e-9)):
            raise InvariantError("adapted block length outside [l+/2, 5l+/2]")


def adapted_partition(params: ModelParams, profile: GridProfile,
                      config: CoarseGrainConfig,
                      gamma: Optional[float] = None,
                      tau: Optional[float] = None) -> AdaptedPartition:
    """Replace boundary lines of low-energy blocks by flat-segment midlines.

    Low-energy blocks whose flat-segment search fails are demoted to bad.
    Midlines are snapped to the sample grid so downstream block means stay
    exact.
    """
    gamma = params.gamma if gamma is None else gamma
    tau = params.require_tau() if tau is None else tau
    L, dx = profile.L, profile.dx
    reg = regular_partition(L, config.delta, gamma).snapped(dx)
    ell_plus = float(np.mean(reg.widths))
    labels = classify_blocks(params, profile, reg, tau,
                             config.energy_cutoff_multiplier)
    n = reg.n_blocks
    good = list(labels["low"])
    omega = [None] * n
    midline = [None] * n
    seg_info = []
    for i in range(n):
        if not good[i]:
            continue
        a, b = reg.edges[i], reg.edges[i + 1]
        ml = mr = None
        if n > 1 and i == 0:
            ml = ell_plus / 2.0      # keep the [0, s] boundary block >= l+/2
        if n > 1 and i == n - 1:
            mr = ell_plus / 2.0
        if n == 1:
            good[i] = False          # single-block domain: degenerate, demote
            continue
        try:
            om, (sa, sb), run = find_flat_segment(
                params, profile, (a, b), config, gamma,
                margin_left=ml, margin_right=mr)
        except FlatSegmentNotFound:
            good[i] = False
            continue
        omega[i] = om
        s = round(0.5 * (sa + sb) / dx) * dx
        midline[i] = s
        seg_info.append({"block": i, "omega": om, "segment": (sa, sb),
                         "run_length": run, "midline": s})
    # final boundary lines: domain ends, midlines, and original lines with
    # two bad neighbors
    lines = {0.0, L}
    for i in range(n):
        if good[i]:
            lines.add(midline[i])
    for k in range(1, n):
        if not good[k - 1] and not good[k]:
            lines.add(float(reg.edges[k]))
    edges = np.array(sorted(lines))
    part = BlockPartition(edges=edges, kind="adapted")
    # classify final blocks
    mid_of = {midline[i]: i for i in range(n) if good[i]}
    kinds: List[str] = []
    signs: List[Optional[tuple]] = []
    for a, b in part.blocks():
        left_src = mid_of.get(float(a))
        right_src = mid_of.get(float(b))
        if (left_src is not None and right_src is not None
                and right_src == left_src + 1):
            kinds.append("good")
            signs.append((omega[left_src], omega[right_src]))
        elif a == 0.0 and right_src == 0:
            kinds.append("boundary_good")
            signs.append(("left", omega[right_src]))
        elif b == L and left_src == n - 1:
            kinds.append("boundary_good")
            signs.append(("right", omega[left_src]))
        else:
            kinds.append("bad")
            signs.append(None)
    return AdaptedPartition(partition=part, kinds=tuple(kinds),
                            signs=tuple(signs), segments=tuple(seg_info),
                            ell_plus=ell_plus)


def _capped_margin(ell: float, raw: float) -> Tuple[float, bool]:
    """Half-margin min(raw, ell/4); flags when the cap bites."""
    if raw > ell / 4.0:
        return ell / 4.0, True
    return raw, False


def replace_block(params: ModelParams, length: float, mean: float,
                  context: tuple, config: CoarseGrainConfig,
                  gamma: Optional[float] = None, tau: Optional[float] = None,
                  strict: bool = True):
    """Mean-preserving piecewise-constant replacement on one block.

    ``context`` is ("bad", None), ("good", (omega, omega')) or
    ("boundary_good", (side, omega)). Returns (pieces, case_tag, flags);
    pieces are (width, value) pairs whose weighted mean equals ``mean``
    exactly. With ``strict`` a plateau value above 1 raises InvariantError;
    otherwise the block falls back to the bad-block rule and is flagged.
    """
    gamma = params.gamma if gamma is None else gamma
    tau = params.require_tau() if tau is None else tau
    m_b = params.m_beta
    ell = float(length)
    m = float(mean)
    zeta = config.zeta(gamma)
    kind, data = context
    flags: dict = {}

    def bad_rule():
        if abs(m) >= m_b - zeta:
            return [(ell, m)], "1-const"
        xi = ell * (m + m_b) / (2.0 * m_b)
        return [(xi, m_b), (ell - xi, -m_b)], "1-split"

    if kind == "bad":
        pieces, tag = bad_rule()
        return pieces, tag, flags

    fpp = eval_F_double_prime(m_b, params)
    c_star = math.sqrt(5.0 * tau / fpp)
    t2b = 1.1 * c_star / math.sqrt(ell)

    if kind == "good":
        om_l, om_r = data
        if om_l != om_r:
            omega = om_l
            if abs(m) <= m_b - zeta:
                xi = ell * (m_b + omega * m) / (2.0 * m_b)
                return [(xi, omega * m_b), (ell - xi, -omega * m_b)], "2a-jump", flags
            mg, capped = _capped_margin(ell, 0.5 * math.log(ell) ** 2)
            flags["margin_capped"] = capped
            plateau = m * ell / (ell - 2.0 * mg)
            if abs(plateau) > 1.0:
                if strict:
                    raise InvariantError(
                        f"case 2a plateau {plateau:.4f} exceeds 1 (c0 too large)")
                flags["demoted"] = "plateau>1"
                pieces, tag = bad_rule()
                return pieces, tag, flags
            return ([(mg, omega * m_b), (ell - 2.0 * mg, plateau),
                     (mg, -omega * m_b)], "2a-three", flags)
        # equal signs: reduce to the (-,-) reference case via spin flip
        omega = om_l
        sgn = -1.0 if omega < 0 else 1.0
        mm = m if omega < 0 else -m   # mean in the flipped frame
        if mm <= -m_b + t2b:
            pieces, tag = [(ell, mm)], "2b-const"
        elif mm < m_b - t2b:
            xi = ell * (m_b - mm) / (4.0 * m_b)
            pieces, tag = ([(xi, -m_b), (ell - 2.0 * xi, m_b), (xi, -m_b)],
                           "2b-two-jump")
        else:
            mg, capped = _capped_margin(ell, 0.5 * math.log(ell) ** 2)
            flags["margin_capped"] = capped
            plateau = (mm * ell + m_b * 2.0 * mg) / (ell - 2.0 * mg)
            if abs(plateau) > 1.0:
                if strict:
                    raise InvariantError(
                        f"case 2b plateau {plateau:.4f} exceeds 1 (c0 too large)")
                flags["demoted"] = "plateau>1"
                pieces, tag = bad_rule()
                return pieces, tag, flags
            pieces, tag = ([(mg, -m_b), (ell - 2.0 * mg, plateau), (mg, -m_b)],
                           "2b-three")
        if omega > 0:
            pieces = [(w, -v) for w, v in pieces]
        return pieces, tag, flags

    if kind == "boundary_good":
        side, omega = data
        # reference frame: block at the left domain edge with bc omega = -1 at
        # its right end; flip sign and/or mirror for the other combinations
        mm = m if omega < 0 else -m
        if mm <= -m_b + t2b:
            pieces, tag = [(ell, mm)], "2c-const"
        elif mm < m_b - t2b:
            xi = ell * (m_b - mm) / (2.0 * m_b)
            pieces, tag = [(ell - xi, m_b), (xi, -m_b)], "2c-jump"
        else:
            raw = 0.5 * math.log(2.0 * ell) ** 2
            mg, capped = _capped_margin(ell, raw)
            flags["margin_capped"] = capped
            plateau = (mm * ell + m_b * mg) / (ell - mg)
            if abs(plateau) > 1.0:
                if strict:
                    raise InvariantError(
                        f"case 2c plateau {plateau:.4f} exceeds 1 (c0 too large)")
                flags["demoted"] = "plateau>1"
                pieces, tag = bad_rule()
                return pieces, tag, flags
            pieces, tag = [(ell - mg, plateau), (mg, -m_b)], "2c-plateau"
        if omega > 0:
            pieces = [(w, -v) for w, v in pieces]
        if side == "right":
            pieces = pieces[::-1]
        return pieces, tag, flags

    raise ValidationError(f"unknown block context {kind!r}")


def coarse_grain(params: ModelParams, profile: GridProfile,
                 config: Optional[CoarseGrainConfig] = None,
                 gamma: Optional[float] = None,
                 tau: Optional[float] = None):
    """Full map phi -> sigma_phi. Returns (StepProfile, AdaptedPartition, trace)."""
    config = CoarseGrainConfig() if config is None else config
    gamma = params.gamma if gamma is None else gamma
    tau = params.require_tau() if tau is None else tau
    adapted = adapted_partition(params, profile, config, gamma, tau)
    pieces: List[Tuple[float, float]] = []
    trace = []
    for (a, b), kind, sign in zip(adapted.partition.blocks(), adapted.kinds,
                                  adapted.signs):
        mean = average_over(profile, (a, b))
        blk_pieces, tag, flags = replace_block(
            params, b - a, mean, (kind, sign), config, gamma, tau,
            strict=False)
        pieces.extend(blk_pieces)
        trace.append({"interval": (float(a), float(b)), "label": kind,
                      "case": tag, "mean": float(mean),
                      "pieces": [(float(w), float(v)) for w, v in blk_pieces],
                      "flags": flags})
    m_bar = config.m_bar(params.m_beta, gamma)
    step = StepProfile.from_pieces(pieces, m_bar=m_bar)
    # guard against drift in the cumulative breakpoints
    if abs(step.L - profile.L) > 1e-9 * profile.L:
        raise InvariantError("replacement pieces do not tile the domain")
    return step, adapted, trace


def lower_bound_certificate(params: ModelParams, profile: GridProfile,
                            gamma: Optional[float] = None,
                            config: Optional[CoarseGrainConfig] = None,
                            C_cert: float = 10.0) -> Certificate:
    """Check E[phi] >= E~[sigma_phi] - C_cert gamma^{1-delta} L."""
    config = CoarseGrainConfig() if config is None else config
    gamma = params.gamma if gamma is None else gamma
    step, _, _ = coarse_grain(params, profile, config, gamma)
    e_phi = total_energy(params, profile, gamma).total
    bc = "periodic" if profile.bc == "periodic" else "open"
    e_tilde = tilde_energy(params, step, gamma, bc=bc)
    residual = (e_phi - e_tilde) / profile.L
    allowance = C_cert * gamma ** (1.0 - config.delta)
    return Certificate(
        name="coarse_grain_lower_bound",
        lhs=residual, rhs=-allowance, slack=residual + allowance,
        passed=bool(residual >= -allowance),
        params={"gamma": gamma, "delta": config.delta, "C_cert": C_cert,
                "E_phi": e_phi, "E_tilde": e_tilde, "L": profile.L})
