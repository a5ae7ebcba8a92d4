"""Structure reports for quasi-minimizers: good set, sign runs, defect sets,
wrong-length measure and the excess-energy decomposition."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .certificates import fmt17
from .errors import ParameterError
from .model import ModelParams
from .profiles import (BlockPartition, GridProfile, StepProfile,
                       block_type, regular_partition_edges)
from .sharp import energy_per_length

__all__ = [
    "StructureReport",
    "good_set",
    "defect_sets",
    "l_wrong",
    "excess_energy_decomposition",
    "histogram_csv",
]


@dataclass
class StructureReport:
    """Block-scale structure of a profile and its coarse-grained step version."""

    L: float
    gamma: float
    params: dict
    good_intervals: List[Tuple[float, float]]          # the Lambda_k
    good_measure: float
    runs: List[dict]                                   # I_j: interval, sign, blocks
    block_edges: np.ndarray
    block_types: List[str]
    block_means: np.ndarray
    h_lengths: np.ndarray                              # sign-interval lengths of sigma
    excess: float = 0.0
    tildeF_integral: float = 0.0
    l_wrong: Optional[float] = None
    x1_measure: Optional[float] = None
    x2_measure: Optional[float] = None
    alternation_ok: bool = True

    @property
    def complement_measure(self) -> float:
        return self.L - self.good_measure

    def to_dict(self) -> dict:
        return {
            "L": fmt17(self.L),
            "gamma": fmt17(self.gamma),
            "params": {k: fmt17(v) for k, v in sorted(self.params.items())},
            "good_measure": fmt17(self.good_measure),
            "complement_measure": fmt17(self.complement_measure),
            "n_good_intervals": len(self.good_intervals),
            "n_runs": len(self.runs),
            "runs": [{"a": fmt17(r["interval"][0]), "b": fmt17(r["interval"][1]),
                      "sign": int(r["sign"]), "length": fmt17(r["length"])}
                     for r in self.runs],
            "excess": fmt17(self.excess),
            "tildeF_integral": fmt17(self.tildeF_integral),
            "l_wrong": None if self.l_wrong is None else fmt17(self.l_wrong),
            "x1_measure": None if self.x1_measure is None else fmt17(self.x1_measure),
            "x2_measure": None if self.x2_measure is None else fmt17(self.x2_measure),
            "alternation_ok": bool(self.alternation_ok),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _interval_union_coverage(intervals, a: float, b: float) -> float:
    """Measure of [a, b] covered by the (disjoint, sorted) intervals."""
    cov = 0.0
    for lo, hi in intervals:
        cov += max(0.0, min(b, hi) - max(a, lo))
    return cov


def good_set(params: ModelParams, profile: GridProfile, sigma_phi: StepProfile,
             gamma: Optional[float] = None, delta0: float = 0.25,
             delta1: float = 0.45, eps0: float = 0.28) -> StructureReport:
    """Build the good set and its sign runs.

    Long constant-sign intervals of sigma_phi (length >= gamma^-delta1) seed
    the good region; blocks of the regular delta0-partition touching its
    complement are removed; the remaining components longer than
    gamma^{-2/3-eps0/2} make up the good set. Runs are maximal same-type
    block sequences inside each component.
    """
    gamma = params.gamma if gamma is None else gamma
    if not (0.0 < delta0 < eps0 < 1.0 / 3.0):
        raise ParameterError("need 0 < delta0 < eps0 < 1/3")
    if not (delta0 < delta1 < 2.0 / 3.0):
        raise ParameterError("need delta0 < delta1 < 2/3")
    L = profile.L
    # coarse blocks and their types
    edges = regular_partition_edges(L, delta0, gamma)
    part = BlockPartition(edges=edges, kind="regular_delta0").snapped(profile.dx)
    idx = np.round(part.edges / profile.dx).astype(int)
    means = np.array([profile.samples[idx[k]:idx[k + 1]].mean()
                      for k in range(part.n_blocks)])
    types = [block_type(m, params.m_beta) for m in means]
    # long sigma intervals
    intervals = sigma_phi.sign_intervals()
    long_cut = gamma ** (-delta1)
    long_ivals = sorted((a, b) for a, b, _ in intervals if b - a >= long_cut)
    # blocks fully covered by the long intervals survive
    keep = np.array([
        _interval_union_coverage(long_ivals, part.edges[k], part.edges[k + 1])
        >= (part.edges[k + 1] - part.edges[k]) - 1e-9
        for k in range(part.n_blocks)])
    # components of kept blocks
    comp = []
    k = 0
    while k < part.n_blocks:
        if keep[k]:
            j = k
            while j + 1 < part.n_blocks and keep[j + 1]:
                j += 1
            comp.append((k, j))
            k = j + 1
        else:
            k += 1
    min_len = gamma ** (-2.0 / 3.0 - eps0 / 2.0)
    lam_k = [(part.edges[a], part.edges[b + 1]) for a, b in comp
             if part.edges[b + 1] - part.edges[a] >= min_len]
    comp = [(a, b) for a, b in comp
            if part.edges[b + 1] - part.edges[a] >= min_len]
    good_measure = float(sum(b - a for a, b in lam_k))
    # runs of constant type inside each component
    runs: List[dict] = []
    alternation_ok = True
    for a, b in comp:
        prev_sign = 0
        zeros_between = 0
        k = a
        while k <= b:
            t = types[k]
            if t == "zero":
                zeros_between += 1
                k += 1
                continue
            j = k
            while j + 1 <= b and types[j + 1] == t:
                j += 1
            sign = 1 if t == "plus" else -1
            if prev_sign != 0 and (sign == prev_sign or zeros_between > 1):
                alternation_ok = False
            runs.append({"interval": (float(part.edges[k]), float(part.edges[j + 1])),
                         "sign": sign, "blocks": (k, j),
                         "length": float(part.edges[j + 1] - part.edges[k])})
            prev_sign = sign
            zeros_between = 0
            k = j + 1
    return StructureReport(
        L=L, gamma=gamma,
        params={"delta0": delta0, "delta1": delta1, "eps0": eps0},
        good_intervals=lam_k, good_measure=good_measure, runs=runs,
        block_edges=part.edges, block_types=types, block_means=means,
        h_lengths=sigma_phi.interval_lengths(),
        alternation_ok=alternation_ok)


def defect_sets(report: StructureReport, params: ModelParams, epsilon: float,
                epsilon_prime: float, h_star: float) -> Tuple[float, float]:
    """|X1|, |X2|: coarse-profile deviation and wrong-length run measures.

    X1 collects the interior blocks of every run where ||psi| - m_beta|
    exceeds gamma^epsilon; X2 the runs whose length differs from h* by more
    than h* gamma^epsilon_prime. Results are stored on the report.
    """
    eps0 = report.params["eps0"]
    if not (0.0 < epsilon < 1.0 / 3.0 + eps0 / 2.0):
        raise ParameterError("epsilon out of range")
    if not (0.0 < epsilon_prime < eps0 / 2.0):
        raise ParameterError("epsilon_prime out of range")
    gam = report.gamma
    m_b = params.m_beta
    x1 = 0.0
    x2 = 0.0
    for run in report.runs:
        a_blk, b_blk = run["blocks"]
        # interior: strip the first and last block of the run
        for k in range(a_blk + 1, b_blk):
            width = report.block_edges[k + 1] - report.block_edges[k]
            if abs(abs(report.block_means[k]) - m_b) >= gam ** epsilon:
                x1 += width
        if abs(run["length"] - h_star) >= h_star * gam ** epsilon_prime:
            x2 += run["length"]
    report.x1_measure = float(x1)
    report.x2_measure = float(x2)
    return float(x1), float(x2)


def l_wrong(step: StepProfile, h_star: float, epsilon: float,
            gamma: float) -> float:
    """Total length of sign intervals with |h_j - h*| >= h* gamma^epsilon."""
    h = step.interval_lengths()
    bad = np.abs(h - h_star) >= h_star * gamma ** epsilon
    return float(np.sum(h[bad]))


def excess_energy_decomposition(params: ModelParams, step: StepProfile,
                                gamma: Optional[float] = None,
                                h_star: Optional[float] = None,
                                e_star: Optional[float] = None):
    """Both terms of the excess bound: interval excess and the well integral.

    Returns (excess_sum, tildeF_integral, per_interval) with
    excess_sum = sum_j h_j (e(h_j) - e(h*)) and the well integral
    (F(0)/m_beta^2) int (|sigma| - m_beta)^2.
    """
    gamma = params.gamma if gamma is None else gamma
    if h_star is None or e_star is None:
        from .sharp import optimal_h
        h_star, e_star, _, _ = optimal_h(params, gamma)
    per = []
    for a, b, _s in step.sign_intervals():
        h = b - a
        per.append((h, h * (energy_per_length(params, h, gamma) - e_star)))
    excess = float(sum(t for _, t in per))
    m_b = params.m_beta
    well = params.f0 / m_b ** 2 * float(
        np.sum(step.widths * (np.abs(step.values) - m_b) ** 2))
    return excess, well, per


def histogram_csv(report: StructureReport, n_bins: int = 24) -> str:
    """CSV of the sign-interval length histogram (total length per bin)."""
    h = report.h_lengths
    lines = ["bin_left,bin_right,total_length"]
    if h.size:
        counts, edges = np.histogram(h, bins=n_bins,
                                     range=(0.0, float(h.max())), weights=h)
        for k in range(n_bins):
            lines.append(f"{fmt17(edges[k])},{fmt17(edges[k + 1])},{fmt17(counts[k])}")
    return "\n".join(lines) + "\n"
