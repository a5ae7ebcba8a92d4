"""Profile representations, block partitions and the on-disk profile format.

Grid profiles sample the magnetization at cell midpoints, so every integral
in the package is a midpoint sum and block averages of piecewise-constant
functions are exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import (AlignmentError, DomainTooShort, InvariantError,
                     ParseError, ValidationError)

__all__ = [
    "GridProfile",
    "StepProfile",
    "BlockPartition",
    "BC_TOKENS",
    "average_over",
    "coarse_version",
    "block_type",
    "alpha_L",
    "save_profile",
    "load_profile",
]

BC_TOKENS = ("open", "periodic", "neumann", "plus", "minus", "custom")

_GRID_RTOL = 1e-9


def _is_integer(x: float, rtol: float = _GRID_RTOL) -> bool:
    return abs(x - round(x)) <= rtol * max(1.0, abs(x))


@dataclass(frozen=True)
class GridProfile:
    """Uniformly sampled magnetization on [0, L], values in [-1, 1].

    Samples live at cell midpoints (i + 1/2) dx. ``bc`` tags the boundary
    condition; custom boundary data is carried in ``out_left``/``out_right``
    as midpoint samples on the grids extending away from the domain:
    ``out_left[j]`` sits at -(j + 1/2) dx, ``out_right[j]`` at L + (j + 1/2) dx.
    """

    L: float
    dx: float
    samples: np.ndarray
    bc: str = "open"
    out_left: Optional[np.ndarray] = None
    out_right: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.bc not in BC_TOKENS:
            raise ValidationError(f"unknown bc token {self.bc!r}")
        if self.dx <= 0 or self.L <= 0:
            raise ValidationError("L and dx must be positive")
        if not _is_integer(self.L / self.dx):
            raise ValidationError("L/dx must be an integer")
        if not _is_integer(1.0 / self.dx):
            raise ValidationError("1/dx must be an integer (J-range alignment)")
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1 or samples.size != int(round(self.L / self.dx)):
            raise ValidationError("samples must be a vector of length L/dx")
        if np.any(np.abs(samples) > 1.0 + 1e-12):
            raise InvariantError("samples must lie in [-1, 1]")
        samples = np.clip(samples, -1.0, 1.0)
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)
        for name in ("out_left", "out_right"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.asarray(arr, dtype=float)
                if np.any(np.abs(arr) > 1.0 + 1e-12):
                    raise InvariantError(f"{name} must lie in [-1, 1]")
                arr = np.clip(arr, -1.0, 1.0)
                arr.flags.writeable = False
                object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def x(self) -> np.ndarray:
        """Midpoint coordinates."""
        return (np.arange(self.n) + 0.5) * self.dx

    def with_samples(self, samples) -> "GridProfile":
        return replace(self, samples=np.asarray(samples, dtype=float))

    def mean(self) -> float:
        return float(self.samples.mean())

    @classmethod
    def constant(cls, value: float, L: float, dx: float,
                 bc: str = "open") -> "GridProfile":
        n = int(round(L / dx))
        return cls(L=n * dx, dx=dx, samples=np.full(n, float(value)), bc=bc)


def _grid_index(profile: GridProfile, point: float, what: str) -> int:
    idx = point / profile.dx
    if not _is_integer(idx, 1e-9):
        raise AlignmentError(f"{what} {point} is not on the grid (dx={profile.dx})")
    return int(round(idx))


def average_over(profile: GridProfile, interval: Tuple[float, float]) -> float:
    """Exact midpoint-rule mean of the samples inside ``interval``."""
    a, b = interval
    if a < -_GRID_RTOL or b > profile.L * (1 + _GRID_RTOL) or b <= a:
        raise AlignmentError(f"interval ({a}, {b}) not inside [0, {profile.L}]")
    i = _grid_index(profile, a, "left endpoint")
    j = _grid_index(profile, b, "right endpoint")
    if j <= i:
        raise AlignmentError("empty interval")
    return float(profile.samples[i:j].mean())


def block_type(mean_value: float, m_beta: float) -> str:
    """Type of a block by its mean: plus/minus beyond 0.9 m_beta, else zero."""
    if mean_value >= 0.9 * m_beta:
        return "plus"
    if mean_value <= -0.9 * m_beta:
        return "minus"
    return "zero"


def alpha_L(L: float, delta: float, gamma: float) -> Tuple[float, int]:
    """Smallest alpha >= 1 with (L/alpha) gamma^delta integral.

    Scans block counts n = floor(L gamma^delta) downward; returns
    (alpha, n_blocks).
    """
    target = L * gamma ** delta
    n = int(np.floor(target * (1 + _GRID_RTOL)))
    if n < 1:
        raise DomainTooShort(
            f"L={L} shorter than one block gamma^-delta={gamma**-delta}")
    return target / n, n


@dataclass(frozen=True)
class BlockPartition:
    """Intervals tiling [0, L] with per-block metadata.

    ``kind`` is regular_delta / regular_delta0 / adapted. ``labels`` holds
    parallel per-block arrays (good/bad flags, types, energies) added by the
    coarse-graining and diagnostics stages.
    """

    edges: np.ndarray
    kind: str
    labels: dict = field(default_factory=dict)

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        if edges.ndim != 1 or edges.size < 2:
            raise ValidationError("need at least two edges")
        if np.any(np.diff(edges) <= 0):
            raise ValidationError("edges must be strictly increasing")
        edges.flags.writeable = False
        object.__setattr__(self, "edges", edges)

    @property
    def n_blocks(self) -> int:
        return self.edges.size - 1

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    def blocks(self) -> Sequence[Tuple[float, float]]:
        return list(zip(self.edges[:-1], self.edges[1:]))

    def snapped(self, dx: float) -> "BlockPartition":
        """Edges rounded to the nearest grid line (<= dx/2 displacement)."""
        snapped = np.round(self.edges / dx) * dx
        if np.any(np.diff(snapped) <= 0):
            raise ValidationError("grid too coarse to snap this partition")
        return BlockPartition(edges=snapped, kind=self.kind,
                              labels=dict(self.labels))


def regular_partition_edges(L: float, delta: float, gamma: float) -> np.ndarray:
    _, n = alpha_L(L, delta, gamma)
    return np.linspace(0.0, L, n + 1)


def coarse_version(profile: GridProfile, delta0: float, gamma: float) -> GridProfile:
    """Block-constant version of the profile on the regular partition.

    Partition edges are snapped to the sample grid so every block mean is an
    exact sample average; means are preserved per block.
    """
    edges = regular_partition_edges(profile.L, delta0, gamma)
    part = BlockPartition(edges=edges, kind="regular_delta0").snapped(profile.dx)
    out = np.empty_like(profile.samples)
    idx = np.round(part.edges / profile.dx).astype(int)
    for k in range(part.n_blocks):
        i, j = idx[k], idx[k + 1]
        out[i:j] = profile.samples[i:j].mean()
    return profile.with_samples(out)


@dataclass(frozen=True)
class StepProfile:
    """Piecewise-constant profile: values[i] on [breakpoints[i], breakpoints[i+1])."""

    breakpoints: np.ndarray
    values: np.ndarray
    m_bar: Optional[float] = None

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if bp.ndim != 1 or bp.size < 2 or vals.size != bp.size - 1:
            raise ValidationError("need n+1 breakpoints for n values")
        if np.any(np.diff(bp) <= 0):
            raise ValidationError("breakpoints must be strictly increasing")
        if abs(bp[0]) > 1e-12:
            raise ValidationError("first breakpoint must be 0")
        if np.any(np.abs(vals) > 1.0 + 1e-12):
            raise InvariantError("step values must lie in [-1, 1]")
        vals = np.clip(vals, -1.0, 1.0)
        bp.flags.writeable = False
        vals.flags.writeable = False
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    @property
    def L(self) -> float:
        return float(self.breakpoints[-1])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    @property
    def in_K(self) -> bool:
        """Whether min |values| >= m_bar (requires m_bar to be set)."""
        if self.m_bar is None:
            return False
        return bool(np.min(np.abs(self.values)) >= self.m_bar - 1e-12)

    def mean(self) -> float:
        return float(np.sum(self.widths * self.values) / self.L)

    def n_jumps(self, periodic: bool = False) -> int:
        """Sign changes between consecutive pieces (pieces of equal sign merge)."""
        signs = np.sign(self.values)
        n = int(np.sum(signs[1:] * signs[:-1] < 0))
        if periodic and signs[0] * signs[-1] < 0:
            n += 1
        return n

    def sign_intervals(self, periodic: bool = False):
        """Maximal constant-sign intervals as (start, stop, sign) triples.

        With ``periodic`` the first and last intervals merge when they share
        a sign; the merged interval is reported with the wrapped length,
        starting at its true (unwrapped) left edge.
        """
        signs = np.sign(self.values)
        runs = []
        start = 0
        for i in range(1, signs.size):
            if signs[i] != signs[start]:
                runs.append((self.breakpoints[start], self.breakpoints[i],
                             float(signs[start])))
                start = i
        runs.append((self.breakpoints[start], self.breakpoints[-1],
                     float(signs[start])))
        if periodic and len(runs) > 1 and runs[0][2] == runs[-1][2]:
            a_last, b_last, s = runs[-1]
            a0, b0, _ = runs[0]
            runs = runs[1:-1]
            runs.insert(0, (a_last - self.L, b0, s))
        return runs

    def interval_lengths(self, periodic: bool = False) -> np.ndarray:
        return np.array([b - a for a, b, _ in self.sign_intervals(periodic)])

    def to_grid(self, dx: float, bc: str = "open") -> GridProfile:
        """Midpoint sampling onto a uniform grid (breakpoints need not align)."""
        n = int(round(self.L / dx))
        x = (np.arange(n) + 0.5) * dx
        idx = np.searchsorted(self.breakpoints, x, side="right") - 1
        idx = np.clip(idx, 0, self.values.size - 1)
        return GridProfile(L=n * dx, dx=dx, samples=self.values[idx], bc=bc)

    def restrict(self, a: float, b: float) -> "StepProfile":
        """Restriction to [a, b], re-anchored at 0."""
        if not (a < b <= self.L + 1e-12 and a >= -1e-12):
            raise ValidationError("restriction outside domain")
        keep_bp = [0.0]
        keep_vals = []
        for lo, hi, val in zip(self.breakpoints[:-1], self.breakpoints[1:],
                               self.values):
            lo2, hi2 = max(lo, a), min(hi, b)
            if hi2 - lo2 > 1e-14:
                keep_vals.append(val)
                keep_bp.append(hi2 - a)
        return StepProfile(breakpoints=np.array(keep_bp),
                           values=np.array(keep_vals), m_bar=self.m_bar)

    @classmethod
    def from_pieces(cls, pieces, m_bar: Optional[float] = None) -> "StepProfile":
        """Build from (width, value) pairs."""
        widths = np.array([w for w, _ in pieces], dtype=float)
        vals = np.array([v for _, v in pieces], dtype=float)
        bp = np.concatenate([[0.0], np.cumsum(widths)])
        return cls(breakpoints=bp, values=vals, m_bar=m_bar)


# ---------------------------------------------------------------------------
# profile file format
#
# UTF-8 text; header lines "L <float>", "dx <float>", "bc <token>", optional
# extra "<key> <float>" headers, then one sample per line (17 significant
# digits). '#' starts a comment.

def save_profile(profile: GridProfile, path, extra_headers: Optional[dict] = None,
                 comments: Optional[list] = None):
    lines = [f"# {c}" for c in (comments or [])]
    lines += [f"L {format(profile.L, '.17g')}",
              f"dx {format(profile.dx, '.17g')}",
              f"bc {profile.bc}"]
    for key, val in (extra_headers or {}).items():
        lines.append(f"{key} {format(float(val), '.17g')}")
    lines.extend(format(s, '.17e') for s in profile.samples)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_profile(path):
    """Load a profile file; returns (GridProfile, extra_headers)."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = fh.readlines()
    headers = {}
    samples = []
    bc = None
    L = dx = None
    saw_any = False
    for lineno, line in enumerate(raw, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        saw_any = True
        parts = text.split()
        if len(parts) == 2 and not _is_float(parts[0]):
            key, val = parts
            if key == "L":
                L = _parse_float(val, lineno)
            elif key == "dx":
                dx = _parse_float(val, lineno)
            elif key == "bc":
                if val not in BC_TOKENS:
                    raise ParseError(f"unknown bc token {val!r}", line=lineno)
                bc = val
            else:
                headers[key] = _parse_float(val, lineno)
        elif len(parts) == 1:
            samples.append(_parse_float(parts[0], lineno))
        else:
            raise ParseError(f"unparseable line {text!r}", line=lineno)
    if not saw_any:
        raise ParseError("empty profile file", line=0)
    if L is None or dx is None or bc is None:
        raise ParseError("missing L/dx/bc header", line=0)
    arr = np.asarray(samples, dtype=float)
    if np.any(np.abs(arr) > 1.0 + 1e-12):
        raise InvariantError("sample outside [-1, 1] in profile file")
    try:
        prof = GridProfile(L=L, dx=dx, samples=arr, bc=bc)
    except ValidationError as err:
        raise ParseError(str(err), line=0) from err
    return prof, headers


def _is_float(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def _parse_float(token: str, lineno: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"bad number {token!r}", line=lineno) from None
