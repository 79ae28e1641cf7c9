"""Cross-problem gradient signal-to-noise profiles over pass-rate bins.

Each problem contributes one deterministic gradient vector tagged with its
estimated pass rate. Records are grouped into equal-width pass-rate bins
(same edge convention as passrate.histogram: left-closed, final bin closed)
and each bin reports

    snr = ||mean gradient|| / sqrt(mean ||g_i - mean||^2)

with a population variance in the denominator. Bins can be undefined two
ways: empty (count 0, no values at all) or degenerate (all gradients in the
bin identical, zero spread). Undefined SNRs are excluded from the empirical
normalization maximum; empty bins are excluded from the theoretical one as
well, since they have no mean pass rate to evaluate.

The theoretical curve is sqrt(mean_p (1 - mean_p)) per bin, normalized by
its own maximum, evaluated at bin mean pass rates rather than bin centers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import DegenerateInputError, DomainError, InsufficientDataError
from .passrate import PassRate

__all__ = [
    "GradientRecord",
    "SnrBin",
    "SnrProfile",
    "compute_snr_bins",
    "normalize_profile",
    "bell_shape_score",
]


@dataclass(frozen=True)
class GradientRecord:
    """One problem's gradient vector and pass rate.

    pass_rate is a PassRate when produced in-process; records loaded from
    files carry a bare float, since the serialized form keeps only p.
    """

    problem_id: str
    pass_rate: PassRate | float
    gradient: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.problem_id:
            raise DomainError("GradientRecord requires a non-empty problem_id")
        grad = tuple(float(g) for g in self.gradient)
        object.__setattr__(self, "gradient", grad)
        if len(grad) == 0:
            raise DomainError(f"GradientRecord {self.problem_id!r} has empty gradient")
        if any(not math.isfinite(g) for g in grad):
            raise DomainError(f"GradientRecord {self.problem_id!r} has non-finite entries")
        if not 0.0 <= self.p <= 1.0:
            raise DomainError(f"pass rate must lie in [0,1], got {self.p}")

    @property
    def p(self) -> float:
        if isinstance(self.pass_rate, PassRate):
            return self.pass_rate.p
        return float(self.pass_rate)


@dataclass(frozen=True)
class SnrBin:
    """One pass-rate bin of an SNR profile.

    snr is None when the bin is empty or degenerate; mean_p is None only
    when the bin is empty. Normalized fields stay None until
    normalize_profile runs.
    """

    lo: float
    hi: float
    mean_p: float | None
    count: int
    snr: float | None
    degenerate: bool = False
    snr_norm: float | None = None
    theory_norm: float | None = None


@dataclass(frozen=True)
class SnrProfile:
    bins: tuple[SnrBin, ...]

    @property
    def num_bins(self) -> int:
        return len(self.bins)


def _bin_indices(ps: np.ndarray, edges: np.ndarray) -> np.ndarray:
    # Left-closed bins, final bin closed: same placement as np.histogram.
    idx = np.searchsorted(edges, ps, side="right") - 1
    return np.clip(idx, 0, len(edges) - 2)


def compute_snr_bins(
    records: Sequence[GradientRecord], num_bins: int
) -> SnrProfile:
    """Per-bin cross-problem SNR, before normalization."""
    if len(records) == 0:
        raise InsufficientDataError("compute_snr_bins requires at least one record")
    if num_bins < 2:
        raise DomainError(f"num_bins must be >= 2, got {num_bins}")
    dims = {len(r.gradient) for r in records}
    if len(dims) != 1:
        raise DomainError(f"gradient dimensions differ across records: {sorted(dims)}")

    ps = np.array([r.p for r in records], dtype=np.float64)
    grads = np.array([r.gradient for r in records], dtype=np.float64)
    edges = np.linspace(0.0, 1.0, num_bins + 1)
    idx = _bin_indices(ps, edges)

    bins: list[SnrBin] = []
    for j in range(num_bins):
        mask = idx == j
        count = int(mask.sum())
        if count == 0:
            bins.append(
                SnrBin(lo=float(edges[j]), hi=float(edges[j + 1]), mean_p=None,
                       count=0, snr=None)
            )
            continue
        g = grads[mask]
        mean_p = float(ps[mask].mean())
        g_bar = g.mean(axis=0)
        spread_sq = float(np.mean(np.sum((g - g_bar) ** 2, axis=1)))
        if spread_sq == 0.0:
            bins.append(
                SnrBin(lo=float(edges[j]), hi=float(edges[j + 1]), mean_p=mean_p,
                       count=count, snr=None, degenerate=True)
            )
            continue
        snr = float(np.linalg.norm(g_bar) / math.sqrt(spread_sq))
        bins.append(
            SnrBin(lo=float(edges[j]), hi=float(edges[j + 1]), mean_p=mean_p,
                   count=count, snr=snr)
        )
    return SnrProfile(bins=tuple(bins))


def _theory_value(mean_p: float) -> float:
    return math.sqrt(mean_p * (1.0 - mean_p))


def normalize_profile(profile: SnrProfile) -> SnrProfile:
    """Divide empirical and theoretical bin values by their own maxima."""
    defined = [b.snr for b in profile.bins if b.snr is not None and b.count > 0]
    if not defined:
        raise DegenerateInputError("no bin has a defined SNR")
    snr_max = max(defined)
    if snr_max <= 0.0:
        raise DegenerateInputError("all defined SNR values are zero")
    theory_values = [
        _theory_value(b.mean_p) for b in profile.bins if b.mean_p is not None
    ]
    theory_max = max(theory_values)
    if theory_max <= 0.0:
        raise DegenerateInputError("all theoretical bin values are zero")

    out = []
    for b in profile.bins:
        snr_norm = None if b.snr is None else b.snr / snr_max
        theory_norm = (
            None if b.mean_p is None else _theory_value(b.mean_p) / theory_max
        )
        out.append(replace(b, snr_norm=snr_norm, theory_norm=theory_norm))
    return SnrProfile(bins=tuple(out))


def bell_shape_score(profile: SnrProfile) -> tuple[bool, float]:
    """(is_bell, mid/edge ratio) of normalized SNR heights.

    Mid bins have mean_p in [0.35, 0.65]; edge bins have mean_p < 0.2 or
    > 0.8. The ratio is scale-invariant, so an un-normalized profile is
    normalized internally first.
    """
    n_defined = sum(1 for b in profile.bins if b.snr is not None)
    if n_defined < 3:
        raise InsufficientDataError(
            f"bell_shape_score needs >= 3 defined bins, got {n_defined}"
        )
    if any(b.snr is not None and b.snr_norm is None for b in profile.bins):
        profile = normalize_profile(profile)

    mid = [
        b.snr_norm
        for b in profile.bins
        if b.snr_norm is not None and b.mean_p is not None and 0.35 <= b.mean_p <= 0.65
    ]
    edge = [
        b.snr_norm
        for b in profile.bins
        if b.snr_norm is not None
        and b.mean_p is not None
        and (b.mean_p < 0.2 or b.mean_p > 0.8)
    ]
    if not mid or not edge:
        raise InsufficientDataError(
            "bell_shape_score needs at least one mid bin (mean_p in [0.35, 0.65]) "
            "and one edge bin (mean_p < 0.2 or > 0.8)"
        )
    edge_mean = float(np.mean(edge))
    if edge_mean == 0.0:
        return True, math.inf
    ratio = float(np.mean(mid)) / edge_mean
    return ratio > 1.0, ratio
