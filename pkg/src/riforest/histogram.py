"""One-dimensional node analysis on equal-width histograms.

Bins are numbered 1..L in the public API (``ValleySplit.t_star``) and stored
0-based in arrays. All bins are half-open except the last, which is closed so
the maximum value is counted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from riforest.exceptions import DataError, NoValleySplitError


@dataclass(frozen=True)
class Histogram:
    lo: float
    hi: float
    counts: np.ndarray
    degenerate: bool = False

    @property
    def bin_count(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def probs(self) -> np.ndarray:
        return self.counts / self.counts.sum()

    def upper_edge(self, t: int) -> float:
        """Upper bound of bin ``t`` (1-based)."""
        return self.lo + t * (self.hi - self.lo) / self.bin_count


@dataclass(frozen=True)
class ValleySplit:
    t_star: int
    split_point: float
    objective: float
    w_left: float
    w_right: float
    pl: float


def bin_indices(values: np.ndarray, lo, hi, L: int) -> np.ndarray:
    """0-based bin of every value, floor(L * (v - lo) / (hi - lo)) clipped to [0, L-1].

    Broadcasts over columns when ``lo``/``hi`` are arrays. Zero-width ranges map
    to bin 0.
    """
    width = np.asarray(hi - lo, dtype=np.float64)
    safe = np.where(width > 0, width, np.inf)
    # values >= lo, so truncation equals floor; inf width sends everything to 0
    idx = ((values - lo) * L / safe).astype(np.intp)
    np.minimum(idx, L - 1, out=idx)
    return idx


def histogram_counts(columns: np.ndarray, L: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-column bin counts for an (n, m) matrix.

    Returns ``(counts, lo, hi)`` with counts of shape (m, L). Constant columns
    put all mass in the first bin.
    """
    lo = columns.min(axis=0)
    hi = columns.max(axis=0)
    return histogram_counts_in_range(columns, lo, hi, L), lo, hi


def histogram_counts_in_range(
    columns: np.ndarray, lo: np.ndarray, hi: np.ndarray, L: int
) -> np.ndarray:
    """Like :func:`histogram_counts` with precomputed column minima and maxima."""
    idx = bin_indices(columns, lo, hi, L)
    m = columns.shape[1]
    idx += np.arange(0, m * L, L)
    return np.bincount(idx.ravel(), minlength=m * L).reshape(m, L)


def build_histogram(values, L: int) -> Histogram:
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.size == 0:
        raise DataError("cannot histogram an empty sequence")
    if not np.all(np.isfinite(values)):
        raise DataError("histogram values must be finite")
    if L < 2:
        raise ValueError(f"need at least 2 bins, got {L}")
    counts, lo, hi = histogram_counts(values[:, None], L)
    return Histogram(float(lo[0]), float(hi[0]), counts[0], degenerate=bool(hi[0] == lo[0]))


def entropy_from_counts(counts: np.ndarray) -> np.ndarray:
    """Normalized Shannon entropy along the last axis.

    Uses -sum p ln p = ln n - (1/n) sum c ln c for integer counts c with total
    n, then divides by ln L. Empty bins contribute 0. Bin terms are summed left
    to right and logs come from libm so the compiled tree kernel reproduces the
    same bits.
    """
    counts = np.asarray(counts)
    L = counts.shape[-1]
    n = counts.sum(axis=-1)
    clogc = np.cumsum(xlogy(counts, counts), axis=-1)[..., -1]
    log_n = np.vectorize(math.log, otypes=[np.float64])(n)
    return (log_n - clogc / n) / math.log(L)


def dimension_entropy(h: Histogram) -> float:
    ent = float(entropy_from_counts(h.counts))
    # -0.0 and tiny rounding overshoot are folded back into [0, 1]
    return min(max(ent, 0.0), 1.0)


def valley_emphasis(h: Histogram) -> ValleySplit:
    """Valley-emphasis threshold over bins 2..L-1.

    Maximizes ``(1 - p_t) * (w_L mu_L^2 + w_R mu_R^2)``, where the class means
    use the bin numbers 1..L as the value scale. Only thresholds leaving mass on
    both sides compete; ties go to the smaller t. Candidates are compared in
    exact integer arithmetic so ties are real ties.
    """
    L = h.bin_count
    if L < 3:
        raise ValueError(f"valley emphasis needs at least 3 bins, got {L}")
    if h.degenerate:
        raise NoValleySplitError("histogram has zero range")
    counts = h.counts.tolist()
    n = sum(counts)
    s_total = sum((j + 1) * c for j, c in enumerate(counts))

    # w_L mu_L^2 = S_L^2 / (n N_L), so the objective is
    # (n - n_t) (S_L^2 N_R + S_R^2 N_L) / (n^2 N_L N_R)
    best = None
    n_left = s_left = 0
    for t in range(1, L):
        n_left += counts[t - 1]
        s_left += t * counts[t - 1]
        if t == 1:
            continue
        n_right = n - n_left
        if n_left == 0 or n_right == 0:
            continue
        s_right = s_total - s_left
        num = (n - counts[t - 1]) * (s_left * s_left * n_right + s_right * s_right * n_left)
        den = n_left * n_right
        if best is None or num * best[2] > best[1] * den:
            best = (t, num, den, n_left)
    if best is None:
        raise NoValleySplitError("no threshold leaves mass on both sides")

    t, num, den, n_left = best
    n_right = n - n_left
    return ValleySplit(
        t_star=t,
        split_point=h.upper_edge(t),
        objective=num / (den * n * n),
        w_left=n_left / n,
        w_right=n_right / n,
        pl=1.0 - abs(n_left - n_right) / n,
    )


def split_path_length(h: Histogram, t_star: int) -> float:
    """Path increment 1 - |mass(bins 1..t) - mass(bins t+1..L)|."""
    L = h.bin_count
    if not (1 < t_star < L):
        raise ValueError(f"t_star must satisfy 1 < t < {L}, got {t_star}")
    p = h.probs
    return 1.0 - abs(float(p[:t_star].sum()) - float(p[t_star:].sum()))


def blank_space_split(values) -> tuple[float, float]:
    """Midpoint of the widest gap between consecutive distinct values (leftmost on ties)."""
    distinct = np.unique(np.asarray(values, dtype=np.float64))
    if distinct.size < 2:
        raise DataError("blank-space split needs at least two distinct values")
    gaps = np.diff(distinct)
    k = int(np.argmax(gaps))
    return float((distinct[k] + distinct[k + 1]) / 2.0), float(gaps[k])
