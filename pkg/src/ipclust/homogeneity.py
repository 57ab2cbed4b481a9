"""Chi-square test of homogeneity for two samples of distances.

Both samples are scaled by the maximum of their union, binned into
``w - 1`` equal-width right-closed intervals over (0, 1], and compared
with the 2 x (w - 1) chi-square statistic. The p-value comes from the
chi-square approximation or from Monte Carlo resampling with both table
margins held fixed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

MODES = ("auto", "asymptotic", "monte-carlo")
MIN_EXPECTED = 5.0
# Replicate statistics within this relative margin of the observed one count
# as ties (guards against rounding in sums of squares).
_TIE_FACTOR = 1.0 - 64 * np.finfo(float).eps


class DegenerateDistancesError(ValueError):
    """All distances are zero, so they cannot be normalized."""


class DegenerateTableError(ValueError):
    """Fewer than two categories are populated, so no test is possible."""


@dataclass(frozen=True)
class BinnedTable:
    counts: np.ndarray  # shape (2, w - 1)
    w: int

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[0] != 2:
            raise ValueError(f"table must have two rows, got shape {counts.shape}")
        if np.any(counts < 0):
            raise ValueError("counts must be nonnegative")
        if self.w < 3 or counts.shape[1] != self.w - 1:
            raise ValueError(f"need w >= 3 and w - 1 columns; w={self.w}, columns={counts.shape[1]}")
        if np.any(counts.sum(axis=1) == 0):
            raise ValueError("both rows need at least one observation")
        object.__setattr__(self, "counts", counts)

    @property
    def row_totals(self) -> tuple[int, int]:
        r = self.counts.sum(axis=1)
        return int(r[0]), int(r[1])

    def expected(self) -> np.ndarray:
        """Expected counts under homogeneity, restricted to non-empty columns."""
        c = self.counts[:, self.counts.sum(axis=0) > 0]
        return np.outer(c.sum(axis=1), c.sum(axis=0)) / c.sum()


@dataclass(frozen=True)
class HomogeneityResult:
    statistic: float
    df: int
    p_value: float
    method: str
    b_replicates: int = 0


def normalize_union(sample_a, sample_b):
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be non-empty")
    if np.any(a < 0) or np.any(b < 0):
        raise ValueError("distances must be nonnegative")
    top = max(a.max(), b.max())
    if top <= 0:
        raise DegenerateDistancesError("all distances are zero")
    return a / top, b / top


def bin_counts(normalized_a, normalized_b, w: int) -> BinnedTable:
    """Count values per interval ((j-1)/(w-1), j/(w-1)], j = 1..w-1.

    Zeros land in the first interval.
    """
    if w < 3:
        raise ValueError(f"w must be >= 3, got {w}")
    edges = np.arange(1, w) / (w - 1)
    edges[-1] = 1.0
    rows = []
    for values in (normalized_a, normalized_b):
        idx = np.searchsorted(edges, np.asarray(values, dtype=float), side="left")
        rows.append(np.bincount(np.minimum(idx, w - 2), minlength=w - 1))
    return BinnedTable(np.array(rows), w)


def _statistic(counts: np.ndarray) -> float:
    rows = counts.sum(axis=-1, keepdims=True)
    cols = counts.sum(axis=-2, keepdims=True)
    expected = rows * cols / counts.sum(axis=(-2, -1), keepdims=True)
    return ((counts - expected) ** 2 / expected).sum(axis=(-2, -1))


def chi_square_stat(table: BinnedTable) -> tuple[float, int]:
    counts = table.counts[:, table.counts.sum(axis=0) > 0]
    if counts.shape[1] < 2:
        raise DegenerateTableError(
            f"only {counts.shape[1]} of {table.w - 1} categories populated"
        )
    return float(_statistic(counts.astype(float))), counts.shape[1] - 1


def p_value_asymptotic(statistic: float, df: int) -> float:
    if df < 1:
        raise ValueError("df must be >= 1")
    return float(stats.chi2.sf(statistic, df))


def random_tables(row_totals, col_totals, b: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``b`` two-row tables uniformly among those with the given margins.

    Columns are filled left to right; each first-row cell is hypergeometric
    given what remains of the two row totals.
    """
    col_totals = np.asarray(col_totals, dtype=np.int64)
    out = np.empty((b, 2, len(col_totals)), dtype=np.int64)
    left_a = np.full(b, row_totals[0], dtype=np.int64)
    left_b = np.full(b, row_totals[1], dtype=np.int64)
    for j, c in enumerate(col_totals):
        if j == len(col_totals) - 1:
            top = left_a
        elif c == 0:
            top = np.zeros(b, dtype=np.int64)
        else:
            top = rng.hypergeometric(left_a, left_b, c)
        out[:, 0, j] = top
        out[:, 1, j] = c - top
        left_a = left_a - top
        left_b = left_b - (c - top)
    return out


def p_value_monte_carlo(table: BinnedTable, b: int = 10_000, seed=0) -> float:
    """Monte Carlo p-value, ``(1 + #{replicate >= observed}) / (b + 1)``."""
    if b < 1:
        raise ValueError("b must be >= 1")
    counts = table.counts[:, table.counts.sum(axis=0) > 0]
    observed, _ = chi_square_stat(table)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    sims = random_tables(counts.sum(axis=1), counts.sum(axis=0), b, rng)
    replicate = _statistic(sims.astype(float))
    hits = int(np.count_nonzero(replicate >= observed * _TIE_FACTOR))
    return (1 + hits) / (b + 1)


def homogeneity_test(sample_a, sample_b, w: int = 3, mode: str = "auto",
                     b: int = 10_000, seed=0) -> HomogeneityResult:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; choose from {MODES}")
    table = bin_counts(*normalize_union(sample_a, sample_b), w)
    statistic, df = chi_square_stat(table)
    if mode == "auto":
        mode = "asymptotic" if table.expected().min() >= MIN_EXPECTED else "monte-carlo"
    if mode == "asymptotic":
        return HomogeneityResult(statistic, df, p_value_asymptotic(statistic, df), "asymptotic")
    p = p_value_monte_carlo(table, b, seed)
    return HomogeneityResult(statistic, df, p, "monte-carlo", b)
