"""Distribution shaping: histograms, nearest-rank quantiles, shaped cost.

The shaped objective is the empirical mean of the sampled cost plus the sum
of nearest-rank quantiles at the levels in a QuantileSet. Cumulative
frequencies accumulate from the smallest cost upward, and the quantile at
level p is the smallest cost value whose cumulative frequency reaches p.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .cnf import ClauseArrays, CnfFormula, CostParams, _require_dominance
from .qsim import ShotSet

__all__ = [
    "CostHistogram",
    "QuantileSet",
    "DEFAULT_QUANTILE_LEVELS",
    "cost_histogram",
    "h_histogram",
    "quantile",
    "shaped_cost",
    "nearest_rank_quantile",
    "histogram_to_csv",
    "histogram_to_json_obj",
]

DEFAULT_QUANTILE_LEVELS = (0.01, 0.05, 0.1)


@dataclass(frozen=True)
class QuantileSet:
    """Sorted distinct probability levels in the open interval (0, 1)."""

    levels: tuple[float, ...]

    def __post_init__(self):
        if not self.levels:
            raise ValueError("quantile set must be nonempty")
        for p in self.levels:
            if not (0.0 < p < 1.0):
                raise ValueError(f"quantile level {p} outside (0, 1)")
        if any(b <= a for a, b in zip(self.levels, self.levels[1:])):
            raise ValueError(f"levels must be sorted and distinct: {self.levels}")

    @classmethod
    def of(cls, levels: Iterable[float]) -> "QuantileSet":
        return cls(levels=tuple(sorted(set(float(p) for p in levels))))

    @classmethod
    def parse(cls, text: str) -> "QuantileSet":
        """Parse a comma-separated list such as '0.01,0.05,0.1'."""
        try:
            values = [float(tok) for tok in text.split(",") if tok.strip()]
        except ValueError:
            raise ValueError(f"cannot parse quantile levels from {text!r}")
        return cls.of(values)

    @classmethod
    def default(cls) -> "QuantileSet":
        return cls(levels=DEFAULT_QUANTILE_LEVELS)

    def __len__(self) -> int:
        return len(self.levels)

    def __iter__(self):
        return iter(self.levels)


@dataclass(frozen=True, eq=False)
class CostHistogram:
    """Value -> count histogram with running cumulative frequencies.

    ``values`` is strictly increasing, ``counts`` positive, and ``cumfreq``
    holds cumsum(counts)/total so the final entry is exactly 1.
    """

    values: np.ndarray
    counts: np.ndarray
    total: int
    cumfreq: np.ndarray

    def __post_init__(self):
        if len(self.values) == 0:
            raise ValueError("histogram must be nonempty")
        if np.any(np.diff(self.values) <= 0):
            raise ValueError("histogram values must be strictly increasing")
        if np.any(self.counts <= 0):
            raise ValueError("histogram counts must be positive")
        if int(self.counts.sum()) != self.total:
            raise ValueError("histogram counts must sum to total")
        if abs(self.cumfreq[-1] - 1.0) > 1e-12:
            raise ValueError("cumulative frequency must end at 1")

    @classmethod
    def from_samples(cls, samples: np.ndarray) -> "CostHistogram":
        samples = np.asarray(samples, dtype=np.float64)
        if samples.size == 0:
            raise ValueError("cannot build a histogram from zero samples")
        values, counts = np.unique(samples, return_counts=True)
        total = int(counts.sum())
        return cls(
            values=values,
            counts=counts.astype(np.int64),
            total=total,
            cumfreq=np.cumsum(counts) / total,
        )

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, int]]) -> "CostHistogram":
        """Build from (value, count) pairs, e.g. a published table."""
        items = sorted((float(v), int(c)) for v, c in pairs if int(c) > 0)
        values = np.array([v for v, _ in items], dtype=np.float64)
        counts = np.array([c for _, c in items], dtype=np.int64)
        total = int(counts.sum())
        return cls(
            values=values, counts=counts, total=total,
            cumfreq=np.cumsum(counts) / total,
        )

    @property
    def mean(self) -> float:
        return float(np.dot(self.values, self.counts) / self.total)

    def probabilities(self) -> np.ndarray:
        return self.counts / self.total


def nearest_rank_quantile(
    values: np.ndarray, cumfreq: np.ndarray, p: float
) -> float:
    """Smallest value whose cumulative relative frequency reaches p.

    Shared by the sampled and the exact (probability-mass) estimators so both
    use one definition; cf_0 (before the first entry) counts as 0.
    """
    if not (0.0 < p < 1.0):
        raise ValueError(f"quantile level {p} outside (0, 1)")
    idx = int(np.searchsorted(cumfreq, p, side="left"))
    if idx >= len(values):  # float drift in a mass-based cumfreq tail
        idx = len(values) - 1
    return float(values[idx])


def quantile(hist: CostHistogram, p: float) -> float:
    return nearest_rank_quantile(hist.values, hist.cumfreq, p)


def shaped_cost(hist: CostHistogram, levels: QuantileSet) -> float:
    """Empirical mean plus the sum of the requested quantile values."""
    return hist.mean + sum(quantile(hist, p) for p in levels)


def cost_histogram(
    f: CnfFormula, shots: ShotSet, params: CostParams
) -> CostHistogram:
    """Histogram of the hierarchical cost over all shots."""
    if shots.count < 1:
        raise ValueError("shot set is empty")
    if shots.n != f.n:
        raise ValueError(f"shots have {shots.n} bits, formula has n={f.n}")
    _require_dominance(f, params)
    arrays = ClauseArrays(f)
    h, d = arrays.h_and_d(shots.bits)
    return CostHistogram.from_samples(params.zeta * h + params.vartheta * d)


def h_histogram(f: CnfFormula, shots: ShotSet) -> CostHistogram:
    """Histogram of the unsatisfied-clause count; used for reporting."""
    if shots.count < 1:
        raise ValueError("shot set is empty")
    if shots.n != f.n:
        raise ValueError(f"shots have {shots.n} bits, formula has n={f.n}")
    return CostHistogram.from_samples(ClauseArrays(f).h(shots.bits))


def histogram_to_csv(hist: CostHistogram, value_label: str = "value") -> str:
    """CSV with columns value,count,probability,cumfreq."""
    lines = [f"{value_label},count,probability,cumfreq"]
    probs = hist.probabilities()
    for v, c, p, cf in zip(hist.values, hist.counts, probs, hist.cumfreq):
        v_repr = int(v) if float(v).is_integer() else v
        lines.append(f"{v_repr},{c},{p:.9g},{cf:.9g}")
    return "\n".join(lines) + "\n"


def histogram_to_json_obj(hist: CostHistogram, value_label: str = "value") -> list[dict]:
    probs = hist.probabilities()
    return [
        {
            value_label: int(v) if float(v).is_integer() else float(v),
            "count": int(c),
            "probability": float(p),
            "cumfreq": float(cf),
        }
        for v, c, p, cf in zip(hist.values, hist.counts, probs, hist.cumfreq)
    ]


def histogram_from_json_obj(obj: Sequence[dict], value_label: str = "value") -> CostHistogram:
    return CostHistogram.from_pairs((row[value_label], row["count"]) for row in obj)


def parse_histogram_csv(text: str) -> CostHistogram:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    pairs = []
    for ln in lines[1:]:
        cells = ln.split(",")
        pairs.append((float(cells[0]), int(cells[1])))
    return CostHistogram.from_pairs(pairs)


def to_json(hist: CostHistogram, value_label: str = "value") -> str:
    return json.dumps(histogram_to_json_obj(hist, value_label), indent=2)
