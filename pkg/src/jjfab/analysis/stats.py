"""Grouped mean / sigma statistics for probe and qubit data.

Spreads use the population standard deviation (divide by N) unless
``ddof`` is given explicitly.
"""

from __future__ import annotations

import math
import warnings
from collections import defaultdict
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from .. import electrical as el

QUBIT_QUANTITIES = ("f01_ghz", "t1_us", "t2star_us")
TOTAL = "total"


def round_half_up(x, digits=2):
    """Decimal half-up rounding of the shortest repr, so 4.305 -> 4.31."""
    if not math.isfinite(x):
        return x
    return float(Decimal(repr(float(x))).quantize(Decimal(1).scaleb(-digits), rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class StatsSummary:
    key: str
    n: int
    mean: float
    population_sigma: float
    sigma_over_mean_percent: float
    quantity: str = ""

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("StatsSummary needs n >= 1")
        if self.population_sigma < 0:
            raise ValueError("sigma must be >= 0")

    def as_row(self, digits=2):
        return {
            "group": self.key,
            "quantity": self.quantity,
            "n": self.n,
            "mean": self.mean,
            "mean_rounded": round_half_up(self.mean, digits),
            "sigma": self.population_sigma,
            "sigma_over_mean_percent": round_half_up(self.sigma_over_mean_percent, digits),
        }


def summarize_values(key, values, quantity="", ddof=0) -> StatsSummary:
    # sorted so the float sum does not depend on input order
    v = np.sort(np.asarray(values, dtype=float))
    n = v.size
    if n < 1:
        raise ValueError("no values to summarize")
    mean = float(np.mean(v))
    sigma = float(np.std(v, ddof=ddof)) if n > ddof else 0.0
    pct = 100.0 * sigma / mean if mean != 0 else math.nan
    return StatsSummary(key, n, mean, sigma, pct, quantity)


def group_sigma_over_mean(records, constants=el.DEFAULT_CONSTANTS, temperature_K=0.0, ddof=0):
    """sigma/<Ic> per design area from kept records (status ok).

    Ic comes from each Rn through the Ambegaokar-Baratoff relation, so the
    spread is that of 1/Rn, not of Rn itself.
    """
    groups = defaultdict(list)
    for r in records:
        if r.status == "ok":
            groups[(r.design_width_nm * r.design_length_nm, r.design)].append(r.resistance_ohm)
    out = []
    for (_, name), rn in sorted(groups.items()):
        if not rn:
            warnings.warn(f"design group {name} is empty; skipped", stacklevel=2)
            continue
        ic = np.atleast_1d(el.ic_from_rn(np.array(rn), constants, temperature_K))
        out.append(summarize_values(name, ic, "ic_na", ddof))
    return out


def qubit_table_stats(records, ddof=0):
    """Per-chip and total summaries for f01, T1 and T2*.

    Returns a dict ``{quantity: [StatsSummary per chip ..., total]}``; chips
    keep their order of first appearance.
    """
    records = list(records)
    if not records:
        raise ValueError("qubit table is empty")
    chips = list(dict.fromkeys(r.chip_id for r in records))
    out = {}
    for q in QUBIT_QUANTITIES:
        rows = []
        for chip in chips:
            vals = [getattr(r, q) for r in records if r.chip_id == chip]
            rows.append(summarize_values(chip, vals, q, ddof))
        rows.append(summarize_values(TOTAL, [getattr(r, q) for r in records], q, ddof))
        out[q] = rows
    return out
