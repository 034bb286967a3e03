"""Low-level numeric helpers: safe logs and compensated accumulation.

Deflators are accumulated in the log domain and dividend sums use
compensated summation, so results stay accurate over horizons up to 10^6
periods where linear-domain state prices would underflow.
"""

from __future__ import annotations

import math
from typing import Iterable

import numpy as np


def safe_log(x: float) -> float:
    """log(x) for x > 0, -inf for x == 0 (never raises on the boundary)."""
    return math.log(x) if x > 0.0 else -math.inf


def compensated_cumsum(values: Iterable[float]) -> np.ndarray:
    """Running sums of ``values`` with Neumaier compensation.

    Plain ``np.cumsum`` loses ~n*eps*|sum| which is too coarse for the
    telescoping identity at 1e-12 relative tolerance; the compensated loop
    keeps the error near one ulp of each partial sum.  Non-finite inputs
    (a -inf log of a zero price) propagate without producing NaN.
    """
    if isinstance(values, np.ndarray):
        values = values.tolist()
    out = np.empty(len(values))
    total = 0.0
    carry = 0.0
    for i, v in enumerate(values):
        t = total + v
        if not math.isfinite(t):
            carry = 0.0
        elif abs(total) >= abs(v):
            carry += (total - t) + v
        else:
            carry += (v - t) + total
        total = t
        out[i] = total + carry
    return out


def compensated_sum(values: Iterable[float]) -> float:
    """Exact-rounding sum (Shewchuk); wrapper kept for symmetry."""
    return math.fsum(values)
