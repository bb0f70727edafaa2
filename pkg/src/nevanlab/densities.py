"""Density and logarithmic density of finite unions of intervals in [1, inf)."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError
from .logcplx import RadialGrid


@dataclass(frozen=True)
class IntervalSet:
    """Sorted disjoint intervals ``(a, b)`` with ``1 <= a < b``; overlaps are merged on construction."""

    intervals: tuple = ()

    def __post_init__(self):
        ivs = []
        for a, b in self.intervals:
            a, b = float(a), float(b)
            if not (1.0 <= a < b):
                raise DomainError(f"interval ({a}, {b}) must satisfy 1 <= a < b")
            ivs.append((a, b))
        ivs.sort()
        merged = []
        for a, b in ivs:
            if merged and a <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(merged[-1][1], b))
            else:
                merged.append((a, b))
        object.__setattr__(self, "intervals", tuple(merged))

    @classmethod
    def parse(cls, text: str) -> IntervalSet:
        """From ``"a1:b1,a2:b2"`` or a JSON array of pairs."""
        text = text.strip()
        if not text:
            return cls(())
        try:
            if text.startswith("["):
                pairs = json.loads(text)
            else:
                pairs = [tuple(float(x) for x in tok.split(":")) for tok in text.split(",")]
            return cls(tuple((float(a), float(b)) for a, b in pairs))
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad interval set {text!r}: {exc}") from exc

    def scaled_power(self, c: float) -> IntervalSet:
        """The set with every interval ``(a, b)`` replaced by ``(a^c, b^c)``."""
        return IntervalSet(tuple((a**c, b**c) for a, b in self.intervals))

    def endpoints(self):
        return sorted({x for iv in self.intervals for x in iv if math.isfinite(x)})

    def __len__(self):
        return len(self.intervals)


def _measures(F: IntervalSet, r):
    """Lebesgue and ``dt/t`` measure of ``F`` intersected with ``[1, r]``, vectorized over ``r``."""
    r = np.asarray(r, dtype=float)
    lin = np.zeros(r.shape)
    log = np.zeros(r.shape)
    for a, b in F.intervals:
        hi = np.minimum(r, b)
        part = hi > a
        lin += np.where(part, hi - a, 0.0)
        log += np.where(part, np.log(np.where(part, hi, 1.0)) - math.log(a), 0.0)
    return lin, log


def density_profile(F: IntervalSet, r):
    """``(dens_at_r, logdens_at_r)`` in closed form; ``r`` may be an array."""
    arr = np.asarray(r, dtype=float)
    if np.any(arr <= 1):
        raise DomainError("density profile needs r > 1")
    lin, log = _measures(F, arr)
    dens = lin / (arr - 1.0)
    logdens = log / np.log(arr)
    if arr.ndim == 0:
        return float(dens), float(logdens)
    return dens, logdens


def density_limits(F: IntervalSet, grid: RadialGrid):
    """``(upper_dens, lower_dens, upper_logdens, lower_logdens)`` over the tail half of the grid.

    Interval endpoints inside the tail range are added to the sample radii so the
    crests and troughs of the profiles are attained.
    """
    rs = np.asarray(grid.radii)
    rs = rs[rs > 1]
    if rs.size == 0:
        raise DomainError("grid has no radius above 1")
    t = rs[rs.size // 2:] if rs.size > 1 else rs
    lo, hi = t[0], t[-1]
    extra = [x for x in F.endpoints() if lo < x < hi]
    pts = np.unique(np.concatenate([t, np.asarray(extra, dtype=float)]))
    dens, logdens = density_profile(F, pts)
    return float(dens.max()), float(dens.min()), float(logdens.max()), float(logdens.min())


def log_periodic_set(k_max: int = 9) -> IntervalSet:
    """``union_{k=0..k_max} [e^{2k}, e^{2k+1}]``."""
    return IntervalSet(tuple((math.exp(2 * k), math.exp(2 * k + 1)) for k in range(k_max + 1)))
