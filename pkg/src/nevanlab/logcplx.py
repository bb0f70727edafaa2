"""Log-polar complex numbers, circle quadrature and slope fitting.

Every quantity the rest of the package handles can be astronomically large
(``exp(exp(z))`` at ``r = 10`` already has modulus ``e^22026``), so values are
carried as ``(log |w|, arg w)`` pairs.  An exact zero has ``log_mod = -inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, QuadratureError

TWO_PI = 2.0 * math.pi
# |1 + w| below this after factoring out the larger modulus counts as exact cancellation
_CANCEL = 1e-15


def wrap(phase: float) -> float:
    """Reduce an angle into (-pi, pi]."""
    y = math.remainder(phase, TWO_PI)
    return math.pi if y == -math.pi else y


def wrap_array(phase):
    y = np.remainder(np.asarray(phase, dtype=float) + math.pi, TWO_PI) - math.pi
    return np.where(y <= -math.pi, math.pi, y)


@dataclass(frozen=True, slots=True, eq=False)
class LogComplex:
    log_mod: float
    phase: float = 0.0

    def __post_init__(self):
        lm = float(self.log_mod)
        if math.isnan(lm) or lm == math.inf:
            raise DomainError(f"log_mod must be finite or -inf, got {lm}")
        object.__setattr__(self, "log_mod", lm)
        if lm == -math.inf:
            object.__setattr__(self, "phase", 0.0)
        else:
            object.__setattr__(self, "phase", wrap(float(self.phase)))

    @classmethod
    def zero(cls) -> LogComplex:
        return cls(-math.inf, 0.0)

    @classmethod
    def from_complex(cls, w: complex) -> LogComplex:
        w = complex(w)
        if w == 0:
            return cls.zero()
        return cls(math.log(abs(w)), math.atan2(w.imag, w.real))

    @property
    def is_zero(self) -> bool:
        return self.log_mod == -math.inf

    def to_complex(self) -> complex:
        """Plain complex value; raises OverflowError when it does not fit a double."""
        if self.is_zero:
            return 0j
        return math.exp(self.log_mod) * complex(math.cos(self.phase), math.sin(self.phase))

    def __eq__(self, other):
        if not isinstance(other, LogComplex):
            return NotImplemented
        if self.is_zero or other.is_zero:
            return self.is_zero and other.is_zero
        return self.log_mod == other.log_mod and self.phase == other.phase

    def __hash__(self):
        return hash((self.log_mod, 0.0 if self.is_zero else self.phase))

    def __mul__(self, other: LogComplex) -> LogComplex:
        return lc_mul(self, other)

    def __add__(self, other: LogComplex) -> LogComplex:
        return lc_add(self, other)

    def __neg__(self) -> LogComplex:
        if self.is_zero:
            return self
        return LogComplex(self.log_mod, self.phase + math.pi)


def lc_mul(a: LogComplex, b: LogComplex) -> LogComplex:
    if a.is_zero or b.is_zero:
        return LogComplex.zero()
    return LogComplex(a.log_mod + b.log_mod, a.phase + b.phase)


def lc_add(a: LogComplex, b: LogComplex) -> LogComplex:
    if b.is_zero:
        return a
    if a.is_zero:
        return b
    hi, lo = (a, b) if a.log_mod >= b.log_mod else (b, a)
    rho = math.exp(lo.log_mod - hi.log_mod)
    dphi = lo.phase - hi.phase
    x = rho * math.cos(dphi)
    y = rho * math.sin(dphi)
    # |1 + x + iy|^2 = 1 + (2x + x^2 + y^2); log1p keeps the small-residual case accurate
    s = 2.0 * x + x * x + y * y
    if 1.0 + s <= _CANCEL * _CANCEL:
        return LogComplex.zero()
    return LogComplex(hi.log_mod + 0.5 * math.log1p(s), hi.phase + math.atan2(y, 1.0 + x))


def lc_add_arrays(lm1, ph1, lm2, ph2):
    """Vectorized ``lc_add`` on (log_mod, phase) arrays; zeros are ``-inf``."""
    lm1, ph1, lm2, ph2 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (lm1, ph1, lm2, ph2)))
    swap = lm2 > lm1
    hi_lm = np.where(swap, lm2, lm1)
    hi_ph = np.where(swap, ph2, ph1)
    lo_lm = np.where(swap, lm1, lm2)
    lo_ph = np.where(swap, ph1, ph2)
    with np.errstate(invalid="ignore", divide="ignore"):
        rho = np.exp(lo_lm - hi_lm)
        rho = np.where(np.isneginf(lo_lm), 0.0, rho)
        x = rho * np.cos(lo_ph - hi_ph)
        y = rho * np.sin(lo_ph - hi_ph)
        s = 2.0 * x + x * x + y * y
        cancel = 1.0 + s <= _CANCEL * _CANCEL
        lm = hi_lm + 0.5 * np.log1p(np.where(cancel, 0.0, s))
        ph = hi_ph + np.arctan2(y, 1.0 + x)
    both_zero = np.isneginf(hi_lm)
    lm = np.where(cancel | both_zero, -np.inf, lm)
    ph = np.where(cancel | both_zero, 0.0, wrap_array(ph))
    return lm, ph


@dataclass(frozen=True)
class RadialGrid:
    radii: tuple

    def __post_init__(self):
        radii = tuple(float(r) for r in self.radii)
        if not radii:
            raise DomainError("radial grid is empty")
        if radii[0] <= 0:
            raise DomainError("radial grid must be positive")
        if any(b <= a for a, b in zip(radii, radii[1:])):
            raise DomainError("radial grid must be strictly increasing")
        object.__setattr__(self, "radii", radii)

    @classmethod
    def geometric(cls, r_min, r_max, points=None, per_decade=48):
        if points is None:
            points = max(2, int(round(per_decade * math.log10(r_max / r_min))) + 1)
        if points < 1:
            raise DomainError("radial grid needs at least one point")
        if points == 1:
            return cls((float(r_min),))
        return cls(tuple(np.geomspace(r_min, r_max, int(points))))

    @classmethod
    def linear(cls, r_min, r_max, points):
        if points < 1:
            raise DomainError("radial grid needs at least one point")
        if points == 1:
            return cls((float(r_min),))
        return cls(tuple(np.linspace(r_min, r_max, int(points))))

    def __len__(self):
        return len(self.radii)

    def __iter__(self):
        return iter(self.radii)


@dataclass(frozen=True)
class CircleSampling:
    r: float
    initial_count: int = 512
    refine_tol: float = 1e-9
    max_depth: int = field(default=14, compare=False)

    def __post_init__(self):
        n = self.initial_count
        if n < 16 or n & (n - 1):
            raise DomainError("initial_count must be a power of two >= 16")
        if not self.refine_tol > 0:
            raise DomainError("refine_tol must be positive")
        if self.r < 0:
            raise DomainError("circle radius must be non-negative")


def circle_integral_logplus(log_abs: Callable[[np.ndarray], np.ndarray], s: CircleSampling) -> float:
    """Mean of ``max(0, log|f|)`` over the circle, by adaptive Simpson.

    ``log_abs`` maps an array of angles to ``log|f(r e^{i theta})|`` on the
    circle of radius ``s.r``.  Panels are bisected where the coarse and fine
    Simpson estimates disagree, so the kinks where ``|f|`` crosses 1 get
    resolved locally.
    """
    def logplus(th):
        v = np.asarray(log_abs(th), dtype=float)
        return np.maximum(v, 0.0)

    n = s.initial_count
    w0 = TWO_PI / n
    pts = logplus(np.arange(2 * n) * (w0 / 2))
    a = np.arange(n) * w0
    fa = pts[0::2]
    fm = pts[1::2]
    fb = np.roll(fa, -1)
    w = np.full(n, w0)

    scale = float(np.mean(pts))
    accepted = []
    gap = 0.0
    for _depth in range(s.max_depth + 1):
        fq = logplus(np.concatenate([a + w / 4, a + 3 * w / 4]))
        fl, fr = fq[: a.size], fq[a.size:]
        s1 = w / 6 * (fa + 4 * fm + fb)
        s2 = w / 12 * (fa + 4 * fl + 2 * fm + 4 * fr + fb)
        diff = s2 - s1
        est = (math.fsum(accepted) + float(np.sum(s2))) / TWO_PI
        scale = max(scale, abs(est))
        tol_abs = s.refine_tol * (1.0 + scale) * TWO_PI
        ok = np.abs(diff) <= 15.0 * tol_abs * (w / TWO_PI)
        accepted.extend((s2[ok] + diff[ok] / 15.0).tolist())
        gap = float(np.sum(np.abs(diff[~ok])))
        if ok.all():
            break
        bad = ~ok
        a, w = a[bad], w[bad] / 2
        fa, fm, fb, fl, fr = fa[bad], fm[bad], fb[bad], fl[bad], fr[bad]
        a = np.concatenate([a, a + w])
        w = np.concatenate([w, w])
        fa, fm, fb = np.concatenate([fa, fm]), np.concatenate([fl, fr]), np.concatenate([fm, fb])
    else:
        est = (math.fsum(accepted) + float(np.sum(s2[~ok]))) / TWO_PI
        if gap / TWO_PI >= s.refine_tol * (1.0 + abs(est)):
            raise QuadratureError(
                f"circle quadrature did not converge at r={s.r}", estimate=est, gap=gap / TWO_PI, r=s.r
            )
        return est
    return math.fsum(accepted) / TWO_PI


def fit_slope(xs: Sequence[float], ys: Sequence[float]):
    """Least-squares line through ``(xs, ys)``; returns (slope, intercept, rms residual)."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.size < 3 or x.size != y.size:
        raise DomainError("fit_slope needs at least 3 paired points")
    if np.any(np.diff(x) <= 0):
        raise DomainError("fit_slope needs strictly increasing xs")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return float(slope), float(intercept), float(np.sqrt(np.mean(resid**2)))
