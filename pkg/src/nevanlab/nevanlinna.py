"""Growth functionals of entire functions at finite scale.

Nevanlinna characteristic, maximum and minimum modulus, order and lower order,
Petrenko deviations, alpha-regularity, the xi-measure of polynomially bounded
directions, and the longest arc on which ``|f| > 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError, QuadratureError
from .functions import EntireFunction
from .logcplx import TWO_PI, CircleSampling, RadialGrid, circle_integral_logplus, fit_slope

_ANGLE_TOL = 1e-6


@dataclass(frozen=True)
class CharacteristicSample:
    r: float
    T: float
    logM: float
    logL: float

    @property
    def ratio(self):
        """``logM / T``; None when ``T = 0``."""
        return self.logM / self.T if self.T > 0 else None


@dataclass(frozen=True)
class DeviationEstimate:
    beta_minus: float
    beta_plus: float
    tail_window: tuple
    per_r_ratios: list = field(default_factory=list)


@dataclass(frozen=True)
class XiEstimate:
    xi: float
    theta_grid_size: int
    classification: tuple
    slope_threshold: float


def _circle_fn(f: EntireFunction, r: float):
    def g(theta):
        theta = np.asarray(theta, dtype=float)
        return f.log_abs(np.full(theta.shape, r), theta)
    return g


def _refine_extremum(g, theta0, width, sign):
    """Bounded Brent search for an extremum of ``g`` near ``theta0``; ``sign=-1`` maximizes."""
    res = minimize_scalar(
        lambda t: sign * float(g(np.array([t]))[0]),
        bounds=(theta0 - width, theta0 + width),
        method="bounded",
        options={"xatol": _ANGLE_TOL / 4},
    )
    return sign * float(res.fun)


def log_max_modulus(f: EntireFunction, r: float, count: int = 512) -> float:
    """``log M(r, f)`` by sampling plus local refinement around the best sample."""
    g = _circle_fn(f, r)
    th = np.arange(count) * (TWO_PI / count)
    vals = g(th)
    k = int(np.argmax(vals))
    best = float(vals[k])
    if r == 0:
        return best
    return max(best, _refine_extremum(g, th[k], TWO_PI / count, -1.0))


def log_min_modulus(f: EntireFunction, r: float, count: int = 512) -> float:
    """``log L(r, f)``; ``-inf`` when a zero lies on the circle."""
    g = _circle_fn(f, r)
    th = np.arange(count) * (TWO_PI / count)
    vals = g(th)
    k = int(np.argmin(vals))
    best = float(vals[k])
    if r == 0 or best == -math.inf:
        return best
    return min(best, _refine_extremum(g, th[k], TWO_PI / count, 1.0))


def characteristic(f: EntireFunction, r: float, initial_count: int = 512, refine_tol: float = 1e-9) -> CharacteristicSample:
    s = CircleSampling(r, initial_count, refine_tol)
    g = _circle_fn(f, r)
    try:
        T = circle_integral_logplus(g, s)
    except QuadratureError as exc:
        raise QuadratureError(f"characteristic did not converge at r={r}", exc.estimate, exc.gap, r) from exc
    logM = log_max_modulus(f, r, initial_count)
    logL = log_min_modulus(f, r, initial_count)
    return CharacteristicSample(float(r), float(T), logM, logL)


def characteristic_sweep(f: EntireFunction, grid: RadialGrid, initial_count: int = 512,
                         refine_tol: float = 1e-9) -> list:
    """One CharacteristicSample per grid radius, in grid order."""
    return [characteristic(f, r, initial_count, refine_tol) for r in grid]


# -- tail statistics ------------------------------------------------------------------

def tail(samples, tail_fraction: float = 0.5) -> list:
    if not 0 < tail_fraction <= 1:
        raise DomainError("tail_fraction must lie in (0, 1]")
    n = len(samples)
    k = int(math.ceil(n * tail_fraction))
    return list(samples[n - k:]) if k else []


def decade_windows(rs):
    """Index ranges of sliding one-decade windows; the whole range when it spans less than a decade."""
    rs = np.asarray(rs, dtype=float)
    if rs.size == 0:
        return []
    if rs[-1] < 10 * rs[0]:
        return [(0, rs.size)]
    out = []
    for i in range(rs.size):
        if rs[i] * 10 > rs[-1] * (1 + 1e-12):
            break
        j = int(np.searchsorted(rs, rs[i] * 10 * (1 + 1e-12), side="right"))
        out.append((i, j))
    return out


def order_estimates(samples, tail_fraction: float = 0.5):
    """``(rho_hat, mu_hat)``: max and min slope of log T vs log r over one-decade tail windows."""
    if len(samples) < 8:
        raise DomainError("order estimates need at least 8 samples")
    kept = [s for s in samples if s.T > 0]
    if len(kept) < 8:
        raise DomainError("fewer than 8 samples with T > 0")
    t = tail(kept, tail_fraction)
    lr = np.log([s.r for s in t])
    lt = np.log([s.T for s in t])
    slopes = []
    for i, j in decade_windows([s.r for s in t]):
        if j - i >= 3:
            slopes.append(fit_slope(lr[i:j], lt[i:j])[0])
    if not slopes:
        raise DomainError("tail too short for a slope window")
    return max(slopes), min(slopes)


def petrenko_deviation(samples, tail_fraction: float = 0.5) -> DeviationEstimate:
    t = tail(samples, tail_fraction)
    if not t:
        raise DomainError("empty tail")
    if any(s.T <= 0 for s in t):
        raise DomainError("tail contains samples with T = 0")
    ratios = [s.logM / s.T for s in t]
    return DeviationEstimate(min(ratios), max(ratios), (t[0].r, t[-1].r), [(s.r, q) for s, q in zip(t, ratios)])


def alpha_regularity(samples, tail_fraction: float = 0.5):
    """``(alpha_hat, dispersion)``: median and interquartile range of T / log M over the tail."""
    t = [s for s in tail(samples, tail_fraction) if s.logM > 0]
    if not t:
        raise DomainError("empty tail")
    q = np.array([s.T / s.logM for s in t])
    q25, q50, q75 = np.percentile(q, [25, 50, 75])
    return float(q50), float(q75 - q25)


def xi_estimate(f: EntireFunction, grid: RadialGrid, theta_count: int = 64, slope_threshold: float = 8.0,
                phase_offset: float | None = None) -> XiEstimate:
    """Fraction of equally spaced directions along which ``log+|f|`` grows at most polynomially.

    Directions sit at cell midpoints by default (``phase_offset`` = half a cell), so
    a sector boundary lying on a grid direction is not counted on both sides.
    """
    if theta_count < 64:
        raise DomainError("xi estimate needs theta_count >= 64")
    rs = np.asarray(grid.radii)
    if rs[-1] < rs[0] * 10**1.5 * (1 - 1e-12):
        raise DomainError("xi estimate needs a grid spanning at least 1.5 decades")
    top = rs >= rs[-1] / 10 * (1 - 1e-12)
    if top.sum() < 3:
        raise DomainError("top decade of the grid needs at least 3 radii")
    rt = rs[top]
    if phase_offset is None:
        phase_offset = math.pi / theta_count
    th = phase_offset + np.arange(theta_count) * (TWO_PI / theta_count)
    lp = np.maximum(f.log_abs(rt[:, None], th[None, :]), 0.0)
    x = np.log(rt)
    xc = x - x.mean()
    slopes = (xc[:, None] * (lp - lp.mean(axis=0))).sum(axis=0) / (xc**2).sum()
    bounded = (slopes < slope_threshold) & (lp[-1] < 2 * slope_threshold * math.log(rt[-1]))
    cls = tuple(bool(b) for b in bounded)
    return XiEstimate(sum(cls) / theta_count, theta_count, cls, slope_threshold)


def theta_arc(f: EntireFunction, r: float, theta_count: int = 256) -> float:
    """Angular length of the longest arc of ``{theta : |f(r e^{i theta})| > 1}``.

    Returns ``inf`` when the whole circle lies in the set and 0 when it is empty.
    """
    if theta_count < 256:
        raise DomainError("theta_arc needs theta_count >= 256")
    g = _circle_fn(f, r)
    h = TWO_PI / theta_count
    th = np.arange(theta_count) * h
    pos = g(th) > 0
    if pos.all():
        return math.inf
    if not pos.any():
        return 0.0

    def crossing(k):
        # boundary between sample k and k+1 (cyclic); bisection on the sign of log|f|
        lo, hi = th[k], th[k] + h
        s_lo = pos[k]
        while hi - lo > _ANGLE_TOL / 4:
            mid = 0.5 * (lo + hi)
            if (float(g(np.array([mid]))[0]) > 0) == s_lo:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    nxt = np.roll(pos, -1)
    starts = [crossing(k) for k in np.nonzero(~pos & nxt)[0]]
    ends = [crossing(k) for k in np.nonzero(pos & ~nxt)[0]]
    best = 0.0
    for a in starts:
        # the arc starting at a ends at the first end point counter-clockwise from a
        d = min((b - a) % TWO_PI for b in ends)
        best = max(best, d)
    return best
