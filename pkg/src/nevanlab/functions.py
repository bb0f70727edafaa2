"""Catalog of entire functions evaluated in log-polar form.

Each catalog entry maps ``(r, theta)`` arrays to ``(log|f|, arg f)`` arrays.
Power series are summed in scaled double precision; when the scaled sum shows
heavy cancellation (Airy or Mittag-Leffler in a decay sector) the affected
points are re-summed with mpmath at a precision chosen from the observed
cancellation.
"""

from __future__ import annotations

import cmath
import math
import threading
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from scipy.special import gammaln

from .errors import ConfigError, UnsupportedRangeError
from .logcplx import LogComplex, lc_add_arrays, wrap_array

EPS = np.finfo(float).eps
_MAX_LOG = 700.0
_MAX_DPS = 3000


@dataclass(frozen=True)
class Known:
    value: float
    source: str  # "literature" (classical value) or "computed" (worked out here)


@dataclass(frozen=True)
class Metadata:
    order: Known | None = None
    lower_order: Known | None = None
    alpha: Known | None = None
    xi: Known | None = None


class EntireFunction:
    """Evaluator contract shared by all catalog entries."""

    kind = "entire"
    real_coefficients = True

    def __init__(self, ident: str, metadata: Metadata | None = None):
        self.ident = ident
        self.metadata = metadata or Metadata()

    def __repr__(self):
        return f"<{type(self).__name__} {self.ident}>"

    def _log_eval(self, r: np.ndarray, theta: np.ndarray):
        raise NotImplementedError

    def log_eval(self, r, theta):
        """Return ``(log|f|, arg f)`` arrays broadcast over ``r`` and ``theta``."""
        r, theta = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(theta, dtype=float))
        shape = r.shape
        if np.any(r < 0):
            raise UnsupportedRangeError("negative radius")
        lm, ph = self._log_eval(r.ravel(), theta.ravel())
        return lm.reshape(shape), wrap_array(ph).reshape(shape)

    def log_abs(self, r, theta):
        return self.log_eval(r, theta)[0]

    def evaluate(self, r: float, theta: float) -> LogComplex:
        lm, ph = self.log_eval(np.array([r]), np.array([theta]))
        return LogComplex(float(lm[0]), float(ph[0]))

    def complex_value(self, z: complex) -> complex:
        """Plain complex value at ``z``; raises when it does not fit a double."""
        z = complex(z)
        w = self.evaluate(abs(z), math.atan2(z.imag, z.real))
        if w.log_mod > _MAX_LOG:
            raise UnsupportedRangeError(f"{self.ident}: |f(z)| overflows at z={z}")
        return w.to_complex()

    def ode_terms(self):
        """Exponential-polynomial form ``[(lam, coeffs ascending), ...]`` or None."""
        return None


# -- series machinery ------------------------------------------------------------

def _series_double(exps, log_c, arg_c, r, theta, drop_nats):
    """Scaled double-precision sum of ``sum c_n z^n`` for points with ``r > 0``.

    Returns ``(log_mod, phase, rel_err_estimate, log_abs_term_sum)``.
    """
    logr = np.log(r)
    lt = log_c[None, :] + exps[None, :] * logr[:, None]
    kmax = np.argmax(lt, axis=1)
    L = lt[np.arange(lt.shape[0]), kmax]
    idx = np.arange(exps.size)
    cut = (idx[None, :] > kmax[:, None]) & (lt < L[:, None] - drop_nats) & np.isfinite(lt)
    keep = np.cumsum(cut, axis=1) == 0
    with np.errstate(under="ignore"):
        mag = np.where(keep, np.exp(lt - L[:, None]), 0.0)
    ph = arg_c[None, :] + exps[None, :] * theta[:, None]
    S = np.sum(mag * np.exp(1j * ph), axis=1)
    A = np.sum(mag, axis=1)
    nmax = np.max(np.where(keep, exps[None, :], 0), axis=1)
    absS = np.abs(S)
    with np.errstate(divide="ignore", invalid="ignore"):
        lm = L + np.log(absS)
        err = EPS * (np.abs(L) + nmax + 10.0) * A / absS
    err = np.where(absS > 0, err, np.inf)
    return lm, np.angle(S), err, L + np.log(A)


def _series_points(exps, log_c, arg_c, r, theta, drop_nats, chunk=256):
    out = [np.empty(r.size) for _ in range(4)]
    for s in range(0, r.size, chunk):
        sl = slice(s, s + chunk)
        for o, v in zip(out, _series_double(exps, log_c, arg_c, r[sl], theta[sl], drop_nats)):
            o[sl] = v
    return out


_MP_LOCK = threading.RLock()


def _mp_series(coeffs_fn, log_c, exps, r, theta):
    """High-precision re-summation at one point.

    ``coeffs_fn(dps, m)`` gives the first ``m`` coefficients as mp numbers; ``log_c``
    and ``exps`` describe all available terms.  The term count and working precision
    grow until the discarded tail and the rounding loss are both far below the result.
    """
    lt = log_c + exps * math.log(r)
    L = float(np.max(lt))
    spread = 2.0 * max(L, 0.0)
    for _ in range(6):
        m = _terms_needed(log_c, exps, r, 40.0 + spread)
        if m is None:
            raise UnsupportedRangeError(f"series needs more stored terms at r={r}")
        dps = int(30 + (L + spread) / math.log(10))
        if dps > _MAX_DPS:
            raise UnsupportedRangeError(f"series needs {dps} digits at r={r}")
        # mpmath precision is process-global state
        with _MP_LOCK, mpmath.workdps(dps):
            coeffs = coeffs_fn(dps, m)
            z = mpmath.mpf(float(r)) * mpmath.expj(mpmath.mpf(float(theta)))
            if _is_dense(exps[:m]):
                acc = mpmath.mpc(0)
                for c in reversed(coeffs):
                    acc = acc * z + c
            else:
                acc = mpmath.fsum(c * z ** int(n) for c, n in zip(coeffs, exps[:m]))
            if acc != 0:
                log_s = float(mpmath.log(abs(acc)))
                lost = (L - log_s) / math.log(10)
                if lost + 20 <= dps and L - 40.0 - spread < log_s - 40.0:
                    return log_s, float(mpmath.arg(acc))
                spread = max(2 * spread, L - log_s + 10.0)
            else:
                spread = 2 * spread + 20.0
    raise UnsupportedRangeError(f"series cancellation not resolved at r={r}, theta={theta}")


def _is_dense(exps):
    return exps.size > 0 and exps[0] == 0 and np.all(np.diff(exps) == 1)


def _terms_needed(log_c, exps, r_max, drop_nats):
    """Number of stored terms so that the truncation rule triggers for radius ``r_max``."""
    lt = log_c + exps * math.log(max(r_max, 1e-300))
    k = int(np.argmax(lt))
    below = np.nonzero((np.arange(lt.size) > k) & (lt < lt[k] - drop_nats) & np.isfinite(lt))[0]
    if below.size == 0:
        return None
    return int(below[0]) + 1


# -- elementary entries -----------------------------------------------------------

class Polynomial(EntireFunction):
    kind = "polynomial"

    def __init__(self, coeffs, ident=None):
        c = [complex(v) for v in coeffs]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        self.coeffs = tuple(c)
        self.real_coefficients = all(v.imag == 0 for v in c)
        deg = len(c) - 1
        meta = Metadata(
            order=Known(0.0, "computed"),
            lower_order=Known(0.0, "computed"),
            xi=Known(1.0, "literature") if deg >= 1 else None,
            alpha=Known(1.0, "computed") if deg >= 1 else None,
        )
        super().__init__(ident or "poly:" + ",".join(_fmt_num(v) for v in c), meta)

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def _log_eval(self, r, theta):
        c = np.array(self.coeffs)
        z = r * np.exp(1j * theta)
        small = r <= 1.0
        val = np.zeros(r.size, dtype=complex)
        for a in c[::-1]:
            val = val * np.where(small, z, 0) + np.where(small, a, 0)
        # |z| > 1: p(z) = z^d q(1/z), q(w) = sum c_k w^(d-k)
        d = self.degree
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(small, 0, 1.0 / np.where(small, 1, z))
            q = np.zeros(r.size, dtype=complex)
            for a in c:
                q = q * w + a
            lm_big = d * np.log(np.where(small, 1, r)) + np.log(np.abs(q))
            ph_big = d * theta + np.angle(q)
            lm_small = np.log(np.abs(val))
        lm = np.where(small, lm_small, lm_big)
        ph = np.where(small, np.angle(val), ph_big)
        return lm, ph

    def complex_value(self, z):
        acc = 0j
        for a in reversed(self.coeffs):
            acc = acc * z + a
        return acc

    def ode_terms(self):
        return [(0j, self.coeffs)]


class ExpPolynomial(EntireFunction):
    """Finite sum ``sum_j c_j exp(lam_j z)``."""

    kind = "exppoly"

    def __init__(self, terms, ident=None):
        self.terms = tuple((complex(c), complex(lam)) for c, lam in terms)
        if not self.terms:
            raise ConfigError("exponential polynomial needs at least one term")
        self.real_coefficients = all(c.imag == 0 and lam.imag == 0 for c, lam in self.terms)
        lam_abs = max(abs(lam) for _, lam in self.terms)
        super().__init__(
            ident or "exppoly:" + ",".join(f"{_fmt_num(c)}@{_fmt_num(lam)}" for c, lam in self.terms),
            Metadata(order=Known(1.0 if lam_abs > 0 else 0.0, "computed"),
                     lower_order=Known(1.0 if lam_abs > 0 else 0.0, "computed")),
        )

    def _log_eval(self, r, theta):
        x = r * np.cos(theta)
        y = r * np.sin(theta)
        lm = ph = None
        for c, lam in self.terms:
            if c == 0:
                continue
            t_lm = math.log(abs(c)) + (lam.real * x - lam.imag * y)
            t_ph = cmath.phase(c) + (lam.imag * x + lam.real * y)
            if lm is None:
                lm, ph = t_lm, t_ph
            else:
                lm, ph = lc_add_arrays(lm, ph, t_lm, t_ph)
        if lm is None:
            return np.full(r.size, -np.inf), np.zeros(r.size)
        return lm, ph

    def complex_value(self, z):
        try:
            return sum(c * cmath.exp(lam * z) for c, lam in self.terms)
        except OverflowError as exc:
            raise UnsupportedRangeError(f"{self.ident}: overflow at z={z}") from exc

    def ode_terms(self):
        return [(lam, (c,)) for c, lam in self.terms]


class Exp(EntireFunction):
    kind = "exp"

    def __init__(self):
        super().__init__(
            "exp",
            Metadata(order=Known(1.0, "computed"), lower_order=Known(1.0, "computed"),
                     alpha=Known(1 / math.pi, "literature"), xi=Known(0.5, "computed")),
        )

    def _log_eval(self, r, theta):
        return r * np.cos(theta), r * np.sin(theta)

    def complex_value(self, z):
        if z.real > _MAX_LOG:
            raise UnsupportedRangeError(f"exp overflows at z={z}")
        return cmath.exp(z)

    def ode_terms(self):
        return [(1 + 0j, (1 + 0j,))]


class ExpExp(EntireFunction):
    kind = "expexp"

    def __init__(self):
        super().__init__("expexp", Metadata(order=Known(math.inf, "literature"), lower_order=Known(math.inf, "literature")))

    def _log_eval(self, r, theta):
        x = r * np.cos(theta)
        if np.any(x > _MAX_LOG):
            raise UnsupportedRangeError("exp(exp(z)) needs r*cos(theta) <= 700")
        ex = np.exp(x)
        y = r * np.sin(theta)
        return ex * np.cos(y), ex * np.sin(y)

    def complex_value(self, z):
        w = cmath.exp(z) if z.real <= _MAX_LOG else None
        if w is None or w.real > _MAX_LOG:
            raise UnsupportedRangeError(f"exp(exp(z)) overflows at z={z}")
        return cmath.exp(w)


class Shifted(EntireFunction):
    """``base(z) + constant``."""

    kind = "shifted"

    def __init__(self, base: EntireFunction, constant, ident=None, metadata=None):
        self.base = base
        self.constant = complex(constant)
        self.real_coefficients = base.real_coefficients and self.constant.imag == 0
        super().__init__(ident or f"shift:{_fmt_num(self.constant)}:{base.ident}", metadata or base.metadata)

    def _log_eval(self, r, theta):
        lm, ph = self.base._log_eval(r, theta)
        c = self.constant
        if c == 0:
            return lm, ph
        return lc_add_arrays(lm, ph, math.log(abs(c)), cmath.phase(c))

    def complex_value(self, z):
        return self.base.complex_value(z) + self.constant

    def ode_terms(self):
        t = self.base.ode_terms()
        if t is None:
            return None
        return list(t) + [(0j, (self.constant,))]


# -- Airy ----------------------------------------------------------------------------

_AIRY_SWITCH = 6.0
_AI0 = 1.0 / (3 ** (2 / 3) * math.gamma(2 / 3))
_AIP0 = -1.0 / (3 ** (1 / 3) * math.gamma(1 / 3))


def _airy_log_coeffs(m):
    """log|a_n| and arg a_n for the Maclaurin coefficients of Ai (a_{n+3} = a_n/((n+3)(n+2)))."""
    log_c = np.full(m, -np.inf)
    arg_c = np.zeros(m)
    log_c[0] = math.log(_AI0)
    log_c[1] = math.log(-_AIP0)
    arg_c[1] = math.pi
    for n in range(3, m):
        log_c[n] = log_c[n - 3] - math.log(n) - math.log(n - 1)
        arg_c[n] = arg_c[n - 3]
    return log_c, arg_c


_AIRY_M = 400
_AIRY_LOG_C, _AIRY_ARG_C = _airy_log_coeffs(_AIRY_M)
_AIRY_EXPS = np.arange(_AIRY_M)


@lru_cache(maxsize=16)
def _airy_mp_coeffs(dps, m):
    with mpmath.workdps(dps):
        a0 = 1 / (mpmath.cbrt(3) ** 2 * mpmath.gamma(mpmath.mpf(2) / 3))
        a1 = -1 / (mpmath.cbrt(3) * mpmath.gamma(mpmath.mpf(1) / 3))
        c = [a0, a1, mpmath.mpf(0)]
        for n in range(3, m):
            c.append(c[n - 3] / (n * (n - 1)))
        return c


def _airy_u(kmax=60):
    k = np.arange(kmax)
    return gammaln(3 * k + 0.5) - k * math.log(54) - gammaln(k + 1) - gammaln(k + 0.5)


_AIRY_LOG_U = _airy_u()


def _airy_asym_log(r, theta):
    """Complex log of Ai by the large-|z| expansion, valid for |theta| <= 2pi/3.

    Returns ``(log Ai as complex array, relative error estimate)``.
    """
    zeta = (2.0 / 3.0) * r**1.5 * np.exp(1.5j * theta)
    k = np.arange(_AIRY_LOG_U.size)
    log_abs_t = _AIRY_LOG_U[:, None] - k[:, None] * np.log(np.abs(zeta))[None, :]
    kstar = np.argmin(log_abs_t, axis=0)
    keep = k[:, None] < np.maximum(kstar, 1)[None, :]
    terms = np.exp(log_abs_t) * np.exp(-1j * k[:, None] * np.angle(zeta)[None, :]) * (-1.0) ** k[:, None]
    S = np.sum(np.where(keep, terms, 0), axis=0)
    err = np.exp(log_abs_t[kstar, np.arange(r.size)]) / np.abs(S)
    logai = -zeta - math.log(2 * math.sqrt(math.pi)) - 0.25 * (np.log(r) + 1j * theta) + np.log(S)
    return logai, err


class Airy(EntireFunction):
    """Ai(z): Maclaurin series for |z| < 6, large-|z| expansion beyond."""

    kind = "airy"

    def __init__(self):
        super().__init__(
            "airy",
            Metadata(order=Known(1.5, "literature"), lower_order=Known(1.5, "literature"),
                     alpha=Known(4 / (3 * math.pi), "literature"), xi=Known(1 / 3, "computed")),
        )

    def _log_eval(self, r, theta):
        lm = np.empty(r.size)
        ph = np.empty(r.size)
        near = r < _AIRY_SWITCH
        if near.any():
            lm[near], ph[near] = self.series_log_eval(r[near], theta[near])
        far = ~near
        if far.any():
            lm[far], ph[far] = self.asymptotic_log_eval(r[far], theta[far])
        return lm, ph

    def series_log_eval(self, r, theta):
        lm = np.empty(r.size)
        ph = np.empty(r.size)
        zero = r == 0
        lm[zero], ph[zero] = math.log(_AI0), 0.0
        pos = ~zero
        if not pos.any():
            return lm, ph
        rp, tp = r[pos], theta[pos]
        m = _terms_needed(_AIRY_LOG_C, _AIRY_EXPS, float(rp.max()), 36.0)
        if m is None:
            raise UnsupportedRangeError("Airy series radius too large")
        exps, log_c, arg_c = _AIRY_EXPS[:m], _AIRY_LOG_C[:m], _AIRY_ARG_C[:m]
        l, p, err, lsum = _series_points(exps, log_c, arg_c, rp, tp, 36.0)
        for i in np.nonzero(err > 1e-13)[0]:
            l[i], p[i] = _mp_series(_airy_mp_coeffs, _AIRY_LOG_C, _AIRY_EXPS, rp[i], tp[i])
        lm[pos], ph[pos] = l, p
        return lm, ph

    def asymptotic_log_eval(self, r, theta):
        theta = wrap_array(theta)
        lm = np.empty(r.size)
        ph = np.empty(r.size)
        direct = np.abs(theta) <= 2 * math.pi / 3
        if direct.any():
            la, _ = _airy_asym_log(r[direct], theta[direct])
            lm[direct], ph[direct] = la.real, la.imag
        rest = ~direct
        if rest.any():
            # Ai(z) = -w Ai(wz) - w^2 Ai(w^2 z), w = exp(2 pi i/3)
            rr, tt = r[rest], theta[rest]
            l1, _ = _airy_asym_log(rr, wrap_array(tt + 2 * math.pi / 3))
            l2, _ = _airy_asym_log(rr, wrap_array(tt + 4 * math.pi / 3))
            l1 = l1 - 1j * math.pi / 3
            l2 = l2 + 1j * math.pi / 3
            lm[rest], ph[rest] = lc_add_arrays(l1.real, l1.imag, l2.real, l2.imag)
        return lm, ph

    def ode_terms(self):
        return None


def airy_overlap_discrepancy(n_theta=64, radii=(6.0, 7.0, 8.0)):
    """Max relative difference between the two Airy regimes on the overlap ring."""
    f = Airy()
    th = np.linspace(-math.pi, math.pi, n_theta, endpoint=False) + math.pi / n_theta
    worst = 0.0
    for r in radii:
        rr = np.full(th.size, r)
        l1, p1 = f.series_log_eval(rr, th)
        l2, p2 = f.asymptotic_log_eval(rr, th)
        w1 = np.exp(l1 - l2 + 1j * p1)
        w2 = np.exp(1j * p2)
        worst = max(worst, float(np.max(np.abs(w1 - w2))))
    return worst


# -- Mittag-Leffler --------------------------------------------------------------------

class MittagLeffler(EntireFunction):
    """``E_{1/rho}(z) = sum z^n / Gamma(n/rho + 1)``, an entire function of order ``rho``."""

    kind = "mittag-leffler"
    _TOL = 1e-12

    def __init__(self, rho: float):
        rho = float(rho)
        if not rho > 0:
            raise ConfigError("Mittag-Leffler order must be positive")
        self.rho = rho
        self.beta = 1.0 / rho
        alpha = None
        if 0.5 < rho < (2 + math.pi) / (2 * math.pi):
            alpha = Known(1 / (math.pi * rho), "literature")
        xi = Known(1 - 1 / (2 * rho), "literature") if rho > 0.5 else None
        super().__init__(
            f"ml:{_fmt_num(rho)}",
            Metadata(order=Known(rho, "computed"), lower_order=Known(rho, "computed"), alpha=alpha, xi=xi),
        )

    def _log_c(self, m):
        n = np.arange(m)
        return -gammaln(n * self.beta + 1.0)

    def _mp_coeffs(self, dps, m):
        return _ml_mp_coeffs(self.beta, dps, m)

    def _log_eval(self, r, theta):
        lm = np.full(r.size, np.nan)
        ph = np.zeros(r.size)
        todo = np.ones(r.size, dtype=bool)
        zero = r == 0
        lm[zero] = 0.0
        todo &= ~zero
        if self.beta < 2 and todo.any():
            idx = np.nonzero(todo)[0]
            la, pa, err = self.asymptotic_log_eval(r[idx], theta[idx])
            good = err <= self._TOL
            lm[idx[good]], ph[idx[good]] = la[good], pa[good]
            todo[idx[good]] = False
        if todo.any():
            idx = np.nonzero(todo)[0]
            lm[idx], ph[idx] = self.series_log_eval(r[idx], theta[idx])
        return lm, ph

    def series_log_eval(self, r, theta):
        r_max = float(r.max())
        m = 64
        while True:
            log_c = self._log_c(m)
            exps = np.arange(m)
            need = _terms_needed(log_c, exps, r_max, 36.0)
            if need is not None:
                break
            m *= 2
            if m > 1 << 16:
                raise UnsupportedRangeError(f"{self.ident}: series too long at r={r_max}")
        log_c, exps = log_c[:need], exps[:need]
        arg_c = np.zeros(need)
        lm, ph, err, lsum = _series_points(exps, log_c, arg_c, r, theta, 36.0)
        bad = np.nonzero(err > self._TOL)[0]
        if bad.size:
            big = 4 * need + 64
            all_c, all_n = self._log_c(big), np.arange(big)
            for i in bad:
                lm[i], ph[i] = _mp_series(self._mp_coeffs, all_c, all_n, r[i], theta[i])
        return lm, ph

    def asymptotic_log_eval(self, r, theta):
        """Exponential saddle terms plus the optimally truncated algebraic series.

        Returns ``(log_mod, phase, relative error estimate)``.
        """
        beta, rho = self.beta, self.rho
        theta = wrap_array(theta)
        lr = np.log(r)
        # algebraic part: -sum_k z^{-k} / Gamma(1 - beta k), via the reflection formula
        kmax = 200
        k = np.arange(1, kmax + 1)
        x = beta * k
        s = np.where(x == np.round(x), 0.0, np.sin(np.pi * x))
        with np.errstate(divide="ignore"):
            log_rg = gammaln(x) + np.log(np.abs(s)) - math.log(math.pi)
        sign = np.sign(s)
        log_t = log_rg[:, None] - k[:, None] * lr[None, :]
        finite = np.isfinite(log_t)
        if finite.any():
            masked = np.where(finite, log_t, np.inf)
            kstar = np.argmin(masked, axis=0)
            min_term = np.exp(np.min(masked, axis=0))
            min_term = np.where(np.isfinite(min_term), min_term, 0.0)
            keep = (k[:, None] - 1) < kstar[None, :]
            terms = sign[:, None] * np.exp(np.where(keep & finite, log_t, -np.inf))
            alg = -np.sum(terms * np.exp(-1j * k[:, None] * theta[None, :]), axis=0)
        else:
            alg = np.zeros(r.size, dtype=complex)
            min_term = np.zeros(r.size)
        with np.errstate(divide="ignore"):
            lm = np.log(np.abs(alg))
        ph = np.angle(alg)
        mags = r**rho
        for mshift in (-1, 0, 1):
            ang = theta + 2 * math.pi * mshift
            inc = np.abs(ang) <= beta * math.pi if mshift == 0 else np.abs(ang) < beta * math.pi
            if not inc.any():
                continue
            e_lm = np.where(inc, math.log(rho) + mags * np.cos(ang / beta), -np.inf)
            e_ph = np.where(inc, mags * np.sin(ang / beta), 0.0)
            lm, ph = lc_add_arrays(lm, ph, e_lm, e_ph)
        stokes = 0.0 if beta == 1.0 else rho * np.exp(-mags)
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            err = (min_term + stokes) * np.exp(-lm)
        err = np.where(np.isfinite(err), err, np.inf)
        return lm, ph, err

    def ode_terms(self):
        if self.rho == 1.0:
            return [(1 + 0j, (1 + 0j,))]
        return None


@lru_cache(maxsize=32)
def _ml_mp_coeffs(beta, dps, m):
    with mpmath.workdps(dps):
        b = mpmath.mpf(beta)
        return [mpmath.rgamma(n * b + 1) for n in range(m)]


# -- gap series ------------------------------------------------------------------------

class GapSeries(EntireFunction):
    """Lacunary series ``sum_n c_n z^{lam_n}`` with stored exponents and log-coefficients."""

    kind = "gap"

    def __init__(self, exponents, log_coeffs, ident, fejer_limit=None, metadata=None):
        exps = np.asarray(exponents, dtype=np.int64)
        if exps.size < 2 or np.any(np.diff(exps) <= 0):
            raise ConfigError("gap exponents must be strictly increasing")
        self.exponents = exps
        self.log_coeffs = np.asarray(log_coeffs, dtype=float)
        self.fejer_limit = fejer_limit
        super().__init__(ident, metadata)

    @property
    def fabry(self) -> bool:
        n = np.arange(1, self.exponents.size + 1)
        ratio = self.exponents / n
        tail = ratio[ratio.size // 2:]
        return bool(np.all(np.diff(tail) > 0) and tail[-1] > 2 * tail[0])

    @property
    def fejer(self) -> bool:
        if self.fejer_limit is None:
            return False
        partial = np.cumsum(1.0 / self.exponents[self.exponents > 0])
        return bool(np.all(partial <= self.fejer_limit))

    def _log_eval(self, r, theta):
        lm = np.empty(r.size)
        ph = np.zeros(r.size)
        zero = r == 0
        lm[zero] = self.log_coeffs[0] if self.exponents[0] == 0 else -np.inf
        pos = ~zero
        if pos.any():
            if _terms_needed(self.log_coeffs, self.exponents, float(r[pos].max()), 30.0) is None:
                raise UnsupportedRangeError(f"{self.ident}: too few stored terms for r={r[pos].max()}")
            arg_c = np.zeros(self.exponents.size)
            l, p, err, lsum = _series_points(self.exponents, self.log_coeffs, arg_c, r[pos], theta[pos], 30.0)
            if np.any(err > 1e-12):
                bad = np.nonzero(err > 1e-12)[0]
                for i in bad:
                    l[i], p[i] = _mp_series(self._mp_coeffs, self.log_coeffs, self.exponents,
                                            r[pos][i], theta[pos][i])
            lm[pos], ph[pos] = l, p
        return lm, ph

    def _mp_coeffs(self, dps, m):
        with mpmath.workdps(dps):
            return [mpmath.rgamma(int(n) + 1) for n in self.exponents[:m]]


def gap_series_example() -> GapSeries:
    """``sum_n z^(2^n) / (2^n)!``: Fabry and Fejer gaps."""
    exps = 2 ** np.arange(0, 22)
    return GapSeries(
        exps,
        -gammaln(exps + 1.0),
        ident="gap:fabry",
        fejer_limit=2.0,
        metadata=Metadata(order=Known(1.0, "computed"), lower_order=Known(1.0, "computed"),
                          alpha=Known(1.0, "literature"), xi=Known(0.0, "computed")),
    )


def bank_laine_coefficient() -> Shifted:
    """``e^z - 1/16``, the coefficient of the zero-free product example."""
    return Shifted(
        Exp(), -1 / 16, ident="banklaine",
        metadata=Metadata(order=Known(1.0, "literature"), lower_order=Known(1.0, "computed"),
                          alpha=Known(1 / math.pi, "literature"), xi=Known(0.5, "computed")),
    )


def evaluate(f: EntireFunction, r: float, theta: float) -> LogComplex:
    return f.evaluate(r, theta)


# -- identifiers -----------------------------------------------------------------------

def _fmt_num(v) -> str:
    v = complex(v)
    if v.imag == 0:
        x = v.real
        return str(int(x)) if x == int(x) and abs(x) < 1e15 else repr(x)
    return repr(v).strip("()")


def _parse_num(tok: str) -> complex:
    try:
        return complex(tok.strip().replace("i", "j"))
    except ValueError as exc:
        raise ConfigError(f"bad number {tok!r}") from exc


def parse_function(ident: str) -> EntireFunction:
    """Build a catalog entry from its identifier, e.g. ``"ml:1.5"`` or ``"poly:0,-1"``.

    Polynomial coefficients are listed in ascending powers, so ``poly:0,-1`` is ``-z``.
    """
    ident = ident.strip()
    kind, _, params = ident.partition(":")
    kind = kind.lower()
    try:
        if kind == "exp" and not params:
            return Exp()
        if kind == "expexp" and not params:
            return ExpExp()
        if kind == "airy" and not params:
            return Airy()
        if kind == "banklaine" and not params:
            return bank_laine_coefficient()
        if kind == "gap" and params == "fabry":
            return gap_series_example()
        if kind == "ml" and params:
            return MittagLeffler(float(params))
        if kind == "poly" and params:
            return Polynomial([_parse_num(t) for t in params.split(",")])
        if kind == "const" and params:
            return Polynomial([_parse_num(params)], ident=f"const:{params}")
        if kind == "expshift" and params:
            return Shifted(Exp(), _parse_num(params), ident=f"expshift:{params}")
        if kind == "exppoly" and params:
            terms = []
            for tok in params.split(","):
                c, sep, lam = tok.partition("@")
                if not sep:
                    raise ConfigError(f"exppoly term {tok!r} needs coeff@frequency")
                terms.append((_parse_num(c), _parse_num(lam)))
            return ExpPolynomial(terms)
    except ValueError as exc:
        raise ConfigError(f"bad function id {ident!r}: {exc}") from exc
    raise ConfigError(f"unknown function id {ident!r}")


CATALOG_IDS = ("exp", "expexp", "airy", "ml:1.5", "ml:0.75", "banklaine", "gap:fabry",
               "poly:1,0,0,-0.0625", "exppoly:1@1,1@-1")
