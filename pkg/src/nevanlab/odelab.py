"""Integration of ``f'' + A f' + B f = 0`` along paths in the complex plane.

Solutions are carried as ``f = u * 2^K`` with an integer exponent ``K`` per
solution, so rescaling is exact and ``kappa = K log 2`` is the log-scale
accumulator.  A bundle of solutions shares one adaptive Dormand-Prince 5(4)
step sequence; the error of each solution is measured relative to its own
scale, so step control does not depend on magnitudes.

Coefficients that are exponential polynomials ``sum_j P_j(z) exp(lam_j z)``
run in a numba kernel; anything else runs the same kernel source in Python.
"""

from __future__ import annotations

import cmath
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import (DomainError, PreconditionError, StiffnessError, UnsupportedRangeError,
                     ZeroCountError)
from .functions import EntireFunction
from .logcplx import TWO_PI, LogComplex, RadialGrid, fit_slope, wrap, wrap_array

log = logging.getLogger(__name__)

LN2 = math.log(2.0)

# Dormand-Prince 5(4)
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.zeros((7, 7))
_A[1, :1] = [1 / 5]
_A[2, :2] = [3 / 40, 9 / 40]
_A[3, :3] = [44 / 45, -56 / 15, 32 / 9]
_A[4, :4] = [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]
_A[5, :5] = [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]
_A[6, :6] = [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])

OK, STIFF, OVERFLOW, STEP_LIMIT = 0, 1, 2, 3
# step budgets per path segment: compiled kernel, and the pure-Python kernel used for
# coefficients that are not exponential polynomials
MAX_STEPS_JIT = 50_000_000
MAX_STEPS_PY = 200_000
# phase budget int (|a| + sqrt|b|) ds for a ray; at tol 1e-10 the solver takes a few
# hundred steps per radian, so this keeps a ray near ten million steps
ARC_BUDGET = 2e4


# -- coefficient evaluation ----------------------------------------------------------

def _coef_exppoly(cargs, z):
    lam_a, p_a, lam_b, p_b = cargs
    a = 0j
    for j in range(lam_a.size):
        acc = 0j
        for k in range(p_a.shape[1] - 1, -1, -1):
            acc = acc * z + p_a[j, k]
        if lam_a[j] != 0:
            acc *= np.exp(lam_a[j] * z)
        a += acc
    b = 0j
    for j in range(lam_b.size):
        acc = 0j
        for k in range(p_b.shape[1] - 1, -1, -1):
            acc = acc * z + p_b[j, k]
        if lam_b[j] != 0:
            acc *= np.exp(lam_b[j] * z)
        b += acc
    return a, b


def _coef_callable(cargs, z):
    fa, fb = cargs
    try:
        a = fa.complex_value(z) if fa is not None else 0j
        b = fb.complex_value(z) if fb is not None else 0j
    except (UnsupportedRangeError, OverflowError):
        return complex(math.inf, 0), 0j
    return a, b


def _position(kind, p0, p1, p2, s):
    """``z(s)`` and ``dz/ds`` for a ray (kind 0) or an arc (kind 1) parametrized by arclength."""
    if kind == 0:
        e = complex(math.cos(p0), math.sin(p0))
        return s * e, e
    phi = p1 + p2 * s / p0
    e = complex(math.cos(phi), math.sin(phi))
    return p0 * e, complex(0.0, p2) * e


def _make_kernel(coef, position):
    def kernel(cargs, kind, p0, p1, p2, s0, s1, stations, y, K, tol, h0, renorm_log, h_min, max_steps,
               out_y, out_K, C, A, E):
        n2 = y.size
        n = n2 // 2
        k = np.zeros((7, n2), dtype=np.complex128)
        yt = np.empty(n2, dtype=np.complex128)
        ynew = np.empty(n2, dtype=np.complex128)
        hi = math.exp(renorm_log)
        lo = math.exp(-renorm_log)
        s = s0
        h = min(h0, s1 - s0)
        q_prev = 1.0
        z, w = position(kind, p0, p1, p2, s)
        a, b = coef(cargs, z)
        for i in range(n):
            k[0, 2 * i] = w * y[2 * i + 1]
            k[0, 2 * i + 1] = w * (-b * y[2 * i] - a * y[2 * i + 1])
        ist = 0
        nst = stations.size
        steps = 0
        status = 0
        while s < s1:
            if steps >= max_steps:
                status = 3
                break
            target = stations[ist] if ist < nst else s1
            h_use = h
            hit = False
            if s + h_use >= target - 1e-15 * abs(target):
                h_use = target - s
                hit = True
            bad = False
            for st in range(1, 7):
                for m in range(n2):
                    acc = y[m]
                    for j in range(st):
                        acc += h_use * A[st, j] * k[j, m]
                    yt[m] = acc
                z, w = position(kind, p0, p1, p2, s + C[st] * h_use)
                a, b = coef(cargs, z)
                if not (math.isfinite(a.real) and math.isfinite(a.imag)
                        and math.isfinite(b.real) and math.isfinite(b.imag)):
                    bad = True
                    break
                for i in range(n):
                    k[st, 2 * i] = w * yt[2 * i + 1]
                    k[st, 2 * i + 1] = w * (-b * yt[2 * i] - a * yt[2 * i + 1])
            if bad:
                status = 2
                break
            for m in range(n2):
                ynew[m] = yt[m]
            q = 0.0
            for i in range(n):
                eu = 0j
                ev = 0j
                nu = 0.0
                nv = 0.0
                for j in range(7):
                    eu += E[j] * k[j, 2 * i]
                    ev += E[j] * k[j, 2 * i + 1]
                    nu += abs(E[j]) * abs(k[j, 2 * i])
                    nv += abs(E[j]) * abs(k[j, 2 * i + 1])
                sc = max(abs(y[2 * i]), abs(y[2 * i + 1]), abs(ynew[2 * i]), abs(ynew[2 * i + 1]))
                if sc > 0:
                    # the estimate cannot resolve errors below the rounding level of its own sum
                    floor = tol * sc + 32.0 * 2.220446049250313e-16 * max(nu, nv)
                    qi = max(abs(eu), abs(ev)) / floor
                    if not qi <= 1e300:
                        qi = 1e300
                    q = max(q, qi)
            steps += 1
            if q <= 1.0:
                s = target if hit else s + h_use
                for m in range(n2):
                    y[m] = ynew[m]
                    k[0, m] = k[6, m]
                for i in range(n):
                    mx = max(abs(y[2 * i]), abs(y[2 * i + 1]))
                    if mx > hi or (mx < lo and mx > 0):
                        e = math.frexp(mx)[1]
                        f = math.ldexp(1.0, -e)
                        y[2 * i] *= f
                        y[2 * i + 1] *= f
                        k[0, 2 * i] *= f
                        k[0, 2 * i + 1] *= f
                        K[i] += e
                if hit and ist < nst:
                    for m in range(n2):
                        out_y[ist, m] = y[m]
                    for i in range(n):
                        out_K[ist, i] = K[i]
                    ist += 1
                qc = max(q, 1e-10)
                fac = 0.9 * qc ** (-0.7 / 5) * max(q_prev, 1e-4) ** (0.4 / 5)
                fac = min(5.0, max(0.2, fac))
                if not (hit and h_use < h):
                    h = h_use * fac
                q_prev = q
            else:
                h = h_use * max(0.1, 0.9 * q ** (-1.0 / 5))
                if h < h_min:
                    status = 1
                    break
        return status, s, steps

    return kernel


_coef_exppoly_jit = njit(nogil=True, cache=True)(_coef_exppoly)
_position_jit = njit(nogil=True, cache=True)(_position)
_kernel_jit = njit(nogil=True)(_make_kernel(_coef_exppoly_jit, _position_jit))
_kernel_py = _make_kernel(_coef_callable, _position)


def _terms_array(terms):
    if not terms:
        return np.zeros(0, dtype=np.complex128), np.zeros((0, 1), dtype=np.complex128)
    deg = max(len(c) for _, c in terms)
    lam = np.array([complex(l) for l, _ in terms], dtype=np.complex128)
    p = np.zeros((len(terms), deg), dtype=np.complex128)
    for j, (_, c) in enumerate(terms):
        p[j, : len(c)] = c
    return lam, p


@dataclass(frozen=True)
class Coefficients:
    """``A`` (the f' coefficient, or the f coefficient when ``B`` is None) and optional ``B``."""

    A: EntireFunction | None
    B: EntireFunction | None = None

    def _first_order(self):
        # y' = (v, -b u - a v): in the single-coefficient equation f'' + A f = 0 the
        # coefficient acts as ``b``
        if self.B is None:
            return None, self.A
        return self.A, self.B

    def payload(self):
        """``(kernel, coefficient args, step budget)``."""
        fa, fb = self._first_order()
        ta = fa.ode_terms() if fa is not None else []
        tb = fb.ode_terms() if fb is not None else []
        if ta is not None and tb is not None:
            la, pa = _terms_array(ta)
            lb, pb = _terms_array(tb)
            return _kernel_jit, (la, pa, lb, pb), MAX_STEPS_JIT
        return _kernel_py, (fa, fb), MAX_STEPS_PY

    def values(self, z):
        """``(a, b)`` in the first-order form at ``z``."""
        fa, fb = self._first_order()
        a = fa.complex_value(z) if fa is not None else 0j
        b = fb.complex_value(z) if fb is not None else 0j
        return a, b


# -- states and paths ------------------------------------------------------------------

@dataclass(frozen=True)
class SolverState:
    """``f = u e^kappa``, ``f' = v e^kappa`` at position ``z``."""

    z: complex
    u: complex
    v: complex
    kappa: float

    @property
    def f(self) -> LogComplex:
        return lc_scaled(self.u, self.kappa)

    @property
    def fprime(self) -> LogComplex:
        return lc_scaled(self.v, self.kappa)

    @property
    def log_scale(self) -> float:
        """``kappa + log max(|u|, |v|)``."""
        m = max(abs(self.u), abs(self.v))
        return self.kappa + math.log(m) if m > 0 else -math.inf


def lc_scaled(x: complex, kappa: float) -> LogComplex:
    if x == 0:
        return LogComplex.zero()
    return LogComplex(math.log(abs(x)) + kappa, cmath.phase(x))


@dataclass(frozen=True)
class PathSpec:
    theta: float
    r_end: float
    r_start: float = 0.0
    then_circle: bool = False

    def __post_init__(self):
        if not (0 <= self.r_start < self.r_end):
            raise DomainError("path needs 0 <= r_start < r_end")


@dataclass
class Trajectory:
    """Recorded states of each solution of a bundle, ``states[sol][k]``."""

    states: list

    def __getitem__(self, i):
        return self.states[i]


class Bundle:
    """A set of solutions advanced together along path segments."""

    def __init__(self, coeffs: Coefficients, ics, tol: float = 1e-10, renorm_log: float = 20.0):
        if not (1e-13 <= tol <= 1e-6):
            raise DomainError("tol must lie in [1e-13, 1e-6]")
        self.coeffs = coeffs
        self.kernel, self.cargs, self.max_steps = coeffs.payload()
        self.tol = tol
        self.renorm_log = renorm_log
        self.y = np.array([c for ic in ics for c in (complex(ic[0]), complex(ic[1]))], dtype=np.complex128)
        self.K = np.zeros(len(ics), dtype=np.int64)
        self.z = 0j

    def copy(self) -> Bundle:
        b = Bundle.__new__(Bundle)
        b.__dict__.update(self.__dict__)
        b.y = self.y.copy()
        b.K = self.K.copy()
        return b

    @property
    def size(self):
        return self.K.size

    def states(self):
        return [SolverState(self.z, complex(self.y[2 * i]), complex(self.y[2 * i + 1]), float(self.K[i]) * LN2)
                for i in range(self.size)]

    def _run(self, kind, p0, p1, p2, length, stations):
        stations = np.asarray(stations, dtype=float)
        out_y = np.zeros((stations.size, self.y.size), dtype=np.complex128)
        out_K = np.zeros((stations.size, self.size), dtype=np.int64)
        scale = max(abs(self.z), length, 1.0)
        h0 = min(0.01, length / 4)
        status, s_end, steps = self.kernel(
            self.cargs, kind, float(p0), float(p1), float(p2), 0.0, float(length), stations,
            self.y, self.K, self.tol, h0, self.renorm_log, 1e-12 * scale, self.max_steps, out_y, out_K, _C, _A, _E,
        )
        z_end, _ = _position(kind, p0, p1, p2, s_end)
        if status == STIFF:
            raise StiffnessError(f"step size underflow at z={z_end}", z_end)
        if status == OVERFLOW:
            raise UnsupportedRangeError(f"coefficient not representable near z={z_end}")
        if status == STEP_LIMIT:
            raise StiffnessError(f"step budget of {self.max_steps} exhausted at z={z_end}", z_end)
        self.steps = steps
        return out_y, out_K

    def ray(self, theta: float, r_to: float, stations=()):
        """Advance radially from the current point (which must lie on the ray) to ``r_to``."""
        r0 = abs(self.z)
        if r0 > 0 and abs(wrap(cmath.phase(self.z) - theta)) > 1e-9:
            raise DomainError("ray must start on its own direction")
        if r_to <= r0:
            return np.zeros((0, self.y.size), complex), np.zeros((0, self.size), np.int64)
        st = np.asarray(stations, dtype=float) - r0
        # arclength s = r - r0 along the ray, so the kernel ray offset is r0
        out = self._run_ray(theta, r0, r_to, st)
        self.z = r_to * cmath.exp(1j * theta)
        return out

    def _run_ray(self, theta, r0, r1, st):
        # a ray from r0: z(s) = (r0 + s) e^{i theta}; shift by integrating in s with an offset
        stations = np.asarray(st, dtype=float)
        out_y = np.zeros((stations.size, self.y.size), dtype=np.complex128)
        out_K = np.zeros((stations.size, self.size), dtype=np.int64)
        h0 = min(0.01, (r1 - r0) / 4)
        status, s_end, steps = self.kernel(
            self.cargs, 0, float(theta), 0.0, 0.0, float(r0), float(r1), stations + r0,
            self.y, self.K, self.tol, h0, self.renorm_log, 1e-12 * max(r1, 1.0), self.max_steps,
            out_y, out_K, _C, _A, _E,
        )
        if status == STIFF:
            z = s_end * cmath.exp(1j * theta)
            raise StiffnessError(f"step size underflow at z={z}", z)
        if status == OVERFLOW:
            z = s_end * cmath.exp(1j * theta)
            raise UnsupportedRangeError(f"coefficient not representable near z={z}")
        if status == STEP_LIMIT:
            z = s_end * cmath.exp(1j * theta)
            raise StiffnessError(f"step budget of {self.max_steps} exhausted at z={z}", z)
        self.steps = steps
        return out_y, out_K

    def arc(self, dphi: float, stations=()):
        """Advance along the circle ``|z| = r`` by angle ``dphi`` (sign gives the direction).

        ``stations`` are angular offsets in ``(0, |dphi|]``.
        """
        r = abs(self.z)
        if r == 0:
            raise DomainError("cannot follow an arc of radius 0")
        phi0 = cmath.phase(self.z)
        sign = 1.0 if dphi >= 0 else -1.0
        st = np.asarray(stations, dtype=float) * r
        out = self._run(1, r, phi0, sign, abs(dphi) * r, st)
        self.z = r * cmath.exp(1j * (phi0 + dphi))
        return out


def _states_from(out, z_list):
    out_y, out_K = out
    nsol = out_K.shape[1] if out_K.ndim == 2 else 0
    res = [[] for _ in range(nsol)]
    for k, z in enumerate(z_list):
        for i in range(nsol):
            res[i].append(SolverState(z, complex(out_y[k, 2 * i]), complex(out_y[k, 2 * i + 1]),
                                      float(out_K[k, i]) * LN2))
    return res


def integrate_path(A: EntireFunction, B: EntireFunction | None, ic, path: PathSpec, tol: float = 1e-10,
                   stations=None, circle_samples: int = 256) -> Trajectory:
    """Integrate ``f'' + A f = 0`` (B None) or ``f'' + A f' + B f = 0`` from the ICs at 0.

    States are recorded at ``stations`` (radii in ``[r_start, r_end]``; default 101
    equally spaced), then, with ``then_circle``, at ``circle_samples`` points of a
    counter-clockwise turn around ``|z| = r_end``.
    """
    bundle = Bundle(Coefficients(A, B), [ic], tol)
    return _integrate_bundle(bundle, path, stations, circle_samples)


def _integrate_bundle(bundle, path, stations, circle_samples):
    th = path.theta
    if stations is None:
        stations = np.linspace(path.r_start, path.r_end, 101)
    stations = np.asarray(sorted(set(float(x) for x in stations)))
    if stations.size and (stations[0] < path.r_start or stations[-1] > path.r_end):
        raise DomainError("stations must lie on the path")
    traj = [[] for _ in range(bundle.size)]
    if stations.size and stations[0] == 0:
        for i, s in enumerate(bundle.states()):
            traj[i].append(s)
        stations = stations[1:]
    out = bundle.ray(th, path.r_end, stations)
    for i, lst in enumerate(_states_from(out, [r * cmath.exp(1j * th) for r in stations])):
        traj[i].extend(lst)
    if path.then_circle:
        ang = np.arange(1, circle_samples + 1) * (TWO_PI / circle_samples)
        out = bundle.arc(TWO_PI, ang)
        zs = [path.r_end * cmath.exp(1j * (th + a)) for a in ang]
        for i, lst in enumerate(_states_from(out, zs)):
            traj[i].extend(lst)
    return Trajectory(traj)


def integrate_to(A, B, ics, z_target: complex, tol: float = 1e-10, via_radius=None):
    """States of each IC's solution at ``z_target``.

    The path is the ray to ``z_target``, or with ``via_radius`` a ray along
    direction 0 to that radius, an arc, and a ray out to the target.
    """
    bundle = Bundle(Coefficients(A, B), ics, tol)
    r, th = abs(z_target), cmath.phase(z_target)
    if via_radius is None:
        bundle.ray(th, r)
    else:
        bundle.ray(0.0, via_radius)
        if th != 0:
            bundle.arc(th)
        bundle.ray(th, r)
    return bundle.states()


def wronskian(s1: SolverState, s2: SolverState) -> LogComplex:
    if abs(s1.z - s2.z) > 1e-12 * max(1.0, abs(s1.z)):
        raise DomainError("wronskian needs states at the same position")
    d = s1.u * s2.v - s1.v * s2.u
    return lc_scaled(d, s1.kappa + s2.kappa)


# -- zero counting ----------------------------------------------------------------------

@dataclass(frozen=True)
class ZeroCountReport:
    r: float
    winding_raw: float
    n: int
    N: float | None = None
    samples: int = 0


def zero_count(E_samples, r: float) -> ZeroCountReport:
    """Winding number of a closed loop of samples (first sample not repeated at the end)."""
    ph = np.array([e.phase for e in E_samples], dtype=float)
    if any(e.is_zero for e in E_samples):
        raise ZeroCountError(f"exact zero on the circle r={r}")
    steps = wrap_array(np.diff(np.concatenate([ph, ph[:1]])))
    if np.max(np.abs(steps)) >= math.pi / 2:
        raise ZeroCountError(f"phase step exceeds pi/2 at r={r}; more samples needed")
    w = float(np.sum(steps)) / TWO_PI
    n = int(round(w))
    if abs(w - n) >= 1e-3:
        raise ZeroCountError(f"winding {w} not integral at r={r}")
    return ZeroCountReport(float(r), w, n, None, len(E_samples))


def _threads():
    try:
        n = int(os.environ.get("NEVANLAB_THREADS", "0"))
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


class RayFan:
    """Two solutions sampled along rays from the origin at a fixed set of radii.

    Values on a circle are obtained along rays rather than by continuing around
    the circle: along a ray the dominant exponential part of a solution stays
    dominant, whereas a full turn crosses sectors where a part known only to
    rounding accuracy becomes dominant again.  Ray directions are dyadic
    fractions of a turn, so refinement only ever adds rays.
    """

    RES = 1 << 24

    def __init__(self, coeffs: Coefficients, ics, radii, tol: float):
        self.coeffs = coeffs
        self.ics = list(ics)
        self.radii = np.asarray(radii, dtype=float)
        self.tol = tol
        self._rays = {}

    def _run(self, key):
        b = Bundle(self.coeffs, self.ics, self.tol)
        return b.ray(TWO_PI * key / self.RES, self.radii[-1], self.radii)

    def add(self, keys):
        todo = sorted(set(int(q) for q in keys) - self._rays.keys())
        if todo:
            with ThreadPoolExecutor(max_workers=min(_threads(), len(todo))) as ex:
                for key, out in zip(todo, ex.map(self._run, todo)):
                    self._rays[key] = out

    def keys(self):
        return np.array(sorted(self._rays), dtype=np.int64)

    def circle(self, k: int):
        """``(keys, theta, y, K)`` on the circle of radius index ``k``; ``y`` is (m, 4), ``K`` is (m, 2)."""
        keys = self.keys()
        y = np.array([self._rays[q][0][k] for q in keys])
        K = np.array([self._rays[q][1][k] for q in keys])
        return keys, keys * (TWO_PI / self.RES), y, K


def _circle_product(theta, y, K):
    """``log|E|``, ``arg E`` and ``Re(e^{i theta} E'/E)`` at the fan samples."""
    u1, v1, u2, v2 = y[:, 0], y[:, 1], y[:, 2], y[:, 3]
    with np.errstate(divide="ignore", invalid="ignore"):
        lm = np.log(np.abs(u1)) + np.log(np.abs(u2)) + (K[:, 0] + K[:, 1]) * LN2
        ph = np.angle(u1) + np.angle(u2)
        dlog = v1 / u1 + v2 / u2
    return lm, wrap_array(ph), (np.exp(1j * theta) * dlog).real


def _circle_check(fan: RayFan, k: int):
    """Per-interval failure mask and the data on the circle of radius index ``k``.

    An interval between neighbouring rays fails when the wrapped phase step is at
    least pi/2, or when it disagrees by pi/4 or more with the trapezoid estimate of
    the phase increment from ``d arg E / d theta = Re(z E'/E)`` (a hidden 2 pi slip).
    """
    r = fan.radii[k]
    keys, theta, y, K = fan.circle(k)
    lm, ph, g = _circle_product(theta, y, K)
    g = r * g
    dphi = wrap_array(np.diff(np.concatenate([ph, ph[:1]])))
    h = np.diff(np.concatenate([theta, [TWO_PI]]))
    trap = h * 0.5 * (g + np.roll(g, -1))
    with np.errstate(invalid="ignore"):
        bad = ~(np.abs(dphi) < math.pi / 2) | ~(np.abs(dphi - trap) < math.pi / 4)
    zero = not np.all(np.isfinite(lm))
    return keys, theta, lm, dphi, bad, zero


def _midpoints(keys, bad, res):
    nxt = np.concatenate([keys[1:], [res + keys[0]]])
    mids = ((keys + nxt) // 2) % res
    ok = bad & (nxt - keys >= 2)
    return mids[ok], bool(np.any(bad & (nxt - keys < 2)))


def _certify(fan: RayFan, ks, m0: int, max_rays: int):
    """Refine the fan until every circle in ``ks`` passes; returns {k: report or failure reason}."""
    fan.add(range(0, fan.RES, fan.RES // m0))
    out = {}
    active = list(ks)
    while active:
        new = []
        still = []
        for k in active:
            keys, theta, lm, dphi, bad, zero = _circle_check(fan, k)
            if zero:
                out[k] = "E vanishes on the circle"
                continue
            if not bad.any():
                w = float(np.sum(dphi)) / TWO_PI
                n = int(round(w))
                if abs(w - n) >= 1e-3:
                    out[k] = f"winding {w} not integral"
                    continue
                # Jensen: circle mean of log|E| by the periodic trapezoid rule on the fan
                h = np.diff(np.concatenate([theta, [TWO_PI]]))
                mean_log = float(np.sum(h * 0.5 * (lm + np.roll(lm, -1)))) / TWO_PI
                out[k] = ZeroCountReport(float(fan.radii[k]), w, n, mean_log, int(keys.size))
                continue
            mids, stuck = _midpoints(keys, bad, fan.RES)
            if stuck or len(fan.keys()) + len(mids) > max_rays:
                out[k] = f"phase not resolved with {len(fan.keys())} rays"
                continue
            new.append(mids)
            still.append(k)
        if new:
            fan.add(np.concatenate(new))
        active = still
    return out


def product_on_circle(A: EntireFunction, B: EntireFunction | None, ic1, ic2, r: float, samples: int = 64,
                      tol: float = 1e-10, max_samples: int = 1 << 15):
    """``E = f1 f2`` on the circle ``|z| = r`` as ``(theta, LogComplex)`` pairs.

    Starts from ``samples`` equally spaced directions and bisects every gap whose
    phase step is not resolved.
    """
    fan = RayFan(Coefficients(A, B), [ic1, ic2], [r], tol)
    _certify(fan, [0], samples, max_samples)
    _, theta, y, K = fan.circle(0)
    lm, ph, _ = _circle_product(theta, y, K)
    return [(float(t), LogComplex(a, b) if np.isfinite(a) else LogComplex.zero())
            for t, a, b in zip(theta, lm, ph)]


def counting_sweep(A: EntireFunction, B: EntireFunction | None, ic1=(1.0, 0.0), ic2=(1.0, 1.0),
                   grid: RadialGrid | None = None, tol: float = 1e-10, m0: int = 64,
                   max_rays: int = 1 << 15) -> list:
    """Zero counts ``n(r)`` and integrated counts ``N(r)`` of ``E = f1 f2`` on a radial grid.

    ``winding_raw`` is the sum of certified phase increments over 2 pi.  ``N(r)``
    comes from Jensen's formula: circle mean of ``log|E|`` minus ``log|E(0)|``.
    """
    e0 = complex(ic1[0]) * complex(ic2[0])
    if e0 == 0:
        raise PreconditionError("E(0) = f1(0) f2(0) must be non-zero")
    if grid is None:
        raise DomainError("counting_sweep needs a radial grid")
    coeffs = Coefficients(A, B)
    fan = RayFan(coeffs, [ic1, ic2], grid.radii, tol)
    res = _certify(fan, range(len(grid)), m0, max_rays)
    log_e0 = math.log(abs(e0))
    out = []
    prev = 0
    for k in range(len(grid)):
        rep = res[k]
        if not isinstance(rep, ZeroCountReport):
            rep = _perturbed_report(coeffs, [ic1, ic2], fan.radii[k], tol, m0, max_rays, rep)
        if rep.n < prev:
            raise ZeroCountError(f"n(r) decreased from {prev} to {rep.n} at r={rep.r}")
        prev = rep.n
        out.append(ZeroCountReport(rep.r, rep.winding_raw, rep.n, max(rep.N - log_e0, 0.0), rep.samples))
    return out


def _perturbed_report(coeffs, ics, r, tol, m0, max_rays, why):
    """Retry a radius at ``r(1 + j 1e-6)``, j = 1..3 (a zero of E sits on or next to the circle)."""
    for j in range(1, 4):
        fan = RayFan(coeffs, ics, [r * (1 + j * 1e-6)], tol)
        rep = _certify(fan, [0], m0, max_rays)[0]
        if isinstance(rep, ZeroCountReport):
            return rep
        why = rep
    raise ZeroCountError(f"zero count at r={r} not certified: {why}")


@dataclass(frozen=True)
class LambdaEstimate:
    value: float | None
    too_few_zeros: bool
    upper_bound: float | None = None


def lambda_estimate(reports, tail_fraction: float = 0.5) -> LambdaEstimate:
    """Slope of ``log n`` against ``log r`` over the tail (max over one-decade windows)."""
    from .nevanlinna import decade_windows, tail

    t = [rep for rep in tail(list(reports), tail_fraction) if rep.n >= 5]
    if len(t) < 3:
        last = reports[-1] if reports else None
        ub = None
        if last is not None and last.r > 1:
            ub = math.log(max(last.n, 1) + 1) / math.log(last.r)
        return LambdaEstimate(None, True, ub)
    rs = [rep.r for rep in t]
    lr = np.log(rs)
    ln = np.log([rep.n for rep in t])
    slopes = [fit_slope(lr[i:j], ln[i:j])[0] for i, j in decade_windows(rs) if j - i >= 3]
    if not slopes:
        return LambdaEstimate(None, True, None)
    return LambdaEstimate(max(slopes), False, None)


# -- Bank-Laine identity -----------------------------------------------------------------

def bank_laine_residual_states(A: EntireFunction, pairs, c: LogComplex) -> float:
    """Max over state pairs of ``|-4A - (c^2/E^2 + 2E''/E - (E'/E)^2)| / (1 + 4|A|)``.

    With ``a = f1'/f1`` and ``b = f2'/f2`` one has ``E'/E = a + b`` and
    ``E''/E = 2ab - 2A``; ``c/E`` is formed in log-polar form.
    """
    if c.is_zero:
        raise PreconditionError("Wronskian vanishes: the solutions are linearly dependent")
    worst = None
    skipped = 0
    for s1, s2 in pairs:
        if s1.u == 0 or s2.u == 0:
            skipped += 1
            continue
        a = s1.v / s1.u
        b = s2.v / s2.u
        Az = A.complex_value(s1.z)
        lE = lc_scaled(s1.u * s2.u, s1.kappa + s2.kappa) if s1.u * s2.u != 0 else None
        if lE is None:
            skipped += 1
            continue
        q = LogComplex(c.log_mod - lE.log_mod, c.phase - lE.phase).to_complex()
        rhs = q * q + 2 * (2 * a * b - 2 * Az) - (a + b) ** 2
        res = abs(-4 * Az - rhs) / (1 + 4 * abs(Az))
        worst = res if worst is None else max(worst, res)
    if skipped:
        log.info("bank-laine: %d probe(s) at zeros of E skipped", skipped)
    if worst is None:
        raise PreconditionError("every probe point lies at a zero of E")
    return worst


def bank_laine_residual(A: EntireFunction, ic1, ic2, probe_points, tol: float = 1e-10) -> float:
    """Residual of the Bank-Laine identity for the pair with ICs ``ic1``, ``ic2`` at the probes."""
    w0 = complex(ic1[0]) * complex(ic2[1]) - complex(ic1[1]) * complex(ic2[0])
    if w0 == 0:
        raise PreconditionError("Wronskian vanishes: the solutions are linearly dependent")
    c = LogComplex.from_complex(w0)
    pairs = []
    for z in probe_points:
        s1, s2 = integrate_to(A, None, [ic1, ic2], complex(z), tol)
        pairs.append((s1, s2))
    return bank_laine_residual_states(A, pairs, c)


# -- growth probe --------------------------------------------------------------------------

def _arc_budget(coeffs: Coefficients, theta: float, r_max: float, n: int = 2000) -> float:
    """``int_0^r_max (|a| + sqrt|b|) ds`` along the ray, by the trapezoid rule."""
    fa, fb = coeffs._first_order()
    r = np.linspace(0.0, r_max, n)
    th = np.full(n, theta)
    tot = np.zeros(n)
    for f, root in ((fa, False), (fb, True)):
        if f is None:
            continue
        lm = f.log_abs(r, th)
        tot += np.exp(np.minimum(0.5 * lm if root else lm, 700.0))
    return float(np.trapezoid(tot, r)) if hasattr(np, "trapezoid") else float(np.trapz(tot, r))


@dataclass(frozen=True)
class GrowthProbe:
    points: list  # (r, loglog_scale or None)
    rays_used: tuple
    rays_skipped: tuple


def growth_probe(A: EntireFunction, B: EntireFunction | None, ic, grid: RadialGrid, tol: float = 1e-10,
                 rays: int = 16, budget: float = ARC_BUDGET) -> GrowthProbe:
    """Per radius, ``log`` of the largest ``kappa + log max(|u|, |v|)`` over equally spaced rays.

    Rays whose coefficient budget ``int (|A| + sqrt|B|) ds`` exceeds ``budget`` are
    left out (explicit integration there would need an enormous number of steps).
    Non-positive scales are reported as None.
    """
    coeffs = Coefficients(A, B)
    radii = np.asarray(grid.radii)
    thetas = [TWO_PI * j / rays for j in range(rays)]
    used, skipped = [], []
    for th in thetas:
        (used if _arc_budget(coeffs, th, radii[-1]) <= budget else skipped).append(th)
    if not used:
        raise UnsupportedRangeError("every probe ray exceeds the integration budget")

    def run(th):
        b = Bundle(coeffs, [ic], tol)
        out_y, out_K = b.ray(th, radii[-1], radii)
        mx = np.maximum(np.abs(out_y[:, 0]), np.abs(out_y[:, 1]))
        with np.errstate(divide="ignore"):
            return out_K[:, 0] * LN2 + np.log(mx)

    with ThreadPoolExecutor(max_workers=min(_threads(), len(used))) as ex:
        scales = np.array(list(ex.map(run, used)))
    best = scales.max(axis=0)
    pts = [(float(r), float(math.log(v)) if v > 0 else None) for r, v in zip(radii, best)]
    return GrowthProbe(pts, tuple(used), tuple(skipped))


def order_proxy_slope(probe: GrowthProbe, r_lo: float, r_hi: float):
    """Slope of the loglog scale against ``log r`` over ``[r_lo, r_hi]``; None if undefined."""
    pts = [(r, v) for r, v in probe.points if r_lo * (1 - 1e-12) <= r <= r_hi * (1 + 1e-12) and v is not None]
    if len(pts) < 3:
        return None
    return fit_slope(np.log([p[0] for p in pts]), [p[1] for p in pts])[0]
