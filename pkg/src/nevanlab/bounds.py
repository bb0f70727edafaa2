"""Closed-form lower bounds for exponents of convergence and theorem thresholds.

Each formula takes the growth quantities of the coefficients (order, lower
order, deviation, xi) and returns the predicted bound, with ``math.inf`` for
"infinite".  ``assemble_verdict`` compares a prediction with a measurement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DomainError, PreconditionError

INF = math.inf

# measured lambda may undershoot a lambda bound by this much and still count as consistent
LAMBDA_TOL = 0.15
# infinite-order proxy: slope over the top decade exceeds the previous decade's by this
TREND_MIN_RISE = 0.3

THEOREMS = ("BankLaine66", "Rossi77", "BergweilerEremenko88", "Thm12", "Cor23", "Thm33", "Thm35", "Cond18")


def petrenko_bound(mu: float) -> float:
    """``pi mu / sin(pi mu)`` for ``mu <= 1/2`` (1 at 0), ``pi mu`` above."""
    if not mu >= 0:
        raise DomainError("mu must be >= 0")
    if mu == 0:
        return 1.0
    if mu <= 0.5:
        return math.pi * mu / math.sin(math.pi * mu)
    return math.pi * mu


def _near_int(x: float) -> bool:
    return abs(x - round(x)) <= 1e-9


def bank_laine_bound(rho: float):
    """``(rho, applicable)``: the bound ``lambda >= rho`` holds when ``rho`` is not an integer."""
    return float(rho), not _near_int(rho)


def rossi_bound(rho: float) -> float:
    """``rho / (2 rho - 1)`` on ``[1/2, 1)``, infinite at ``rho = 1/2``."""
    if not 0.5 <= rho < 1:
        raise DomainError("rossi_bound needs 1/2 <= rho < 1")
    if rho == 0.5:
        return INF
    return rho / (2 * rho - 1)


def be_bound(N: int, mu: float) -> float:
    """``N mu / (2 mu - N)`` for ``N/2 <= mu < N``."""
    if int(N) != N or N < 1:
        raise DomainError("N must be a positive integer")
    if not N / 2 <= mu < N:
        raise DomainError("be_bound needs N/2 <= mu < N")
    if 2 * mu == N:
        return INF
    return N * mu / (2 * mu - N)


def thm12_bound(alpha: float, beta: float) -> float:
    """``(1 - beta) / (2 (1 - alpha))``, infinite at ``alpha = 1``."""
    if not (0 < alpha <= 1):
        raise DomainError("alpha must lie in (0, 1]")
    if not (0 <= beta < 1):
        raise DomainError("beta must lie in [0, 1)")
    if alpha == 1:
        return INF
    return (1 - beta) / (2 * (1 - alpha))


def cor23_bound(beta_plus: float) -> float:
    """Bound with ``alpha = 1/beta_plus``; ``1/2`` when ``beta_plus`` is infinite."""
    if not beta_plus >= 1:
        raise DomainError("beta_plus must be >= 1")
    if beta_plus == INF:
        return 0.5
    return thm12_bound(1.0 / beta_plus, 0.0)


def _xi_check(xi):
    if not 0 <= xi <= 1:
        raise DomainError("xi must lie in [0, 1]")


def thm33_threshold(xi: float) -> float:
    _xi_check(xi)
    return INF if xi == 1 else 1 / (1 - xi)


def thm35_threshold(xi: float) -> float:
    _xi_check(xi)
    return INF if xi == 1 else 1 / (2 * (1 - xi))


def cond18_threshold(xi: float) -> float:
    _xi_check(xi)
    return INF if xi == 1 else 1 / (math.pi * (1 - xi))


def bounds_table(mu=None, rho=None, N=None, alpha=None, beta=0.0, beta_plus=None, xi=None) -> dict:
    """Every formula whose inputs are given; formulas outside their domain report None."""
    out = {}

    def put(name, fn, *args):
        try:
            out[name] = fn(*args)
        except DomainError:
            out[name] = None

    if mu is not None:
        put("petrenko", petrenko_bound, mu)
    if rho is not None:
        val, ok = bank_laine_bound(rho)
        out["bank_laine"] = val
        out["bank_laine_applicable"] = ok
        put("rossi", rossi_bound, rho)
    if N is not None and mu is not None:
        put("bergweiler_eremenko", be_bound, N, mu)
    if alpha is not None:
        put("thm12", thm12_bound, alpha, beta)
    if beta_plus is not None:
        put("cor23", cor23_bound, beta_plus)
    if xi is not None:
        put("thm33", thm33_threshold, xi)
        put("thm35", thm35_threshold, xi)
        put("cond18", cond18_threshold, xi)
    return out


# -- verdicts -------------------------------------------------------------------------------

@dataclass(frozen=True)
class GrowthTrend:
    """Order-proxy slopes over the previous and the top decade of a growth probe."""

    slope_prev: float
    slope_top: float
    coefficient_order: float = 0.0

    @property
    def unbounded(self) -> bool:
        return (self.slope_top - self.slope_prev >= TREND_MIN_RISE
                and self.slope_top > self.coefficient_order)


@dataclass(frozen=True)
class TheoremVerdict:
    theorem_id: str
    inputs: dict
    predicted_bound: float
    measured: float | None = None
    hypothesis_satisfied: bool = False
    conclusion_consistent: bool | None = None
    notes: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.conclusion_consistent is not None and (self.measured is None or not self.hypothesis_satisfied):
            raise DomainError("conclusion_consistent needs a measurement and a satisfied hypothesis")


# theorem -> (required inputs, kind of conclusion)
_REQUIREMENTS = {
    "BankLaine66": (("rho",), "lambda"),
    "Rossi77": (("rho",), "lambda"),
    "BergweilerEremenko88": (("N", "mu"), "lambda"),
    "Thm12": (("alpha",), "lambda"),
    "Cor23": (("beta_plus",), "lambda"),
    "Thm33": (("xi", "beta_minus"), "order"),
    "Thm35": (("xi", "mu"), "order"),
    "Cond18": (("xi", "mu"), "order"),
}


def _one_of_conditions(x, alpha, beta):
    """At least one of: rho not an integer, mu < rho, rho below the bound itself."""
    rho = x.get("rho")
    if rho is None:
        # with alpha = 1 the last condition only asks for finite order
        return alpha == 1
    mu = x.get("mu")
    bound = INF if alpha == 1 else (1 - beta) / (2 * (1 - alpha))
    return (not _near_int(rho)) or (mu is not None and mu < rho) or rho < bound


def _lambda_case(tid, x):
    """``(predicted, hypothesis_satisfied)`` for the lambda-bound theorems."""
    trans = bool(x.get("transcendental", True))
    if tid == "BankLaine66":
        val, ok = bank_laine_bound(x["rho"])
        return val, trans and ok and x["rho"] > 0
    if tid == "Rossi77":
        ok = 0.5 <= x["rho"] < 1
        return (rossi_bound(x["rho"]) if ok else None), trans and ok
    if tid == "BergweilerEremenko88":
        try:
            return be_bound(x["N"], x["mu"]), trans
        except DomainError:
            return None, False
    if tid == "Thm12":
        beta = x.get("beta", 0.0)
        return thm12_bound(x["alpha"], beta), trans and _one_of_conditions(x, x["alpha"], beta)
    if tid == "Cor23":
        bp = x["beta_plus"]
        alpha = 0.0 if bp == INF else 1.0 / bp
        return cor23_bound(bp), trans and _one_of_conditions(x, alpha, 0.0)
    raise DomainError(f"unknown theorem {tid}")


def _order_case(tid, x):
    """``(threshold, hypothesis_satisfied)`` for the infinite-order theorems."""
    xi = x["xi"]
    ok = xi > 0 and bool(x.get("transcendental", True))
    if tid == "Thm33":
        th = thm33_threshold(xi)
        return th, ok and x["beta_minus"] < th
    if tid == "Thm35":
        th = thm35_threshold(xi)
        return th, ok and x["mu"] < th
    th = cond18_threshold(xi)
    return th, ok and 0.5 <= x["mu"] < th


def assemble_verdict(theorem_id: str, inputs: dict, measured=None) -> TheoremVerdict:
    """Evaluate a theorem's hypothesis on ``inputs`` and compare the conclusion with ``measured``.

    ``inputs`` may carry ``transcendental`` (default True): for the lambda bounds it
    refers to ``A``, for the infinite-order theorems to ``B``.  Thm12 and Cor23 also
    read the optional ``rho`` and ``mu`` of ``A`` for their side conditions.

    ``measured`` is a lambda estimate (float) or a GrowthTrend of a log-log slope
    (of ``n(r)`` for lambda bounds, of the growth probe for the infinite-order
    theorems).  A lambda bound is met when ``measured >= predicted - LAMBDA_TOL``;
    an infinite prediction is met only by an unbounded trend.
    """
    if theorem_id not in _REQUIREMENTS:
        raise DomainError(f"unknown theorem {theorem_id!r}; expected one of {', '.join(THEOREMS)}")
    required, kind = _REQUIREMENTS[theorem_id]
    missing = [k for k in required if inputs.get(k) is None]
    if theorem_id == "Cor23" and not missing:
        cor23_bound(inputs["beta_plus"])
    # the side conditions need rho(A) unless alpha = 1 makes them automatic
    if theorem_id == "Thm12" and inputs.get("alpha") not in (None, 1, 1.0) and inputs.get("rho") is None:
        missing.append("rho")
    if theorem_id == "Cor23" and inputs.get("beta_plus") not in (None, 1, 1.0) and inputs.get("rho") is None:
        missing.append("rho")
    if missing:
        raise PreconditionError(f"{theorem_id} verdict is missing inputs: {', '.join(missing)}")
    x = dict(inputs)
    notes = []
    if measured is not None and not isinstance(measured, GrowthTrend):
        measured = float(measured)
    if kind == "lambda":
        predicted, ok = _lambda_case(theorem_id, x)
        if predicted is None:
            predicted = math.nan
    else:
        predicted, ok = _order_case(theorem_id, x)
        if measured is not None and not isinstance(measured, GrowthTrend):
            raise DomainError("infinite-order verdicts need a GrowthTrend measurement")
    value = None
    consistent = None
    if measured is not None:
        trend = isinstance(measured, GrowthTrend)
        value = measured.slope_top if trend else measured
        if ok:
            if trend and measured.unbounded:
                consistent = True
            elif kind == "lambda" and math.isfinite(predicted):
                consistent = value >= predicted - LAMBDA_TOL
            else:
                consistent = False
                if kind == "lambda":
                    notes.append("a finite measurement cannot confirm an infinite bound")
    if not ok:
        notes.append("hypothesis not satisfied: the theorem makes no prediction here")
    return TheoremVerdict(theorem_id, x, predicted, value, ok, consistent, tuple(notes))
