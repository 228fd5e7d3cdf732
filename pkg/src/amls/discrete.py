"""Hypergeometric tails and the discrete optimal cost of the sampling algorithm.

``hypergeom_tail(n, k, t, x)`` is the probability that a uniform ``t``-subset
of an ``n``-element universe contains at least ``x`` of ``k`` marked elements.
``f_value`` evaluates the max-min cost

    max_k  min_(alpha, c)  min_t  c^((beta k - t)/alpha) / p(n, k, t, x(k, t))

with ``x(k, t) = (1 - beta/alpha) k + t/alpha``, whose ``n``-th root tends to
the continuous base computed by :func:`amls.core.amlsbound`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional, Union

import numpy as np

from .core import DomainError, m_star
from .specs import OracleSpec, SpecLike, SpecList

__all__ = [
    "EXACT_F_MAX_N",
    "EXACT_TAIL_MAX_N",
    "FEval",
    "KRecord",
    "ModeError",
    "TailMode",
    "TailUnderflowError",
    "TailValue",
    "base_estimate",
    "ceil_snap",
    "f_value",
    "floor_snap",
    "hypergeom_tail",
    "overlap_threshold",
    "t_range",
]

EXACT_TAIL_MAX_N = 200
EXACT_F_MAX_N = 60
UNDERFLOW_LOG = -1e6
# Values this close to an integer are treated as that integer before rounding,
# so that e.g. 1.2 * 5 = 5.999999999999999 still yields 6.
_SNAP = 1e-9
# Log-costs this close (relatively) count as tied, so that exactly equal costs
# evaluated along different float paths still resolve by the tie rules.
_TIE = 1e-12


class ModeError(ValueError):
    """The requested evaluation mode cannot represent the result."""


class TailUnderflowError(ArithmeticError):
    """A log-mode tail probability fell below ``exp(-1e6)``."""


class TailMode(str, Enum):
    EXACT = "exact-rational"
    LOG = "log-float"


def _mode(mode: Union[str, TailMode]) -> TailMode:
    if isinstance(mode, TailMode):
        return mode
    aliases = {"exact": TailMode.EXACT, "log": TailMode.LOG}
    try:
        return aliases.get(mode) or TailMode(mode)
    except ValueError:
        raise ModeError(f"unknown mode {mode!r}") from None


def floor_snap(v: float) -> int:
    r = round(v)
    if abs(v - r) <= _SNAP * max(1.0, abs(v)):
        return int(r)
    return math.floor(v)


def ceil_snap(v: float) -> int:
    r = round(v)
    if abs(v - r) <= _SNAP * max(1.0, abs(v)):
        return int(r)
    return math.ceil(v)


@dataclass(frozen=True)
class TailValue:
    mode: TailMode
    log_value: float
    exact: Optional[Fraction] = None

    @property
    def probability(self) -> float:
        if self.exact is not None:
            return float(self.exact)
        return math.exp(self.log_value)


def _check_nkt(n: int, k: int, t: int) -> None:
    for name, v in (("n", n), ("k", k), ("t", t)):
        if not isinstance(v, (int, np.integer)) or isinstance(v, bool):
            raise DomainError(f"{name} must be an integer, got {v!r}")
    if n < 0 or not (0 <= k <= n) or not (0 <= t <= n):
        raise DomainError(f"need 0 <= k, t <= n, got n={n}, k={k}, t={t}")


@lru_cache(maxsize=None)
def _log_factorials(n: int) -> np.ndarray:
    return np.array([math.lgamma(i + 1.0) for i in range(n + 1)])


def _log_binom(lf: np.ndarray, a, b):
    return lf[a] - lf[b] - lf[a - b]


def _log_of_fraction(q: Fraction) -> float:
    if q == 0:
        return -math.inf
    return math.log(q.numerator) - math.log(q.denominator)


def _exact_tail(n: int, k: int, t: int, y0: int, form: str) -> Fraction:
    top = min(t, k)
    if form == "sample":
        num = sum(math.comb(k, y) * math.comb(n - k, t - y) for y in range(y0, top + 1))
        return Fraction(num, math.comb(n, t))
    num = sum(math.comb(t, y) * math.comb(n - t, k - y) for y in range(y0, top + 1))
    return Fraction(num, math.comb(n, k))


def hypergeom_tail(
    n: int,
    k: int,
    t: int,
    x: float,
    mode: Union[str, TailMode] = TailMode.EXACT,
    form: str = "sample",
) -> TailValue:
    """Probability that a uniform ``t``-subset holds at least ``x`` of ``k`` marked elements.

    ``form`` selects which of the two equivalent summations is used:
    ``"sample"`` sums ``C(k,y) C(n-k,t-y) / C(n,t)`` and ``"marked"`` sums
    ``C(t,y) C(n-t,k-y) / C(n,k)``.  A negative ``ceil(x)`` is clamped to 0.
    """
    _check_nkt(n, k, t)
    mode = _mode(mode)
    if form not in ("sample", "marked"):
        raise DomainError(f"form must be 'sample' or 'marked', got {form!r}")
    y0 = max(0, ceil_snap(float(x)))
    if mode is TailMode.EXACT:
        if n > EXACT_TAIL_MAX_N:
            raise ModeError(f"exact tails need n <= {EXACT_TAIL_MAX_N}, got {n}")
        q = _exact_tail(n, k, t, y0, form)
        return TailValue(mode, _log_of_fraction(q), q)

    lo = max(y0, t + k - n, 0)
    hi = min(t, k)
    if lo > hi:
        return TailValue(mode, -math.inf)
    lf = _log_factorials(n)
    ys = np.arange(lo, hi + 1)
    if form == "sample":
        terms = _log_binom(lf, k, ys) + _log_binom(lf, n - k, t - ys) - _log_binom(lf, n, t)
    else:
        terms = _log_binom(lf, t, ys) + _log_binom(lf, n - t, k - ys) - _log_binom(lf, n, k)
    top = float(terms.max())
    value = min(0.0, top + math.log(float(np.exp(terms - top).sum())))
    if value < UNDERFLOW_LOG:
        raise TailUnderflowError(f"tail probability below exp({UNDERFLOW_LOG:g}): log = {value!r}")
    return TailValue(mode, value)


def overlap_threshold(alpha: float, beta: float, k: int, t: int) -> float:
    """Overlap ``(1 - beta/alpha) k + t/alpha`` a sample needs for the oracle to finish the job."""
    return (1.0 - beta / alpha) * k + t / alpha


def t_range(alpha: float, beta: float, k: int) -> range:
    """Integer sample sizes in ``[M* k, beta k]``."""
    return range(max(0, ceil_snap(m_star(alpha, beta) * k)), floor_snap(beta * k) + 1)


@dataclass(frozen=True)
class KRecord:
    """The cheapest (spec, sample size) pair for one guess ``k`` of the optimum size."""

    k: int
    spec: OracleSpec
    t: int
    log_term: float


@dataclass(frozen=True)
class FEval:
    n: int
    log_value: float
    per_k: tuple[KRecord, ...]
    argmax_k: int
    mode: TailMode = TailMode.LOG


def _best_exact(n: int, k: int, spec: OracleSpec, beta: float) -> tuple[int, float]:
    log_c = math.log(spec.c)
    best_t, best = -1, math.inf
    for t in t_range(spec.alpha, beta, k):
        y0 = max(0, ceil_snap(overlap_threshold(spec.alpha, beta, k, t)))
        q = _exact_tail(n, k, t, y0, "sample")
        term = (beta * k - t) / spec.alpha * log_c - _log_of_fraction(q)
        if best_t < 0 or term < best - _tie_slack(best):
            best_t, best = t, term
    return best_t, best


def _best_log(n: int, k: int, spec: OracleSpec, beta: float) -> tuple[int, float]:
    ts = np.arange(t_range(spec.alpha, beta, k).start, t_range(spec.alpha, beta, k).stop)
    if ts.size == 0:
        return -1, math.inf
    lf = _log_factorials(n)
    ys = np.arange(0, k + 1)
    rest = ts[:, None] - ys[None, :]
    valid = (rest >= 0) & (rest <= n - k)
    safe = np.clip(rest, 0, n - k)
    terms = _log_binom(lf, k, ys)[None, :] + _log_binom(lf, n - k, safe) - _log_binom(lf, n, ts)[:, None]
    terms = np.where(valid, terms, -np.inf)
    # tails[:, j] = log of sum over y >= j, by a right-to-left log-sum-exp scan.
    with np.errstate(invalid="ignore"):
        tails = np.logaddexp.accumulate(terms[:, ::-1], axis=1)[:, ::-1]
    y0 = np.array(
        [max(0, ceil_snap(overlap_threshold(spec.alpha, beta, k, int(t)))) for t in ts]
    )
    log_p = np.minimum(tails[np.arange(ts.size), y0], 0.0)
    if float(log_p.min()) < UNDERFLOW_LOG:
        raise TailUnderflowError(f"tail probability below exp({UNDERFLOW_LOG:g}) at n={n}, k={k}")
    cost = (beta * k - ts) / spec.alpha * math.log(spec.c) - log_p
    lowest = float(cost.min())
    i = int(np.argmax(cost <= lowest + _tie_slack(lowest)))  # smallest t among ties
    return int(ts[i]), float(cost[i])


def _tie_slack(value: float) -> float:
    return _TIE * max(1.0, abs(value))


def f_value(
    specs: Union[SpecList, SpecLike, Iterable[SpecLike]],
    beta: float,
    n: int,
    mode: Union[str, TailMode] = TailMode.LOG,
) -> FEval:
    """Discrete optimal cost ``f(n)`` in log form with its per-``k`` witnesses."""
    specs = SpecList.of(specs)
    mode = _mode(mode)
    if not (math.isfinite(beta) and beta >= 1.0):
        raise DomainError(f"beta must be a finite number >= 1, got {beta!r}")
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    if mode is TailMode.EXACT and n > EXACT_F_MAX_N:
        raise ModeError(f"exact f-values need n <= {EXACT_F_MAX_N}, got {n}")
    best_k_term = _best_exact if mode is TailMode.EXACT else _best_log

    records: list[KRecord] = []
    for k in range(0, floor_snap(n / beta) + 1):
        chosen: Optional[KRecord] = None
        for spec in specs:
            t, term = best_k_term(n, k, spec, beta)
            if t >= 0 and (chosen is None or term < chosen.log_term - _tie_slack(chosen.log_term)):
                chosen = KRecord(k, spec, t, term)
        if chosen is None:
            raise DomainError(f"no admissible sample size for k={k}")
        records.append(chosen)
    top = records[0]
    for rec in records[1:]:
        if rec.log_term > top.log_term + _tie_slack(top.log_term):
            top = rec
    return FEval(n=n, log_value=top.log_term, per_k=tuple(records), argmax_k=top.k, mode=mode)


def base_estimate(feval: FEval) -> float:
    """The ``n``-th root of ``f(n)``."""
    return math.exp(feval.log_value / feval.n)
