"""Continuous objective, its derivatives and the max-min optimizer for the AMLS base.

For an oracle with approximation ratio ``alpha`` and cost base ``c``, a target
approximation ratio ``beta`` and fractions ``kappa = k/n`` (optimum size) and
``tau = t/n`` (sample size), the exponent of the sampling cost is

    g(kappa, tau) = ((beta*kappa - tau)/alpha) ln c
                    - tau H(gamma) - (1 - tau) H(delta) + H(kappa)

where ``H`` is the binary entropy in nats and ``gamma``/``delta`` are the
conditional densities of optimum elements inside and outside the sample.
The achievable base is ``exp(max_kappa min_specs min_tau g)``.

Everything here works in IEEE double precision.  Endpoints where a formula is
singular are dispatched to their closed forms instead of being evaluated
generically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Optional, Union

import numpy as np

from .specs import OracleSpec, SpecLike, SpecList

__all__ = [
    "AltMinimum",
    "BoundResult",
    "CaseTag",
    "ConvergenceError",
    "DomainError",
    "GStarEval",
    "amlsbound",
    "brute_bound",
    "delta_fn",
    "delta_star",
    "entropy",
    "esaamlsbound",
    "g_dkappa",
    "g_dkappakappa",
    "g_dkappatau",
    "g_dtau",
    "g_dtautau",
    "g_star",
    "g_star_alt",
    "g_star_alt_argmin",
    "g_star_bisection",
    "g_tilde",
    "g_value",
    "gamma_fn",
    "hessian_det",
    "hessian_det_direct",
    "is_simple",
    "kl_div",
    "m_of",
    "m_star",
    "xi",
]

# Relative slack used when checking that a float lies in a closed interval.
_FEAS_TOL = 1e-12
# Fraction of the tau-range kept away from each end when bracketing the root.
_BRACKET_FRACTION = 1e-12
# Width of the outer search interval below which golden-section stops.
KAPPA_FLOOR = 1e-12
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class DomainError(ValueError):
    """An argument lies outside the domain on which a function is defined."""


class ConvergenceError(ArithmeticError):
    """An iterative solver hit its iteration cap before reaching the tolerance."""

    def __init__(self, message: str, **diagnostics: float):
        details = ", ".join(f"{k}={v!r}" for k, v in diagnostics.items())
        super().__init__(f"{message} ({details})" if details else message)
        self.diagnostics = diagnostics


# ---------------------------------------------------------------------------
# Basic information-theoretic functions
# ---------------------------------------------------------------------------


def entropy(x: float) -> float:
    """Binary entropy in nats, with ``H(0) = H(1) = 0``."""
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"entropy needs 0 <= x <= 1, got {x!r}")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log(x) - (1.0 - x) * math.log1p(-x)


def kl_div(a: float, b: float) -> float:
    """Kullback-Leibler divergence ``D(a || b)`` between Bernoulli(a) and Bernoulli(b).

    Terms with a zero coefficient vanish, so ``b`` may sit at 0 or 1 as long as
    the matching ``a``-term is zero.
    """
    if not 0.0 <= a <= 1.0:
        raise DomainError(f"kl_div needs 0 <= a <= 1, got a={a!r}")
    if not 0.0 <= b <= 1.0:
        raise DomainError(f"kl_div needs 0 <= b <= 1, got b={b!r}")
    total = 0.0
    if a > 0.0:
        if b == 0.0:
            raise DomainError(f"kl_div({a!r}, 0) is infinite")
        total += a * math.log(a / b)
    if a < 1.0:
        if b == 1.0:
            raise DomainError(f"kl_div({a!r}, 1) is infinite")
        total += (1.0 - a) * (math.log1p(-a) - math.log1p(-b))
    return total


# ---------------------------------------------------------------------------
# Feasible region
# ---------------------------------------------------------------------------


def _check_params(alpha: float, beta: float, c: Optional[float] = None) -> None:
    if not (math.isfinite(alpha) and alpha >= 1.0):
        raise DomainError(f"alpha must be a finite number >= 1, got {alpha!r}")
    if not (math.isfinite(beta) and beta >= 1.0):
        raise DomainError(f"beta must be a finite number >= 1, got {beta!r}")
    if c is not None and not (math.isfinite(c) and c >= 1.0):
        raise DomainError(f"c must be a finite number >= 1, got {c!r}")


def _check_kappa(beta: float, kappa: float) -> float:
    top = 1.0 / beta
    if not (-_FEAS_TOL <= kappa <= top * (1.0 + _FEAS_TOL)):
        raise DomainError(f"kappa must lie in [0, 1/beta] = [0, {top!r}], got {kappa!r}")
    return min(max(kappa, 0.0), top)


def _clip_unit(x: float, name: str) -> float:
    if -_FEAS_TOL <= x <= 1.0 + _FEAS_TOL:
        return min(max(x, 0.0), 1.0)
    raise DomainError(f"{name} = {x!r} left [0, 1]")


def m_star(alpha: float, beta: float) -> float:
    """Slope of the smallest sample size considered by the discrete algorithm."""
    _check_params(alpha, beta)
    if alpha <= beta:
        return 0.0
    return (alpha - beta) / (alpha - 1.0)


def m_of(alpha: float, beta: float, kappa: float) -> float:
    """Lower end of the feasible tau-range for a given kappa."""
    _check_params(alpha, beta)
    kappa = _check_kappa(beta, kappa)
    if alpha == beta:
        return 0.0
    if alpha > beta:
        return (alpha - beta) * kappa / (alpha - 1.0)
    if alpha * kappa >= 1.0:
        raise DomainError(f"alpha*kappa must be < 1 when alpha < beta, got {alpha * kappa!r}")
    return (beta - alpha) * kappa / (1.0 - alpha * kappa)


def _check_tau(alpha: float, beta: float, kappa: float, tau: float) -> float:
    lo = m_of(alpha, beta, kappa)
    hi = beta * kappa
    slack = _FEAS_TOL * max(1.0, hi)
    if not (lo - slack <= tau <= hi + slack):
        raise DomainError(f"tau must lie in [M(kappa), beta*kappa] = [{lo!r}, {hi!r}], got {tau!r}")
    return min(max(tau, lo), hi)


def delta_fn(alpha: float, beta: float, kappa: float, tau: float) -> float:
    """Density of optimum elements outside a sample of relative size ``tau``."""
    if tau == 1.0:
        return 1.0 / alpha
    return (beta * kappa / alpha - tau / alpha) / (1.0 - tau)


def gamma_fn(alpha: float, beta: float, kappa: float, tau: float) -> float:
    """Density of optimum elements inside a sample of relative size ``tau``."""
    if tau == 0.0 or alpha == beta:
        return 1.0 / alpha
    return (1.0 - beta / alpha) * (kappa / tau) + 1.0 / alpha


def _densities(alpha: float, beta: float, kappa: float, tau: float) -> tuple[float, float]:
    gamma = _clip_unit(gamma_fn(alpha, beta, kappa, tau), "gamma")
    delta = _clip_unit(delta_fn(alpha, beta, kappa, tau), "delta")
    return gamma, delta


# ---------------------------------------------------------------------------
# Objective and derivatives
# ---------------------------------------------------------------------------


def g_value(alpha: float, beta: float, c: float, kappa: float, tau: float) -> float:
    """The sampling-cost exponent ``g(kappa, tau)`` on the feasible region."""
    _check_params(alpha, beta, c)
    kappa = _check_kappa(beta, kappa)
    tau = _check_tau(alpha, beta, kappa, tau)
    gamma, delta = _densities(alpha, beta, kappa, tau)
    value = (beta * kappa - tau) / alpha * math.log(c) + entropy(kappa)
    if tau > 0.0:
        value -= tau * entropy(gamma)
    if tau < 1.0:
        value -= (1.0 - tau) * entropy(delta)
    return value


def _open_point(alpha, beta, c, kappa, tau):
    """Validate an interior point and return ``(gamma, delta)`` there."""
    _check_params(alpha, beta, c)
    if not 0.0 < kappa < 1.0 / beta:
        raise DomainError(f"kappa must lie in (0, 1/beta), got {kappa!r}")
    lo, hi = m_of(alpha, beta, kappa), beta * kappa
    if not lo < tau < hi:
        raise DomainError(f"tau must lie in (M(kappa), beta*kappa) = ({lo!r}, {hi!r}), got {tau!r}")
    return _densities(alpha, beta, kappa, tau)


def g_dtau(alpha: float, beta: float, c: float, kappa: float, tau: float) -> float:
    """Partial derivative of ``g`` in ``tau``.

    At ``tau = beta*kappa`` the derivative diverges and ``+inf`` is returned;
    at ``tau = M(kappa)`` with ``alpha > beta`` it diverges to ``-inf``.  At
    ``tau = M(kappa)`` with ``alpha < beta`` the one-sided limit
    ``-ln(c)/alpha`` is returned.
    """
    _check_params(alpha, beta, c)
    hi = beta * kappa
    lo = m_of(alpha, beta, kappa)
    if tau == hi and hi > lo:
        return math.inf
    if tau == lo and hi > lo:
        if alpha > beta:
            return -math.inf
        if alpha < beta:
            return -math.log(c) / alpha
    gamma, delta = _open_point(alpha, beta, c, kappa, tau)
    a = 1.0 / alpha
    # Next to either end a density can round onto 0 or 1; the divergence is
    # then the infinite limit the derivative tends to.
    return -math.log(c) / alpha - _kl_or_inf(a, gamma) + _kl_or_inf(a, delta)


def _kl_or_inf(a: float, b: float) -> float:
    if (b == 0.0 and a > 0.0) or (b == 1.0 and a < 1.0):
        return math.inf
    return kl_div(a, b)


def _weights(alpha, beta, kappa, tau, gamma, delta):
    big_gamma = 1.0 / (tau * gamma * (1.0 - gamma))
    big_delta = 1.0 / ((1.0 - tau) * delta * (1.0 - delta))
    return big_gamma, big_delta


def g_dtautau(alpha: float, beta: float, c: float, kappa: float, tau: float) -> float:
    """Second partial derivative of ``g`` in ``tau`` (strictly positive inside)."""
    gamma, delta = _open_point(alpha, beta, c, kappa, tau)
    big_gamma, big_delta = _weights(alpha, beta, kappa, tau, gamma, delta)
    a = 1.0 / alpha
    return (gamma - a) ** 2 * big_gamma + (delta - a) ** 2 * big_delta


def g_dkappa(alpha: float, beta: float, c: float, kappa: float, tau: float) -> float:
    """Partial derivative of ``g`` in ``kappa``."""
    gamma, delta = _open_point(alpha, beta, c, kappa, tau)
    a = 1.0 / alpha

    def shifted(x: float) -> float:
        return kl_div(a, x) + math.log1p(-x)

    return (
        beta / alpha * math.log(c)
        + (beta - alpha) * shifted(gamma)
        - beta * shifted(delta)
        + alpha * shifted(kappa)
    )


def g_dkappakappa(alpha: float, beta: float, c: float, kappa: float, tau: float) -> float:
    """Second partial derivative of ``g`` in ``kappa``."""
    gamma, delta = _open_point(alpha, beta, c, kappa, tau)
    big_gamma, big_delta = _weights(alpha, beta, kappa, tau, gamma, delta)
    r = beta / alpha
    return (1.0 - r) ** 2 * big_gamma + r**2 * big_delta - 1.0 / (kappa * (1.0 - kappa))


def g_dkappatau(alpha: float, beta: float, c: float, kappa: float, tau: float) -> float:
    """Mixed second partial derivative of ``g``."""
    gamma, delta = _open_point(alpha, beta, c, kappa, tau)
    big_gamma, big_delta = _weights(alpha, beta, kappa, tau, gamma, delta)
    r = beta / alpha
    a = 1.0 / alpha
    return -(1.0 - r) * (gamma - a) * big_gamma + r * (delta - a) * big_delta


def hessian_det_direct(alpha: float, beta: float, c: float, kappa: float, tau: float) -> float:
    """Hessian determinant ``g_kk * g_tt - g_kt**2`` from the second derivatives."""
    gkk = g_dkappakappa(alpha, beta, c, kappa, tau)
    gtt = g_dtautau(alpha, beta, c, kappa, tau)
    gkt = g_dkappatau(alpha, beta, c, kappa, tau)
    return gkk * gtt - gkt * gkt


def hessian_det(alpha: float, beta: float, c: float, kappa: float, tau: float) -> float:
    """Hessian determinant of ``g`` via its factored closed form (needs ``alpha != beta``).

    The determinant factors as::

        Gamma*Delta / (alpha^2 (1 - kappa))
          * (1 - beta/alpha) (gamma - delta) / (gamma - 1/alpha)
          * (A(gamma) + delta * B(gamma))

    with ``A(x) = -2 + x(1 + alpha + beta) - alpha*beta*x^2`` and
    ``B(x) = x*alpha*(beta - 2) + 1 + alpha - beta``.
    """
    if alpha == beta:
        raise DomainError("the factored Hessian form needs alpha != beta")
    gamma, delta = _open_point(alpha, beta, c, kappa, tau)
    big_gamma, big_delta = _weights(alpha, beta, kappa, tau, gamma, delta)
    a = 1.0 / alpha
    poly_a = -2.0 + gamma * (1.0 + alpha + beta) - alpha * beta * gamma**2
    poly_b = gamma * alpha * (beta - 2.0) + 1.0 + alpha - beta
    sign_factor = (1.0 - beta / alpha) * (gamma - delta) / (gamma - a)
    return big_gamma * big_delta / (alpha**2 * (1.0 - kappa)) * sign_factor * (poly_a + delta * poly_b)


# ---------------------------------------------------------------------------
# Inner minimization over tau
# ---------------------------------------------------------------------------


class CaseTag(str, Enum):
    """How :func:`g_star` obtained its value."""

    INTERIOR_ROOT = "interior-root"
    BOUNDARY_M = "boundary-M"
    BOUNDARY_ZERO = "boundary-zero"
    CLOSED_FORM_ALPHA_EQ_BETA = "closed-form-alpha-eq-beta"
    CORNER_C1_ALPHA_LT_BETA = "corner-c1-alpha-lt-beta"


@dataclass(frozen=True)
class GStarEval:
    """Minimum of ``g(kappa, .)`` over the feasible tau-range."""

    value: float
    tau_star: float
    case_tag: CaseTag
    bracket_width: float = 0.0
    iterations: int = 0


def is_simple(alpha: float, beta: float, c: float) -> bool:
    """True when the tau-minimizer is a strictly interior root of ``g_dtau``."""
    return beta > 1.0 and alpha != beta and not (c == 1.0 and alpha < beta)


def delta_star(alpha: float, c: float, max_iter: int = 200) -> float:
    """The root ``d`` in ``(0, 1/alpha)`` of ``D(1/alpha || d) = ln(c)/alpha`` (``c > 1``)."""
    if not c > 1.0:
        raise DomainError(f"delta_star needs c > 1, got {c!r}")
    a = 1.0 / alpha
    target = math.log(c) / alpha
    lo, hi = 0.0, a
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            return mid
        # D(a || x) decreases on (0, a): too large means x is still too small.
        if kl_div(a, mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _g_star_alpha_eq_beta(alpha: float, c: float, kappa: float) -> GStarEval:
    root = delta_star(alpha, c)
    if kappa <= root:
        return GStarEval(kappa * math.log(c), 0.0, CaseTag.CLOSED_FORM_ALPHA_EQ_BETA)
    value = kappa * math.log(c) - kl_div(kappa, root)
    tau = (kappa - root) / (1.0 / alpha - root)
    return GStarEval(max(value, 0.0), tau, CaseTag.CLOSED_FORM_ALPHA_EQ_BETA)


def g_star_bisection(
    alpha: float,
    beta: float,
    c: float,
    kappa: float,
    tol: float = 1e-12,
    max_iter: int = 200,
) -> GStarEval:
    """Minimize ``g(kappa, .)`` by bisection on ``g_dtau`` without corner dispatch.

    ``kappa`` must lie strictly inside ``(0, 1/beta)`` and the tau-range must
    be non-degenerate.  If the derivative is already non-negative at the left
    end, the minimizer is the left end itself.  The bracket starts a relative
    ``1e-12`` inside each end of the range and is pushed closer to an end
    whenever the derivative sign there is not yet the one its limit dictates.
    """
    _check_params(alpha, beta, c)
    if not tol > 0.0:
        raise DomainError(f"tol must be positive, got {tol!r}")
    lo_end, hi_end = m_of(alpha, beta, kappa), beta * kappa
    width = hi_end - lo_end
    if not (0.0 < kappa < 1.0 / beta and width > 0.0):
        raise DomainError("bisection needs an interior kappa and a non-degenerate tau-range")

    def deriv(t: float) -> float:
        return g_dtau(alpha, beta, c, kappa, t)

    def shrink_towards(end: float, inward: float, want_positive: bool) -> tuple[float, float]:
        offset = _BRACKET_FRACTION * width
        while True:
            t = end + inward * offset
            d = deriv(t)
            if (d > 0.0) == want_positive or offset <= width * 1e-300 or t == end:
                return t, d
            offset *= 1e-4

    hi, d_hi = shrink_towards(hi_end, -1.0, True)
    if alpha > beta:
        lo, d_lo = shrink_towards(lo_end, 1.0, False)
    else:
        lo = lo_end + _BRACKET_FRACTION * width
        d_lo = deriv(lo)

    if d_lo >= 0.0:
        value = g_value(alpha, beta, c, kappa, lo_end)
        return GStarEval(value, lo_end, CaseTag.BOUNDARY_M, lo - lo_end, 0)
    if d_hi <= 0.0:
        value = g_value(alpha, beta, c, kappa, hi)
        return GStarEval(value, hi, CaseTag.INTERIOR_ROOT, hi_end - hi, 0)

    iterations = 0
    while True:
        # Convexity bounds the distance from the true minimum by width * slope.
        gap = (hi - lo) * max(-d_lo, d_hi)
        mid = 0.5 * (lo + hi)
        if gap <= tol or mid in (lo, hi):
            break
        if iterations >= max_iter:
            raise ConvergenceError(
                "tau bisection did not converge",
                alpha=alpha, beta=beta, c=c, kappa=kappa, lo=lo, hi=hi, gap=gap,
            )
        d_mid = deriv(mid)
        if d_mid < 0.0:
            lo, d_lo = mid, d_mid
        else:
            hi, d_hi = mid, d_mid
        iterations += 1
    g_lo = g_value(alpha, beta, c, kappa, lo)
    g_hi = g_value(alpha, beta, c, kappa, hi)
    tau, value = (lo, g_lo) if g_lo <= g_hi else (hi, g_hi)
    return GStarEval(max(value, 0.0), tau, CaseTag.INTERIOR_ROOT, hi - lo, iterations)


def g_star(
    alpha: float,
    beta: float,
    c: float,
    kappa: float,
    tol: float = 1e-12,
    max_iter: int = 200,
) -> GStarEval:
    """Minimum of ``g(kappa, tau)`` over ``tau`` in ``[M(kappa), beta*kappa]``."""
    _check_params(alpha, beta, c)
    if not tol > 0.0:
        raise DomainError(f"tol must be positive, got {tol!r}")
    kappa = _check_kappa(beta, kappa)
    top = 1.0 / beta
    if kappa == 0.0 or kappa == top:
        return GStarEval(0.0, beta * kappa, CaseTag.BOUNDARY_ZERO)
    if alpha == beta:
        if c == 1.0:
            return GStarEval(0.0, 0.0, CaseTag.CLOSED_FORM_ALPHA_EQ_BETA)
        return _g_star_alpha_eq_beta(alpha, c, kappa)
    if alpha < beta and c == 1.0:
        return GStarEval(0.0, m_of(alpha, beta, kappa), CaseTag.CORNER_C1_ALPHA_LT_BETA)
    if beta == 1.0:
        # alpha > beta = 1 collapses the range to the single point tau = kappa.
        return GStarEval(g_value(alpha, beta, c, kappa, kappa), kappa, CaseTag.BOUNDARY_M)
    return g_star_bisection(alpha, beta, c, kappa, tol=tol, max_iter=max_iter)


# ---------------------------------------------------------------------------
# Outer maximization over kappa
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundResult:
    """The base ``d`` of the optimal running time together with its witness."""

    d: float
    ln_d: float
    kappa_star: float
    active_specs: tuple[OracleSpec, ...]
    eps: float
    iterations: int
    beta: float = field(default=1.0)


def _concave_upper_bound(xs: tuple[float, ...], hs: tuple[float, ...]) -> float:
    """Upper bound on the maximum of a concave function sampled at four ordered points."""
    a, x1, x2, b = xs
    ha, h1, h2, hb = hs

    def line(p: float, hp: float, q: float, hq: float) -> Callable[[float], float]:
        slope = (hq - hp) / (q - p)
        return lambda x: hp + slope * (x - p)

    middle = line(x1, h1, x2, h2)
    bounds = [max(middle(a), h1), max(middle(b), h2)]
    if x1 > a and b > x2:
        left = line(a, ha, x1, h1)
        right = line(x2, h2, b, hb)
        candidates = [x1, x2]
        denom = (h1 - ha) / (x1 - a) - (hb - h2) / (b - x2)
        if denom != 0.0:
            cross = (right(0.0) - left(0.0)) / denom
            if x1 < cross < x2:
                candidates.append(cross)
        bounds.append(max(min(left(x), right(x)) for x in candidates))
    else:
        bounds.append(max(h1, h2))
    return max(bounds)


def golden_section_max(
    h: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float,
    floor: float = KAPPA_FLOOR,
    max_iter: int = 500,
) -> tuple[float, float, int]:
    """Maximize a concave ``h`` on ``[lo, hi]``; return ``(argmax, max, iterations)``.

    Stops once a concavity-based upper bound exceeds the best sampled value by
    at most ``tol`` or the bracket is narrower than ``floor``.  Ties go to the
    smaller abscissa.
    """
    a, b = lo, hi
    ha, hb = h(a), h(b)
    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    h1, h2 = h(x1), h(x2)
    iterations = 0
    while True:
        samples = ((a, ha), (x1, h1), (x2, h2), (b, hb))
        best_x, best_h = samples[0]
        for x, v in samples[1:]:
            if v > best_h:
                best_x, best_h = x, v
        gap = _concave_upper_bound((a, x1, x2, b), (ha, h1, h2, hb)) - best_h
        if gap <= tol or b - a <= floor:
            return best_x, best_h, iterations
        if iterations >= max_iter:
            raise ConvergenceError("golden-section search did not converge", lo=a, hi=b, gap=gap)
        if h1 >= h2:
            b, hb = x2, h2
            x2, h2 = x1, h1
            x1 = b - _INV_PHI * (b - a)
            h1 = h(x1)
        else:
            a, ha = x1, h1
            x1, h1 = x2, h2
            x2 = a + _INV_PHI * (b - a)
            h2 = h(x2)
        iterations += 1


def amlsbound(
    specs: Union[SpecList, SpecLike, Iterable[SpecLike]],
    beta: float,
    eps: float = 1e-6,
) -> BoundResult:
    """Optimal base ``d = exp(max_kappa min_specs g*(kappa))`` to additive precision ``eps``."""
    specs = SpecList.of(specs)
    if not (math.isfinite(beta) and beta >= 1.0):
        raise DomainError(f"beta must be a finite number >= 1, got {beta!r}")
    if not (math.isfinite(eps) and eps > 0.0):
        raise DomainError(f"eps must be positive, got {eps!r}")
    # d <= 2, so a log-domain error of eps/2 is at most eps on d.
    inner_tol = eps / 4.0

    def h(kappa: float) -> float:
        return min(g_star(s.alpha, beta, s.c, kappa, tol=inner_tol).value for s in specs)

    kappa_star, ln_d, iterations = golden_section_max(h, 0.0, 1.0 / beta, eps / 2.0)
    values = [g_star(s.alpha, beta, s.c, kappa_star, tol=inner_tol).value for s in specs]
    lowest = min(values)
    active = tuple(s for s, v in zip(specs, values) if v <= lowest + 10.0 * eps)
    return BoundResult(
        d=math.exp(ln_d),
        ln_d=ln_d,
        kappa_star=kappa_star,
        active_specs=active,
        eps=eps,
        iterations=iterations,
        beta=beta,
    )


# ---------------------------------------------------------------------------
# Benchmarks
# ---------------------------------------------------------------------------


def esaamlsbound(beta: float, c: float, precision: float = 1e-10, max_iter: int = 200) -> float:
    """Base of the earlier algorithm for ``alpha = beta``.

    The unique ``d`` in ``(1, 1 + (c-1)/beta)`` with
    ``D(1/beta || (d-1)/(c-1)) = ln(c)/beta``, found by bisection on ``d``.
    """
    if not (math.isfinite(beta) and beta > 1.0):
        raise DomainError(f"esaamlsbound needs beta > 1, got {beta!r}")
    if not (math.isfinite(c) and c > 1.0):
        raise DomainError(f"esaamlsbound needs c > 1, got {c!r}")
    a = 1.0 / beta
    target = math.log(c) / beta
    lo = 1.0 + 1e-15
    hi = 1.0 + (c - 1.0) / beta * (1.0 - 1e-15)

    def excess(d: float) -> float:
        return kl_div(a, min((d - 1.0) / (c - 1.0), a)) - target

    if excess(lo) <= 0.0 or excess(hi) >= 0.0:
        raise ConvergenceError("esaamlsbound root is not bracketed", beta=beta, c=c)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= precision or mid in (lo, hi):
            return mid
        if excess(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    raise ConvergenceError("esaamlsbound bisection did not converge", beta=beta, c=c, lo=lo, hi=hi)


def brute_bound(beta: float) -> float:
    """Base of the membership-only brute-force approximation, ``1 + exp(-beta H(1/beta))``."""
    if not (math.isfinite(beta) and beta >= 1.0):
        raise DomainError(f"beta must be a finite number >= 1, got {beta!r}")
    return 1.0 + math.exp(-beta * entropy(1.0 / beta))


def xi(beta: float, kappa: float) -> float:
    """Exponent of the brute-force sample count, ``-beta H(1/beta) kappa + H(kappa)``."""
    if not (math.isfinite(beta) and beta >= 1.0):
        raise DomainError(f"beta must be a finite number >= 1, got {beta!r}")
    kappa = _check_kappa(beta, kappa)
    return -beta * entropy(1.0 / beta) * kappa + entropy(kappa)


# ---------------------------------------------------------------------------
# Two-variable formulation (slow cross-check)
# ---------------------------------------------------------------------------


def g_tilde(c: float, kappa: float, tau: float, y: float) -> float:
    """Cost exponent when ``y`` (relative overlap with the optimum) is a free parameter."""
    value = (kappa - y) * math.log(c) + entropy(kappa)
    if tau > 0.0:
        value -= tau * entropy(_clip_unit(y / tau, "y/tau"))
    if tau < 1.0:
        value -= (1.0 - tau) * entropy(_clip_unit((kappa - y) / (1.0 - tau), "(kappa-y)/(1-tau)"))
    return value


def _entropy_array(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -x * np.log(x) - (1.0 - x) * np.log1p(-x)
    return np.where((x == 0.0) | (x == 1.0), 0.0, out)


def _g_tilde_grid(c, kappa, tau, y):
    with np.errstate(divide="ignore", invalid="ignore"):
        inside = np.where(tau > 0.0, y / np.where(tau > 0.0, tau, 1.0), 0.0)
        outside = np.where(tau < 1.0, (kappa - y) / np.where(tau < 1.0, 1.0 - tau, 1.0), 0.0)
    return (
        (kappa - y) * math.log(c)
        - tau * _entropy_array(inside)
        - (1.0 - tau) * _entropy_array(outside)
        + entropy(kappa)
    )


@dataclass(frozen=True)
class AltMinimum:
    value: float
    tau: float
    y: float


def g_star_alt_argmin(
    alpha: float,
    beta: float,
    c: float,
    kappa: float,
    grid: float = 1e-3,
    refinements: int = 3,
) -> AltMinimum:
    """Grid minimum of :func:`g_tilde` over its feasible set, with local refinement.

    The feasible set holds the pairs with ``0 <= tau <= beta*kappa`` and
    ``max(0, (1 - beta/alpha) kappa + tau/alpha) <= y <= min(kappa, tau)``.
    Each refinement re-grids a window of two cells around the incumbent at a
    ten times finer step.
    """
    _check_params(alpha, beta, c)
    if not alpha <= beta:
        raise DomainError("the two-variable formulation needs alpha <= beta")
    if not c > 1.0:
        raise DomainError("the two-variable formulation needs c > 1")
    if not 0.0 < kappa < 1.0 / beta:
        raise DomainError(f"kappa must lie in (0, 1/beta), got {kappa!r}")
    if not grid > 0.0:
        raise DomainError(f"grid must be positive, got {grid!r}")

    def y_limits(taus: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        y_lo = np.maximum(0.0, (1.0 - beta / alpha) * kappa + taus / alpha)
        y_hi = np.minimum(kappa, taus)
        return y_lo, np.maximum(y_hi, y_lo)

    def search(t_lo: float, t_hi: float, s_lo: float, s_hi: float, step: float) -> tuple[AltMinimum, float]:
        # y is parametrized by its relative position s in the feasible interval,
        # so every grid node is feasible and both interval ends are sampled.
        taus = np.linspace(t_lo, t_hi, max(2, int(math.ceil((t_hi - t_lo) / step)) + 1))
        s_step = step / kappa
        shares = np.linspace(s_lo, s_hi, max(2, int(math.ceil((s_hi - s_lo) / s_step)) + 1))
        y_lo, y_hi = y_limits(taus)
        tt = taus[:, None]
        yy = y_lo[:, None] + shares[None, :] * (y_hi - y_lo)[:, None]
        vals = _g_tilde_grid(c, kappa, tt, yy)
        i, j = np.unravel_index(int(np.argmin(vals)), vals.shape)
        return AltMinimum(float(vals[i, j]), float(taus[i]), float(yy[i, j])), float(shares[j])

    top = beta * kappa
    best, share = search(0.0, top, 0.0, 1.0, grid)
    step = grid
    for _ in range(refinements):
        window = 2.0 * step
        step /= 10.0
        candidate, cand_share = search(
            max(0.0, best.tau - window),
            min(top, best.tau + window),
            max(0.0, share - window / kappa),
            min(1.0, share + window / kappa),
            step,
        )
        if candidate.value < best.value:
            best, share = candidate, cand_share
    return best


def g_star_alt(
    alpha: float,
    beta: float,
    c: float,
    kappa: float,
    grid: float = 1e-3,
) -> float:
    """Independent slow estimate of ``g*(kappa)`` from the two-variable formulation."""
    return g_star_alt_argmin(alpha, beta, c, kappa, grid=grid).value
