"""Extension-oracle model, the sampling algorithm, its derandomization and planted test systems.

A monotone set system is given implicitly: every algorithm here only calls
``contains`` on the system (to audit oracle answers) and queries extension
oracles.  An extension oracle receives ``(X, ell)`` and returns ``Y`` with
``X | Y`` in the family; whenever ``X`` has an extension of size ``ell`` the
answer must have size at most ``alpha * ell`` (always for deterministic
oracles, for at least half of the random strings otherwise).  A query with
budget ``ell`` costs ``c ** ell``.
"""

from __future__ import annotations

import csv
import heapq
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from pathlib import Path
from typing import Callable, Iterable, Mapping, Optional, Protocol, Sequence, TextIO, Union

import numpy as np

from .core import DomainError
from .discrete import (
    EXACT_TAIL_MAX_N,
    TailMode,
    ceil_snap,
    f_value,
    floor_snap,
    hypergeom_tail,
    overlap_threshold,
)
from .specs import OracleSpec, SpecLike, SpecList

__all__ = [
    "MAX_REPETITIONS",
    "CostLedger",
    "ExtensionOracleHandle",
    "ExtensionQuery",
    "IntersectionFamily",
    "KTrace",
    "OracleContractError",
    "PlantedInstance",
    "QueryRecord",
    "RunResult",
    "SetSystem",
    "amls_run",
    "det_amls_run",
    "greedy_intersection_family",
    "intersection_family_ratio",
    "make_planted_oracle",
    "make_rng",
    "sample_once",
    "verify_intersection_family",
]

MAX_REPETITIONS = 10**6
MAX_DET_N = 22
LOG_COLUMNS = ("k", "t", "ell", "|X|", "cost")


class OracleContractError(RuntimeError):
    """An oracle answer ``Y`` left ``X | Y`` outside the set system."""


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator (Philox) so that runs are reproducible from a single seed."""
    return np.random.Generator(np.random.Philox(seed))


class SetSystem(Protocol):
    n: int

    def contains(self, subset: frozenset[int]) -> bool: ...


@dataclass(frozen=True)
class PlantedInstance:
    """Sets containing the hidden optimum ``R``, plus every set of size at least ``threshold``.

    ``threshold = floor(beta * |R|) + 1``, so any member that does not contain
    ``R`` is too large to be a ``beta``-approximation.
    """

    n: int
    R: frozenset[int]
    beta: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "R", frozenset(self.R))
        if self.n < 1:
            raise DomainError(f"n must be positive, got {self.n}")
        if any(not 0 <= e < self.n for e in self.R):
            raise DomainError("R must be a subset of range(n)")
        if not self.beta >= 1.0:
            raise DomainError(f"beta must be >= 1, got {self.beta!r}")

    @classmethod
    def random(cls, n: int, k: int, beta: float, rng: np.random.Generator) -> "PlantedInstance":
        if not 0 <= k <= n:
            raise DomainError(f"need 0 <= k <= n, got k={k}, n={n}")
        return cls(n, frozenset(int(e) for e in rng.choice(n, size=k, replace=False)), beta)

    @property
    def k(self) -> int:
        return len(self.R)

    @property
    def threshold(self) -> int:
        return floor_snap(self.beta * self.k) + 1

    @property
    def min_size(self) -> int:
        return min(self.k, self.threshold)

    def contains(self, subset: frozenset[int]) -> bool:
        return self.R <= subset or len(subset) >= self.threshold

    def padding(self, X: frozenset[int]) -> frozenset[int]:
        """Smallest-index elements outside ``X`` that lift ``X`` to the size threshold."""
        need = max(self.threshold - len(X), 0)
        outside = [e for e in range(self.n) if e not in X]
        if need > len(outside):
            return frozenset(outside)
        return frozenset(outside[:need])


@dataclass(frozen=True)
class ExtensionQuery:
    X: frozenset[int]
    ell: int
    randomness: Optional[int] = None


@dataclass(frozen=True)
class ExtensionOracleHandle:
    spec: OracleSpec
    answer: Callable[[ExtensionQuery], frozenset[int]]
    deterministic: bool = True

    def __call__(self, query: ExtensionQuery) -> frozenset[int]:
        return frozenset(self.answer(query))


def make_planted_oracle(
    instance: PlantedInstance,
    spec: OracleSpec,
    adversarial: bool = False,
    failure_prob: float = 0.0,
) -> ExtensionOracleHandle:
    """Extension oracle for a planted instance.

    The honest oracle answers ``R - X`` when that fits the budget and the
    threshold padding otherwise, which makes it valid for every ``alpha``.
    The adversarial oracle pads whenever ``|X| + alpha * ell`` reaches the
    threshold (padding is then short enough) and reveals ``R - X`` only when
    it must.  With ``failure_prob > 0`` the oracle is randomized: for that
    fraction of random strings it ignores the budget and pads.
    """
    if not 0.0 <= failure_prob < 1.0:
        raise DomainError(f"failure_prob must lie in [0, 1), got {failure_prob!r}")
    R, threshold, alpha = instance.R, instance.threshold, spec.alpha

    def exact_answer(X: frozenset[int], ell: int) -> frozenset[int]:
        missing = R - X
        if adversarial and len(X) + alpha * ell >= threshold:
            return instance.padding(X)
        if len(missing) <= ell:
            return missing
        return instance.padding(X)

    def answer(query: ExtensionQuery) -> frozenset[int]:
        if failure_prob > 0.0:
            if query.randomness is None:
                raise DomainError("a randomized oracle needs a random string")
            if make_rng(query.randomness).random() < failure_prob:
                return instance.padding(query.X)
        return exact_answer(query.X, query.ell)

    return ExtensionOracleHandle(spec, answer, deterministic=failure_prob == 0.0)


# ---------------------------------------------------------------------------
# Cost accounting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QueryRecord:
    k: int
    t: int
    ell: int
    x_size: int
    cost: float
    c: float


@dataclass
class CostLedger:
    """Total oracle cost ``sum c**ell`` and an operation count (oracle calls plus samples)."""

    oracle_cost: float = 0.0
    op_count: int = 0
    queries: list[QueryRecord] = field(default_factory=list)
    keep_log: bool = True

    def record_sample(self) -> None:
        self.op_count += 1

    def record_query(self, k: int, t: int, ell: int, x_size: int, c: float) -> None:
        cost = c**ell
        self.oracle_cost += cost
        self.op_count += 1
        if self.keep_log:
            self.queries.append(QueryRecord(k, t, ell, x_size, cost, c))

    def recomputed_cost(self) -> float:
        """Cost summed afresh from the query log, as ``c**ell`` per record, in call order."""
        total = 0.0
        for q in self.queries:
            total += q.c**q.ell
        return total

    def write_log(self, out: Union[str, Path, TextIO], extra: Optional[Mapping[str, object]] = None) -> None:
        """Write the query log as CSV with columns ``k,t,ell,|X|,cost``.

        ``extra`` adds leading constant columns (for example a trial index).
        """
        extra = dict(extra or {})
        if isinstance(out, (str, Path)):
            with open(out, "w", encoding="utf-8", newline="") as fh:
                self.write_log(fh, extra)
            return
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow([*extra.keys(), *LOG_COLUMNS])
        for q in self.queries:
            writer.writerow([*extra.values(), q.k, q.t, q.ell, q.x_size, repr(q.cost)])

    def log_text(self) -> str:
        buf = io.StringIO()
        self.write_log(buf)
        return buf.getvalue()


@dataclass(frozen=True)
class KTrace:
    k: int
    spec: OracleSpec
    t: int
    repetitions: int
    truncated: bool = False


@dataclass(frozen=True)
class RunResult:
    solution: frozenset[int]
    ledger: CostLedger
    k_loop_trace: tuple[KTrace, ...]

    @property
    def size(self) -> int:
        return len(self.solution)


# ---------------------------------------------------------------------------
# Randomized algorithm
# ---------------------------------------------------------------------------


def _query(
    system: SetSystem,
    oracle: ExtensionOracleHandle,
    X: frozenset[int],
    ell: int,
    k: int,
    t: int,
    rng: Optional[np.random.Generator],
    ledger: Optional[CostLedger],
) -> frozenset[int]:
    randomness = None
    if not oracle.deterministic:
        if rng is None:
            raise DomainError("a randomized oracle needs a random generator")
        randomness = int(rng.integers(0, 2**63))
    Y = oracle(ExtensionQuery(X, ell, randomness))
    if ledger is not None:
        ledger.record_query(k, t, ell, len(X), oracle.spec.c)
    Z = X | Y
    if not system.contains(Z):
        raise OracleContractError(f"oracle answer for |X|={len(X)}, ell={ell} is not in the family")
    return Z


def _budget(spec: OracleSpec, beta: float, k: int, t: int) -> int:
    return k - ceil_snap(overlap_threshold(spec.alpha, beta, k, t))


def sample_once(
    system: SetSystem,
    k: int,
    t: int,
    spec: OracleSpec,
    beta: float,
    oracle: ExtensionOracleHandle,
    rng: np.random.Generator,
    ledger: Optional[CostLedger] = None,
) -> frozenset[int]:
    """Draw a uniform ``t``-subset ``X`` and extend it with budget ``k - ceil(x(k, t))``."""
    if not 0 <= t <= system.n:
        raise DomainError(f"need 0 <= t <= n, got t={t}, n={system.n}")
    if k < 0:
        raise DomainError(f"k must be non-negative, got {k}")
    X = frozenset(int(e) for e in rng.choice(system.n, size=t, replace=False))
    if ledger is not None:
        ledger.record_sample()
    return _query(system, oracle, X, _budget(spec, beta, k, t), k, t, rng, ledger)


def _oracle_map(specs: SpecList, oracles) -> dict[OracleSpec, ExtensionOracleHandle]:
    if isinstance(oracles, Mapping):
        mapping = dict(oracles)
    else:
        oracles = list(oracles)
        if len(oracles) != len(specs):
            raise DomainError("need exactly one oracle handle per spec")
        mapping = dict(zip(specs, oracles))
    missing = [s for s in specs if s not in mapping]
    if missing:
        raise DomainError(f"no oracle handle for {missing}")
    return mapping


def _tail_mode(n: int) -> TailMode:
    return TailMode.EXACT if n <= EXACT_TAIL_MAX_N else TailMode.LOG


def _repetitions(n: int, k: int, t: int, x: float) -> int:
    tail = hypergeom_tail(n, k, t, x, mode=_tail_mode(n))
    if tail.exact is not None:
        inverse = Fraction(tail.exact.denominator, tail.exact.numerator)
        return 2 * math.ceil(inverse)
    return 2 * math.ceil(math.exp(-tail.log_value))


def _smallest(solutions: Iterable[frozenset[int]]) -> frozenset[int]:
    best: Optional[frozenset[int]] = None
    for s in solutions:
        if best is None or len(s) < len(best):
            best = s
    assert best is not None
    return best


def amls_run(
    system: SetSystem,
    specs: Union[SpecList, SpecLike, Iterable[SpecLike]],
    beta: float,
    oracles: Union[Mapping[OracleSpec, ExtensionOracleHandle], Sequence[ExtensionOracleHandle]],
    rng: np.random.Generator,
    max_repetitions: int = MAX_REPETITIONS,
    keep_log: bool = True,
) -> RunResult:
    """Randomized approximate monotone local search.

    For every guess ``k`` of the optimum size, pick the spec and sample size
    with the lowest ``c^((beta k - t)/alpha) / p`` and repeat the sampling
    step ``2 ceil(1/p)`` times (capped at ``max_repetitions``, flagged in the
    trace).  Returns the smallest set collected.
    """
    specs = SpecList.of(specs)
    handles = _oracle_map(specs, oracles)
    n = system.n
    plan = f_value(specs, beta, n, mode=_tail_mode(n))
    ledger = CostLedger(keep_log=keep_log)
    trace: list[KTrace] = []
    best: Optional[frozenset[int]] = None
    for rec in plan.per_k:
        x = overlap_threshold(rec.spec.alpha, beta, rec.k, rec.t)
        reps = _repetitions(n, rec.k, rec.t, x)
        truncated = reps > max_repetitions
        reps = min(reps, max_repetitions)
        trace.append(KTrace(rec.k, rec.spec, rec.t, reps, truncated))
        for _ in range(reps):
            Z = sample_once(system, rec.k, rec.t, rec.spec, beta, handles[rec.spec], rng, ledger)
            if best is None or len(Z) < len(best):
                best = Z
    assert best is not None
    return RunResult(best, ledger, tuple(trace))


# ---------------------------------------------------------------------------
# Set-intersection families and the deterministic algorithm
# ---------------------------------------------------------------------------


def intersection_family_ratio(n: int, p: int, q: int, r: int) -> Fraction:
    """``C(n,q) / (C(p,r) C(n-p,q-r))``: the inverse probability that a random ``q``-set meets a fixed ``p``-set in exactly ``r`` elements."""
    hits = math.comb(p, r) * math.comb(n - p, q - r)
    if hits == 0:
        raise DomainError(f"no q-set meets a p-set in exactly r elements for {(n, p, q, r)}")
    return Fraction(math.comb(n, q), hits)


@dataclass(frozen=True)
class IntersectionFamily:
    n: int
    p: int
    q: int
    r: int
    members: tuple[frozenset[int], ...]
    ratio: Fraction

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def greedy_bound(self) -> float:
        """Size guarantee of the greedy cover, ``ratio * (1 + ln C(n, p))``."""
        return float(self.ratio) * (1.0 + math.log(math.comb(self.n, self.p)))


def _check_family_params(n: int, p: int, q: int, r: int) -> None:
    if min(n, p, q, r) < 0 or not (n >= p >= r and n - p + r >= q >= r):
        raise DomainError(f"infeasible set-intersection-family parameters {(n, p, q, r)}")


def _masks(n: int, size: int) -> np.ndarray:
    return np.array([sum(1 << e for e in combo) for combo in combinations(range(n), size)], dtype=np.uint64)


def _members(mask: int, n: int) -> frozenset[int]:
    return frozenset(e for e in range(n) if mask >> e & 1)


@lru_cache(maxsize=256)
def _greedy_family(n: int, p: int, q: int, r: int) -> tuple[frozenset[int], ...]:
    if r == 0:
        return (frozenset(range(q)),)
    candidates = _masks(n, q)
    targets = _masks(n, p)
    uncovered = np.ones(targets.size, dtype=bool)
    remaining = targets.size

    def gain(i: int) -> int:
        overlap = np.bitwise_count(targets & candidates[i])
        return int(np.count_nonzero(uncovered & (overlap >= r)))

    # Lazy greedy: stale gains only ever overestimate, so a popped entry whose
    # refreshed gain still beats the next stale bound is a true maximizer.
    # Heap keys (-gain, index) break ties toward the lexicographically first set.
    start = gain(0)
    heap = [(-start, i) for i in range(candidates.size)]
    heapq.heapify(heap)
    chosen: list[int] = []
    while remaining:
        _, i = heapq.heappop(heap)
        fresh = gain(i)
        if heap and fresh < -heap[0][0] or (heap and fresh == -heap[0][0] and heap[0][1] < i):
            heapq.heappush(heap, (-fresh, i))
            continue
        if fresh == 0:
            raise DomainError(f"greedy cover stalled for {(n, p, q, r)}")
        chosen.append(i)
        hit = np.bitwise_count(targets & candidates[i]) >= r
        remaining -= int(np.count_nonzero(uncovered & hit))
        uncovered &= ~hit
    return tuple(_members(int(candidates[i]), n) for i in chosen)


def greedy_intersection_family(n: int, p: int, q: int, r: int) -> IntersectionFamily:
    """A family of ``q``-subsets such that every ``p``-subset meets some member in ``>= r`` elements.

    Built by greedy set cover over all ``q``-subsets of ``range(n)``; meant for
    ``n <= 22``.
    """
    _check_family_params(n, p, q, r)
    if n > MAX_DET_N:
        raise DomainError(f"greedy families are limited to n <= {MAX_DET_N}, got {n}")
    return IntersectionFamily(n, p, q, r, _greedy_family(n, p, q, r), intersection_family_ratio(n, p, q, r))


def verify_intersection_family(members: Iterable[frozenset[int]], n: int, p: int, r: int) -> bool:
    """Exhaustively check that every ``p``-subset of ``range(n)`` meets some member in ``>= r`` elements."""
    masks = [sum(1 << e for e in m) for m in members]
    for combo in combinations(range(n), p):
        t = sum(1 << e for e in combo)
        if not any((t & m).bit_count() >= r for m in masks):
            return False
    return True


def _best_overlap(n: int, k: int, t: int, x: float) -> int:
    best_y, best = -1, None
    for y in range(max(0, ceil_snap(x)), min(t, k) + 1):
        if math.comb(n - k, t - y) == 0:
            continue
        ratio = intersection_family_ratio(n, k, t, y)
        if best is None or ratio < best:
            best_y, best = y, ratio
    if best_y < 0:
        raise DomainError(f"no admissible overlap for n={n}, k={k}, t={t}")
    return best_y


def det_amls_run(
    system: SetSystem,
    specs: Union[SpecList, SpecLike, Iterable[SpecLike]],
    beta: float,
    oracles: Union[Mapping[OracleSpec, ExtensionOracleHandle], Sequence[ExtensionOracleHandle]],
    keep_log: bool = True,
) -> RunResult:
    """Derandomized search: iterate over a set-intersection family instead of random samples."""
    specs = SpecList.of(specs)
    handles = _oracle_map(specs, oracles)
    if any(not h.deterministic for h in handles.values()):
        raise DomainError("the deterministic algorithm needs deterministic oracles")
    n = system.n
    if n > MAX_DET_N:
        raise DomainError(f"the deterministic algorithm is limited to n <= {MAX_DET_N}, got {n}")
    plan = f_value(specs, beta, n, mode=TailMode.EXACT)
    ledger = CostLedger(keep_log=keep_log)
    trace: list[KTrace] = []
    collected: list[frozenset[int]] = []
    for rec in plan.per_k:
        x = overlap_threshold(rec.spec.alpha, beta, rec.k, rec.t)
        y = _best_overlap(n, rec.k, rec.t, x)
        family = greedy_intersection_family(n, rec.k, rec.t, y)
        trace.append(KTrace(rec.k, rec.spec, rec.t, family.size))
        ell = _budget(rec.spec, beta, rec.k, rec.t)
        for X in family.members:
            collected.append(_query(system, handles[rec.spec], X, ell, rec.k, rec.t, None, ledger))
    return RunResult(_smallest(collected), ledger, tuple(trace))
