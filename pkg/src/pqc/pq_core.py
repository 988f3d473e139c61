"""(p,q)-calculus primitives.

Integers, factorials and binomial coefficients in two bases ``0 < q < p <= 1``,
plus the product ``prod_{s<N} (p**s - q**s * t)`` that drives the operator
weights. Every quantity has a log-domain companion because products of
(p,q)-integers underflow quickly for small ``p``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

# Binomials with n above this go through summed log-factorials.
BINOMIAL_LOG_CROSSOVER = 40

DEFAULT_SEPARATION = 1e-12


class PQDomainError(ValueError):
    """Raised when (p,q) or an index violates its domain."""


@dataclass(frozen=True)
class PQParams:
    """The calculus bases.

    ``p == q`` is accepted as the analytic limit of the summed integer form,
    so ``PQParams(1.0, 1.0)`` gives the classical integers.
    """

    p: float
    q: float
    separation: float = DEFAULT_SEPARATION

    def __post_init__(self):
        p, q = float(self.p), float(self.q)
        if not (math.isfinite(p) and math.isfinite(q)):
            raise PQDomainError(f"p and q must be finite, got p={p!r}, q={q!r}")
        if not 0.0 < q:
            raise PQDomainError(f"require 0 < q, got q={q!r}")
        if not p <= 1.0:
            raise PQDomainError(f"require p <= 1, got p={p!r}")
        if q > p:
            raise PQDomainError(f"require q < p, got q={q!r} >= p={p!r}")
        if q != p and p - q < self.separation:
            raise PQDomainError(
                f"require p - q >= {self.separation:g} (or p == q for the limit), "
                f"got p - q = {p - q:g}"
            )
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def is_limit(self) -> bool:
        return self.p == self.q


def _check_index(n, name="n"):
    if isinstance(n, bool) or int(n) != n:
        raise PQDomainError(f"{name} must be an integer, got {n!r}")
    n = int(n)
    if n < 0:
        raise PQDomainError(f"{name} must be >= 0, got {n}")
    return n


def pq_integer(n: int, params: PQParams) -> float:
    """``[n] = sum_{i<n} p**(n-1-i) * q**i``.

    The summed form avoids the cancellation in ``(p**n - q**n)/(p - q)``
    when ``p`` and ``q`` are close.
    """
    n = _check_index(n)
    p, q = params.p, params.q
    return math.fsum(p ** (n - 1 - i) * q**i for i in range(n))


def log_pq_integer(n: int, params: PQParams) -> float:
    """Natural log of ``[n]``; ``-inf`` for ``n == 0``."""
    n = _check_index(n)
    if n == 0:
        return -math.inf
    # [n] = p**(n-1) * sum_i r**i with r = q/p <= 1
    p, q = params.p, params.q
    r = q / p
    if r == 1.0:
        return (n - 1) * math.log(p) + math.log(n)
    geometric = -math.expm1(n * math.log(r)) / -math.expm1(math.log(r))
    return (n - 1) * math.log(p) + math.log(geometric)


def pq_factorial(n: int, params: PQParams) -> float:
    """``[n]! = [1][2]...[n]`` with ``[0]! = 1``.

    Raises OverflowError if the product leaves the double range; use
    :func:`log_pq_factorial` in that case.
    """
    n = _check_index(n)
    result = 1.0
    for j in range(1, n + 1):
        result *= pq_integer(j, params)
    if not math.isfinite(result) or (n > 0 and result == 0.0):
        raise OverflowError(f"[{n}]! leaves the double range; use log_pq_factorial")
    return result


def log_pq_factorial(n: int, params: PQParams) -> float:
    n = _check_index(n)
    return math.fsum(log_pq_integer(j, params) for j in range(1, n + 1))


def log_pq_binomial(n: int, k: int, params: PQParams) -> float:
    n = _check_index(n)
    k = _check_index(k, "k")
    if k > n:
        raise PQDomainError(f"require k <= n, got k={k}, n={n}")
    # Symmetric by construction: always sum over the shorter side.
    k = min(k, n - k)
    return math.fsum(
        log_pq_integer(n - j, params) - log_pq_integer(j + 1, params) for j in range(k)
    )


def pq_binomial(n: int, k: int, params: PQParams) -> float:
    """(p,q)-binomial coefficient ``[n]!/([k]! [n-k]!)``."""
    n = _check_index(n)
    k = _check_index(k, "k")
    if k > n:
        raise PQDomainError(f"require k <= n, got k={k}, n={n}")
    k = min(k, n - k)
    if n > BINOMIAL_LOG_CROSSOVER:
        return math.exp(log_pq_binomial(n, k, params))
    num = 1.0
    den = 1.0
    for j in range(k):
        num *= pq_integer(n - j, params)
        den *= pq_integer(j + 1, params)
    return num / den


def _check_t(t):
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise PQDomainError(f"t must lie in [0, 1], got {t!r}")
    return t


def falling_product(t: float, N: int, params: PQParams) -> float:
    """``prod_{s<N} (p**s - q**s * t)``; 1 for ``N == 0``, 0 at ``t == 1``."""
    t = _check_t(t)
    N = _check_index(N, "N")
    p, q = params.p, params.q
    result = 1.0
    for s in range(N):
        result *= p**s - q**s * t
    return result


def log_falling_product(t: float, N: int, params: PQParams) -> tuple[float, bool]:
    """Log of :func:`falling_product` as ``(log_magnitude, is_zero)``.

    Each factor is written ``p**s * (1 - (q/p)**s * t)`` and the second part
    goes through ``log1p``, which keeps full relative accuracy when ``p ~ q``
    and ``t`` is small. A zero factor only happens for ``s == 0, t == 1``.
    """
    t = _check_t(t)
    N = _check_index(N, "N")
    if N == 0:
        return 0.0, False
    if t == 1.0:
        return -math.inf, True
    lp = math.log(params.p)
    lr = math.log(params.q / params.p)
    terms = [s * lp + math.log1p(-math.exp(s * lr) * t) for s in range(N)]
    return math.fsum(terms), False
