"""(p,q) Bernstein-type operator with shifted nodes on the stretched interval ``[0, b_n]``.

For degree ``n``, Schurer shift ``m``, Stancu shifts ``alpha <= beta`` and
scale ``b_n`` the operator samples ``f`` at the ``n + m + 1`` nodes

    t_k = (p**(n-k) [k] + alpha) / ([n] + beta) * b_n

with weights

    w_k(x) = p**(-n(n-1)/2) [n+m, k] p**(k(k-1)/2) (x/b_n)**k
             * prod_{s < n+m-k} (p**s - q**s x/b_n).

Taken verbatim these weights sum to ``p**(m n + m(m-1)/2)``, which is 1 only for
``m == 0``. :attr:`NormalizationMode.SUM_NORMALIZED` (the default) divides by
the measured sum; :attr:`NormalizationMode.RAW` keeps them verbatim.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from .pq_core import PQDomainError, PQParams, log_pq_binomial, pq_integer


class NormalizationMode(enum.Enum):
    RAW = "raw"
    SUM_NORMALIZED = "normalized"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        for mode in cls:
            if value in (mode.value, mode.name):
                return mode
        raise ValueError(f"unknown normalization mode {value!r}; use 'raw' or 'normalized'")


DEFAULT_MODE = NormalizationMode.SUM_NORMALIZED


class DegenerateBasisError(ArithmeticError):
    """The raw weights underflowed to a zero sum."""


class EvaluationError(RuntimeError):
    """The target function failed at one of the operator nodes."""

    def __init__(self, index, node, cause):
        self.index = index
        self.node = node
        self.cause = cause
        super().__init__(f"target function failed at node k={index} (t={node!r}): {cause}")


@dataclass(frozen=True)
class OperatorConfig:
    n: int
    m: int
    alpha: int
    beta: int
    b_n: float
    params: PQParams

    def __post_init__(self):
        for name in ("n", "m", "alpha", "beta"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value:
                raise PQDomainError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.n < 1:
            raise PQDomainError(f"require n >= 1, got n={self.n}")
        if self.m < 0:
            raise PQDomainError(f"require m >= 0, got m={self.m}")
        if not 0 <= self.alpha <= self.beta:
            raise PQDomainError(
                f"require 0 <= alpha <= beta, got alpha={self.alpha}, beta={self.beta}"
            )
        b_n = float(self.b_n)
        if not (math.isfinite(b_n) and b_n > 0):
            raise PQDomainError(f"require b_n > 0, got b_n={self.b_n!r}")
        object.__setattr__(self, "b_n", b_n)

    @classmethod
    def build(cls, n, p, q, m=0, alpha=0, beta=0, b_n=1.0):
        return cls(n=n, m=m, alpha=alpha, beta=beta, b_n=b_n, params=PQParams(p, q))

    @property
    def p(self) -> float:
        return self.params.p

    @property
    def q(self) -> float:
        return self.params.q

    @property
    def size(self) -> int:
        """Number of nodes, ``n + m + 1``."""
        return self.n + self.m + 1

    @cached_property
    def bracket_n(self) -> float:
        return pq_integer(self.n, self.params)

    @cached_property
    def denominator(self) -> float:
        return self.bracket_n + self.beta

    @cached_property
    def _log_binomials(self) -> np.ndarray:
        N = self.n + self.m
        return np.array([log_pq_binomial(N, k, self.params) for k in range(N + 1)])

    @cached_property
    def _p_exponents(self) -> np.ndarray:
        # p**(-n(n-1)/2) * p**(k(k-1)/2) * prod_s p**s, collected as one integer power
        n, N = self.n, self.n + self.m
        k = np.arange(N + 1)
        return -n * (n - 1) // 2 + k * (k - 1) // 2 + (N - k) * (N - k - 1) // 2

    @cached_property
    def nodes(self) -> np.ndarray:
        out = np.array([node(k, self) for k in range(self.size)])
        out.setflags(write=False)
        return out

    @property
    def max_node(self) -> float:
        return float(self.nodes.max())

    @property
    def raw_weight_sum(self) -> float:
        """Closed form of the verbatim weight sum, ``p**(m n + m(m-1)/2)``."""
        m, n = self.m, self.n
        return self.p ** (m * n + m * (m - 1) // 2)


@dataclass(frozen=True)
class TargetFunction:
    """A scalar function with optional smoothness metadata.

    ``func`` should accept numpy arrays; scalar-only callables still work
    through :meth:`values` at some cost.
    """

    func: Callable
    name: str = "f"
    lipschitz: Optional[tuple] = None  # (M, gamma)
    derivative_bound: Optional[float] = None
    derivative: Optional[Callable] = None
    vanishes_beyond: Optional[float] = None
    domain: tuple = (0.0, math.inf)

    def __post_init__(self):
        if self.lipschitz is not None:
            M, gamma = self.lipschitz
            if not (M > 0 and 0 < gamma <= 1):
                raise ValueError(f"Lipschitz metadata needs M > 0, 0 < gamma <= 1, got {self.lipschitz}")
        if self.derivative_bound is not None and not self.derivative_bound > 0:
            raise ValueError("derivative_bound must be positive")

    def __call__(self, t):
        return self.func(t)

    def values(self, ts) -> np.ndarray:
        """Evaluate at each point of ``ts``, naming the first failing index."""
        ts = np.asarray(ts, dtype=float)
        try:
            out = np.asarray(self.func(ts), dtype=float)
            if out.shape != ts.shape:
                out = np.broadcast_to(out, ts.shape).astype(float)
            if np.all(np.isfinite(out)):
                return out
        except Exception:
            pass
        out = np.empty_like(ts)
        for i, t in enumerate(ts):
            try:
                v = float(self.func(float(t)))
            except Exception as exc:
                raise EvaluationError(i, float(t), exc) from exc
            if not math.isfinite(v):
                raise EvaluationError(i, float(t), ValueError(f"non-finite value {v!r}"))
            out[i] = v
        return out

    def diff(self, ts, step=1e-6) -> np.ndarray:
        """Derivative values: analytic when registered, else central differences."""
        ts = np.asarray(ts, dtype=float)
        if self.derivative is not None:
            return np.broadcast_to(np.asarray(self.derivative(ts), dtype=float), ts.shape)
        return (self.values(ts + step) - self.values(ts - step)) / (2 * step)


@dataclass(frozen=True)
class BasisExpansion:
    x: float
    weights: np.ndarray
    nodes: np.ndarray
    raw_sum: float
    mode: NormalizationMode = field(default=DEFAULT_MODE)


def node(k: int, config: OperatorConfig) -> float:
    """Sampling point ``t_k``; exceeds ``b_n`` for some ``k > n`` when ``m > 0``."""
    if not 0 <= k <= config.n + config.m:
        raise PQDomainError(f"require 0 <= k <= n+m, got k={k}")
    p = config.p
    return (p ** (config.n - k) * pq_integer(k, config.params) + config.alpha) / config.denominator * config.b_n


def _check_x(xs, config):
    xs = np.asarray(xs, dtype=float)
    if np.any(~np.isfinite(xs)) or np.any(xs < 0) or np.any(xs > config.b_n):
        raise PQDomainError(f"x must lie in [0, b_n] = [0, {config.b_n!r}]")
    return xs


def log_weight_matrix(xs, config: OperatorConfig) -> np.ndarray:
    """Natural log of the verbatim weights, shape ``(len(xs), n+m+1)``.

    Exact zeros (forced by ``x == 0`` or ``x == b_n``) come out as ``-inf``.
    """
    xs = np.atleast_1d(_check_x(xs, config))
    N = config.n + config.m
    t = xs / config.b_n
    k = np.arange(N + 1)
    lp = math.log(config.p)
    lr = math.log(config.q / config.p)

    with np.errstate(divide="ignore", invalid="ignore"):
        # k log t with 0 * log 0 = 0
        log_t = np.log(t)[:, None]
        power = np.where(k[None, :] == 0, 0.0, k[None, :] * log_t)
        # log1p(-(q/p)**s t) for s < N, then prefix sums over s
        s = np.arange(N)
        factors = np.log1p(-np.exp(s * lr)[None, :] * t[:, None])
    prefix = np.zeros((len(xs), N + 1))
    if N:
        prefix[:, 1:] = np.cumsum(factors, axis=1)
    falling = prefix[:, N - k]
    return config._p_exponents[None, :] * lp + config._log_binomials[None, :] + power + falling


def raw_weight(k: int, x: float, config: OperatorConfig) -> float:
    if not 0 <= k <= config.n + config.m:
        raise PQDomainError(f"require 0 <= k <= n+m, got k={k}")
    return float(np.exp(log_weight_matrix([x], config)[0, k]))


def weight_matrix(xs, config: OperatorConfig, mode=DEFAULT_MODE):
    """Weights for every ``x`` in ``xs`` plus the raw sum per row.

    Returns ``(weights, raw_sums)`` where ``weights`` has shape
    ``(len(xs), n+m+1)``.
    """
    mode = NormalizationMode.parse(mode)
    logw = log_weight_matrix(xs, config)
    top = logw.max(axis=1)
    if np.any(~np.isfinite(top)):
        bad = float(np.atleast_1d(xs)[np.argmax(~np.isfinite(top))])
        raise DegenerateBasisError(f"all weights vanish at x={bad!r}")
    scaled = np.exp(logw - top[:, None])
    sums = np.array([math.fsum(row) for row in scaled])
    raw_sums = sums * np.exp(top)
    if np.any(raw_sums == 0) or np.any(~np.isfinite(raw_sums)):
        raise DegenerateBasisError("raw weight sum left the double range")
    if mode is NormalizationMode.SUM_NORMALIZED:
        weights = scaled / sums[:, None]
    else:
        weights = scaled * np.exp(top)[:, None]
    return weights, raw_sums


def basis(x: float, config: OperatorConfig, mode=DEFAULT_MODE) -> BasisExpansion:
    mode = NormalizationMode.parse(mode)
    weights, raw_sums = weight_matrix([x], config, mode)
    w = weights[0]
    w.setflags(write=False)
    return BasisExpansion(x=float(x), weights=w, nodes=config.nodes, raw_sum=float(raw_sums[0]), mode=mode)


def _as_target(f):
    return f if isinstance(f, TargetFunction) else TargetFunction(f)


def _node_values(f, config):
    f = _as_target(f)
    hi = f.domain[1]
    if config.max_node > hi:
        raise EvaluationError(
            int(np.argmax(config.nodes)),
            config.max_node,
            ValueError(f"node exceeds the declared domain upper end {hi!r}"),
        )
    return f.values(config.nodes)


def evaluate_grid(f, xs, config: OperatorConfig, mode=DEFAULT_MODE) -> np.ndarray:
    """Operator values at every ``x`` in ``xs`` (compensated sum over ascending k)."""
    fv = _node_values(f, config)
    weights, _ = weight_matrix(xs, config, mode)
    return np.array([math.fsum(row) for row in weights * fv[None, :]])


def evaluate(f, x: float, config: OperatorConfig, mode=DEFAULT_MODE) -> float:
    return float(evaluate_grid(f, [x], config, mode)[0])


def classical_stancu_chlodowsky(f, x: float, n: int, alpha=0, beta=0, b_n=1.0) -> float:
    """The ``p, q -> 1``, ``m = 0`` comparator with ordinary binomials."""
    if not 0 <= x <= b_n:
        raise PQDomainError(f"x must lie in [0, b_n] = [0, {b_n!r}]")
    f = _as_target(f)
    t = x / b_n
    nodes = np.array([(k + alpha) / (n + beta) * b_n for k in range(n + 1)])
    fv = f.values(nodes)
    return math.fsum(math.comb(n, k) * t**k * (1 - t) ** (n - k) * fv[k] for k in range(n + 1))
