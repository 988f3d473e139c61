"""Convergence sweeps on growing ``n`` and the x**2 approximation example.

Convergence is judged by finite-``n`` ratios and trends, never by limits.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from ._parallel import ordered_map
from .operator import DEFAULT_MODE, NormalizationMode, OperatorConfig, TargetFunction, evaluate_grid
from .pq_core import PQParams, log_pq_integer, pq_integer

# errors below this are rounding noise; a sweep that starts there has converged
NOISE_FLOOR = 1e-12


class ScheduleError(ValueError):
    """A parameter schedule breaks one of the convergence hypotheses."""


class TrendError(RuntimeError):
    """A sweep's error trend reversed."""


class SweepError(RuntimeError):
    """Evaluation failed inside one row of a sweep."""


@dataclass(frozen=True)
class SequenceSchedule:
    p_of_n: Callable[[int], float]
    q_of_n: Callable[[int], float]
    b_of_n: Callable[[int], float]
    label: str = "custom"

    def values(self, n: int) -> tuple[float, float, float]:
        return float(self.p_of_n(n)), float(self.q_of_n(n)), float(self.b_of_n(n))

    def config(self, n: int, template: "ConfigTemplate") -> OperatorConfig:
        p, q, b = self.values(n)
        return OperatorConfig(n=n, m=template.m, alpha=template.alpha, beta=template.beta, b_n=b, params=PQParams(p, q))


@dataclass(frozen=True)
class ConfigTemplate:
    """The n-independent part of an operator configuration."""

    m: int = 0
    alpha: int = 0
    beta: int = 0


def default_schedule() -> SequenceSchedule:
    """``p_n = 1 - 1/(n+1)**2``, ``q_n = 1 - 2/(n+1)**2``, ``b_n = log(n+1)**2 + 1``.

    Both ``p_n**n`` and ``q_n**n`` tend to 1, ``[n] ~ n`` and ``b_n/[n] -> 0``.
    """
    return SequenceSchedule(
        p_of_n=lambda n: 1.0 - 1.0 / (n + 1) ** 2,
        q_of_n=lambda n: 1.0 - 2.0 / (n + 1) ** 2,
        b_of_n=lambda n: math.log(n + 1) ** 2 + 1.0,
        label="default",
    )


def _nonincreasing(seq, slack=0.0):
    return all(b <= a * (1 + slack) + 1e-15 for a, b in zip(seq, seq[1:]))


def _nondecreasing(seq):
    return all(b >= a - 1e-15 for a, b in zip(seq, seq[1:]))


def audit_schedule(schedule: SequenceSchedule, n_list, require_vanishing_ratio=False) -> dict:
    """Check the sweep hypotheses numerically over ``n_list``.

    Every limit hypothesis must show up as a monotone trend across the list.
    With ``require_vanishing_ratio`` the stronger ``b_n**2/[n] -> 0`` is
    checked too, on a geometric tail ladder since it only sets in for large n.
    Raises :class:`ScheduleError` naming the first broken hypothesis.
    """
    n_list = list(n_list)
    if n_list != sorted(n_list) or len(set(n_list)) != len(n_list):
        raise ScheduleError("n_list must be strictly ascending")
    ps, qs, bs, brackets = [], [], [], []
    for n in n_list:
        p, q, b = schedule.values(n)
        if not 0 < q < p <= 1:
            raise ScheduleError(f"n={n}: need 0 < q_n < p_n <= 1, got p_n={p}, q_n={q}")
        if not b > 0:
            raise ScheduleError(f"n={n}: need b_n > 0, got {b}")
        ps.append(p)
        qs.append(q)
        bs.append(b)
        brackets.append(pq_integer(n, PQParams(p, q)))
    evidence = {
        "p_n -> 1": [1 - p for p in ps],
        "q_n -> 1": [1 - q for q in qs],
        "p_n^n, q_n^n -> common N": [abs(p**n - q**n) for p, q, n in zip(ps, qs, n_list)],
        "b_n/[n] -> 0": [b / br for b, br in zip(bs, brackets)],
    }
    for name, seq in evidence.items():
        if not _nonincreasing(seq):
            raise ScheduleError(f"hypothesis {name!r} trend reverses over n={n_list}: {seq}")
    if not _nondecreasing(brackets):
        raise ScheduleError(f"hypothesis '[n] -> inf' trend reverses over n={n_list}: {brackets}")
    if not _nondecreasing(bs):
        raise ScheduleError(f"b_n must be nondecreasing, got {bs}")
    if require_vanishing_ratio:
        ladder = [2**j for j in range(10, 19, 2)]
        tail = []
        for n in ladder:
            p, q, b = schedule.values(n)
            tail.append(b * b / math.exp(log_pq_integer(n, PQParams(p, q))))
        if not (_nonincreasing(tail) and tail[-1] < tail[0]):
            raise ScheduleError(f"hypothesis 'b_n^2/[n] -> 0' not evident on n={ladder}: {tail}")
        evidence["b_n^2/[n] -> 0 (tail)"] = tail
    evidence["[n] -> inf"] = brackets
    return evidence


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    p_n: float
    q_n: float
    b_n: float
    bracket_n: float
    weighted_error: float
    sup_error: float


CONVERGENCE_COLUMNS = ("n", "p_n", "q_n", "b_n", "bracket_n", "weighted_error", "sup_error")


@dataclass
class ConvergenceTable:
    kind: str
    function: str
    schedule: str
    rows: list = field(default_factory=list)

    def column(self, name):
        return [getattr(r, name) for r in self.rows]

    def records(self):
        return [asdict(r) for r in self.rows]

    def shrink_ratio(self, column="weighted_error"):
        """Last over first value of ``column``; 0 when both sit at the noise floor."""
        first, last = self.column(column)[0], self.column(column)[-1]
        if max(first, last) <= NOISE_FLOOR:
            return 0.0
        return last / first if first > 0 else math.inf


def _as_target(f):
    return f if isinstance(f, TargetFunction) else TargetFunction(f)


def _errors(f, xs, config, mode):
    return np.abs(evaluate_grid(f, xs, config, mode) - f.values(xs))


def weighted_norm_error(f, config: OperatorConfig, x_max=None, resolution=201, mode=DEFAULT_MODE) -> float:
    """``sup |U f - f| / (1 + x**2)`` on ``[0, x_max]``.

    ``U`` equals the operator on ``[0, b_n]`` and ``f`` beyond, so the grid
    only needs to cover ``[0, min(x_max, b_n)]``.
    """
    f = _as_target(f)
    if x_max is not None and not x_max > 0:
        raise ValueError("x_max must be positive")
    hi = config.b_n if x_max is None else min(float(x_max), config.b_n)
    xs = np.linspace(0.0, hi, resolution)
    return float(np.max(_errors(f, xs, config, mode) / (1 + xs**2)))


def _row(f, n, schedule, template, resolution, x_max, mode):
    config = schedule.config(n, template)
    hi = config.b_n if x_max is None else min(float(x_max), config.b_n)
    xs = np.linspace(0.0, hi, resolution)
    try:
        err = _errors(f, xs, config, mode)
    except Exception as exc:
        raise SweepError(f"sweep row n={n} failed: {exc}") from exc
    return ConvergenceRow(
        n=n,
        p_n=config.p,
        q_n=config.q,
        b_n=config.b_n,
        bracket_n=config.bracket_n,
        weighted_error=float(np.max(err / (1 + xs**2))),
        sup_error=float(np.max(err)),
    )


def korovkin_run(
    f,
    n_list,
    schedule: SequenceSchedule | None = None,
    template: ConfigTemplate = ConfigTemplate(),
    resolution: int = 201,
    x_max=None,
    mode=DEFAULT_MODE,
) -> ConvergenceTable:
    """Weighted-norm errors along ``n_list`` after auditing the schedule."""
    f = _as_target(f)
    schedule = schedule or default_schedule()
    audit_schedule(schedule, n_list)
    rows = ordered_map(lambda n: _row(f, n, schedule, template, resolution, x_max, mode), n_list)
    return ConvergenceTable("korovkin", f.name, schedule.label, rows)


def check_vanishing(f: TargetFunction, upto: float, samples: int = 512):
    c = f.vanishes_beyond
    if c is None or not c > 0:
        raise ValueError(f"{f.name}: vanishes_beyond must be a positive number")
    hi = max(upto, 2 * c)
    ts = np.linspace(c, hi, samples)
    vals = f.values(ts)
    if np.any(vals != 0):
        bad = float(ts[np.argmax(vals != 0)])
        raise ValueError(f"{f.name} does not vanish beyond c={c}: f({bad}) != 0")


def vanishing_function_run(
    f,
    n_list,
    schedule: SequenceSchedule | None = None,
    template: ConfigTemplate = ConfigTemplate(),
    resolution: int = 201,
    mode=DEFAULT_MODE,
) -> ConvergenceTable:
    """Uniform errors on ``[0, b_n]`` for an ``f`` supported in ``[0, c]``."""
    f = _as_target(f)
    schedule = schedule or default_schedule()
    audit_schedule(schedule, n_list, require_vanishing_ratio=True)
    upto = max(schedule.config(n, template).max_node for n in n_list)
    check_vanishing(f, upto)
    rows = ordered_map(lambda n: _row(f, n, schedule, template, resolution, None, mode), n_list)
    return ConvergenceTable("vanishing", f.name, schedule.label, rows)


def check_trend(table: ConvergenceTable, column: str, slack: float = 0.10):
    """Raise :class:`TrendError` unless ``column`` is nonincreasing within ``slack`` and ends below its start."""
    seq = table.column(column)
    for i, (a, b) in enumerate(zip(seq, seq[1:])):
        if b > a * (1 + slack) + NOISE_FLOOR:
            raise TrendError(
                f"{column} rises from {a:.6g} (n={table.rows[i].n}) to {b:.6g} (n={table.rows[i + 1].n})"
            )
    if seq[-1] > seq[0] and seq[-1] > NOISE_FLOOR:
        raise TrendError(f"{column} ends above its start: {seq[0]:.6g} -> {seq[-1]:.6g}")


@dataclass(frozen=True)
class ExampleRow:
    n: int
    x: float
    target: float
    approx: float
    abs_err: float


EXAMPLE_COLUMNS = ("n", "x", "target", "approx", "abs_err")
EXAMPLE_DEGREES = (8, 10)


def example_b_n(n: int, log_base: str = "e") -> float:
    """``(log n)**2``; natural log unless ``log_base == '10'``."""
    if log_base == "e":
        return math.log(n) ** 2
    if log_base == "10":
        return math.log10(n) ** 2
    raise ValueError(f"log_base must be 'e' or '10', got {log_base!r}")


def example_run(
    p: float = 0.95,
    q: float = 0.9,
    mode=NormalizationMode.RAW,
    log_base: str = "e",
    resolution: int = 101,
    degrees=EXAMPLE_DEGREES,
) -> list[ExampleRow]:
    """Approximate ``x**2`` on ``[0, 0.1]`` with ``m = 1``, ``alpha = beta = 0``, ``b_n = (log n)**2``.

    ``p = 0.95, q = 0.9`` are defaults chosen by this package, not part of
    the example. The weights are taken verbatim unless ``mode`` says
    otherwise.
    """
    params = PQParams(p, q)
    f = TargetFunction(lambda t: np.asarray(t, dtype=float) ** 2, name="x2")
    xs = np.linspace(0.0, 0.1, resolution)

    def block(n):
        config = OperatorConfig(n=n, m=1, alpha=0, beta=0, b_n=example_b_n(n, log_base), params=params)
        approx = evaluate_grid(f, xs, config, mode)
        return [ExampleRow(n, float(x), float(x * x), float(a), float(abs(a - x * x))) for x, a in zip(xs, approx)]

    return [row for rows in ordered_map(block, degrees) for row in rows]


def example_sup_errors(rows) -> dict:
    out = {}
    for r in rows:
        out[r.n] = max(out.get(r.n, 0.0), r.abs_err)
    return out
