"""Error bounds in terms of the second central moment.

Three bounds are checked against the measured error ``|C f(x) - f(x)|``:

* ``lipschitz``: ``M * lam(x)**(gamma/2)`` for ``f`` in ``Lip_M(gamma)``;
* ``modulus``: ``2 * omega(f, sqrt(lam(x)))``;
* ``derivative_modulus``: a first-moment term plus
  ``2 sqrt(B) * omega(f', sqrt(B))``.

Here ``lam`` is the second central moment and ``omega`` the modulus of
continuity, estimated on an equispaced grid.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import maximum_filter1d, minimum_filter1d

from .moments import brute_force_central, central2_closed, central2_envelope
from .operator import DEFAULT_MODE, OperatorConfig, TargetFunction, evaluate_grid
from .pq_core import pq_integer

DEFAULT_RESOLUTION = 2001
BOUND_TOLERANCE = 1e-12


class Theorem(enum.Enum):
    LIPSCHITZ = "T1"
    MODULUS = "T2"
    DERIVATIVE_MODULUS = "T3"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        for t in cls:
            if str(value).upper() in (t.value, t.name):
                return t
        raise ValueError(f"unknown theorem {value!r}; use T1, T2 or T3")


class MissingMetadataError(ValueError):
    """The target function lacks the smoothness data a bound needs."""


@dataclass(frozen=True)
class BoundReport:
    x: float
    empirical_error: float
    bound: float
    theorem: Theorem
    satisfied: bool


def _grid_values(f, lo, hi, resolution):
    grid = np.linspace(lo, hi, resolution)
    return TargetFunction.values(f, grid) if isinstance(f, TargetFunction) else np.asarray(f(grid), dtype=float)


def modulus_from_values(values: np.ndarray, step: float, delta: float) -> float:
    """Largest ``|f(t) - f(x)|`` over grid pairs at most ``delta`` apart."""
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    # guard against delta/step landing a hair below an integer
    lag = int(math.floor(delta / step * (1 + 1e-12) + 1e-12))
    lag = min(lag, len(values) - 1)
    if lag <= 0:
        return 0.0
    size = lag + 1
    hi = maximum_filter1d(values, size, mode="nearest")
    lo = minimum_filter1d(values, size, mode="nearest")
    # keep only centres whose window lies fully inside the grid
    start = size // 2
    stop = len(values) - size + size // 2 + 1
    return float(np.max(hi[start:stop] - lo[start:stop]))


def modulus_of_continuity(f, delta: float, interval, resolution: int = DEFAULT_RESOLUTION) -> float:
    """Grid estimate of ``max |f(t) - f(x)|`` over ``|t - x| <= delta``.

    A lower estimate of the true modulus; nondecreasing in ``delta``.
    """
    lo, hi = map(float, interval)
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    values = _grid_values(f, lo, hi, resolution)
    return modulus_from_values(values, (hi - lo) / (resolution - 1), delta)


def second_central_moment(x, config: OperatorConfig, mode=DEFAULT_MODE):
    """Measured ``C((t - x)**2; x)``, clipped at 0 against rounding."""
    value = brute_force_central(2, x, config, mode)
    return np.maximum(value, 0.0) if np.ndim(value) else max(value, 0.0)


def second_central_moment_closed(x, config: OperatorConfig):
    return central2_closed(x, config)


def lipschitz_bound(M: float, gamma: float, x, config: OperatorConfig, mode=DEFAULT_MODE):
    if not (M > 0 and 0 < gamma <= 1):
        raise ValueError(f"need M > 0 and 0 < gamma <= 1, got M={M}, gamma={gamma}")
    return M * np.power(second_central_moment(x, config, mode), gamma / 2)


def _domain_hi(config):
    return max(config.max_node, config.b_n)


def modulus_bound(f, x, config: OperatorConfig, resolution: int = DEFAULT_RESOLUTION, mode=DEFAULT_MODE):
    """``2 * omega(f, sqrt(lam(x)))`` with ``omega`` taken on ``[0, max node]``."""
    lo, hi = 0.0, _domain_hi(config)
    values = _grid_values(f, lo, hi, resolution)
    step = (hi - lo) / (resolution - 1)
    lam = np.atleast_1d(second_central_moment(np.atleast_1d(x), config, mode))
    out = np.array([2 * modulus_from_values(values, step, math.sqrt(v)) for v in lam])
    return out if np.ndim(x) else float(out[0])


def central_moment_envelope(A: float, config: OperatorConfig) -> float:
    """The second-central-moment envelope evaluated at ``x = A``.

    Can be negative when ``alpha > 0`` and ``m > 0``; callers that take a
    square root clip it at 0.
    """
    if not A > 0:
        raise ValueError("A must be positive")
    return float(central2_envelope(A, config))


def first_moment_term(M: float, A: float, config: OperatorConfig) -> float:
    bnm = pq_integer(config.n + config.m, config.params)
    D = config.denominator
    return M * (abs(bnm / D - 1) * A + config.alpha * config.b_n / D)


def derivative_bound(
    M: float,
    f: TargetFunction,
    A: float,
    config: OperatorConfig,
    resolution: int = DEFAULT_RESOLUTION,
) -> float:
    """Bound via the derivative: first-moment term plus ``2 sqrt(B) omega(f', sqrt(B))`` on ``[0, A]``."""
    if M is None:
        raise MissingMetadataError("derivative bound M is required")
    if not isinstance(f, TargetFunction):
        f = TargetFunction(f)
    B = max(central_moment_envelope(A, config), 0.0)
    root = math.sqrt(B)
    grid = np.linspace(0.0, A, resolution)
    dvals = f.diff(grid)
    omega = modulus_from_values(dvals, A / (resolution - 1), root)
    return first_moment_term(M, A, config) + 2 * root * omega


def empirical_errors(f, xs, config: OperatorConfig, mode=DEFAULT_MODE) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    approx = evaluate_grid(f, xs, config, mode)
    target = TargetFunction.values(f, xs) if isinstance(f, TargetFunction) else np.asarray(f(xs), dtype=float)
    return np.abs(approx - target)


def empirical_sup_error(f, config: OperatorConfig, interval, resolution: int = 101, mode=DEFAULT_MODE) -> float:
    lo, hi = map(float, interval)
    if not 0 <= lo <= hi <= config.b_n:
        raise ValueError(f"interval must lie inside [0, b_n] = [0, {config.b_n}]")
    return float(np.max(empirical_errors(f, np.linspace(lo, hi, resolution), config, mode)))


def bound_values(
    theorem,
    f: TargetFunction,
    xs,
    config: OperatorConfig,
    resolution: int = DEFAULT_RESOLUTION,
    A: float | None = None,
    mode=DEFAULT_MODE,
) -> np.ndarray:
    theorem = Theorem.parse(theorem)
    xs = np.asarray(xs, dtype=float)
    if theorem is Theorem.LIPSCHITZ:
        if f.lipschitz is None:
            raise MissingMetadataError(f"{f.name}: Lipschitz metadata (M, gamma) required")
        M, gamma = f.lipschitz
        return lipschitz_bound(M, gamma, xs, config, mode)
    if theorem is Theorem.MODULUS:
        return modulus_bound(f, xs, config, resolution, mode)
    if f.derivative_bound is None:
        raise MissingMetadataError(f"{f.name}: derivative bound required")
    A = config.b_n if A is None else A
    value = derivative_bound(f.derivative_bound, f, A, config, resolution)
    return np.full(xs.shape, value)


def check_bound(
    theorem,
    f: TargetFunction,
    xs,
    config: OperatorConfig,
    resolution: int = DEFAULT_RESOLUTION,
    A: float | None = None,
    mode=DEFAULT_MODE,
) -> list[BoundReport]:
    """Pointwise comparison of measured error and the bound on ``xs``."""
    theorem = Theorem.parse(theorem)
    xs = np.asarray(xs, dtype=float)
    errors = empirical_errors(f, xs, config, mode)
    bounds = bound_values(theorem, f, xs, config, resolution, A, mode)
    return [
        BoundReport(float(x), float(e), float(b), theorem, bool(e <= b + BOUND_TOLERANCE))
        for x, e, b in zip(xs, errors, bounds)
    ]


def check_bound_refined(
    theorem,
    f: TargetFunction,
    xs,
    config: OperatorConfig,
    resolution: int = DEFAULT_RESOLUTION,
    A: float | None = None,
    mode=DEFAULT_MODE,
    max_doublings: int = 4,
) -> tuple[list[BoundReport], int]:
    """Double the omega grid until two consecutive verdict vectors agree.

    Returns the reports at the finer of the two agreeing resolutions and that
    resolution. Only the modulus-based bounds depend on the grid.
    """
    theorem = Theorem.parse(theorem)
    reports = check_bound(theorem, f, xs, config, resolution, A, mode)
    if theorem is Theorem.LIPSCHITZ:
        return reports, resolution
    for _ in range(max_doublings):
        finer = 2 * resolution - 1
        refined = check_bound(theorem, f, xs, config, finer, A, mode)
        resolution = finer
        if [r.satisfied for r in refined] == [r.satisfied for r in reports]:
            return refined, resolution
        reports = refined
    return reports, resolution
