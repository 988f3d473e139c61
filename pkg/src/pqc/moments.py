"""Closed-form moments of the operator and the bounds built on them.

The closed forms are the textbook ones, unmodified. They agree with
brute-force summation for ``m == 0``; for ``m > 0`` they do not, and
:func:`moment_reports` surfaces the gap instead of hiding it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operator import DEFAULT_MODE, NormalizationMode, OperatorConfig, evaluate_grid
from .pq_core import pq_integer


def _brackets(config: OperatorConfig):
    params = config.params
    N = config.n + config.m
    return (
        pq_integer(N, params),
        pq_integer(N - 1, params) if N >= 1 else 0.0,
        pq_integer(config.m, params),
        config.denominator,
    )


def moment1_closed(x, config: OperatorConfig):
    """Image of ``t``: ``([n+m] x + alpha b_n) / ([n] + beta)``."""
    bnm, _, _, D = _brackets(config)
    return (bnm * np.asarray(x) + config.alpha * config.b_n) / D


def moment2_closed(x, config: OperatorConfig):
    """Image of ``t**2`` in closed form (note ``p**(n-1)``, not ``p**(n+m-1)``)."""
    x = np.asarray(x)
    bnm, bnm1, _, D = _brackets(config)
    a, b, p, q = config.alpha, config.b_n, config.p, config.q
    return (q * bnm * bnm1 * x**2 + bnm * (2 * a + p ** (config.n - 1)) * b * x + a**2 * b**2) / D**2


def central1_closed(x, config: OperatorConfig):
    bnm, _, _, D = _brackets(config)
    return (bnm / D - 1) * np.asarray(x) + config.alpha * config.b_n / D


def central2_closed(x, config: OperatorConfig):
    x = np.asarray(x)
    bnm, bnm1, _, D = _brackets(config)
    a, b, p, q = config.alpha, config.b_n, config.p, config.q
    quad = 1 - 2 * bnm / D + q * bnm * bnm1 / D**2
    lin = ((2 * a + p ** (config.n - 1)) * bnm / D - 2 * a) * b / D
    return quad * x**2 + lin * x + a**2 * b**2 / D**2


def brute_force_moment(r: int, x, config: OperatorConfig, mode=DEFAULT_MODE):
    """Direct summation of ``sum_k w_k t_k**r``; ground truth for the closed forms."""
    if r not in (0, 1, 2):
        raise ValueError(f"moment order must be 0, 1 or 2, got {r}")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = evaluate_grid(lambda t: np.asarray(t, dtype=float) ** r, xs, config, mode)
    return out if np.ndim(x) else float(out[0])


def brute_force_central(r: int, x, config: OperatorConfig, mode=DEFAULT_MODE):
    """Direct summation of ``sum_k w_k (t_k - x)**r`` for ``r`` in {1, 2}."""
    if r not in (1, 2):
        raise ValueError(f"central moment order must be 1 or 2, got {r}")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.array(
        [evaluate_grid(lambda t, x0=x0: (np.asarray(t) - x0) ** r, [x0], config, mode)[0] for x0 in xs]
    )
    return out if np.ndim(x) else float(out[0])


def quadratic_coefficient(config: OperatorConfig) -> float:
    """``q[n+m][n+m-1]/([n]+beta)**2 - 2[n+m]/([n]+beta) + 1``, the x**2 coefficient of the central moment."""
    bnm, bnm1, _, D = _brackets(config)
    return config.q * bnm * bnm1 / D**2 - 2 * bnm / D + 1


def quadratic_coefficient_bound(config: OperatorConfig) -> float:
    _, _, bm, D = _brackets(config)
    p, q, n = config.p, config.q, config.n
    return ((p**n + q**n) * bm - config.beta) ** 2 / D**2


def _envelope_coefficients(config: OperatorConfig):
    bnm, _, _, D = _brackets(config)
    a, p = config.alpha, config.p
    quad = quadratic_coefficient_bound(config)
    lin = (bnm * (2 * a + p ** (config.n - 1)) / D - 2 * a) * config.b_n / D
    const = a**2 * config.b_n**2 / D**2
    return quad, lin, const


def central2_envelope(x, config: OperatorConfig):
    """Upper envelope for the second central moment obtained by replacing the quadratic coefficient with its bound."""
    quad, lin, const = _envelope_coefficients(config)
    x = np.asarray(x)
    return quad * x**2 + lin * x + const


def sup_central2_bound(config: OperatorConfig) -> float:
    bnm, _, _, D = _brackets(config)
    a, p = config.alpha, config.p
    mid = abs(bnm * (2 * a + p ** (config.n - 1)) / D**2 - 2 * a / D)
    return config.b_n**2 * (quadratic_coefficient_bound(config) + mid + a**2 / D**2)


@dataclass(frozen=True)
class MomentReport:
    quantity: str
    x: float
    closed_form: float
    brute_force: float
    abs_gap: float
    mode: NormalizationMode


CLOSED_FORMS = {
    "moment0": lambda x, c: np.ones_like(np.asarray(x, dtype=float)),
    "moment1": moment1_closed,
    "moment2": moment2_closed,
    "central1": central1_closed,
    "central2": central2_closed,
}


def _brute(quantity, xs, config, mode):
    if quantity.startswith("moment"):
        return brute_force_moment(int(quantity[-1]), xs, config, mode)
    return brute_force_central(int(quantity[-1]), xs, config, mode)


def moment_reports(xs, config: OperatorConfig, mode=DEFAULT_MODE) -> list[MomentReport]:
    """Closed form against brute force for all five quantities on ``xs``.

    Rows come out quantity-major, then in the order of ``xs``.
    """
    mode = NormalizationMode.parse(mode)
    xs = np.asarray(xs, dtype=float)
    rows = []
    for quantity, closed in CLOSED_FORMS.items():
        cf = np.broadcast_to(closed(xs, config), xs.shape)
        bf = _brute(quantity, xs, config, mode)
        for x, c, b in zip(xs, cf, bf):
            rows.append(MomentReport(quantity, float(x), float(c), float(b), abs(float(c) - float(b)), mode))
    return rows
