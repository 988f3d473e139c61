"""Closed registry of target functions with trustworthy metadata.

Specs are short strings: ``const:c``, ``linear:a,b``, ``x2``,
``poly:c0,c1,...``, ``sin`` and ``hat:c``. Metadata that depends on the
domain (Lipschitz constants of polynomials) is derived for ``[0, hi]``.
"""
from __future__ import annotations

import math

import numpy as np

from .operator import TargetFunction


class FunctionSpecError(ValueError):
    pass


def _floats(text, name, count=None):
    try:
        values = [float(v) for v in text.split(",")] if text else []
    except ValueError:
        raise FunctionSpecError(f"{name}: coefficients must be numbers, got {text!r}") from None
    if count is not None and len(values) != count:
        raise FunctionSpecError(f"{name}: expected {count} value(s), got {len(values)}")
    if not values or not all(math.isfinite(v) for v in values):
        raise FunctionSpecError(f"{name}: need finite coefficients, got {text!r}")
    return values


def _poly(coeffs, hi, name):
    coeffs = np.asarray(coeffs, dtype=float)
    deriv = np.array([i * c for i, c in enumerate(coeffs)][1:]) if len(coeffs) > 1 else np.zeros(1)

    def f(t):
        return np.polynomial.polynomial.polyval(np.asarray(t, dtype=float), coeffs)

    def df(t):
        return np.polynomial.polynomial.polyval(np.asarray(t, dtype=float), deriv)

    # sup of |f'| on [0, hi] by the triangle inequality
    slope = float(sum(abs(c) * hi**i for i, c in enumerate(deriv))) if math.isfinite(hi) else math.inf
    if not math.isfinite(slope):
        lipschitz, dbound = None, None
    else:
        lipschitz = (max(slope, 1.0), 1.0) if slope == 0 else (slope, 1.0)
        dbound = lipschitz[0]
    return TargetFunction(f, name=name, lipschitz=lipschitz, derivative_bound=dbound, derivative=df, domain=(0.0, hi))


def build_function(spec: str, hi: float = math.inf) -> TargetFunction:
    """Parse ``spec`` into a :class:`TargetFunction` valid on ``[0, hi]``."""
    spec = spec.strip()
    kind, _, args = spec.partition(":")
    if kind == "const":
        (c,) = _floats(args, spec, 1)
        return _poly([c], hi, spec)
    if kind == "linear":
        a, b = _floats(args, spec, 2)
        return _poly([b, a], hi, spec)
    if kind == "x2":
        if args:
            raise FunctionSpecError("x2 takes no arguments")
        return _poly([0.0, 0.0, 1.0], hi, spec)
    if kind == "poly":
        return _poly(_floats(args, spec), hi, spec)
    if kind == "sin":
        if args:
            raise FunctionSpecError("sin takes no arguments")
        return TargetFunction(
            np.sin, name=spec, lipschitz=(1.0, 1.0), derivative_bound=1.0, derivative=np.cos, domain=(0.0, hi)
        )
    if kind == "hat":
        (c,) = _floats(args, spec, 1)
        if not c > 0:
            raise FunctionSpecError("hat:c needs c > 0")
        half = c / 2

        def hat(t):
            return np.maximum(0.0, 1.0 - np.abs(np.asarray(t, dtype=float) - half) / half)

        return TargetFunction(hat, name=spec, lipschitz=(1.0 / half, 1.0), vanishes_beyond=c, domain=(0.0, hi))
    raise FunctionSpecError(
        f"unknown function {spec!r}; use const:c, linear:a,b, x2, poly:c0,..., sin or hat:c"
    )


def spot_check_lipschitz(f: TargetFunction, lo: float, hi: float, pairs: int = 2000, seed: int = 0) -> float:
    """Largest ``|f(t) - f(x)| - M |t - x|**gamma`` over random pairs (<= 0 when the metadata holds)."""
    if f.lipschitz is None:
        raise ValueError(f"{f.name} carries no Lipschitz metadata")
    M, gamma = f.lipschitz
    rng = np.random.default_rng(seed)
    t = rng.uniform(lo, hi, pairs)
    x = rng.uniform(lo, hi, pairs)
    return float(np.max(np.abs(f.values(t) - f.values(x)) - M * np.abs(t - x) ** gamma))
