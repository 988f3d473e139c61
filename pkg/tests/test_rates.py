import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import bracket_divided
from pqc.functions import build_function
from pqc.moments import central2_closed, central2_envelope
from pqc.operator import NormalizationMode, OperatorConfig, TargetFunction
from pqc.rates import (
    MissingMetadataError,
    Theorem,
    bound_values,
    central_moment_envelope,
    check_bound,
    check_bound_refined,
    derivative_bound,
    empirical_errors,
    empirical_sup_error,
    first_moment_term,
    lipschitz_bound,
    modulus_bound,
    modulus_from_values,
    modulus_of_continuity,
    second_central_moment,
)

RAW = NormalizationMode.RAW


def cfg(n=4, m=0, alpha=0, beta=0, b_n=1.0, p=0.9, q=0.8):
    return OperatorConfig.build(n, p, q, m=m, alpha=alpha, beta=beta, b_n=b_n)


def example_config(n=10):
    return cfg(n, 1, 0, 0, math.log(n) ** 2, 0.95, 0.9)


def fn(spec, config):
    return build_function(spec, max(config.max_node, config.b_n))


def brute_modulus(values, step, delta):
    best = 0.0
    for i in range(len(values)):
        for j in range(i, len(values)):
            if (j - i) * step <= delta * (1 + 1e-12):
                best = max(best, abs(values[j] - values[i]))
    return best


class TestModulus:
    def test_examples(self):
        assert modulus_of_continuity(np.sin, 0.0, (0, 3)) == 0
        assert modulus_of_continuity(lambda t: np.full_like(t, 4.0), 0.7, (0, 3)) == 0
        assert modulus_of_continuity(lambda t: t**2, 0.1, (0, 1)) == pytest.approx(0.19, abs=2 / 2001)

    def test_rejects(self):
        with pytest.raises(ValueError):
            modulus_of_continuity(np.sin, 0.1, (1, 1))
        with pytest.raises(ValueError):
            modulus_of_continuity(np.sin, 0.1, (0, 1), resolution=1)
        with pytest.raises(ValueError):
            modulus_from_values(np.zeros(4), 0.1, -1.0)

    @settings(max_examples=100, deadline=None)
    @given(
        values=st.lists(st.floats(-10, 10), min_size=2, max_size=30),
        delta=st.floats(0, 3),
    )
    def test_matches_pairwise_scan(self, values, delta):
        values = np.array(values)
        step = 0.1
        assert modulus_from_values(values, step, delta) == pytest.approx(brute_modulus(values, step, delta), abs=0)

    @settings(max_examples=60, deadline=None)
    @given(d1=st.floats(0, 2), d2=st.floats(0, 2))
    def test_monotone_and_subadditive(self, d1, d2):
        f = lambda t: np.sin(3 * t) + t**2
        w1 = modulus_of_continuity(f, d1, (0, 2), 801)
        w2 = modulus_of_continuity(f, d2, (0, 2), 801)
        w12 = modulus_of_continuity(f, d1 + d2, (0, 2), 801)
        if d1 <= d2:
            assert w1 <= w2
        # one extra grid step absorbs the discretisation of d1 + d2
        assert w12 <= w1 + w2 + modulus_of_continuity(f, 2 * 2 / 800, (0, 2), 801) + 1e-12


class TestSecondCentralMoment:
    def test_endpoints_vanish(self):
        c = cfg(8, b_n=2.0)
        assert second_central_moment(0.0, c) == 0
        assert second_central_moment(2.0, c) == pytest.approx(0.0, abs=1e-14)

    def test_matches_closed_form_at_m0(self):
        c = cfg()
        assert second_central_moment(0.5, c) == pytest.approx(float(central2_closed(0.5, c)), abs=1e-10)


class TestLipschitz:
    def test_examples(self):
        c = cfg()
        assert lipschitz_bound(1.0, 1.0, 0.0, c) == 0
        lam = second_central_moment(0.3, c)
        assert lipschitz_bound(1.0, 1.0, 0.3, c) == pytest.approx(math.sqrt(lam), rel=1e-15)
        assert lipschitz_bound(3.0, 0.5, 0.3, c) == pytest.approx(3 * lam**0.25, rel=1e-14)

    def test_identity_on_two(self):
        c = cfg(8, p=0.95, q=0.9)
        f = TargetFunction(lambda t: t, lipschitz=(1.0, 1.0), domain=(0.0, 2.0))
        err = empirical_errors(f, [0.5], c)[0]
        assert err <= math.sqrt(second_central_moment(0.5, c)) + 1e-12

    def test_rejects_bad_metadata(self):
        with pytest.raises(ValueError):
            lipschitz_bound(1.0, 1.5, 0.3, cfg())


class TestModulusBound:
    def test_constant_and_endpoint(self):
        c = cfg(6, b_n=2.0)
        const = fn("const:3", c)
        assert modulus_bound(const, 0.7, c) == 0
        assert empirical_sup_error(const, c, (0, 2.0)) == pytest.approx(0.0, abs=1e-14)
        assert modulus_bound(np.sin, 0.0, c) == 0

    def test_example_square(self):
        c = example_config()
        f = fn("x2", c)
        reports, _ = check_bound_refined(Theorem.MODULUS, f, [0.05], c)
        assert reports[0].satisfied


class TestDerivativeBound:
    def test_first_term_m0(self):
        c = cfg(6, b_n=2.0)
        assert first_moment_term(1.0, 0.5, c) == pytest.approx(0.0, abs=1e-15)
        br = bracket_divided(6, 0.9, 0.8)
        assert central_moment_envelope(0.5, c) == pytest.approx(0.9**5 * 2.0 * 0.5 / br, rel=1e-12)

    def test_envelope_is_value_at_end(self):
        c = cfg(4, 1, 1, 2)
        top = central_moment_envelope(0.5, c)
        assert top == pytest.approx(float(central2_envelope(0.5, c)), rel=1e-15)
        assert top == pytest.approx(0.017017844275934876, rel=1e-12)

    def test_envelope_not_a_sup_when_decreasing(self):
        # with alpha > 0 and a shift the linear coefficient turns negative,
        # so the value at A sits below the value at 0
        c = cfg(4, 1, 1, 2)
        values = central2_envelope(np.linspace(0, 0.5, 51), c)
        assert np.all(np.diff(values) < 0)
        assert values[0] == pytest.approx(0.05015995, rel=1e-6)
        assert values[0] > central_moment_envelope(0.5, c)

    def test_envelope_dominates_when_increasing(self):
        c = cfg(6, 0, 0, 0, 2.0)
        top = central_moment_envelope(1.5, c)
        assert np.all(central2_envelope(np.linspace(0, 1.5, 51), c) <= top + 1e-15)

    def test_linear_reproduced(self):
        c = cfg(8, b_n=2.0)
        f = fn("linear:2,1", c)
        assert derivative_bound(f.derivative_bound, f, 2.0, c) == pytest.approx(0.0, abs=1e-12)
        assert all(r.satisfied for r in check_bound(Theorem.DERIVATIVE_MODULUS, f, np.linspace(0, 2, 21), c))

    def test_example_square(self):
        c = example_config()
        f = fn("x2", c)
        reports, _ = check_bound_refined(Theorem.DERIVATIVE_MODULUS, f, np.linspace(0, 0.1, 101), c, A=0.1)
        assert all(r.satisfied for r in reports)

    def test_missing_metadata(self):
        c = cfg()
        bare = TargetFunction(np.sin)
        for theorem in (Theorem.LIPSCHITZ, Theorem.DERIVATIVE_MODULUS):
            with pytest.raises(MissingMetadataError):
                bound_values(theorem, bare, [0.1], c)
        with pytest.raises(MissingMetadataError):
            derivative_bound(None, bare, 0.5, c)


class TestEmpirical:
    def test_examples(self):
        c = cfg(8, b_n=2.0)
        assert empirical_sup_error(fn("const:1", c), c, (0, 2)) == pytest.approx(0, abs=1e-14)
        assert empirical_sup_error(fn("linear:1,0", c), c, (0, 2)) <= 1e-12

    def test_example_ordering(self):
        errs = [empirical_sup_error(fn("x2", example_config(n)), example_config(n), (0, 0.1), mode=RAW) for n in (8, 10)]
        assert 0 < errs[1] < errs[0]

    def test_interval_checked(self):
        with pytest.raises(ValueError):
            empirical_sup_error(np.sin, cfg(), (0, 2))


class TestTheoremParse:
    @pytest.mark.parametrize("text,theorem", [("T1", Theorem.LIPSCHITZ), ("t2", Theorem.MODULUS), ("T3", Theorem.DERIVATIVE_MODULUS)])
    def test_parse(self, text, theorem):
        assert Theorem.parse(text) is theorem

    def test_unknown(self):
        with pytest.raises(ValueError):
            Theorem.parse("T9")
