import math

import pytest
from hypothesis import given, settings, strategies as st

from lgspdc.amplitudes import (
    CoincidenceAmplitude,
    coincidence_closed,
    coincidence_gaussian_pump,
    coincidence_p_zero,
    coincidence_superposition,
    sigma_ell,
)
from lgspdc.errors import ContractViolation
from lgspdc.modes import BeamWidths, ModeIndex as M
from lgspdc.oracle import coincidence_quadrature_radial
from lgspdc.pumps import PumpSpec

SQRT_2_PI = math.sqrt(2 / math.pi)


def test_gaussian_pump_example():
    c = coincidence_closed(M(0), M(1), M(-1), BeamWidths())
    assert c.value.real == pytest.approx(SQRT_2_PI * (2 / 3) ** 2, rel=1e-15)
    assert c.value.real == pytest.approx(0.3546154, abs=1e-7)
    assert c.path == "gaussian_pump"


def test_oam_violation_is_exact_zero():
    for w in (BeamWidths(), BeamWidths(1, 0.3, 2.7)):
        c = coincidence_closed(M(0), M(1), M(1), w)
        assert c.value == 0
        assert c.probability == 0.0


def test_ratio_two_thirds():
    w = BeamWidths()
    r = coincidence_closed(M(0), M(1), M(-1), w).value / coincidence_closed(M(0), M(0), M(0), w).value
    assert r.real == pytest.approx(2 / 3, rel=1e-15)


def test_single_term_example():
    c = coincidence_closed(M(1), M(1), M(0), BeamWidths())
    assert c.value.real == pytest.approx(0.3546154, abs=1e-7)
    assert c.path == "p_zero"
    assert coincidence_p_zero(1, 1, 0, BeamWidths()).value == c.value


def test_gaussian_fast_path():
    assert coincidence_gaussian_pump(0, BeamWidths()).value.real == pytest.approx(0.5319230, abs=1e-7)
    assert coincidence_gaussian_pump(2, BeamWidths()).value.real == pytest.approx(0.2364102, abs=1e-7)
    for ell in range(12):
        w = BeamWidths.equal(1.7)
        assert coincidence_gaussian_pump(ell, w).value == coincidence_gaussian_pump(-ell, w).value
    with pytest.raises(ContractViolation):
        coincidence_gaussian_pump(0, BeamWidths(1, 1, 2))


def test_p_zero_violation():
    assert coincidence_p_zero(0, 2, 1, BeamWidths()).value == 0


@pytest.mark.parametrize("gamma", [0.5, 1.0, 2.0])
def test_special_cases_match_general(gamma):
    w = BeamWidths.equal(gamma)
    for ell in range(-5, 6):
        fast = coincidence_gaussian_pump(ell, w).value.real
        full = coincidence_closed(M(0), M(ell), M(-ell), w, path="general").value.real
        assert fast == pytest.approx(full, rel=1e-12)
    for lp in range(-5, 6):
        for ls in range(-5, 6):
            li = lp - ls
            fast = coincidence_p_zero(lp, ls, li, w).value.real
            full = coincidence_closed(M(lp), M(ls), M(li), w, path="general").value.real
            assert fast == pytest.approx(full, rel=1e-12)


def test_sigma_parity():
    for lp in range(-6, 7):
        for ls in range(-6, 7):
            assert (abs(lp) + abs(ls) + abs(lp - ls)) % 2 == 0
            assert sigma_ell(lp, ls, lp - ls) * 2 == abs(lp) + abs(ls) + abs(lp - ls)
    with pytest.raises(ArithmeticError):
        sigma_ell(1, 1, 1)


@settings(max_examples=150)
@given(st.integers(-4, 4), st.integers(0, 4), st.integers(-8, 8), st.integers(0, 4), st.integers(0, 4),
       st.floats(0.2, 4.0), st.floats(0.2, 4.0))
def test_swap_symmetry(lp, pp, ls, ps, pi, gs, gi):
    li = lp - ls
    a = coincidence_closed(M(lp, pp), M(ls, ps), M(li, pi), BeamWidths(1, gs, gi)).value.real
    b = coincidence_closed(M(lp, pp), M(li, pi), M(ls, ps), BeamWidths(1, gi, gs)).value.real
    assert a == pytest.approx(b, rel=1e-12, abs=1e-300)


@given(st.integers(-4, 4), st.integers(0, 3), st.integers(-6, 6), st.integers(0, 3), st.integers(0, 3),
       st.sampled_from([0.5, 1.0, 2.0, 3.0]), st.sampled_from([0.5, 1.0, 2.0, 3.0]))
def test_realness_and_condition(lp, pp, ls, ps, pi, gs, gi):
    c = coincidence_closed(M(lp, pp), M(ls, ps), M(lp - ls, pi), BeamWidths(1, gs, gi))
    assert c.value.imag == 0.0
    assert c.condition >= 1.0


def test_waist_scaling():
    c1 = coincidence_closed(M(2, 1), M(3, 0), M(-1, 2), BeamWidths(1.0, 1.4, 0.7)).value.real
    c2 = coincidence_closed(M(2, 1), M(3, 0), M(-1, 2), BeamWidths(2.5, 1.4, 0.7)).value.real
    assert c2 == pytest.approx(c1 / 2.5, rel=1e-14)


def test_mixed_widths_against_quadrature():
    w = BeamWidths(1.0, 2.0, 0.5)
    closed = coincidence_closed(M(2, 3), M(5, 1), M(-3, 2), w).value.real
    quad = coincidence_quadrature_radial(M(2, 3), M(5, 1), M(-3, 2), w).value.real
    assert closed == pytest.approx(0.04463520364430231, rel=1e-13)
    assert closed == pytest.approx(quad, rel=1e-10)


def test_exact_zero_inside_cancelling_sum():
    # This overlap vanishes identically; the exact-arithmetic path must say so.
    triple = (M(1, 0), M(-1, 1), M(2, 0))
    c = coincidence_closed(*triple, BeamWidths())
    assert c.value == 0
    assert math.isinf(c.condition)
    assert abs(coincidence_quadrature_radial(*triple).value) < 1e-14


def test_high_index_cancellation_against_quadrature():
    w = BeamWidths.equal(3.0)
    for pump, s, i in [(M(2, 3), M(-6, 3), M(8, 3)), (M(4, 3), M(6, 3), M(-2, 3)), (M(0, 3), M(1, 3), M(-1, 3))]:
        closed = coincidence_closed(pump, s, i, w)
        quad = coincidence_quadrature_radial(pump, s, i, w).value.real
        if abs(quad) < 1e-6:
            assert abs(closed.value.real - quad) < 1e-12
        else:
            assert closed.value.real == pytest.approx(quad, rel=1e-9)


def test_large_indices_stay_finite():
    c = coincidence_closed(M(10, 20), M(40, 20), M(-30, 20), BeamWidths(1, 2.0, 1.5))
    assert math.isfinite(c.value.real)


class TestSuperposition:
    def test_singleton_matches_closed(self):
        pump = PumpSpec.single(M(2, 1))
        for ls in range(-3, 4):
            args = (M(ls, 1), M(2 - ls, 0), BeamWidths(1, 1.3, 0.9))
            assert coincidence_superposition(pump, *args).value == coincidence_closed(M(2, 1), *args).value

    def test_linearity_example(self):
        a = 1 / math.sqrt(2)
        pump = PumpSpec.superposition([(a, M(0)), (a, M(1))])
        c = coincidence_superposition(pump, M(0), M(0), BeamWidths())
        assert c.value.real == pytest.approx(0.3761263, abs=1e-7)
        assert c.value.real == pytest.approx(a * SQRT_2_PI * 2 / 3, rel=1e-15)

    def test_complex_coefficients(self):
        pump = PumpSpec.superposition([(0.6j, M(1, 0)), (0.8, M(1, 1))])
        w = BeamWidths.equal(1.5)
        c = coincidence_superposition(pump, M(0), M(1), w).value
        ref = 0.6j * coincidence_closed(M(1, 0), M(0), M(1), w).value + \
            0.8 * coincidence_closed(M(1, 1), M(0), M(1), w).value
        assert c == pytest.approx(ref, rel=1e-15)

    def test_no_matching_component(self):
        pump = PumpSpec.superposition([(0.6, M(0)), (0.8, M(2))])
        assert coincidence_superposition(pump, M(1), M(0)).value == 0


def test_amplitude_probability():
    assert CoincidenceAmplitude(3 + 4j).probability == 25.0
