import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from composite_gates import (
    DomainError,
    NoRangeError,
    frobenius_fidelity,
    frobenius_infidelity,
    high_fidelity_range,
    profile,
    sequence,
    trace_fidelity,
    x3_infidelity,
    x5_infidelity,
)
from composite_gates.catalog import get, load_catalog, polished
from composite_gates.fidelity import compose_grid
from composite_gates import compose

PI = math.pi
GRID = np.linspace(-0.5, 0.5, 101)
SEVERITY_GRID = np.linspace(-0.3, 0.3, 61)


def frobenius_oracle(seq, theta, eps):
    """Entrywise matrix distance computed from explicit 2x2 matrices."""
    u = np.array(compose(seq, eps).matrix(), dtype=complex)
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    r = np.array([[c, s], [-s, c]])
    return 1 - math.sqrt(np.sum(np.abs(u - r) ** 2) / 4)


def test_single_pulse_values(single_pi):
    # closed forms evaluated with mpmath at 30 digits
    assert frobenius_fidelity(single_pi, PI, 0.1) == pytest.approx(0.889042082730152717, abs=1e-12)
    assert trace_fidelity(single_pi, PI, 0.1) == pytest.approx(0.987688340595137726, abs=1e-12)


@given(st.floats(-0.99, 1.0))
def test_single_pulse_closed_forms(eps):
    single_pi = sequence([PI], [PI / 2], PI)
    assert frobenius_fidelity(single_pi, PI, eps) == pytest.approx(
        1 - math.sqrt(2) * abs(math.sin(PI * eps / 4)), abs=1e-12
    )
    assert trace_fidelity(single_pi, PI, eps) == pytest.approx(math.cos(PI * eps / 2), abs=1e-12)


@given(st.lists(st.tuples(st.floats(0.1, 2 * PI), st.floats(0, 2 * PI)), min_size=1, max_size=6),
       st.floats(0, 2 * PI), st.floats(-0.9, 1.0))
def test_frobenius_matches_matrix_oracle(pulses, theta, eps):
    seq = sequence([a for a, _ in pulses], [p for _, p in pulses], theta)
    f = frobenius_fidelity(seq, theta, eps)
    assert f == pytest.approx(frobenius_oracle(seq, theta, eps), abs=1e-12)
    assert f <= 1 + 1e-15
    assert -1 - 1e-15 <= trace_fidelity(seq, theta, eps) <= 1 + 1e-15


def test_closed_form_values():
    assert x3_infidelity(0.0) == 0 and x5_infidelity(0.0) == 0
    assert x3_infidelity(0.1) == pytest.approx(0.0150476693881823717, abs=1e-15)
    assert 1 - x5_infidelity(0.2) == pytest.approx(0.983193690024560248, abs=1e-15)


def test_x3_and_x5_match_closed_forms():
    x3 = get("X3").sequence
    x5 = get("X5").sequence
    for e in GRID:
        i1, i2 = x3_infidelity(e), x5_infidelity(e)
        assert frobenius_fidelity(x3, PI, e) == pytest.approx(1 - i1, abs=1e-12)
        assert frobenius_fidelity(x5, PI, e) == pytest.approx(1 - i2, abs=1e-10)
        assert trace_fidelity(x3, PI, e) == pytest.approx(1 - i1**2, abs=1e-10)
        assert trace_fidelity(x5, PI, e) == pytest.approx(1 - i2**2, abs=1e-10)


def test_x3_trace_at_tenth():
    assert trace_fidelity(get("X3").sequence, PI, 0.1) == pytest.approx(0.999773567645983959, abs=1e-12)


@pytest.mark.parametrize("name", ["X4a", "X4b", "X4c", "X4d", "X5", "X5-asym"])
def test_second_order_x_gates_share_the_closed_form_profile(name):
    seq = get(name).sequence
    for e in GRID:
        assert frobenius_fidelity(seq, PI, e) == pytest.approx(1 - x5_infidelity(e), abs=1e-10)


@pytest.mark.parametrize("name", ["X3", "X5"])
def test_trace_error_is_square_of_frobenius_error(name):
    seq = get(name).sequence
    for e in GRID:
        inf = 1 - frobenius_fidelity(seq, PI, e)
        assert 1 - trace_fidelity(seq, PI, e) == pytest.approx(inf**2, abs=1e-10)


def test_frobenius_error_dominates_trace_error_for_catalog():
    for entry in load_catalog():
        seq = entry.sequence
        prof = profile(seq, entry.theta, -0.3, 0.3, 61)
        assert np.all(1 - prof.frobenius >= 1 - prof.trace - 1e-12), entry.name


def test_fidelity_is_one_at_zero_error_after_polish():
    for entry in load_catalog():
        seq = polished(entry).sequence.to_float() if entry.claimed_order else entry.sequence
        assert frobenius_fidelity(seq, entry.theta, 0.0) == pytest.approx(1, abs=1e-10), entry.name


def test_profile_shape_and_monotone_decrease():
    prof = profile(get("X3").sequence, PI, -0.3, 0.3, 601)
    assert len(prof.eps_grid) == 601
    mid = 300
    assert prof.eps_grid[mid] == pytest.approx(0.0, abs=1e-15)
    assert np.all(np.diff(prof.frobenius[mid:]) < 0)
    assert np.all(np.diff(prof.frobenius[: mid + 1]) > 0)


def test_profile_two_points_and_validation():
    prof = profile(get("X3").sequence, PI, -0.1, 0.2, 2)
    assert list(prof.eps_grid) == [-0.1, 0.2]
    with pytest.raises(DomainError):
        profile(get("X3").sequence, PI, 0.1, 0.1, 5)
    with pytest.raises(DomainError):
        profile(get("X3").sequence, PI, -0.1, 0.1, 1)


@pytest.mark.parametrize("name", ["X3", "X5", "X7", "X9"])
def test_profile_symmetric_for_symmetric_x(name):
    seq = polished(get(name)).sequence.to_float()
    prof = profile(seq, PI, -0.4, 0.4, 81)
    assert np.allclose(prof.frobenius, prof.frobenius[::-1], atol=1e-10)


@given(st.lists(st.floats(-0.9, 1.0), min_size=1, max_size=20))
def test_grid_matches_scalar_compose(eps):
    seq = get("H5s").sequence
    a, b = compose_grid(seq, eps)
    for k, e in enumerate(eps):
        u = compose(seq, e)
        assert abs(a[k] - u.a) < 1e-13 and abs(b[k] - u.b) < 1e-13


def test_single_pulse_range(single_pi):
    r = high_fidelity_range(single_pi, PI)
    # oracle: (4/pi) asin(1e-4 / sqrt 2) = 9.00316e-5
    assert r.eps_plus == pytest.approx(9.00316e-5, abs=1e-6)
    assert r.eps_minus == pytest.approx(-9.00316e-5, abs=1e-6)
    lo, hi = r.area_interval_pi
    assert lo == pytest.approx(0.99991, abs=1e-5) and hi == pytest.approx(1.00009, abs=1e-5)


@pytest.mark.parametrize("name,lo,hi", [("X3", 0.992, 1.008), ("H5s", 0.952, 1.048)])
def test_published_ranges(name, lo, hi):
    entry = get(name)
    r = high_fidelity_range(polished(entry).sequence.to_float(), entry.theta)
    got = r.area_interval_pi
    assert got[0] == pytest.approx(lo, abs=1e-3) and got[1] == pytest.approx(hi, abs=1e-3)


def test_range_interval_is_below_threshold_on_fine_grid():
    entry = get("X7")
    seq = polished(entry).sequence.to_float()
    r = high_fidelity_range(seq, PI)
    grid = np.arange(r.eps_minus, r.eps_plus, 1e-4)
    assert all(frobenius_infidelity(seq, PI, e) <= 1e-4 for e in grid)
    assert frobenius_infidelity(seq, PI, r.eps_plus + 2e-6) > 1e-4


def test_range_stops_at_first_crossing():
    # a 5 pi pulse is an exact X gate again at eps = +-0.8; those lobes lie outside
    seq = sequence([5 * PI], [PI / 2], PI)
    assert frobenius_infidelity(seq, PI, 0.8) < 1e-12
    r = high_fidelity_range(seq, PI)
    assert 0 < r.eps_plus < 1e-4 and -1e-4 < r.eps_minus < 0
    assert not (r.capped_plus or r.capped_minus)


def test_no_range_when_gate_is_wrong():
    seq = sequence([PI] * 3, [0.0] * 3, PI)
    with pytest.raises(NoRangeError):
        high_fidelity_range(seq, PI)
    with pytest.raises(DomainError):
        high_fidelity_range(seq, PI, threshold=1.5)


def test_range_nesting_over_x_family():
    widths = []
    for name in ["X3", "X5", "X7", "X9", "X11", "X13", "X15", "X17"]:
        seq = polished(get(name)).sequence.to_float()
        widths.append(high_fidelity_range(seq, PI).eps_plus)
    assert all(b > a for a, b in zip(widths, widths[1:]))
