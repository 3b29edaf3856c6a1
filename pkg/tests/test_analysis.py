import math
from fractions import Fraction

import pytest

from ocshuffle.analysis import (
    ENVELOPE_CONSTANT,
    BellParams,
    RationalPoint,
    bell_rows,
    check_thm2_bounds,
    envelope_report,
    fibonacci,
    local_maxima,
    predict_thm1,
    predict_thm3,
    round_half_up,
    scan_k,
    simple_rationals,
    spike_offsets,
    thm1_deviation,
    thm5_bound,
    thm5_sequence,
    window_ks,
)
from ocshuffle.chain import ShuffleParams
from ocshuffle.gamma import gamma_min

PI2 = math.pi**2


@pytest.mark.parametrize("x,expected", [
    (Fraction(5, 2), 3), (Fraction(-5, 2), -2), (2.4999, 2), (Fraction(1000, 3), 333), (7, 7),
])
def test_round_half_up(x, expected):
    assert round_half_up(x) == expected


@pytest.mark.parametrize("p,q,A", [(1, 2, 2), (1, 3, 1), (2, 3, 2), (3, 5, 1), (2, 5, 2), (1, 5, 1), (0, 1, 2)])
def test_parity_factor(p, q, A):
    assert RationalPoint(p, q).A == A


@pytest.mark.parametrize("p,q", [(2, 4), (-1, 3), (4, 3), (1, 0)])
def test_rational_point_rejects(p, q):
    with pytest.raises(ValueError):
        RationalPoint(p, q)


def test_nearest_k_is_exact():
    assert RationalPoint(1, 2).nearest_k(999) == 500
    assert RationalPoint(2, 3).nearest_k(1000) == 667
    assert RationalPoint(1, 3).nearest_k(1000) == 333


def test_rational_point_hand_values():
    # k = n/2 has m* = 4, r = 0: gamma = 4 pi^2 / n^2 exactly
    assert predict_thm1(RationalPoint(1, 2), 1000) == pytest.approx(4 * PI2 / 1e6, rel=1e-15)
    assert gamma_min(ShuffleParams(1000, 500)).value == pytest.approx(4 * PI2 / 1e6, rel=1e-15)
    assert predict_thm1(RationalPoint(1, 3), 1000) == pytest.approx(1.5 * PI2 / 1e6, rel=1e-15)
    assert thm1_deviation(RationalPoint(1, 3), 1000) == pytest.approx(1 / 1499, rel=1e-9)
    for bad in (RationalPoint(0, 1), RationalPoint(1, 1)):
        with pytest.raises(ValueError):
            predict_thm1(bad, 100)


def test_rational_point_deviation_shrinks():
    for pt in simple_rationals(5):
        devs = [thm1_deviation(pt, n) for n in (10**3, 10**4, 10**5)]
        assert devs[-1] < 0.02
        assert devs[-1] <= devs[0]


@pytest.mark.parametrize("p,q", [(1, 2), (1, 3), (2, 3), (1, 4)])
def test_rational_point_trend(p, q):
    devs = [thm1_deviation(RationalPoint(p, q), n) for n in (250, 500, 1000, 2000)]
    assert all(a >= b for a, b in zip(devs, devs[1:]))
    assert devs[-1] < 0.02


def test_bell_centre_equals_leading_order():
    pt = RationalPoint(1, 3)
    assert predict_thm3(pt, 3000, 1000) == pytest.approx(predict_thm1(pt, 3000), rel=1e-15)


def test_bell_window_and_errors():
    pt = RationalPoint(1, 2)
    n = 10_000
    bound = 2 ** 0.25 / 4
    assert BellParams(pt, 0).c_bound == pytest.approx(bound)
    ks = window_ks(pt, n)
    assert ks == list(range(ks[0], ks[-1] + 1))
    assert abs(ks[0] - 5000) <= bound * n**0.75 < abs(ks[0] - 1 - 5000)
    with pytest.raises(ValueError, match="window"):
        predict_thm3(pt, n, ks[-1] + 1)
    with pytest.raises(ValueError, match="2/3"):
        predict_thm3(RationalPoint(0, 1), 1000, 100)
    assert predict_thm3(RationalPoint(0, 1), 1000, 3) == pytest.approx(2 * PI2 * 12 / 1e9)


def test_bell_p0_matches_gamma_for_tiny_k():
    n = 10_000
    for k in range(1, 10):
        g = gamma_min(ShuffleParams(n, k)).value
        assert predict_thm3(RationalPoint(0, 1), n, k) / g == pytest.approx(1, abs=0.01)


def test_bell_rows_layout():
    rows = bell_rows(1000, RationalPoint(1, 2), 40)
    assert [r.k for r in rows] == list(range(460, 541))
    centre = rows[40]
    assert centre.ratio == pytest.approx(1.0, rel=1e-12)
    assert all((r.prediction is None) == (r.ratio is None) for r in rows)
    edge = bell_rows(100, RationalPoint(1, 5), 50)
    assert edge[0].k == 1 and edge[-1].k == 70


def test_extremal_bounds_hold():
    for n in (11, 100, 1000, 1009):
        rep = check_thm2_bounds(n, deltas=(0.01, 0.05, 0.2))
        assert rep.ok, rep
        assert rep.lower_attained == [1]  # k = 1 with m = 2 gives N = 4 + 4
    with pytest.raises(ValueError):
        check_thm2_bounds(10)


def test_fibonacci():
    assert fibonacci(8) == [1, 2, 3, 5, 8, 13, 21, 34]


def test_golden_ratio_sequence():
    alpha = (3 - math.sqrt(5)) / 2  # 1 - alpha = 1/phi
    rows = thm5_sequence(alpha, fibonacci(10))
    assert len(rows) >= 3
    assert all(r.ok for r in rows)
    assert thm5_bound(alpha) == pytest.approx(2 * PI2 * math.sqrt(alpha) / math.sqrt(5))
    with pytest.raises(ValueError):
        thm5_sequence(1.0, [3])


def test_scan_k_and_local_maxima():
    recs = scan_k(200, with_numeric=True, sample_stride=50)
    assert [r.k for r in recs] == list(range(1, 200))
    numeric = [r for r in recs if r.gap_numeric is not None]
    assert [r.k for r in numeric] == [50, 100, 150]
    assert all(r.relaxation == pytest.approx(1 / r.gamma) for r in recs)
    assert local_maxima([1, 3, 2, 2, 5]) == [1, 4]
    assert local_maxima([2, 2, 1]) == [0]


def test_spike_offsets_at_half():
    offsets = spike_offsets(scan_k(1000))
    # k = 499 and 500 tie exactly; the plateau's left end counts as the peak
    assert offsets[(1, 2)] == 1
    assert set(offsets) == {(r.p, r.q) for r in simple_rationals(5)}


def test_envelope_report():
    rep = envelope_report(500)
    assert rep.constant == ENVELOPE_CONSTANT
    assert len(rep.ks) == 499
    assert 0.5 < rep.ratio_to_constant < 1.5
