import math

import numpy as np
import pytest

from ocshuffle.chain import ShuffleParams, build_matrix, point_mass
from ocshuffle.mixsim import (
    CHUNK,
    SimConfig,
    binomial_zscores,
    deck_moves,
    deck_tv_exact,
    exact_distributions,
    fit_relaxation,
    gap_rate,
    move_positions,
    simulate_card,
    simulate_deck,
    tv_exact,
    tv_to_uniform,
    tv_window,
)
from ocshuffle.spectra import spectral_gap


def test_config_validation():
    p = ShuffleParams(10, 3)
    for kw in ({"trials": 0}, {"steps": -1}, {"start": 0}, {"start": 11}, {"rng_seed": -1}):
        with pytest.raises(ValueError):
            SimConfig(p, **kw)


def test_tv_to_uniform():
    assert tv_to_uniform(np.full(4, 0.25)) == 0
    assert tv_to_uniform(np.array([1.0, 0, 0, 0])) == pytest.approx(0.75)


def test_tv_exact_matches_matrix_power():
    p = ShuffleParams(12, 5)
    P = build_matrix(p)
    d = point_mass(p, 3)
    series = tv_exact(p, 3, 30)
    for t in (0, 1, 7, 30):
        ref = d @ np.linalg.matrix_power(P, t)
        assert series[t] == pytest.approx(tv_to_uniform(ref), abs=1e-14)


def test_move_positions_matches_matrix():
    p = ShuffleParams(9, 4)
    P = build_matrix(p)
    pos = np.arange(p.n)
    for big in (True, False):
        new = move_positions(p, pos, np.full(p.n, big))
        for i, j in zip(pos, new):
            assert P[i, j] > 0
    # both moves are permutations of positions
    assert sorted(move_positions(p, pos, np.ones(p.n, bool))) == list(pos)
    assert sorted(move_positions(p, pos, np.zeros(p.n, bool))) == list(pos)


def test_deck_moves_agree_with_card_moves():
    p = ShuffleParams(7, 3)
    big, small = deck_moves(p)
    deck = np.arange(p.n)
    for idx, flag in ((big, True), (small, False)):
        new_deck = deck[idx]
        where = np.argsort(new_deck)  # new position of each card
        np.testing.assert_array_equal(where, move_positions(p, deck, np.full(p.n, flag)))


def test_simulation_is_deterministic():
    cfg = SimConfig(ShuffleParams(20, 7), start=1, trials=CHUNK + 100, steps=15, rng_seed=42)
    a = simulate_card(cfg, [5, 15])
    b = simulate_card(cfg, [5, 15])
    for t in (5, 15):
        np.testing.assert_array_equal(a[t], b[t])
        assert a[t].sum() == cfg.trials
    c = simulate_card(SimConfig(cfg.params, 1, cfg.trials, 15, 43), [15])
    assert not np.array_equal(a[15], c[15])


def test_simulation_matches_exact_within_3_sigma():
    p = ShuffleParams(30, 7)
    cfg = SimConfig(p, start=1, trials=100_000, steps=40, rng_seed=7)
    cps = [5, 20, 40]
    sim = simulate_card(cfg, cps)
    exact = exact_distributions(p, 1, cps)
    for t in cps:
        z = binomial_zscores(sim[t], exact[t])
        assert np.all(np.abs(z) < 4.5), (t, np.max(np.abs(z)))
        # a 3 sigma band should hold for all but a few cells
        assert np.count_nonzero(np.abs(z) > 3) <= 2


def test_binomial_zscores_degenerate():
    z = binomial_zscores(np.array([10, 0]), np.array([1.0, 0.0]))
    np.testing.assert_array_equal(z, [0, 0])
    z = binomial_zscores(np.array([9, 1]), np.array([1.0, 0.0]))
    assert np.all(np.isinf(z))


def test_tv_window():
    series = 0.5 * 0.5 ** np.arange(60)
    t0, t1 = tv_window(series)
    assert series[t0] <= 0.2 < series[t0 - 1]
    assert series[t1] >= 1e-9 > series[t1 + 1]
    with pytest.raises(ValueError):
        tv_window(np.ones(5))


def test_fit_relaxation_geometric_is_exact():
    rate = 0.137
    series = 0.19 * np.exp(-rate * np.arange(100))
    assert fit_relaxation(series, (0, 99)) == pytest.approx(rate, rel=1e-10)
    assert fit_relaxation(series, (0, 99), sub_window=5) == pytest.approx(rate, rel=1e-10)
    assert fit_relaxation(np.full(10, 0.1), (0, 9)) == pytest.approx(0, abs=1e-12)


def test_fit_relaxation_rejects_bad_windows():
    series = np.full(10, 0.1)
    with pytest.raises(ValueError):
        fit_relaxation(series, (3, 3))
    with pytest.raises(ValueError):
        fit_relaxation(series, (0, 10))
    series[4] = 0.5
    with pytest.raises(ValueError):
        fit_relaxation(series, (0, 9))


@pytest.mark.parametrize("n,k,sub", [(24, 8, 1), (30, 7, 1), (50, 20, 4)])
def test_fit_matches_spectral_gap(n, k, sub):
    p = ShuffleParams(n, k)
    series = tv_exact(p, 1, 20_000)
    window = tv_window(series)
    ratio = fit_relaxation(series, window, sub) / gap_rate(spectral_gap(p).gap)
    assert ratio == pytest.approx(1, abs=0.05)


def test_gap_rate():
    assert gap_rate(0.0) == 0
    assert gap_rate(1 - math.exp(-2)) == pytest.approx(2)


def test_deck_exact_monotone():
    tv = deck_tv_exact(ShuffleParams(4, 1), 200)
    assert tv[0] == pytest.approx(1 - 1 / 24)
    assert np.all(np.diff(tv) <= 1e-15)
    assert tv[-1] < 1e-6
    with pytest.raises(ValueError):
        deck_tv_exact(ShuffleParams(9, 2), 1)


@pytest.mark.parametrize("n", [4, 5, 6, 7])
def test_deck_parity_obstruction(n):
    # The moves are an n-cycle and an (n-k)-cycle. With equal parities the
    # deck is stuck in the alternating group (both even) or alternates
    # between cosets (both odd), so TV to uniform tends to 1/2.
    for k in range(1, n - 1):
        limit = deck_tv_exact(ShuffleParams(n, k), 600)[-1]
        same = (n - 1) % 2 == (n - k - 1) % 2
        assert limit == pytest.approx(0.5 if same else 0.0, abs=1e-6), k


def test_deck_simulation_fixed_points():
    p = ShuffleParams(6, 3)
    res = simulate_deck(SimConfig(p, trials=20_000, steps=300, rng_seed=3), [0, 300], keep_samples=True)
    assert res.mean_fixed_points[0] == 6
    # expected number of fixed points of a uniform permutation is 1
    assert res.mean_fixed_points[300] == pytest.approx(1, abs=0.05)
    assert res.samples[300].shape == (20_000, 6)
    assert set(res.tv_exact) == {0, 300}
    assert res.tv_exact[300] < 1e-3
    again = simulate_deck(SimConfig(p, trials=20_000, steps=300, rng_seed=3), [0, 300])
    assert again.mean_fixed_points == res.mean_fixed_points
