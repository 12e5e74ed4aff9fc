import math

import numpy as np
import pytest

from chunkfair import (
    ConfigError,
    InfeasibleError,
    ScenarioParams,
    band_partition,
    ber_gap,
    build_layout,
    build_scenario,
    effective_chunk_rate,
    multicell_sa,
    path_loss_db,
    place_users,
    reuse1_baseline,
    sinr_centre,
    sinr_edge,
    substream,
)
from chunkfair.assign import build_grid, chunk_rates


def small_params(**kw):
    defaults = dict(
        n_subcarriers=128,
        chunk_size=4,
        n_users=4,
        tap_counts=(4, 8, 4, 8),
        rate_weights=(1.0, 1.0, 1.0, 1.0),
    )
    defaults.update(kw)
    return ScenarioParams(**defaults)


# ---------------------------------------------------------------- layout

def test_layout_tier_distances():
    layout = build_layout(1.0, 2.0)
    d = layout.bs_distance_km
    assert d[0] == 0.0
    assert np.allclose(d[1:7], 2.0)
    tier2 = np.sort(d[7:])
    assert np.allclose(tier2[:6], 2.0 * math.sqrt(3.0))
    assert np.allclose(tier2[6:], 4.0)


def test_layout_co_band_cells_are_the_mid_edge_six():
    layout = build_layout(1.0, 2.0)
    plan = band_partition(512, 4, 0.5, 1.0, layout)
    # 1-based cell numbers of cell 1's co-band interferers
    assert (plan.co_band_cells + 1).tolist() == [8, 10, 12, 14, 16, 18]
    assert np.allclose(layout.bs_distance_km[plan.co_band_cells], 2.0 * math.sqrt(3.0))


def test_layout_adjacent_cells_never_share_edge_band():
    layout = build_layout(1.0, 2.0)
    centers = layout.centers
    for i in range(19):
        for j in range(i + 1, 19):
            gap = np.hypot(*(centers[i] - centers[j]))
            if abs(gap - 2.0) < 1e-9:  # adjacent
                assert layout.reuse3_color[i] != layout.reuse3_color[j]


# ---------------------------------------------------------------- path loss

def test_path_loss_values():
    assert abs(path_loss_db(1.0) - 128.1) < 1e-12
    assert abs(path_loss_db(2.0) - 139.4187278369657) < 1e-10
    assert abs(path_loss_db(4.0) - 150.7374556739314) < 1e-10
    with pytest.raises(ConfigError):
        path_loss_db(0.0)


# ---------------------------------------------------------------- placement

def test_placement_radial_distribution():
    rng = substream(99, 1, 0)
    d = place_users(100_000, 1.0, rng)
    assert d.max() <= 1.0
    frac = np.mean(d <= 0.5)
    assert abs(frac - 0.25) < 0.01


def test_placement_group_tags_follow_tau():
    all_centre = build_scenario(small_params(centre_radius_fraction=1.0), 1, 0)
    assert all_centre.is_centre.all()
    all_edge = build_scenario(small_params(centre_radius_fraction=0.0), 1, 0)
    assert not all_edge.is_centre.any()


# ---------------------------------------------------------------- bands

def test_band_partition_table_values():
    layout = build_layout(1.0, 2.0)
    plan = band_partition(512, 4, 0.5, 1.0, layout)
    assert plan.n_cc == 128
    assert plan.n_ce == 128
    assert plan.m_cc == 32
    assert plan.m_ce == 32
    bands = [plan.centre_band, *plan.edge_bands]
    joined = np.concatenate(bands)
    assert joined.size == np.unique(joined).size  # disjoint
    assert plan.n_cc + 3 * plan.n_ce <= 512


def test_band_partition_degenerate_tau_zero():
    layout = build_layout(1.0, 2.0)
    plan = band_partition(512, 4, 0.0, 1.0, layout)
    assert plan.n_cc == 0
    assert plan.n_ce == 512 // 3


def test_band_partition_area_consistency():
    layout = build_layout(1.0, 2.0)
    for tau in (0.1, 0.3, 0.5, 0.7, 0.9):
        plan = band_partition(512, 4, tau, 1.0, layout)
        assert abs(plan.n_cc - 512 * tau**2) <= 1.0


def test_band_partition_rejects_bad_inputs():
    layout = build_layout(1.0, 2.0)
    with pytest.raises(ConfigError):
        band_partition(512, 4, 1.5, 1.0, layout)
    with pytest.raises(ConfigError):
        band_partition(512, 4, 0.5, 1.0, layout, reuse_factor=2)


# ---------------------------------------------------------------- gap factor

def test_ber_gap_value():
    assert abs(ber_gap(1e-6) - 0.122889650386) < 1e-9
    with pytest.raises(ConfigError):
        ber_gap(0.25)
    with pytest.raises(ConfigError):
        ber_gap(0.0)


# ---------------------------------------------------------------- SINR

def centre_sinr_by_hand(sc, user, subcarrier):
    p = sc.params.total_power_watts / sc.params.n_subcarriers
    desired = (
        10.0 ** (-0.1 * path_loss_db(sc.distance_km[user]))
        * sc.gain_sq[user, 0, subcarrier]
        * p
    )
    interference = 0.0
    for cell in range(1, 19):
        att = 10.0 ** (-0.1 * path_loss_db(sc.layout.bs_distance_km[cell]))
        interference += att * sc.gain_sq[user, cell, subcarrier] * p
    return desired / (sc.params.noise_power_watts + interference)


def edge_sinr_by_hand(sc, user, subcarrier):
    p = sc.params.total_power_watts / sc.params.n_subcarriers
    desired = (
        10.0 ** (-0.1 * path_loss_db(sc.distance_km[user]))
        * sc.gain_sq[user, 0, subcarrier]
        * p
    )
    interference = 0.0
    for cell in sc.plan.co_band_cells:
        att = 10.0 ** (-0.1 * path_loss_db(sc.layout.bs_distance_km[cell]))
        interference += att * sc.gain_sq[user, cell, subcarrier] * p
    return desired / (sc.params.noise_power_watts + interference)


def test_sinr_matches_hand_evaluation():
    sc = build_scenario(small_params(n_subcarriers=512, chunk_size=4), 3, 1)
    centre = sc.centre_users
    edge = sc.edge_users
    if centre.size:
        u = int(centre[0])
        n = int(sc.plan.centre_band[5])
        assert abs(sinr_centre(sc, u, n) - centre_sinr_by_hand(sc, u, n)) \
            <= 1e-12 * centre_sinr_by_hand(sc, u, n)
    if edge.size:
        u = int(edge[0])
        n = int(sc.plan.edge_bands[sc.plan.cell_edge_slot[0]][3])
        assert abs(sinr_edge(sc, u, n) - edge_sinr_by_hand(sc, u, n)) \
            <= 1e-12 * edge_sinr_by_hand(sc, u, n)


def test_sinr_zero_interference_reduces_to_snr():
    sc = build_scenario(small_params(), 5, 0)
    edge = sc.edge_users
    if edge.size == 0:
        pytest.skip("no edge user in this draw")
    u = int(edge[0])
    sc.gain_sq[u, 1:, :] = 0.0  # silence every interferer
    n = int(sc.plan.edge_bands[sc.plan.cell_edge_slot[0]][0])
    p = sc.params.total_power_watts / sc.params.n_subcarriers
    expected = (
        10.0 ** (-0.1 * path_loss_db(sc.distance_km[u]))
        * sc.gain_sq[u, 0, n] * p / sc.params.noise_power_watts
    )
    assert abs(sinr_edge(sc, u, n) - expected) <= 1e-12 * expected


def test_sinr_band_and_group_mismatch_rejected():
    sc = build_scenario(small_params(n_subcarriers=512, chunk_size=4), 3, 1)
    centre, edge = sc.centre_users, sc.edge_users
    if centre.size and edge.size:
        edge_band = sc.plan.edge_bands[sc.plan.cell_edge_slot[0]]
        with pytest.raises(ConfigError):
            sinr_centre(sc, int(edge[0]), int(sc.plan.centre_band[0]))
        with pytest.raises(ConfigError):
            sinr_centre(sc, int(centre[0]), int(edge_band[0]))
        with pytest.raises(ConfigError):
            sinr_edge(sc, int(centre[0]), int(edge_band[0]))
        with pytest.raises(ConfigError):
            sinr_edge(sc, int(edge[0]), int(sc.plan.centre_band[0]))


def test_sinr_monotone_in_interference():
    sc = build_scenario(small_params(), 7, 2)
    edge = sc.edge_users
    if edge.size == 0:
        pytest.skip("no edge user in this draw")
    u = int(edge[0])
    n = int(sc.plan.edge_bands[sc.plan.cell_edge_slot[0]][1])
    before = sinr_edge(sc, u, n)
    sc.gain_sq[u, sc.plan.co_band_cells[0], n] *= 10.0
    assert sinr_edge(sc, u, n) <= before


def test_interferer_set_sizes():
    sc = build_scenario(small_params(), 11, 0)
    assert sc.plan.co_band_cells.size == 6
    # centre formula sums over all 18 other cells
    assert np.arange(1, 19).size == 18


# ---------------------------------------------------------------- rates

def test_effective_rate_unit_argument_gives_chunk_share():
    # log2(1 + 1) = 1 on every subcarrier of a full chunk of size L
    grid = build_grid(16, 4)
    table = chunk_rates(np.ones((1, 16)), grid, 1.0, n_total=512)
    assert np.allclose(table, 4.0 / 512.0)


def test_effective_chunk_rate_matches_scalar_sinr_loop():
    sc = build_scenario(small_params(n_subcarriers=512, chunk_size=4), 13, 0)
    edge = sc.edge_users
    if edge.size == 0:
        pytest.skip("no edge user in this draw")
    u = int(edge[0])
    band = sc.plan.edge_bands[sc.plan.cell_edge_slot[0]]
    chunk = 2
    subs = band[chunk * 4:(chunk + 1) * 4]
    direct = sum(
        np.log2(1.0 + sc.lam * sinr_edge(sc, u, int(n))) for n in subs
    ) / 512.0
    assert abs(effective_chunk_rate(sc, u, chunk) - direct) <= 1e-12 * direct


def test_lambda_strictly_degrades_rate():
    lam = ber_gap(1e-6)
    sinr = 3.7
    assert np.log2(1.0 + lam * sinr) < np.log2(1.0 + sinr)


# ---------------------------------------------------------------- group SA

def test_multicell_sa_partitions_bands():
    sc = build_scenario(small_params(n_subcarriers=512, chunk_size=4, n_users=8,
                                     tap_counts=(4,) * 8,
                                     rate_weights=(1.0,) * 8), 21, 4)
    alloc = multicell_sa(sc, "proposed")
    if alloc.centre_assignment is not None:
        ind = alloc.centre_assignment.indicator()
        assert np.all(ind.sum(axis=0) == 1)
    if alloc.edge_assignment is not None:
        ind = alloc.edge_assignment.indicator()
        assert np.all(ind.sum(axis=0) == 1)
    assert np.all(alloc.rates >= 0)
    # every user belongs to exactly one group and earns its group rate
    assert alloc.rates[sc.centre_users].sum() + alloc.rates[sc.edge_users].sum() \
        == pytest.approx(alloc.rates.sum())


def test_multicell_sa_single_centre_user_takes_all_chunks():
    sc = build_scenario(small_params(centre_radius_fraction=1.0), 31, 0)
    alloc = multicell_sa(sc, "proposed")
    assert alloc.edge_assignment is None
    assert len(alloc.centre_assignment.chunks_of(0)) >= 1
    total = sum(
        len(alloc.centre_assignment.chunks_of(k)) for k in range(sc.params.n_users)
    )
    assert total == sc.plan.m_cc


def test_multicell_sa_infeasible_when_chunks_short():
    params = small_params(n_subcarriers=16, chunk_size=4, centre_radius_fraction=0.0,
                          n_users=8, tap_counts=(4,) * 8, rate_weights=(1.0,) * 8)
    sc = build_scenario(params, 3, 0)
    # edge band has floor(16/3) = 5 subcarriers -> 1 chunk for 8 edge users
    with pytest.raises(InfeasibleError):
        multicell_sa(sc, "proposed")


def test_reuse1_dominated_per_subcarrier():
    sc = build_scenario(small_params(n_subcarriers=512, chunk_size=4), 17, 3)
    edge = sc.edge_users
    if edge.size == 0:
        pytest.skip("no edge user in this draw")
    u = int(edge[0])
    band = sc.plan.edge_bands[sc.plan.cell_edge_slot[0]]
    for n in band[:10]:
        ffr = edge_sinr_by_hand(sc, u, int(n))
        reuse1 = centre_sinr_by_hand(sc, u, int(n))  # 18 interferers
        assert reuse1 <= ffr


def test_sinr_vanishes_as_noise_grows():
    quiet = build_scenario(small_params(), 19, 0)
    loud = build_scenario(small_params(noise_density_dbm_hz=-60.0), 19, 0)
    edge = quiet.edge_users
    if edge.size == 0:
        pytest.skip("no edge user in this draw")
    u = int(edge[0])
    n = int(quiet.plan.edge_bands[quiet.plan.cell_edge_slot[0]][0])
    assert sinr_edge(loud, u, n) < 1e-6 * sinr_edge(quiet, u, n)
    assert sinr_edge(loud, u, n) < 1e-6


def test_zero_desired_signal_gives_zero_rate():
    sc = build_scenario(small_params(), 29, 0)
    edge = sc.edge_users
    if edge.size == 0:
        pytest.skip("no edge user in this draw")
    u = int(edge[0])
    sc.gain_sq[u, 0, :] = 0.0
    assert effective_chunk_rate(sc, u, 0) == 0.0


def test_reuse1_equals_ffr_without_interference():
    # the two models differ only in the edge interferer set
    sc = build_scenario(small_params(n_subcarriers=512, chunk_size=4), 37, 2)
    sc.gain_sq[:, 1:, :] = 0.0
    ffr = multicell_sa(sc, "proposed").rates
    reuse1 = reuse1_baseline(sc, "proposed")
    assert np.allclose(ffr, reuse1)


def test_reuse1_deterministic_and_nonnegative():
    params = small_params(n_subcarriers=512, chunk_size=4)
    a = reuse1_baseline(build_scenario(params, 23, 5), "proposed")
    b = reuse1_baseline(build_scenario(params, 23, 5), "proposed")
    assert np.array_equal(a, b)
    assert np.all(a >= 0)


def test_scenario_determinism():
    a = build_scenario(small_params(), 77, 9)
    b = build_scenario(small_params(), 77, 9)
    assert np.array_equal(a.gain_sq, b.gain_sq)
    assert np.array_equal(a.distance_km, b.distance_km)
