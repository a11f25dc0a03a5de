import math
from dataclasses import replace

import numpy as np
import pytest

from lislsim.errors import ConfigurationError, UsageError
from lislsim.links import (
    ContactInterval,
    LinkParams,
    OrbitArrays,
    Permanence,
    PlaneRelation,
    PlaneRelationMap,
    RangeCounts,
    SimulationWindow,
    _scan,
    analyze_link,
    classify_permanence,
    classify_plane_relation,
    contact_table,
    find_contact_intervals,
    in_range,
    normalize_offset,
    range_study,
    survey_links,
)
from lislsim.orbit import ConstellationConfig, PhysicalConstants, SatelliteId, build_constellation

from .oracles import dense_intervals

DAY = SimulationWindow(0.0, 86400.0)
SHELL = 6371.0 + 80.0


def sat(records, text_plane, slot):
    return records[(text_plane - 1) * 66 + slot - 1]


class TestPlaneRelation:
    @pytest.mark.parametrize(
        "other, expected",
        [(2, PlaneRelation.ADJACENT), (24, PlaneRelation.ADJACENT), (1, PlaneRelation.SAME),
         (13, PlaneRelation.CROSSING), (3, PlaneRelation.NEARBY), (7, PlaneRelation.NEARBY),
         (8, PlaneRelation.CROSSING), (19, PlaneRelation.CROSSING), (20, PlaneRelation.NEARBY),
         (23, PlaneRelation.NEARBY), (12, PlaneRelation.CROSSING)],
    )
    def test_starlink_designation(self, other, expected):
        assert classify_plane_relation(1, other, PlaneRelationMap.starlink(), 24) is expected

    def test_designation_counts(self):
        m = PlaneRelationMap.starlink()
        rel = [classify_plane_relation(1, q, m) for q in range(2, 25)]
        assert rel.count(PlaneRelation.ADJACENT) == 2
        assert rel.count(PlaneRelation.NEARBY) == 9
        assert rel.count(PlaneRelation.CROSSING) == 12

    @pytest.mark.parametrize("p", range(1, 25))
    def test_symmetric_except_sixth_plane(self, p):
        m = PlaneRelationMap.starlink()
        for q in range(1, 25):
            if abs(normalize_offset(q - p, 24)) == 6:
                continue
            assert classify_plane_relation(p, q, m) is classify_plane_relation(q, p, m)

    def test_normalize(self):
        assert normalize_offset(12, 24) == 12
        assert normalize_offset(13, 24) == -11
        assert normalize_offset(-1, 24) == -1
        assert normalize_offset(23, 24) == -1

    def test_partition_checks(self):
        with pytest.raises(ConfigurationError):
            PlaneRelationMap(4, {1, -1}, set(), set())  # offset 2 missing
        with pytest.raises(ConfigurationError):
            PlaneRelationMap(4, {1, -1, 2}, {2}, set())  # 2 twice
        with pytest.raises(ConfigurationError):
            PlaneRelationMap(4, {1, -1, 2, 3}, set(), set())  # 3 outside (-2, 2]
        m = PlaneRelationMap(4, {1, -1}, set(), {2})
        assert m.relation(2) is PlaneRelation.CROSSING

    def test_built_in_maps(self):
        assert PlaneRelationMap.for_planes(24) == PlaneRelationMap.starlink()
        assert PlaneRelationMap.for_planes(1).relation(0) is PlaneRelation.SAME
        with pytest.raises(ConfigurationError):
            PlaneRelationMap.for_planes(6)

    def test_out_of_range_plane(self):
        with pytest.raises(ConfigurationError):
            classify_plane_relation(1, 25, PlaneRelationMap.starlink())


class TestInRange:
    def test_one_slot_neighbours_at_659(self, starlink):
        t = np.linspace(0, 86400, 1001)
        assert in_range(starlink[0], starlink[1], t, 659.0).all()
        assert in_range(starlink[0], starlink[1], 0.0, 659.0) is True

    def test_zero_range(self, starlink):
        assert not in_range(starlink[0], starlink[700], np.linspace(0, 6000, 50), 0.0).any()

    def test_eight_slots_blocked_by_atmosphere(self, starlink):
        # chord 5144.6 km would also exceed 5016; check the atmosphere alone at a huge range
        t = np.linspace(0, 6000, 50)
        assert not in_range(starlink[0], starlink[8], t, 5016.0).any()
        assert not in_range(starlink[0], starlink[8], t, 1e6).any()
        assert in_range(starlink[0], starlink[7], t, 1e6).all()


class TestWindow:
    def test_grid_includes_stop(self):
        t = SimulationWindow(0.0, 10.5).sample_times(1.0)
        assert t[0] == 0.0 and t[-1] == 10.5 and len(t) == 12
        t = SimulationWindow(5.0, 15.0).sample_times(1.0)
        assert len(t) == 11 and t[-1] == 15.0

    def test_invalid(self):
        with pytest.raises(ConfigurationError):
            SimulationWindow(10.0, 10.0)


class TestParams:
    @pytest.mark.parametrize("kw", [{"scan_step_s": 0.0}, {"refine_tol_s": 2.0}, {"n_jobs": 0}])
    def test_invalid(self, kw):
        with pytest.raises(ConfigurationError):
            LinkParams(**kw)


def _toy_pair(phase, raan_spread=180.0, inclination=53.0):
    recs = build_constellation(
        ConstellationConfig(num_planes=2, sats_per_plane=1, raan_spread_deg=raan_spread, inclination_deg=inclination)
    )
    return recs[0], replace(recs[1], initial_arg_latitude_rad=phase)


class TestFindContactIntervals:
    def test_intra_plane_permanent(self, starlink):
        ivs = find_contact_intervals(starlink[0], starlink[1], 1700.0, DAY)
        assert ivs == [ContactInterval(0.0, 86400.0)]

    def test_zero_range(self, starlink):
        assert find_contact_intervals(starlink[0], starlink[500], 0.0, DAY) == []

    def test_same_satellite_rejected(self, starlink):
        with pytest.raises(UsageError):
            find_contact_intervals(starlink[0], starlink[0], 1000.0, DAY)

    @pytest.mark.parametrize("phase, range_km", [(2.0, 3000.0), (0.4, 5000.0), (4.0, 1500.0)])
    def test_matches_dense_oracle(self, phase, range_km):
        a, b = _toy_pair(phase)
        window = SimulationWindow(0.0, 1500.0)
        ours = find_contact_intervals(a, b, range_km, window)
        ref = dense_intervals(a, b, range_km, 0.0, 1500.0, SHELL)
        assert len(ours) == len(ref)
        for iv, (s, e) in zip(ours, ref):
            assert abs(iv.start_s - s) <= 1e-3 + 1e-9
            assert abs(iv.stop_s - e) <= 1e-3 + 1e-9

    def test_intervals_valid_and_symmetric(self, starlink15):
        a, b = starlink15[0], sat(starlink15, 12, 32)
        ab = find_contact_intervals(a, b, 1700.0, DAY)
        ba = find_contact_intervals(b, a, 1700.0, DAY)
        assert ab == ba
        assert ab
        for iv in ab:
            assert 0.0 <= iv.start_s < iv.stop_s <= 86400.0
        for x, y in zip(ab, ab[1:]):
            assert x.stop_s < y.start_s
        assert sum(iv.duration_s for iv in ab) <= 86400.0

    def test_endpoints_satisfy_predicate(self, starlink):
        a, b = starlink[0], sat(starlink, 2, 63)
        for iv in find_contact_intervals(a, b, 1700.0, SimulationWindow(0.0, 20000.0)):
            assert in_range(a, b, [iv.start_s, iv.stop_s], 1700.0).all()
            if iv.start_s > 0:
                assert not in_range(a, b, iv.start_s - 1e-3, 1700.0)
            assert not in_range(a, b, iv.stop_s + 1e-3, 1700.0)


def test_scan_kernel_agrees_with_reference_predicate(starlink):
    ref = OrbitArrays.from_records([starlink[0]]).take(0)
    others = OrbitArrays.from_records([starlink[70], sat(starlink, 10, 40), sat(starlink, 23, 5)])
    times = SimulationWindow(0.0, 7200.0).sample_times(1.0)
    ranges = [1319.0, 1700.0, 5016.0]
    runs = _scan(ref, others, ranges, times, PhysicalConstants(), 1)
    recs = [starlink[70], sat(starlink, 10, 40), sat(starlink, 23, 5)]
    for k, r in enumerate(ranges):
        for j, rec in enumerate(recs):
            expected = in_range(starlink[0], rec, times, r)
            got = np.zeros(len(times), dtype=bool)
            for first, last in zip(*runs[k][j]):
                got[first : last + 1] = True
            assert (got == expected).all()


class TestPermanence:
    def test_cases(self):
        w = SimulationWindow(0.0, 100.0)
        assert classify_permanence([ContactInterval(0.0, 100.0)], w) is Permanence.PERMANENT
        assert classify_permanence([ContactInterval(0.0005, 99.9995)], w) is Permanence.PERMANENT
        assert classify_permanence([], w) is Permanence.NONE
        assert classify_permanence([ContactInterval(0.0, 40.0), ContactInterval(41.0, 100.0)], w) is Permanence.TEMPORARY
        assert classify_permanence([ContactInterval(0.0, 99.0)], w) is Permanence.TEMPORARY

    def test_thirty_instances(self):
        ivs = [ContactInterval(100.0 + 2800 * i, 1000.0 + 2800 * i) for i in range(30)]
        assert classify_permanence(ivs, DAY) is Permanence.TEMPORARY


class TestAnalyzeLink:
    def test_front_neighbour(self, starlink):
        link = analyze_link(starlink[0], starlink[1], 659.0, DAY)
        assert link.relation is PlaneRelation.SAME
        assert link.permanence is Permanence.PERMANENT
        assert link.id_a == SatelliteId(1, 1) and link.id_b == SatelliteId(1, 2)

    def test_self_rejected(self, starlink):
        with pytest.raises(UsageError):
            analyze_link(starlink[0], starlink[0], 659.0, DAY)

    def test_crossing_link(self, starlink15):
        link = analyze_link(starlink15[0], sat(starlink15, 12, 32), 1700.0, DAY)
        assert link.relation is PlaneRelation.CROSSING
        assert link.permanence is Permanence.TEMPORARY
        assert 29 <= len(link.intervals) <= 31
        assert all(iv.duration_s < 600 for iv in link.intervals)

    @pytest.mark.parametrize("plane, slot", [(2, 63), (5, 10), (13, 40), (24, 2), (1, 30)])
    def test_argument_order_irrelevant(self, starlink, plane, slot):
        a, b = starlink[0], sat(starlink, plane, slot)
        assert analyze_link(a, b, 1700.0, DAY) == analyze_link(b, a, 1700.0, DAY)

    def test_contact_table(self, starlink):
        rows = contact_table(starlink[0], starlink[1], 1700.0, DAY)
        assert [(r.instance, r.start_s, r.stop_s, r.duration_s) for r in rows] == [(1, 0.0, 86400.0, 86400.0)]
        assert contact_table(starlink[0], sat(starlink, 13, 1), 1.0, DAY) == []


class TestSurvey:
    def test_thread_count_irrelevant(self, starlink):
        window = SimulationWindow(0.0, 3600.0)
        one = survey_links(starlink[0], starlink, [1319.0, 5016.0], window, LinkParams(n_jobs=1))
        three = survey_links(starlink[0], starlink, [1319.0, 5016.0], window, LinkParams(n_jobs=3))
        assert one == three

    def test_single_plane(self):
        recs = build_constellation(ConstellationConfig(num_planes=1))
        params = LinkParams(relation_map=PlaneRelationMap.for_planes(1))
        rep = range_study(recs[0], recs, [1700.0, 5016.0], SimulationWindow(0.0, 600.0), params)
        for row in rep.rows:
            assert row.perm_adjacent == row.perm_nearby == row.perm_crossing == 0
            assert row.temp_adjacent == row.temp_nearby == row.temp_crossing == 0
        assert rep.row(1700.0).perm_intra == 4
        assert rep.row(5016.0).perm_intra == 14

    def test_empty_ranges(self, starlink):
        assert range_study(starlink[0], starlink, [], DAY).rows == ()

    def test_monotone_on_short_window(self, starlink):
        window = SimulationWindow(0.0, 6000.0)
        rep = range_study(starlink[0], starlink, [659.0, 1319.0, 1500.0, 1700.0, 5016.0], window)
        rows = rep.rows
        for rel in PlaneRelation:
            totals = [r.count(rel, Permanence.PERMANENT) + r.count(rel, Permanence.TEMPORARY) for r in rows]
            perms = [r.count(rel, Permanence.PERMANENT) for r in rows]
            assert totals == sorted(totals)
            assert perms == sorted(perms)


def test_range_counts_totals():
    r = RangeCounts(1.0, perm_intra=2, perm_adjacent=3, perm_nearby=4, temp_adjacent=1, temp_nearby=2, temp_crossing=5)
    assert r.perm_total == 9 and r.temp_total == 8
    assert r.count(PlaneRelation.CROSSING, Permanence.TEMPORARY) == 5
    assert r.count(PlaneRelation.SAME, Permanence.PERMANENT) == 2
