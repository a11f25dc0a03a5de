import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lislsim.errors import DomainError, UsageError
from lislsim.geometry import (
    distance,
    grazing_altitude,
    intra_plane_chord,
    link_geometry,
    max_lisl_range,
    segment_grazing_altitude,
    segment_length,
)
from lislsim.orbit import EciPosition, build_constellation, ConstellationConfig, propagate

R_E = 6371.0
R_ORBIT = 6921.0
# mpmath, 30 digits
CHORD_1 = 658.628878832241  # 2*6921*sin(pi/66)
CHORD_2 = 1315.76575141650
CHORD_7 = 4527.27474823975
CHORD_8 = 5144.55171125025
GRAZE_1 = 542.160854485598  # 6921*cos(pi/66) - 6371
GRAZE_8 = 54.2344644042385
X_550_80_6378 = 5016.54064072046
X_550_0_6378 = 5410.47132882155


def pos(x, y, z, t=0.0):
    return EciPosition(x, y, z, t)


class TestDistance:
    def test_identical(self):
        assert distance(pos(1, 2, 3), pos(1, 2, 3)) == 0.0

    def test_antipodal(self):
        assert distance(pos(R_ORBIT, 0, 0), pos(-R_ORBIT, 0, 0)) == pytest.approx(13842.0)

    def test_one_slot_neighbours(self, starlink):
        d = distance(propagate(starlink[0], 0.0), propagate(starlink[1], 0.0))
        assert d == pytest.approx(CHORD_1, abs=1e-9)

    def test_mismatched_times(self):
        with pytest.raises(UsageError):
            distance(pos(0, 0, 0, 0.0), pos(1, 0, 0, 1.0))
        with pytest.raises(UsageError):
            grazing_altitude(pos(7000, 0, 0, 0.0), pos(0, 7000, 0, 1.0), R_E)


class TestGrazing:
    def test_degenerate_segment(self):
        assert grazing_altitude(pos(R_E + 550, 0, 0), pos(R_E + 550, 0, 0), R_E) == pytest.approx(550.0)

    def test_through_center(self):
        assert grazing_altitude(pos(R_ORBIT, 0, 0), pos(-R_ORBIT, 0, 0), R_E) == pytest.approx(-R_E)

    def test_one_slot_neighbours(self, starlink):
        g = grazing_altitude(propagate(starlink[0], 0.0), propagate(starlink[1], 0.0), R_E)
        assert g == pytest.approx(GRAZE_1, abs=1e-9)

    def test_endpoint_minimum(self):
        # Radial segment: closest approach to the center lies beyond the inner endpoint.
        assert grazing_altitude(pos(7000, 0, 0), pos(9000, 0, 0), R_E) == pytest.approx(7000 - R_E)

    def test_link_geometry(self):
        g = link_geometry(pos(R_ORBIT, 0, 0), pos(-R_ORBIT, 0, 0), R_E)
        assert g.distance_km == pytest.approx(13842.0)
        assert g.grazing_altitude_km == pytest.approx(-R_E)

    @pytest.mark.parametrize("h, a, r", [(550.0, 80.0, 6378.0), (550.0, 80.0, 6371.0), (1200.0, 300.0, 6371.0)])
    def test_tangent_configuration(self, h, a, r):
        """Two satellites separated by exactly the maximum range graze the shell at a."""
        x = max_lisl_range(h, a, r)
        half_angle = math.asin((x / 2) / (r + h))
        A = pos((r + h) * math.cos(half_angle), (r + h) * math.sin(half_angle), 0)
        B = pos((r + h) * math.cos(half_angle), -(r + h) * math.sin(half_angle), 0)
        assert distance(A, B) == pytest.approx(x, abs=1e-9)
        assert grazing_altitude(A, B, r) == pytest.approx(a, abs=1e-6)


coords = arrays(np.float64, 3, elements=st.floats(-20000, 20000))


def _outside(v):
    return np.linalg.norm(v) > R_E


class TestProperties:
    @settings(max_examples=300)
    @given(coords, coords)
    def test_symmetry(self, a, b):
        assert segment_length(a, b) == segment_length(b, a)
        assert segment_grazing_altitude(a, b, R_E) == segment_grazing_altitude(b, a, R_E)

    @settings(max_examples=300)
    @given(coords, coords)
    def test_grazing_bounded_by_endpoints(self, a, b):
        g = segment_grazing_altitude(a, b, R_E)
        ends = min(np.linalg.norm(a), np.linalg.norm(b)) - R_E
        assert g <= ends + 1e-9
        assert segment_length(a, b) >= 0

    @settings(max_examples=300)
    @given(coords, coords)
    def test_grazing_matches_dense_segment_sampling(self, a, b):
        ts = np.linspace(0.0, 1.0, 20001)[:, None]
        sampled = np.min(np.linalg.norm(a + ts * (b - a), axis=1)) - R_E
        g = segment_grazing_altitude(a, b, R_E)
        assert g <= sampled + 1e-9
        # Sampling error bound: half a sample spacing along the segment.
        assert sampled - g <= np.linalg.norm(b - a) / 20000 + 1e-9

    def test_broadcasting(self):
        a = np.array([[7000.0, 0, 0], [0, 7000.0, 0]])
        b = np.array([-7000.0, 0, 0])
        np.testing.assert_allclose(segment_length(a, b), [14000.0, math.sqrt(2) * 7000])
        assert segment_grazing_altitude(a, b, R_E).shape == (2,)

    def test_intra_plane_time_invariance(self, starlink):
        a, b = starlink[0], starlink[3]
        ref = intra_plane_chord(3, R_ORBIT, 66)
        for t in np.linspace(0, 86400, 97):
            assert distance(propagate(a, t), propagate(b, t)) == pytest.approx(ref, abs=1e-6)


class TestMaxRange:
    def test_published_value(self):
        assert max_lisl_range(550.0, 80.0, 6378.0) == pytest.approx(5016.0, abs=1.0)
        assert max_lisl_range(550.0, 80.0, 6378.0) == pytest.approx(X_550_80_6378, abs=1e-9)

    def test_no_atmosphere(self):
        assert max_lisl_range(550.0, 0.0, 6378.0) == pytest.approx(X_550_0_6378, abs=1e-9)

    def test_tangent_at_altitude(self):
        assert max_lisl_range(300.0, 300.0, 6000.0) == 0.0

    @pytest.mark.parametrize("h, a", [(50.0, 80.0), (550.0, -1.0)])
    def test_domain(self, h, a):
        with pytest.raises(DomainError):
            max_lisl_range(h, a, 6378.0)


class TestChord:
    def test_diameter(self):
        assert intra_plane_chord(33, R_ORBIT, 66) == pytest.approx(2 * R_ORBIT)

    @pytest.mark.parametrize("k, expected", [(1, CHORD_1), (2, CHORD_2), (7, CHORD_7), (8, CHORD_8)])
    def test_values(self, k, expected):
        assert intra_plane_chord(k, R_ORBIT, 66) == pytest.approx(expected, abs=1e-9)

    def test_visibility_limit_is_seven_slots(self):
        x = max_lisl_range(550.0, 80.0, 6378.0)
        assert intra_plane_chord(7, R_ORBIT, 66) <= x < intra_plane_chord(8, R_ORBIT, 66)

    @pytest.mark.parametrize("k", [0, 34, -1])
    def test_domain(self, k):
        with pytest.raises(DomainError):
            intra_plane_chord(k, R_ORBIT, 66)

    def test_consistent_with_propagation(self):
        recs = build_constellation(ConstellationConfig(num_planes=1, phasing_factor=0))
        for k in range(1, 34):
            for t in (0.0, 999.0, 43210.0):
                d = distance(propagate(recs[0], t), propagate(recs[k], t))
                assert d == pytest.approx(intra_plane_chord(k, R_ORBIT, 66), abs=1e-6)
