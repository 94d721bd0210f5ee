"""
Unit tests for empty caps, nets and epsilon-cover certificates.
"""

import math
import os
import sys
import pytest
import numpy as np
from unittest.mock import patch

# Add project root to path
project_root = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
sys.path.insert(0, project_root)

from src.core.caps import (
    CapReport,
    build_net,
    coverage_fraction,
    eps_cover_test,
    largest_empty_arc,
    largest_empty_cap,
    sphere_candidates,
    verify_cap,
)
from src.core.direction_set import unoriented_directions
from src.core.geometry import nearest_distances, projective_canonical, rp1_angle
from src.errors import (
    BadTolerance,
    CapVerificationError,
    DimensionMismatch,
    EmptyInput,
    MalformedInput,
    NetTooLarge,
)
from src.registry import generate


def _random_classes(n, dim, seed):
    rng = np.random.Generator(np.random.PCG64(seed))
    v = rng.normal(size=(n, dim))
    return v / np.linalg.norm(v, axis=1)[:, None]


def _angle_reps(angles):
    return np.column_stack([np.cos(angles), np.sin(angles)])


@pytest.fixture
def circle8_dirs():
    """Direction set of the 8-point circle (classes k·pi/8)."""
    return unoriented_directions(generate(kind="circle", n=8))


# --- largest_empty_arc ---

def test_arc_two_axes_tie_goes_to_smaller_center():
    """Test classes {0, pi/2}: radius pi/4 centered at pi/4."""
    cap = largest_empty_arc(np.array([[1.0, 0.0], [0.0, 1.0]]))
    assert cap.radius == pytest.approx(math.pi / 4, abs=1e-15)
    assert rp1_angle(cap.center) == pytest.approx(math.pi / 4, abs=1e-15)
    assert cap.quality == "exact" and cap.method == "exact_gap_2d"


def test_arc_circle8(circle8_dirs):
    """Test eight uniform classes: radius pi/16."""
    cap = largest_empty_arc(circle8_dirs)
    assert cap.radius == pytest.approx(math.pi / 16, abs=1e-12)
    assert cap.n_directions == 8


def test_arc_single_class():
    """Test one class: the whole complement, centered at pi/2."""
    cap = largest_empty_arc([projective_canonical([1.0, 0.0])])
    assert cap.radius == pytest.approx(math.pi / 2, abs=1e-15)
    assert cap.center.rep.tolist() == [0.0, 1.0]


def test_arc_empty_and_wrong_dimension():
    """Test the input checks."""
    with pytest.raises(EmptyInput):
        largest_empty_arc(np.empty((0, 2)))
    with pytest.raises(DimensionMismatch):
        largest_empty_arc(np.eye(3))


def test_arc_matches_brute_force_scan():
    """Test the gap scan against an independent scan of every gap midpoint."""
    rng = np.random.Generator(np.random.PCG64(2024))
    for _ in range(1000):
        angles = rng.uniform(0.0, math.pi, size=int(rng.integers(1, 12)))
        cap = largest_empty_arc(_angle_reps(angles))

        best = 0.0
        ordered = sorted(angles)
        for a, b in zip(ordered, ordered[1:] + [ordered[0] + math.pi]):
            mid = (a + b) / 2.0
            gap = min(min(abs(mid - t) % math.pi, math.pi - abs(mid - t) % math.pi) for t in angles)
            best = max(best, gap)
        assert cap.radius == pytest.approx(best, abs=1e-12)


# --- largest_empty_cap ---

def test_cap_dispatches_to_arc_in_the_plane(circle8_dirs):
    """Test that d = 2 uses the exact gap scan."""
    assert largest_empty_cap(circle8_dirs).method == "exact_gap_2d"


def test_cap_coordinate_axes_d3():
    """Test {e1, e2, e3}: the cube diagonal at arccos(sqrt(1/3))."""
    cap = largest_empty_cap(np.eye(3))
    assert cap.method == "voronoi_3d" and cap.quality == "exact"
    assert cap.radius == pytest.approx(math.acos(math.sqrt(1.0 / 3.0)), abs=1e-6)
    np.testing.assert_allclose(np.abs(cap.center.rep), 1.0 / math.sqrt(3.0), atol=1e-9)


def test_cap_single_class_d3():
    """Test one class in d = 3: an equatorial center at pi/2."""
    cap = largest_empty_cap(np.array([[0.0, 0.0, 1.0]]))
    assert cap.radius == pytest.approx(math.pi / 2, abs=1e-12)
    assert abs(cap.center.rep[2]) < 1e-12


def test_cap_planar_classes_d3_use_the_normal(circle8_dirs):
    """Test classes spanning a plane: the normal is pi/2 from all of them."""
    flat = np.column_stack([circle8_dirs.projective, np.zeros(8)])
    cap = largest_empty_cap(flat)
    assert cap.center.rep.tolist() == [0.0, 0.0, 1.0]
    assert cap.radius == pytest.approx(math.pi / 2, abs=1e-12)


def test_cap_voronoi_falls_back_to_sampling(caplog):
    """Test that a Voronoi failure falls back to sampled candidates."""
    with patch("src.core.caps.SphericalVoronoi", side_effect=ValueError("degenerate")):
        cap = largest_empty_cap(_random_classes(10, 3, 1), k=500)
    assert cap.method == "sampled" and cap.quality == "lower_bound"
    assert "falling back" in caplog.text


@pytest.mark.parametrize("seed", range(20))
def test_cap_voronoi_dominates_sampled(seed):
    """Test that the exact d = 3 cap is never beaten by sampling."""
    reps = _random_classes(25, 3, seed)
    exact = largest_empty_cap(reps)
    sampled = largest_empty_cap(reps, method="sampled", k=5000, seed=seed)
    assert exact.radius >= sampled.radius - 1e-6


@pytest.mark.slow
def test_cap_voronoi_dominates_large_sample():
    """Test the exact cap against 1e5 candidates on 200 seeded inputs."""
    for seed in range(200):
        reps = _random_classes(30, 3, 1000 + seed)
        exact = largest_empty_cap(reps)
        sampled = largest_empty_cap(reps, method="sampled", k=100_000, seed=seed, refine=False)
        assert exact.radius >= sampled.radius - 1e-6


def test_cap_sampled_monotone_in_k():
    """Test nested candidate sets: the unrefined radius never shrinks as k grows."""
    reps = _random_classes(100, 5, 7)
    radii = [largest_empty_cap(reps, k=k, seed=3, refine=False).radius for k in (100, 1000, 10000)]
    assert radii == sorted(radii)
    refined = largest_empty_cap(reps, k=1000, seed=3)
    assert refined.radius >= radii[1]


def test_cap_reports_are_empty():
    """Test post-hoc emptiness for every method."""
    for reps, method in [(_random_classes(40, 2, 1), "auto"), (_random_classes(40, 3, 2), "auto"),
                         (_random_classes(40, 4, 3), "auto"), (_random_classes(40, 3, 4), "sampled")]:
        cap = largest_empty_cap(reps, method=method, k=2000)
        nearest, _ = nearest_distances(cap.center.rep[None, :], reps)
        assert nearest[0] >= cap.radius - 1e-9
        assert 0.0 <= cap.radius <= math.pi / 2 + 1e-12


def test_sphere_candidates_are_nested_and_unit():
    """Test the seeded candidate stream."""
    small = sphere_candidates(5, 50, seed=1)
    large = sphere_candidates(5, 500, seed=1)
    np.testing.assert_array_equal(small, large[:50])
    np.testing.assert_allclose(np.linalg.norm(large, axis=1), 1.0, atol=1e-12)


def test_cap_input_checks():
    """Test empty input and unknown methods."""
    with pytest.raises(EmptyInput):
        largest_empty_cap(np.empty((0, 3)), dim=3)
    with pytest.raises(BadTolerance):
        largest_empty_cap(np.eye(3), method="exhaustive")
    with pytest.raises(DimensionMismatch):
        largest_empty_cap(np.eye(3), dim=4)


def test_verify_cap_detects_a_class_inside():
    """Test that a cap containing a class is refused."""
    reps = np.array([[1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(CapVerificationError):
        verify_cap(np.array([math.sqrt(0.5), math.sqrt(0.5)]), 1.0, reps)


def test_cap_record_round_trip():
    """Test the JSON record of a cap."""
    cap = largest_empty_cap(np.eye(3))
    record = cap.to_record()
    assert record["dim"] == 3
    again = CapReport.from_record(record)
    assert again.radius == cap.radius
    np.testing.assert_array_equal(again.center.rep, cap.center.rep)
    with pytest.raises(MalformedInput):
        CapReport.from_record({"radius": 1.0})


# --- nets ---

def test_build_net_plane():
    """Test the uniform RP^1 net."""
    net = build_net(2, math.pi / 128)
    assert len(net.points) == 64
    assert net.covering_radius == pytest.approx(math.pi / 128)


def test_build_net_sphere_covering_radius():
    """Test the Fibonacci net against a dense random sample."""
    net = build_net(3, 0.1)
    assert net.construction == "fibonacci"
    assert net.covering_radius <= 0.1
    queries = _random_classes(20000, 3, 5)
    distances, _ = nearest_distances(queries, net.points)
    assert np.max(distances) <= net.covering_radius + 1e-12


def test_build_net_sphere_regrows_from_measured_radius():
    """Test that a missed target regrows the sphere once by the radius ratio."""
    sizes = []

    def covering_radius(points):
        sizes.append(len(points))
        return 2.5 / math.sqrt(len(points))

    build_net.cache_clear()
    try:
        with patch("src.core.caps._spherical_covering_radius", side_effect=covering_radius):
            net = build_net(3, 1.0 / 64)
    finally:
        build_net.cache_clear()
    assert sizes[0] == 6 * 4096
    assert len(sizes) == 2
    assert sizes[1] < 2 * sizes[0]
    assert net.covering_radius <= 1.0 / 64
    assert len(net.points) == sizes[1]


def test_build_net_sphere_measures_few_times():
    """Test that the Fibonacci net meets its target in at most three measurements."""
    from src.core import caps

    measured = []
    original = caps._spherical_covering_radius

    def counting(points):
        measured.append(len(points))
        return original(points)

    build_net.cache_clear()
    try:
        with patch("src.core.caps._spherical_covering_radius", side_effect=counting):
            net = build_net(3, 0.02)
    finally:
        build_net.cache_clear()
    assert net.covering_radius <= 0.02
    assert 1 <= len(measured) <= 3


def test_build_net_cube_faces():
    """Test the d = 4 cube-face net against a random sample."""
    net = build_net(4, 0.3)
    assert net.construction == "cube_faces"
    assert net.covering_radius <= 0.3
    queries = _random_classes(5000, 4, 6)
    distances, _ = nearest_distances(queries, net.points)
    assert np.max(distances) <= net.covering_radius


def test_build_net_size_limit(monkeypatch):
    """Test that oversized nets are refused."""
    monkeypatch.setattr("src.config.NET_SIZE_LIMIT", 10)
    build_net.cache_clear()
    try:
        with pytest.raises(NetTooLarge):
            build_net(2, 0.01)
    finally:
        build_net.cache_clear()


def test_build_net_rejects_non_positive_density():
    """Test the density check."""
    with pytest.raises(BadTolerance):
        build_net(2, 0.0)


# --- eps_cover_test / coverage_fraction ---

def test_cover_circle8_at_pi_over_8(circle8_dirs):
    """Test that the 8-point circle covers RP^1 at pi/8."""
    cert = eps_cover_test(circle8_dirs, math.pi / 8)
    assert cert.covered
    assert cert.witness is None
    assert cert.net_density == pytest.approx(math.pi / 32)
    assert cert.covered_fraction == 1.0


def test_cover_circle8_at_pi_over_32(circle8_dirs):
    """Test that the 8-point circle does not cover at pi/32, with a far witness."""
    cert = eps_cover_test(circle8_dirs, math.pi / 32)
    assert not cert.covered
    distances, _ = nearest_distances(cert.witness.rep[None, :], circle8_dirs.projective)
    assert distances[0] > math.pi / 32
    assert cert.witness_distance == pytest.approx(distances[0])


def test_cover_one_class_at_pi_over_2():
    """Test that any class covers RP^1 at its diameter."""
    assert eps_cover_test(np.array([[1.0, 0.0]]), math.pi / 2).covered


def test_cover_density_bounds(circle8_dirs):
    """Test the admissible range of the net density."""
    with pytest.raises(BadTolerance):
        eps_cover_test(circle8_dirs, 0.1, net_density=0.06)
    with pytest.raises(BadTolerance):
        eps_cover_test(circle8_dirs, 0.0)
    assert eps_cover_test(circle8_dirs, 0.4, net_density=0.2).net_density == 0.2


def test_cover_d3_axes():
    """Test a d = 3 cover failure with the witness far from the axes."""
    cert = eps_cover_test(np.eye(3), 0.5)
    assert not cert.covered
    distances, _ = nearest_distances(cert.witness.rep[None, :], np.eye(3))
    assert distances[0] > 0.5


def test_coverage_fraction_examples(circle8_dirs):
    """Test full, empty and partial coverage against a brute-force net scan."""
    assert coverage_fraction(circle8_dirs, math.pi / 8) == 1.0
    assert coverage_fraction(np.empty((0, 2)), 0.1, dim=2) == 0.0

    m = 64
    net_angles = [(i + 0.5) * math.pi / m for i in range(m)]
    classes = [k * math.pi / 8 for k in range(8)]
    hits = 0
    for a in net_angles:
        d = min(min(abs(a - c), math.pi - abs(a - c)) for c in classes)
        hits += d <= math.pi / 32
    assert coverage_fraction(circle8_dirs, math.pi / 32) == pytest.approx(hits / m)
