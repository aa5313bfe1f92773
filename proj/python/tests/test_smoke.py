import math

import numpy as np
import pytest

import corridor


def test_polytope_membership_and_vertices():
    P = corridor.HPolytope.box(np.array([-1.0, -1.0]), np.array([1.0, 1.0]))
    assert P.dim == 2 and P.num_faces == 4
    assert P.contains(np.array([0.5, 0.5]))
    assert not P.contains(np.array([1.5, 0.0]))
    assert P.vertices().shape == (4, 2)


def test_hit_and_run_stays_inside():
    P = corridor.HPolytope.box(np.zeros(3), np.ones(3))
    pts = corridor.hit_and_run(P, np.full((1, 3), 0.5), 2000, seed=4)
    assert pts.shape == (2000, 3)
    assert np.all(pts >= -1e-12) and np.all(pts <= 1 + 1e-12)
    again = corridor.hit_and_run(P, np.full((1, 3), 0.5), 2000, seed=4)
    assert np.array_equal(pts, again)


def test_distance_and_sample_count():
    v1, v2 = np.array([0.0, 0.0]), np.array([2.0, 0.0])
    assert corridor.dist_to_segment(np.array([1.0, 3.0]), v1, v2) == pytest.approx(3.0)
    assert np.allclose(corridor.dist_gradient(np.array([3.0, 0.0]), v1, v2), [1.0, 0.0])
    assert corridor.unadaptive_sample_count(corridor.EizoParams(), 1) == 2795


def test_inflation_contains_seed_and_excludes_obstacle():
    world = corridor.World.point(np.array([-5.0, -5.0]), np.array([5.0, 5.0]), np.array([[0.0, 0.0, 1.0]]))
    domain = corridor.HPolytope.box(np.array([-5.0, -5.0]), np.array([5.0, 5.0]))
    v1, v2 = np.array([-3.0, 2.0]), np.array([3.0, 2.0])
    report = corridor.inflate_edge(world, v1, v2, domain)
    assert report.guarantee_holds
    assert report.polytope.contains(v1, 1e-9) and report.polytope.contains(v2, 1e-9)
    assert not report.polytope.contains(np.array([0.0, 0.0]))


def test_errors_surface_as_corridor_error():
    world = corridor.World.point(np.array([-5.0, -5.0]), np.array([5.0, 5.0]), np.array([[0.0, 0.0, 1.0]]))
    domain = corridor.HPolytope.box(np.array([-5.0, -5.0]), np.array([5.0, 5.0]))
    with pytest.raises(corridor.CorridorError, match="SegmentInCollision"):
        corridor.inflate_edge(world, np.array([-3.0, 0.0]), np.array([3.0, 0.0]), domain)


def test_lscs_bends_at_the_corner():
    sets = [
        corridor.HPolytope.box(np.array([0.0, 0.0]), np.array([3.0, 1.0])),
        corridor.HPolytope.box(np.array([2.0, 0.0]), np.array([3.0, 3.0])),
    ]
    out = corridor.lscs_shortest_path(sets, np.array([0.5, 0.5]), np.array([2.5, 2.5]))
    assert out["cost"] == pytest.approx(2 * math.sqrt(2.5), rel=1e-6)
    assert out["knots"].shape == (3, 2)


def test_forest_plan_and_bench():
    scene = corridor.gen_forest(0)
    assert scene["centers"].shape == (15, 2)
    world = corridor.World.forest(0)
    assert world.is_free(scene["start"]) and world.is_free(scene["goal"])
    result = corridor.plan_forest(0, drm_nodes=400, drm_seed=1, seed=2)
    assert result["status"] == "ok"
    knots = np.array(result["path"]["knots"])
    assert np.allclose(knots[0], scene["start"]) and np.allclose(knots[-1], scene["goal"])

    records, summary = corridor.run_benchmark(
        {"env_seeds": [0, 1], "drm_seeds": [0], "sizes": [200], "master_seed": 7})
    assert len(records) == 2
    assert summary["instances"] == 2
