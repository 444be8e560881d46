import math

import numpy as np
import pytest

from henon_rigidity import (
    Dynamics,
    EscapeKind,
    GridJob,
    GridMode,
    HenonChain,
    Point2,
    classify_point,
    filtration_radius,
    green,
    green_max,
    rasterize_grid,
    simple_henon,
    verify_green_domination,
)
from henon_rigidity.acceptance import green_plus_by_iteration
from henon_rigidity.dynamics import factor_radius
from henon_rigidity.fixtures import domination_suite
from henon_rigidity.maps import random_chain


def sector_boundary(R, n, rng):
    """Points with ``|y| = R >= |x|``."""
    y = R * np.exp(2j * np.pi * rng.uniform(size=n))
    x = R * rng.uniform(size=n) * np.exp(2j * np.pi * rng.uniform(size=n))
    return x, y


# -- filtration radius


def test_filtration_radius_quadratic(H, rng):
    fr = filtration_radius(H)
    assert fr.R <= 4
    x, y = sector_boundary(fr.R, 500, rng)
    for _ in range(5):
        x, y = H.forward(x, y)
        assert np.all(np.abs(y) > fr.R) and np.all(np.abs(y) >= np.abs(x))


def test_filtration_radius_monotone_in_leading_coefficient():
    assert filtration_radius(simple_henon([0, 0, 100])).R <= filtration_radius(simple_henon([0, 0, 1])).R


def test_filtration_radius_chain_is_max(rng):
    for _ in range(5):
        G = random_chain(rng, 2)
        fr = filtration_radius(G)
        assert fr.R == max(fr.forward_R, fr.backward_R)
        assert fr.forward_R == max(factor_radius(f) for f in G.factors)


def test_filtration_radius_backward_invariance(rng):
    for _ in range(10):
        G = random_chain(rng)
        R = filtration_radius(G).R
        y, x = sector_boundary(R, 200, rng)  # |x| = R >= |y|
        with np.errstate(all="ignore"):
            u, v = G.inverse(x, y)
        ok = ~np.isfinite(u) | ((np.abs(u) > R) & (np.abs(u) >= np.abs(v)))
        assert ok.all()


# -- Green functions


def test_green_reference_value(H):
    g = green(H, Point2(0, 10), "plus")
    assert g.escaped
    assert abs(g.value - 2.3022) <= 1e-3
    assert abs(g.value - green_plus_by_iteration(0.0, 10.0, 8)) <= g.error_bound + 1e-12
    assert g.error_bound <= 1e-3 and g.iterations_used <= 6


def test_green_fixed_point_is_zero(H):
    for budget in (1, 10, 200):
        g = green(H, Point2(0, 0), "plus", budget)
        assert g.value == 0 and not g.escaped
    assert green_max(H, Point2(0, 0)).value == 0


def test_green_value_zero_iff_not_escaped(H, rng):
    dyn = Dynamics(H)
    x = rng.uniform(-3, 3, 300) + 0j
    y = rng.uniform(-3, 3, 300) + 0j
    v, e, _, esc = dyn.green_arrays(x, y, "plus")
    assert np.all((v == 0) == ~esc)
    assert np.all(np.isfinite(e[esc]))


def test_functional_equation(H, rng):
    dyn = Dynamics(H)
    x = rng.uniform(-3, 3, 600) + 0j
    y = rng.uniform(-3, 3, 600) + 0j
    _, _, _, esc = dyn.green_arrays(x, y, "plus")
    x, y = x[esc][:200], y[esc][:200]
    assert len(x) == 200
    v0, e0, _, _ = dyn.green_arrays(x, y, "plus")
    v1, e1, _, _ = dyn.green_arrays(*H.forward(x, y), "plus")
    assert np.all(np.abs(v1 - 2 * v0) <= 1e-6 + e1 + 2 * e0)


def test_functional_equation_minus(H, rng):
    dyn = Dynamics(H)
    x = 10 * np.exp(2j * np.pi * rng.uniform(size=50))
    y = 0.5 * rng.normal(size=50) + 0j
    v0, e0, _, esc0 = dyn.green_arrays(x, y, "minus")
    v1, e1, _, esc1 = dyn.green_arrays(*H.inverse(x, y), "minus")
    assert esc0.all() and esc1.all()
    assert np.all(np.abs(v1 - 2 * v0) <= 1e-6 + e1 + 2 * e0)


def test_monotone_refinement(rng):
    for G in domination_suite():
        dyn = Dynamics(G)
        for _ in range(10):
            z = Point2(complex(*rng.uniform(-2, 2, 2)), complex(*rng.uniform(-2, 2, 2)))
            prev = None
            for budget in (1, 2, 3, 5, 8, 20, 200):
                g = dyn.green(z, "plus", budget)
                if prev is not None:
                    assert g.error_bound <= prev.error_bound
                    if prev.escaped:
                        assert abs(g.value - prev.value) <= prev.error_bound + 1e-12
                prev = g


def test_growth_bound(rng):
    for G in domination_suite():
        dyn = Dynamics(G)
        const = dyn.growth_constant(1e4)
        assert math.isfinite(const)
        y = 1e4 * 10 ** rng.uniform(0, 3, 50) * np.exp(2j * np.pi * rng.uniform(size=50))
        x = np.abs(y) * rng.uniform(size=50) * np.exp(2j * np.pi * rng.uniform(size=50))
        v, e, _, _ = dyn.green_arrays(x, y, "plus")
        assert np.all(np.abs(v - np.log(np.abs(y))) <= const + e)


def test_far_window_grid_tracks_log_y(H):
    job = GridJob(center=(0.0, 1e4), width=10.0, height=10.0, resolution=(16, 16), mode=GridMode.G_PLUS)
    res = rasterize_grid(H, job)
    ys = np.array([job.row_params(r)[1] for r in range(16)])
    assert np.all(np.abs(res.values - np.log(ys)[:, None]) <= 2.0)


def test_green_max_is_exact_max(H, rng):
    dyn = Dynamics(H)
    for _ in range(30):
        z = Point2(complex(*rng.uniform(-4, 4, 2)), complex(*rng.uniform(-4, 4, 2)))
        gp, gm, g = dyn.green(z, "plus"), dyn.green(z, "minus"), dyn.green_max(z)
        assert g.value == max(gp.value, gm.value)


def test_green_max_examples(H, rng):
    dyn = Dynamics(H)
    # a point that escapes forward while its backward orbit stays bounded
    for _ in range(2000):
        z = Point2(*(rng.uniform(-2.5, 2.5, 2) + 0j))
        c = dyn.classify(z)
        if c.kind is EscapeKind.ESCAPED_FORWARD:
            break
    else:
        pytest.fail("no forward-only escaping point found")
    g, gp = dyn.green_max(z), dyn.green(z, "plus")
    assert g.value == gp.value > 0
    g = green_max(H, Point2(10, 0))
    gm = green(H, Point2(10, 0), "minus")
    assert gm.escaped and g.value == gm.value > 0


def test_green_budget_validation(H):
    with pytest.raises(ValueError):
        green(H, Point2(0, 0), "plus", 0)


# -- classification


def test_classify_examples(H):
    assert classify_point(H, Point2(0, 0)).kind is EscapeKind.IN_K_CANDIDATE
    assert classify_point(H, Point2(2, 2)).kind is EscapeKind.IN_K_CANDIDATE
    c = classify_point(H, Point2(0, 10))
    assert 0 <= c.forward_step <= 2
    fwd = classify_point(H, Point2(0, 10), direction="forward")
    assert fwd.kind is EscapeKind.ESCAPED_FORWARD and fwd.forward_step == c.forward_step


def test_classify_consistent_with_green(H, rng):
    dyn = Dynamics(H)
    for _ in range(100):
        z = Point2(*(rng.uniform(-3, 3, 2) + 0j))
        c = dyn.classify(z)
        assert (c.forward_step >= 0) == dyn.green(z, "plus").escaped
        assert (c.backward_step >= 0) == dyn.green(z, "minus").escaped


# -- domination


def test_domination_quadratic(H):
    rep = verify_green_domination(H, 1e3, 100)
    assert rep["D2"].certified == 100 and rep["D2"].expected == "G- < G+"
    assert rep["D1"].certified == 100 and rep["D1"].expected == "G+ < G-"


@pytest.mark.parametrize("G", domination_suite(), ids=lambda g: g.name)
def test_domination_suite(G):
    rep = verify_green_domination(G, 1e3, 100)
    assert rep["D2"].all_certified and rep["D1"].all_certified


def test_domination_bookkeeping_near_radius(H):
    R = filtration_radius(H).R
    rep = verify_green_domination(H, R * 1.01, 200, seed=3)
    for r in rep.values():
        assert r.certified + len(r.inconclusive) == r.samples


# -- grids


def test_single_pixel_gmax_at_origin(H):
    res = rasterize_grid(H, GridJob(center=(0, 0), width=1e-3, height=1e-3, resolution=(1, 1), mode=GridMode.G_MAX))
    assert res.values.shape == (1, 1) and res.values[0, 0] == 0


def test_k_membership_grid(H):
    job = GridJob(center=(0, 0), width=5, height=5, resolution=(64, 64), mode=GridMode.K_MEMBERSHIP)
    res = rasterize_grid(H, job)
    assert res.summary["k_candidates"] > 0
    # pixel containing the elliptic fixed point (0, 0)
    assert res.values[32, 32] == 3
    assert set(np.unique(res.values)) <= {0, 1, 2, 3}


def test_grid_worker_independence(H):
    job = GridJob(center=(0.5, -0.2), width=4, height=3, resolution=(40, 30), mode=GridMode.G_MAX, budget=50)
    a = rasterize_grid(H, job, workers=1)
    b = rasterize_grid(H, job, workers=6)
    assert a.values.tobytes() == b.values.tobytes()
    assert a.summary == b.summary


def test_grid_job_validation():
    with pytest.raises(ValueError):
        GridJob(resolution=(0, 4))
    with pytest.raises(ValueError):
        GridJob(budget=0)
