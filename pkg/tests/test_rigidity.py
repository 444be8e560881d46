import cmath
import math

import numpy as np
import pytest

from henon_rigidity import (
    DegreeMismatch,
    Point2,
    chain_expand,
    check_commute,
    conjugate_by_translation,
    find_twist,
    fixed_points,
    map_equal_within,
    rigidity_report,
    simple_henon,
    verify_squares_commute,
    admissible_twist_group,
)
from henon_rigidity.fixtures import OMEGA, twisted
from henon_rigidity.maps import random_chain, random_factor, HenonChain
from henon_rigidity.rigidity import seed_lattice, twist_residual


def unrelated_pair(seed):
    rng = np.random.default_rng(seed)
    return HenonChain((random_factor(rng, 2),)), HenonChain((random_factor(rng, 2),))


def sweep_min_residual(F, H, n=360):
    """Smallest coefficient residual of ``F o H = C_eta o H o F`` over ``n`` unit-circle etas."""
    fh = chain_expand(H.then(F))
    hf = chain_expand(F.then(H))
    best = math.inf
    for k in range(n):
        eta = cmath.exp(2j * math.pi * k / n)
        best = min(best, map_equal_within(fh, hf.scale(eta, 1 / eta), 0.0)[1])
    return best


# -- twists


def test_twist_of_map_with_itself(H):
    tw = find_twist(H, H)
    assert tw is not None and abs(tw.eta - 1) < 1e-12 and tw.residual < 1e-12


def test_twist_example_pair(pair):
    F, H = pair
    tw = find_twist(F, H)
    assert tw is not None
    assert abs(tw.eta - OMEGA**2) <= 1e-9
    assert abs(tw.eta - cmath.exp(-2j * math.pi / 3)) <= 1e-9
    assert tw.residual <= 1e-9
    assert tw.right_relation == "H o F o C_eta"
    assert tw.witness_defect < 1e-12
    assert twist_residual(F, H, OMEGA) > 0.1


@pytest.mark.parametrize("seed", range(5))
def test_no_twist_for_unrelated_pair(seed):
    F, H = unrelated_pair(seed)
    try:
        tw = find_twist(F, H)
    except DegreeMismatch:
        tw = None
    assert tw is None
    assert sweep_min_residual(F, H) > 1e-3


def test_twist_from_group_members():
    for p in ([0, 0, 1], [0, 0, 0, 0, 1], [0, 0, 0, 0, 0, 2j]):
        H = simple_henon(p, delta=0.7)
        for eta0 in admissible_twist_group(H).elements():
            F = twisted(H, eta0)
            tw = find_twist(F, H)
            assert tw is not None and tw.residual <= 1e-9
            assert abs(abs(tw.eta) - 1) <= 1e-6
            assert abs(tw.eta - eta0**2) <= 1e-8


def test_twist_mismatched_supports():
    H = simple_henon([0, 0, 1])
    F = simple_henon([0, 0, 0, 1])
    with pytest.raises(DegreeMismatch):
        find_twist(F, H)


# -- commutation


def test_commute_examples(H, pair):
    assert check_commute(H, H) == (True, 0.0)
    F, H = pair
    ok, res = check_commute(F, H)
    assert not ok and res >= 0.1
    ok, res = verify_squares_commute(F, H)
    assert ok and res <= 1e-9


def test_powers_commute(H):
    assert verify_squares_commute(H.power(2), H)[0]
    assert check_commute(H.power(2), H)[0]


def test_unrelated_squares_do_not_commute():
    for seed in range(3):
        F, H = unrelated_pair(seed)
        assert not verify_squares_commute(F, H)[0]


def test_squares_commute_symmetric(pair):
    F, H = pair
    a = verify_squares_commute(F, H)
    b = verify_squares_commute(H, F)
    assert a[0] == b[0]
    assert abs(a[1] - b[1]) <= 1e-12 * (1 + a[1])
    for seed in range(3):
        F, H = unrelated_pair(seed)
        assert verify_squares_commute(F, H)[0] == verify_squares_commute(H, F)[0]


def test_commute_implies_squares_commute(H):
    suite = [(H, H), (H.power(2), H), (twisted(H, OMEGA), H)] + [unrelated_pair(s) for s in range(3)]
    for F, G in suite:
        if check_commute(F, G)[0]:
            assert verify_squares_commute(F, G)[0]


# -- fixed points


def close(p, q, tol):
    return math.hypot(abs(p.x - q.x), abs(p.y - q.y)) <= tol


def test_fixed_points_order_one(H):
    fp = fixed_points(H, 1)
    assert len(fp.points) == 2
    for q in (Point2(0, 0), Point2(2, 2)):
        assert any(close(p, q, 1e-8) for p in fp.points)
    for p, r in zip(fp.points, fp.residuals):
        assert r <= 1e-8 * (1 + p.norm())


def test_fixed_points_conjugation(H):
    fp = fixed_points(conjugate_by_translation(H, Point2(2, 2)), 1)
    assert len(fp.points) == 2
    for q in (Point2(-2, -2), Point2(0, 0)):
        assert fp.contains(q)


def test_fixed_points_order_two(H):
    f1, f2 = fixed_points(H, 1), fixed_points(H, 2)
    assert all(f2.contains(p) for p in f1.points)
    assert len(f2.points) == 4
    for p in f2.points:
        q = H(H(p))
        assert close(p, q, 1e-8 * (1 + p.norm()))
    s3 = math.sqrt(3)
    assert f2.contains(Point2(complex(-1, s3), complex(-1, -s3)))
    assert f2.contains(Point2(complex(-1, -s3), complex(-1, s3)))


def test_fixed_points_distinct_and_deterministic(rng):
    G = random_chain(rng, 2)
    a, b = fixed_points(G, 1), fixed_points(G, 1)
    assert a.points == b.points
    for i, p in enumerate(a.points):
        for q in a.points[i + 1:]:
            assert not close(p, q, 1e-6)


def test_seed_lattice_inside_bidisk():
    x, y = seed_lattice(4.0)
    assert len(x) == 17 * 17 * 4
    assert np.all(np.abs(x) <= 4.0 * math.sqrt(2)) and np.all(np.abs(y) <= 4.0 * math.sqrt(2))


def test_fixed_points_order_validation(H):
    with pytest.raises(ValueError):
        fixed_points(H, 3)


# -- report


def test_report_self_pair(H):
    rep = rigidity_report(H, H)
    assert rep.twist is not None and abs(rep.twist.eta - 1) < 1e-12
    assert rep.commute_FH and rep.commute_squares


def test_report_example_pair(pair):
    F, H = pair
    rep = rigidity_report(F, H)
    assert abs(rep.twist.eta - OMEGA**2) <= 1e-9
    assert rep.commute_FH is False and rep.commute_squares is True
    assert rep.jacobians == (pytest.approx(1), pytest.approx(1))
    d = rep.to_dict()
    assert d["twist"]["eta"] == pytest.approx([OMEGA.real**2 - OMEGA.imag**2, 2 * OMEGA.real * OMEGA.imag])
    text = rep.to_text()
    assert "commute_squares: True" in text and "commute_FH: False" in text


def test_report_cap(H):
    big = simple_henon([0, 0, 0, 0, 1])
    rep = rigidity_report(big, H.power(2), cap=64)
    assert rep.commute_squares is None
    assert any("squares not computed (cap)" in n for n in rep.notes)
    assert rep.commute_FH is not None


def test_report_invariant_commute_implies_unit_twist(H):
    for F in (H, H.power(2)):
        rep = rigidity_report(F, H)
        if rep.commute_FH:
            assert rep.twist is not None and abs(rep.twist.eta - 1) < 1e-6
