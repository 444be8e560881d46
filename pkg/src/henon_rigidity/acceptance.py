"""Exit criteria for the package, runnable from the CLI (``henon verify``) and pytest.

Each criterion returns a :class:`CriterionResult`; tolerances are fixed here
and nowhere else. Oracles are deliberately independent of the code paths they
check: direct orbit iteration, pointwise evaluation of the original chain,
hand-solved fixed points, and 50-digit finite differences.
"""

from __future__ import annotations

import cmath
import math
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import mpmath
import numpy as np

from .dynamics import Dynamics, GridJob, GridMode, rasterize_grid, verify_green_domination
from .fixtures import OMEGA, domination_suite, example_pair, quadratic_henon
from .io import grid_csv, grid_pgm
from .maps import ElementaryFactor, HenonChain, Point2, chain_degree, chain_jacobian_det, conjugate_by_translation, random_chain
from .normal_form import admissible_twist_group, chain_normalize_b_only, origin_fixed_form, square_normal_form
from .poly import PolyMap2, Polynomial, map_compose, map_equal_within
from .rigidity import check_commute, find_twist, fixed_points, verify_squares_commute
from .maps import chain_expand


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number}. {self.name}: {self.detail}"


# ---------------------------------------------------------------------------
# helpers shared with the tests


def ball_points(rng: np.random.Generator, n: int, radius: float) -> tuple[np.ndarray, np.ndarray]:
    """Uniform points in the ball ``||z|| <= radius`` of C^2 = R^4."""
    v = rng.normal(size=(n, 4))
    v /= np.linalg.norm(v, axis=1)[:, None]
    v *= radius * rng.uniform(0, 1, n)[:, None] ** 0.25
    return v[:, 0] + 1j * v[:, 1], v[:, 2] + 1j * v[:, 3]


def pointwise_rel_error(a, b) -> np.ndarray:
    """``||a - b|| / max(1, ||a||)``; NaN where the reference ``a`` overflowed."""
    na = np.hypot(np.abs(a[0]), np.abs(a[1]))
    with np.errstate(all="ignore"):
        e = np.hypot(np.abs(a[0] - b[0]), np.abs(a[1] - b[1])) / np.maximum(1.0, na)
    return np.where(np.isfinite(na), e, np.nan)


def finite_points(rng, n, radius, reference, tries: int = 50):
    """``n`` ball points at which ``reference`` is finite (rejection sampling)."""
    xs, ys = [], []
    have = 0
    for _ in range(tries):
        x, y = ball_points(rng, n, radius)
        with np.errstate(all="ignore"):
            a = reference(x, y)
        ok = np.isfinite(a[0]) & np.isfinite(a[1])
        xs.append(x[ok])
        ys.append(y[ok])
        have += int(ok.sum())
        if have >= n:
            break
    return np.concatenate(xs)[:n], np.concatenate(ys)[:n]


def origin_fixing(H: HenonChain) -> HenonChain:
    """Shift the last factor so the chain fixes the origin."""
    x0, y0 = H.forward(0j, 0j)
    *rest, last = H.factors
    return HenonChain(tuple(rest) + (ElementaryFactor(last.b, last.c - x0, last.delta, last.p - y0),))


def mp_roundtrip_error(H: HenonChain, x: complex, y: complex, dps: int = 50) -> float:
    with mpmath.workdps(dps):
        X, Y = H.forward(mpmath.mpc(x), mpmath.mpc(y))
        u, v = H.inverse(X, Y)
        return float(mpmath.sqrt(abs(u - x) ** 2 + abs(v - y) ** 2))


def mp_fd_jacobian(H: HenonChain, x: complex, y: complex, dps: int = 60, h: float = 1e-25) -> complex:
    """Central-difference Jacobian determinant in ``dps``-digit arithmetic."""
    with mpmath.workdps(dps):
        x, y, h = mpmath.mpc(x), mpmath.mpc(y), mpmath.mpf(h)
        a, b = H.forward(x + h, y), H.forward(x - h, y)
        c, d = H.forward(x, y + h), H.forward(x, y - h)
        j11, j21 = (a[0] - b[0]) / (2 * h), (a[1] - b[1]) / (2 * h)
        j12, j22 = (c[0] - d[0]) / (2 * h), (c[1] - d[1]) / (2 * h)
        return complex(j11 * j22 - j12 * j21)


def green_plus_by_iteration(x: complex, y: complex, steps: int = 6) -> float:
    """``log|y_n| / 2^n`` for ``(x, y) -> (y, y^2 - x)``, iterated directly."""
    for _ in range(steps):
        x, y = y, y * y - x
    return math.log(abs(y)) / 2**steps


def random_poly(rng, deg: int) -> Polynomial:
    c = rng.normal(size=deg + 1) + 1j * rng.normal(size=deg + 1)
    if deg >= 0 and c[-1] == 0:
        c[-1] = 1
    return Polynomial(c)


# ---------------------------------------------------------------------------
# criteria


def criterion_example_pair() -> CriterionResult:
    F, H = example_pair()
    tw = find_twist(F, H, 1e-9)
    ok_tw = tw is not None and abs(tw.eta - OMEGA**2) <= 1e-9 and tw.residual <= 1e-9
    c1, r1 = check_commute(F, H, 1e-9)
    c2, r2 = verify_squares_commute(F, H, 1e-9)
    passed = ok_tw and (not c1) and r1 >= 0.1 and c2 and r2 <= 1e-9
    eta_err = abs(tw.eta - OMEGA**2) if tw else math.inf
    return CriterionResult(1, "Example pair twist/commutation", passed,
                           f"|eta-omega^2|={eta_err:.2e}, twist residual={tw.residual if tw else math.inf:.2e}, "
                           f"commute(F,H)={c1} (residual {r1:.3g}), commute(F^2,H^2)={c2} (residual {r2:.2e})")


def criterion_normal_forms(seed: int = 0) -> CriterionResult:
    rng = np.random.default_rng(seed)
    worst_sq = worst_b = worst_o = worst_p0 = 0.0
    c_nonzero = 0
    for _ in range(100):
        H = random_chain(rng, int(rng.integers(1, 4)))
        N = square_normal_form(H)
        assert len(N) == 2 * len(H) and all(f.is_normal() for f in N.factors)

        def h2(x, y, H=H):
            return H.forward(*H.forward(x, y))

        x, y = finite_points(rng, 100, 5.0, h2)
        worst_sq = max(worst_sq, float(np.nanmax(pointwise_rel_error(h2(x, y), N.forward(x, y)))))

        Hb = random_chain(rng, int(rng.integers(2, 4)), zero_c=True)
        Nb = chain_normalize_b_only(Hb)
        x, y = finite_points(rng, 100, 5.0, Hb.forward)
        worst_b = max(worst_b, float(np.nanmax(pointwise_rel_error(Hb.forward(x, y), Nb.forward(x, y)))))

        Ho = origin_fixing(random_chain(rng, int(rng.integers(1, 4))))
        No = origin_fixed_form(Ho)
        x, y = finite_points(rng, 100, 5.0, Ho.forward)
        worst_o = max(worst_o, float(np.nanmax(pointwise_rel_error(Ho.forward(x, y), No.forward(x, y)))))
        worst_p0 = max(worst_p0, max(abs(f.p(0j)) for f in No.factors))
        c_nonzero += sum(f.c != 0 for f in No.factors)
    passed = max(worst_sq, worst_b, worst_o) <= 1e-8 and worst_p0 <= 1e-10 and c_nonzero == 0
    return CriterionResult(2, "Normal-form exactness", passed,
                           f"square {worst_sq:.2e}, b-only {worst_b:.2e}, origin-fixed {worst_o:.2e} (<= 1e-8); "
                           f"max |p_i(0)| {worst_p0:.1e} (<= 1e-10)")


def criterion_twist_group() -> CriterionResult:
    H = quadratic_henon()
    G = admissible_twist_group(H)
    roots = [cmath.exp(2j * math.pi * k / 3) for k in range(3)]
    exact = G.order == 3 and all(min(abs(e - r) for r in roots) <= 1e-12 for e in G.elements())
    EH = chain_expand(H)
    worst = 0.0
    for eta in G.elements():
        lhs = map_compose(PolyMap2.twist(eta), EH)
        rhs = map_compose(EH, PolyMap2.twist(1 / eta))
        worst = max(worst, map_equal_within(lhs, rhs, 1e-9)[1])
    return CriterionResult(3, "Twist group of y^2", exact and worst <= 1e-9,
                           f"group order {G.order} (expected 3), max residual C_eta H vs H C_eta^-1 {worst:.2e}")


def criterion_green(seed: int = 0) -> CriterionResult:
    H = quadratic_henon()
    dyn = Dynamics(H)
    g = dyn.green(Point2(0, 10), "plus")
    oracle = green_plus_by_iteration(0.0, 10.0)
    ok_value = abs(g.value - 2.3022) <= 1e-3 and abs(g.value - oracle) <= 1e-3

    rng = np.random.default_rng(seed)
    xs, ys = [], []
    while len(xs) < 200:
        u = rng.uniform(-3, 3, 400)
        v = rng.uniform(-3, 3, 400)
        _, _, _, esc = dyn.green_arrays(u, v, "plus")
        xs.extend(u[esc].tolist())
        ys.extend(v[esc].tolist())
    x = np.array(xs[:200], dtype=complex)
    y = np.array(ys[:200], dtype=complex)
    v0, e0, _, _ = dyn.green_arrays(x, y, "plus")
    hx, hy = H.forward(x, y)
    v1, e1, _, s1 = dyn.green_arrays(hx, hy, "plus")
    fe = np.abs(v1 - 2 * v0) - (1e-6 + e1 + 2 * e0)
    ok_fe = bool(np.all(fe <= 0) and s1.all())

    zero = all(dyn.green_max(Point2(a, a)).value == 0.0 for a in (0, 2))

    r = 1e4
    const = dyn.growth_constant(r)
    ry = r * 10 ** rng.uniform(0, 2, 50)
    yy = ry * np.exp(2j * np.pi * rng.uniform(0, 1, 50))
    xx = ry * rng.uniform(0, 1, 50) * np.exp(2j * np.pi * rng.uniform(0, 1, 50))
    vg, eg, _, _ = dyn.green_arrays(xx, yy, "plus")
    dev = np.abs(vg - np.log(np.abs(yy))) - eg
    ok_growth = math.isfinite(const) and bool(np.all(dev <= const))
    passed = ok_value and ok_fe and zero and ok_growth
    return CriterionResult(4, "Green functions", passed,
                           f"G+(0,10)={g.value:.6f} (oracle {oracle:.6f}, err bound {g.error_bound:.1e}); "
                           f"functional eq worst slack {fe.max():.1e}; G(fixed)=0: {zero}; "
                           f"growth max {dev.max():.2e} <= const {const:.2e}")


def criterion_domination(seed: int = 0) -> CriterionResult:
    parts = []
    passed = True
    for H in domination_suite():
        rep = verify_green_domination(H, 1e3, 100, seed=seed)
        ok = rep["D2"].certified == 100 and rep["D1"].certified == 100
        passed &= ok
        parts.append(f"{H.name} (d={chain_degree(H)}): D2 {rep['D2'].certified}/100, D1 {rep['D1'].certified}/100")
    return CriterionResult(5, "Green domination at R0=1e3", passed, "; ".join(parts))


def criterion_fixed_points() -> CriterionResult:
    H = quadratic_henon()
    fp = fixed_points(H, 1)
    expected = [Point2(0, 0), Point2(2, 2)]
    exact = len(fp.points) == 2 and all(
        min(math.hypot(abs(p.x - q.x), abs(p.y - q.y)) for p in fp.points) <= 1e-8 for q in expected)
    A = Point2(2, 2)
    fc = fixed_points(conjugate_by_translation(H, A), 1)
    moved = [Point2(p.x - A.x, p.y - A.y) for p in fp.points]
    equi = len(fc.points) == len(moved) and all(fc.contains(q) for q in moved)
    f2 = fixed_points(H, 2)
    sup = all(f2.contains(p) for p in fp.points)
    return CriterionResult(6, "Fixed points", exact and equi and sup,
                           f"order 1: {len(fp.points)} points match {{(0,0),(2,2)}}: {exact}; "
                           f"conjugation equivariance: {equi}; order-2 set ({len(f2.points)} points) contains order 1: {sup}")


def criterion_algebra(seed: int = 0) -> CriterionResult:
    rng = np.random.default_rng(seed)
    ring = hom = degree_law = 0.0
    deg_ok = True
    inv_mp = inv_f64 = 0.0
    jac = jac_spread = 0.0
    for _ in range(100):
        a, b, c = (random_poly(rng, int(rng.integers(0, 6))) for _ in range(3))
        scale = max(1.0, *(float(np.max(np.abs(p.coeffs))) ** 3 for p in (a, b, c) if not p.is_zero()))
        ring = max(ring,
                   (a * b).max_abs_diff(b * a) / scale,
                   ((a * b) * c).max_abs_diff(a * (b * c)) / scale,
                   (a * (b + c)).max_abs_diff(a * b + a * c) / scale)
        pts = rng.normal(size=20) + 1j * rng.normal(size=20)
        ab = a(pts) * b(pts)
        hom = max(hom, float(np.max(np.abs((a * b)(pts) - ab) / (1 + np.abs(ab)))))
        p, q = random_poly(rng, int(rng.integers(1, 6))), random_poly(rng, int(rng.integers(1, 4)))
        deg_ok &= p.compose(q).degree() == p.degree() * q.degree()

        H = random_chain(rng, int(rng.integers(1, 4)))
        r = 2 * np.sqrt(rng.uniform(0, 1, (2, 50)))
        ph = np.exp(2j * np.pi * rng.uniform(0, 1, (2, 50)))
        x, y = r[0] * ph[0], r[1] * ph[1]
        u, v = H.inverse(*H.forward(x, y))
        nz = 1 + np.hypot(np.abs(x), np.abs(y))
        inv_f64 = max(inv_f64, float(np.max(np.hypot(np.abs(u - x), np.abs(v - y)) / nz)))
        inv_mp = max(inv_mp, max(mp_roundtrip_error(H, complex(x[i]), complex(y[i])) / nz[i] for i in range(50)))

        J = chain_jacobian_det(H)
        dets = [mp_fd_jacobian(H, complex(x[i]), complex(y[i])) for i in range(5)]
        jac = max(jac, max(abs(dv - J) / abs(J) for dv in dets))
        jac_spread = max(jac_spread, max(abs(dv - dets[0]) / abs(dets[0]) for dv in dets))
    passed = ring <= 1e-12 and hom <= 1e-9 and deg_ok and inv_mp <= 1e-8 and jac <= 1e-6 and jac_spread <= 1e-6
    return CriterionResult(7, "Algebra properties", passed,
                           f"ring {ring:.1e}, eval-hom {hom:.1e}, degree law {deg_ok}, inverse roundtrip "
                           f"{inv_mp:.1e} (50-digit; float64 {inv_f64:.1e}), Jacobian vs FD {jac:.1e}, "
                           f"spread {jac_spread:.1e}")


def criterion_determinism(res: int = 128) -> CriterionResult:
    H = quadratic_henon()
    t0 = time.perf_counter()
    outs = []
    for mode in (GridMode.G_MAX, GridMode.K_MEMBERSHIP):
        job = GridJob(center=(0.0, 0.0), width=5.0, height=5.0, resolution=(res, res), mode=mode, budget=200)
        runs = [rasterize_grid(H, job, workers=w) for w in (1, 1, 8)]
        csvs = [grid_csv(r).encode() for r in runs]
        pgms = [grid_pgm(r) for r in runs]
        outs.append(len(set(csvs)) == 1 and len({p[0] for p in pgms}) == 1 and len({p[1] for p in pgms}) == 1)
    elapsed = time.perf_counter() - t0
    return CriterionResult(8, "Rasterization determinism", all(outs) and elapsed <= 60,
                           f"CSV/PGM identical across runs and 1 vs 8 workers: {all(outs)}; {elapsed:.1f}s (<= 60s)")


CRITERIA = (
    criterion_example_pair,
    criterion_normal_forms,
    criterion_twist_group,
    criterion_green,
    criterion_domination,
    criterion_fixed_points,
    criterion_algebra,
    criterion_determinism,
)


def run_all() -> list[CriterionResult]:
    return [c() for c in CRITERIA]
