"""Twisted commutation, commutation of squares, and fixed points.

The twist of a pair ``(F, H)`` is a unimodular ``eta`` with
``F o H = C_eta o H o F`` where ``C_eta(x, y) = (eta*x, y/eta)``. All checks
run on fully expanded coordinate polynomials and compare coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import filtration_radius
from .maps import DEFAULT_EXPANSION_CAP, ExpansionTooLarge, HenonChain, Point2, chain_degree, chain_expand, chain_jacobian_det
from .poly import DEFAULT_TOL, BiPoly, PolyMap2, map_equal_within

MERGE_RADIUS = 1e-6
FIXED_POINT_RESIDUAL = 1e-8


class DegreeMismatch(ValueError):
    """``F o H`` and ``H o F`` have different term supports."""


def _significant_support(m: PolyMap2, tol: float) -> tuple[frozenset, frozenset]:
    return (
        frozenset(k for k, v in m.first.terms.items() if abs(v) > tol),
        frozenset(k for k, v in m.second.terms.items() if abs(v) > tol),
    )


def _precompose_twist(m: PolyMap2, eta: complex) -> PolyMap2:
    """``m o C_eta``: substitute ``x -> eta*x``, ``y -> y/eta``."""
    inv = 1 / eta

    def sub(p: BiPoly) -> BiPoly:
        return BiPoly({(i, j): c * eta**i * inv**j for (i, j), c in p.terms.items()})

    return PolyMap2(sub(m.first), sub(m.second))


@dataclass(frozen=True)
class TwistCandidate:
    """``F o H = C_eta o H o F`` holds with coefficient residual ``residual``.

    ``right_relation`` says which of ``H o F o C_eta`` or ``H o F o C_eta^-1``
    also equals ``F o H`` (or ``"neither"``), with the two residuals kept.
    """

    eta: complex
    residual: float
    witness_defect: float
    relation: str = "FH_eq_Ceta_HF"
    right_relation: str = "neither"
    right_residuals: tuple[float, float] = (math.inf, math.inf)


def _expand_pair(F: HenonChain, H: HenonChain, cap: int) -> tuple[PolyMap2, PolyMap2]:
    fh = chain_expand(H.then(F), cap)  # F o H
    hf = chain_expand(F.then(H), cap)  # H o F
    return fh, hf


def find_twist(F: HenonChain, H: HenonChain, tol: float = DEFAULT_TOL,
               cap: int = DEFAULT_EXPANSION_CAP) -> TwistCandidate | None:
    """Detect ``eta`` with ``F o H = C_eta o H o F``.

    ``eta`` is read off as the ratio of the largest first-coordinate
    coefficients of ``F o H`` and ``H o F``; the second coordinates give
    ``1/eta`` independently, and the relation is then checked on every
    coefficient. Raises :class:`DegreeMismatch` when the supports differ.
    """
    fh, hf = _expand_pair(F, H, cap)
    if _significant_support(fh, tol) != _significant_support(hf, tol):
        raise DegreeMismatch("F o H and H o F have different supports")
    k1 = max(fh.first.terms, key=lambda k: (abs(fh.first[k]), k))
    k2 = max(fh.second.terms, key=lambda k: (abs(fh.second[k]), k))
    if hf.first[k1] == 0 or hf.second[k2] == 0:
        return None
    eta = fh.first[k1] / hf.first[k1]
    eta_inv = fh.second[k2] / hf.second[k2]
    ok, residual = map_equal_within(fh, hf.scale(eta, 1 / eta), tol)
    if not ok:
        return None
    r_same = map_equal_within(fh, _precompose_twist(hf, eta), tol)[1]
    r_inv = map_equal_within(fh, _precompose_twist(hf, 1 / eta), tol)[1]
    if r_same <= tol:
        right = "H o F o C_eta"
    elif r_inv <= tol:
        right = "H o F o C_eta^-1"
    else:
        right = "neither"
    return TwistCandidate(eta, residual, abs(eta * eta_inv - 1), "FH_eq_Ceta_HF", right, (r_same, r_inv))


def twist_residual(F: HenonChain, H: HenonChain, eta: complex, cap: int = DEFAULT_EXPANSION_CAP) -> float:
    """Coefficient residual of ``F o H = C_eta o H o F`` for a given ``eta``."""
    fh, hf = _expand_pair(F, H, cap)
    return map_equal_within(fh, hf.scale(eta, 1 / eta), 0.0)[1]


def check_commute(F: HenonChain, H: HenonChain, tol: float = DEFAULT_TOL,
                  cap: int = DEFAULT_EXPANSION_CAP) -> tuple[bool, float]:
    fh, hf = _expand_pair(F, H, cap)
    return map_equal_within(fh, hf, tol)


def verify_squares_commute(F: HenonChain, H: HenonChain, tol: float = DEFAULT_TOL,
                           cap: int = DEFAULT_EXPANSION_CAP) -> tuple[bool, float]:
    """Check ``F^2 o H^2 = H^2 o F^2``; expansion of degree ``(d_F d_H)^2`` must fit ``cap``."""
    return check_commute(F.power(2), H.power(2), tol, cap)


# ---------------------------------------------------------------------------
# fixed points


@dataclass
class FixedPointSet:
    points: list[Point2]
    residuals: list[float]
    seeds_used: int
    seeds_failed: int = 0
    expected_count: int = 0

    def __len__(self) -> int:
        return len(self.points)

    def contains(self, p: Point2, radius: float = MERGE_RADIUS) -> bool:
        return any(_dist(p, q) <= radius for q in self.points)


def _dist(a, b) -> float:
    return math.hypot(abs(a[0] - b[0]), abs(a[1] - b[1]))


def seed_lattice(R: float, n: int = 17, phases: tuple[float, ...] = (0.0, 1.1)) -> tuple[np.ndarray, np.ndarray]:
    """``n x n`` real lattice on ``[-R, R]^2``, rotated by each pair of phases.

    Phase ``0`` gives real seeds; the second phase is generic so that orbits of
    real maps are not trapped on a symmetric real subspace.
    """
    u = np.linspace(-R, R, n)
    gx, gy = np.meshgrid(u, u, indexing="ij")
    xs, ys = [], []
    for px in phases:
        for py in phases:
            xs.append(gx.ravel() * np.exp(1j * px))
            ys.append(gy.ravel() * np.exp(1j * py))
    return np.concatenate(xs), np.concatenate(ys)


def _newton(G: HenonChain, x: np.ndarray, y: np.ndarray, steps: int, blowup: float):
    """Damped Newton on ``z -> G(z) - z`` with a central-difference Jacobian."""

    def resid(x, y):
        with np.errstate(all="ignore"):
            gx, gy = G.forward(x, y)
        return gx - x, gy - y

    def norm(fx, fy):
        r = np.hypot(np.abs(fx), np.abs(fy))
        return np.where(np.isfinite(r), r, np.inf)

    fx, fy = resid(x, y)
    r = norm(fx, fy)
    live = np.isfinite(r)
    for _ in range(steps):
        h = 1e-7 * (1 + np.hypot(np.abs(x), np.abs(y)))
        a1, a2 = resid(x + h, y)
        b1, b2 = resid(x - h, y)
        c1, c2 = resid(x, y + h)
        e1, e2 = resid(x, y - h)
        j11, j21 = (a1 - b1) / (2 * h), (a2 - b2) / (2 * h)
        j12, j22 = (c1 - e1) / (2 * h), (c2 - e2) / (2 * h)
        with np.errstate(all="ignore"):
            det = j11 * j22 - j12 * j21
            dx = (j22 * fx - j12 * fy) / det
            dy = (-j21 * fx + j11 * fy) / det
        t = np.ones_like(r)
        with np.errstate(all="ignore"):
            nx, ny = x - dx, y - dy
        nfx, nfy = resid(nx, ny)
        nr = norm(nfx, nfy)
        for _ in range(30):
            worse = live & (nr > r)
            if not worse.any():
                break
            t = np.where(worse, t / 2, t)
            with np.errstate(all="ignore"):
                nx = np.where(worse, x - t * dx, nx)
                ny = np.where(worse, y - t * dy, ny)
            fx2, fy2 = resid(nx, ny)
            nfx = np.where(worse, fx2, nfx)
            nfy = np.where(worse, fy2, nfy)
            nr = np.where(worse, norm(fx2, fy2), nr)
        accept = live & np.isfinite(nr) & (nr <= r)
        x, y = np.where(accept, nx, x), np.where(accept, ny, y)
        fx, fy = np.where(accept, nfx, fx), np.where(accept, nfy, fy)
        r = np.where(accept, nr, r)
        live &= np.isfinite(x) & np.isfinite(y) & (np.hypot(np.abs(x), np.abs(y)) < blowup)
        if not (live & (r > 1e-15 * (1 + np.hypot(np.abs(x), np.abs(y))))).any():
            break
    return x, y, r, live


def fixed_points(H: HenonChain, order: int = 1, seeds_per_axis: int = 17, steps: int = 60,
                 merge_radius: float = MERGE_RADIUS) -> FixedPointSet:
    """Fixed points of ``H`` (order 1) or ``H^2`` (order 2) by Newton from a seed lattice.

    Seeds fill the bidisk of the filtration radius, which contains every
    point with bounded forward and backward orbit. Converged points are
    re-verified by direct evaluation and merged within ``merge_radius``; the
    output order is canonical, so it does not depend on seed order.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    G = H.power(order)
    R = filtration_radius(H).R
    sx, sy = seed_lattice(R, seeds_per_axis)
    x, y, r, live = _newton(G, sx, sy, steps, blowup=100 * R)
    cands = []
    for xi, yi, li in zip(x, y, live):
        if not li:
            continue
        p = Point2(complex(xi), complex(yi))
        res = _fixed_residual(G, p)
        if res <= FIXED_POINT_RESIDUAL * (1 + p.norm()):
            cands.append((p, res))
    failed = len(sx) - len(cands)
    cands.sort(key=lambda pr: (round(pr[0].x.real, 6), round(pr[0].x.imag, 6),
                               round(pr[0].y.real, 6), round(pr[0].y.imag, 6), pr[1]))
    clusters: list[list[tuple[Point2, float]]] = []
    for p, res in cands:
        for cl in clusters:
            if _dist(p, cl[0][0]) <= merge_radius:
                cl.append((p, res))
                break
        else:
            clusters.append([(p, res)])
    best = [min(cl, key=lambda pr: (pr[1], pr[0].x.real, pr[0].x.imag, pr[0].y.real, pr[0].y.imag)) for cl in clusters]
    best.sort(key=lambda pr: (pr[0].x.real, pr[0].x.imag, pr[0].y.real, pr[0].y.imag))
    return FixedPointSet([p for p, _ in best], [r for _, r in best], len(sx), failed, chain_degree(G))


def _fixed_residual(G: HenonChain, p: Point2) -> float:
    q = G(p)
    return _dist(q, p)


# ---------------------------------------------------------------------------
# report


@dataclass
class RigidityReport:
    twist: TwistCandidate | None
    commute_FH: bool | None
    commute_FH_residual: float | None
    commute_squares: bool | None
    commute_squares_residual: float | None
    jacobians: tuple[complex, complex]
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        def c(z):
            return [z.real, z.imag]

        tw = None
        if self.twist is not None:
            tw = {
                "eta": c(self.twist.eta),
                "abs_eta": abs(self.twist.eta),
                "residual": self.twist.residual,
                "witness_defect": self.twist.witness_defect,
                "relation": self.twist.relation,
                "right_relation": self.twist.right_relation,
                "right_residuals": list(self.twist.right_residuals),
            }
        return {
            "twist": tw,
            "commute_FH": self.commute_FH,
            "commute_FH_residual": self.commute_FH_residual,
            "commute_squares": self.commute_squares,
            "commute_squares_residual": self.commute_squares_residual,
            "jacobian_F": c(self.jacobians[0]),
            "jacobian_H": c(self.jacobians[1]),
            "notes": list(self.notes),
        }

    def to_text(self) -> str:
        def fmt(z):
            return f"{z.real:.15g}{z.imag:+.15g}j"

        def val(v):
            return "not computed" if v is None else v

        lines = []
        if self.twist is None:
            lines.append("twist: none")
        else:
            t = self.twist
            lines += [
                f"twist: {fmt(t.eta)}",
                f"twist_abs: {abs(t.eta):.15g}",
                f"twist_residual: {t.residual:.3e}",
                f"twist_right_relation: {t.right_relation}",
            ]
        lines += [
            f"commute_FH: {val(self.commute_FH)}",
            f"commute_FH_residual: {val(self.commute_FH_residual)}",
            f"commute_squares: {val(self.commute_squares)}",
            f"commute_squares_residual: {val(self.commute_squares_residual)}",
            f"jacobian_F: {fmt(self.jacobians[0])}",
            f"jacobian_H: {fmt(self.jacobians[1])}",
        ]
        lines += [f"note: {n}" for n in self.notes]
        return "\n".join(lines) + "\n"


def rigidity_report(F: HenonChain, H: HenonChain, tol: float = DEFAULT_TOL,
                    cap: int = DEFAULT_EXPANSION_CAP) -> RigidityReport:
    """Run twist detection and both commutation checks; sub-failures become notes."""
    notes: list[str] = []
    twist = None
    try:
        twist = find_twist(F, H, tol, cap)
        if twist is None:
            notes.append("no twist: C_eta o H o F differs from F o H for the candidate eta")
    except DegreeMismatch as exc:
        notes.append(f"no twist: {exc}")
    except ExpansionTooLarge as exc:
        notes.append(f"twist not computed (cap): degree {exc.degree} > {exc.cap}")

    commute = residual = None
    try:
        commute, residual = check_commute(F, H, tol, cap)
    except ExpansionTooLarge as exc:
        notes.append(f"commute not computed (cap): degree {exc.degree} > {exc.cap}")

    sq = sq_res = None
    try:
        sq, sq_res = verify_squares_commute(F, H, tol, cap)
    except ExpansionTooLarge as exc:
        notes.append(f"squares not computed (cap): degree {exc.degree} > {exc.cap}")

    jf, jh = chain_jacobian_det(F), chain_jacobian_det(H)
    notes.append(f"C_eta has determinant 1, so F o H = C_eta o H o F is consistent with "
                 f"det(F)det(H) = {jf * jh:.6g}")
    if twist is not None and twist.right_relation != "neither":
        notes.append(f"F o H = {twist.right_relation}")
    if commute and (twist is None or abs(twist.eta - 1) > 1e-6):
        notes.append("inconsistent: maps commute but the twist is not 1")
    return RigidityReport(twist, commute, residual, sq, sq_res, (jf, jh), notes)
