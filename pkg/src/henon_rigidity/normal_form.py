"""Rewriting Hénon chains into normal form and the twist-symmetry test.

A factor is *normal* when ``b = 1`` and ``c = 0``, i.e. it reads
``(x, y) -> (y, p(y) - delta*x)``. The rewrites here change individual factors
but never the composed map.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

from .maps import ElementaryFactor, HenonChain, normal_factor
from .poly import Polynomial

ORIGIN_TOL = 1e-9
TWIST_TOL = 1e-9


class PreconditionViolated(ValueError):
    pass


def pair_normalize(f_i: ElementaryFactor, f_next: ElementaryFactor) -> tuple[ElementaryFactor, ElementaryFactor]:
    """Rewrite ``f_next o f_i`` as a composition of two normal factors.

    The constants of ``f_next`` move into the first new factor and those of
    ``f_i`` into the second.
    """
    p_i = f_i.p * f_next.b + f_next.c
    d_i = f_next.b * f_i.delta
    undo = Polynomial([-f_next.c / f_next.b, 1 / f_next.b])
    p_next = f_next.p.compose(undo) - f_next.delta * f_i.c
    d_next = f_next.delta * f_i.b
    return normal_factor(p_i, d_i), normal_factor(p_next, d_next)


def square_normal_form(H: HenonChain) -> HenonChain:
    """Normal-form chain of ``H o H`` with ``2m`` factors."""
    fs = H.factors * 2
    out: list[ElementaryFactor] = []
    for k in range(0, len(fs), 2):
        out.extend(pair_normalize(fs[k], fs[k + 1]))
    return HenonChain(tuple(out))


def chain_normalize_b_only(H: HenonChain) -> HenonChain:
    """Normal form of a chain whose factors all have ``c = 0``; length is preserved.

    Working down from the last factor, each ``b_k`` is pushed into factor
    ``k - 1``, which leaves factor ``k`` normal. The bottom pair is finished
    with :func:`pair_normalize`.
    """
    if len(H) < 2:
        raise PreconditionViolated("need at least two factors")
    if any(f.c != 0 for f in H.factors):
        bad = [i for i, f in enumerate(H.factors) if f.c != 0]
        raise PreconditionViolated(f"factors {bad} have nonzero c")
    fs = list(H.factors)
    for k in range(len(fs) - 1, 1, -1):
        top, below = fs[k], fs[k - 1]
        fs[k] = normal_factor(top.p.scale_argument(1 / top.b), top.delta)
        fs[k - 1] = ElementaryFactor(below.b, 0.0, top.b * below.delta, below.p * top.b)
    fs[0], fs[1] = pair_normalize(fs[0], fs[1])
    return HenonChain(tuple(fs), H.name)


def origin_fixed_form(H: HenonChain, tol: float = ORIGIN_TOL) -> HenonChain:
    """Rewrite a chain fixing the origin so that every factor has ``c = 0`` and ``p(0) = 0``.

    Each factor is split as ``T o N`` with ``N`` origin-preserving and ``T`` a
    translation; ``T`` is then folded into the next factor. The last factor
    ends up fixing the origin on its own; its leftover constants (of size
    ``|H(0)|``) are set to zero.
    """
    x0, y0 = H.forward(0j, 0j)
    if math.hypot(abs(x0), abs(y0)) > tol:
        raise PreconditionViolated(f"H(0) = ({x0}, {y0}) is not the origin")
    fs = list(H.factors)
    for k in range(len(fs)):
        f = fs[k]
        shift_x, shift_y = f.c, f.p(0j)
        fs[k] = ElementaryFactor(f.b, 0.0, f.delta, f.p - shift_y)
        if k + 1 < len(fs):
            g = fs[k + 1]
            fs[k + 1] = ElementaryFactor(
                g.b, g.c + g.b * shift_y, g.delta, g.p.shift_argument(shift_y) - g.delta * shift_x
            )
    return HenonChain(tuple(fs), H.name)


def twist_symmetry_check(p: Polynomial, eta: complex, tol: float = TWIST_TOL) -> bool:
    """True iff ``eta * p(eta*y) == p(y)``, tested coefficientwise."""
    eta = complex(eta)
    if abs(abs(eta) - 1) > tol:
        raise ValueError(f"|eta| = {abs(eta)} is not 1")
    return all(abs(eta ** (k + 1) - 1) <= tol for k in p.nonzero_indices())


@dataclass(frozen=True)
class TwistGroup:
    """The cyclic group of ``order``-th roots of unity."""

    order: int
    zero_coefficients: tuple[tuple[int, ...], ...] = field(default=(), compare=False)

    @property
    def generator(self) -> complex:
        return cmath.exp(2j * math.pi / self.order)

    def elements(self) -> list[complex]:
        return [cmath.exp(2j * math.pi * k / self.order) for k in range(self.order)]

    def __contains__(self, eta: complex) -> bool:
        return abs(complex(eta) ** self.order - 1) <= 1e-9 and abs(abs(eta) - 1) <= 1e-9


def admissible_twist_group(H: HenonChain, tol: float = 1e-10) -> TwistGroup:
    """Roots of unity ``eta`` with ``eta * p_i(eta*y) = p_i(y)`` for every factor.

    ``zero_coefficients`` lists, per factor, the indices below the degree that
    were treated as zero (after trimming).
    """
    g = 0
    zeros = []
    for i, f in enumerate(H.factors):
        if not f.is_normal():
            raise PreconditionViolated(f"factor {i} is not in normal form")
        if abs(f.p[0]) > tol:
            raise PreconditionViolated(f"factor {i} has p(0) = {f.p[0]}")
        nz = [k for k in f.p.nonzero_indices() if k > 0]
        zeros.append(tuple(k for k in range(f.p.degree()) if k not in nz))
        for k in nz:
            g = math.gcd(g, k + 1)
    return TwistGroup(g, tuple(zeros))
