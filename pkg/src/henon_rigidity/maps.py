"""Generalized Hénon maps as compositions of elementary factors.

An elementary factor is ``(x, y) -> (b*y + c, p(y) - delta*x)`` with
``b*delta != 0`` and ``deg p >= 2``. A chain stores its factors in the order
they are applied, so ``HenonChain((f1, f2, f3))`` is the map ``f3 o f2 o f1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .poly import BiPoly, Polynomial, PolyMap2

OVERFLOW_SENTINEL = 1e150
DEFAULT_EXPANSION_CAP = 64


class InvalidFactor(ValueError):
    """Raised when factor parameters violate ``b*delta != 0`` or ``deg p >= 2``."""


class ExpansionTooLarge(RuntimeError):
    def __init__(self, degree: int, cap: int):
        super().__init__(f"expansion of degree {degree} exceeds cap {cap}")
        self.degree = degree
        self.cap = cap


class Point2(NamedTuple):
    x: complex
    y: complex

    def norm(self) -> float:
        return math.hypot(abs(self.x), abs(self.y))


@dataclass(frozen=True)
class Escaped:
    """Orbit left the representable range at ``step`` (1-based iterate count)."""

    step: int
    last: Point2


@dataclass(frozen=True)
class ElementaryFactor:
    b: complex
    c: complex
    delta: complex
    p: Polynomial

    def __post_init__(self):
        object.__setattr__(self, "b", complex(self.b))
        object.__setattr__(self, "c", complex(self.c))
        object.__setattr__(self, "delta", complex(self.delta))
        if not isinstance(self.p, Polynomial):
            object.__setattr__(self, "p", Polynomial(self.p))
        if self.b == 0:
            raise InvalidFactor("b must be nonzero")
        if self.delta == 0:
            raise InvalidFactor("delta must be nonzero")
        if self.p.degree() < 2:
            raise InvalidFactor(f"p must have degree >= 2, got {self.p.degree()}")

    @property
    def degree(self) -> int:
        return self.p.degree()

    def is_normal(self) -> bool:
        return self.b == 1 and self.c == 0

    def forward(self, x, y):
        return self.b * y + self.c, self.p(y) - self.delta * x

    def inverse(self, x, y):
        u = (x - self.c) / self.b
        return (self.p(u) - y) / self.delta, u

    def swapped_inverse(self) -> ElementaryFactor:
        """The factor ``s o f^-1 o s`` where ``s(x, y) = (y, x)``."""
        binv = 1 / self.b
        inner = Polynomial([-self.c * binv, binv])
        return ElementaryFactor(binv, -self.c * binv, 1 / self.delta, self.p.compose(inner) * (1 / self.delta))

    def expand_after(self, m: PolyMap2) -> PolyMap2:
        """Symbolic ``self o m``."""
        return PolyMap2(m.second * self.b + self.c, m.second.apply_univariate(self.p) - m.first * self.delta)

    def __str__(self) -> str:
        return f"(x,y) -> ({self.b}*y + {self.c}, p(y) - {self.delta}*x), p = {self.p!r}"


def normal_factor(p: Polynomial | Sequence[complex], delta: complex) -> ElementaryFactor:
    """Factor in normal form, ``(x, y) -> (y, p(y) - delta*x)``."""
    return ElementaryFactor(1.0, 0.0, delta, p if isinstance(p, Polynomial) else Polynomial(p))


@dataclass(frozen=True)
class HenonChain:
    factors: tuple[ElementaryFactor, ...]
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise InvalidFactor("a chain needs at least one factor")

    def __len__(self) -> int:
        return len(self.factors)

    def __iter__(self):
        return iter(self.factors)

    @property
    def degree(self) -> int:
        return chain_degree(self)

    def then(self, other: HenonChain) -> HenonChain:
        """``other o self`` as a chain (self applied first)."""
        return HenonChain(self.factors + other.factors)

    def power(self, n: int) -> HenonChain:
        if n < 1:
            raise ValueError("power must be >= 1")
        return HenonChain(self.factors * n)

    def forward(self, x, y):
        for f in self.factors:
            x, y = f.forward(x, y)
        return x, y

    def inverse(self, x, y):
        for f in reversed(self.factors):
            x, y = f.inverse(x, y)
        return x, y

    def swapped_inverse(self) -> HenonChain:
        """Chain for ``s o H^-1 o s``; its forward dynamics are the backward dynamics of ``H``."""
        return HenonChain(tuple(f.swapped_inverse() for f in reversed(self.factors)))

    def __call__(self, z: Point2) -> Point2:
        return Point2(*self.forward(complex(z[0]), complex(z[1])))

    def __str__(self) -> str:
        # mathematical order: last applied on the left
        label = self.name or "H"
        parts = [f"H_{i + 1}" for i in range(len(self.factors))]
        lines = [f"{label} = " + " o ".join(reversed(parts))]
        lines += [f"  H_{i + 1}: {f}" for i, f in enumerate(self.factors)]
        return "\n".join(lines)


def factor_eval(f: ElementaryFactor, z: Point2, direction: str = "forward") -> Point2:
    if direction == "forward":
        return Point2(*f.forward(complex(z[0]), complex(z[1])))
    if direction == "inverse":
        return Point2(*f.inverse(complex(z[0]), complex(z[1])))
    raise ValueError(f"unknown direction {direction!r}")


def chain_eval(H: HenonChain, z: Point2, n: int = 1) -> Point2 | Escaped:
    """Apply ``H`` ``n`` times (``H^-1`` for negative ``n``).

    If a coordinate exceeds ``OVERFLOW_SENTINEL`` the iteration stops and an
    :class:`Escaped` record is returned instead of a point.
    """
    x, y = complex(z[0]), complex(z[1])
    step_fn = H.forward if n >= 0 else H.inverse
    for k in range(1, abs(n) + 1):
        prev = Point2(x, y)
        with np.errstate(all="ignore"):
            try:
                x, y = step_fn(x, y)
            except OverflowError:
                return Escaped(k, prev)
        if not (abs(x) <= OVERFLOW_SENTINEL and abs(y) <= OVERFLOW_SENTINEL):
            return Escaped(k, prev)
    return Point2(x, y)


def chain_degree(H: HenonChain) -> int:
    return math.prod(f.degree for f in H.factors)


def chain_jacobian_det(H: HenonChain) -> complex:
    """Constant Jacobian determinant, the product of ``b_j * delta_j``."""
    det = 1 + 0j
    for f in H.factors:
        det *= f.b * f.delta
    return det


def chain_expand(H: HenonChain, cap: int = DEFAULT_EXPANSION_CAP) -> PolyMap2:
    """Expand the chain into explicit coordinate polynomials."""
    d = chain_degree(H)
    if d > cap:
        raise ExpansionTooLarge(d, cap)
    m = PolyMap2.identity()
    for f in H.factors:
        m = f.expand_after(m)
    return m


def conjugate_by_translation(H: HenonChain, p: Point2) -> HenonChain:
    """Chain for ``A^-1 o H o A`` with ``A(x, y) = (x + p.x, y + p.y)``.

    The inner translation is absorbed into the first factor and the outer one
    into the last factor, so the result is again a chain of elementary factors.
    """
    px, py = complex(p[0]), complex(p[1])
    fs = list(H.factors)
    f = fs[0]
    fs[0] = ElementaryFactor(f.b, f.c + f.b * py, f.delta, f.p.shift_argument(py) - f.delta * px)
    f = fs[-1]
    fs[-1] = ElementaryFactor(f.b, f.c - px, f.delta, f.p - py)
    return HenonChain(tuple(fs), H.name)


def random_factor(rng: np.random.Generator, degree: int | None = None, *, normal: bool = False,
                  zero_c: bool = False) -> ElementaryFactor:
    """Random factor with ``|b|, |delta|`` in [0.5, 2] and coefficients in the unit disk."""

    def unit_disk(size=None):
        r = np.sqrt(rng.uniform(0, 1, size))
        return r * np.exp(2j * np.pi * rng.uniform(0, 1, size))

    def annulus():
        return rng.uniform(0.5, 2.0) * np.exp(2j * np.pi * rng.uniform())

    d = int(degree if degree is not None else rng.integers(2, 4))
    coeffs = unit_disk(d + 1).astype(np.complex128)
    coeffs[-1] = rng.uniform(0.5, 1.0) * np.exp(2j * np.pi * rng.uniform())
    b = 1.0 if normal else annulus()
    c = 0.0 if (normal or zero_c) else complex(unit_disk())
    return ElementaryFactor(b, c, annulus(), Polynomial(coeffs))


def random_chain(rng: np.random.Generator, m: int | None = None, **kw) -> HenonChain:
    m = int(m if m is not None else rng.integers(1, 4))
    return HenonChain(tuple(random_factor(rng, **kw) for _ in range(m)))


def simple_henon(p: Sequence[complex] | Polynomial, delta: complex = 1.0) -> HenonChain:
    """One-factor chain ``(x, y) -> (y, p(y) - delta*x)``."""
    return HenonChain((normal_factor(p, delta),))
