"""Coefficient-level arithmetic for complex polynomials and polynomial plane maps.

``Polynomial`` is univariate in the formal variable ``y`` (dense, ascending
coefficients). ``BiPoly`` is a sparse bivariate polynomial keyed by
``(x_exponent, y_exponent)``. ``PolyMap2`` pairs two of them into a
self-map of the plane.

All objects are immutable. Every arithmetic result is trimmed: coefficients
whose magnitude is at most ``TRIM_RELATIVE`` times the largest coefficient are
dropped, so that cancellation dust does not pollute support comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

TRIM_RELATIVE = 1e-13
COEFF_LIMIT = 1e300
DEFAULT_TOL = 1e-9


class CoefficientOverflow(ArithmeticError):
    """A coefficient left the representable range during an operation."""


def _check_finite(values: Iterable[complex]) -> None:
    for v in values:
        if not (math.isfinite(v.real) and math.isfinite(v.imag)) or abs(v) > COEFF_LIMIT:
            raise CoefficientOverflow(f"coefficient {v!r} is not representable")


class Polynomial:
    """Univariate complex polynomial, ``coeffs[k]`` multiplies ``y**k``."""

    __slots__ = ("_c",)

    def __init__(self, coeffs: Sequence[complex] | np.ndarray = ()):
        c = np.asarray(coeffs, dtype=np.complex128).ravel()
        _check_finite(c)
        self._c = _trim_dense(c)
        self._c.setflags(write=False)

    # construction helpers
    @classmethod
    def monomial(cls, k: int, coeff: complex = 1.0) -> Polynomial:
        c = np.zeros(k + 1, dtype=np.complex128)
        c[k] = coeff
        return cls(c)

    @classmethod
    def constant(cls, value: complex) -> Polynomial:
        return cls([value])

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    def degree(self) -> int:
        """Degree of the polynomial; the zero polynomial has degree -1."""
        return len(self._c) - 1

    def is_zero(self) -> bool:
        return len(self._c) == 0

    def leading(self) -> complex:
        return complex(self._c[-1]) if len(self._c) else 0j

    def __getitem__(self, k: int) -> complex:
        return complex(self._c[k]) if 0 <= k < len(self._c) else 0j

    def __call__(self, y):
        """Horner evaluation.

        ``y`` may be a scalar, a numpy array, or any number type closed under
        ``+``/``*`` with Python complex (e.g. ``mpmath.mpc``), in which case
        the result keeps that type and its precision.
        """
        c = self._c if isinstance(y, np.ndarray) else self._c.tolist()
        if not len(c):
            return np.zeros_like(y, dtype=np.complex128) if isinstance(y, np.ndarray) else 0j
        acc = c[-1]
        for a in c[-2::-1]:
            acc = acc * y + a
        return acc

    def __add__(self, other: Polynomial | complex) -> Polynomial:
        other = _as_poly(other)
        n = max(len(self._c), len(other._c))
        out = np.zeros(n, dtype=np.complex128)
        out[: len(self._c)] += self._c
        out[: len(other._c)] += other._c
        return Polynomial(out)

    __radd__ = __add__

    def __neg__(self) -> Polynomial:
        return Polynomial(-self._c)

    def __sub__(self, other: Polynomial | complex) -> Polynomial:
        return self + (-_as_poly(other))

    def __rsub__(self, other: complex) -> Polynomial:
        return _as_poly(other) - self

    def __mul__(self, other: Polynomial | complex) -> Polynomial:
        if not isinstance(other, Polynomial):
            return Polynomial(self._c * complex(other))
        if self.is_zero() or other.is_zero():
            return Polynomial()
        return Polynomial(np.convolve(self._c, other._c))

    __rmul__ = __mul__

    def __pow__(self, n: int) -> Polynomial:
        if n < 0:
            raise ValueError("negative power")
        result = Polynomial([1.0])
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def compose(self, inner: Polynomial) -> Polynomial:
        """Return ``self(inner(y))``."""
        acc = Polynomial()
        for a in self._c[::-1]:
            acc = acc * inner + complex(a)
        return acc

    def scale_argument(self, s: complex) -> Polynomial:
        """Return ``y -> self(s*y)``."""
        return Polynomial(self._c * (complex(s) ** np.arange(len(self._c))))

    def shift_argument(self, t: complex) -> Polynomial:
        """Return ``y -> self(y + t)``."""
        return self.compose(Polynomial([t, 1.0]))

    def nonzero_indices(self) -> list[int]:
        return [k for k, a in enumerate(self._c) if a != 0]

    def max_abs_diff(self, other: Polynomial) -> float:
        n = max(len(self._c), len(other._c))
        a = np.zeros(n, dtype=np.complex128)
        b = np.zeros(n, dtype=np.complex128)
        a[: len(self._c)] = self._c
        b[: len(other._c)] = other._c
        return float(np.max(np.abs(a - b))) if n else 0.0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return np.array_equal(self._c, other._c)

    def __hash__(self) -> int:
        return hash(self._c.tobytes())

    def __repr__(self) -> str:
        if self.is_zero():
            return "Polynomial(0)"
        terms = []
        for k, a in enumerate(self._c):
            if a == 0:
                continue
            terms.append(f"({_fmt(a)})" + ("" if k == 0 else "*y" if k == 1 else f"*y^{k}"))
        return "Polynomial(" + " + ".join(terms) + ")"


def _as_poly(v: Polynomial | complex) -> Polynomial:
    return v if isinstance(v, Polynomial) else Polynomial([complex(v)])


def _trim_dense(c: np.ndarray) -> np.ndarray:
    if not len(c):
        return c.copy()
    mags = np.abs(c)
    cut = TRIM_RELATIVE * mags.max()
    c = np.where(mags <= cut, 0, c)
    nz = np.nonzero(c)[0]
    if not len(nz):
        return np.zeros(0, dtype=np.complex128)
    return c[: nz[-1] + 1].copy()


def _fmt(a: complex) -> str:
    a = complex(a)
    if a.imag == 0:
        return f"{a.real:.12g}"
    return f"{a.real:.12g}{a.imag:+.12g}j"


# ---------------------------------------------------------------------------
# bivariate


def _trim_sparse(terms: Mapping[tuple[int, int], complex]) -> dict[tuple[int, int], complex]:
    if not terms:
        return {}
    _check_finite(terms.values())
    cut = TRIM_RELATIVE * max(abs(v) for v in terms.values())
    return {k: complex(v) for k, v in terms.items() if v != 0 and abs(v) > cut}


class BiPoly:
    """Sparse bivariate complex polynomial in ``x`` and ``y``."""

    __slots__ = ("_t",)

    def __init__(self, terms: Mapping[tuple[int, int], complex] | None = None):
        self._t = _trim_sparse(terms or {})

    @classmethod
    def x(cls) -> BiPoly:
        return cls({(1, 0): 1.0})

    @classmethod
    def y(cls) -> BiPoly:
        return cls({(0, 1): 1.0})

    @classmethod
    def constant(cls, value: complex) -> BiPoly:
        return cls({(0, 0): value})

    @classmethod
    def from_univariate(cls, p: Polynomial, var: str = "y") -> BiPoly:
        if var == "y":
            return cls({(0, k): complex(a) for k, a in enumerate(p.coeffs)})
        return cls({(k, 0): complex(a) for k, a in enumerate(p.coeffs)})

    @property
    def terms(self) -> dict[tuple[int, int], complex]:
        return dict(self._t)

    def support(self) -> set[tuple[int, int]]:
        return set(self._t)

    def total_degree(self) -> int:
        return max((i + j for i, j in self._t), default=-1)

    def is_zero(self) -> bool:
        return not self._t

    def __getitem__(self, key: tuple[int, int]) -> complex:
        return self._t.get(key, 0j)

    def __call__(self, x, y):
        if not self._t:
            return 0j * x
        # group by x-exponent and run Horner in y inside each group
        total = 0j
        by_i: dict[int, dict[int, complex]] = {}
        for (i, j), c in self._t.items():
            by_i.setdefault(i, {})[j] = c
        for i, row in by_i.items():
            jmax = max(row)
            acc = 0j
            for j in range(jmax, -1, -1):
                acc = acc * y + row.get(j, 0j)
            total = total + acc * x**i
        return total

    def __add__(self, other: BiPoly | complex) -> BiPoly:
        other = _as_bipoly(other)
        out = dict(self._t)
        for k, v in other._t.items():
            out[k] = out.get(k, 0j) + v
        return BiPoly(out)

    __radd__ = __add__

    def __neg__(self) -> BiPoly:
        return BiPoly({k: -v for k, v in self._t.items()})

    def __sub__(self, other: BiPoly | complex) -> BiPoly:
        return self + (-_as_bipoly(other))

    def __rsub__(self, other: complex) -> BiPoly:
        return _as_bipoly(other) - self

    def __mul__(self, other: BiPoly | complex) -> BiPoly:
        if not isinstance(other, BiPoly):
            s = complex(other)
            return BiPoly({k: v * s for k, v in self._t.items()})
        out: dict[tuple[int, int], complex] = {}
        for (i1, j1), a in self._t.items():
            for (i2, j2), b in other._t.items():
                key = (i1 + i2, j1 + j2)
                out[key] = out.get(key, 0j) + a * b
        return BiPoly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> BiPoly:
        result = BiPoly.constant(1.0)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def substitute(self, fx: BiPoly, fy: BiPoly) -> BiPoly:
        """Return ``self(fx(x, y), fy(x, y))``."""
        if not self._t:
            return BiPoly()
        imax = max(i for i, _ in self._t)
        jmax = max(j for _, j in self._t)
        xp = [BiPoly.constant(1.0)]
        for _ in range(imax):
            xp.append(xp[-1] * fx)
        yp = [BiPoly.constant(1.0)]
        for _ in range(jmax):
            yp.append(yp[-1] * fy)
        out: dict[tuple[int, int], complex] = {}
        for (i, j), c in self._t.items():
            for k, v in (xp[i] * yp[j])._t.items():
                out[k] = out.get(k, 0j) + c * v
        return BiPoly(out)

    def apply_univariate(self, p: Polynomial) -> BiPoly:
        """Return ``p(self(x, y))`` by Horner's scheme."""
        acc = BiPoly()
        for a in p.coeffs[::-1]:
            acc = acc * self + complex(a)
        return acc

    def max_abs_diff(self, other: BiPoly) -> float:
        keys = set(self._t) | set(other._t)
        return max((abs(self[k] - other[k]) for k in keys), default=0.0)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BiPoly):
            return NotImplemented
        return self._t == other._t

    def __hash__(self) -> int:
        return hash(frozenset(self._t.items()))

    def __repr__(self) -> str:
        if not self._t:
            return "0"
        parts = []
        for (i, j), c in sorted(self._t.items(), key=lambda kv: (-(kv[0][0] + kv[0][1]), kv[0])):
            mono = "*".join(
                s for s in (
                    "" if i == 0 else ("x" if i == 1 else f"x^{i}"),
                    "" if j == 0 else ("y" if j == 1 else f"y^{j}"),
                ) if s
            )
            parts.append(f"({_fmt(c)})" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


def _as_bipoly(v: BiPoly | complex) -> BiPoly:
    return v if isinstance(v, BiPoly) else BiPoly.constant(complex(v))


@dataclass(frozen=True)
class PolyMap2:
    """The plane map ``(x, y) -> (first(x, y), second(x, y))``."""

    first: BiPoly
    second: BiPoly

    @classmethod
    def identity(cls) -> PolyMap2:
        return cls(BiPoly.x(), BiPoly.y())

    @classmethod
    def linear_diagonal(cls, a: complex, b: complex) -> PolyMap2:
        return cls(BiPoly({(1, 0): a}), BiPoly({(0, 1): b}))

    @classmethod
    def twist(cls, eta: complex) -> PolyMap2:
        """The diagonal map ``(x, y) -> (eta*x, y/eta)``."""
        return cls.linear_diagonal(eta, 1 / complex(eta))

    @classmethod
    def translation(cls, px: complex, py: complex) -> PolyMap2:
        return cls(BiPoly({(1, 0): 1.0, (0, 0): px}), BiPoly({(0, 1): 1.0, (0, 0): py}))

    def __call__(self, x, y):
        return self.first(x, y), self.second(x, y)

    def total_degree(self) -> int:
        return max(self.first.total_degree(), self.second.total_degree())

    def scale(self, sx: complex, sy: complex) -> PolyMap2:
        return PolyMap2(self.first * sx, self.second * sy)


def map_compose(outer: PolyMap2, inner: PolyMap2) -> PolyMap2:
    """Symbolic composition ``outer o inner``."""
    return PolyMap2(
        outer.first.substitute(inner.first, inner.second),
        outer.second.substitute(inner.first, inner.second),
    )


def map_equal_within(a: PolyMap2, b: PolyMap2, tol: float = DEFAULT_TOL) -> tuple[bool, float]:
    """Compare coefficientwise over the union of supports.

    Returns ``(equal, residual)`` where the residual is the largest absolute
    coefficient difference.
    """
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    residual = max(a.first.max_abs_diff(b.first), a.second.max_abs_diff(b.second))
    return residual <= tol, residual
