"""Built-in maps used by the CLI ``verify`` command and the test suite."""

from __future__ import annotations

import cmath
import math

from .maps import ElementaryFactor, HenonChain, simple_henon
from .poly import Polynomial

OMEGA = cmath.exp(2j * math.pi / 3)


def quadratic_henon() -> HenonChain:
    """``(x, y) -> (y, y^2 - x)``."""
    return HenonChain(simple_henon([0, 0, 1]).factors, "H")


def twisted(H: HenonChain, eta: complex, name: str | None = None) -> HenonChain:
    """Chain for ``C_eta o H`` where ``C_eta(x, y) = (eta*x, y/eta)``; the twist folds into the last factor."""
    *rest, last = H.factors
    folded = ElementaryFactor(last.b * eta, last.c * eta, last.delta / eta, last.p * (1 / eta))
    return HenonChain(tuple(rest) + (folded,), name)


def example_pair() -> tuple[HenonChain, HenonChain]:
    """``(F, H)`` with ``H = (y, y^2 - x)`` and ``F = C_omega o H = (omega*y, (omega*y)^2 - omega^2*x)``."""
    H = quadratic_henon()
    return twisted(H, OMEGA, "F"), H


def domination_suite() -> list[HenonChain]:
    """Three maps of degrees 2, 3 and 4."""
    cubic = HenonChain((ElementaryFactor(1.5, 0.3 - 0.2j, 0.7j, Polynomial([-0.1, 0.3, 0, 0.8])),), "cubic")
    quartic = HenonChain((
        ElementaryFactor(0.9, 0.1, 1.2, Polynomial([0, 0.5j, 1.0])),
        ElementaryFactor(1.1j, -0.2, 0.8, Polynomial([-0.4, 0, 1.3])),
    ), "quartic")
    return [quadratic_henon(), cubic, quartic]
