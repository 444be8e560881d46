"""One line per acceptance criterion, at the stated tolerances."""

import pytest

from henon_rigidity.acceptance import CRITERIA


@pytest.mark.parametrize("criterion", CRITERIA, ids=lambda c: c.__name__.removeprefix("criterion_"))
def test_criterion(criterion):
    result = criterion()
    print(result.line())
    assert result.passed, result.line()
