import numpy as np
import pytest

from nepsolve import NepProblem


@pytest.fixture
def counterexample_problem():
    """The 2-D game whose unit Newton direction is an ascent direction for
    player 1 at the origin: f1 = x1^2/2 + (x2^2+2x2+1)x1, f2 = (x2+2)^2/2."""
    return NepProblem(
        n1=1,
        n2=1,
        f1=lambda x1, x2: 0.5 * x1[0] ** 2 + (x2[0] ** 2 + 2.0 * x2[0] + 1.0) * x1[0],
        f2=lambda x1, x2: 0.5 * (x2[0] + 2.0) ** 2,
        grad1=lambda x1, x2: np.array([x1[0] + x2[0] ** 2 + 2.0 * x2[0] + 1.0]),
        grad2=lambda x1, x2: np.array([x2[0] + 2.0]),
        hess11=lambda x1, x2: np.array([[1.0]]),
        hess22=lambda x1, x2: np.array([[1.0]]),
        hess12_f1=lambda x1, x2: np.array([[2.0 * x2[0] + 2.0]]),
        hess21_f2=lambda x1, x2: np.array([[0.0]]),
        name="non-descent counterexample",
    )
