import numpy as np
import pytest

import levyescape as le


@pytest.fixture
def brownian_interval():
    """Zero drift, unit diffusion on (-1, 1), full kernel; epsilon settable via with_."""
    return le.EscapeProblem(
        drift=le.DriftSpec.zero(),
        diffusion=le.DiffusionSpec.constant(1.0),
        epsilon=0.0,
        alpha=1.5,
        a=-1.0,
        b=1.0,
    )


@pytest.fixture
def ou_truncated():
    """Linearly restoring pure-jump dynamics with the truncated kernel on (-1, 1)."""
    return le.EscapeProblem(
        drift=le.DriftSpec.linear_ou(),
        diffusion=le.DiffusionSpec.zero(),
        epsilon=0.1,
        alpha=1.5,
        a=-1.0,
        b=1.0,
        measure=le.LevyMeasureSpec.truncated_power_law(1.5, 1.0),
    )


@pytest.fixture
def tumor_problem():
    theta, beta_t = 0.1, 1.2
    x1, _, x3 = le.tumor_equilibria(theta, beta_t)
    return le.EscapeProblem(
        drift=le.DriftSpec.tumor(theta, beta_t),
        diffusion=le.DiffusionSpec.zero(),
        epsilon=0.05,
        alpha=1.5,
        a=x1,
        b=x3,
    )


def grid_with_exterior(grid):
    """(x, p) arrays including the two exterior anchor points."""
    xs = np.concatenate(([grid.a], grid.nodes, [grid.b]))
    ps = np.concatenate(([grid.left_exterior], grid.values, [grid.right_exterior]))
    return xs, ps
