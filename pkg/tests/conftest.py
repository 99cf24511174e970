import math

import numpy as np
import pytest

import odekit as ok


def trajectory_max_error(traj, problem):
    """Largest inf-norm error over every sample of a trajectory."""
    return max(
        float(np.max(np.abs(traj.states[k] - problem.exact_at(traj.times[k]))))
        for k in range(len(traj.times))
    )


def halving_orders(errors):
    return [math.log2(errors[i] / errors[i + 1]) for i in range(len(errors) - 1)]


@pytest.fixture
def decay():
    return ok.get_problem("decay")


@pytest.fixture
def growth():
    return ok.get_problem("growth")
