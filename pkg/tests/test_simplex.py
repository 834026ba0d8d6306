import numpy as np
import pytest

from sta_crane.simplex import nelder_mead


def test_quadratic_bowl():
    target = np.array([1.5, -2.0, 0.25])
    res = nelder_mead(lambda x: float(np.sum((x - target) ** 2)), np.zeros(3), 1.0, ftarget=0.0)
    assert res.converged
    np.testing.assert_allclose(res.x, target, atol=1e-6)


def test_rosenbrock():
    rosen = lambda x: 100.0 * (x[1] - x[0] ** 2) ** 2 + (1 - x[0]) ** 2  # noqa: E731
    res = nelder_mead(rosen, [-1.2, 1.0], 0.5, ftarget=0.0, max_iter=2000)
    assert res.converged
    np.testing.assert_allclose(res.x, [1.0, 1.0], atol=1e-5)


def test_ftarget_stops_early():
    res = nelder_mead(lambda x: abs(x[0] - 3.0), [0.0], 1.0, ftarget=1e-2)
    assert res.converged and res.fun < 1e-2
    assert res.evaluations < 60


def test_iteration_limit_flagged():
    res = nelder_mead(lambda x: float(np.sum(x**2)), [50.0, 50.0], 0.01, max_iter=5, ftarget=0.0)
    assert not res.converged
    assert res.iterations == 5
    assert res.fun < 5000.0


def test_nonfinite_values_are_penalised():
    f = lambda x: np.inf if x[0] < 0 else (x[0] - 1.0) ** 2  # noqa: E731
    res = nelder_mead(f, [0.5], 1.0, ftarget=0.0)
    assert res.x[0] == pytest.approx(1.0, abs=1e-6)
