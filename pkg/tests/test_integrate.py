import numpy as np
import pytest

from prodiab.errors import StiffnessError
from prodiab.integrate import solve_dopri


def test_exponential_decay_accuracy():
    lam = 0.8
    res = solve_dopri(
        lambda t, y: -lam * y,
        0.0,
        np.array([1.0 + 0j]),
        np.linspace(0.0, 10.0, 21),
        rel_tol=1e-10,
        abs_tol=1e-13,
        max_step=0.5,
    )
    expected = np.exp(-lam * np.linspace(0.0, 10.0, 21))
    assert np.max(np.abs(res.ys[:, 0] - expected)) < 1e-9


def test_complex_rotation():
    res = solve_dopri(
        lambda t, y: 1j * y,
        0.0,
        np.array([1.0 + 0j]),
        [2 * np.pi],
        rel_tol=1e-11,
        abs_tol=1e-14,
        max_step=0.2,
    )
    assert abs(res.ys[-1, 0] - 1.0) < 1e-9


def test_fixed_step_convergence_order():
    # qubit-decay problem; global order of the propagating pair is 5
    lam = 1.0
    t_end = 2.0
    errors = []
    steps = [0.2, 0.1, 0.05]
    for h in steps:
        res = solve_dopri(
            lambda t, y: -lam * y,
            0.0,
            np.array([1.0 + 0j]),
            [t_end],
            fixed_step=h,
        )
        errors.append(abs(res.ys[-1, 0] - np.exp(-lam * t_end)))
    orders = [np.log2(errors[i] / errors[i + 1]) for i in range(len(errors) - 1)]
    assert min(orders) >= 4.0


def test_halving_rel_tol_within_reported_estimate():
    lam = 0.5
    grid = np.linspace(0.0, 8.0, 9)

    def run(rtol):
        return solve_dopri(
            lambda t, y: -lam * y,
            0.0,
            np.array([1.0 + 0j]),
            grid,
            rel_tol=rtol,
            abs_tol=1e-14,
            max_step=1.0,
        )

    coarse = run(1e-7)
    fine = run(5e-8)
    change = np.max(np.abs(coarse.ys - fine.ys))
    assert change < coarse.error_estimate


def test_breakpoints_hit_exactly():
    # discontinuous forcing: y' = 1 for t < 1, -1 after; kink handled exactly
    def f(t, y):
        return np.array([1.0 + 0j]) if t < 1.0 else np.array([-1.0 + 0j])

    res = solve_dopri(
        f,
        0.0,
        np.array([0.0 + 0j]),
        [0.5, 1.0, 2.0],
        rel_tol=1e-10,
        abs_tol=1e-12,
        max_step=0.3,
        breakpoints=(1.0,),
    )
    assert np.allclose(res.ys[:, 0].real, [0.5, 1.0, 0.0], atol=1e-9)


def test_stiffness_reported_with_time():
    with pytest.raises(StiffnessError) as info:
        solve_dopri(
            lambda t, y: -1e16 * y,
            0.0,
            np.array([1.0 + 0j]),
            [1.0],
            rel_tol=1e-9,
            abs_tol=1e-12,
            max_step=0.5,
        )
    assert 0.0 <= info.value.time <= 1.0


def test_rejects_bad_grid():
    with pytest.raises(ValueError):
        solve_dopri(lambda t, y: -y, 0.0, np.array([1.0 + 0j]), [1.0, 0.5])
