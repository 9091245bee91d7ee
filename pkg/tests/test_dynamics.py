import numpy as np
import pytest
from scipy.linalg import expm

from prodiab.dynamics import (
    IntegratorConfig,
    LindbladModel,
    evolve,
    g2_curve,
    steady_state,
    two_time_correlator,
)
from prodiab.errors import DegenerateSteadyStateError, ValidityError
from prodiab.operators import (
    HilbertSpace,
    OperatorMatrix,
    basis_density,
    build_annihilation,
    build_transition,
    expectation,
    identity,
    unvec,
    vec,
)

QUBIT = HilbertSpace((2,))
SIGMA = build_transition(2, 0, 1)
SIGMA_Z = OperatorMatrix(QUBIT, np.diag([-1.0, 1.0]).astype(complex))
CFG = IntegratorConfig()


def qubit_decay_model(gamma=0.3):
    return LindbladModel(QUBIT, np.zeros((2, 2), complex), [(SIGMA, gamma)])


def driven_cavity_model(f=0.05, kappa=1.0, n_max=5):
    space = HilbertSpace((n_max + 1,))
    a = build_annihilation(n_max)
    h = -f * (a + a.dag())
    return LindbladModel(space, h, [(a, kappa)]), a


class TestEvolve:
    def test_free_decay_closed_form(self):
        gamma = 0.3
        grid = np.linspace(0.0, 20.0, 41)
        traj = evolve(
            qubit_decay_model(gamma),
            basis_density(QUBIT, (1,)),
            grid,
            CFG,
            observables={"sz": SIGMA_Z},
        )
        expected = 2.0 * np.exp(-gamma * grid) - 1.0
        assert np.max(np.abs(traj.observables["sz"].real - expected)) < 1e-8

    def test_trivial_generator_is_static(self):
        model = LindbladModel(QUBIT, np.zeros((2, 2), complex))
        rho0 = basis_density(QUBIT, (1,))
        traj = evolve(model, rho0, np.linspace(0, 5, 6), CFG, store_states=True)
        for state in traj.states:
            assert np.allclose(state.array, rho0.array, atol=1e-12)

    def test_against_matrix_exponential(self):
        # independent propagation route for a random constant model
        rng = np.random.default_rng(5)
        h = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        h = 0.5 * (h + h.conj().T)
        model = LindbladModel(QUBIT, h, [(SIGMA, 0.4)])
        rho0 = basis_density(QUBIT, (1,))
        t = 3.0
        traj = evolve(model, rho0, [0.0, t], CFG, store_states=True)
        lv = model.liouvillian_at(0.0).array
        expected = unvec(expm(lv * t) @ vec(rho0.array), 2)
        assert np.max(np.abs(traj.states[-1].array - expected)) < 1e-9

    def test_trace_and_hermiticity_preserved(self):
        from prodiab.elimination import JCParams, jc_full_model

        p = JCParams(kappa=1.0, gamma=5e-3, g=0.15, delta=0.05, omega=5e-4, f=0.02)
        model, _ = jc_full_model(p, n_max=2)
        traj = evolve(
            model,
            basis_density(model.space, (0, 0)),
            np.linspace(0, 50, 26),
            CFG,
            store_states=True,
        )
        for state in traj.states:
            assert abs(np.trace(state.array) - 1.0) < 1e-8
            assert np.max(np.abs(state.array - state.array.conj().T)) < 1e-10

    def test_long_time_matches_steady_state(self):
        from prodiab.elimination import JCParams, jc_full_model
        from prodiab.operators import expectation

        p = JCParams(kappa=1.0, gamma=5e-3, g=0.15, delta=0.05, omega=5e-4, f=0.01)
        model, obs = jc_full_model(p, n_max=2)
        rho_ss = steady_state(model.liouvillian_at(0.0), model.space)
        grid = np.linspace(0.0, 2000.0, 11)
        traj = evolve(model, basis_density(model.space, (0, 0)), grid, CFG,
                      observables={"sz": obs["sigma_z"]})
        target = expectation(obs["sigma_z"], rho_ss).real
        assert abs(traj.observables["sz"][-1].real - target) < 1e-6


class TestSteadyState:
    def test_pure_decay(self):
        rho = steady_state(qubit_decay_model().liouvillian_at(0.0), QUBIT)
        assert np.allclose(rho.array, np.diag([1.0, 0.0]), atol=1e-12)

    def test_driven_cavity_coherent_amplitude(self):
        # linear Langevin fixed point: <a> = 2 i f / kappa on resonance
        f = 0.05
        model, a = driven_cavity_model(f=f)
        rho = steady_state(model.liouvillian_at(0.0), model.space)
        assert expectation(a, rho) == pytest.approx(2j * f, abs=1e-10)

    def test_full_model_residual(self):
        from prodiab.elimination import JCParams, jc_full_model

        p = JCParams(kappa=1.0, gamma=5e-3, g=0.15, delta=0.05, omega=5e-4, f=2.5e-4)
        model, _ = jc_full_model(p, n_max=2)
        lv = model.liouvillian_at(0.0)
        rho = steady_state(lv, model.space)
        assert np.max(np.abs(lv.apply(rho.array))) < 1e-10

    def test_fixed_point_of_evolve(self):
        from prodiab.elimination import JCParams, jc_full_model

        p = JCParams(kappa=1.0, gamma=5e-3, g=0.15, delta=0.05, omega=5e-4, f=0.01)
        model, _ = jc_full_model(p, n_max=2)
        rho = steady_state(model.liouvillian_at(0.0), model.space)
        traj = evolve(model, rho, [0.0, 10.0], CFG, store_states=True)
        assert np.max(np.abs(traj.states[-1].array - rho.array)) < 1e-8

    def test_degenerate_null_space_raises(self):
        # pure dephasing conserves every population: multi-dimensional kernel
        model = LindbladModel(QUBIT, np.zeros((2, 2), complex), [(SIGMA_Z, 0.5)])
        with pytest.raises(DegenerateSteadyStateError):
            steady_state(model.liouvillian_at(0.0), QUBIT)


class TestTwoTimeCorrelator:
    def test_identity_mid_is_constant(self):
        model = qubit_decay_model()
        rho = steady_state(model.liouvillian_at(0.0), QUBIT)
        left = SIGMA.dag().array
        right = SIGMA.array
        grid = np.linspace(0.0, 5.0, 6)
        out = two_time_correlator(model, rho, left, np.eye(2, dtype=complex), right, grid, CFG)
        assert np.max(np.abs(out - out[0])) < 1e-12

    def test_reduces_to_evolve(self):
        gamma = 0.3
        model = qubit_decay_model(gamma)
        rho0 = basis_density(QUBIT, (1,))
        grid = np.linspace(0.0, 10.0, 21)
        out = two_time_correlator(
            model, rho0, np.eye(2, dtype=complex), SIGMA_Z.array, np.eye(2, dtype=complex), grid, CFG
        )
        expected = 2.0 * np.exp(-gamma * grid) - 1.0
        assert np.max(np.abs(out.real - expected)) < 1e-8

    def test_t0_equals_expectation(self):
        model = qubit_decay_model()
        rho = basis_density(QUBIT, (1,))
        rng = np.random.default_rng(2)
        left = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        right = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        mid = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        out = two_time_correlator(model, rho, left, mid, right, [0.0, 1.0], CFG)
        direct = np.trace(left @ mid @ right @ rho.array)
        assert abs(out[0] - direct) < 1e-12 * max(1.0, abs(direct))

    def test_coherent_state_is_second_order_coherent(self):
        model, a = driven_cavity_model(f=0.04)
        rho = steady_state(model.liouvillian_at(0.0), model.space)
        grid = np.linspace(0.0, 8.0, 9)
        nbar = expectation(a.dag() @ a, rho).real
        num = two_time_correlator(
            model, rho, a.dag().array, (a.dag() @ a).array, a.array, grid, CFG
        )
        assert np.max(np.abs(num.real / nbar**2 - 1.0)) < 1e-6

    def test_negative_times_rejected(self):
        model = qubit_decay_model()
        rho = basis_density(QUBIT, (1,))
        with pytest.raises(ValueError):
            two_time_correlator(
                model, rho, np.eye(2, dtype=complex), np.eye(2, dtype=complex), np.eye(2, dtype=complex), [-1.0, 0.0], CFG
            )


class TestG2Curve:
    def test_driven_cavity_flat(self):
        model, a = driven_cavity_model(f=0.04)
        out = g2_curve(model, a, np.linspace(0.0, 10.0, 11), CFG)
        assert np.max(np.abs(out - 1.0)) < 1e-6

    def test_vanishing_denominator(self):
        model, a = driven_cavity_model(f=0.0)
        with pytest.raises((ValidityError, DegenerateSteadyStateError)):
            g2_curve(model, a, np.linspace(0.0, 5.0, 6), CFG)
