import numpy as np
import pytest

from prodiab.errors import InvariantViolationError
from prodiab.operators import (
    DensityMatrix,
    HilbertSpace,
    OperatorMatrix,
    basis_density,
    build_annihilation,
    build_transition,
    dissipator,
    embed,
    expectation,
    identity,
    liouvillian,
    trace_preservation_residual,
    unvec,
    vec,
)

QUBIT = HilbertSpace((2,))
SIGMA = build_transition(2, 0, 1)
SIGMA_Z = OperatorMatrix(QUBIT, np.diag([-1.0, 1.0]).astype(complex))


def random_hermitian(rng, d):
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return 0.5 * (m + m.conj().T)


class TestSpaces:
    def test_total_dimension(self):
        assert HilbertSpace((3, 2)).dim == 6

    def test_rejects_empty_and_nonpositive(self):
        with pytest.raises(ValueError):
            HilbertSpace(())
        with pytest.raises(ValueError):
            HilbertSpace((2, 0))


class TestAnnihilation:
    def test_lowest_truncation(self):
        a = build_annihilation(1).array
        expected = np.zeros((2, 2), complex)
        expected[0, 1] = 1.0
        assert np.array_equal(a, expected)

    def test_defining_relation(self):
        a = build_annihilation(2).array
        assert a[0, 1] == pytest.approx(1.0)
        assert a[1, 2] == pytest.approx(np.sqrt(2.0))
        assert np.count_nonzero(a) == 2

    def test_truncated_commutator(self):
        # direct matrix product exposes the truncation artifact on top
        a = build_annihilation(2).array
        comm = a @ a.conj().T - a.conj().T @ a
        assert np.allclose(comm, np.diag([1.0, 1.0, -2.0]))

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            build_annihilation(0)


class TestTransition:
    def test_qubit_lowering(self):
        assert np.array_equal(SIGMA.array, np.array([[0, 1], [0, 0]], complex))

    def test_three_level(self):
        t = build_transition(3, 1, 2).array
        assert t[1, 2] == 1.0 and np.count_nonzero(t) == 1

    def test_population_projector(self):
        s13 = build_transition(3, 0, 2)
        proj = s13.dag() @ s13
        assert np.array_equal(proj.array, build_transition(3, 2, 2).array)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            build_transition(3, 3, 0)


class TestEmbed:
    def test_identity_any_slot(self):
        space = HilbertSpace((3, 2))
        out = embed(identity(QUBIT), 1, space)
        assert np.array_equal(out.array, np.eye(6))

    def test_kron_ordering(self):
        space = HilbertSpace((3, 2))
        out = embed(SIGMA, 1, space)
        assert np.array_equal(out.array, np.kron(np.eye(3), SIGMA.array))

    def test_disjoint_factors_commute(self):
        space = HilbertSpace((3, 2))
        a = embed(build_annihilation(2), 0, space).array
        s = embed(SIGMA, 1, space).array
        assert np.max(np.abs(a @ s - s @ a)) == 0.0

    def test_homomorphism(self):
        rng = np.random.default_rng(7)
        space = HilbertSpace((3, 2))
        for slot, d in ((0, 3), (1, 2)):
            x = OperatorMatrix(HilbertSpace((d,)), rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
            y = OperatorMatrix(HilbertSpace((d,)), rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
            lhs = embed(x @ y, slot, space).array
            rhs = embed(x, slot, space).array @ embed(y, slot, space).array
            assert np.allclose(lhs, rhs, atol=1e-13)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            embed(SIGMA, 0, HilbertSpace((3, 2)))


class TestVectorization:
    def test_roundtrip(self):
        rng = np.random.default_rng(0)
        m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        assert np.array_equal(unvec(vec(m), 4), m)

    def test_column_stacking_convention(self):
        # vec(A X B) = (B^T kron A) vec(X)
        rng = np.random.default_rng(1)
        a, x, b = (rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)) for _ in range(3))
        lhs = vec(a @ x @ b)
        rhs = np.kron(b.T, a) @ vec(x)
        assert np.allclose(lhs, rhs, atol=1e-13)


class TestDissipator:
    def test_identity_gives_zero(self):
        d = dissipator(identity(QUBIT))
        assert np.max(np.abs(d.array)) < 1e-15

    def test_pure_decay(self):
        d = dissipator(SIGMA)
        rho = np.zeros((2, 2), complex)
        rho[1, 1] = 1.0
        out = d.apply(rho)
        assert np.allclose(out, np.diag([1.0, -1.0]))

    def test_traceless_on_random_states(self):
        rng = np.random.default_rng(11)
        a = OperatorMatrix(QUBIT, rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
        d = dissipator(a)
        for _ in range(50):
            rho = random_hermitian(rng, 2)
            out = d.apply(rho)
            # direct matrix formula as the independent route
            direct = a.array @ rho @ a.array.conj().T
            ada = a.array.conj().T @ a.array
            direct -= 0.5 * (ada @ rho + rho @ ada)
            assert np.allclose(out, direct, atol=1e-12)
            assert abs(np.trace(out)) < 1e-12


class TestLiouvillian:
    def test_zero_generator(self):
        lv = liouvillian(0.0 * SIGMA_Z)
        assert np.max(np.abs(lv.array)) == 0.0

    def test_decay_spectrum(self):
        gamma = 0.37
        lv = liouvillian(0.0 * SIGMA_Z, [(SIGMA, gamma)])
        eig = np.sort(np.linalg.eigvals(lv.array).real)
        assert np.allclose(eig, [-gamma, -gamma / 2, -gamma / 2, 0.0], atol=1e-12)

    def test_trace_preservation_full_model(self):
        from prodiab.elimination import JCParams, jc_full_model

        p = JCParams(kappa=1.0, gamma=5e-3, g=0.15, delta=0.05, omega=5e-4, f=0.01)
        model, _ = jc_full_model(p, n_max=2)
        assert trace_preservation_residual(model.liouvillian_at(0.0)) < 1e-10

    def test_hermiticity_preservation(self):
        rng = np.random.default_rng(3)
        lv = liouvillian(
            OperatorMatrix(QUBIT, random_hermitian(rng, 2)), [(SIGMA, 0.2)]
        )
        for _ in range(20):
            h = random_hermitian(rng, 2)
            out = lv.apply(h)
            assert np.max(np.abs(out - out.conj().T)) < 1e-12

    def test_negative_rate_rejected(self):
        with pytest.raises(ValueError):
            liouvillian(0.0 * SIGMA_Z, [(SIGMA, -0.1)])


class TestExpectation:
    def test_identity(self):
        rho = basis_density(QUBIT, (0,))
        assert expectation(identity(QUBIT), rho) == pytest.approx(1.0)

    def test_ground_state_inversion(self):
        rho = basis_density(QUBIT, (0,))
        assert expectation(SIGMA_Z, rho) == pytest.approx(-1.0)

    def test_photon_number_elementwise(self):
        # Gaussian-populated diagonal state; oracle is the direct sum
        n_max = 6
        space = HilbertSpace((n_max + 1,))
        pops = np.exp(-0.5 * (np.arange(n_max + 1) - 2.0) ** 2)
        pops /= pops.sum()
        rho = DensityMatrix(space, np.diag(pops).astype(complex))
        a = build_annihilation(n_max)
        got = expectation(a.dag() @ a, rho).real
        assert got == pytest.approx(float(np.sum(np.arange(n_max + 1) * pops)), abs=1e-12)


class TestDensityMatrix:
    def test_rejects_non_hermitian(self):
        m = np.array([[1.0, 0.5], [0.0, 0.0]], complex)
        with pytest.raises(InvariantViolationError):
            DensityMatrix(QUBIT, m)

    def test_rejects_wrong_trace(self):
        with pytest.raises(InvariantViolationError):
            DensityMatrix(QUBIT, np.diag([0.6, 0.6]).astype(complex))

    def test_rejects_negative(self):
        with pytest.raises(InvariantViolationError):
            DensityMatrix(QUBIT, np.diag([1.5, -0.5]).astype(complex))
