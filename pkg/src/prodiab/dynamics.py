"""Time evolution of Lindblad models, steady states and two-time
correlation functions via the quantum regression theorem.

This module is the exact oracle against which every effective model in the
package is judged: the master equation is integrated directly with the
adaptive Runge-Kutta stepper, and multi-time correlators propagate the
conditioned (non-Hermitian) matrix along the identical code path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import DegenerateSteadyStateError, InvariantViolationError, ValidityError
from .integrate import solve_dopri
from .operators import (
    DensityMatrix,
    HilbertSpace,
    OperatorMatrix,
    Superoperator,
    liouvillian,
    validate_density,
    vec,
)

DEGENERACY_GAP = 1e-8


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_step: float = 0.1  # in units of the inverse fastest rate (1/kappa)

    def __post_init__(self):
        if self.rel_tol < 1e-13:
            raise ValueError("rel_tol below 1e-13 is not supported")
        if self.abs_tol <= 0 or self.max_step <= 0:
            raise ValueError("tolerances and max_step must be positive")


DEFAULT_CONFIG = IntegratorConfig()


@dataclass
class LindbladModel:
    """Hamiltonian plus (jump operator, rate) pairs.

    Both the Hamiltonian and the jump operators/rates may be callables of
    time; they are sampled exactly at integrator stage times.  Breakpoints
    mark discontinuities (pulse edges) the stepper must land on.
    """

    space: HilbertSpace
    hamiltonian: np.ndarray | Callable[[float], np.ndarray]
    jumps: Sequence[tuple] = ()
    breakpoints: tuple[float, ...] = ()

    def __post_init__(self):
        jumps = []
        for op, rate in self.jumps:
            if isinstance(op, OperatorMatrix):
                op = op.array
            jumps.append((op, rate))
        self.jumps = jumps
        if isinstance(self.hamiltonian, OperatorMatrix):
            self.hamiltonian = self.hamiltonian.array

    def h_at(self, t: float) -> np.ndarray:
        h = self.hamiltonian
        return h(t) if callable(h) else h

    def jumps_at(self, t: float):
        out = []
        for op, rate in self.jumps:
            op_t = op(t) if callable(op) else op
            rate_t = rate(t) if callable(rate) else rate
            out.append((op_t, rate_t))
        return out

    @property
    def time_dependent(self) -> bool:
        if callable(self.hamiltonian):
            return True
        return any(callable(op) or callable(rate) for op, rate in self.jumps)

    def validate(self, sample_times: Sequence[float] = (0.0,)) -> None:
        """Check Hermiticity of H and nonnegativity of rates at samples."""
        for t in sample_times:
            h = self.h_at(t)
            if np.max(np.abs(h - h.conj().T)) > 1e-10:
                raise ValidityError(f"Hamiltonian not Hermitian at t = {t:.6g}")
            for _, rate in self.jumps_at(t):
                if rate < 0:
                    raise ValidityError(f"negative jump rate at t = {t:.6g}")

    def liouvillian_at(self, t: float = 0.0) -> Superoperator:
        h = OperatorMatrix(self.space, self.h_at(t))
        jumps = [
            (OperatorMatrix(self.space, op), rate) for op, rate in self.jumps_at(t)
        ]
        return liouvillian(h, jumps)

    def rhs(self):
        """Master-equation right-hand side on column-stacked states.

        Works in matrix form (no superoperator assembly), so per-stage cost
        stays at a handful of d x d matrix products.
        """
        d = self.space.dim
        h_const = None if callable(self.hamiltonian) else self.hamiltonian
        static = []
        dynamic = []
        for op, rate in self.jumps:
            if callable(op) or callable(rate):
                dynamic.append((op, rate))
            elif rate != 0.0:
                static.append((op, op.conj().T, rate, rate * (op.conj().T @ op)))

        def rhs_fn(t, y):
            rho = y.reshape((d, d), order="F")
            h = self.hamiltonian(t) if h_const is None else h_const
            out = -1j * (h @ rho - rho @ h)
            for op, opd, rate, ada_r in static:
                out += rate * (op @ rho @ opd) - 0.5 * (ada_r @ rho + rho @ ada_r)
            for op, rate in dynamic:
                op_t = op(t) if callable(op) else op
                rate_t = rate(t) if callable(rate) else rate
                if rate_t == 0.0:
                    continue
                opd = op_t.conj().T
                ada = opd @ op_t
                out += rate_t * (op_t @ rho @ opd - 0.5 * (ada @ rho + rho @ ada))
            return out.flatten(order="F")

        return rhs_fn


@dataclass
class Trajectory:
    """Named observable curves on a strictly increasing time grid; optional
    full state snapshots."""

    times: np.ndarray
    observables: dict[str, np.ndarray]
    states: list[DensityMatrix] | None = None
    error_estimate: float = 0.0
    n_steps: int = 0

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")
        for name, values in self.observables.items():
            if len(values) != len(self.times):
                raise ValueError(f"observable {name!r} length mismatch")
        if self.states is not None and len(self.states) != len(self.times):
            raise ValueError("state snapshot count does not match time count")


def _propagate(
    model: LindbladModel,
    x0: np.ndarray,
    grid: Sequence[float],
    cfg: IntegratorConfig,
):
    """Propagate an arbitrary (possibly non-Hermitian) matrix under the
    master equation; returns (stack of matrices, integration result)."""
    d = model.space.dim
    grid = np.asarray(grid, dtype=float)
    res = solve_dopri(
        model.rhs(),
        float(grid[0]),
        vec(x0),
        grid,
        rel_tol=cfg.rel_tol,
        abs_tol=cfg.abs_tol,
        max_step=cfg.max_step,
        breakpoints=model.breakpoints,
    )
    mats = res.ys.reshape((len(grid), d, d)).transpose(0, 2, 1)
    # reshape above unpacked row-major; column-stacking needs the transpose
    return mats, res


def evolve(
    model: LindbladModel,
    rho0: DensityMatrix | np.ndarray,
    grid: Sequence[float],
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    observables: Mapping[str, OperatorMatrix | np.ndarray] | None = None,
    store_states: bool = False,
) -> Trajectory:
    """Integrate the master equation and record observables on ``grid``.

    Density-matrix invariants are checked at every output time; violation
    beyond 10x tolerance aborts with :class:`InvariantViolationError`.
    """
    grid = np.asarray(grid, dtype=float)
    rho_arr = rho0.array if isinstance(rho0, OperatorMatrix) else np.asarray(rho0)
    model.validate(sample_times=grid[:: max(1, len(grid) // 8)])
    mats, res = _propagate(model, rho_arr, grid, cfg)

    obs_arrays = {}
    if observables:
        obs_arrays = {
            name: (op.array if isinstance(op, OperatorMatrix) else np.asarray(op))
            for name, op in observables.items()
        }
    records: dict[str, np.ndarray] = {
        name: np.empty(len(grid), dtype=np.complex128) for name in obs_arrays
    }
    states = [] if store_states else None
    for k, rho in enumerate(mats):
        try:
            validate_density(rho, scale=10.0)
        except InvariantViolationError as exc:
            raise InvariantViolationError(
                f"state invariant violated at t = {grid[k]:.6g}: {exc}"
            ) from exc
        for name, op in obs_arrays.items():
            records[name][k] = np.trace(op @ rho)
        if store_states:
            states.append(DensityMatrix(model.space, rho))
    return Trajectory(grid, records, states, res.error_estimate, res.n_steps)


def steady_state(sp: Superoperator | np.ndarray, space: HilbertSpace | None = None) -> DensityMatrix:
    """Unique trace-one solution of L rho = 0 via the bordered linear system.

    A numerically multi-dimensional null space (two smallest singular values
    closer than 1e-8) raises :class:`DegenerateSteadyStateError` instead of
    silently tie-breaking.
    """
    if isinstance(sp, Superoperator):
        arr = sp.array
        space = sp.space
    else:
        arr = np.asarray(sp, dtype=np.complex128)
        if space is None:
            raise ValueError("space required when passing a bare matrix")
    d = space.dim
    sv = np.linalg.svd(arr, compute_uv=False)
    if sv[-2] - sv[-1] < DEGENERACY_GAP:
        raise DegenerateSteadyStateError(
            f"two smallest singular values {sv[-1]:.3e}, {sv[-2]:.3e} are degenerate"
        )
    trace_row = vec(np.eye(d, dtype=np.complex128)).conj()
    bordered = np.vstack([arr, trace_row])
    rhs = np.zeros(d * d + 1, dtype=np.complex128)
    rhs[-1] = 1.0
    x, *_ = np.linalg.lstsq(bordered, rhs, rcond=None)
    # one step of iterative refinement sharpens the small components
    resid = bordered @ x - rhs
    dx, *_ = np.linalg.lstsq(bordered, -resid, rcond=None)
    x = x + dx
    rho = x.reshape((d, d), order="F")
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    return DensityMatrix(space, rho)


def two_time_correlator(
    model: LindbladModel,
    rho: DensityMatrix | np.ndarray,
    left: OperatorMatrix | np.ndarray,
    mid: OperatorMatrix | np.ndarray,
    right: OperatorMatrix | np.ndarray,
    grid: Sequence[float],
    cfg: IntegratorConfig = DEFAULT_CONFIG,
) -> np.ndarray:
    """<left(0) mid(t) right(0)> = Tr[mid e^{Lt}(right rho left)] on grid.

    The conditioned matrix is propagated with the same integrator as
    :func:`evolve`; it is internally rescaled so weak-drive correlators do
    not fall below the absolute tolerance floor.
    """
    grid = np.asarray(grid, dtype=float)
    if np.any(grid < 0):
        raise ValueError("correlation times must be nonnegative")
    if model.time_dependent:
        raise ValidityError("two-time correlators need a time-independent model")

    def _arr(x):
        return x.array if isinstance(x, OperatorMatrix) else np.asarray(x)

    rho_a, left_a, mid_a, right_a = map(_arr, (rho, left, mid, right))
    x0 = right_a @ rho_a @ left_a
    scale = abs(np.trace(x0))
    if scale < 1e-300:
        scale = np.linalg.norm(x0)
    if scale == 0.0:
        return np.zeros(len(grid), dtype=np.complex128)
    mats, _ = _propagate(model, x0 / scale, grid, cfg)
    return scale * np.einsum("ij,kji->k", mid_a, mats)


def g2_curve(
    model: LindbladModel,
    a_op: OperatorMatrix | np.ndarray,
    grid: Sequence[float],
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    rho_ss: DensityMatrix | None = None,
) -> np.ndarray:
    """Stationary second-order coherence g2(t) of the mode ``a_op``."""
    a = a_op.array if isinstance(a_op, OperatorMatrix) else np.asarray(a_op)
    if rho_ss is None:
        rho_ss = steady_state(model.liouvillian_at(0.0), model.space)
    ad = a.conj().T
    nbar = np.trace(ad @ a @ rho_ss.array).real
    if nbar < 1e-14:
        raise ValidityError("vanishing photon number; g2 undefined")
    num = two_time_correlator(model, rho_ss, ad, ad @ a, a, grid, cfg)
    return num.real / nbar**2


@dataclass
class MomentSystem:
    """Affine ODE dv/dt = M(t) v + c(t) on a named moment basis."""

    labels: tuple[str, ...]
    matrix: np.ndarray | Callable[[float], np.ndarray]
    constant: np.ndarray | Callable[[float], np.ndarray]
    breakpoints: tuple[float, ...] = ()

    def matrix_at(self, t: float) -> np.ndarray:
        m = self.matrix
        return m(t) if callable(m) else m

    def constant_at(self, t: float) -> np.ndarray:
        c = self.constant
        return c(t) if callable(c) else c

    def rhs(self):
        m_const = None if callable(self.matrix) else self.matrix
        c_const = None if callable(self.constant) else self.constant

        def f(t, v):
            m = self.matrix(t) if m_const is None else m_const
            c = self.constant(t) if c_const is None else c_const
            return m @ v + c

        return f


def evolve_moments(
    system: MomentSystem,
    v0: Sequence[complex],
    grid: Sequence[float],
    cfg: IntegratorConfig = DEFAULT_CONFIG,
) -> Trajectory:
    """Integrate a moment system; observables named by the system labels."""
    grid = np.asarray(grid, dtype=float)
    res = solve_dopri(
        system.rhs(),
        float(grid[0]),
        np.asarray(v0, dtype=np.complex128),
        grid,
        rel_tol=cfg.rel_tol,
        abs_tol=cfg.abs_tol,
        max_step=cfg.max_step,
        breakpoints=system.breakpoints,
    )
    obs = {name: res.ys[:, k] for k, name in enumerate(system.labels)}
    return Trajectory(grid, obs, None, res.error_estimate, res.n_steps)
