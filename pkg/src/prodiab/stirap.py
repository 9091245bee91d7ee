"""Three-level lambda system in a two-mode cavity performing STIRAP.

Exact model, leading-order and higher-order eliminated dynamics, pulse
filtering, and dark-state diagnostics.  Both detunings are fixed to zero
throughout ("H" drives the 1-3 transition, "V" the 2-3 transition).

The exact model is integrated in the frame displaced by the classical
cavity amplitudes (which equal i F_i(t)): this is an exact unitary change
of frame that leaves every atom observable untouched while keeping the
residual Fock-space occupation tiny, so a truncation at two or three
photons per mode is faithful even for drives of order kappa.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import LindbladModel, MomentSystem, Trajectory
from .errors import ValidityError
from .operators import (
    HilbertSpace,
    OperatorMatrix,
    build_annihilation,
    build_transition,
    embed,
)
from .pulses import PulseEnvelope

ATOM3 = HilbertSpace((3,))
# paper-style 1-based level labels map to indices 0, 1, 2
T13 = build_transition(3, 0, 2).array
T23 = build_transition(3, 1, 2).array
T31 = T13.conj().T
T32 = T23.conj().T
P11 = build_transition(3, 0, 0).array
P22 = build_transition(3, 1, 1).array
P33 = build_transition(3, 2, 2).array
P12 = build_transition(3, 0, 1).array
P21 = build_transition(3, 1, 0).array

STIRAP_LABELS = (
    "sigma_11",
    "sigma_22",
    "sigma_12",
    "sigma_21",
    "sigma_13",
    "sigma_31",
    "sigma_23",
    "sigma_32",
)


@dataclass(frozen=True)
class LambdaParams:
    """Rates of the lambda system: one linewidth for both cavity modes, one
    dissipation rate for both transitions, a common coupling g, and one
    drive envelope per mode."""

    kappa: float
    gamma: float
    g: float
    env_H: PulseEnvelope
    env_V: PulseEnvelope

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if self.gamma < 0 or self.g < 0:
            raise ValueError("gamma and g must be nonnegative")

    @property
    def purcell(self) -> float:
        if self.gamma == 0.0:
            raise ValidityError("Purcell factor undefined for gamma = 0")
        return 4.0 * self.g**2 / (self.gamma * self.kappa)


def _rates(p: LambdaParams):
    """(beta, Gamma_enh, Gamma_s, w): the combinations gamma*F_p/kappa,
    gamma*(1+F_p), its dressed version, and the composite-jump weight.
    All are finite at gamma = 0 (only F_p itself diverges there)."""
    beta = 4.0 * p.g**2 / p.kappa**2
    gamma_enh = p.gamma + 4.0 * p.g**2 / p.kappa
    gamma_s = gamma_enh * (1.0 + 2.0 * beta)
    denom = p.gamma * p.kappa + 4.0 * p.g**2
    w = 4.0 * p.g**3 / (p.kappa * denom) if denom > 0 else 0.0
    return beta, gamma_enh, gamma_s, w


def filtered_envelopes(p: LambdaParams, grid):
    """Cavity-filtered drives on the grid, switched on at the grid start."""
    grid = np.asarray(grid, dtype=float)
    start = float(grid[0])
    f_h = np.asarray(p.env_H.filtered(grid, p.kappa, 1.0, start=start), dtype=float)
    f_v = np.asarray(p.env_V.filtered(grid, p.kappa, 1.0, start=start), dtype=float)
    return f_h, f_v


def _filter_pair(p: LambdaParams, t_start):
    """Scalar-callable filtered drives used inside models."""

    def f_h(t):
        return float(p.env_H.filtered(t, p.kappa, 1.0, start=t_start))

    def f_v(t):
        return float(p.env_V.filtered(t, p.kappa, 1.0, start=t_start))

    return f_h, f_v


@dataclass(frozen=True)
class DarkStateRecord:
    """Mixing angle and normalized amplitudes on levels 1 and 2 of the
    instantaneous dark state; the excited level never enters."""

    theta: float
    amplitudes: tuple[complex, complex]
    adiabaticity_ratio: float | None = None


def dark_state(f_h: float, f_v: float) -> DarkStateRecord:
    """Dark state for filtered drive values (tan theta = F_H / F_V)."""
    if f_h == 0.0 and f_v == 0.0:
        raise ValidityError("dark-state angle undefined when both drives vanish")
    theta = float(np.arctan2(f_h, f_v))
    return DarkStateRecord(theta, (np.cos(theta), -np.sin(theta)))


def adiabaticity_metric(f_h_curve, f_v_curve, grid) -> np.ndarray:
    """|d theta/dt| / sqrt(F_H^2 + F_V^2), centered differences (one-sided at
    the ends).  Zero-drive instants are reported as NaN gaps."""
    f_h = np.asarray(f_h_curve, dtype=float)
    f_v = np.asarray(f_v_curve, dtype=float)
    grid = np.asarray(grid, dtype=float)
    theta = np.arctan2(f_h, f_v)
    theta_dot = np.gradient(theta, grid)
    norm = np.sqrt(f_h**2 + f_v**2)
    out = np.full(len(grid), np.nan)
    ok = norm > 1e-12 * max(norm.max(), 1e-300)
    out[ok] = np.abs(theta_dot[ok]) / norm[ok]
    return out


def stirap_full_model(
    p: LambdaParams, n_max: int = 2, displaced: bool = True, t_start: float = 0.0
) -> LindbladModel:
    """Exact two-mode-cavity + three-level model, truncated at ``n_max``
    photons per mode (space ordering: H mode, V mode, atom).

    ``displaced=True`` (default) moves the classical drive into an atom
    drive proportional to the filtered envelopes; ``displaced=False`` keeps
    the bare cavity drive (only usable for weak drives).
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    space = HilbertSpace((n_max + 1, n_max + 1, 3))
    ann = build_annihilation(n_max)
    a_h = embed(ann, 0, space).array
    a_v = embed(ann, 1, space).array
    s13 = embed(OperatorMatrix(ATOM3, T13), 2, space).array
    s23 = embed(OperatorMatrix(ATOM3, T23), 2, space).array
    h0 = p.g * (
        a_h.conj().T @ s13 + s13.conj().T @ a_h + a_v.conj().T @ s23 + s23.conj().T @ a_v
    )
    if displaced:
        f_h, f_v = _filter_pair(p, t_start)
        d_h = 1j * p.g * (s13.conj().T - s13)
        d_v = 1j * p.g * (s23.conj().T - s23)

        def hamiltonian(t):
            return h0 + f_h(t) * d_h + f_v(t) * d_v

    else:
        d_h = a_h + a_h.conj().T
        d_v = a_v + a_v.conj().T

        def hamiltonian(t):
            return h0 - float(p.env_H(t)) * d_h - float(p.env_V(t)) * d_v

    jumps = [(a_h, p.kappa), (a_v, p.kappa), (s13, p.gamma), (s23, p.gamma)]
    bps = tuple(sorted(set(p.env_H.breakpoints()) | set(p.env_V.breakpoints())))
    return LindbladModel(space, hamiltonian, jumps, breakpoints=bps)


def stirap_observables(n_max: int = 2) -> dict:
    """Atom populations and per-mode top-Fock-level leak projectors for the
    exact model."""
    space = HilbertSpace((n_max + 1, n_max + 1, 3))
    top = build_transition(n_max + 1, n_max, n_max)
    return {
        "P1": embed(OperatorMatrix(ATOM3, P11), 2, space),
        "P2": embed(OperatorMatrix(ATOM3, P22), 2, space),
        "P3": embed(OperatorMatrix(ATOM3, P33), 2, space),
        "leak_H": embed(top, 0, space),
        "leak_V": embed(top, 1, space),
    }


def _moment_matrix(p: LambdaParams, f_h: float, f_v: float, order: str):
    """Coefficient matrix and constant of the moment equations at frozen
    drive values."""
    beta, gamma_enh, gamma_s, _ = _rates(p)
    g = p.g
    if order == "adb":
        beta = 0.0
        gamma_s = gamma_enh
    m = np.zeros((8, 8), dtype=np.complex128)
    c = np.zeros(8, dtype=np.complex128)
    # populations (excited population eliminated via the trace)
    m[0, 0] = m[0, 1] = -gamma_s
    m[0, 4] = m[0, 5] = -g * (1.0 + beta) * f_h
    m[0, 6] = m[0, 7] = -g * beta * f_v
    c[0] = gamma_s
    m[1, 0] = m[1, 1] = -gamma_s
    m[1, 4] = m[1, 5] = -g * beta * f_h
    m[1, 6] = m[1, 7] = -g * (1.0 + beta) * f_v
    c[1] = gamma_s
    # ground-state coherence and its conjugate
    m[2, 4] = -g * f_v
    m[2, 7] = -g * f_h
    m[3, 5] = -g * f_v
    m[3, 6] = -g * f_h
    # optical coherences and conjugates
    m[4, 4] = -gamma_s
    m[4, 0] = g * f_h * (2.0 + beta)
    m[4, 1] = g * f_h * (1.0 - beta)
    m[4, 2] = g * f_v * (1.0 + 2.0 * beta)
    c[4] = -g * f_h * (1.0 - beta)
    m[5, 5] = -gamma_s
    m[5, 0] = g * f_h * (2.0 + beta)
    m[5, 1] = g * f_h * (1.0 - beta)
    m[5, 3] = g * f_v * (1.0 + 2.0 * beta)
    c[5] = -g * f_h * (1.0 - beta)
    m[6, 6] = -gamma_s
    m[6, 1] = g * f_v * (2.0 + beta)
    m[6, 0] = g * f_v * (1.0 - beta)
    m[6, 3] = g * f_h * (1.0 + 2.0 * beta)
    c[6] = -g * f_v * (1.0 - beta)
    m[7, 7] = -gamma_s
    m[7, 1] = g * f_v * (2.0 + beta)
    m[7, 0] = g * f_v * (1.0 - beta)
    m[7, 2] = g * f_h * (1.0 + 2.0 * beta)
    c[7] = -g * f_v * (1.0 - beta)
    return m, c


def _generator(p: LambdaParams, order: str, t_start) -> MomentSystem:
    if p.gamma < 0:
        raise ValidityError("gamma must be nonnegative")
    if order == "pdb":
        f_h_fn, f_v_fn = _filter_pair(p, t_start)
    else:
        # leading order uses the unfiltered envelopes times 2/kappa
        def f_h_fn(t):
            return 2.0 * float(p.env_H(t)) / p.kappa

        def f_v_fn(t):
            return 2.0 * float(p.env_V(t)) / p.kappa

    def matrix(t):
        return _moment_matrix(p, f_h_fn(t), f_v_fn(t), order)[0]

    def constant(t):
        return _moment_matrix(p, f_h_fn(t), f_v_fn(t), order)[1]

    bps = tuple(sorted(set(p.env_H.breakpoints()) | set(p.env_V.breakpoints())))
    return MomentSystem(STIRAP_LABELS, matrix, constant, breakpoints=bps)


def stirap_pdb_generator(p: LambdaParams, t_start: float | None = 0.0) -> MomentSystem:
    """Higher-order moment equations on (sigma_11, sigma_22, sigma_12,
    sigma_21, sigma_13, sigma_31, sigma_23, sigma_32), the excited
    population following from the unit trace.  Coefficients depend on the
    filtered drives re-evaluated at each integrator time.

    The equations stay well defined at gamma = 0 (the dressed rates are
    built from gamma * F_p = 4 g^2 / kappa, which stays finite), which the
    dark-state stationarity property relies on.
    """
    return _generator(p, "pdb", t_start)


def stirap_adb_generator(p: LambdaParams, t_start: float | None = 0.0) -> MomentSystem:
    """Leading-order moment equations: every gamma/kappa-proportional term
    removed and the filtered drives replaced by 2 f_i(t) / kappa."""
    return _generator(p, "adb", t_start)


def stirap_initial_moments(level: int = 1) -> np.ndarray:
    """Moment vector for the atom prepared in one bare level (1, 2 or 3)."""
    v = np.zeros(8, dtype=np.complex128)
    if level == 1:
        v[0] = 1.0
    elif level == 2:
        v[1] = 1.0
    elif level != 3:
        raise ValueError("level must be 1, 2 or 3")
    return v


def stirap_moments_to_density(v: np.ndarray) -> np.ndarray:
    """Reassemble the 3x3 density matrix from a moment vector."""
    v = np.asarray(v, dtype=np.complex128)
    rho = np.array(
        [
            [v[0], v[3], v[5]],
            [v[2], v[1], v[7]],
            [v[4], v[6], 1.0 - v[0] - v[1]],
        ],
        dtype=np.complex128,
    )
    return rho


def stirap_pdb_lindblad(p: LambdaParams, t_start: float | None = 0.0) -> LindbladModel:
    """Three-level master equation reproducing the higher-order moment
    equations up to the stated residual order.

    The two composite jump operators contain the filtered drives and are
    rebuilt at every integrator stage; their rates are constant.
    """
    if p.gamma < 0:
        raise ValidityError("gamma must be nonnegative")
    beta, gamma_enh, _, w = _rates(p)
    f_h_fn, f_v_fn = _filter_pair(p, t_start)
    # -i g F (s13 - s31) = g F * i (s31 - s13), the same drive direction the
    # displaced exact model produces at leading order
    d_h = 1j * (T31 - T13)
    d_v = 1j * (T32 - T23)

    def hamiltonian(t):
        pref = p.g * (1.0 + beta)
        return pref * (f_h_fn(t) * d_h + f_v_fn(t) * d_v)

    def jump1(t):
        return T13 - w * (f_h_fn(t) * P11 + f_v_fn(t) * P12 - f_h_fn(t) * P33)

    def jump2(t):
        return T23 - w * (f_h_fn(t) * P21 + f_v_fn(t) * P22 - f_v_fn(t) * P33)

    # bare-jump rate gamma (1+F_p) (2 gamma/kappa) F_p, written gamma-0-safe
    rate_bare = 2.0 * beta * gamma_enh
    jumps = [
        (T13, rate_bare),
        (T23, rate_bare),
        (jump1, gamma_enh),
        (jump2, gamma_enh),
    ]
    bps = tuple(sorted(set(p.env_H.breakpoints()) | set(p.env_V.breakpoints())))
    return LindbladModel(ATOM3, hamiltonian, jumps, breakpoints=bps)


def dark_state_overlap(traj: Trajectory, f_h_curve, f_v_curve) -> np.ndarray:
    """Population of the instantaneous dark state along a trajectory with
    stored 3-level states; NaN where both drives vanish."""
    if traj.states is None:
        raise ValueError("trajectory must carry state snapshots")
    f_h = np.asarray(f_h_curve, dtype=float)
    f_v = np.asarray(f_v_curve, dtype=float)
    out = np.full(len(traj.times), np.nan)
    scale = max(float(np.max(np.sqrt(f_h**2 + f_v**2))), 1e-300)
    for k, state in enumerate(traj.states):
        norm = np.hypot(f_h[k], f_v[k])
        if norm <= 1e-12 * scale:
            continue
        psi = np.array([f_v[k], -f_h[k], 0.0], dtype=np.complex128) / norm
        rho = state.array
        if rho.shape[0] != 3:
            raise ValueError("dark-state overlap needs 3-level states")
        out[k] = float(np.real(psi.conj() @ rho @ psi))
    return out
