"""Effective models for the driven-dissipative Jaynes-Cummings system.

The fast cavity mode is removed in two flavors: the leading-order adiabatic
elimination, and the higher-order variant that keeps the next corrections in
the timescale-separation parameter together with the vacuum-noise terms that
survive in normal- and time-ordered photon correlators.

All operators returned here act on the two-level atom alone; the exact
cavity+atom model (:func:`jc_full_model`) is the oracle they are compared
against.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dynamics import (
    DEFAULT_CONFIG,
    IntegratorConfig,
    LindbladModel,
    MomentSystem,
    steady_state,
    two_time_correlator,
)
from .errors import UnsupportedOrderError, ValidityError
from .operators import (
    HilbertSpace,
    OperatorMatrix,
    build_annihilation,
    build_transition,
    embed,
)
from .pulses import PulseEnvelope

ATOM_SPACE = HilbertSpace((2,))
# basis |0> = ground, |1> = excited
SIGMA = np.array([[0, 1], [0, 0]], dtype=np.complex128)  # |0><1|
SIGMA_DAG = SIGMA.conj().T
SIGMA_Z = np.diag([-1.0, 1.0]).astype(np.complex128)
SIGMA_X = SIGMA + SIGMA_DAG
SIGMA_Y = 1j * (SIGMA - SIGMA_DAG)
EYE2 = np.eye(2, dtype=np.complex128)

EPSILON_WARN_THRESHOLD = 0.3


@dataclass(frozen=True)
class JCParams:
    """Rates of the driven Jaynes-Cummings system (all in the same units)."""

    kappa: float
    gamma: float
    g: float
    delta: float = 0.0  # cavity detuning
    omega: float = 0.0  # atom detuning
    f: float = 0.0  # coherent drive amplitude

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if self.gamma < 0 or self.g < 0:
            raise ValueError("gamma and g must be nonnegative")


@dataclass(frozen=True)
class Susceptibilities:
    t_c: complex  # cavity susceptibility
    t_q: complex  # atom susceptibility
    F_p: float  # Purcell factor
    Gamma: complex  # dressed atomic decay rate


def cavity_susceptibility(p: JCParams) -> complex:
    return 1.0 / (1.0 + 2j * p.delta / p.kappa)


def susceptibilities(p: JCParams) -> Susceptibilities:
    """Response factors and the dressed decay rate Gamma."""
    t_c = cavity_susceptibility(p)
    if p.gamma == 0.0:
        if p.omega != 0.0:
            raise ValidityError("atom susceptibility undefined for gamma = 0")
        raise ValidityError(
            "gamma = 0 makes the Purcell factor infinite; elimination inapplicable"
        )
    t_q = 1.0 / (1.0 + 2j * p.omega / p.gamma)
    f_p = 4.0 * p.g**2 / (p.gamma * p.kappa)
    gamma_big = (
        (p.gamma / t_q)
        * (1.0 + t_c * t_q * f_p)
        * (1.0 + (p.gamma * t_c**2 / p.kappa) * f_p)
    )
    return Susceptibilities(t_c, t_q, f_p, gamma_big)


@dataclass(frozen=True)
class EpsilonReport:
    """Timescale-separation diagnostics: gamma/kappa and omega/kappa count
    as second order, g/kappa and f/kappa as first order."""

    eps_sq_candidates: dict
    eps_candidates: dict
    worst_eps: float
    warn: bool


def epsilon_report(p: JCParams) -> EpsilonReport:
    eps_sq = {
        "gamma/kappa": p.gamma / p.kappa,
        "omega/kappa": abs(p.omega) / p.kappa,
    }
    eps = {"g/kappa": p.g / p.kappa, "f/kappa": abs(p.f) / p.kappa}
    worst = max(
        np.sqrt(eps_sq["gamma/kappa"]),
        np.sqrt(eps_sq["omega/kappa"]),
        eps["g/kappa"],
        eps["f/kappa"],
    )
    return EpsilonReport(eps_sq, eps, float(worst), bool(worst > EPSILON_WARN_THRESHOLD))


@dataclass(frozen=True)
class AtomOperatorSet:
    """The slow-system operators entering the elimination: lowering operator
    b, commutator r = [b, b+], and the free-evolution operator v."""

    b: np.ndarray
    r: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.b, dtype=np.complex128)
        r_expected = b @ b.conj().T - b.conj().T @ b
        if np.max(np.abs(np.asarray(self.r) - r_expected)) > 1e-12:
            raise ValueError("r must equal [b, b+]")


def jc_atom_ops() -> AtomOperatorSet:
    """Two-level instantiation: b = sigma, v = sigma, r = -sigma_z."""
    return AtomOperatorSet(b=SIGMA, r=-SIGMA_Z, v=SIGMA)


def filtered_drive(env: PulseEnvelope, t_c: complex, kappa: float, grid) -> np.ndarray:
    """Drive filtered by the cavity response on ``grid``.

    A constant envelope is taken as on for all time (stationary value
    2 t_c f / kappa); other envelopes are treated as zero before t = 0.
    """
    start = None if env.kind == "constant" else 0.0
    out = env.filtered(np.asarray(grid, dtype=float), kappa, t_c, start=start)
    return np.asarray(out, dtype=np.complex128)


def a_adb(p: JCParams, ops: AtomOperatorSet, f_now: complex) -> np.ndarray:
    """Leading-order eliminated cavity operator (atom-space)."""
    t_c = cavity_susceptibility(p)
    return -(2j * t_c / p.kappa) * p.g * ops.b + 1j * f_now * EYE2


def a_pdb_general(p: JCParams, ops: AtomOperatorSet, f_now: complex) -> np.ndarray:
    """Eliminated cavity operator with all third-order corrections.

    The gamma-proportional term carries t_c^2: re-deriving the expansion of
    the formal solution (kernel moment 4 t_c^2 / kappa) fixes that power,
    and it is what makes this agree with :func:`jc_a_pdb` identically.
    """
    k = p.kappa
    t_c = cavity_susceptibility(p)
    lead = -(2j * p.g * t_c / k) * ops.b + 1j * f_now * np.eye(
        ops.b.shape[0], dtype=np.complex128
    )
    bracket = (
        np.eye(ops.b.shape[0], dtype=np.complex128)
        + 4.0 * (p.g**2 * t_c**2 / k**2) * ops.r
    )
    return (
        bracket @ lead
        - 2j * (p.gamma * p.g * t_c**2 / k**2) * (ops.r @ ops.b)
        + 4.0 * (p.omega * p.g * t_c**2 / k**2) * ops.v
    )


def noise_operator_B(p: JCParams, ops: AtomOperatorSet, f_now: complex) -> np.ndarray:
    """Fourth-order atom operator weighting the vacuum-noise corrections of
    two-time photon correlators."""
    k = p.kappa
    t_c = cavity_susceptibility(p)
    abs2 = abs(t_c) ** 2
    pref = 4.0 * abs2 * t_c * (2.0 * abs2 - t_c**2) * p.g**2 / k**3
    comm_vb = ops.v @ ops.b - ops.b @ ops.v
    comm_br = ops.b @ ops.r - ops.r @ ops.b
    # (gamma/2)(1 + F_p t_c) written without F_p so gamma = 0 stays finite
    decay_w = 0.5 * p.gamma + (2.0 * p.g**2 / k) * t_c
    return pref * (
        1j * p.omega * comm_vb
        + f_now * p.g * comm_br
        - decay_w * (comm_br @ ops.b)
    )


def jc_a_pdb(p: JCParams) -> np.ndarray:
    """Two-level closed form of the higher-order eliminated cavity operator
    for a constant drive."""
    k = p.kappa
    t_c = cavity_susceptibility(p)
    if p.g == 0.0:
        return 1j * (2.0 * t_c * p.f / k) * EYE2  # displaced empty cavity
    if p.gamma <= 0.0:
        raise ValidityError("elimination inapplicable for gamma = 0")
    s = susceptibilities(p)
    coef_sigma = 1.0 + (p.gamma / k) * (t_c / s.t_q) + 4.0 * p.g**2 * t_c**2 / k**2
    coef_z = 4.0 * p.g * p.f * t_c**2 / k**2
    return -(2j * p.g * t_c / k) * (
        coef_sigma * SIGMA + coef_z * SIGMA_Z - (p.f / p.g) * EYE2
    )


MOMENT_LABELS = ("sigma", "sigma_dag", "sigma_z")


def _moment_parts(p: JCParams, order: str, f_drive: complex):
    """Moment matrix and constant for a given value of the filtered drive.

    The drive enters only through F: the lowering-operator row couples to
    <sigma_z> with -g F, the inversion row drives with the Hermitian pair of
    2 g F (1 + gamma t_c^2 F_p / kappa), and the displacement constant is
    g (gamma F_p / kappa) t_c^2 F.  For a stationary drive F = 2 t_c f /
    kappa these reduce to the printed constant-coefficient equations.
    """
    k = p.kappa
    s = susceptibilities(p)
    t_c = s.t_c
    if order == "pdb":
        gamma_big = s.Gamma
        w_drive = f_drive * ((p.gamma * t_c**2 / k) * s.F_p + 1.0)
        const_sigma = p.g * (p.gamma * s.F_p / k) * t_c**2 * f_drive
    else:
        gamma_big = (p.gamma / s.t_q) * (1.0 + t_c * s.t_q * s.F_p)
        w_drive = f_drive
        const_sigma = 0.0
    m = np.zeros((3, 3), dtype=np.complex128)
    c = np.zeros(3, dtype=np.complex128)
    m[0, 0] = -gamma_big / 2.0
    m[0, 2] = -p.g * f_drive
    c[0] = const_sigma
    m[1, 1] = np.conj(m[0, 0])
    m[1, 2] = np.conj(m[0, 2])
    c[1] = np.conj(c[0])
    m[2, 0] = 2.0 * p.g * np.conj(w_drive)
    m[2, 1] = 2.0 * p.g * w_drive
    m[2, 2] = -gamma_big.real
    c[2] = -gamma_big.real
    return m, c


def jc_moment_generator(p: JCParams, order: str = "pdb") -> MomentSystem:
    """Affine equations of motion for (<sigma>, <sigma+>, <sigma_z>) with a
    stationary drive.

    The conjugate-pair convention <sigma+> = <sigma>* fixes the second row.
    ``order="adb"`` truncates to the leading-order elimination: the dressed
    rate loses its gamma/kappa factor and the drive-displacement constants
    drop.
    """
    if p.gamma <= 0.0:
        raise ValidityError("moment equations need gamma > 0")
    if order not in ("pdb", "adb"):
        raise ValueError(f"unknown order {order!r}")
    t_c = cavity_susceptibility(p)
    m, c = _moment_parts(p, order, 2.0 * t_c * p.f / p.kappa)
    return MomentSystem(MOMENT_LABELS, m, c)


def jc_moment_system(
    p: JCParams,
    order: str = "pdb",
    drive: PulseEnvelope | None = None,
    t_start: float | None = None,
) -> MomentSystem:
    """Moment equations for a time-dependent drive envelope.

    The higher-order rows see the cavity-filtered drive F(t) (switched on
    at ``t_start``); the leading-order rows see the unfiltered envelope, as
    in the classic elimination.  ``drive=None`` falls back to the
    stationary-drive generator.
    """
    if drive is None:
        return jc_moment_generator(p, order)
    if p.gamma <= 0.0:
        raise ValidityError("moment equations need gamma > 0")
    if order not in ("pdb", "adb"):
        raise ValueError(f"unknown order {order!r}")
    t_c = cavity_susceptibility(p)

    def f_of_t(t):
        if order == "adb":
            return 2.0 * t_c * float(drive(t)) / p.kappa
        return complex(drive.filtered(t, p.kappa, t_c, start=t_start))

    def matrix(t):
        return _moment_parts(p, order, f_of_t(t))[0]

    def constant(t):
        return _moment_parts(p, order, f_of_t(t))[1]

    return MomentSystem(MOMENT_LABELS, matrix, constant, breakpoints=drive.breakpoints())


@dataclass
class EffectiveModel:
    """Atom-only Lindblad model produced by an elimination, together with
    the atom-space photon operator used in correlators."""

    model: LindbladModel
    order: str  # "adb" or "pdb"
    params: JCParams
    photon_op: np.ndarray | None
    coefficients: dict = field(default_factory=dict)


def _pdb_coefficients(p: JCParams, resonant: bool) -> dict:
    k = p.kappa
    s = susceptibilities(p)
    f_p = s.F_p
    if resonant:
        return {
            "c_z": 0.0,
            "c_x": 0.0,
            "c_y": -(2.0 * p.g * p.f / k) * (p.gamma * f_p / (2.0 * k) + 1.0),
            "Gamma0": p.gamma * (1.0 + f_p),
            "Gamma1": p.gamma * (1.0 + f_p) * (p.gamma / k) * f_p,
            "xi": (2.0 * p.f * p.g / k**2) * f_p / (f_p + 1.0),
        }
    t_c = s.t_c
    a2 = abs(t_c) ** 2
    a4 = a2**2
    re2 = (t_c**2).real
    gk = p.gamma / k
    c_z = (
        p.omega / 2.0
        + 0.5 * gk * f_p * (p.omega * re2 - p.delta * a2)
        - p.delta * a4 * gk**2 * f_p * (f_p * (2.0 * a2 - 0.5) + 1.0)
    )
    c_x = (2.0 * p.f * p.g * p.delta / k**2) * a2 * (gk * f_p * (re2 + 2.0 * a4) + 2.0)
    c_y = -(2.0 * p.g * p.f / k) * a2 * (gk * f_p * (1.5 * re2 - a4) + 1.0)
    gamma0 = p.gamma * (1.0 + f_p * a2)
    gamma1 = (8.0 * p.delta * p.omega / k) * gk * f_p * a4 + p.gamma * gk * f_p * a2 * (
        2.0 * a2 * (f_p * (2.0 * a2 - 1.5) + 1.0) - 1.0
    )
    xi = (2.0 * p.f * p.g * t_c**3 / k**2) * f_p / (1.0 + f_p * a2)
    return {"c_z": c_z, "c_x": c_x, "c_y": c_y, "Gamma0": gamma0, "Gamma1": gamma1, "xi": xi}


def jc_pdb_lindblad(p: JCParams) -> EffectiveModel:
    """Effective master equation reproducing the higher-order moment
    equations up to the stated residual order.

    Jump structure: a bare lowering jump at Gamma1 plus a composite jump
    sigma + xi sigma_z at Gamma0.  A negative Gamma1 (extreme detunings)
    is outside the validity region and raises instead of being clamped.
    """
    if p.gamma <= 0.0:
        raise ValidityError("elimination inapplicable for gamma = 0")
    resonant = p.delta == 0.0 and p.omega == 0.0
    coef = _pdb_coefficients(p, resonant)
    if coef["Gamma1"] < 0.0:
        raise ValidityError(
            f"negative jump rate Gamma1 = {coef['Gamma1']:.3e}; detuning outside validity"
        )
    h = coef["c_z"] * SIGMA_Z + coef["c_x"] * SIGMA_X + coef["c_y"] * SIGMA_Y
    jumps = [
        (SIGMA, float(coef["Gamma1"])),
        (SIGMA + coef["xi"] * SIGMA_Z, float(coef["Gamma0"])),
    ]
    model = LindbladModel(ATOM_SPACE, h, jumps)
    return EffectiveModel(model, "pdb", p, jc_a_pdb(p), coef)


def jc_adb_lindblad(p: JCParams) -> EffectiveModel:
    """Leading-order effective model: coherent drive plus a single enhanced
    decay channel; every gamma/kappa- and xi-proportional coefficient of the
    higher-order model is dropped."""
    if p.gamma <= 0.0:
        raise ValidityError("elimination inapplicable for gamma = 0")
    k = p.kappa
    s = susceptibilities(p)
    a2 = abs(s.t_c) ** 2
    coef = {
        "c_z": p.omega / 2.0,
        "c_x": (2.0 * p.f * p.g * p.delta / k**2) * a2 * 2.0,
        "c_y": -(2.0 * p.g * p.f / k) * a2,
        "Gamma0": p.gamma * (1.0 + s.F_p * a2),
        "Gamma1": 0.0,
        "xi": 0.0,
    }
    h = coef["c_z"] * SIGMA_Z + coef["c_x"] * SIGMA_X + coef["c_y"] * SIGMA_Y
    model = LindbladModel(ATOM_SPACE, h, [(SIGMA, float(coef["Gamma0"]))])
    t_c = s.t_c
    photon = a_adb(p, jc_atom_ops(), 2.0 * t_c * p.f / k)
    return EffectiveModel(model, "adb", p, photon, coef)


def moments_from_lindblad(em: EffectiveModel) -> MomentSystem:
    """Moment equations induced by an effective master equation, extracted
    by applying the adjoint generator to sigma, sigma+ and sigma_z."""
    h = em.model.h_at(0.0)
    jumps = em.model.jumps_at(0.0)

    def adjoint(a):
        out = 1j * (h @ a - a @ h)
        for op, rate in jumps:
            opd = op.conj().T
            out += rate * (opd @ a @ op - 0.5 * (opd @ op @ a + a @ opd @ op))
        return out

    m = np.zeros((3, 3), dtype=np.complex128)
    c = np.zeros(3, dtype=np.complex128)
    for row, a in enumerate((SIGMA, SIGMA_DAG, SIGMA_Z)):
        la = adjoint(a)
        m[row, 0] = np.trace(SIGMA_DAG @ la)  # coefficient of <sigma>
        m[row, 1] = np.trace(SIGMA @ la)  # coefficient of <sigma+>
        m[row, 2] = 0.5 * np.trace(SIGMA_Z @ la)
        c[row] = 0.5 * np.trace(la)
    return MomentSystem(MOMENT_LABELS, m, c)


def jc_full_model(p: JCParams, n_max: int = 2):
    """Exact cavity+atom model on a truncated Fock space.

    Returns (model, observables) where the observables include the atom
    inversion, photon number and the top-Fock-level leak projector.
    """
    space = HilbertSpace((n_max + 1, 2))
    a = embed(build_annihilation(n_max), 0, space)
    sig = embed(OperatorMatrix(ATOM_SPACE, SIGMA), 1, space)
    sz = embed(OperatorMatrix(ATOM_SPACE, SIGMA_Z), 1, space)
    ad = a.dag()
    h = (
        p.delta * (ad @ a)
        + (p.omega / 2.0) * sz
        + p.g * (ad @ sig + sig.dag() @ a)
        - p.f * (a + ad)
    )
    model = LindbladModel(space, h, [(a, p.kappa), (sig, p.gamma)])
    top = embed(build_transition(n_max + 1, n_max, n_max), 0, space)
    observables = {
        "sigma_z": sz,
        "n_photon": ad @ a,
        "leak": top,
        "a": a,
    }
    return model, observables


def _effective(p: JCParams, order: str) -> EffectiveModel:
    if order == "pdb":
        return jc_pdb_lindblad(p)
    if order == "adb":
        return jc_adb_lindblad(p)
    raise ValueError(f"unknown model choice {order!r}")


def pdb_correlator(
    p: JCParams,
    n_creation: int,
    n_annihilation: int,
    grid,
    *,
    mid: np.ndarray | None = None,
    order: str = "pdb",
    include_noise: bool = True,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    initial_state: np.ndarray | None = None,
) -> np.ndarray:
    """Normal- and time-ordered photon correlator on the effective model.

    Evaluates <a+(0)^min(M,1) a+(t)^(M-1) Sigma(t) a(t)^min(N,1) a(0)^(N-1)>
    by the quantum regression theorem, with the eliminated cavity operator
    standing in for a.  With ``include_noise`` and two operators on a side,
    the exponentially weighted noise-operator terms are added (they only
    matter within a few cavity lifetimes).  At most two distinct times per
    side are supported; the adiabatic model carries no noise corrections.
    """
    if n_creation > 2 or n_annihilation > 2:
        raise UnsupportedOrderError("correlators support at most two photon operators per side")
    if n_creation < 0 or n_annihilation < 0:
        raise ValueError("operator counts must be nonnegative")
    grid = np.asarray(grid, dtype=float)
    em = _effective(p, order)
    a = em.photon_op
    ad = a.conj().T
    sig_mid = EYE2 if mid is None else np.asarray(mid, dtype=np.complex128)

    lv = em.model.liouvillian_at(0.0)
    rho = steady_state(lv)
    if initial_state is not None:
        cand = np.asarray(initial_state, dtype=np.complex128)
        resid = np.max(np.abs(lv.apply(cand)))
        if resid > 1e-8:
            raise ValidityError(
                f"initial state is not stationary (|L rho| = {resid:.3e})"
            )
        rho = cand
    rho_arr = rho.array if hasattr(rho, "array") else rho

    left0 = ad if n_creation >= 1 else EYE2
    right0 = a if n_annihilation == 2 else EYE2
    mid_op = (
        (ad if n_creation == 2 else EYE2)
        @ sig_mid
        @ (a if n_annihilation >= 1 else EYE2)
    )
    out = two_time_correlator(em.model, rho_arr, left0, mid_op, right0, grid, cfg)

    if include_noise and em.order == "pdb" and (n_creation == 2 or n_annihilation == 2):
        t_c = cavity_susceptibility(p)
        b_op = noise_operator_B(p, jc_atom_ops(), 2.0 * t_c * p.f / p.kappa)
        if n_annihilation == 2:
            weight = np.exp(-p.kappa * grid / (2.0 * t_c))
            mid_n = (ad if n_creation == 2 else EYE2) @ sig_mid
            term = two_time_correlator(em.model, rho_arr, left0, mid_n, b_op, grid, cfg)
            out = out + weight * term
        if n_creation == 2:
            weight = np.exp(-p.kappa * grid / (2.0 * np.conj(t_c)))
            mid_n = sig_mid @ (a if n_annihilation >= 1 else EYE2)
            term = two_time_correlator(
                em.model, rho_arr, b_op.conj().T, mid_n, right0, grid, cfg
            )
            out = out + weight * term
    return out


def jc_g2_effective(
    p: JCParams,
    grid,
    order: str = "pdb",
    include_noise: bool = True,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
) -> np.ndarray:
    """Normalized stationary g2 of the eliminated photon operator."""
    em = _effective(p, order)
    a = em.photon_op
    rho = steady_state(em.model.liouvillian_at(0.0))
    nbar = np.trace(a.conj().T @ a @ rho.array).real
    if nbar < 1e-30:
        raise ValidityError("vanishing photon number; g2 undefined")
    num = pdb_correlator(
        p, 2, 2, grid, order=order, include_noise=include_noise, cfg=cfg
    )
    return num.real / nbar**2


def g2_pdb_analytic(p: JCParams, grid, include_noise: bool = True) -> np.ndarray:
    """Closed-form low-drive g2 on resonance.

    First term: squared relaxation of the conditioned field; second term
    (toggled by ``include_noise``): the short-time vacuum-noise correction
    decaying at half the cavity rate.
    """
    if p.delta != 0.0 or p.omega != 0.0:
        raise ValidityError(
            "analytic g2 is stated on resonance; use pdb_correlator off resonance"
        )
    if p.gamma <= 0.0:
        raise ValidityError("elimination inapplicable for gamma = 0")
    grid = np.asarray(grid, dtype=float)
    k = p.kappa
    f_p = 4.0 * p.g**2 / (p.gamma * k)
    gk = p.gamma / k
    gamma_big = p.gamma * (1.0 + f_p) * (1.0 + gk * f_p)
    decay = np.exp(-gamma_big * grid / 2.0)
    main = (1.0 - f_p**2 * (1.0 - gk**2 * (f_p + 1.0) ** 2) * decay) ** 2
    if not include_noise:
        return main
    noise = (
        2.0
        * np.exp(-k * grid / 2.0)
        * gk
        * f_p**2
        * (1.0 + f_p)
        * (1.0 - f_p**2 * decay)
    )
    return main + noise
