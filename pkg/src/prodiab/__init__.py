"""prodiab: effective models for driven cavity QED with separated timescales.

Exact truncated-Hilbert-space Lindblad integration serves as the oracle;
adiabatic and higher-order (prodiabatic) eliminated models, noise-corrected
photon correlators and STIRAP protocols are built on top of it.
"""

__version__ = "0.1.0"

from .operators import (
    HilbertSpace,
    OperatorMatrix,
    DensityMatrix,
    Superoperator,
    basis_density,
    build_annihilation,
    build_transition,
    dissipator,
    embed,
    expectation,
    identity,
    liouvillian,
    trace_preservation_residual,
    vec,
    unvec,
)
from .dynamics import (
    IntegratorConfig,
    LindbladModel,
    MomentSystem,
    Trajectory,
    evolve,
    evolve_moments,
    g2_curve,
    steady_state,
    two_time_correlator,
)
from .pulses import PulseEnvelope
from .elimination import (
    AtomOperatorSet,
    EffectiveModel,
    JCParams,
    Susceptibilities,
    a_adb,
    a_pdb_general,
    epsilon_report,
    filtered_drive,
    g2_pdb_analytic,
    jc_a_pdb,
    jc_adb_lindblad,
    jc_atom_ops,
    jc_full_model,
    jc_g2_effective,
    jc_moment_generator,
    jc_moment_system,
    jc_pdb_lindblad,
    noise_operator_B,
    pdb_correlator,
    susceptibilities,
)
from .stirap import (
    DarkStateRecord,
    LambdaParams,
    adiabaticity_metric,
    dark_state,
    dark_state_overlap,
    filtered_envelopes,
    stirap_adb_generator,
    stirap_full_model,
    stirap_observables,
    stirap_pdb_generator,
    stirap_pdb_lindblad,
)
