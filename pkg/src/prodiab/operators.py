"""Finite-dimensional operator algebra on tensor-product Hilbert spaces.

All operators are dense complex matrices tagged with the ordered list of
subsystem dimensions they act on.  Superoperators act on column-vectorized
matrices (column-stacking convention, ``order='F'``), fixed project-wide so
that superoperator matrices are reproducible across implementations.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Sequence

import numpy as np

from .errors import InvariantViolationError

# Density-matrix invariant tolerances; one order above accumulated RK error
# at default integrator tolerances.
HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-8
POSITIVITY_TOL = 1e-8


@dataclass(frozen=True)
class HilbertSpace:
    """Ordered subsystem dimensions of a composite space."""

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) == 0:
            raise ValueError("HilbertSpace needs at least one subsystem")
        if any(d < 1 for d in dims):
            raise ValueError(f"subsystem dimensions must be positive, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return prod(self.dims)


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=np.complex128)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense complex matrix on a tagged Hilbert space."""

    space: HilbertSpace
    array: np.ndarray

    def __post_init__(self):
        arr = _readonly(self.array)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"operator must be square, got shape {arr.shape}")
        if arr.shape[0] != self.space.dim:
            raise ValueError(
                f"operator dimension {arr.shape[0]} does not match space "
                f"dimension {self.space.dim}"
            )
        object.__setattr__(self, "array", arr)

    def dag(self) -> "OperatorMatrix":
        return OperatorMatrix(self.space, self.array.conj().T)

    def trace(self) -> complex:
        return complex(np.trace(self.array))

    def _coerce(self, other):
        if isinstance(other, OperatorMatrix):
            if other.space != self.space:
                raise ValueError("operators act on different spaces")
            return other.array
        return other

    def __matmul__(self, other):
        return OperatorMatrix(self.space, self.array @ self._coerce(other))

    def __add__(self, other):
        return OperatorMatrix(self.space, self.array + self._coerce(other))

    def __sub__(self, other):
        return OperatorMatrix(self.space, self.array - self._coerce(other))

    def __mul__(self, scalar):
        return OperatorMatrix(self.space, self.array * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return OperatorMatrix(self.space, -self.array)


class DensityMatrix(OperatorMatrix):
    """State matrix; validated to be Hermitian, unit-trace and positive
    within the module tolerances."""

    def __post_init__(self):
        super().__post_init__()
        validate_density(self.array)


def validate_density(rho: np.ndarray, scale: float = 1.0) -> None:
    """Raise if ``rho`` violates the density-matrix invariants.

    ``scale`` multiplies every tolerance (the 10x abort criterion of the
    integrator uses ``scale=10``).
    """
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > HERMITICITY_TOL * scale:
        raise InvariantViolationError(f"not Hermitian: max deviation {herm:.3e}")
    tr = np.trace(rho)
    if abs(tr - 1.0) > TRACE_TOL * scale:
        raise InvariantViolationError(f"trace {tr:.12g} not within tolerance of 1")
    lo = float(np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))))
    if lo < -POSITIVITY_TOL * scale:
        raise InvariantViolationError(f"negative eigenvalue {lo:.3e}")


@dataclass(frozen=True)
class Superoperator:
    """Matrix acting on column-vectorized operators of ``space``."""

    space: HilbertSpace
    array: np.ndarray

    def __post_init__(self):
        arr = _readonly(self.array)
        d2 = self.space.dim ** 2
        if arr.shape != (d2, d2):
            raise ValueError(f"superoperator must be {d2}x{d2}, got {arr.shape}")
        object.__setattr__(self, "array", arr)

    def apply(self, op: np.ndarray) -> np.ndarray:
        d = self.space.dim
        return unvec(self.array @ vec(op), d)

    def __add__(self, other):
        if other.space != self.space:
            raise ValueError("superoperators act on different spaces")
        return Superoperator(self.space, self.array + other.array)

    def __mul__(self, scalar):
        return Superoperator(self.space, self.array * scalar)

    __rmul__ = __mul__


def vec(m: np.ndarray) -> np.ndarray:
    """Column-stack a matrix into a vector."""
    return np.asarray(m, dtype=np.complex128).flatten(order="F")


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    """Inverse of :func:`vec`."""
    return np.asarray(v).reshape((d, d), order="F")


def identity(space: HilbertSpace) -> OperatorMatrix:
    return OperatorMatrix(space, np.eye(space.dim, dtype=np.complex128))


def basis_density(space: HilbertSpace, occupations: Sequence[int]) -> DensityMatrix:
    """Projector onto the product basis state with the given occupation in
    each subsystem."""
    if len(occupations) != len(space.dims):
        raise ValueError("one occupation number per subsystem required")
    idx = 0
    for n, d in zip(occupations, space.dims):
        if not 0 <= n < d:
            raise ValueError(f"occupation {n} out of range for dimension {d}")
        idx = idx * d + n
    rho = np.zeros((space.dim, space.dim), dtype=np.complex128)
    rho[idx, idx] = 1.0
    return DensityMatrix(space, rho)


def build_annihilation(n_max: int) -> OperatorMatrix:
    """Bosonic annihilation operator on a Fock space truncated at ``n_max``.

    Entry (n-1, n) is sqrt(n).  ``n_max = 0`` is rejected: a single level
    supports no dynamics.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    a = np.diag(np.sqrt(np.arange(1, n_max + 1)), k=1).astype(np.complex128)
    return OperatorMatrix(HilbertSpace((n_max + 1,)), a)


def build_transition(d: int, i: int, j: int) -> OperatorMatrix:
    """|i><j| on a d-level system."""
    if not (0 <= i < d and 0 <= j < d):
        raise ValueError(f"indices ({i}, {j}) out of range for d = {d}")
    m = np.zeros((d, d), dtype=np.complex128)
    m[i, j] = 1.0
    return OperatorMatrix(HilbertSpace((d,)), m)


def embed(op: OperatorMatrix, slot: int, space: HilbertSpace) -> OperatorMatrix:
    """Extend a single-subsystem operator to the full space, identity on
    every other factor.  Kronecker ordering follows ``space.dims``."""
    if not 0 <= slot < len(space.dims):
        raise ValueError(f"slot {slot} out of range")
    if op.array.shape[0] != space.dims[slot]:
        raise ValueError(
            f"operator dimension {op.array.shape[0]} does not match "
            f"dims[{slot}] = {space.dims[slot]}"
        )
    out = np.eye(1, dtype=np.complex128)
    for k, d in enumerate(space.dims):
        factor = op.array if k == slot else np.eye(d, dtype=np.complex128)
        out = np.kron(out, factor)
    return OperatorMatrix(space, out)


def dissipator(a: OperatorMatrix) -> Superoperator:
    """Superoperator of the jump term rho -> A rho A+ - {A+A, rho}/2."""
    arr = a.array
    d = arr.shape[0]
    eye = np.eye(d, dtype=np.complex128)
    ada = arr.conj().T @ arr
    sp = (
        np.kron(arr.conj(), arr)
        - 0.5 * np.kron(eye, ada)
        - 0.5 * np.kron(ada.T, eye)
    )
    return Superoperator(a.space, sp)


def liouvillian(
    h: OperatorMatrix, jumps: Sequence[tuple[OperatorMatrix, float]] = ()
) -> Superoperator:
    """Generator -i[H, .] plus rate-weighted dissipators as one matrix."""
    d = h.array.shape[0]
    eye = np.eye(d, dtype=np.complex128)
    sp = -1j * (np.kron(eye, h.array) - np.kron(h.array.T, eye))
    for op, rate in jumps:
        if op.space != h.space:
            raise ValueError("jump operator acts on a different space")
        if rate < 0:
            raise ValueError(f"negative jump rate {rate}")
        sp = sp + rate * dissipator(op).array
    return Superoperator(h.space, sp)


def expectation(op: OperatorMatrix, rho) -> complex:
    """Tr(op rho)."""
    rho_arr = rho.array if isinstance(rho, OperatorMatrix) else np.asarray(rho)
    if rho_arr.shape != op.array.shape:
        raise ValueError("operator and state have mismatched shapes")
    return complex(np.trace(op.array @ rho_arr))


def trace_preservation_residual(sp: Superoperator) -> float:
    """Max-norm residual of vec(I)+ acting on the superoperator; zero for
    any trace-preserving generator."""
    d = sp.space.dim
    left = vec(np.eye(d, dtype=np.complex128)).conj()
    return float(np.max(np.abs(left @ sp.array)))
