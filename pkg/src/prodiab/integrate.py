"""Adaptive embedded Runge-Kutta integration (Dormand-Prince 5(4)).

Works natively on complex state vectors.  Requested output times and any
registered breakpoints (e.g. boxcar pulse edges) are mandatory step
boundaries, so discontinuous right-hand sides are never stepped across.
A fixed-step mode is provided for convergence-order checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import StiffnessError

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
)
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
# b5 - b4; the last entry weights the FSAL stage at t + h.
_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)

_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
_SAFETY = 0.9


@dataclass
class IntegrationResult:
    ys: np.ndarray  # (len(t_out), n) complex
    n_steps: int
    n_rejected: int
    error_estimate: float  # sum of accepted local error norms (absolute, RMS)


def _dp_step(f, t, y, h):
    """One Dormand-Prince step: returns (y5, local error vector)."""
    k = [f(t, y)]
    for i in range(1, 6):
        yi = y + h * sum(a * kj for a, kj in zip(_A[i], k))
        k.append(f(t + _C[i] * h, yi))
    y5 = y + h * sum(b * kj for b, kj in zip(_B5, k))
    k.append(f(t + h, y5))
    err = h * sum(e * kj for e, kj in zip(_E, k))
    return y5, err


def solve_dopri(
    f: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    y0: np.ndarray,
    t_out: Sequence[float],
    *,
    rel_tol: float = 1e-9,
    abs_tol: float = 1e-12,
    max_step: float = 0.1,
    breakpoints: Sequence[float] = (),
    fixed_step: float | None = None,
) -> IntegrationResult:
    """Integrate y' = f(t, y) and return the solution at each ``t_out``.

    ``t_out`` must be ascending with t_out[0] >= t0.  ``breakpoints`` are
    additional times the stepper must land on exactly.
    """
    t_out = np.asarray(t_out, dtype=float)
    if t_out.size == 0:
        raise ValueError("empty output grid")
    if np.any(np.diff(t_out) <= 0):
        raise ValueError("output grid must be strictly increasing")
    if t_out[0] < t0 - 1e-12:
        raise ValueError("output grid starts before t0")

    y = np.asarray(y0, dtype=np.complex128).copy()
    t_end = float(t_out[-1])
    stops = np.unique(
        np.concatenate(
            [t_out, [b for b in breakpoints if t0 < b < t_end]]
        )
    )
    stops = stops[stops > t0 + 1e-14 * max(1.0, abs(t0))]

    out = np.empty((t_out.size, y.size), dtype=np.complex128)
    out_idx = 0
    if abs(t_out[0] - t0) <= 1e-12 * max(1.0, abs(t0)):
        out[0] = y
        out_idx = 1

    t = float(t0)
    h = fixed_step if fixed_step is not None else min(max_step, max((t_end - t0) / 100.0, 1e-8))
    n_steps = 0
    n_rejected = 0
    err_accum = 0.0

    for stop in stops:
        while True:
            remaining = stop - t
            if remaining <= 1e-12 * max(1.0, abs(stop)):
                break
            if fixed_step is None and h < 1e-13 * max(1.0, abs(t)):
                raise StiffnessError(t)
            if fixed_step is not None:
                h_try = min(fixed_step, remaining)
            else:
                h_try = min(h, remaining, max_step)
            y_new, err = _dp_step(f, t, y, h_try)
            if fixed_step is not None:
                t += h_try
                y = y_new
                n_steps += 1
                continue
            scale = abs_tol + rel_tol * np.maximum(np.abs(y), np.abs(y_new))
            enorm = float(np.sqrt(np.mean((np.abs(err) / scale) ** 2)))
            if enorm <= 1.0 or h_try < 1e-12 * max(1.0, abs(t)):
                t += h_try
                y = y_new
                n_steps += 1
                err_accum += float(np.sqrt(np.mean(np.abs(err) ** 2)))
            else:
                n_rejected += 1
            with np.errstate(divide="ignore"):
                factor = _SAFETY * enorm ** -0.2 if enorm > 0 else _MAX_FACTOR
            h = h_try * min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
        t = float(stop)
        while out_idx < t_out.size and abs(t_out[out_idx] - stop) <= 1e-12 * max(1.0, abs(stop)):
            out[out_idx] = y
            out_idx += 1

    if out_idx != t_out.size:
        raise RuntimeError("integration did not reach all output times")
    return IntegrationResult(out, n_steps, n_rejected, err_accum)
