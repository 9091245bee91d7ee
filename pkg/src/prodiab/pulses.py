"""Drive envelopes and their cavity-filtered counterparts.

The filtered drive F solves dF/dt = f(t) - (kappa / 2 t_c) F, i.e. the
convolution of the envelope with the cavity response kernel.  It is
evaluated here through exact closed-form solutions of that equation, so
models can sample F at arbitrary integrator stage times.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import wofz


def _erfcx(z):
    """Scaled complementary error function, complex-safe."""
    return wofz(1j * np.asarray(z, dtype=np.complex128))


@dataclass(frozen=True)
class PulseEnvelope:
    """Constant, boxcar or Gaussian drive amplitude (rate units; times in
    units of the inverse cavity linewidth)."""

    kind: str
    amp: float = 0.0
    center: float = 0.0
    halfwidth: float = 0.0
    width: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "boxcar", "gaussian"):
            raise ValueError(f"unknown envelope kind {self.kind!r}")
        if self.amp < 0:
            raise ValueError("amplitude must be nonnegative")
        if self.kind == "boxcar" and self.halfwidth <= 0:
            raise ValueError("boxcar halfwidth must be positive")
        if self.kind == "gaussian" and self.width <= 0:
            raise ValueError("gaussian width must be positive")

    @classmethod
    def constant(cls, amp):
        return cls("constant", amp=amp)

    @classmethod
    def boxcar(cls, center, halfwidth, amp):
        return cls("boxcar", amp=amp, center=center, halfwidth=halfwidth)

    @classmethod
    def gaussian(cls, amp, center, width):
        return cls("gaussian", amp=amp, center=center, width=width)

    def __call__(self, t):
        """Pointwise envelope value; boxcar edges are inclusive."""
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            out = np.full_like(t, self.amp)
        elif self.kind == "boxcar":
            out = np.where(np.abs(t - self.center) <= self.halfwidth, self.amp, 0.0)
        else:
            out = self.amp * np.exp(-((t - self.center) ** 2) / (2.0 * self.width**2))
        return out if out.ndim else float(out)

    def breakpoints(self) -> tuple[float, ...]:
        """Times where the envelope is discontinuous (boxcar edges)."""
        if self.kind == "boxcar":
            return (self.center - self.halfwidth, self.center + self.halfwidth)
        return ()

    def _filtered_inf(self, t, alpha):
        """Filter response with the drive extending into the infinite past."""
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return np.full(t.shape, self.amp / alpha, dtype=np.complex128)
        if self.kind == "boxcar":
            t_on = self.center - self.halfwidth
            t_off = self.center + self.halfwidth
            out = np.zeros(t.shape, dtype=np.complex128)
            inside = (t >= t_on) & (t <= t_off)
            after = t > t_off
            out[inside] = (self.amp / alpha) * (1.0 - np.exp(-alpha * (t[inside] - t_on)))
            f_off = (self.amp / alpha) * (1.0 - np.exp(-alpha * 2.0 * self.halfwidth))
            out[after] = f_off * np.exp(-alpha * (t[after] - t_off))
            return out
        s = self.width
        x = (t - self.center) / s
        return (
            self.amp
            * np.sqrt(np.pi / 2.0)
            * s
            * np.exp(-0.5 * x**2)
            * _erfcx((alpha * s - x) / np.sqrt(2.0))
        )

    def filtered(self, t, kappa: float, t_c: complex = 1.0, start: float | None = None):
        """Exact solution of dF/dt = f(t) - (kappa / 2 t_c) F.

        ``start=None`` gives the infinite-past response (a constant drive is
        then at its stationary value 2 t_c f / kappa).  With ``start=s`` the
        solution obeys F(s) = 0, matching an envelope switched on at s.
        """
        alpha = kappa / (2.0 * t_c)
        scalar = np.isscalar(t)
        tt = np.atleast_1d(np.asarray(t, dtype=float))
        out = self._filtered_inf(tt, alpha)
        if start is not None:
            f_start = self._filtered_inf(np.asarray([float(start)]), alpha)[0]
            out = out - f_start * np.exp(-alpha * (tt - start))
        if np.isrealobj(np.asarray(t_c)) or abs(np.imag(t_c)) == 0.0:
            out = out.real
        return (out[0] if scalar else out)
