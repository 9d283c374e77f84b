"""Online energy bookkeeping and passivity verdicts.

Two views of the link are monitored.  The wave view integrates input and
output wave energies; a delayed wave channel must satisfy
E_out(t) <= E_in(t) at every tick, so the running comparison is a live
passivity check.  The power-variable view evaluates the dissipation rate of
the raw delayed channel, which can go negative (the channel can generate
energy) -- the reason raw transmission is unsafe and wave transmission is
not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .waves import PowerSample, WaveImpedance, WaveSample, power_flow


class PassivityError(RuntimeError):
    """Accumulated output wave energy exceeded input energy plus tolerance."""


def zeta_power_channel(ps: PowerSample, z: WaveImpedance) -> float:
    """Instantaneous dissipation of the delayed power-variable channel.

    zeta = y_o^2/b - (y_o - b x_o)^2/(2b) + b x_r^2 - (y_r + b x_r)^2/(2b),
    evaluated with same-tick samples.  Negative values witness energy
    generation (non-passivity).
    """
    b = z.b
    return float(
        np.dot(ps.y_o, ps.y_o) / b
        - _sq(np.subtract(ps.y_o, np.multiply(b, ps.x_o))) / (2.0 * b)
        + b * np.dot(ps.x_r, ps.x_r)
        - _sq(np.add(ps.y_r, np.multiply(b, ps.x_r))) / (2.0 * b)
    )


def _sq(v) -> float:
    return float(np.dot(v, v))


def energy_storage(history, tau: float, z: WaveImpedance) -> float:
    """Energy stored in flight over the window [t - tau, t].

    ``history`` is a time-ordered sequence of PowerSamples whose stamps cover
    the window; integrates b/2 * x_o^2 + y_r^2 / (2b) with the left-rectangle
    rule (exact for the zero-order-hold signals of the fixed-step loop).
    """
    if tau < 0.0:
        raise ValueError(f"tau must be >= 0, got {tau!r}")
    if tau == 0.0:
        return 0.0
    if not history:
        raise ValueError("history is empty")
    t_end = history[-1].t
    t_start = t_end - tau
    if history[0].t > t_start + 1e-12:
        raise ValueError(
            f"history starts at {history[0].t}, needs to cover back to {t_start}"
        )
    total = 0.0
    for sample, nxt in zip(history, history[1:]):
        lo = max(sample.t, t_start)
        hi = min(nxt.t, t_end)
        if hi <= lo:
            continue
        integrand = 0.5 * z.b * _sq(sample.x_o) + _sq(sample.y_r) / (2.0 * z.b)
        total += integrand * (hi - lo)
    return total


def power_balance_check(ps: PowerSample, ws: WaveSample, z: WaveImpedance) -> float:
    """Residual between power computed from (x, y) pairs and from waves.

    Zero (to rounding) whenever the waves came from the encode transforms at
    the same impedance.
    """
    direct = float(np.dot(ps.x_o, ps.y_o) - np.dot(ps.x_r, ps.y_r))
    return direct - power_flow(ws)


@dataclass
class EnergyLedger:
    """Accumulated wave energies plus passivity state.

    E_in integrates the launched waves, E_out the delivered ones; the check
    E_out <= E_in + eps runs at every accumulation with eps scaled by the
    accumulated energy so long runs do not trip on float drift.
    """

    t: float = 0.0
    E_in: float = 0.0
    E_out: float = 0.0
    E_store: float = 0.0
    zeta: float = 0.0
    zeta_min: float = math.inf
    passive_so_far: bool = True
    violations: int = 0
    eps_scale: float = 1e-6
    _ticks: int = field(default=0, repr=False)

    def accumulate(self, ws: WaveSample, dt: float) -> "EnergyLedger":
        """Add one tick of wave energy and update the passivity verdict."""
        if dt <= 0.0:
            raise ValueError(f"dt must be > 0, got {dt!r}")
        self.t = ws.t
        self.E_in += dt * 0.5 * (_sq(ws.u_o) + _sq(ws.u_r))
        self.E_out += dt * 0.5 * (_sq(ws.v_o) + _sq(ws.v_r))
        if self.E_out > self.E_in + self.tolerance():
            self.passive_so_far = False
            self.violations += 1
        self._ticks += 1
        return self

    def tolerance(self) -> float:
        return self.eps_scale * max(1.0, self.E_in)

    def note_diagnostics(self, zeta: float, e_store: float = 0.0) -> None:
        """Record the power-channel dissipation observed this tick."""
        self.zeta = zeta
        self.E_store = e_store
        if zeta < self.zeta_min:
            self.zeta_min = zeta

    def require_passive(self) -> None:
        if not self.passive_so_far:
            raise PassivityError(
                f"wave channel emitted more energy than it received "
                f"(E_out={self.E_out:.9g} > E_in={self.E_in:.9g} + tol) "
                f"at t={self.t:.6g}s, {self.violations} violating tick(s)"
            )

    def reset(self) -> None:
        self.t = 0.0
        self.E_in = 0.0
        self.E_out = 0.0
        self.E_store = 0.0
        self.zeta = 0.0
        self.zeta_min = math.inf
        self.passive_so_far = True
        self.violations = 0
        self._ticks = 0


def accumulate_wave(ledger: EnergyLedger, ws: WaveSample, dt: float) -> EnergyLedger:
    """Functional alias for :meth:`EnergyLedger.accumulate`."""
    return ledger.accumulate(ws, dt)
