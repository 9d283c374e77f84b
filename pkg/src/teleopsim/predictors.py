"""Delay compensators: Smith predictor (operator end) and minimum-jerk
extrapolator (remote end).

The Smith predictor runs a copy of the remote side with zero delay, driven by
the live outgoing wave, and corrects the received return wave with the model's
fresh-minus-roundtrip-old outputs: v_o = v_hat + y_model(t) - y_model(t - 2*tau).
With a perfect model and constant delay that telescopes to the zero-delay
feedback.

The minimum-jerk predictor bridges gaps in the incoming wave stream by
extrapolating the quintic blend through the last two received samples; it is
a pass-through whenever deliveries are fresh.
"""

from __future__ import annotations

import math

from .channel import PollResult
from .plant import RemoteEnd, VehicleModel
from .waves import WaveImpedance


class HorizonError(RuntimeError):
    """The measured delay exceeds what the predictor's history can cover."""


def mj_blend(gamma: float) -> float:
    """Quintic minimum-jerk blend 6g^5 - 15g^4 + 10g^3 (0 at g=0, 1 at g=1)."""
    return 6.0 * gamma**5 - 15.0 * gamma**4 + 10.0 * gamma**3


def mj_interpolate(x1, x2, t1: float, t2: float, t: float,
                   gamma_max: float = 2.0):
    """Minimum-jerk value at time t through (t1, x1) and (t2, x2).

    gamma = (t - t1)/(t2 - t1), clamped to [0, gamma_max]; values past t2
    extrapolate along the same quintic, which grows fast (3.375 at gamma=1.5),
    hence the clamp.
    """
    if t2 <= t1:
        raise ValueError(f"need t2 > t1, got t1={t1!r}, t2={t2!r}")
    gamma = (t - t1) / (t2 - t1)
    gamma = max(0.0, min(gamma_max, gamma))
    return x1 + (x2 - x1) * mj_blend(gamma)


class MinimumJerkPredictor:
    """Two-point sliding-window extrapolator for a sampled wave stream."""

    def __init__(self, gamma_max: float = 2.0):
        if gamma_max < 1.0:
            raise ValueError(f"gamma_max must be >= 1, got {gamma_max!r}")
        self.gamma_max = gamma_max
        self._p1: tuple[float, float] | None = None
        self._p2: tuple[float, float] | None = None

    def step(self, received: PollResult, t: float) -> float:
        """Fresh delivery passes through (and updates the window); a stale
        poll extrapolates from the window, holding when fewer than two
        distinct samples have been seen."""
        if received.fresh:
            value = received.payload
            stamp = received.t_send
            if self._p2 is not None and stamp == self._p2[0]:
                self._p2 = (stamp, value)
            else:
                self._p1, self._p2 = self._p2, (stamp, value)
            return value
        if self._p2 is None:
            return 0.0
        if self._p1 is None:
            return self._p2[1]
        (t1, x1), (t2, x2) = self._p1, self._p2
        return mj_interpolate(x1, x2, t1, t2, t, self.gamma_max)

    def reset(self) -> None:
        self._p1 = None
        self._p2 = None


class SmithPredictor:
    """Operator-side correction of the received return wave.

    Holds a zero-delay copy of the remote side (termination + vehicle model)
    and a ring buffer of its wave output spanning 2 * tau_max, tapped at the
    measured round trip.  Pass ``model=None`` to disable the correction
    entirely (v_o = held v_hat).
    """

    def __init__(self, z: WaveImpedance, model: VehicleModel | None, dt: float,
                 tau_max: float = 2.0):
        if dt <= 0.0:
            raise ValueError(f"dt must be > 0, got {dt!r}")
        if tau_max < 0.0:
            raise ValueError(f"tau_max must be >= 0, got {tau_max!r}")
        self.dt = dt
        self.tau_max = tau_max
        self._remote = RemoteEnd(model.clone(), z, dt) if model is not None else None
        # +2: current sample plus rounding slack at the horizon.
        self._size = int(round(2.0 * tau_max / dt)) + 2
        self._ring = [0.0] * self._size
        self._k = 0
        self._held = 0.0

    def step(self, u_o: float, received: PollResult, tau_est: float, t: float) -> float:
        """Advance the model with the live u_o and return the corrected v_o."""
        if received.fresh:
            self._held = received.payload
        v_hat = self._held
        if self._remote is None:
            self._k += 1
            return v_hat

        if tau_est > self.tau_max + 1e-12:
            raise HorizonError(
                f"measured delay {tau_est:.6g}s exceeds predictor horizon {self.tau_max}s"
            )
        y_now, _, _ = self._remote.step(u_o)
        k = self._k
        self._ring[k % self._size] = y_now
        n = int(round(2.0 * tau_est / self.dt))
        tap_index = k - n
        if tap_index < 0:
            y_old = 0.0  # model was at rest before the run began
        else:
            if tap_index <= k - self._size:
                raise HorizonError(
                    f"round-trip tap {n} steps back falls outside the {self._size}-step history"
                )
            y_old = self._ring[tap_index % self._size]
        self._k = k + 1
        return v_hat + y_now - y_old

    def reset(self) -> None:
        if self._remote is not None:
            self._remote.reset()
        self._ring = [0.0] * self._size
        self._k = 0
        self._held = 0.0


def hold_last(received: PollResult, previous: float = 0.0) -> float:
    """Receiver policy without prediction: keep the last delivered value."""
    if received.fresh:
        return received.payload
    if received.payload is None:
        return previous
    return received.payload
