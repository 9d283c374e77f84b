"""Remote vehicle dynamics and operator input generators.

The vehicle is a first-order lag from normalized command to forward
velocity: throttle produces acceleration ``K_a * x`` and drag bleeds it off
with time constant ``T_d`` (``T_d = inf`` gives a pure integrator).  Measured
velocity saturates at ``v_max``.  Stepped with explicit Euler at the loop's
fixed dt, so an identical copy can serve as the Smith predictor's internal
model.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field, replace

from .waves import WaveImpedance, remote_termination

DEFAULT_K_A = 5.0
DEFAULT_T_D = 30.0
DEFAULT_V_MAX = 7.5


@dataclass
class VehicleModel:
    """First-order velocity plant: y' = K_a * x - y / T_d, |y| <= v_max."""

    K_a: float = DEFAULT_K_A
    T_d: float = DEFAULT_T_D
    v_max: float = DEFAULT_V_MAX
    y: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.K_a) or self.K_a <= 0.0:
            raise ValueError(f"K_a must be finite and > 0, got {self.K_a!r}")
        if math.isnan(self.T_d) or self.T_d <= 0.0:
            raise ValueError(f"T_d must be > 0 (inf allowed), got {self.T_d!r}")
        if not math.isfinite(self.v_max) or self.v_max <= 0.0:
            raise ValueError(f"v_max must be finite and > 0, got {self.v_max!r}")

    def step(self, x_r: float, dt: float) -> float:
        """Advance one Euler step with command x_r; returns the new velocity."""
        if not math.isfinite(x_r):
            raise ValueError(f"command must be finite, got {x_r!r}")
        if dt <= 0.0:
            raise ValueError(f"dt must be > 0, got {dt!r}")
        drag = 0.0 if math.isinf(self.T_d) else self.y / self.T_d
        y = self.y + dt * (self.K_a * x_r - drag)
        if y > self.v_max:
            y = self.v_max
        elif y < -self.v_max:
            y = -self.v_max
        self.y = y
        return y

    def clone(self) -> "VehicleModel":
        return replace(self)

    def reset(self) -> None:
        self.y = 0.0

    def terminal_velocity(self, x: float) -> float:
        """Open-loop steady state for a constant command (clamped)."""
        if x == 0.0:
            return 0.0
        raw = math.inf if math.isinf(self.T_d) else self.K_a * self.T_d * x
        return max(-self.v_max, min(self.v_max, raw))


class RemoteEnd:
    """Matched remote termination wired to a vehicle: one tick of the remote side.

    Shared between the live loop and the Smith predictor's internal model so
    both execute the identical float pipeline.
    """

    def __init__(self, plant: VehicleModel, z: WaveImpedance, dt: float):
        self.plant = plant
        self.z = z
        self.dt = dt

    def step(self, v_r: float) -> tuple[float, float, float]:
        """Consume the incoming wave, step the plant, emit the return wave.

        Returns ``(u_r, x_r, y_r)``.
        """
        _, x_r = remote_termination(self.plant.y, v_r, self.z)
        y_r = self.plant.step(x_r, self.dt)
        u_r, _ = remote_termination(y_r, v_r, self.z)
        return u_r, x_r, y_r

    def reset(self) -> None:
        self.plant.reset()


@dataclass(frozen=True)
class InputSignal:
    """Operator command generator: step, sine, or zero-order-hold trace.

    Outputs are clamped to the normalized command range [-1, 1].
    """

    kind: str
    amplitude: float = 0.0
    start: float = 0.0
    frequency: float = 0.0
    samples: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in ("step", "sine", "trace"):
            raise ValueError(f"unknown input kind {self.kind!r}")
        if self.kind in ("step", "sine") and abs(self.amplitude) > 1.0:
            raise ValueError(
                f"amplitude must lie in [-1, 1], got {self.amplitude!r}"
            )
        if self.kind == "sine" and self.frequency <= 0.0:
            raise ValueError(f"sine frequency must be > 0, got {self.frequency!r}")
        if self.kind == "trace":
            if not self.samples:
                raise ValueError("trace input needs at least one (t, value) sample")
            times = [t for t, _ in self.samples]
            if any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
                raise ValueError("trace sample times must be strictly increasing")

    @classmethod
    def step(cls, amplitude: float, start: float = 0.0) -> "InputSignal":
        return cls(kind="step", amplitude=amplitude, start=start)

    @classmethod
    def sine(cls, amplitude: float, frequency: float, start: float = 0.0) -> "InputSignal":
        return cls(kind="sine", amplitude=amplitude, frequency=frequency, start=start)

    @classmethod
    def trace(cls, samples) -> "InputSignal":
        return cls(kind="trace", samples=tuple((float(t), float(v)) for t, v in samples))

    def value(self, t: float) -> float:
        if self.kind == "step":
            out = self.amplitude if t >= self.start else 0.0
        elif self.kind == "sine":
            if t < self.start:
                out = 0.0
            else:
                out = self.amplitude * math.sin(2.0 * math.pi * self.frequency * t)
        else:
            times = [s[0] for s in self.samples]
            i = bisect.bisect_right(times, t) - 1
            out = 0.0 if i < 0 else self.samples[i][1]
        return max(-1.0, min(1.0, out))

    def final_value(self, duration: float) -> float:
        """Nominal command level at the end of a run (0 for a pure sine)."""
        if self.kind == "step":
            return self.amplitude if duration >= self.start else 0.0
        if self.kind == "sine":
            return 0.0
        return self.samples[-1][1]

    @classmethod
    def parse(cls, text: str) -> "InputSignal":
        """Parse compact forms: ``step:A[:START]``, ``sine:A:FREQ``, ``trace:FILE``."""
        parts = text.split(":")
        kind = parts[0]
        try:
            if kind == "step":
                if len(parts) == 2:
                    return cls.step(float(parts[1]))
                if len(parts) == 3:
                    return cls.step(float(parts[1]), start=float(parts[2]))
            elif kind == "sine" and len(parts) == 3:
                return cls.sine(float(parts[1]), float(parts[2]))
            elif kind == "trace" and len(parts) == 2:
                return cls.trace(_read_trace_file(parts[1]))
        except ValueError as exc:
            raise ValueError(f"bad input spec {text!r}: {exc}") from exc
        raise ValueError(f"bad input spec {text!r} (want step:A[:T0], sine:A:F, trace:FILE)")


def _read_trace_file(path: str):
    samples = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if lineno == 1 and line.replace(" ", "").lower() == "t,value":
                continue
            fields = line.split(",")
            if len(fields) != 2:
                raise ValueError(f"{path}:{lineno}: expected 't,value'")
            samples.append((float(fields[0]), float(fields[1])))
    return samples
