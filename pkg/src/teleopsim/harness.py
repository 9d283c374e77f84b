"""Closed-loop wiring, fixed-step experiment runner, and response metrics.

One tick advances the whole loop in a fixed order: read the operator command,
launch the forward wave (or the raw command), exchange both channel
directions, reconstruct the remote's incoming wave (minimum-jerk when
enabled), step the termination + vehicle, send the return wave, reconstruct
the operator's incoming wave (Smith-corrected when enabled), render feedback,
and update the energy ledger.  The order is fixed so identical configs yield
bit-identical traces.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .channel import ChannelEnd, DelayProfile
from .energy import EnergyLedger, PassivityError, zeta_power_channel
from .plant import InputSignal, RemoteEnd, VehicleModel
from .predictors import MinimumJerkPredictor, SmithPredictor, hold_last
from .waves import PowerSample, WaveImpedance, WaveSample

TRACE_COLUMNS = (
    "t", "x_o", "y_o", "x_r", "y_r",
    "u_o", "v_o", "u_r", "v_r",
    "tau_est", "E_in", "E_out", "zeta",
)

FLAG_ZETA_NEGATIVE = 1
FLAG_PASSIVITY_VIOLATION = 2
FLAG_STALE_FORWARD = 4
FLAG_STALE_RETURN = 8


class ConfigError(ValueError):
    """Experiment configuration failed validation."""


class Architecture(Enum):
    """Transmission scheme plus optional predictors."""

    RAW = "raw"
    WAVE = "wave"
    WAVE_SMITH = "wave+smith"
    WAVE_MJ = "wave+mj"
    WAVE_PRED = "wave+pred"

    @property
    def uses_waves(self) -> bool:
        return self is not Architecture.RAW

    @property
    def uses_smith(self) -> bool:
        return self in (Architecture.WAVE_SMITH, Architecture.WAVE_PRED)

    @property
    def uses_mj(self) -> bool:
        return self in (Architecture.WAVE_MJ, Architecture.WAVE_PRED)

    @classmethod
    def parse(cls, text: str) -> "Architecture":
        key = text.strip().lower()
        for member in cls:
            if member.value == key:
                return member
        valid = ", ".join(m.value for m in cls)
        raise ConfigError(f"arch: unknown architecture {text!r} (valid: {valid})")


@dataclass
class ExperimentConfig:
    """Everything a deterministic run needs; validation errors name the field."""

    arch: Architecture = Architecture.WAVE
    b: float = 7.5
    delay: float = 0.0
    delay_breakpoints: tuple | None = None
    input: InputSignal = field(default_factory=lambda: InputSignal.step(0.5))
    duration: float = 10.0
    dt: float = 0.001
    K_a: float = 5.0
    T_d: float = 30.0
    v_max: float = 7.5
    smith_tau_max: float = 2.0
    mj_gamma_max: float = 2.0
    band: float = 0.02
    oscillation_threshold: float = 0.05
    zeta_delayed_substitution: bool = False
    seed: int = 0

    def validate(self) -> None:
        problems = []
        if not isinstance(self.arch, Architecture):
            problems.append(f"arch: expected Architecture, got {self.arch!r}")
        if not (math.isfinite(self.b) and self.b > 0.0):
            problems.append(f"b: must be finite and > 0, got {self.b!r}")
        if not (math.isfinite(self.dt) and self.dt > 0.0):
            problems.append(f"dt: must be finite and > 0, got {self.dt!r}")
        if not (math.isfinite(self.duration) and self.duration > 0.0):
            problems.append(f"duration: must be finite and > 0, got {self.duration!r}")
        elif self.dt > 0.0 and self.duration < 10.0 * self.dt:
            problems.append(
                f"duration: must cover at least 10 steps, got {self.duration!r} at dt={self.dt!r}"
            )
        if math.isnan(self.T_d) or self.T_d <= 0.0:
            problems.append(f"T_d: must be > 0 (inf allowed), got {self.T_d!r}")
        elif self.dt > 0.0 and not math.isinf(self.T_d) and self.dt >= 2.0 * self.T_d:
            problems.append(
                f"dt: explicit Euler needs dt < 2*T_d, got dt={self.dt!r}, T_d={self.T_d!r}"
            )
        if not (math.isfinite(self.K_a) and self.K_a > 0.0):
            problems.append(f"K_a: must be finite and > 0, got {self.K_a!r}")
        if not (math.isfinite(self.v_max) and self.v_max > 0.0):
            problems.append(f"v_max: must be finite and > 0, got {self.v_max!r}")
        if not (math.isfinite(self.delay) and self.delay >= 0.0):
            problems.append(f"delay: must be finite and >= 0, got {self.delay!r}")
        if self.delay_breakpoints is not None:
            try:
                DelayProfile.piecewise(self.delay_breakpoints)
            except ValueError as exc:
                problems.append(f"delay_breakpoints: {exc}")
        if not (math.isfinite(self.band) and 0.0 < self.band < 1.0):
            problems.append(f"band: must lie in (0, 1), got {self.band!r}")
        if self.smith_tau_max < 0.0:
            problems.append(f"smith_tau_max: must be >= 0, got {self.smith_tau_max!r}")
        if self.mj_gamma_max < 1.0:
            problems.append(f"mj_gamma_max: must be >= 1, got {self.mj_gamma_max!r}")
        if isinstance(self.arch, Architecture) and self.arch.uses_smith:
            max_delay = self._max_configured_delay()
            if max_delay is not None and max_delay > self.smith_tau_max:
                problems.append(
                    f"smith_tau_max: predictor horizon {self.smith_tau_max!r} shorter "
                    f"than configured delay {max_delay!r}"
                )
        if problems:
            raise ConfigError("; ".join(problems))

    def _max_configured_delay(self) -> float | None:
        if self.delay_breakpoints is not None:
            return max(tau for _, tau in self.delay_breakpoints)
        if math.isfinite(self.delay):
            return self.delay
        return None

    def delay_profile(self) -> DelayProfile:
        if self.delay_breakpoints is not None:
            return DelayProfile.piecewise(self.delay_breakpoints)
        return DelayProfile.constant(self.delay)

    def make_plant(self) -> VehicleModel:
        return VehicleModel(K_a=self.K_a, T_d=self.T_d, v_max=self.v_max)

    def describe(self) -> str:
        delay = (
            f"piecewise{list(self.delay_breakpoints)}"
            if self.delay_breakpoints is not None
            else f"{self.delay}"
        )
        return (
            f"arch={self.arch.value} b={self.b} delay={delay} "
            f"input={self.input.kind} duration={self.duration} dt={self.dt}"
        )


@dataclass
class TraceLog:
    """Columnar per-tick record of one run."""

    config: ExperimentConfig
    t: list = field(default_factory=list)
    x_o: list = field(default_factory=list)
    y_o: list = field(default_factory=list)
    x_r: list = field(default_factory=list)
    y_r: list = field(default_factory=list)
    u_o: list = field(default_factory=list)
    v_o: list = field(default_factory=list)
    u_r: list = field(default_factory=list)
    v_r: list = field(default_factory=list)
    tau_est: list = field(default_factory=list)
    E_in: list = field(default_factory=list)
    E_out: list = field(default_factory=list)
    zeta: list = field(default_factory=list)
    flags: list = field(default_factory=list)

    def append(self, row: tuple) -> None:
        (t, x_o, y_o, x_r, y_r, u_o, v_o, u_r, v_r,
         tau_est, e_in, e_out, zeta, flags) = row
        self.t.append(t)
        self.x_o.append(x_o)
        self.y_o.append(y_o)
        self.x_r.append(x_r)
        self.y_r.append(y_r)
        self.u_o.append(u_o)
        self.v_o.append(v_o)
        self.u_r.append(u_r)
        self.v_r.append(v_r)
        self.tau_est.append(tau_est)
        self.E_in.append(e_in)
        self.E_out.append(e_out)
        self.zeta.append(zeta)
        self.flags.append(flags)

    def __len__(self) -> int:
        return len(self.t)

    def column(self, name: str) -> np.ndarray:
        if name not in TRACE_COLUMNS:
            raise KeyError(name)
        return np.asarray(getattr(self, name), dtype=float)

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(TRACE_COLUMNS) + "\n")
            columns = [getattr(self, name) for name in TRACE_COLUMNS]
            for values in zip(*columns):
                fh.write(",".join(repr(v) for v in values) + "\n")


class ClosedLoop:
    """Tick engine shared by offline runs and the live service."""

    def __init__(self, cfg: ExperimentConfig):
        cfg.validate()
        self.cfg = cfg
        self.arch = cfg.arch
        self.dt = cfg.dt
        self.z = WaveImpedance(cfg.b)
        profile = cfg.delay_profile()
        self.forward = ChannelEnd(profile)
        self.backward = ChannelEnd(cfg.delay_profile())
        self.remote = RemoteEnd(cfg.make_plant(), self.z, cfg.dt)
        self.ledger = EnergyLedger()
        self.k = 0
        self._build_predictors()
        self._held_v_r = 0.0
        self._held_v_o = 0.0
        self._held_x_r = 0.0
        self._held_y_o = 0.0
        # Raw-run diagnostics: in-flight storage window and delayed histories.
        self._store_window: deque = deque()
        self._store_sum = 0.0
        self._x_o_hist: deque = deque()
        self._y_r_hist: deque = deque()

    def _build_predictors(self) -> None:
        cfg = self.cfg
        self.mj = MinimumJerkPredictor(cfg.mj_gamma_max) if self.arch.uses_mj else None
        self.smith = (
            SmithPredictor(self.z, cfg.make_plant(), cfg.dt, cfg.smith_tau_max)
            if self.arch.uses_smith
            else None
        )

    @property
    def t(self) -> float:
        return self.k * self.dt

    def tick(self, x_o: float) -> tuple:
        """Advance one step with operator command x_o; returns a trace row."""
        if self.arch is Architecture.RAW:
            row = self._tick_raw(x_o)
        else:
            row = self._tick_wave(x_o)
        self.k += 1
        return row

    def _tick_wave(self, x_o: float) -> tuple:
        z = self.z
        t = self.k * self.dt
        flags = 0

        u_o = z.beta * x_o
        self.forward.send(u_o, t)
        res_fwd = self.forward.poll(t)
        if not res_fwd.fresh:
            flags |= FLAG_STALE_FORWARD
        if self.mj is not None:
            v_r = self.mj.step(res_fwd, t)
        else:
            v_r = self._held_v_r = hold_last(res_fwd, self._held_v_r)

        u_r, x_r, y_r = self.remote.step(v_r)
        self.backward.send(u_r, t)
        res_ret = self.backward.poll(t)
        if not res_ret.fresh:
            flags |= FLAG_STALE_RETURN
        tau_est = self.backward.delay_estimate(t)
        if self.smith is not None:
            v_o = self.smith.step(u_o, res_ret, tau_est, t)
        else:
            v_o = self._held_v_o = hold_last(res_ret, self._held_v_o)
        y_o = 0.5 * z.b * x_o + z.beta * v_o

        # The ledger audits the channel boundary, so output energy counts
        # only what was actually delivered this tick (held or predicted
        # reconstructions are receiver-side, not channel output).
        v_o_delivered = res_ret.payload if res_ret.fresh else 0.0
        v_r_delivered = res_fwd.payload if res_fwd.fresh else 0.0
        self.ledger.accumulate(
            WaveSample(t, u_o, v_o_delivered, u_r, v_r_delivered), self.dt
        )
        if not self.ledger.passive_so_far:
            flags |= FLAG_PASSIVITY_VIOLATION

        return (t, x_o, y_o, x_r, y_r, u_o, v_o, u_r, v_r,
                tau_est, self.ledger.E_in, self.ledger.E_out, 0.0, flags)

    def _tick_raw(self, x_o: float) -> tuple:
        t = self.k * self.dt
        flags = 0

        self.forward.send(x_o, t)
        res_fwd = self.forward.poll(t)
        if not res_fwd.fresh:
            flags |= FLAG_STALE_FORWARD
        x_r = self._held_x_r = hold_last(res_fwd, self._held_x_r)
        y_r = self.remote.plant.step(x_r, self.dt)
        self.backward.send(y_r, t)
        res_ret = self.backward.poll(t)
        if not res_ret.fresh:
            flags |= FLAG_STALE_RETURN
        y_o = self._held_y_o = hold_last(res_ret, self._held_y_o)
        tau_est = self.backward.delay_estimate(t)

        zeta = self._raw_zeta(t, x_o, y_o, x_r, y_r)
        if zeta < 0.0:
            flags |= FLAG_ZETA_NEGATIVE
        self._update_storage(t, x_o, y_r, zeta)

        return (t, x_o, y_o, x_r, y_r, 0.0, 0.0, 0.0, 0.0,
                tau_est, 0.0, 0.0, zeta, flags)

    def _raw_zeta(self, t, x_o, y_o, x_r, y_r) -> float:
        if self.cfg.zeta_delayed_substitution:
            # Evaluate with the transport identities substituted from true
            # histories instead of the receiver's held values.
            n = int(round(self.forward.profile.tau(t) / self.dt))
            x_o_del = self._x_o_hist[-n - 1] if n < len(self._x_o_hist) else 0.0
            y_r_del = self._y_r_hist[-n - 1] if n < len(self._y_r_hist) else 0.0
            ps = PowerSample(t, x_o, y_r_del, x_o_del, y_r)
        else:
            ps = PowerSample(t, x_o, y_o, x_r, y_r)
        return zeta_power_channel(ps, self.z)

    def _update_storage(self, t, x_o, y_r, zeta) -> None:
        tau = self.forward.profile.tau(t)
        while self._store_window and self._store_window[0][0] < t - tau - 1e-12:
            self._store_sum -= self._store_window.popleft()[1]
        self.ledger.note_diagnostics(zeta, self._store_sum * self.dt)
        integrand = 0.5 * self.z.b * x_o * x_o + y_r * y_r / (2.0 * self.z.b)
        self._store_window.append((t, integrand))
        self._store_sum += integrand
        self._x_o_hist.append(x_o)
        self._y_r_hist.append(y_r)
        if len(self._x_o_hist) > 1 + int(round(self.cfg.smith_tau_max * 4 / self.dt)):
            self._x_o_hist.popleft()
            self._y_r_hist.popleft()

    # -- runtime reconfiguration (used by the live service) ----------------

    def set_delay(self, delay: float | DelayProfile) -> None:
        """Swap the delay profile; in-flight messages keep their schedule."""
        profile = delay if isinstance(delay, DelayProfile) else DelayProfile.constant(delay)
        self.forward.profile = profile
        self.backward.profile = profile
        self.cfg = replace(self.cfg, delay=profile.tau(self.t), delay_breakpoints=None)

    def set_arch(self, arch: Architecture) -> None:
        """Switch architecture: flush channels and predictors, keep the vehicle."""
        if arch is self.arch:
            return
        self.cfg = replace(self.cfg, arch=arch)
        self.arch = arch
        self._flush_transport()

    def set_b(self, b: float) -> None:
        """Change the wave impedance: waves encoded under the old b are discarded."""
        if b == self.z.b:
            return
        self.cfg = replace(self.cfg, b=b)
        self.z = WaveImpedance(b)
        self.remote = RemoteEnd(self.remote.plant, self.z, self.dt)
        self._flush_transport()

    def _flush_transport(self) -> None:
        self.forward.reset(self.cfg.delay_profile())
        self.backward.reset(self.cfg.delay_profile())
        self._build_predictors()
        self.ledger.reset()
        self._held_v_r = 0.0
        self._held_v_o = 0.0
        self._held_x_r = 0.0
        self._held_y_o = 0.0
        self._store_window.clear()
        self._store_sum = 0.0
        self._x_o_hist.clear()
        self._y_r_hist.clear()


def run_experiment(cfg: ExperimentConfig, check_passivity: bool = True) -> TraceLog:
    """Run one deterministic fixed-step experiment and return its trace."""
    cfg.validate()
    loop = ClosedLoop(cfg)
    log = TraceLog(cfg)
    wave_run = cfg.arch.uses_waves
    n_steps = int(round(cfg.duration / cfg.dt))
    signal = cfg.input
    for _ in range(n_steps + 1):
        x_o = signal.value(loop.t)
        log.append(loop.tick(x_o))
        if check_passivity and wave_run:
            loop.ledger.require_passive()
    return log


@dataclass(frozen=True)
class Metrics:
    """Step-response summary of the operator feedback signal."""

    y_inf: float
    settling_time: float
    overshoot: float
    oscillation_index: float
    steady_state_error: float


def analytic_equilibrium(cfg: ExperimentConfig) -> tuple[float, float]:
    """Closed-form steady state (feedback y_o, remote velocity y_r).

    Wave transmission: the remote settles where the termination's command
    vanishes, y_r = b x G/(2b + G) with plant DC gain G = K_a T_d, and the
    operator feedback blends the command feedthrough with the returned wave:
    y_o = b x / 2 + y_r / 2.  Raw transmission drives the vehicle open loop.
    All values clamp at the velocity saturation.
    """
    x = cfg.input.final_value(cfg.duration)
    gain = math.inf if math.isinf(cfg.T_d) else cfg.K_a * cfg.T_d
    if cfg.arch is Architecture.RAW:
        if x == 0.0:
            y_r = 0.0
        elif math.isinf(gain):
            y_r = math.copysign(cfg.v_max, x)
        else:
            y_r = _clamp(gain * x, cfg.v_max)
        return y_r, y_r
    if math.isinf(gain):
        y_r = _clamp(cfg.b * x, cfg.v_max)
    else:
        y_r = _clamp(cfg.b * x * gain / (2.0 * cfg.b + gain), cfg.v_max)
    y_o = 0.5 * cfg.b * x + 0.5 * y_r
    return y_o, y_r


def _clamp(v: float, bound: float) -> float:
    return max(-bound, min(bound, v))


def compute_metrics(log: TraceLog, y_inf: float, band: float = 0.02) -> Metrics:
    """Settling time, overshoot, late-window peak-to-peak, and steady error.

    Settling is the first time after which the feedback stays within
    ``band * |y_inf|`` of y_inf for the rest of the run (inf when it never
    does).  With y_inf == 0 the band falls back to ``band * max|y_o|``.
    """
    y = log.column("y_o")
    t = log.column("t")
    if len(y) == 0:
        raise ValueError("empty trace")
    scale = abs(y_inf)
    if scale == 0.0:
        scale = float(np.max(np.abs(y)))
        if scale == 0.0:
            return Metrics(y_inf, 0.0, 0.0, 0.0, 0.0)
    tol = band * scale

    outside = np.abs(y - y_inf) > tol
    if not outside.any():
        settling = 0.0
    else:
        last_out = int(np.flatnonzero(outside)[-1])
        settling = math.inf if last_out == len(y) - 1 else float(t[last_out + 1])

    overshoot = 100.0 * max(float(np.max(y - y_inf)), 0.0) / scale

    window = t >= t[-1] - 0.2 * (t[-1] - t[0])
    tail = y[window]
    oscillation = float(np.max(tail) - np.min(tail))
    steady_error = abs(float(np.mean(tail)) - y_inf)
    return Metrics(y_inf, settling, overshoot, oscillation, steady_error)


SWEEP_COLUMNS = (
    "arch", "delay", "b", "y_inf", "settling_time",
    "overshoot", "oscillation_index", "steady_state_error",
)


def sweep(base: ExperimentConfig, axis: str, values, archs=None) -> list[dict]:
    """Cross-product runs over one axis (times an optional architecture list).

    Returns one metrics row per cell in deterministic (arch-major) order.
    """
    if axis not in ("delay", "arch", "b"):
        raise ConfigError(f"axis: must be one of delay, arch, b, got {axis!r}")
    values = list(values)
    if not values:
        raise ConfigError("values: sweep needs at least one value")
    if axis == "arch":
        cell_archs = [v if isinstance(v, Architecture) else Architecture.parse(v) for v in values]
        grid = [(a, None) for a in cell_archs]
    else:
        arch_list = archs if archs else [base.arch]
        arch_list = [a if isinstance(a, Architecture) else Architecture.parse(a) for a in arch_list]
        grid = [(a, v) for a in arch_list for v in values]

    rows = []
    for arch, value in grid:
        cfg = replace(base, arch=arch)
        if axis == "delay" and value is not None:
            cfg = replace(cfg, delay=float(value), delay_breakpoints=None)
        elif axis == "b" and value is not None:
            cfg = replace(cfg, b=float(value))
        log = run_experiment(cfg)
        y_inf, _ = analytic_equilibrium(cfg)
        metrics = compute_metrics(log, y_inf, band=cfg.band)
        rows.append({
            "arch": cfg.arch.value,
            "delay": cfg.delay,
            "b": cfg.b,
            "y_inf": metrics.y_inf,
            "settling_time": metrics.settling_time,
            "overshoot": metrics.overshoot,
            "oscillation_index": metrics.oscillation_index,
            "steady_state_error": metrics.steady_state_error,
        })
    return rows


def write_sweep_csv(rows, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(SWEEP_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(
                row[c] if isinstance(row[c], str) else repr(row[c])
                for c in SWEEP_COLUMNS
            ) + "\n")


def write_metrics_csv(metrics: Metrics, cfg: ExperimentConfig, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(SWEEP_COLUMNS) + "\n")
        fh.write(",".join([
            cfg.arch.value, repr(cfg.delay), repr(cfg.b), repr(metrics.y_inf),
            repr(metrics.settling_time), repr(metrics.overshoot),
            repr(metrics.oscillation_index), repr(metrics.steady_state_error),
        ]) + "\n")
