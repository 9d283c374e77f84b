"""Transforms between power variables and wave variables.

A bilateral link carries a flow command ``x`` toward the remote side and an
effort/velocity feedback ``y`` back to the operator.  Recombining each
(flow, effort) pair into forward/return waves ``u``/``v`` splits the
instantaneous power into independent input and output contributions, which is
what lets a delayed transmission stay passive.  The impedance-matched
termination forms additionally suppress wave reflections at both ends.

Everything here is pure and stateless; functions accept scalars or
equally-shaped numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


def _is_finite(value) -> bool:
    if type(value) in (float, int):
        return math.isfinite(value)
    return bool(np.all(np.isfinite(value)))


def _check_inputs(**named):
    """Validate that all named inputs are finite and share one shape."""
    shape = None
    ref_name = None
    for name, value in named.items():
        if not _is_finite(value):
            raise ValueError(f"{name} must be finite, got {value!r}")
        s = np.shape(value)
        if shape is None:
            shape, ref_name = s, name
        elif s != shape:
            raise ValueError(
                f"dimension mismatch: {name} has shape {s}, {ref_name} has shape {shape}"
            )


@dataclass(frozen=True)
class WaveImpedance:
    """Wave impedance ``b`` (effort per flow) with derived coefficients.

    alpha = 1/sqrt(2 b) scales efforts into wave units, beta = sqrt(b/2)
    scales flows.  alpha * beta == 1/2 up to floating point, which is what
    makes the encode/decode pair an exact inverse.
    """

    b: float
    alpha: float = field(init=False, repr=False)
    beta: float = field(init=False, repr=False)

    def __post_init__(self):
        b = float(self.b)
        if not math.isfinite(b) or b <= 0.0:
            raise ValueError(f"wave impedance b must be finite and > 0, got {self.b!r}")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "alpha", 1.0 / math.sqrt(2.0 * b))
        object.__setattr__(self, "beta", math.sqrt(b / 2.0))


@dataclass(frozen=True)
class PowerSample:
    """Flow/effort pairs at both ends of the link at one instant."""

    t: float
    x_o: object
    y_o: object
    x_r: object
    y_r: object

    def __post_init__(self):
        _check_inputs(x_o=self.x_o, y_o=self.y_o, x_r=self.x_r, y_r=self.y_r)

    @property
    def dim(self) -> int:
        s = np.shape(self.x_o)
        return 1 if s == () else s[0]


@dataclass(frozen=True)
class WaveSample:
    """Forward/return wave amplitudes at both ends at one instant."""

    t: float
    u_o: object
    v_o: object
    u_r: object
    v_r: object

    def __post_init__(self):
        _check_inputs(u_o=self.u_o, v_o=self.v_o, u_r=self.u_r, v_r=self.v_r)

    @property
    def dim(self) -> int:
        s = np.shape(self.u_o)
        return 1 if s == () else s[0]


def encode_operator(x_o, y_o, z: WaveImpedance):
    """Operator-side wave encoding: (x_o, y_o) -> (u_o, v_o)."""
    _check_inputs(x_o=x_o, y_o=y_o)
    u_o = z.beta * x_o + z.alpha * y_o
    v_o = -z.beta * x_o + z.alpha * y_o
    return u_o, v_o


def encode_remote(x_r, y_r, z: WaveImpedance):
    """Remote-side wave encoding: (x_r, y_r) -> (u_r, v_r)."""
    _check_inputs(x_r=x_r, y_r=y_r)
    u_r = -z.beta * x_r + z.alpha * y_r
    v_r = z.beta * x_r + z.alpha * y_r
    return u_r, v_r


def decode_operator(u_o, v_o, z: WaveImpedance):
    """Inverse of :func:`encode_operator`: (u_o, v_o) -> (x_o, y_o)."""
    _check_inputs(u_o=u_o, v_o=v_o)
    x_o = z.alpha * u_o - z.alpha * v_o
    y_o = z.beta * u_o + z.beta * v_o
    return x_o, y_o


def decode_remote(u_r, v_r, z: WaveImpedance):
    """Inverse of :func:`encode_remote`: (u_r, v_r) -> (x_r, y_r)."""
    _check_inputs(u_r=u_r, v_r=v_r)
    x_r = -z.alpha * u_r + z.alpha * v_r
    y_r = z.beta * u_r + z.beta * v_r
    return x_r, y_r


def operator_termination(x_o, v_o, z: WaveImpedance):
    """Matched operator end: launch u_o from the command, absorb v_o into feedback.

    Returns ``(u_o, y_o)`` with u_o = sqrt(b/2) x_o and
    y_o = (b/2) x_o + sqrt(b/2) v_o.  The received wave is fully absorbed, so
    nothing reflects back into the channel.
    """
    _check_inputs(x_o=x_o, v_o=v_o)
    u_o = z.beta * x_o
    y_o = 0.5 * z.b * x_o + z.beta * v_o
    return u_o, y_o


def remote_termination(y_r, v_r, z: WaveImpedance):
    """Matched remote end: launch u_r from the measurement, absorb v_r into the command.

    Returns ``(u_r, x_r)`` with u_r = y_r / sqrt(2 b) and
    x_r = -y_r / (2 b) + v_r / sqrt(2 b).  The command is a velocity-error
    term: x_r vanishes when the measured y_r reaches b times the commanded
    flow carried by v_r.
    """
    _check_inputs(y_r=y_r, v_r=v_r)
    u_r = z.alpha * y_r
    x_r = -(0.5 / z.b) * y_r + z.alpha * v_r
    return u_r, x_r


def power_flow(ws: WaveSample) -> float:
    """Net power entering the link: half the input minus output wave energies."""
    return float(
        0.5
        * (
            np.dot(ws.u_o, ws.u_o)
            - np.dot(ws.v_o, ws.v_o)
            + np.dot(ws.u_r, ws.u_r)
            - np.dot(ws.v_r, ws.v_r)
        )
    )
