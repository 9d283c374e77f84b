"""Simulated one-way communication element with programmable delay.

Each direction of the link is a :class:`ChannelEnd`: the sender stamps every
payload with its send time, the profile maps send time to a one-way delay,
and delivery times are clamped monotone so messages never overtake each
other.  A poll that finds nothing new returns a stale marker carrying the
last delivered payload and its age; that marker is exactly the hook the
remote-side predictor needs to know it must extrapolate.
"""

from __future__ import annotations

import bisect
import math
from collections import deque
from dataclasses import dataclass
from typing import Callable, NamedTuple

# Inclusive-boundary slack for float time comparison: a message due exactly
# at the poll time is delivered even if t accumulated rounding error.
_EPS = 1e-9


class DelayProfile:
    """One-way delay tau(t) as a function of send time, tau(t) >= 0."""

    def __init__(self, fn: Callable[[float], float], kind: str = "callback",
                 description: str = ""):
        self._fn = fn
        self.kind = kind
        self.description = description or kind

    @classmethod
    def constant(cls, tau: float) -> "DelayProfile":
        tau = float(tau)
        if not math.isfinite(tau) or tau < 0.0:
            raise ValueError(f"delay must be finite and >= 0, got {tau!r}")
        return cls(lambda t: tau, kind="constant", description=f"constant {tau}")

    @classmethod
    def piecewise(cls, breakpoints) -> "DelayProfile":
        """Piecewise-constant delay from (t, tau) breakpoints, first t <= 0 or t == start."""
        pts = [(float(t), float(tau)) for t, tau in breakpoints]
        if not pts:
            raise ValueError("piecewise delay profile needs at least one breakpoint")
        times = [t for t, _ in pts]
        taus = [tau for _, tau in pts]
        if any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
            raise ValueError("piecewise breakpoint times must be strictly increasing")
        if any(not math.isfinite(tau) or tau < 0.0 for tau in taus):
            raise ValueError("piecewise delays must be finite and >= 0")

        def fn(t: float) -> float:
            i = bisect.bisect_right(times, t) - 1
            return taus[max(i, 0)]

        return cls(fn, kind="piecewise", description=f"piecewise {pts}")

    def tau(self, t: float) -> float:
        value = float(self._fn(t))
        if not math.isfinite(value) or value < 0.0:
            raise ValueError(f"delay profile returned invalid tau {value!r} at t={t!r}")
        return value


class PollResult(NamedTuple):
    """Outcome of one poll: fresh delivery or a stale marker."""

    fresh: bool
    payload: object          # newest delivered payload, or last-known when stale (None if never)
    t_send: float | None     # send time of that payload
    age: float               # t - delivery time of that payload (inf if never delivered)


@dataclass
class _Message:
    payload: object
    t_send: float
    t_deliver: float


class ChannelEnd:
    """Single direction of the link: ordered in-flight queue plus delivery state."""

    def __init__(self, profile: DelayProfile):
        self.profile = profile
        self._queue: deque[_Message] = deque()
        self._last_send_t = -math.inf
        self._last_poll_t = -math.inf
        self._last_deliver_t = -math.inf
        self._delivered: _Message | None = None

    def send(self, payload, t: float) -> None:
        """Enqueue a payload stamped at time t; send times must be strictly increasing."""
        t = float(t)
        if t <= self._last_send_t:
            raise ValueError(
                f"send time must be strictly increasing: {t} after {self._last_send_t}"
            )
        self._last_send_t = t
        t_deliver = t + self.profile.tau(t)
        # Clamp so delivery order equals send order even when tau drops.
        if self._queue and t_deliver < self._queue[-1].t_deliver:
            t_deliver = self._queue[-1].t_deliver
        self._queue.append(_Message(payload, t, t_deliver))

    def poll(self, t: float) -> PollResult:
        """Deliver the newest message due by time t, draining everything due.

        Returns a stale marker (with the previously delivered payload and its
        age) when nothing new has arrived since the last poll.
        """
        t = float(t)
        if t < self._last_poll_t - _EPS:
            raise ValueError(
                f"poll time must be non-decreasing: {t} after {self._last_poll_t}"
            )
        self._last_poll_t = t

        newest = None
        while self._queue and self._queue[0].t_deliver <= t + _EPS:
            newest = self._queue.popleft()
        if newest is not None:
            self._delivered = newest
            self._last_deliver_t = newest.t_deliver
            return PollResult(True, newest.payload, newest.t_send, t - newest.t_deliver)
        if self._delivered is None:
            return PollResult(False, None, None, math.inf)
        return PollResult(
            False, self._delivered.payload, self._delivered.t_send,
            t - self._delivered.t_deliver,
        )

    def delay_estimate(self, t: float) -> float:
        """Measured one-way delay: age of the newest delivered stamp.

        Before anything has been delivered this falls back to the profile's
        delay at t=0, so consumers that size buffers from the estimate start
        from the configured value.
        """
        if self._delivered is None:
            return self.profile.tau(0.0)
        return float(t) - self._delivered.t_send

    @property
    def in_flight(self) -> int:
        return len(self._queue)

    def reset(self, profile: DelayProfile | None = None) -> None:
        """Drop all in-flight and delivered state; optionally swap the profile."""
        if profile is not None:
            self.profile = profile
        self._queue.clear()
        self._last_send_t = -math.inf
        self._last_poll_t = -math.inf
        self._last_deliver_t = -math.inf
        self._delivered = None
