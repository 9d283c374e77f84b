import math

import numpy as np
import pytest

from teleopsim import ChannelEnd, DelayProfile


def test_zero_delay_is_identity():
    end = ChannelEnd(DelayProfile.constant(0.0))
    end.send("p", 1.0)
    res = end.poll(1.0)
    assert res.fresh and res.payload == "p"


def test_constant_one_second_delay():
    end = ChannelEnd(DelayProfile.constant(1.0))
    end.send("p", 2.0)
    assert not end.poll(2.999).fresh
    res = end.poll(3.0)
    assert res.fresh and res.payload == "p"


def test_poll_before_any_send_is_stale_never_delivered():
    end = ChannelEnd(DelayProfile.constant(0.5))
    res = end.poll(0.0)
    assert not res.fresh
    assert res.payload is None
    assert math.isinf(res.age)


def test_delay_step_preserves_order():
    profile = DelayProfile.piecewise([(0.0, 0.5), (5.0, 1.0)])
    end = ChannelEnd(profile)
    end.send("a", 4.9)   # delivers at 5.4
    end.send("b", 5.0)   # delivers at 6.0
    assert not end.poll(5.3).fresh
    res = end.poll(5.4)
    assert res.fresh and res.payload == "a"
    assert not end.poll(5.9).fresh
    res = end.poll(6.0)
    assert res.fresh and res.payload == "b"


def test_delay_drop_clamps_monotone():
    # when tau falls, later messages may not overtake earlier ones
    profile = DelayProfile.piecewise([(0.0, 1.0), (5.0, 0.2)])
    end = ChannelEnd(profile)
    end.send("a", 4.9)   # due 5.9
    end.send("b", 5.0)   # 5.2 clamped to 5.9
    res = end.poll(5.9)
    assert res.fresh and res.payload == "b"  # newest; both drained
    assert end.in_flight == 0


def test_two_sends_drained_to_newest():
    end = ChannelEnd(DelayProfile.constant(0.5))
    end.send("first", 0.0)
    end.send("second", 0.001)
    res = end.poll(0.6)
    assert res.fresh and res.payload == "second"
    assert end.in_flight == 0


def test_send_times_must_increase():
    end = ChannelEnd(DelayProfile.constant(0.0))
    end.send("a", 1.0)
    with pytest.raises(ValueError, match="strictly increasing"):
        end.send("b", 1.0)


def test_poll_times_must_not_regress():
    end = ChannelEnd(DelayProfile.constant(0.0))
    end.poll(1.0)
    with pytest.raises(ValueError, match="non-decreasing"):
        end.poll(0.5)


def test_stale_marker_carries_last_payload_and_age():
    end = ChannelEnd(DelayProfile.constant(0.0))
    end.send("p", 1.0)
    assert end.poll(1.0).fresh
    res = end.poll(1.25)
    assert not res.fresh
    assert res.payload == "p"
    assert res.age == pytest.approx(0.25)


def test_delay_estimate_initial_and_converged():
    end = ChannelEnd(DelayProfile.constant(0.5))
    assert end.delay_estimate(0.0) == pytest.approx(0.5)  # configured start value
    dt = 0.001
    k = 0
    while True:
        t = k * dt
        end.send(("m", k), t)
        if end.poll(t).fresh:
            break
        k += 1
    assert end.delay_estimate(t) == pytest.approx(0.5, abs=dt)


def test_delay_estimate_tracks_step_change():
    profile = DelayProfile.piecewise([(0.0, 0.5), (5.0, 1.0)])
    end = ChannelEnd(profile)
    dt = 0.001
    estimate_after = None
    for k in range(8001):
        t = k * dt
        end.send(k, t)
        res = end.poll(t)
        if res.fresh and t >= 6.0:
            estimate_after = end.delay_estimate(t)
    assert estimate_after == pytest.approx(1.0, abs=2 * dt)


def test_constant_delay_shift_exactness_on_grid():
    dt = 0.001
    tau = 0.25
    end = ChannelEnd(DelayProfile.constant(tau))
    rng = np.random.default_rng(5)
    values = rng.normal(size=2000)
    received = {}
    for k, value in enumerate(values):
        t = k * dt
        end.send(value, t)
        res = end.poll(t)
        if res.fresh:
            received[k] = res.payload
    shift = int(round(tau / dt))
    for k, payload in received.items():
        assert payload == values[k - shift]
    # every sent message that came due was delivered exactly once
    assert len(received) == 2000 - shift


def test_no_loss_no_reorder_random_profile():
    rng = np.random.default_rng(13)
    breaks = [(0.0, 0.3)]
    t_break = 0.0
    for _ in range(6):
        t_break += float(rng.uniform(0.5, 1.5))
        breaks.append((t_break, float(rng.uniform(0.0, 1.2))))
    end = ChannelEnd(DelayProfile.piecewise(breaks))
    dt = 0.002
    sent = []
    got = []
    for k in range(4000):
        t = k * dt
        end.send(k, t)
        sent.append(k)
        res = end.poll(t)
        if res.fresh:
            got.append(res.payload)
    # drain the tail
    res = end.poll(4000 * dt + 10.0)
    if res.fresh:
        got.append(res.payload)
    assert got == sorted(got)  # delivery order equals send order


def test_profile_validation():
    with pytest.raises(ValueError):
        DelayProfile.constant(-0.1)
    with pytest.raises(ValueError):
        DelayProfile.piecewise([])
    with pytest.raises(ValueError):
        DelayProfile.piecewise([(0.0, 0.1), (0.0, 0.2)])
    with pytest.raises(ValueError):
        DelayProfile.piecewise([(0.0, -0.5)])
    bad = DelayProfile(lambda t: -1.0)
    with pytest.raises(ValueError):
        bad.tau(0.0)


def test_reset_clears_state():
    end = ChannelEnd(DelayProfile.constant(1.0))
    end.send("x", 0.0)
    end.reset(DelayProfile.constant(0.0))
    assert end.in_flight == 0
    res = end.poll(0.0)
    assert not res.fresh and res.payload is None
    end.send("y", 0.0)  # send clock restarted
    assert end.poll(0.0).fresh
