import numpy as np
import pytest

from shuttlesim.arbiter import (
    DisplayTracker,
    Message,
    Source,
    SpeedCommand,
    display_message,
    select,
)
from shuttlesim.twist import TwistCommand


def cmd(v, source, w=0.0, decel=1.2):
    return SpeedCommand(TwistCommand(v, w, 1.0, decel), source)


def test_select_minimum_speed():
    out = select([cmd(3.0, Source.WAYPOINT), cmd(1.5, Source.OBSTACLE), cmd(2.0, Source.SIGN)])
    assert out.source is Source.OBSTACLE
    assert out.twist.linear_v == 1.5


def test_select_tie_broken_by_decel():
    obstacle = cmd(0.0, Source.OBSTACLE, decel=5.0)
    sign = cmd(0.0, Source.SIGN, decel=0.45)
    out = select([sign, obstacle])
    assert out.source is Source.OBSTACLE
    assert out.twist.decel_limit == 5.0


def test_select_tie_broken_by_priority():
    a = cmd(0.0, Source.SIGN, decel=1.0)
    b = cmd(0.0, Source.MANUAL_STOP, decel=1.0)
    out = select([a, b])
    assert out.source is Source.MANUAL_STOP


def test_single_waypoint_passthrough():
    only = cmd(2.5, Source.WAYPOINT, w=0.3)
    assert select([only]) == only


def test_angular_velocity_always_from_waypoint():
    wp = cmd(3.0, Source.WAYPOINT, w=0.31)
    ob = cmd(1.0, Source.OBSTACLE, w=0.0)
    out = select([wp, ob])
    assert out.source is Source.OBSTACLE
    assert out.twist.angular_w == 0.31


def test_select_is_minimum_over_random_lists():
    rng = np.random.default_rng(8)
    sources = list(Source)
    for _ in range(200):
        cmds = [
            cmd(float(rng.uniform(0, 4)), sources[int(rng.integers(0, 4))],
                decel=float(rng.uniform(0.1, 5)))
            for _ in range(int(rng.integers(1, 6)))
        ]
        out = select(cmds)
        assert out.twist.linear_v == min(c.twist.linear_v for c in cmds)


def test_select_empty_rejected():
    with pytest.raises(ValueError):
        select([])


def test_display_message_thresholds():
    assert display_message(0.0) is Message.STOPPED
    assert display_message(3.0) is Message.MOVING
    with pytest.raises(ValueError):
        display_message(-0.1)


def test_display_hysteresis_no_chatter():
    tracker = DisplayTracker()
    tracker.update(3.0, 0.0)
    t = 1.0
    # oscillating between 0.12 and 0.08 must not toggle the message
    tracker.update(0.08, t)
    assert tracker.state.message is Message.STOPPED
    for k in range(20):
        state = tracker.update(0.12 if k % 2 else 0.08, t + k)
        assert state.message is Message.STOPPED
    assert tracker.update(0.2, 30.0).message is Message.MOVING


def test_display_transitions_at_exact_thresholds():
    tracker = DisplayTracker()
    tracker.update(1.0, 0.0)
    # ramp down: switches strictly below 0.1
    assert tracker.update(0.1, 1.0).message is Message.MOVING
    assert tracker.update(0.0999, 2.0).message is Message.STOPPED
    # ramp up: switches at 0.2
    assert tracker.update(0.1999, 3.0).message is Message.STOPPED
    state = tracker.update(0.2, 4.0)
    assert state.message is Message.MOVING
    assert state.since == 4.0
