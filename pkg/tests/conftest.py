from pathlib import Path

import pytest

from shuttlesim.scenario import DEFAULT_ORIGIN
from shuttlesim.waypoints import Waypoint, WaypointList, from_local, save_waypoints

REPO_ROOT = Path(__file__).resolve().parent.parent
SCENARIO_DIR = REPO_ROOT / "scenarios"


def straight_path(length_m=80, speed=3.0, origin=DEFAULT_ORIGIN):
    wps = []
    for i in range(length_m + 1):
        lat, lon = from_local(origin, float(i), 0.0)
        wps.append(Waypoint(lat, lon, speed))
    return WaypointList(tuple(wps), 0, origin)


@pytest.fixture(scope="session")
def straight_waypoints(tmp_path_factory):
    path = tmp_path_factory.mktemp("paths") / "straight_3mps.waypoints"
    save_waypoints(straight_path(), path)
    return str(path)
