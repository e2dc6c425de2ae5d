import pytest

from shuttlesim.scenario import ScenarioError, load_scenario, scenario_from_dict
from tests.conftest import SCENARIO_DIR


def test_load_shipped_demo():
    sc = load_scenario(SCENARIO_DIR / "demo.yaml")
    assert sc.name == "demo"
    assert sc.duration == 40.0
    assert sc.waypoint_file.endswith("straight_3mps.waypoints")
    assert len(sc.world.pedestrians) == 1
    assert len(sc.world.signs) == 1
    assert sc.lidar.range_jitter == 0.01


def test_load_shipped_figure8_record():
    sc = load_scenario(SCENARIO_DIR / "figure8_record.yaml")
    assert len(sc.drive_script) == 4
    assert sc.drive_script[1].yaw_rate == 0.25


def test_yaml_syntax_error_reports_line(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("name: x\nduration: [unclosed\n")
    with pytest.raises(ScenarioError, match="line"):
        load_scenario(bad)


def test_unknown_key_rejected():
    with pytest.raises(ScenarioError, match="unknown top-level keys.*typo"):
        scenario_from_dict({"typo": 1})


def test_unknown_nested_key_rejected():
    with pytest.raises(ScenarioError, match="vehicle"):
        scenario_from_dict({"vehicle": {"wheelbase": 2.5, "nonsense": 3}})


def test_bad_vector_shape():
    with pytest.raises(ScenarioError, match=r"world\.pedestrians\[0\]\.position"):
        scenario_from_dict({"world": {"pedestrians": [{"position": [1.0]}]}})


def test_tick_rate_bounds():
    with pytest.raises(ScenarioError, match="tick_rate"):
        scenario_from_dict({"tick_rate": 5})
    with pytest.raises(ScenarioError, match="tick_rate"):
        scenario_from_dict({"tick_rate": 500})


def test_waypoint_path_resolved_relative(tmp_path):
    (tmp_path / "p.waypoints").write_text("30.0,-96.0,1.0\n")
    (tmp_path / "s.yaml").write_text("duration: 1.0\nwaypoints: p.waypoints\n")
    sc = load_scenario(tmp_path / "s.yaml")
    assert sc.waypoint_file == str((tmp_path / "p.waypoints").resolve())


def test_empty_file_rejected(tmp_path):
    f = tmp_path / "empty.yaml"
    f.write_text("")
    with pytest.raises(ScenarioError, match="empty"):
        load_scenario(f)


def test_missing_file_rejected(tmp_path):
    with pytest.raises(ScenarioError, match="cannot read"):
        load_scenario(tmp_path / "nope.yaml")
