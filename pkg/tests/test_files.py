"""Plan, trajectory, scenario and error files."""

from __future__ import annotations

import json

import numpy as np
import pytest

from tetherplan import config
from tetherplan.exceptions import (
    NoPathError,
    PlanFormatError,
    ScenarioError,
    TetherPlanError,
    ValidationError,
)
from tetherplan.executor import simulate_execution
from tetherplan.experiments import load_scenario_maps, plan_scenario
from tetherplan.files import (
    annotated_path,
    format_plan,
    load_plan_map,
    load_scenario,
    parse_plan,
    read_plan,
    read_trajectory,
    write_error,
    write_plan,
    write_trajectory,
)
from tetherplan.models import NoiseConfig

BUNDLED = sorted(p.stem for p in config.SCENARIO_DIR.glob("*.json"))


@pytest.fixture(scope="module")
def wrapped():
    return plan_scenario(load_scenario_maps("wrap_and_return"))


class TestPlanFile:
    def test_write_read_write_is_byte_identical(self, wrapped, tmp_path):
        first = write_plan(tmp_path / "a.csv", wrapped.plan, wrapped.header)
        doc = read_plan(first)
        second = write_plan(tmp_path / "b.csv", annotated_path(doc), doc.header)
        assert first.read_bytes() == second.read_bytes()

    def test_contacts_and_events_survive(self, wrapped, tmp_path):
        doc = read_plan(write_plan(tmp_path / "plan.csv", wrapped.plan, wrapped.header))
        plan = annotated_path(doc)
        np.testing.assert_array_equal(plan.contacts, wrapped.plan.contacts)
        assert plan.events == wrapped.plan.events
        assert doc.header.resolution == pytest.approx(0.1)

    def test_missing_header(self):
        with pytest.raises(PlanFormatError, match="line 1"):
            parse_plan("wx,wy,wz,cx,cy,cz\n0,0,0,0,0,0\n")

    def test_wrong_columns(self, wrapped):
        lines = format_plan(wrapped.plan, wrapped.header).splitlines()
        lines[1] = "x,y,z,cx,cy,cz"
        with pytest.raises(PlanFormatError, match="line 2"):
            parse_plan("\n".join(lines))

    def test_bad_value_reports_line(self, wrapped):
        lines = format_plan(wrapped.plan, wrapped.header).splitlines()
        lines[3] = "0.1,oops,0.1,0.35,0.05,0.35"
        with pytest.raises(PlanFormatError, match="line 4"):
            parse_plan("\n".join(lines))

    def test_short_record_reports_line(self, wrapped):
        lines = format_plan(wrapped.plan, wrapped.header).splitlines()
        lines[4] = "0.1,0.2,0.3"
        with pytest.raises(PlanFormatError, match="line 5"):
            parse_plan("\n".join(lines))

    def test_header_events_must_match_records(self, wrapped):
        header = wrapped.header.model_copy(update={"events": wrapped.header.events[:1]})
        doc = parse_plan(format_plan(wrapped.plan, header))
        with pytest.raises(PlanFormatError, match="events"):
            annotated_path(doc)

    def test_unreadable(self, tmp_path):
        with pytest.raises(PlanFormatError):
            read_plan(tmp_path / "missing.csv")


class TestPlanMap:
    def test_loads_the_planned_map(self, wrapped):
        assert load_plan_map(wrapped.header).digest() == wrapped.header.map_digest

    def test_rejects_another_map(self, wrapped):
        other = config.SCENARIO_DIR / "maps" / "two_pillars.json"
        with pytest.raises(ValidationError, match="digest"):
            load_plan_map(wrapped.header, other)

    def test_regrids_to_the_planned_resolution(self):
        planned = plan_scenario(load_scenario_maps("wrap_and_return", resolution=0.05))
        assert planned.header.resolution == pytest.approx(0.05)
        assert load_plan_map(planned.header).dims == (60, 40, 60)


def test_trajectory_round_trip(wrapped, tmp_path):
    traj = simulate_execution(wrapped.plan, wrapped.maps.original, NoiseConfig(seed=1))
    back = read_trajectory(write_trajectory(tmp_path / "t.csv", traj))
    np.testing.assert_allclose(back.times, traj.times, atol=1e-6)
    np.testing.assert_allclose(back.positions, traj.positions, atol=1e-8)
    np.testing.assert_array_equal(back.active_contacts, traj.active_contacts)


def test_trajectory_with_wrong_columns(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("t,x,y\n0,0,0\n")
    with pytest.raises(PlanFormatError):
        read_trajectory(path)


class TestScenarios:
    @pytest.mark.parametrize("name", BUNDLED)
    def test_bundled_scenarios_load(self, name):
        maps = load_scenario_maps(name)
        assert maps.spec.name == name
        assert maps.inflated.inflated_by == pytest.approx(maps.spec.robot_radius)

    def test_experiment_scenarios_are_bundled(self):
        assert set(config.EXPERIMENT_SCENARIOS) <= set(BUNDLED)

    def test_not_found(self):
        with pytest.raises(ScenarioError, match="not found"):
            load_scenario("no_such_scenario")

    def test_invalid_field(self, tmp_path):
        path = tmp_path / "bad.json"
        spec = {"name": "bad", "map": "m.json", "reel": [0, 0], "start": [0, 0, 0], "goal": [0, 0, 0]}
        path.write_text(json.dumps(spec))
        with pytest.raises(ScenarioError, match="reel"):
            load_scenario(path)

    def test_point_outside_map(self, tmp_path):
        spec = json.loads((config.SCENARIO_DIR / "empty_raycast.json").read_text())
        spec["map"] = str(config.SCENARIO_DIR / "maps" / "empty.json")
        spec["goal"] = [5.0, 1.0, 1.0]
        path = tmp_path / "outside.json"
        path.write_text(json.dumps(spec))
        with pytest.raises(ScenarioError, match="goal"):
            load_scenario_maps(path)


def test_error_file_round_trip(tmp_path):
    path = write_error(tmp_path / "error.json", NoPathError("no route"))
    record = json.loads(path.read_text())
    assert record == {"code": "NO_PATH", "message": "no route", "exit_code": 3}
    restored = TetherPlanError.from_error_dict(record)
    assert isinstance(restored, NoPathError)
