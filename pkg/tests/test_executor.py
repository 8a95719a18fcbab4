"""Polar controls, the contact stack and the execution simulator."""

from __future__ import annotations

import math

import numpy as np
import pytest

from tests.conftest import PILLAR_REEL, double_wrap_route
from tetherplan.contact import plan_contacts
from tetherplan.exceptions import ValidationError
from tetherplan.executor import (
    ContactStack,
    Trajectory,
    cross_track_error,
    desired_controls,
    from_polar,
    simulate_execution,
    static_length,
    to_polar,
    to_polar_many,
)
from tetherplan.models import NoiseConfig
from tetherplan.paths import AnnotatedPath
from tetherplan.prm import densify_path
from tetherplan.voxel_map import inflate

ORIGIN = np.array([0.05, 0.05, 0.05])


class TestPolar:
    @pytest.mark.parametrize(
        "p,expected",
        [
            ((0.0, 0.0, 1.0), (1.0, 0.0, 0.0)),
            ((1.0, 0.0, 0.0), (1.0, 0.0, math.pi / 2)),
            ((0.0, 2.0, 0.0), (2.0, math.pi / 2, 0.0)),
            ((0.0, 0.0, -1.0), (1.0, 0.0, math.pi)),
            ((-1.0, -1.0, 0.0), (math.sqrt(2), -math.pi / 4, -math.pi / 2)),
        ],
    )
    def test_axes(self, p, expected):
        assert to_polar(p, (0.0, 0.0, 0.0)) == pytest.approx(expected)

    def test_relative_to_contact(self):
        assert to_polar((1.0, 1.0, 2.0), (1.0, 1.0, 1.0)) == pytest.approx((1.0, 0.0, 0.0))

    def test_zero_distance(self):
        assert to_polar((1.0, 2.0, 3.0), (1.0, 2.0, 3.0)) == (0.0, 0.0, 0.0)

    def test_inverse_on_random_points(self):
        rng = np.random.default_rng(0)
        p = rng.uniform(-5, 5, size=(1_000_000, 3))
        cp = rng.uniform(-5, 5, size=(1_000_000, 3))
        r, theta, phi = to_polar_many(p, cp)
        np.testing.assert_allclose(from_polar(r, theta, phi, cp), p, atol=1e-9)

    def test_single_and_vectorized_agree(self):
        rng = np.random.default_rng(1)
        p, cp = rng.normal(size=(20, 3)), rng.normal(size=(20, 3))
        r, theta, phi = to_polar_many(p, cp)
        for n in range(20):
            assert to_polar(p[n], cp[n]) == pytest.approx((r[n], theta[n], phi[n]))


class TestControls:
    def test_static_length(self):
        assert static_length([ORIGIN]) == 0.0
        assert static_length([(0, 0, 0), (3, 4, 0), (3, 4, 2)]) == pytest.approx(7.0)

    def test_desired_controls_add_static_length(self):
        stack = [(0, 0, 0), (3, 4, 0)]
        controls = desired_controls((3, 4, 2), stack)
        assert controls.r == pytest.approx(7.0)
        assert controls.theta == pytest.approx(0.0)
        assert controls.phi == pytest.approx(0.0)

    def test_empty_stack(self):
        with pytest.raises(ValidationError):
            desired_controls((1, 1, 1), np.empty((0, 3)))


class TestContactStack:
    def test_incremental_length_matches_recomputed(self):
        rng = np.random.default_rng(42)
        for _ in range(10_000):
            stack = ContactStack(rng.uniform(0, 3, 3))
            for _ in range(8):
                if len(stack) > 1 and rng.random() < 0.4:
                    stack.pop()
                else:
                    stack.push(rng.uniform(0, 3, 3))
                assert stack.r_sta == pytest.approx(stack.recomputed(), abs=1e-9)

    def test_origin_cannot_be_popped(self):
        stack = ContactStack(ORIGIN)
        with pytest.raises(ValidationError):
            stack.pop()

    def test_pop_returns_top(self):
        stack = ContactStack(ORIGIN)
        stack.push((1.0, 1.0, 1.0))
        np.testing.assert_allclose(stack.pop(), [1.0, 1.0, 1.0])
        assert stack.r_sta == pytest.approx(0.0)


@pytest.fixture
def straight_plan():
    return AnnotatedPath.straight(np.array([[0.4, 1.0, 0.4], [1.6, 1.0, 0.4], [1.6, 1.0, 1.6]]), ORIGIN)


@pytest.fixture(scope="module")
def wrap_plan(two_pillars):
    route = densify_path(double_wrap_route(), 0.1)
    return plan_contacts(two_pillars, inflate(two_pillars, 0.2), route, PILLAR_REEL)


class TestSimulate:
    def test_zero_noise_reaches_goal(self, straight_plan, empty_map):
        traj = simulate_execution(straight_plan, empty_map, NoiseConfig.zero(), r_acc=0.1)
        assert traj.outcome == "completed"
        assert np.linalg.norm(traj.positions[-1] - straight_plan.waypoints[-1]) <= 0.1
        assert cross_track_error(traj, straight_plan).max <= 0.1

    def test_times_and_speed(self, straight_plan, empty_map):
        traj = simulate_execution(straight_plan, empty_map, NoiseConfig.zero(), speed=0.5, rate=100.0)
        assert np.all(np.diff(traj.times) > 0)
        steps = np.linalg.norm(np.diff(traj.beliefs, axis=0), axis=1)
        assert steps.max() <= 0.5 / 100.0 + 1e-12

    def test_step_budget_aborts(self, straight_plan, empty_map):
        traj = simulate_execution(straight_plan, empty_map, NoiseConfig.zero(), step_budget=10)
        assert traj.outcome == "aborted"
        assert len(traj) <= 11

    @pytest.mark.parametrize("kwargs", [{"r_acc": 0.0}, {"speed": -1.0}, {"rate": 0.0}])
    def test_invalid_parameters(self, straight_plan, empty_map, kwargs):
        with pytest.raises(ValidationError):
            simulate_execution(straight_plan, empty_map, NoiseConfig.zero(), **kwargs)

    def test_same_seed_same_trajectory(self, wrap_plan, two_pillars):
        a = simulate_execution(wrap_plan, two_pillars, NoiseConfig(seed=5))
        b = simulate_execution(wrap_plan, two_pillars, NoiseConfig(seed=5))
        c = simulate_execution(wrap_plan, two_pillars, NoiseConfig(seed=6))
        np.testing.assert_array_equal(a.positions, b.positions)
        assert not np.array_equal(a.positions, c.positions)

    def test_zero_noise_follows_belief_through_contacts(self, wrap_plan, two_pillars):
        traj = simulate_execution(wrap_plan, two_pillars, NoiseConfig.zero())
        np.testing.assert_allclose(traj.positions, traj.beliefs, atol=1e-9)
        assert traj.active_contacts.max() == 2
        assert traj.active_contacts[0] == 0

    def test_active_contacts_follow_events(self, wrap_plan, two_pillars):
        traj = simulate_execution(wrap_plan, two_pillars, NoiseConfig.zero())
        assert np.all(np.diff(traj.active_contacts) >= 0)
        assert traj.final_state.stack.r_sta == pytest.approx(static_length(wrap_plan.final_stack))

    def test_planner_agnostic(self, wrap_plan, two_pillars):
        rebuilt = AnnotatedPath.from_records(wrap_plan.to_records(), wrap_plan.tether_origin)
        a = simulate_execution(wrap_plan, two_pillars, NoiseConfig(seed=3))
        b = simulate_execution(rebuilt, two_pillars, NoiseConfig(seed=3))
        np.testing.assert_array_equal(a.positions, b.positions)

    @pytest.mark.parametrize("r_acc", [0.6, 10.0])
    def test_wide_acceptance_still_applies_every_event(self, wrap_plan, two_pillars, r_acc):
        traj = simulate_execution(wrap_plan, two_pillars, NoiseConfig.zero(), r_acc=r_acc)
        assert traj.outcome == "completed"
        assert traj.active_contacts[-1] == wrap_plan.depths()[-1] - 1
        np.testing.assert_allclose(traj.final_state.stack.top, wrap_plan.final_stack[-1])
        assert traj.final_state.stack.r_sta == pytest.approx(static_length(wrap_plan.final_stack))


class TestCrossTrackError:
    def test_distance_to_polyline(self, empty_map):
        plan = AnnotatedPath.straight(np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]), ORIGIN)
        traj = simulate_execution(plan, empty_map, NoiseConfig.zero(), r_acc=0.05)
        shifted = Trajectory(
            times=traj.times,
            positions=traj.positions + np.array([0.0, 0.3, 0.4]),
            active_contacts=traj.active_contacts,
            outcome=traj.outcome,
        )
        err = cross_track_error(shifted, plan)
        assert err.mean == pytest.approx(0.5)
        assert err.stage_means == {0: pytest.approx(0.5)}

    def test_needs_two_waypoints(self, empty_map):
        plan = AnnotatedPath.straight(np.array([[0.5, 0.5, 0.5]]), ORIGIN)
        traj = simulate_execution(plan, empty_map, NoiseConfig.zero())
        with pytest.raises(ValidationError):
            cross_track_error(traj, plan)


@pytest.mark.slow
def test_error_grows_with_contact_noise(wrap_plan, two_pillars):
    means = []
    for sigma in (0.0, 0.1, 0.2):
        noise = NoiseConfig(sigma_cp=sigma)
        runs = [simulate_execution(wrap_plan, two_pillars, noise.model_copy(update={"seed": s})) for s in range(100)]
        errors = [cross_track_error(traj, wrap_plan).mean for traj in runs]
        means.append(float(np.mean(errors)))
    assert means[0] <= means[1] <= means[2]
