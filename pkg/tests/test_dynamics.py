"""Propagation: conservation, reversibility, events, force wiring."""

import math

import numpy as np
import pytest

from slowpush import (
    AsteroidBody,
    Body,
    Epoch,
    ForceModelConfig,
    IntegratorConfig,
    StateVector,
    ThrustLaw,
    acceleration,
    state_from_elements,
    find_event,
    propagate,
)
from slowpush.constants import AU, DAY, GM_SUN
from slowpush.errors import CloseEncounterError, DomainError, RangeError

from conftest import reference_elements
from helpers import circular_orbit_state

TWO_BODY = ForceModelConfig(perturbers=frozenset(), relativity=False)


def _period_s(a_m):
    return 2.0 * math.pi * math.sqrt(a_m ** 3 / GM_SUN)


def _energy(s):
    return 0.5 * float(s.v @ s.v) - GM_SUN / float(np.linalg.norm(s.r))


class TestTwoBody:
    def test_one_period_return(self):
        s0 = state_from_elements(reference_elements())
        period = _period_s(reference_elements().a)
        traj = propagate(s0, s0.epoch.plus_seconds(period), TWO_BODY)
        sf = traj.final_state
        assert np.linalg.norm(sf.r - s0.r) < 1.0
        assert np.linalg.norm(sf.v - s0.v) < 1e-7

    def test_energy_and_momentum_drift(self):
        s0 = state_from_elements(reference_elements())
        tf = s0.epoch.plus_seconds(7.0 * 365.25 * DAY)
        traj = propagate(s0, tf, TWO_BODY)
        e0 = _energy(s0)
        l0 = np.cross(s0.r, s0.v)
        for s in traj.sample(30.0):
            assert abs(_energy(s) - e0) / abs(e0) < 1e-10
            dl = np.linalg.norm(np.cross(s.r, s.v) - l0)
            assert dl / np.linalg.norm(l0) < 1e-10

    def test_acceleration_is_point_mass(self):
        r, v = circular_orbit_state()
        s = StateVector(r, v, Epoch(57125.0))
        a = acceleration(s, TWO_BODY)
        want = -GM_SUN * r / np.linalg.norm(r) ** 3
        np.testing.assert_allclose(a, want, rtol=1e-13)
        assert np.linalg.norm(a) == pytest.approx(5.9301e-3, rel=1e-4)


    def test_tolerance_convergence_order(self):
        # measured with a loose step cap so the error is tolerance-
        # dominated; at the default cap a 7-year arc sits on the
        # rounding floor and tightening rel_tol changes nothing
        s0 = state_from_elements(reference_elements())
        tf = s0.epoch.plus_seconds(7.0 * 365.25 * DAY)
        pos = {}
        for rtol in (1e-10, 1e-11, 1e-12):
            icfg = IntegratorConfig(rel_tol=rtol, max_step=10.0 * DAY)
            pos[rtol] = propagate(s0, tf, TWO_BODY, icfg).final_state.r
        d_coarse = np.linalg.norm(pos[1e-10] - pos[1e-11])
        d_fine = np.linalg.norm(pos[1e-11] - pos[1e-12])
        assert d_coarse / d_fine >= 3.0

    def test_acceleration_deterministic(self):
        s0 = state_from_elements(reference_elements())
        cfg = ForceModelConfig()
        a1 = acceleration(s0, cfg)
        a2 = acceleration(s0, ForceModelConfig())
        np.testing.assert_array_equal(a1, a2)


class TestReversibility:
    def test_forward_backward_roundtrip(self):
        s0 = state_from_elements(reference_elements())
        mid = propagate(s0, s0.epoch.plus_seconds(100.0 * DAY)).final_state
        back = propagate(mid, s0.epoch).final_state
        assert np.linalg.norm(back.r - s0.r) < 1.0
        assert np.linalg.norm(back.v - s0.v) < 1e-7

    def test_zero_duration(self):
        s0 = state_from_elements(reference_elements())
        traj = propagate(s0, s0.epoch)
        np.testing.assert_array_equal(traj.final_state.as_array(),
                                      s0.as_array())
        assert traj.sample(1.0)[0].epoch == s0.epoch


class TestTrajectory:
    def test_state_at_interpolates(self):
        s0 = state_from_elements(reference_elements())
        traj = propagate(s0, s0.epoch.plus_seconds(50.0 * DAY), TWO_BODY)
        probe = s0.epoch.plus_seconds(17.3 * DAY)
        direct = propagate(s0, probe, TWO_BODY).final_state
        got = traj.state_at(probe)
        assert np.linalg.norm(got.r - direct.r) < 1.0

    def test_state_at_out_of_span(self):
        s0 = state_from_elements(reference_elements())
        traj = propagate(s0, s0.epoch.plus_seconds(10.0 * DAY), TWO_BODY)
        with pytest.raises(RangeError):
            traj.state_at(s0.epoch.plus_seconds(11.0 * DAY))
        with pytest.raises(RangeError):
            traj.state_at(s0.epoch.plus_seconds(-1.0 * DAY))

    def test_sample_cadence(self):
        s0 = state_from_elements(reference_elements())
        traj = propagate(s0, s0.epoch.plus_seconds(10.0 * DAY), TWO_BODY)
        states = traj.sample(3.0)
        assert len(states) == 5          # 0, 3, 6, 9, 10 days
        assert states[0].epoch == s0.epoch
        assert states[-1].epoch.mjd_tdb == pytest.approx(
            s0.epoch.mjd_tdb + 10.0, abs=1e-9)
        with pytest.raises(DomainError):
            traj.sample(0.0)


class TestGuards:
    def test_inside_solar_guard(self):
        s = StateVector(np.array([0.01 * AU, 0.0, 0.0]),
                        np.array([0.0, 1e4, 0.0]), Epoch(57125.0))
        with pytest.raises(DomainError):
            acceleration(s, TWO_BODY)

    def test_close_encounter(self):
        from slowpush.ephemeris import body_state
        e = Epoch(57125.0)
        mars = body_state(Body.MARS, e)
        s = StateVector(mars.r + np.array([5e6, 0.0, 0.0]),
                        np.array([0.0, 2e4, 0.0]), e)
        cfg = ForceModelConfig(perturbers=frozenset({Body.MARS}),
                               relativity=False)
        with pytest.raises(CloseEncounterError):
            acceleration(s, cfg)

    def test_sun_not_a_perturber(self):
        with pytest.raises(DomainError):
            ForceModelConfig(perturbers=frozenset({Body.SUN}))

    def test_thrust_needs_asteroid(self):
        law = ThrustLaw(f0_N=0.1, start=Epoch(57125.0), duration_days=10.0)
        with pytest.raises(DomainError):
            ForceModelConfig(thrust=law)

    def test_integrator_validation(self):
        with pytest.raises(DomainError):
            IntegratorConfig(rel_tol=1e-3)
        with pytest.raises(DomainError):
            IntegratorConfig(abs_tol_pos=0.0)
        with pytest.raises(DomainError):
            IntegratorConfig(min_step=1e9)


class TestForceTerms:
    def test_relativity_small_and_switchable(self):
        s0 = state_from_elements(reference_elements())
        a_off = acceleration(s0, TWO_BODY)
        a_on = acceleration(
            s0, ForceModelConfig(perturbers=frozenset(), relativity=True))
        d = np.linalg.norm(a_on - a_off) / np.linalg.norm(a_off)
        assert 1e-10 < d < 1e-6

    def test_perturbers_change_acceleration(self):
        s0 = state_from_elements(reference_elements())
        a_two = acceleration(s0, TWO_BODY)
        a_full = acceleration(s0, ForceModelConfig(relativity=False))
        d = np.linalg.norm(a_full - a_two) / np.linalg.norm(a_two)
        assert 1e-8 < d < 1e-2

    def test_thrust_raises_orbit_energy(self):
        r, v = circular_orbit_state()
        e0 = Epoch(57125.0)
        s0 = StateVector(r, v, e0)
        body = AsteroidBody(diameter_m=250.0, density_kgm3=2000.0)
        law = ThrustLaw(f0_N=0.4, sign=1, start=e0, duration_days=60.0)
        cfg = ForceModelConfig(perturbers=frozenset(), relativity=False,
                               thrust=law, asteroid=body)
        tf = e0.plus_seconds(60.0 * DAY)
        pushed = propagate(s0, tf, cfg).final_state
        coasted = propagate(s0, tf, TWO_BODY).final_state
        assert _energy(pushed) > _energy(coasted)
        gain = _energy(pushed) - _energy(coasted)
        # a.v integrated over the arc bounds the gain scale
        approx = (0.4 / body.mass_kg) * np.linalg.norm(v) * 60.0 * DAY
        assert gain == pytest.approx(approx, rel=0.05)

    def test_thrust_inactive_outside_window(self):
        r, v = circular_orbit_state()
        e0 = Epoch(57125.0)
        s0 = StateVector(r, v, e0)
        body = AsteroidBody(diameter_m=250.0, density_kgm3=2000.0)
        law = ThrustLaw(f0_N=0.4, sign=1, start=Epoch(58000.0),
                        duration_days=10.0)
        cfg = ForceModelConfig(perturbers=frozenset(), relativity=False,
                               thrust=law, asteroid=body)
        a = acceleration(s0, cfg)
        np.testing.assert_allclose(a, acceleration(s0, TWO_BODY), rtol=1e-13)


class TestFindEvent:
    def test_quarter_period_crossing(self):
        r, v = circular_orbit_state()
        e0 = Epoch(57125.0)
        s0 = StateVector(r, v, e0)
        period = _period_s(AU)
        hit = find_event(s0, e0.plus_seconds(0.4 * period),
                         lambda s: float(s.r[0]), TWO_BODY)
        assert hit is not None
        epoch, state = hit
        assert (epoch - e0) == pytest.approx(period / 4.0, rel=1e-9)
        assert abs(state.r[0]) < 1.0
        assert state.r[1] == pytest.approx(AU, rel=1e-9)

    def test_no_crossing_returns_none(self):
        r, v = circular_orbit_state()
        s0 = StateVector(r, v, Epoch(57125.0))
        out = find_event(s0, Epoch(57125.0).plus_seconds(10.0 * DAY),
                         lambda s: float(np.linalg.norm(s.r)) - 2.0 * AU,
                         TWO_BODY)
        assert out is None

    def test_zero_span_returns_none(self):
        r, v = circular_orbit_state()
        s0 = StateVector(r, v, Epoch(57125.0))
        assert find_event(s0, Epoch(57125.0),
                          lambda s: float(s.r[0]), TWO_BODY) is None
