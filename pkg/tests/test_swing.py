import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import foot_height, hermite_basis_value
from pgtt.swing import (FootTrajectoryParams, HermiteSegment, hermite_coeffs, hermite_deriv,
                        hermite_eval, desired_foot_height, sample_trajectory, swing_segments)

TWO_PI = 2.0 * math.pi
finite = st.floats(-10.0, 10.0)
durations = st.floats(0.05, 10.0)


@st.composite
def trajectory_params(draw):
    d_b = draw(st.floats(-0.5, -0.1))
    d_s = d_b + draw(st.floats(0.01, 0.2))
    p = draw(st.floats(0.2, 0.8))
    return FootTrajectoryParams(d_b, d_s, p)


class TestHermite:
    def test_constant_segment(self):
        assert hermite_coeffs(0.5, 0.5, 0.0, 0.0, 1.0).coeffs == (0.5, 0.0, 0.0, 0.0)

    def test_unit_step(self):
        assert hermite_coeffs(0.0, 1.0, 0.0, 0.0, 1.0).coeffs == (0.0, 0.0, 3.0, -2.0)
        assert hermite_coeffs(0.0, 1.0, 0.0, 0.0, 2.0).coeffs == (0.0, 0.0, 0.75, -0.25)

    def test_eval_examples(self):
        seg = HermiteSegment(0.0, 0.0, 3.0, -2.0, 1.0)
        assert hermite_eval(seg, 0.5) == 0.5
        assert hermite_eval(seg, 1.0) == 1.0
        assert hermite_eval(HermiteSegment(0.7, 1, 2, 3, 1.0), 0.0) == 0.7

    @pytest.mark.parametrize("T", [0.0, -1.0])
    def test_bad_duration(self, T):
        with pytest.raises(ValueError):
            hermite_coeffs(0, 1, 0, 0, T)

    @pytest.mark.parametrize("t", [-1e-9, 1.0 + 1e-9])
    def test_eval_domain(self, t):
        with pytest.raises(ValueError):
            hermite_eval(HermiteSegment(0, 0, 3, -2, 1.0), t)

    @given(finite, finite, finite, finite, durations)
    def test_endpoint_contract(self, p0, p1, m0, m1, T):
        seg = hermite_coeffs(p0, p1, m0, m1, T)
        scale = 1.0 + abs(p0) + abs(p1) + T * (abs(m0) + abs(m1))
        assert hermite_eval(seg, 0.0) == p0
        assert abs(hermite_eval(seg, T) - p1) <= 1e-12 * scale
        assert hermite_deriv(seg, 0.0) == m0
        assert abs(hermite_deriv(seg, T) - m1) <= 1e-12 * scale / T

    @given(finite, finite, finite, finite, durations, st.floats(0.0, 1.0))
    def test_matches_basis_form(self, p0, p1, m0, m1, T, s):
        seg = hermite_coeffs(p0, p1, m0, m1, T)
        scale = 1.0 + abs(p0) + abs(p1) + T * (abs(m0) + abs(m1))
        assert abs(hermite_eval(seg, s * T) - hermite_basis_value(p0, p1, m0, m1, T, s * T)) \
            <= 1e-11 * scale


class TestDesiredHeight:
    P = FootTrajectoryParams(-0.30, -0.22, 0.5)

    def test_stance_start(self):
        assert desired_foot_height(0.0, self.P, 0.0) == -0.30

    def test_peak_with_lift(self):
        assert desired_foot_height(self.P.t_peak, self.P, 0.04) == -0.22 + 0.04

    def test_dense_sweep(self):
        phis = np.arange(0.0, TWO_PI, 1e-4)
        z = np.array([desired_foot_height(p, self.P) for p in phis])
        assert z.max() == pytest.approx(-0.22, abs=1e-8)
        assert z.min() == -0.30
        assert desired_foot_height(TWO_PI - 1e-9, self.P) == pytest.approx(-0.30, abs=1e-6)

    def test_two_pi_is_zero(self):
        assert desired_foot_height(TWO_PI, self.P, 0.03) == desired_foot_height(0.0, self.P, 0.03)

    @pytest.mark.parametrize("phi", [-0.1, 7.0, float("nan")])
    def test_invalid_phase(self, phi):
        with pytest.raises(ValueError):
            desired_foot_height(phi, self.P)

    def test_negative_lift(self):
        with pytest.raises(ValueError):
            desired_foot_height(4.0, self.P, -0.01)

    def test_params_validation(self):
        with pytest.raises(ValueError):
            FootTrajectoryParams(-0.2, -0.3)
        with pytest.raises(ValueError):
            FootTrajectoryParams(stance_ratio=1.0)

    def test_segment_timing(self):
        p = FootTrajectoryParams(stance_ratio=0.6)
        assert p.t_stance == pytest.approx(TWO_PI * 0.6)
        assert p.t_peak == pytest.approx(TWO_PI * 0.8)
        assert p.t_swing == pytest.approx(TWO_PI * 0.2)
        up, down = swing_segments(p, 0.0)
        assert up.duration == down.duration == p.t_swing

    @given(trajectory_params(), st.floats(0.0, 0.15), st.floats(0.0, TWO_PI, exclude_max=True))
    def test_matches_oracle(self, p, dh, phi):
        assert desired_foot_height(phi, p, dh) == pytest.approx(
            foot_height(phi, p.d_b, p.d_s, p.stance_ratio, dh), abs=1e-12)

    @given(trajectory_params(), st.floats(0.0, 0.15), st.floats(0.0, TWO_PI, exclude_max=True))
    def test_bounded(self, p, dh, phi):
        z = desired_foot_height(phi, p, dh)
        assert p.d_b - 1e-12 <= z <= p.d_s + dh + 1e-12

    @given(trajectory_params(), st.floats(0.0, 0.15))
    def test_monotone_halves(self, p, dh):
        up = np.linspace(p.t_stance, p.t_peak, 200, endpoint=False)
        down = np.linspace(p.t_peak, TWO_PI, 200, endpoint=False)
        zu = [desired_foot_height(x, p, dh) for x in up]
        zd = [desired_foot_height(x, p, dh) for x in down]
        assert np.all(np.diff(zu) >= -1e-12)
        assert np.all(np.diff(zd) <= 1e-12)

    @given(trajectory_params(), st.floats(0.0, 0.1), st.floats(0.0, 0.05))
    def test_apex_monotone_in_lift(self, p, dh, extra):
        a = desired_foot_height(p.t_peak, p, dh)
        lifted = dh + extra
        b = desired_foot_height(p.t_peak, p, lifted)
        assert a == p.d_s + dh and b == p.d_s + lifted and b >= a


def test_sample_trajectory_shape():
    traj = sample_trajectory(FootTrajectoryParams(), 0.02, n=90)
    assert traj.shape == (90, 2)
    assert traj[0, 0] == 0.0 and traj[-1, 0] < TWO_PI
    assert traj[:, 1].max() <= -0.22 + 0.02 + 1e-12
