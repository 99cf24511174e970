import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import odekit as ok
from odekit.adaptive import AdaptiveConfig, ode12_solve, step_size_update
from odekit.errors import StepUnderflowError


class TestStepSizeUpdate:
    def test_ratio_one(self):
        assert step_size_update(0.1, 1e-3, 1e-3) == pytest.approx(0.08, abs=1e-15)

    def test_square_root_shrink(self):
        assert step_size_update(0.1, 4e-3, 1e-3) == pytest.approx(0.04, abs=1e-15)

    def test_growth_case(self):
        assert step_size_update(0.1, 0.25e-3, 1e-3) == pytest.approx(0.16, abs=1e-15)

    @given(lo=st.floats(1e-8, 1e-1), factor=st.floats(1.001, 100.0))
    @settings(max_examples=50, deadline=None)
    def test_monotone_in_estimate(self, lo, factor):
        hi = lo * factor
        assert step_size_update(0.1, hi, 1e-3) < step_size_update(0.1, lo, 1e-3)


class TestOde12:
    def test_constant_field_accepts_at_h_init(self):
        problem = ok.IvpProblem(name="unit", dim=1, rhs=lambda t, y: np.ones(1),
                                t0=0.0, t_end=1.0, y0=np.zeros(1))
        cfg = AdaptiveConfig(tol=1e-3)
        traj = ode12_solve(problem, cfg)
        accepted = [r for r in traj.step_log if r.accepted]
        assert all(r.e == 0.0 for r in accepted)
        assert traj.stats.rejected_steps == 0
        # every step runs at h_init except the final clamped one
        assert all(r.h == cfg.h_init for r in accepted[:-1])
        assert traj.final_time == 1.0

    def test_front_loaded_problem_uses_smaller_steps(self):
        problem = ok.get_problem("adapt_demo")
        traj = ode12_solve(problem, AdaptiveConfig(tol=1e-3))
        acc = [r for r in traj.step_log if r.accepted]
        early = [r.h for r in acc if r.t < 0.3]
        late = [r.h for r in acc if r.t >= 2.0]
        assert np.mean(early) < np.mean(late)

    def test_decay_global_error(self):
        problem = ok.get_problem("decay", t_end=3.0)
        traj = ode12_solve(problem, AdaptiveConfig(tol=1e-6))
        assert abs(traj.final_state[0] - math.exp(-3.0)) < 1e-3

    def test_acceptance_soundness(self):
        problem = ok.get_problem("adapt_demo")
        cfg = AdaptiveConfig(tol=1e-3)
        traj = ode12_solve(problem, cfg)
        assert all(r.e < cfg.tol for r in traj.step_log if r.accepted)

    def test_rhs_budget(self):
        problem = ok.get_problem("adapt_demo")
        traj = ode12_solve(problem, AdaptiveConfig(tol=1e-3))
        assert traj.stats.rhs_evals == 2 * len(traj.step_log)

    def test_step_underflow_raises(self):
        problem = ok.get_problem("adapt_demo")
        cfg = AdaptiveConfig(tol=1e-9, h_min=1e-2)
        with pytest.raises(StepUnderflowError):
            ode12_solve(problem, cfg)

    def test_reject_cap_raises(self):
        # a fast-oscillating rhs keeps the slope difference O(1e6) until h
        # is tiny, forcing many consecutive rejections
        problem = ok.IvpProblem(
            name="rough", dim=1,
            rhs=lambda t, y: np.array([1e6 * math.sin(1e8 * t)]),
            t0=0.0, t_end=1.0, y0=np.zeros(1),
        )
        cfg = AdaptiveConfig(tol=1e-3, max_rejects_per_step=3, h_min=1e-300)
        with pytest.raises(ok.errors.RejectCapError):
            ode12_solve(problem, cfg)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            AdaptiveConfig(tol=-1.0)
        with pytest.raises(ValueError):
            AdaptiveConfig(tol=1e-3, safety=1.5)

    @pytest.mark.parametrize("tol", [1e-2, 1e-3, 1e-4])
    def test_termination_exact_on_nonstiff_catalog(self, tol):
        # explicit pair: the stiff entries (robertson, vdp at large mu,
        # mol_diffusion, lambda_cos) would need ~1e5..1e7 stability-limited
        # steps, so the sweep covers the nonstiff/nonsmooth families
        cases = [
            ("decay", {}), ("growth", {}), ("atan", {}), ("texp", {}),
            ("quartic", {}), ("rational", {}), ("nonsmooth", {}),
            ("adapt_demo", {}), ("kinetics2", {}), ("kinetics3", {}),
            ("sqrt_nonunique", {}), ("alpha_power", {}), ("pendulum", {}),
            ("stiff_sys_A", {}), ("dog_jogger", {}), ("blowup", {"t_end": 0.9}),
        ]
        for key, params in cases:
            problem = ok.get_problem(key, **params)
            traj = ode12_solve(problem, AdaptiveConfig(tol=tol))
            assert traj.final_time == problem.t_end, key
