import math

import numpy as np
import pytest

from imcflab import (
    FlowState,
    InvalidSpec,
    LostMeanConvexity,
    ShapeSpec,
    StepControl,
    StiffnessFailure,
    build,
    curvatures,
    rhs,
    run,
    step,
)
from imcflab.flow import stable_dt


def test_rhs_unit_sphere():
    f = rhs(build(ShapeSpec("sphere", n=3, N=65)))
    assert np.allclose(f, 0.5, rtol=1e-15)


@pytest.mark.parametrize("n", [2, 3, 4, 6])
@pytest.mark.parametrize("R", [0.5, 2.0])
def test_rhs_sphere_any_dimension(n, R):
    N = 64 if n == 2 else 65
    f = rhs(build(ShapeSpec("sphere", n=n, N=N, radius=R)))
    assert np.allclose(f, 1.0 / (n - 1), rtol=1e-14)


def test_rhs_circle_radius_two():
    assert np.allclose(rhs(build(ShapeSpec("sphere", n=2, N=64, radius=2.0))), 1.0, rtol=1e-15)


def test_rhs_guard():
    with pytest.warns(UserWarning):
        bad = build(ShapeSpec("perturbed_sphere", n=2, N=128, perturb=((6, 0.3),)))
    with pytest.raises(LostMeanConvexity):
        rhs(bad)
    # a sphere with H = 2 trips the guard when the floor is above 2
    with pytest.raises(LostMeanConvexity):
        rhs(build(ShapeSpec("sphere", n=3, N=65)), h_min=3.0)


def test_single_rk4_step_on_sphere():
    s = build(ShapeSpec("sphere", n=3, N=65))
    st = step(FlowState(0.0, s), StepControl())
    assert st.step_count == 1
    assert st.t == st.last_dt > 0
    assert np.allclose(st.shape.rho, math.exp(st.last_dt / 2), rtol=1e-10)


def test_step_respects_cap_and_cfl():
    s = build(ShapeSpec("spheroid", n=3, N=65))
    ctl = StepControl()
    st0 = FlowState(0.0, s)
    dt = stable_dt(st0, ctl)
    assert dt <= ctl.dt_max
    assert step(st0, ctl).last_dt == dt
    assert step(st0, ctl, dt_cap=dt / 3).last_dt == dt / 3


def test_step_stiffness_failure():
    s = build(ShapeSpec("sphere", n=3, N=65))
    with pytest.raises(StiffnessFailure):
        step(FlowState(0.0, s), StepControl(cfl=1e-14))


def test_circle_grows_exponentially():
    tr = run(build(ShapeSpec("sphere", n=2, N=64)), 1.0, StepControl(), 0.5)
    assert tr.completed
    assert np.allclose(tr.final_shape.rho, math.e, rtol=1e-6)


def test_euler_is_first_order_in_time():
    # same spatial grid for all runs, so only the time error differs from the rk4 reference
    s = build(ShapeSpec("perturbed_sphere", n=2, N=32, perturb=((2, 0.05),)))
    ref = run(s, 0.2, StepControl(dt_max=1e-4), 0.2).final_shape.u
    errs = []
    for dt_max in (4e-3, 2e-3):
        tr = run(s, 0.2, StepControl(method="euler", dt_max=dt_max, cfl=1.0), 0.2)
        errs.append(np.max(np.abs(tr.final_shape.u - ref)))
    assert 1.8 <= errs[0] / errs[1] <= 2.2


def test_run_sample_times_and_rows():
    tr = run(build(ShapeSpec("spheroid", n=3, N=33)), 0.35, StepControl(), 0.1)
    t = tr.column("t")
    assert t[0] == 0.0
    assert list(np.round(t, 12)) == [0.0, 0.1, 0.2, 0.3, 0.35]
    assert t[-1] == 0.35
    assert np.all(np.diff(t) > 0)
    assert tr.rows[0].dt == 0.0


def test_sphere_run_matches_exact_solution():
    tr = run(build(ShapeSpec("sphere", n=3, N=65)), 1.0, StepControl(), 0.25)
    rho = tr.final_shape.rho
    assert np.ptp(rho) < 1e-10
    assert rho[0] == pytest.approx(math.exp(0.5), rel=1e-10)
    assert tr.rows[-1].area == pytest.approx(4 * math.pi * math.e, rel=1e-4)


def test_run_aborts_with_partial_trace():
    # n = 2 wavy curve: mean convex at first, but the floor is set just below its min H
    s = build(ShapeSpec("perturbed_sphere", n=2, N=64, perturb=((3, 0.08),)))
    h0 = float(np.min(curvatures(s).H))
    tr = run(s, 3.0, StepControl(h_min=h0 * 0.999), 0.1)
    # min H first rises as the curve rounds out, then decays like exp(-t) through the floor
    assert tr.status == "aborted"
    assert "LostMeanConvexity" in tr.reason
    assert 1 < len(tr.rows) < 31
    assert 1.0 < tr.final_t < 3.0


def test_run_validation():
    s = build(ShapeSpec("sphere", n=3, N=33))
    with pytest.raises(InvalidSpec):
        run(s, -1.0)
    with pytest.raises(InvalidSpec):
        run(s, 1.0, StepControl(), 2.0)
    with pytest.raises(InvalidSpec):
        StepControl(method="leapfrog")


def test_star_shape_preserved():
    tr = run(build(ShapeSpec("spheroid", n=3, N=65)), 0.5, StepControl(), 0.1)
    assert tr.support_min_steps > 0
    assert all(r.support_min > 0 for r in tr.rows)


def test_runs_are_reproducible():
    s = build(ShapeSpec("perturbed_sphere", n=4, N=33, perturb=((2, 0.05),)))
    a = run(s, 0.3, StepControl(), 0.1)
    b = run(s, 0.3, StepControl(), 0.1)
    assert a.rows == b.rows
