import io

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import brentq

from eulerrays.burgers import (
    BurgersError,
    Grid1D,
    bump_profile_1d,
    godunov_flux,
    interface_state,
    shock_time_estimate,
    solve_burgers,
    solve_linearized,
    write_ledger_csv,
    write_snapshots_csv,
)


def sine(x):
    return np.sin(x)


def characteristics(x, t):
    """Smooth solution of u_t + u u_x = 0 with u(0) = sin, valid for t < 1."""
    out = np.empty_like(x)
    for i, xi in enumerate(x):
        # u = sin(xi - t u) has a unique root in [-1, 1] before breaking
        out[i] = brentq(lambda u: u - np.sin(xi - t * u), -1.0, 1.0, xtol=1e-15)
    return out


def test_constant_state_is_exact():
    g = Grid1D(64)
    run = solve_burgers(lambda x: 0 * x + 0.7, 1.0, g, times=[0.5])
    np.testing.assert_allclose(run.u_snapshots, 0.7, rtol=0, atol=1e-15)
    assert shock_time_estimate(run) is None


def test_rest_state():
    run = solve_burgers(lambda x: 0 * x, 1.0, Grid1D(32))
    assert run.notes == ["rest state"]
    assert np.all(run.u_snapshots == 0)


def test_godunov_flux_cases():
    ul = np.array([1.0, -1.0, -1.0, 2.0, 1.0])
    ur = np.array([2.0, -2.0, 1.0, -1.0, -2.0])
    np.testing.assert_allclose(godunov_flux(ul, ur), [0.5, 2.0, 0.0, 2.0, 2.0])
    np.testing.assert_allclose(interface_state(ul, ur), [1.0, -2.0, 0.0, 2.0, -2.0])


def test_pre_shock_error_halves_under_refinement():
    errs = []
    for nx in (256, 512):
        g = Grid1D(nx)
        run = solve_burgers(sine, 0.5, g)
        errs.append(np.sum(np.abs(run.u_snapshots[-1] - characteristics(g.centers(), 0.5))) * g.dx)
    assert 1.8 < errs[0] / errs[1] < 2.2


def test_riemann_shock_is_stationary():
    # u = 1 on (0, pi), -1 on (pi, 2pi): two stationary shocks at pi and 0
    g = Grid1D(128)
    u0 = np.where(g.centers() < np.pi, 1.0, -1.0)
    run = solve_burgers(u0, 2.0, g)
    jumps = np.nonzero(np.abs(np.diff(run.u_snapshots[-1])) > 1.0)[0]
    assert abs(g.centers()[jumps[0]] - np.pi) <= g.dx
    assert shock_time_estimate(run) == 0.0


def test_sine_shock_is_detected_after_start():
    run = solve_burgers(sine, 2.0, Grid1D(512))
    ts = shock_time_estimate(run)
    assert ts is not None and 0.5 < ts < 1.5


def test_mass_and_total_variation():
    g = Grid1D(256)
    run = solve_burgers(lambda x: np.sin(x) + 0.3 * np.cos(3 * x) + 0.2, 3.0, g)
    np.testing.assert_allclose(run.mass, run.mass[0], rtol=0, atol=1e-12)
    assert np.all(np.diff(run.total_variation()) <= 1e-12)


@given(st.floats(0.1, 1.0), st.floats(0.0, 2 * np.pi), st.floats(0.3, 2.0))
def test_l1_of_positive_v_is_constant(amp, center, width):
    g = Grid1D(128)
    run = solve_burgers(lambda x: amp * np.sin(x - center), 2.0, g, cfl=0.5)
    solve_linearized(run, lambda x: bump_profile_1d((x - np.pi) / width) + 1e-3)
    assert np.all(run.v_steps >= 0)
    np.testing.assert_allclose(run.l1_ledger, run.l1_ledger[0], rtol=1e-12)


def test_l1_of_signed_v_does_not_grow():
    g = Grid1D(256)
    run = solve_burgers(sine, 0.8, g)
    solve_linearized(run, lambda x: np.cos(2 * x))
    assert np.all(np.diff(run.l1_ledger) <= 1e-12)
    assert any("periodic" in n for n in run.notes)


def test_linearized_step_mismatch():
    g = Grid1D(32)
    run = solve_burgers(sine, 0.3, g)
    with pytest.raises(BurgersError, match="time steps"):
        solve_linearized(run, sine, dts=np.diff(run.step_times) * 1.1)


def test_validation():
    with pytest.raises(BurgersError):
        Grid1D(8)
    with pytest.raises(BurgersError):
        solve_burgers(sine, 1.0, Grid1D(32), cfl=1.5)
    with pytest.raises(BurgersError):
        solve_burgers(sine, 1.0, Grid1D(32), times=[2.0])
    with pytest.raises(BurgersError, match="shape"):
        solve_burgers(np.zeros(10), 1.0, Grid1D(32))


def test_csv_writers():
    g = Grid1D(16)
    run = solve_linearized(solve_burgers(sine, 0.2, g, times=[0.1]), sine)
    buf = io.StringIO()
    write_snapshots_csv(run, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "t,x,u,v" and len(lines) == 1 + 2 * 16
    buf = io.StringIO()
    write_ledger_csv(run, buf)
    assert len(buf.getvalue().splitlines()) == 1 + len(run.step_times)
