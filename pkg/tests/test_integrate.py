import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eulerrays.integrate import IntegratorConfig, dense_eval, integrate_batch


def linear_rhs(A):
    def rhs(t, y):
        return y @ A.T

    return rhs


def test_dp54_matches_matrix_exponential():
    from scipy.linalg import expm

    A = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.3]])
    y0 = np.array([[1.0, 0.0, 1.0], [0.2, -0.5, 2.0]])
    res = integrate_batch(linear_rhs(A), y0, 0.0, [0.5, 1.0, 2.0], IntegratorConfig())
    for k, t in enumerate(res.times):
        np.testing.assert_allclose(res.ys[k], y0 @ expm(A * t).T, rtol=1e-9, atol=1e-10)
    assert not res.failed.any()


def test_backward_integration():
    res = integrate_batch(lambda t, y: y, np.array([[1.0]]), 1.0, [0.0], IntegratorConfig())
    assert res.ys[0, 0, 0] == pytest.approx(np.exp(-1.0), rel=1e-10)


def test_rk4_is_fourth_order():
    errs = []
    for h in (0.1, 0.05):
        cfg = IntegratorConfig(method="rk4", max_step=h)
        res = integrate_batch(lambda t, y: np.cos(t)[:, None] * y, np.array([[1.0]]), 0.0, [2.0], cfg)
        errs.append(abs(res.ys[0, 0, 0] - np.exp(np.sin(2.0))))
    assert np.log2(errs[0] / errs[1]) > 3.8


def test_dense_output_agrees_with_landing():
    A = np.array([[0.0, 1.0], [-4.0, 0.0]])
    y0 = np.array([[1.0, 0.0]])
    times = np.linspace(0.1, 3.0, 17)
    a = integrate_batch(linear_rhs(A), y0, 0.0, times, IntegratorConfig())
    b = integrate_batch(linear_rhs(A), y0, 0.0, times, IntegratorConfig(dense_output=True))
    np.testing.assert_allclose(a.ys, b.ys, atol=1e-8)


def test_dense_eval_endpoints():
    y = np.array([1.0, 2.0])
    ks = [np.ones(2)] * 7
    np.testing.assert_allclose(dense_eval(y, 0.5, ks, 0.0), y)
    # constant slope: the interpolant is exact
    np.testing.assert_allclose(dense_eval(y, 0.5, ks, 1.0), y + 0.5)


def test_singular_rows_abort_without_touching_others():
    def rhs(t, y):
        return np.where(y[:, :1] > 10, np.nan, 1.0) * np.ones_like(y)

    res = integrate_batch(rhs, np.array([[0.0], [9.5]]), 0.0, [1.0], IntegratorConfig())
    assert not res.failed[0] and res.failed[1]
    assert res.ys[0, 0, 0] == pytest.approx(1.0)
    assert np.isnan(res.ys[0, 1, 0])
    assert res.reasons[1] == "step-size collapse"


def test_check_callback_marks_singular_state():
    res = integrate_batch(
        lambda t, y: np.ones_like(y), np.array([[0.0], [5.0]]), 0.0, [1.0], IntegratorConfig(),
        check=lambda y: y[:, 0] > 5.5,
    )
    assert res.failed.tolist() == [False, True]
    assert res.reasons[1] == "singular state"


def test_invalid_config():
    with pytest.raises(ValueError):
        IntegratorConfig(method="euler")
    with pytest.raises(ValueError):
        IntegratorConfig(rtol=0)
    with pytest.raises(ValueError):
        integrate_batch(lambda t, y: y, np.ones((1, 1)), 0.0, [1.0, 0.5], IntegratorConfig())


def test_horizon_sets_default_step():
    cfg = IntegratorConfig()
    assert cfg.steps_for(2.0) == (0.02, 0.002)
    tied = integrate_batch(lambda t, y: y, np.ones((1, 1)), 0.0, [0.01], cfg, horizon=1.0)
    own = integrate_batch(lambda t, y: y, np.ones((1, 1)), 0.0, [0.01], cfg)
    assert tied.n_accepted[0] <= 3
    assert own.n_accepted[0] >= 100


@given(st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_rows_independent_of_batch_composition(k, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(3, 3))

    def rhs(t, y):
        # elementwise only, as the integrator contract requires of rhs
        lin = [A[i, 0] * y[:, 0] + A[i, 1] * y[:, 1] + A[i, 2] * y[:, 2] for i in range(3)]
        return np.stack([np.sin(v) + np.cos(t) for v in lin], axis=1)

    y0 = rng.normal(size=(12, 3))
    cfg = IntegratorConfig(rtol=1e-8, atol=1e-8)
    whole = integrate_batch(rhs, y0, 0.0, [0.5, 1.0], cfg)
    part = integrate_batch(rhs, y0[:k], 0.0, [0.5, 1.0], cfg)
    assert np.array_equal(whole.ys[:, :k], part.ys)
