import numpy as np
import pytest

import pxlap as px
from conftest import grid_1d

CFG = px.NormConfig(bisection_tol=1e-12, max_iter=400)


def test_modular_constant_one_unit_domain():
    g = grid_1d(0.0, 1.0, 64, lambda x: np.ones_like(x))
    f = px.constant_exponent(2.7)
    assert px.modular(g, f, 1.0) == pytest.approx(1.0, abs=1e-12)


def test_modular_zero_function():
    g = grid_1d(0.0, 1.0, 16, lambda x: np.zeros_like(x))
    f = px.constant_exponent(2.0)
    for lam in (0.1, 1.0, 10.0):
        assert px.modular(g, f, lam) == 0.0


def test_modular_piecewise_exact():
    # u = 1 on (0,2), p = 2 on (0,1), p = 4 on (1,2), lambda = 2:
    # (1/2)^2 + (1/2)^4 = 0.3125 exactly (cells stay on one side of x = 1).
    g = grid_1d(0.0, 2.0, 128, lambda x: np.ones_like(x))
    f = px.piecewise_exponent(0, 1.0, 2.0, 4.0)
    assert px.modular(g, f, 2.0) == pytest.approx(0.3125, abs=1e-14)


def test_modular_rejects_nonpositive_lambda():
    g = grid_1d(0.0, 1.0, 8, lambda x: x)
    f = px.constant_exponent(2.0)
    with pytest.raises(ValueError):
        px.modular(g, f, 0.0)


def test_modular_decreasing_in_lambda():
    g = grid_1d(0.0, 1.0, 32, lambda x: 1.0 + x)
    f = px.piecewise_exponent(0, 0.5, 2.0, 3.0)
    lams = [0.5, 1.0, 2.0, 4.0]
    vals = [px.modular(g, f, l) for l in lams]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_luxemburg_zero_and_constant():
    g0 = grid_1d(0.0, 1.0, 16, lambda x: np.zeros_like(x))
    f = px.constant_exponent(2.0)
    assert px.luxemburg_norm(g0, f, CFG) == 0.0
    g3 = grid_1d(0.0, 1.0, 16, lambda x: np.full_like(x, 3.0))
    assert px.luxemburg_norm(g3, f, CFG) == pytest.approx(3.0, rel=1e-10)


def test_luxemburg_piecewise_quartic_root():
    # modular(lambda) = (1/lambda)^2 + (1/lambda)^4 = 1 has the closed-form
    # root lambda = sqrt(2 / (sqrt(5) - 1)).
    g = grid_1d(0.0, 2.0, 256, lambda x: np.ones_like(x))
    f = px.piecewise_exponent(0, 1.0, 2.0, 4.0)
    root = np.sqrt(2.0 / (np.sqrt(5.0) - 1.0))
    assert px.luxemburg_norm(g, f, CFG) == pytest.approx(root, abs=1e-9)


def test_luxemburg_constant_p_matches_classical():
    rng = np.random.default_rng(3)
    vals = rng.random(65) + 0.5
    g = grid_1d(0.0, 1.0, 64, lambda x: np.interp(x, np.linspace(0, 1, 65), vals))
    for p0 in (1.5, 2.0, 3.7):
        f = px.constant_exponent(p0)
        from pxlap.quadrature import cell_means, midpoint_data
        _, vols = midpoint_data(g)
        classical = float(np.sum(vols * np.abs(cell_means(g)) ** p0) ** (1.0 / p0))
        assert px.luxemburg_norm(g, f, CFG) == pytest.approx(classical, rel=1e-8)


def test_luxemburg_homogeneity_random_scales():
    rng = np.random.default_rng(11)
    g = grid_1d(0.0, 1.0, 64, lambda x: np.sin(3 * x) + 1.2)
    box = px.Box([0.0], [1.0])
    f = px.affine_exponent(1.6, [1.2], box)
    base = px.luxemburg_norm(g, f, CFG)
    for t in rng.uniform(0.01, 100.0, size=8):
        scaled = px.luxemburg_norm(g.like(t * g.values), f, CFG)
        assert scaled == pytest.approx(t * base, rel=1e-8)


def test_luxemburg_unit_ball_property():
    g = grid_1d(0.0, 1.0, 64, lambda x: 2.0 + np.cos(5 * x))
    box = px.Box([0.0], [1.0])
    f = px.affine_exponent(2.0, [1.0], box)
    lam = px.luxemburg_norm(g, f, CFG)
    assert abs(px.modular(g, f, lam) - 1.0) <= 10 * f.p2 * CFG.bisection_tol


def test_luxemburg_bracket_failure_carries_bracket():
    g = grid_1d(0.0, 1.0, 8, lambda x: np.full_like(x, 10.0))
    f = px.constant_exponent(2.0)
    with pytest.raises(px.norms.BracketError) as exc:
        px.luxemburg_norm(g, f, px.NormConfig(bisection_tol=1e-10, max_iter=2))
    assert exc.value.bracket[1] == 4.0


def test_sobolev_norm_linear_1d():
    # u(x) = x on (0,1), p = 2: ||x||_2 + ||1||_2 = 1/sqrt(3) + 1.
    g = grid_1d(0.0, 1.0, 512, lambda x: x)
    f = px.constant_exponent(2.0)
    got = px.sobolev_norm(g, f, CFG)
    assert got == pytest.approx(1.0 / np.sqrt(3.0) + 1.0, abs=2e-6)


def test_sobolev_norm_constant_is_value_norm():
    g = grid_1d(0.0, 1.0, 32, lambda x: np.full_like(x, 2.5))
    f = px.constant_exponent(3.0)
    assert px.sobolev_norm(g, f, CFG) == pytest.approx(2.5, rel=1e-9)
    g0 = grid_1d(0.0, 1.0, 32, lambda x: np.zeros_like(x))
    assert px.sobolev_norm(g0, f, CFG) == 0.0


def test_lt_average_examples():
    g = grid_1d(0.0, 1.0, 1024, lambda x: x)
    ball = px.Ball([0.5], 0.5)
    assert px.lt_average(g, 1.0, ball) == pytest.approx(0.5, abs=1e-3)
    assert px.lt_average(g, 2.0, ball) == pytest.approx(np.sqrt(1.0 / 3.0), abs=1e-3)
    gc = grid_1d(0.0, 1.0, 16, lambda x: np.full_like(x, 4.2))
    for t in (0.5, 1.0, 3.0):
        assert px.lt_average(gc, t, px.Ball([0.5], 0.4)) == pytest.approx(4.2, rel=1e-12)


def test_lt_average_monotone_in_t():
    rng = np.random.default_rng(5)
    g = grid_1d(0.0, 1.0, 64, lambda x: rng.random(x.size) + 0.1)
    ball = px.Ball([0.5], 0.3)
    ts = [0.5, 1.0, 2.0, 4.0, 8.0]
    vals = [px.lt_average(g, t, ball) for t in ts]
    assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))


def test_lt_average_errors():
    g = grid_1d(0.0, 1.0, 16, lambda x: x)
    with pytest.raises(ValueError):
        px.lt_average(g, 0.0, px.Ball([0.5], 0.3))
    with pytest.raises(ValueError):
        px.lt_average(g, 1.0, px.Ball([10.0], 0.01))
