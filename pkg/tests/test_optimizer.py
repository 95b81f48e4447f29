import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lofusion.fock import is_unitary
from lofusion.gates import HybridOpSpec, build_cz1, evaluate_hybrid
from lofusion.optimizer import (
    OptimizerConfig,
    UnitaryParams,
    _CayleyChart,
    _Problem,
    check_result,
    decompose,
    gradient_check,
    objective,
    objective_gradient,
    optimize,
    parametrize,
    reck_pairs,
)

from conftest import haar


def test_parametrize_examples():
    np.testing.assert_allclose(parametrize(UnitaryParams.zeros(4)), np.eye(4))
    bs = parametrize(UnitaryParams(2, [np.pi / 4], [0.0], [0.0, 0.0]))
    np.testing.assert_allclose(np.abs(bs) ** 2, 0.5 * np.ones((2, 2)), atol=1e-15)
    assert len(reck_pairs(5)) == 10


@given(seed=st.integers(0, 2**31 - 1), m=st.integers(1, 7))
def test_parametrize_is_unitary(seed, m):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-10, 10, UnitaryParams.size(m))
    assert is_unitary(parametrize(UnitaryParams.from_vector(m, x)), atol=1e-10)


@pytest.mark.parametrize("m", range(1, 9))
def test_decompose_round_trip(m):
    u = haar(m, np.random.default_rng(m))
    np.testing.assert_allclose(parametrize(decompose(u)), u, atol=1e-12)


def test_params_vector_round_trip():
    p = UnitaryParams.from_vector(3, np.arange(9.0))
    np.testing.assert_array_equal(UnitaryParams.from_vector(3, p.to_vector()).to_vector(), np.arange(9.0))
    with pytest.raises(ValueError):
        UnitaryParams.from_vector(3, np.zeros(8))


def test_objective_examples(specs):
    cz1 = specs["cz1_spec"]
    p = decompose(build_cz1())
    for w in (0.0, 1.0, 100.0):
        assert objective(p, cz1, w) == pytest.approx(0.5, abs=1e-12)
    assert objective(UnitaryParams.zeros(4), cz1, 10.0) == pytest.approx(-7.0, abs=1e-12)
    rng = np.random.default_rng(3)
    for _ in range(5):
        q = UnitaryParams.from_vector(4, rng.uniform(0, 6, 16))
        assert 0.0 <= objective(q, cz1, 0.0) <= 1.0


def test_gradient_check_random_point(specs):
    rng = np.random.default_rng(8)
    for name, m in (("cz1_spec", 4), ("stretch_spec", 4), ("cz_operator_spec", 6)):
        p = UnitaryParams.from_vector(m, rng.uniform(0, 2 * np.pi, UnitaryParams.size(m)))
        assert gradient_check(p, specs[name], weight=1.0) < 1e-5


def test_cz1_is_stationary(specs):
    _, g = objective_gradient(decompose(build_cz1()), specs["cz1_spec"], 10.0)
    assert np.linalg.norm(g) < 1e-4


def test_interior_maximum_of_surrogate(specs):
    base = specs["cz1_spec"]
    same = HybridOpSpec(2, base.inputs, base.inputs, "identity on the cz1 inputs")
    val, g = objective_gradient(UnitaryParams.zeros(4), same, 0.0)
    assert val == pytest.approx(1.0)
    assert np.linalg.norm(g) < 1e-10


@pytest.mark.parametrize("form", ["log", "linear"])
def test_chart_gradient_matches_finite_difference(specs, form):
    prob = _Problem(specs["cz1_spec"], 4)
    chart = _CayleyChart(4)
    rng = np.random.default_rng(2)
    u0 = haar(4, rng)
    y = 0.1 * rng.standard_normal(chart.size)

    def val(z):
        c, _ = chart.cayley(z)
        return prob._grad_u(u0 @ c, 3.0, form)[0]

    c, inv = chart.cayley(y)
    g = chart.pullback(u0, c, inv, prob._grad_u(u0 @ c, 3.0, form)[3])
    h = 1e-6
    fd = np.array([(val(y + h * e) - val(y - h * e)) / (2 * h) for e in np.eye(chart.size)])
    assert np.max(np.abs(fd - g)) < 1e-6 * max(1, np.max(np.abs(g)))


def test_optimize_cz1_small_and_reproducible(specs):
    cfg = OptimizerConfig(restarts=2, seed=3)
    a = optimize(specs["cz1_spec"], cfg)
    b = optimize(specs["cz1_spec"], cfg)
    assert a.feasible and a.success == pytest.approx(0.5, abs=1e-3)
    assert a.success <= 0.5 + 1e-6
    assert check_result(a, specs["cz1_spec"])
    assert a.traces == b.traces
    np.testing.assert_array_equal(a.params.to_vector(), b.params.to_vector())
    c = optimize(specs["cz1_spec"], OptimizerConfig(restarts=2, seed=3, threads=2))
    assert c.traces == a.traces


def test_optimize_target_stops_early(specs):
    r = optimize(specs["cz1_spec"], OptimizerConfig(restarts=10, seed=0, target=0.49))
    assert len(r.traces) < 10 and r.success >= 0.49


def test_optimize_reports_evaluated_values(specs):
    r = optimize(specs["stretch_spec"], OptimizerConfig(restarts=1, seed=1))
    ev = evaluate_hybrid(r.unitary, specs["stretch_spec"], fidelity_atol=1e-6)
    assert ev.fidelity == pytest.approx(r.fidelity, abs=1e-12)
    assert r.unitary.shape == (4, 4)


def test_infeasible_result_is_flagged(specs):
    # one stage with a vanishing penalty cannot force unit fidelity
    cfg = OptimizerConfig(restarts=1, seed=0, weights=(0.0,), form="linear", max_iterations=5, recenterings=1)
    r = optimize(specs["c3_fusion_spec"], cfg)
    assert r.feasible is (r.fidelity >= 1 - 1e-6)
    if not r.feasible:
        assert not check_result(r, specs["c3_fusion_spec"])


@pytest.mark.parametrize(
    "kwargs",
    [dict(restarts=0), dict(tolerance=0.0), dict(weights=()), dict(form="cubic"), dict(threads=0)],
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        OptimizerConfig(**kwargs)


def test_ancilla_modes_override(specs):
    r = optimize(specs["cz1_spec"], OptimizerConfig(restarts=1, seed=0, ancilla_modes=1))
    assert r.params.num_modes == 5
