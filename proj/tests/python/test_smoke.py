import math

import pytest

import gcltlab


def test_example52_bounds():
    s = gcltlab.example52_set()
    assert len(s) == 2
    assert gcltlab.mean_interval(s) == (0.0, 1.0)
    lo, hi = gcltlab.variance_bounds(s)
    assert lo == 0.0
    assert hi == pytest.approx(0.25, abs=1e-12)


def test_custom_set_and_callable_payoff():
    s = gcltlab.MeasureSet([[(0.0, 0.5), (1.0, 0.5)], [(2.0, 1.0)]])
    assert gcltlab.upper_expect(s, lambda x: x * x) == 4.0
    assert gcltlab.upper_expect(s, "square") == 4.0
    assert s.extremes[1] == [(2.0, 1.0)]


def test_sup_expect_sum_matches_rademacher_binomial():
    value = gcltlab.sup_expect_sum(gcltlab.example53_set(1), 9, "one_minus_abs", 1 / 3)
    exact = sum(math.comb(9, b) / 512 * (1 - abs(2 * b - 9) / 3) for b in range(10))
    assert value == pytest.approx(exact, abs=1e-12)


def test_g_expect_and_quadrature_agree_for_degenerate_theta():
    pde = gcltlab.g_expect("tent", (0.25, 0.25))
    assert pde == pytest.approx(gcltlab.normal_expect("tent", 0.25), abs=1e-3)
    assert gcltlab.g_expect(lambda x: x * x, (1.0, 4.0)) == pytest.approx(4.0, abs=1e-6)


def test_capacity_bracket_contains_normal_probability():
    lo, hi = gcltlab.capacity_interval(-1.0, 1.0, (0.25, 0.25), 0.01)
    assert lo <= 0.9544997361036416 <= hi


def test_clt_rows():
    rows = gcltlab.clt_converge(gcltlab.example51_set(), "tent", [64], M=1)
    assert rows[0]["n"] == 64
    assert rows[0]["abs_error"] < 0.02


def test_errors_map_to_python_exceptions():
    with pytest.raises(gcltlab.ValidationError):
        gcltlab.g_expect("tent", (1.0, 0.5))
    with pytest.raises(ValueError):
        gcltlab.g_expect("no_such_payoff", (0.25, 0.25))
    with pytest.raises(gcltlab.GuardError):
        gcltlab.sup_expect_sum(gcltlab.MeasureSet([[(math.sqrt(2), 1.0)], [(0.0, 1.0)]]), 2, "identity", 1.0)


def test_run_cli_exit_codes():
    code, out, _ = gcltlab.run_cli(["capacity", "a=-1", "b=1", "eps=0.05", "theta=1,1"])
    assert code == 0
    assert out.splitlines()[0].startswith("experiment,a,b")
    code, _, err = gcltlab.run_cli(["gheat", "theta=1,0.5"])
    assert code == 2
    assert "theta" in err
