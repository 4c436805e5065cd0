import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polydensity.errors import InvalidParams, NotLogConcaveDetected
from polydensity.poly import PiecewisePolynomial, tv_distance_density, tv_distance_pp
from polydensity.zoo import (
    TARGET_KINDS,
    approximate_gaussian,
    decompose_log_concave,
    find_mode,
    gaussian_degree,
    hard_instance_pp,
    make_target,
    target_from_spec,
)

SIMPLE = {
    "uniform": {},
    "triangle": {},
    "truncated_gaussian": {"mu": 0.1, "sigma": 0.4},
    "gaussian_mixture": {"components": [[0.5, -0.4, 0.2], [0.5, 0.4, 0.2]]},
    "truncated_laplace": {"b": 0.3},
    "half_circle": {},
    "truncated_exponential": {"rate": 3.0},
    "convex_decreasing": {},
    "k_monotone_power": {},
}


@pytest.mark.parametrize("kind", sorted(SIMPLE))
def test_targets_are_normalized(kind):
    f = make_target(kind, SIMPLE[kind])
    lo, hi = f.domain
    assert float(f.cdf(hi)) == pytest.approx(1.0, abs=1e-8)
    assert float(f.cdf(lo)) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("kind", sorted(SIMPLE))
def test_sampler_matches_cdf(kind):
    f = make_target(kind, SIMPLE[kind])
    x = np.sort(f.sampler(np.random.default_rng(0), 20_000))
    lo, hi = f.domain
    assert x.min() >= lo and x.max() < hi
    ecdf = np.arange(1, x.size + 1) / x.size
    assert np.max(np.abs(ecdf - f.cdf(x))) < 0.02


def test_kind_list_is_complete():
    assert set(SIMPLE) | {"atom_mixture", "piecewise_poly", "histogram", "piecewise_linear", "hard_instance"} == set(
        TARGET_KINDS
    )


def test_closed_form_values():
    assert float(make_target("triangle").density(0.0)) == pytest.approx(0.5)
    assert float(make_target("truncated_gaussian", {"sigma": 1.0}, None).cdf(0.0)) == pytest.approx(0.5)


def test_unknown_kind():
    with pytest.raises(InvalidParams):
        make_target("cauchy")


def test_unbounded_needs_permission():
    with pytest.raises(InvalidParams):
        make_target("half_circle", {}, None)


def test_atom_mixture():
    f = target_from_spec(
        {"kind": "atom_mixture", "params": {"base": {"kind": "uniform"}, "atoms": [[0.25, 0.05]]}}
    )
    x = f.sampler(np.random.default_rng(1), 100_000)
    assert np.mean(x == 0.25) == pytest.approx(0.05, abs=0.005)
    assert float(f.cdf(1.0)) == pytest.approx(1.0)
    assert f.atoms == ((0.25, 0.05),)


def test_histogram_target_tv_is_exact():
    f = make_target("histogram", {"breakpoints": [0, 0.5, 1], "heights": [1.4, 0.6]})
    u = PiecewisePolynomial.constant(0.0, 1.0, is_distribution=True)
    assert tv_distance_density(u, f) == pytest.approx(0.2, abs=1e-7)
    assert tv_distance_pp(u, f.pp) == pytest.approx(0.2, abs=1e-12)


# ---------------------------------------------------------------- hard instances


def test_hard_instance_heights():
    p = hard_instance_pp(1, 0.1, [1])
    assert p(0.5) == pytest.approx(0.05 + 0.45 * 1.1)
    assert p(1.5) == pytest.approx(0.05 + 0.45 * 0.9)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.floats(0.01, 0.49), st.data())
def test_adjacent_hard_instances(k, eps, data):
    b = np.array(data.draw(st.lists(st.sampled_from([-1, 1]), min_size=k, max_size=k)))
    i = data.draw(st.integers(0, k - 1))
    b2 = b.copy()
    b2[i] *= -1
    tv = tv_distance_pp(hard_instance_pp(k, eps, b), hard_instance_pp(k, eps, b2))
    assert tv == pytest.approx(0.9 * eps / k, abs=1e-12)


# ---------------------------------------------------------------- log-concave


def test_find_mode():
    assert find_mode(lambda x: np.exp(-((x - 0.3) ** 2)), -1, 1) == pytest.approx(0.3, abs=1e-6)


@pytest.mark.parametrize(
    "spec",
    [
        {"kind": "truncated_gaussian", "params": {"sigma": 1.0}, "truncation": [0, None]},
        {"kind": "truncated_exponential", "params": {"rate": 1.0}, "truncation": [0, None]},
    ],
)
def test_log_concave_piece_growth(spec):
    f = target_from_spec(spec)
    counts = []
    for eps in (0.04, 0.01):
        h = decompose_log_concave(f, eps)
        assert h.num_pieces <= 8 * eps**-0.5 * math.log(1 / eps)
        assert tv_distance_density(h, f) <= 5 * eps
        counts.append(h.num_pieces)
    assert counts[1] > counts[0]


def test_uniform_is_one_piece():
    h = decompose_log_concave(make_target("uniform"), 0.05)
    assert h.num_pieces == 1


def test_convex_power_law_rejected():
    with pytest.raises(NotLogConcaveDetected):
        decompose_log_concave(make_target("convex_decreasing"), 0.05)


# ---------------------------------------------------------------- Gaussian


def test_gaussian_degree_multiple_of_four():
    for eps in (0.2, 0.1, 1e-3, 1e-6):
        assert gaussian_degree(eps) % 4 == 0


def test_gaussian_three_pieces():
    f = make_target("truncated_gaussian", {"mu": 0.0, "sigma": 1.0}, None)
    h = approximate_gaussian(0.0, 1.0, 1e-3)
    assert h.num_pieces == 3
    assert tv_distance_density(h, f) <= 1e-3


def test_gaussian_tv_decreases_with_degree():
    f = make_target("truncated_gaussian", {"mu": 0.0, "sigma": 1.0}, None)
    tvs = [tv_distance_density(approximate_gaussian(0.0, 1.0, 0.1, degree=d), f) for d in (8, 12, 16, 24)]
    assert all(a > b for a, b in zip(tvs[:-1], tvs[1:]))


def test_gaussian_rejects_odd_degree():
    with pytest.raises(InvalidParams):
        approximate_gaussian(0.0, 1.0, 0.1, degree=6)
