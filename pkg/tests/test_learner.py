import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polydensity.empirical import IntervalPartition, empirical_from_samples, make_rng
from polydensity.errors import InvalidParams, PreconditionViolated, TooLargeForOracle
from polydensity.learner import (
    LpOptions,
    build_block_lp,
    constant_tau_lower_bound,
    dp_bruteforce_oracle,
    dp_segment,
    find_single_polynomial,
    learn_mixture,
    learn_piecewise_poly,
    learn_wb_piecewise_poly,
    num_cells,
    sample_size,
)
from polydensity.lp import LpStatus, solve
from polydensity.poly import PiecewisePolynomial, cheb_antiderivative, cheb_eval, tv_distance_pp


def exact_masses(coeffs, u):
    """Masses of the density ``sum c_i T_i`` on cells with edges ``u`` in [-1, 1]."""
    F = cheb_eval(cheb_antiderivative(coeffs), u)
    return np.diff(F)


def random_density_coeffs(rng, d):
    c = np.zeros(d + 1)
    c[0] = 1.0
    if d:
        c[1:] = rng.uniform(-1, 1, d) / (2 * d)
    anti = cheb_antiderivative(c)
    return c / (cheb_eval(anti, 1.0) - cheb_eval(anti, -1.0))  # unit mass on [-1, 1]


# ---------------------------------------------------------------- sizes


def test_num_cells_multiple_of_d_plus_one():
    assert num_cells(1, 0, 0.1) == 40
    assert num_cells(1, 1, 0.1) == 80
    assert num_cells(2, 2, 0.1) % 3 == 0


def test_sample_size_formula():
    assert sample_size(1, 0, 0.1) == math.ceil(32 * math.log(40) / 0.01)


# ---------------------------------------------------------------- LP witness


@pytest.mark.parametrize("d", [0, 1, 2, 3])
@pytest.mark.parametrize("seed", range(3))
def test_exact_masses_are_feasible(d, seed):
    rng = np.random.default_rng(seed)
    eps = 0.1
    z = num_cells(1, d, eps)
    u = np.linspace(-1, 1, z + 1)
    e = exact_masses(random_density_coeffs(rng, d), u)
    lp = build_block_lp(u, e, d, eps, e.sum() / z)
    sol = solve(lp, method="highs")
    assert sol.status is LpStatus.Optimal
    assert sol.x[d + 2 + 2 * z] <= 1e-6


def test_in_house_simplex_on_block_lp():
    eps = 0.25
    u = np.linspace(-1, 1, 17)
    e = exact_masses([0.5, 0.2], u)
    lp = build_block_lp(u, e, 1, eps, e.sum() / 16, LpOptions(j_cap=20, k_cap=40))
    a, b = solve(lp), solve(lp, method="highs")
    assert a.ok and b.ok
    assert a.objective_value == pytest.approx(b.objective_value, abs=1e-7)


def test_find_single_polynomial_on_uniform_sample():
    x = make_rng(0).uniform(0, 1, 20_000)
    part = IntervalPartition(np.linspace(0, 1, 41))
    fit = find_single_polynomial(0, 0.1, 1 / 40, part, empirical_from_samples(x))
    assert fit.tau == 0.0
    assert fit.q.integral() == pytest.approx(1.0)


def test_precondition_violation():
    part = IntervalPartition(np.linspace(0, 1, 11))
    phat = empirical_from_samples(np.linspace(0, 1, 100, endpoint=False))
    with pytest.raises(PreconditionViolated):
        find_single_polynomial(0, 0.1, 0.5, part, phat)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_constant_lower_bound_below_lp(seed):
    rng = np.random.default_rng(seed)
    z = 40
    u = np.linspace(-1, 1, z + 1)
    e = rng.dirichlet(np.full(z, 5.0))
    lb = constant_tau_lower_bound(u, e, 0.1, 1 / z)
    sol = solve(build_block_lp(u, e, 0, 0.1, 1 / z), method="highs")
    assert sol.ok
    assert lb <= sol.objective_value + 1e-9


# ---------------------------------------------------------------- DP


def random_tau(rng, s):
    tau = np.where(rng.random((s + 1, s + 1)) < 0.3, 0.0, rng.integers(0, 5, (s + 1, s + 1)) / 4)
    return np.triu(tau, 1)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 8), st.integers(1, 5))
def test_dp_matches_bruteforce(seed, s, pieces):
    tau = random_tau(np.random.default_rng(seed), s)
    expect = dp_bruteforce_oracle(tau, pieces)
    for lazy in (True, False):
        assert dp_segment(tau, s, pieces, lazy=lazy).value == expect
    lb = lambda l, j: 0.5 * tau[l, j]  # noqa: E731
    assert dp_segment(tau, s, pieces, lower_bound=lb).value == expect


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 8))
def test_dp_lazy_and_full_agree_on_segmentation(seed, s):
    tau = random_tau(np.random.default_rng(seed), s)
    a = dp_segment(tau, s, 3, lazy=True)
    b = dp_segment(tau, s, 3, lazy=False)
    assert a.blocks == b.blocks
    blocks = a.blocks
    assert blocks[0][0] == 0 and blocks[-1][1] == s
    assert all(x[1] == y[0] for x, y in zip(blocks[:-1], blocks[1:]))
    assert sum(tau[l, j] for l, j in blocks) == a.value


def test_dp_cache_counts():
    tau = random_tau(np.random.default_rng(0), 6)
    cached = dp_segment(tau, 6, 3, lazy=False)
    assert cached.table.tau_evaluations == len(cached.table.taus)


def test_dp_bad_args():
    with pytest.raises(InvalidParams):
        dp_segment(np.zeros((2, 2)), 0, 1)


def test_oracle_limit():
    with pytest.raises(TooLargeForOracle):
        dp_bruteforce_oracle(np.zeros((16, 16)), 2)


def test_oracle_small_case():
    l, j = np.indices((4, 4))
    tau = np.where(j - l == 1, 1.0, 5.0)
    # three unit blocks beat any coarser segmentation
    assert dp_bruteforce_oracle(tau, 3) == 3.0
    assert dp_bruteforce_oracle(tau, 1) == 5.0


# ---------------------------------------------------------------- learners


def uniform_sampler(rng, n):
    return rng.uniform(0, 1, n)


def triangle_sampler(rng, n):
    return np.sqrt(rng.random(n))


def triangle_pp():
    return PiecewisePolynomial.from_coefficients([0.0, 1.0], [[0.5, 0.5]], True, True)


def test_uniform_learned_exactly():
    h = learn_piecewise_poly(uniform_sampler, 1, 0, 0.1, make_rng(0), domain=(0, 1))
    assert h.num_pieces == 1
    assert h(0.5) == pytest.approx(1.0, abs=1e-12)


def test_triangle_linear_fit():
    h = learn_piecewise_poly(triangle_sampler, 1, 1, 0.1, make_rng(1), domain=(0, 1))
    assert tv_distance_pp(h, triangle_pp()) < 0.1


def test_learner_is_deterministic():
    a = learn_piecewise_poly(triangle_sampler, 1, 1, 0.2, make_rng(4), domain=(0, 1))
    b = learn_piecewise_poly(triangle_sampler, 1, 1, 0.2, make_rng(4), domain=(0, 1))
    assert np.array_equal(a.breakpoints, b.breakpoints)
    assert all(np.array_equal(p.coeffs, q.coeffs) for p, q in zip(a.pieces, b.pieces))


def test_lazy_and_cache_do_not_change_output():
    def two_step(rng, n):
        return np.where(rng.random(n) < 0.7, rng.uniform(0, 0.5, n), rng.uniform(0.5, 1, n))

    outs = [
        learn_wb_piecewise_poly(two_step, 2, 0, 0.25, make_rng(3), domain=(0, 1), m=4000, lazy=lz, cache=c)
        for lz, c in [(True, True), (False, True), (True, False)]
    ]
    for h in outs[1:]:
        assert np.array_equal(h.breakpoints, outs[0].breakpoints)
        assert all(np.array_equal(p.coeffs, q.coeffs) for p, q in zip(h.pieces, outs[0].pieces))


def test_full_output_report():
    fit = learn_piecewise_poly(uniform_sampler, 1, 0, 0.2, make_rng(0), domain=(0, 1), full_output=True)
    rep = fit.report()
    assert rep["m"] == sample_size(1, 0, 0.2)
    assert rep["tau"] == 0.0
    assert "tau_table_summary" in rep


def test_atoms_removed():
    def with_atom(rng, n):
        x = rng.uniform(0, 1, n)
        x[rng.random(n) < 0.05] = 0.5
        return x

    fit = learn_piecewise_poly(with_atom, 1, 0, 0.1, make_rng(2), domain=(0, 1), full_output=True)
    assert fit.excluded == (0.5,)


def test_mixture_rejects_bad_k():
    with pytest.raises(InvalidParams):
        learn_mixture(uniform_sampler, 0, 1, 0, 0.1, make_rng(0))


def test_bad_epsilon():
    with pytest.raises(InvalidParams):
        learn_piecewise_poly(uniform_sampler, 1, 0, 0.7, make_rng(0))


def test_bruteforce_enumerates_all_segmentations():
    # independent recount with itertools for s = 5
    rng = np.random.default_rng(9)
    tau = random_tau(rng, 5)
    best = math.inf
    for r in range(0, 3):
        for cuts in itertools.combinations(range(1, 5), r):
            edges = (0,) + cuts + (5,)
            best = min(best, sum(tau[a, b] for a, b in zip(edges[:-1], edges[1:])))
    assert dp_bruteforce_oracle(tau, 3) == best
