import math

import numpy as np
import pytest

import circlelab as cl
from circlelab.lyapunov import _wilson_interval


def test_estimate_invariants():
    with pytest.raises(ValueError):
        cl.LyapunovEstimate(0.0, -1.0, 10, 100, "trajectory")
    with pytest.raises(ValueError):
        cl.LyapunovEstimate(0.0, 0.0, 1, 100, "trajectory")


def test_rotations_estimate_exactly_zero(rotation_pair):
    est = cl.estimate_lyapunov_trajectory(rotation_pair, 0.2, 500, 8, 0)
    assert est.value == 0.0
    assert est.std_error == 0.0


def test_single_map_at_attracting_fixed_point():
    m = cl.MoebiusMap(2**0.5, 0, 0, 2**-0.5)  # attracts theta=1/2 (derivative 1/2)
    sys1 = cl.GeneratorSystem((m,), cl.ConstantWeights((1.0,)))
    est = cl.estimate_lyapunov_trajectory(sys1, 0.5, 1000, 4, 3)
    assert est.value == pytest.approx(-math.log(2.0), abs=1e-9)
    assert est.std_error <= 1e-12


def test_formula_rotation_uniform_zero(rotation_pair):
    assert abs(cl.lyapunov_from_formula(rotation_pair, cl.uniform_measure(512))) <= 1e-12


def test_formula_dirac_at_attractor():
    m = cl.MoebiusMap(2, 0, 0, 0.5)  # attracts theta=1/2, derivative 1/4 there
    sys1 = cl.GeneratorSystem((m,), cl.ConstantWeights((1.0,)))
    d = cl.dirac_measure(512, 0.5)
    assert cl.lyapunov_from_formula(sys1, d) == pytest.approx(math.log(0.25), abs=1e-4)


def test_trajectory_formula_agreement(proximal_four):
    stat, _ = cl.stationary_measure(proximal_four, bins=512)
    lam_f = cl.lyapunov_from_formula(proximal_four, stat)
    qb = cl.formula_quadrature_bound(proximal_four, stat)
    est = cl.estimate_lyapunov_trajectory(proximal_four, 0.17, 10_000, 50, 2024)
    assert abs(est.value - lam_f) <= 3.0 * (est.std_error + qb)


def test_conjugation_covariance(proximal_four):
    R0 = cl.rotation(0.123)
    conj = cl.GeneratorSystem(
        tuple(cl.compose(cl.compose(R0, g), cl.invert(R0)) for g in proximal_four.generators),
        proximal_four.weighting,
    )
    a = cl.estimate_lyapunov_trajectory(proximal_four, 0.17, 10_000, 50, 77)
    b = cl.estimate_lyapunov_trajectory(conj, 0.17, 10_000, 50, 78)
    assert abs(a.value - b.value) <= 3.0 * (a.std_error + b.std_error)


def test_dichotomy_rotation_pair(rotation_pair):
    verdict = cl.classify_dichotomy(rotation_pair, cl.DichotomyParams(master_seed=42))
    assert verdict.verdict == "InvariantMeasure"
    assert np.all(verdict.invariance_residuals < 1e-3)
    assert verdict.symmetry.is_symmetric


def test_dichotomy_proximal_negative_branch(proximal_four):
    params = cl.DichotomyParams(master_seed=42, ue_steps=200_000, horizon=5_000, n_paths=40)
    verdict = cl.classify_dichotomy(proximal_four, params)
    assert verdict.verdict == "NegativeExponentUniquelyErgodic"
    est = verdict.lyapunov
    assert est.value + 3.0 * est.std_error < 0.0
    assert verdict.ue_spread < params.ue_spread_tol
    assert verdict.stationary_empirical_w1 < params.stat_emp_tol
    assert verdict.invariant_measure is None


def test_dichotomy_single_ns_inconclusive(ns_map):
    # start pinned at the repelling fixed point: positive exponent estimate
    sys1 = cl.GeneratorSystem((ns_map,), cl.ConstantWeights((1.0,)))
    params = cl.DichotomyParams(master_seed=7, start=0.0, ue_steps=50_000, horizon=1_000, n_paths=10)
    verdict = cl.classify_dichotomy(sys1, params)
    assert verdict.verdict == "NonSymmetricInconclusive"
    assert not verdict.symmetry.is_symmetric
    assert verdict.lyapunov.value >= 0.0


def test_dichotomy_verdicts_mutually_exclusive(rotation_pair, proximal_four):
    # the two positive verdicts arise from disjoint branches of the pipeline
    v1 = cl.classify_dichotomy(rotation_pair, cl.DichotomyParams(master_seed=1))
    assert v1.verdict == "InvariantMeasure" and v1.lyapunov is None
    params = cl.DichotomyParams(master_seed=1, ue_steps=100_000, horizon=2_000, n_paths=20)
    v2 = cl.classify_dichotomy(proximal_four, params)
    assert v2.verdict != "InvariantMeasure"


def test_basin_two_attractors(basin_system):
    est = cl.estimate_basin_probabilities(
        basin_system, [0.0, 0.5], start=0.01, horizon=3000, n_paths=2000,
        capture_radius=0.05, master_seed=2718,
    )
    p = est.probabilities
    assert p[0] > p[1]
    assert abs(p.sum() + est.unresolved - 1.0) <= 1e-12
    assert est.unresolved < 0.05
    assert np.all(est.ci_low <= p) and np.all(p <= est.ci_high)


def test_basin_start_at_invariant_point(basin_system):
    est = cl.estimate_basin_probabilities(
        basin_system, [0.0, 0.5], start=0.0, horizon=500, n_paths=200,
        capture_radius=0.05, master_seed=1,
    )
    assert est.probabilities[0] == 1.0
    assert est.unresolved == 0.0


def test_basin_harmonicity(basin_system):
    # p_j(x) = sum_i w_i p_j(g_i x) within 3 combined sigmas at probe points
    n_paths, horizon = 1500, 2500
    probes = [0.02, 0.1, 0.3, 0.6, 0.9]
    w = np.asarray(basin_system.weighting.probs)

    def p_and_se(x, seed):
        est = cl.estimate_basin_probabilities(
            basin_system, [0.0, 0.5], start=x, horizon=horizon, n_paths=n_paths,
            capture_radius=0.05, master_seed=seed,
        )
        p = est.probabilities
        se = np.sqrt(np.maximum(p * (1 - p), 1.0 / n_paths) / n_paths)
        return p, se

    for k, x in enumerate(probes):
        p_x, se_x = p_and_se(x, 1000 + k)
        mix = np.zeros(2)
        var = se_x**2
        for i, g in enumerate(basin_system.generators):
            p_i, se_i = p_and_se(cl.apply_map(g, x), 2000 + 10 * k + i)
            mix += w[i] * p_i
            var = var + (w[i] * se_i) ** 2
        resid = np.abs(p_x - mix)
        assert np.all(resid <= 3.0 * np.sqrt(var)), (x, resid, 3.0 * np.sqrt(var))


def test_basin_requires_attractors(basin_system):
    with pytest.raises(ValueError, match="attractors"):
        cl.estimate_basin_probabilities(basin_system, [], 0.1, 100, 10, 0.05, 0)


def test_wilson_interval_sane():
    lo, hi = _wilson_interval(50, 100)
    assert lo < 0.5 < hi
    lo0, hi0 = _wilson_interval(0, 100)
    assert lo0 == pytest.approx(0.0, abs=1e-12)
    assert hi0 < 0.05


def test_threads_do_not_change_results(proximal_four):
    a = cl.estimate_lyapunov_trajectory(proximal_four, 0.17, 1000, 16, 5, threads=1)
    b = cl.estimate_lyapunov_trajectory(proximal_four, 0.17, 1000, 16, 5, threads=4)
    assert a.value == b.value and a.std_error == b.std_error
