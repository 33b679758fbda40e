import math

import numpy as np
import pytest

import circlelab as cl
from circlelab.trajectory import (
    arc_indicator,
    cocycle_identity_holds,
    derive_seed,
    distance_to,
    fourier_sin,
    observable_from_config,
    verify_record,
    write_trajectory_csv,
)

from conftest import ALPHA_SILVER


def test_rotations_only_cocycle_exactly_zero(rotation_pair):
    traj = cl.simulate_trajectory(rotation_pair, 0.1, 5000, 7)
    assert np.all(traj.cocycle == 0.0)


def test_fixed_point_cocycle_grows_log2():
    m = cl.MoebiusMap(2**0.5, 0, 0, 2**-0.5)  # derivative 2 at its chart fixed point 0
    sys1 = cl.GeneratorSystem((m,), cl.ConstantWeights((1.0,)))
    traj = cl.simulate_trajectory(sys1, 0.0, 1000, 1)
    assert np.allclose(traj.points, 0.0, atol=1e-15)
    n = np.arange(1001)
    assert np.allclose(traj.cocycle, n * math.log(2.0), atol=1e-9)


def test_cocycle_identity_exact_all_splits(proximal_four):
    traj = cl.simulate_trajectory(proximal_four, 0.3, 200, 99)
    for m in range(0, 201, 7):
        for n in range(0, 201 - m, 11):
            assert cocycle_identity_holds(traj, m, n)
    # the spec's example split
    assert cocycle_identity_holds(traj, 4, 6)


def test_shifted_record_rebased(proximal_four):
    traj = cl.simulate_trajectory(proximal_four, 0.3, 500, 13)
    sh = traj.shift(123)
    assert sh.cocycle[0] == 0.0
    assert np.array_equal(sh.points, traj.points[123:])
    assert np.array_equal(sh.indices, traj.indices[123:])
    # fresh re-summation agrees with the parent up to rounding
    assert np.max(np.abs(sh.cocycle - (traj.cocycle[123:] - traj.cocycle[123]))) < 1e-12


def test_record_points_consistent(proximal_four):
    traj = cl.simulate_trajectory(proximal_four, 0.42, 5000, 21)
    assert verify_record(traj, proximal_four, tol=1e-12) <= 1e-12


def test_determinism_bit_identical(proximal_four):
    a = cl.simulate_trajectory(proximal_four, 0.42, 2000, 1234)
    b = cl.simulate_trajectory(proximal_four, 0.42, 2000, 1234)
    assert np.array_equal(a.points, b.points)
    assert np.array_equal(a.indices, b.indices)
    assert np.array_equal(a.cocycle, b.cocycle)


def test_birkhoff_constant_observable(proximal_four):
    traj = cl.simulate_trajectory(proximal_four, 0.42, 100, 3)
    assert cl.birkhoff_average(traj, lambda t: np.ones_like(np.asarray(t))) == 1.0


def test_birkhoff_weyl_equidistribution():
    # direct partial-sum oracle: sum of sin(2 pi (t0 + j a)) via geometric sum
    sys_rot = cl.GeneratorSystem((cl.rotation(ALPHA_SILVER),), cl.ConstantWeights((1.0,)))
    n = 1_000_000
    t0 = 0.1
    traj = cl.simulate_trajectory(sys_rot, t0, n, 0)
    avg = cl.birkhoff_average(traj, fourier_sin(1))
    z = np.exp(2j * np.pi * ALPHA_SILVER)
    oracle = np.imag(np.exp(2j * np.pi * (t0 + ALPHA_SILVER)) * (z**n - 1.0) / (z - 1.0)) / n
    assert abs(avg - oracle) < 1e-9
    assert abs(avg) < 1e-3


def test_birkhoff_trapped_at_common_fixed_point(basin_system):
    traj = cl.simulate_trajectory(basin_system, 0.0, 500, 5)  # both maps fix 0
    f = distance_to(0.25)
    assert cl.birkhoff_average(traj, f) == pytest.approx(0.25, abs=1e-12)


def test_empirical_measure_dirac(basin_system):
    traj = cl.simulate_trajectory(basin_system, 0.0, 100, 5)
    m = cl.empirical_measure(traj, 64)
    assert m.mass[0] == 1.0


def test_empirical_measure_rotation_near_uniform():
    sys_rot = cl.GeneratorSystem((cl.rotation(ALPHA_SILVER),), cl.ConstantWeights((1.0,)))
    traj = cl.simulate_trajectory(sys_rot, 0.0, 1_000_000, 0)
    emp = cl.empirical_measure(traj, 256)
    assert cl.measure_distance(emp, cl.uniform_measure(256)) < 0.005


def test_empirical_measure_mass_sums_to_one(proximal_four):
    traj = cl.simulate_trajectory(proximal_four, 0.9, 777, 8)
    m = cl.empirical_measure(traj, 100)
    assert abs(m.mass.sum() - 1.0) <= 1e-12


def test_observables():
    arc = arc_indicator(0.9, 0.1)  # wraps through 0
    assert arc(0.95) == 1.0 and arc(0.05) == 1.0 and arc(0.5) == 0.0
    f = observable_from_config({"fourier_cos": 2})
    assert f(0.0) == 1.0
    with pytest.raises(ValueError, match="observable"):
        observable_from_config({"nope": 1})


def test_derive_seed_spreads():
    seeds = {derive_seed(42, i) for i in range(1000)}
    assert len(seeds) == 1000
    assert derive_seed(42, 0) != derive_seed(43, 0)


def test_trajectory_csv(tmp_path, proximal_four):
    traj = cl.simulate_trajectory(proximal_four, 0.1, 10, 2)
    path = tmp_path / "traj.csv"
    write_trajectory_csv(traj, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "step,index,theta,cocycle"
    assert len(lines) == 12
    step, idx, theta, coc = lines[1].split(",")
    assert (step, idx) == ("0", str(int(traj.indices[0])))
    assert float(coc) == 0.0


def test_zero_step_trajectory(proximal_four):
    traj = cl.simulate_trajectory(proximal_four, 0.5, 0, 0)
    assert traj.n == 0
    assert traj.points.shape == (1,)
    with pytest.raises(ValueError):
        cl.birkhoff_average(traj, lambda t: t)
