import math

import numpy as np
import pytest

import circlelab as cl
from circlelab.contraction import _orbits, sample_map_sequence


HALF = cl.MoebiusMap(2**-0.5, 0, 0, 2**0.5)  # chart map x -> x/2


def test_identity_sequence_constant_diameters():
    d = cl.track_interval([cl.identity_map()] * 25, 0.3, 0.01)
    assert np.allclose(d, d[0], atol=1e-15)


def test_linear_contraction_near_halving():
    d = cl.track_interval([HALF] * 20, 0.0, 0.01)
    expected = d[0] * 2.0 ** -np.arange(21)
    assert np.max(np.abs(d / expected - 1.0)) < 1e-3


def test_random_proximal_trajectories_contract(proximal_four):
    neg = 0
    for i in range(100):
        maps, _ = sample_map_sequence(proximal_four, 0.29, 400, cl.derive_seed(9, i))
        d = cl.track_interval(maps, 0.29, 5e-4)
        mask = d > 0
        slope = np.polyfit(np.arange(d.size)[mask], np.log(d[mask]), 1)[0]
        neg += slope < 0
    assert neg == 100


def test_track_interval_requires_proper_arc():
    with pytest.raises(ValueError, match="proper arc"):
        cl.track_interval([HALF], 0.0, 0.3)


def test_fit_exact_exponential():
    d0 = 0.02
    d = d0 * np.exp(-math.log(2.0) * np.arange(40))
    alpha, C = cl.fit_contraction(d)
    assert alpha == pytest.approx(math.log(2.0), abs=1e-9)
    assert C == pytest.approx(1.0, abs=1e-9)


def test_fit_constant_sequence():
    alpha, _ = cl.fit_contraction(np.full(50, 0.01))
    assert alpha == pytest.approx(0.0, abs=1e-12)


def test_fit_noisy_exponential():
    # regression-error oracle: slope SE = sigma/sqrt(sum (n-nbar)^2) ~ 1.2e-4,
    # so 0.05 is a >100 sigma envelope at length 200
    rng = np.random.default_rng(4)
    truth = 0.3
    n = np.arange(200)
    d = 0.01 * np.exp(-truth * n) * np.exp(0.1 * rng.choice([-1.0, 1.0], size=200))
    alpha, _ = cl.fit_contraction(d)
    sigma_slope = 0.1 / math.sqrt(np.sum((n - n.mean()) ** 2))
    assert sigma_slope < 0.05
    assert abs(alpha - truth) < 0.05


def test_fit_rejects_nonpositive():
    with pytest.raises(ValueError, match="positive"):
        cl.fit_contraction(np.array([0.1] * 9 + [0.0, 0.1]))
    with pytest.raises(ValueError, match="at least 10"):
        cl.fit_contraction(np.array([0.1, 0.05]))


def test_verify_rejects_identity():
    cert = cl.verify_contraction_lemma([cl.identity_map()] * 50, 0.3, 0.5, 0.01)
    assert not cert.valid
    assert cert.reason == "nonnegative exponent"


def test_verify_linear_contraction():
    cert = cl.verify_contraction_lemma([HALF] * 2000, 0.0, 0.5, 0.01)
    assert cert.valid
    assert cert.C <= 1.0 + 1e-6
    assert cert.lambda_hat == pytest.approx(-math.log(2.0), abs=1e-12)
    assert cl.certificate_bound_holds(cert)


def test_certificate_soundness_recheck(proximal_four):
    # independent re-check of the inequality from the stored trace
    for i in range(20):
        maps, _ = sample_map_sequence(proximal_four, 0.29, 2000, cl.derive_seed(31, i))
        cert = cl.verify_contraction_lemma(maps, 0.29, 0.2, 5e-4)
        if cert.valid:
            assert cl.certificate_bound_holds(cert)


def test_interval_point_consistency(proximal_four):
    # x0's orbit stays inside the tracked interval images
    maps, _ = sample_map_sequence(proximal_four, 0.29, 500, cl.derive_seed(77, 0))
    hw = 5e-4
    orbits = _orbits(maps, [0.29 - hw, 0.29, 0.29 + hw])
    lo, mid, hi = orbits
    pos = np.mod(mid - lo, 1.0)
    length = np.mod(hi - lo, 1.0)
    assert np.all(pos <= length + 1e-15)


def test_verify_invalid_records_first_violation():
    # alpha_target just below |lambda| leaves almost no distortion slack, and
    # a wide interval contracts measurably slower than the point derivative:
    # d_1 = 2*atan(tan(pi*0.2)/2)/pi = 0.2219 > e^{-0.69} * 0.4 = 0.2006
    cert = cl.verify_contraction_lemma([HALF] * 50, 0.0, 0.69, 0.2)
    assert not cert.valid
    assert cert.reason == "diameter bound violated"
    assert cert.violation_step == 1
    assert not cl.certificate_bound_holds(cert)


def test_proximal_certificates_success_rate(proximal_four):
    ok = 0
    for i in range(50):
        maps, _ = sample_map_sequence(proximal_four, 0.29, 3000, cl.derive_seed(1234, i))
        cert = cl.verify_contraction_lemma(maps, 0.29, 0.4297 / 2.0, 5e-4)
        ok += cert.valid
    assert ok >= 48


def test_certificate_json_round_trip(tmp_path):
    from circlelab.contraction import write_certificates_json

    cert = cl.verify_contraction_lemma([HALF] * 100, 0.0, 0.5, 0.01)
    path = tmp_path / "certs.json"
    write_certificates_json([cert], path)
    import json

    rows = json.loads(path.read_text())
    assert rows[0]["valid"] is True
    assert len(rows[0]["diameters"]) == 101
    assert rows[0]["alpha"] == 0.5


def test_track_interval_accepts_system(proximal_four):
    d_sys = cl.track_interval(proximal_four, 0.29, 5e-4, n=300, seed=cl.derive_seed(9, 0))
    maps, _ = sample_map_sequence(proximal_four, 0.29, 300, cl.derive_seed(9, 0))
    d_seq = cl.track_interval(maps, 0.29, 5e-4)
    assert np.array_equal(d_sys, d_seq)
    with pytest.raises(ValueError, match="requires n and seed"):
        cl.track_interval(proximal_four, 0.29, 5e-4)
