import math

import numpy as np
import pytest
from scipy.optimize import brentq

from switchgrowth.classify import (DEGENERATE_TOL, Kind, SlopeCertificate, StabilityCertificate,
                                   classify, coupling_closed_form, jordan_coupling,
                                   rotation_power_sum, stability_certificate,
                                   word_growth_coefficient)
from switchgrowth.core import (AffineTriangularMatrix, RationalAngle, SystemParams,
                               build_generators, rotation)
from switchgrowth.growth import brute_force, growth_series


def _odd_angles(q_max):
    return [RationalAngle(p, q) for q in range(1, q_max + 1) for p in range(1, 2 * q, 2)
            if math.gcd(p, q) == 1]


def _even_angles(q_max):
    return [RationalAngle(p, q) for q in range(2, q_max + 1) for p in range(2, 2 * q, 2)
            if math.gcd(p, q) == 1]


def _dense_coupling(params, q):
    a0, a1 = (m.to_matrix() for m in build_generators(params))
    return (a0 @ np.linalg.matrix_power(a1, q))[1, 2]


def test_rotation_sum_examples():
    assert np.allclose(rotation_power_sum(math.pi, 0.0, 1).direct, (1, 0))
    assert np.allclose(rotation_power_sum(math.pi / 3, math.pi / 6, 3).direct, (0, 2), atol=1e-15)
    for phi in np.linspace(0, 6, 7):
        assert np.allclose(rotation_power_sum(2 * math.pi / 3, phi, 3).direct, 0, atol=1e-14)


def test_rotation_sum_closed_form_only_for_odd_multiples():
    assert rotation_power_sum(2 * math.pi / 3, 0.3, 3).closed_form is None
    s = rotation_power_sum(3 * math.pi / 5, 0.3, 5)
    assert s.closed_form is not None and s.discrepancy <= 1e-12


def test_rotation_sum_closed_form_small_q(rng):
    for angle in _odd_angles(12):
        for phi in rng.uniform(0, 2 * math.pi, 10):
            s = rotation_power_sum(angle, phi, angle.q)
            assert s.discrepancy <= 1e-10


def test_coupling_at_pi(pi_params):
    c = jordan_coupling(pi_params)
    assert c.coupling == pytest.approx(1.0, abs=1e-14)
    assert c.slope_lower_bound == pytest.approx(0.5, abs=1e-14)
    assert c.power_check_ok and abs(c.power_ratio - 1) <= 0.01
    assert not c.degenerate


def test_coupling_matches_dense_product(rng):
    for angle in _odd_angles(9):
        params = SystemParams(rng.uniform(-0.9, 0.9), 0.0, *rng.uniform(-2, 2, 2),
                              r=rng.uniform(0, 2), phi=rng.uniform(0, 6), angle=angle)
        c = jordan_coupling(params)
        assert c.coupling == pytest.approx(_dense_coupling(params, angle.q), abs=1e-10)
        assert c.coupling == pytest.approx(coupling_closed_form(params), abs=1e-10)


def test_power_check_tracks_coupling(rng):
    for angle in _odd_angles(5):
        params = SystemParams(0.3, 0.0, 0.5, 1.5, r=0.7, phi=1.1, angle=angle)
        c = jordan_coupling(params)
        assert abs(c.power_ratio - abs(c.coupling)) <= 0.01 * abs(c.coupling)


def test_degenerate_b_at_quarter_turn():
    angle = RationalAngle(1, 2)

    def entry(b):
        return _dense_coupling(SystemParams(0.0, 0.0, 0.0, b, r=1.0, phi=0.0, angle=angle), 2)

    b_star = brentq(entry, -5, 5, xtol=1e-15)
    params = SystemParams(0.0, 0.0, 0.0, b_star, r=1.0, phi=0.0, angle=angle)
    c = jordan_coupling(params)
    assert abs(c.coupling) < DEGENERATE_TOL and c.degenerate
    assert classify(params).kind is Kind.DEGENERATE_ODD_P


def test_kappa_for_two_thirds():
    params = SystemParams.from_rational(0.0, 2, 3)
    cert = stability_certificate(params)
    p = np.diag([0.0, -1.0])
    oracle = 1 - max(np.linalg.norm(p @ rotation(t * params.theta) @ p, 2) for t in (1, 2))
    assert cert.kappa == pytest.approx(0.5, abs=1e-10)
    assert cert.kappa == pytest.approx(oracle, abs=1e-12)


def test_certificate_bound_chain(rng):
    for angle in _even_angles(9):
        params = SystemParams(rng.uniform(-0.9, 0.9), 0.0, *rng.uniform(-2, 2, 2), r=1.3,
                              phi=0.2, angle=angle)
        c = stability_certificate(params)
        assert 0 < c.kappa <= 1 and c.C1 >= 1
        assert c.C2 == 1 + 2 * c.C1 ** 2 / c.kappa
        assert c.overall_bound == c.C1 ** 2 * c.C2


def test_a1_period_is_identity():
    for angle in _even_angles(30):
        params = SystemParams(0.0, 0.0, r=1.7, phi=0.4, angle=angle)
        _, a1 = build_generators(params)
        dense = np.linalg.matrix_power(a1.to_matrix(), angle.q)
        assert np.max(np.abs(dense - np.eye(3))) <= 1e-10


@pytest.mark.parametrize("p,q", [(2, 3), (4, 5)])
def test_brute_force_alpha_within_stability_bound(p, q, rng):
    for _ in range(10):
        params = SystemParams(rng.uniform(-0.9, 0.9), 0.0, *rng.uniform(-2, 2, 2),
                              r=rng.uniform(0, 2), phi=rng.uniform(0, 6), angle=RationalAngle(p, q))
        bound = stability_certificate(params).overall_bound
        for t in (1, 5, 10, 14):
            assert brute_force(params, t).alpha <= bound


def test_stability_certificate_rejects_odd_p():
    with pytest.raises(ValueError):
        stability_certificate(SystemParams.from_rational(0.0, 1, 3))
    with pytest.raises(ValueError):
        jordan_coupling(SystemParams.from_rational(0.0, 2, 3))


def test_classify_needs_exact_angle():
    with pytest.raises(ValueError):
        classify(SystemParams(0.0, 2.0))


def test_classify_examples(pi_params):
    assert classify(SystemParams.from_rational(0.0, 2, 3)).kind is Kind.MARGINALLY_STABLE_EVEN_P
    c = classify(pi_params)
    assert c.kind is Kind.MARGINALLY_UNSTABLE_LINEAR_ODD_P
    assert isinstance(c.certificate, SlopeCertificate) and c.certificate.coupling > 0
    assert "MarginallyUnstableLinearOddP" in c.summary()
    d = c.to_dict()
    assert d["p"] == 1 and d["certificate"]["coupling"] == pytest.approx(1.0)


def test_classification_invariants(rng):
    for angle in _odd_angles(7) + _even_angles(7):
        params = SystemParams(0.4, 0.0, *rng.uniform(-2, 2, 2), r=1.0, phi=0.3, angle=angle)
        c = classify(params)
        if c.kind is Kind.MARGINALLY_UNSTABLE_LINEAR_ODD_P:
            assert isinstance(c.certificate, SlopeCertificate) and abs(c.certificate.coupling) > 0
        elif c.kind is Kind.MARGINALLY_STABLE_EVEN_P:
            assert isinstance(c.certificate, StabilityCertificate) and c.certificate.kappa > 0


def test_word_growth_coefficient_examples(pi_params):
    assert word_growth_coefficient(AffineTriangularMatrix.identity()) == 0.0
    assert word_growth_coefficient(AffineTriangularMatrix(np.eye(2), [3.0, 0.0])) == pytest.approx(3.0)
    a0, a1 = build_generators(pi_params)
    assert word_growth_coefficient(a0 @ a1) == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(ValueError):
        word_growth_coefficient(AffineTriangularMatrix(2 * np.eye(2), [0, 0]))


def test_spectral_radius_one_surrogate(rng):
    for _ in range(3):
        params = SystemParams(rng.uniform(-0.9, 0.9), rng.uniform(0.1, 6.2), *rng.uniform(-2, 2, 2),
                              r=1.0, phi=rng.uniform(0, 6))
        s = growth_series(params, 1000)
        assert np.all(s.alpha_lo >= 1)
        assert np.all(s.alpha_hi <= 1 + s.t * params.u_max + s.eps + 1e-9)
        root = s.alpha_hi[-1] ** (1 / 1000)
        assert 1 <= root < 1.01


def test_odd_p_growth_reaches_slope_bound():
    for p, q in [(1, 1), (3, 4), (1, 3)]:
        params = SystemParams(0.2, 0.0, 0.3, 1.0, r=1.0, phi=0.5, angle=RationalAngle(p, q))
        cert = jordan_coupling(params)
        s = growth_series(params, 10_000)
        assert s.beta[-1] / 10_000 >= cert.slope_lower_bound - 1e-6
