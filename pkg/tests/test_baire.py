import copy
import json
import math

import numpy as np
import pytest

from switchgrowth.baire import (E1, E2, UNIT_PAIRS, CertificateChain, ConstructionError,
                                GrowthTarget, OffsetGrowthFunctional, StageKind,
                                adaptive_lipschitz, construct, find_destabilizing_stage,
                                find_stabilizing_stage, lipschitz_bound, rational_anchors, verify)
from switchgrowth.classify import jordan_coupling
from switchgrowth.core import RationalAngle, SystemParams
from switchgrowth.growth import growth_series

TARGET = GrowthTarget.default()


@pytest.fixture(scope="module")
def chain1():
    return construct((2.0, 3.3), 1, TARGET)


def _beta(theta, t, u, v):
    return growth_series(SystemParams.from_offsets(0.0, theta, u, v), t, 0.0).beta[t]


def test_lipschitz_bound_closed_form():
    assert lipschitz_bound(1) == (1 + 1) ** 2
    assert lipschitz_bound(7, [((0, 0), (0, 0))]) == 7
    assert lipschitz_bound(3, [((3, 4), (0, 1))]) == 3 * (1 + 15) ** 2
    with pytest.raises(ValueError):
        lipschitz_bound(0)


def test_lipschitz_bounds_dominate_finite_differences(rng):
    for _ in range(100):
        t = int(rng.integers(1, 51))
        u, v = UNIT_PAIRS[rng.integers(4)]
        th = rng.uniform(0.2, 6.0)
        h = rng.uniform(1e-6, 1e-2)
        slope = abs(_beta(th + h, t, u, v) - _beta(th, t, u, v)) / h
        assert slope <= lipschitz_bound(t)
        s = growth_series(SystemParams.from_offsets(0.0, th + h / 2, u, v), t, 0.0)
        assert slope <= adaptive_lipschitz(s.beta, s.eps, t, h / 2, 1.0)


def test_adaptive_bound_never_exceeds_ceiling(rng):
    s = growth_series(SystemParams.from_offsets(0.0, 3.0, E2, E1), 200, 0.0)
    assert adaptive_lipschitz(s.beta, s.eps, 200, 10.0, 1.0) <= 200 * 199 / 2 * (1 + 1e-9) + 1e-12
    assert adaptive_lipschitz(s.beta, s.eps, 200, 0.0, 1.0) < lipschitz_bound(200)


def test_zero_offsets_have_zero_growth():
    assert _beta(2.0, 30, (0, 0), (0, 0)) == 0.0


def test_rational_anchor_enumeration():
    odd = list(rational_anchors((3.0, 3.3), parity=1, q_max=30))
    assert odd[0] == RationalAngle(1, 1)
    assert all(a.odd and 3.0 < a.value < 3.3 for a in odd)
    assert [a.q for a in odd] == sorted(a.q for a in odd)
    even = list(rational_anchors((2.0, 2.2), parity=0, q_max=10))
    assert even[0] == RationalAngle(2, 3)


def test_stabilizing_stage_two_thirds():
    st = find_stabilizing_stage((2.0, 2.2), 1, TARGET)
    assert st.anchor == RationalAngle(2, 3) and st.kind is StageKind.STABILIZING
    lo, hi = st.interval
    assert 2.0 < lo < st.anchor.value < hi < 2.2
    assert st.lipschitz * (hi - lo) < st.margin
    a = float(TARGET.a_at(st.time))
    for th in (lo, 0.5 * (lo + hi), hi):
        for u, v in UNIT_PAIRS:
            s = growth_series(SystemParams.from_offsets(0.0, th, u, v), st.time, 0.0)
            assert (s.beta[st.time] + s.eps[st.time]) / a < 1.0


def test_stabilizing_stage_accepts_linear_a():
    st = find_stabilizing_stage((2.0, 2.2), 1, GrowthTarget.parse("t", "t"))
    assert st.margin > 0


def test_zero_width_interval_rejected():
    with pytest.raises(ValueError):
        find_stabilizing_stage((2.0, 2.0), 1, TARGET)
    with pytest.raises(ValueError):
        find_destabilizing_stage((3.1, 3.1), 1, TARGET)


def test_destabilizing_stage_at_pi():
    s1 = find_destabilizing_stage((3.0, 3.3), 1, TARGET, E2, E1)
    assert s1.anchor == RationalAngle(1, 1)
    s2 = find_destabilizing_stage((3.0, 3.3), 2, TARGET, E2, E1)
    assert s2.time >= s1.time
    for st in (s1, s2):
        lo, hi = st.interval
        b = float(TARGET.b_at(st.time))
        for th in (lo, 0.5 * (lo + hi), hi):
            assert _beta(th, st.time, E2, E1) / b > st.rank


def test_destabilizing_stage_skips_degenerate_anchor():
    w, wp = (0.0, 0.0), (1.0, 0.0)
    params = SystemParams.from_offsets(0.0, math.pi, w, wp, angle=RationalAngle(1, 1))
    assert jordan_coupling(params).degenerate
    target = GrowthTarget.parse("1+log(t)", "t**0.25")
    st = find_destabilizing_stage((3.0, 3.3), 1, target, w, wp)
    assert st.anchor != RationalAngle(1, 1) and st.anchor.odd


def test_destabilizing_requires_nonzero_w_prime():
    with pytest.raises(ValueError):
        find_destabilizing_stage((3.0, 3.3), 1, TARGET, E2, (0.0, 0.0))


def test_depth_zero_chain():
    chain = construct((2.0, 3.3), 0)
    assert chain.stages == [] and chain.final_interval == (2.0, 3.3)
    assert verify(chain).ok


def test_depth_one_chain(chain1):
    assert [s.kind for s in chain1.stages] == [StageKind.STABILIZING, StageKind.DESTABILIZING]
    prev = chain1.initial_interval
    for st in chain1.stages:
        assert prev[0] < st.interval[0] < st.interval[1] < prev[1]
        prev = st.interval
    assert verify(chain1).ok


def test_chain_json_round_trip(chain1):
    doc = json.loads(json.dumps(chain1.to_dict("test")))
    assert set(doc) == {"version", "params", "initial_interval", "stages", "final_interval"}
    assert set(doc["stages"][0]) >= {"kind", "rank", "anchor", "time", "interval", "margin", "lipschitz"}
    back = CertificateChain.from_dict(doc)
    assert back.to_dict("test") == doc
    assert verify(back).ok


def test_tampered_chain_fails(chain1):
    doc = chain1.to_dict()
    widened = copy.deepcopy(doc)
    widened["stages"][1]["interval"][1] += 1e-4
    assert not verify(CertificateChain.from_dict(widened)).ok
    moved = copy.deepcopy(doc)
    moved["stages"][0]["time"] = 3
    assert not verify(CertificateChain.from_dict(moved)).ok
    final = copy.deepcopy(doc)
    final["final_interval"] = [2.0, 3.3]
    assert not verify(CertificateChain.from_dict(final)).ok


def test_depth_two_reports_partial_chain():
    with pytest.raises(ConstructionError) as info:
        construct((2.0, 3.3), 2)
    partial = info.value.chain
    assert len(partial.stages) == 2 and verify(partial).ok
    assert "rank 2" in str(info.value)


def test_offset_functional_homogeneous_and_subadditive(rng):
    f = OffsetGrowthFunctional(0.0, 2.5, 20)
    for _ in range(10):
        u, v, u2, v2 = rng.uniform(-2, 2, (4, 2))
        c = rng.uniform(0, 5)
        assert f(c * u, c * v) == pytest.approx(c * f(u, v), rel=1e-12, abs=1e-300)
        assert f(u + u2, v + v2) <= f(u, v) + f(u2, v2) + 1e-9


def test_growth_target_parse():
    g = GrowthTarget.parse("1+log(t)", "t/(1+log(t))")
    assert g.a_at(1.0) == 1.0 and g.b_at(1.0) == 1.0
    assert g.describe() == {"a": "1+log(t)", "b": "t/(1+log(t))"}
    assert np.allclose(g.a_at(np.array([1.0, math.e])), [1.0, 2.0])
