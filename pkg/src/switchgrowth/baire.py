"""Nested-interval realization of the generic irregular-growth construction.

Stages alternate between two kinds, rank by rank:

* stabilizing: an even-``p`` anchor ``p*pi/q`` (a marginally stable system)
  and a time ``t`` at which ``max_{j,k} beta_t(theta; e_j, e_k) < a(t) / r``;
* destabilizing: an odd-``p`` anchor with nonzero Jordan coupling for the
  offsets ``(w, w')`` and a time ``t`` at which ``beta_t(theta; w, w') > r * b(t)``.

Each inequality is extended from the anchor to a whole interval with a
Lipschitz bound in ``theta``, so every ``theta`` in the final interval satisfies
all recorded finite-time inequalities at once.

The Lipschitz bound used for certification comes from differentiating the
offset recursion ``v_s = B_{i_s} v_{s-1} + u_{i_s}``: only rotation factors depend
on ``theta`` and ``|dR/dtheta| = 1``, so ``|dv_t/dtheta| <= sum_{s<t} |v_s|`` and
``beta_t`` is Lipschitz with constant ``sum_{s<t} sup beta_s`` on any interval.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from .classify import DEGENERATE_TOL, jordan_coupling
from .core import RationalAngle, SystemParams
from .growth import DEFAULT_PRUNE_TOL, VertexCapExceeded, growth_series
from .sequences import SequenceExpr, parse_sequence

log = logging.getLogger(__name__)

E1 = (1.0, 0.0)
E2 = (0.0, 1.0)
UNIT_PAIRS = ((E1, E1), (E1, E2), (E2, E1), (E2, E2))

DEFAULT_MARGIN_FACTOR = 1.5
DEFAULT_Q_MAX = 10**4
STABILIZING_T_MAX = 2**17
DESTABILIZING_T_MAX = 10**7
MAX_ANCHORS = 4
VERIFY_EXACT_T = 20000
PROJECTION_MIN_T = 4096


class StageKind(str, enum.Enum):
    STABILIZING = "Stabilizing"
    DESTABILIZING = "Destabilizing"

    def __str__(self):
        return self.value


class ConstructionError(RuntimeError):
    """A stage could not be certified; ``chain`` holds the stages completed so far."""

    def __init__(self, message: str, chain: "CertificateChain | None" = None):
        super().__init__(message)
        self.chain = chain


@dataclass(frozen=True)
class GrowthTarget:
    """Positive divergent sequences ``a`` (slow) and ``b`` (sublinear)."""

    a: Callable
    b: Callable

    @classmethod
    def parse(cls, a_text: str, b_text: str) -> "GrowthTarget":
        return cls(parse_sequence(a_text), parse_sequence(b_text))

    @classmethod
    def default(cls) -> "GrowthTarget":
        return cls.parse("1+log(t)", "t/(1+log(t))")

    def a_at(self, t) -> float | np.ndarray:
        v = np.asarray(self.a(np.asarray(t, dtype=float)), dtype=float)
        return float(v) if v.ndim == 0 else v

    def b_at(self, t) -> float | np.ndarray:
        v = np.asarray(self.b(np.asarray(t, dtype=float)), dtype=float)
        return float(v) if v.ndim == 0 else v

    def describe(self) -> dict:
        return {"a": str(self.a) if isinstance(self.a, SequenceExpr) else repr(self.a),
                "b": str(self.b) if isinstance(self.b, SequenceExpr) else repr(self.b)}


@dataclass(frozen=True)
class StageCertificate:
    """One certified strict inequality on ``interval`` at time ``time``.

    ``value`` is ``beta_t + eps_t`` (stabilizing, maximized over the unit
    pairs) or ``beta_t`` (destabilizing) at the anchor; ``threshold`` is
    ``a(t)/rank`` or ``rank*b(t)``; ``margin`` is their gap in the same units.
    """

    kind: StageKind
    rank: int
    anchor: RationalAngle
    time: int
    interval: tuple[float, float]
    margin: float
    lipschitz: float
    value: float = float("nan")
    threshold: float = float("nan")

    @property
    def width(self) -> float:
        return self.interval[1] - self.interval[0]

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "rank": self.rank,
                "anchor": {"p": self.anchor.p, "q": self.anchor.q},
                "time": self.time, "interval": [self.interval[0], self.interval[1]],
                "margin": self.margin, "lipschitz": self.lipschitz,
                "value": self.value, "threshold": self.threshold}

    @classmethod
    def from_dict(cls, d: dict) -> "StageCertificate":
        return cls(StageKind(d["kind"]), int(d["rank"]),
                   RationalAngle(int(d["anchor"]["p"]), int(d["anchor"]["q"])), int(d["time"]),
                   (float(d["interval"][0]), float(d["interval"][1])), float(d["margin"]),
                   float(d["lipschitz"]), float(d.get("value", "nan")),
                   float(d.get("threshold", "nan")))


@dataclass
class CertificateChain:
    initial_interval: tuple[float, float]
    target: GrowthTarget
    lam: float = 0.0
    w: tuple[float, float] = E2
    w_prime: tuple[float, float] = E1
    stages: list[StageCertificate] = field(default_factory=list)
    margin_factor: float = DEFAULT_MARGIN_FACTOR

    @property
    def final_interval(self) -> tuple[float, float]:
        return self.stages[-1].interval if self.stages else self.initial_interval

    def to_dict(self, version: str = "") -> dict:
        return {"version": version,
                "params": {"lambda": self.lam, "w": list(self.w), "w_prime": list(self.w_prime),
                           "a_spec": self.target.describe()["a"],
                           "b_spec": self.target.describe()["b"],
                           "margin_factor": self.margin_factor},
                "initial_interval": list(self.initial_interval),
                "stages": [s.to_dict() for s in self.stages],
                "final_interval": list(self.final_interval)}

    @classmethod
    def from_dict(cls, d: dict) -> "CertificateChain":
        p = d["params"]
        chain = cls(tuple(d["initial_interval"]), GrowthTarget.parse(p["a_spec"], p["b_spec"]),
                    float(p["lambda"]), tuple(p["w"]), tuple(p["w_prime"]),
                    [StageCertificate.from_dict(s) for s in d["stages"]],
                    float(p.get("margin_factor", DEFAULT_MARGIN_FACTOR)))
        if list(chain.final_interval) != [float(x) for x in d["final_interval"]]:
            chain.declared_final = tuple(d["final_interval"])
        return chain


class OffsetGrowthFunctional:
    """``(u, v) -> beta_t(theta; u, v)`` at fixed ``lam``, ``theta`` and ``t``."""

    def __init__(self, lam: float, theta: float, t: int, prune_tol: float = 0.0):
        self.lam, self.theta, self.t, self.prune_tol = lam, theta, t, prune_tol

    def series(self, u, v):
        return growth_series(SystemParams.from_offsets(self.lam, self.theta, u, v),
                             self.t, self.prune_tol)

    def __call__(self, u, v) -> float:
        return float(self.series(u, v).beta[self.t])


def lipschitz_bound(t: int, pairs: Sequence = UNIT_PAIRS, interval=None) -> float:
    """Crude a-priori constant ``t * (1 + t*u_max)**2`` valid for both ``alpha_t`` and ``beta_t``.

    Each length-``t`` product has at most ``t`` rotation factors, partial
    products have norm ``<= 1 + t*u_max`` and ``|dA1/dtheta| = 1``.
    """
    if t < 1:
        raise ValueError("t must be >= 1")
    u_max = max(max(math.hypot(*u), math.hypot(*v)) for u, v in pairs) if pairs else 0.0
    return t * (1.0 + t * u_max) ** 2


def adaptive_lipschitz(beta: np.ndarray, eps: np.ndarray, t: int, half_width: float,
                       u_max: float) -> float:
    """Lipschitz constant of ``beta_t`` on ``[theta0 - h, theta0 + h]`` from data at ``theta0``.

    Forward recursion: ``L_{s+1} = L_s + sup beta_s`` with
    ``sup beta_s <= min(beta_s + eps_s + h*L_s, s*u_max)``.
    """
    lip = 0.0
    for s in range(t):
        sup = min(beta[s] + eps[s] + half_width * lip, s * u_max)
        lip += sup
    lip = min(lip, u_max * t * (t - 1) / 2.0)
    return lip * (1.0 + 1e-9) + 1e-12


def rational_anchors(interval: tuple[float, float], parity: int | None = None,
                     q_max: int = DEFAULT_Q_MAX) -> Iterator[RationalAngle]:
    """Reduced ``p*pi/q`` strictly inside ``interval``, by increasing ``q`` then ``p``."""
    lo, hi = interval
    for q in range(1, q_max + 1):
        p_lo = max(1, math.floor(lo * q / math.pi))
        p_hi = min(2 * q - 1, math.ceil(hi * q / math.pi))
        for p in range(p_lo, p_hi + 1):
            if parity is not None and p % 2 != parity:
                continue
            if math.gcd(p, q) != 1:
                continue
            th = p * math.pi / q
            if lo < th < hi:
                yield RationalAngle(p, q)


def _series_for(lam, theta, pairs, t, prune_tol):
    out = []
    for u, v in pairs:
        try:
            s = growth_series(SystemParams.from_offsets(lam, theta, u, v), t, prune_tol)
        except VertexCapExceeded:
            s = growth_series(SystemParams.from_offsets(lam, theta, u, v), t, DEFAULT_PRUNE_TOL)
        out.append(s)
    return out


def _u_max(pairs) -> float:
    return max(max(math.hypot(*u), math.hypot(*v)) for u, v in pairs)


def _stage_lipschitz(series, t, half_width, u_max) -> float:
    return max(adaptive_lipschitz(s.beta, s.eps, t, half_width, u_max) for s in series)


def _check_interval(interval):
    lo, hi = float(interval[0]), float(interval[1])
    if not hi > lo:
        raise ValueError(f"interval must have positive width, got {interval}")
    if lo < 0 or hi > 2 * math.pi:
        raise ValueError(f"interval must lie in [0, 2*pi], got {interval}")
    return lo, hi


def _shrink(anchor: float, interval, margin: float, lip_of: Callable[[float], float],
            endpoint_ok: Callable[[float], bool]) -> tuple[float, float, float] | None:
    """Largest half-width ``h`` (halving from 0.9 of the room) with ``L(h) * 2h < margin``
    and the inequality holding directly at both endpoints."""
    lo, hi = interval
    h = 0.9 * min(anchor - lo, hi - anchor)
    while h > 1e-15 * max(1.0, anchor):
        lip = lip_of(h)
        if lip * 2.0 * h < margin:
            a, b = anchor - h, anchor + h
            if endpoint_ok(a) and endpoint_ok(b):
                return a, b, lip
        h /= 2.0
    return None


def find_stabilizing_stage(interval, rank: int, target: GrowthTarget, lam: float = 0.0, *,
                           margin_factor: float = DEFAULT_MARGIN_FACTOR,
                           q_max: int = DEFAULT_Q_MAX, t_max: int = STABILIZING_T_MAX,
                           prune_tol: float = DEFAULT_PRUNE_TOL,
                           max_anchors: int = MAX_ANCHORS) -> StageCertificate:
    """Certify ``max_{j,k} beta_t / a(t) < 1/rank`` on a subinterval around an even-``p`` anchor."""
    lo, hi = _check_interval(interval)
    u_max = _u_max(UNIT_PAIRS)
    notes = []
    for n_tried, anchor in enumerate(rational_anchors((lo, hi), parity=0, q_max=q_max)):
        if n_tried >= max_anchors:
            break
        if anchor.q == 1:
            continue
        th0 = anchor.value
        horizon = min(256, t_max)
        found = fallback = None
        best = (math.inf, 0)
        abandoned = False
        while found is None:
            series = _series_for(lam, th0, UNIT_PAIRS, horizon, prune_tol)
            value = np.max([s.beta_hi for s in series], axis=0)
            ts = np.arange(1, horizon + 1)
            plain = rank * value[1:] / np.asarray(target.a_at(ts))
            ratio = margin_factor * plain
            ok = np.nonzero(ratio < 1.0)[0]
            k = int(np.argmin(ratio))
            if ratio[k] < best[0]:
                best = (float(ratio[k]), int(ts[k]))
            if fallback is None and np.any(plain < 1.0):
                fallback = int(ts[np.nonzero(plain < 1.0)[0][0]])
            if ok.size:
                found = int(ts[ok[0]])
            elif horizon >= t_max:
                break
            elif horizon >= PROJECTION_MIN_T and (
                    float(np.min(value[horizon // 2:])) * rank > float(target.a_at(t_max))):
                abandoned = True
                break
            else:
                horizon = min(4 * horizon, t_max)
        if found is None and fallback is not None:
            log.info("%s: margin factor %.3g unattainable, using the plain strict inequality",
                     anchor, margin_factor)
            found = fallback
        if found is None:
            why = (f"abandoned at t={horizon}: recent beta already exceeds a({t_max})/rank"
                   if abandoned else f"none within t <= {t_max}")
            notes.append(f"{anchor}: best margin_factor*rank*beta/a = {best[0]:.4g} at t={best[1]}"
                         f" (needs < 1), {why}")
            continue
        t = found
        series = [type(s)(s.beta[:t + 1], s.eps[:t + 1]) for s in series]
        val = float(max(s.beta[t] + s.eps[t] for s in series))
        threshold = float(target.a_at(t)) / rank
        margin = threshold - val

        def endpoint_ok(theta):
            fresh = _series_for(lam, theta, UNIT_PAIRS, t, prune_tol)
            return max(s.beta[t] + s.eps[t] for s in fresh) < threshold

        res = _shrink(th0, (lo, hi), margin,
                      lambda h: _stage_lipschitz(series, t, h, u_max), endpoint_ok)
        if res is None:
            notes.append(f"{anchor}: t={t} found but no certifiable interval")
            continue
        a, b, lip = res
        return StageCertificate(StageKind.STABILIZING, rank, anchor, t, (a, b), margin, lip,
                                val, threshold)
    detail = "; ".join(notes) if notes else "no even-p anchor with q > 1 in the interval"
    raise ConstructionError(
        f"stabilizing stage (rank {rank}) failed on ({lo!r}, {hi!r}) with q_max={q_max}: {detail}")


def _crossing_plausible(observed_slope: float, certified_slope: float, t_now: int, t_max: int,
                        factor: float, target: GrowthTarget) -> bool:
    """Whether ``beta_t > factor * b(t)`` can still happen before ``t_max``.

    Extrapolates with twice the larger of the observed and certified slopes,
    so this only prunes searches that are hopeless by a wide margin.
    """
    slope = 2.0 * max(observed_slope, certified_slope)
    ts = np.unique(np.geomspace(t_now, t_max, 64).astype(np.int64))
    return bool(np.any(slope * ts > factor * np.asarray(target.b_at(ts))))


def find_destabilizing_stage(interval, rank: int, target: GrowthTarget, w=E2, w_prime=E1,
                             lam: float = 0.0, *, margin_factor: float = DEFAULT_MARGIN_FACTOR,
                             q_max: int = DEFAULT_Q_MAX, t_max: int = DESTABILIZING_T_MAX,
                             prune_tol: float = DEFAULT_PRUNE_TOL,
                             max_anchors: int = MAX_ANCHORS) -> StageCertificate:
    """Certify ``beta_t(theta; w, w') / b(t) > rank`` on a subinterval around an odd-``p`` anchor."""
    lo, hi = _check_interval(interval)
    if math.hypot(*w_prime) == 0:
        raise ValueError("w' must be nonzero")
    pairs = ((tuple(w), tuple(w_prime)),)
    u_max = _u_max(pairs)
    notes = []
    tried = 0
    for anchor in rational_anchors((lo, hi), parity=1, q_max=q_max):
        if tried >= max_anchors:
            break
        params = SystemParams.from_offsets(lam, anchor.value, w, w_prime, angle=anchor)
        cert = jordan_coupling(params)
        if abs(cert.coupling) < DEGENERATE_TOL:
            log.info("skipping coupling-degenerate anchor %s", anchor)
            notes.append(f"{anchor}: skipped, coupling {cert.coupling:.3g}")
            continue
        tried += 1
        th0 = anchor.value
        horizon = 1
        found = fallback = None
        series = None
        abandoned = False
        while found is None:
            series = _series_for(lam, th0, pairs, horizon, prune_tol)[0]
            ts = np.arange(1, horizon + 1)
            b_vals = rank * np.asarray(target.b_at(ts))
            ok = np.nonzero(series.beta[1:] > margin_factor * b_vals)[0]
            if fallback is None and np.any(series.beta[1:] > b_vals):
                fallback = int(ts[np.nonzero(series.beta[1:] > b_vals)[0][0]])
            if ok.size:
                found = int(ts[ok[0]])
            elif horizon >= t_max:
                break
            elif horizon >= PROJECTION_MIN_T and not _crossing_plausible(
                    series.beta[horizon] / horizon, cert.slope_lower_bound, horizon, t_max,
                    margin_factor * rank, target):
                abandoned = True
                break
            else:
                horizon = min(2 * horizon, t_max)
        if found is None and fallback is not None:
            log.info("%s: margin factor %.3g unattainable, using the plain strict inequality",
                     anchor, margin_factor)
            found = fallback
        if found is None:
            trend = ", ".join(f"t={s}: {series.beta[s] / s:.4g}"
                              for s in (10, 100, 1000, 10000, 100000, series.T) if s <= series.T)
            why = (f"abandoned at t={horizon}, crossing projected beyond the time guard {t_max}"
                   if abandoned else f"time guard {t_max} exceeded")
            notes.append(f"{anchor}: {why}; beta/t trend {trend};"
                         f" needs > {margin_factor * rank:.3g}*b(t)/t")
            continue
        t = found
        beta = float(series.beta[t])
        threshold = rank * float(target.b_at(t))
        margin = beta - threshold
        sub = type(series)(series.beta[:t + 1], series.eps[:t + 1])

        def endpoint_ok(theta):
            return _series_for(lam, theta, pairs, t, prune_tol)[0].beta[t] > threshold

        res = _shrink(th0, (lo, hi), margin,
                      lambda h: _stage_lipschitz([sub], t, h, u_max), endpoint_ok)
        if res is None:
            notes.append(f"{anchor}: t={t} found but no certifiable interval")
            continue
        a, b, lip = res
        return StageCertificate(StageKind.DESTABILIZING, rank, anchor, t, (a, b), margin, lip,
                                beta, threshold)
    detail = "; ".join(notes) if notes else "no odd-p anchor in the interval"
    raise ConstructionError(
        f"destabilizing stage (rank {rank}) failed on ({lo!r}, {hi!r}) with q_max={q_max}: {detail}")


def construct(initial_interval, depth: int, target: GrowthTarget | None = None, w=E2, w_prime=E1,
              lam: float = 0.0, *, margin_factor: float = DEFAULT_MARGIN_FACTOR,
              q_max: int = DEFAULT_Q_MAX, prune_tol: float = DEFAULT_PRUNE_TOL,
              stabilizing_t_max: int = STABILIZING_T_MAX,
              destabilizing_t_max: int = DESTABILIZING_T_MAX) -> CertificateChain:
    """Alternate stabilizing and destabilizing stages for ranks ``1..depth``."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    target = target or GrowthTarget.default()
    interval = _check_interval(initial_interval)
    chain = CertificateChain(interval, target, lam, tuple(w), tuple(w_prime),
                             margin_factor=margin_factor)
    for rank in range(1, depth + 1):
        for kind in (StageKind.STABILIZING, StageKind.DESTABILIZING):
            try:
                if kind is StageKind.STABILIZING:
                    stage = find_stabilizing_stage(chain.final_interval, rank, target, lam,
                                                   margin_factor=margin_factor, q_max=q_max,
                                                   t_max=stabilizing_t_max, prune_tol=prune_tol)
                else:
                    stage = find_destabilizing_stage(chain.final_interval, rank, target, w,
                                                     w_prime, lam, margin_factor=margin_factor,
                                                     q_max=q_max, t_max=destabilizing_t_max,
                                                     prune_tol=prune_tol)
            except ConstructionError as exc:
                raise ConstructionError(str(exc), chain) from None
            log.info("stage %d: %s rank %d anchor %s t=%d interval=(%r, %r)", len(chain.stages) + 1,
                     kind.value, rank, stage.anchor, stage.time, *stage.interval)
            chain.stages.append(stage)
    return chain


@dataclass
class VerificationReport:
    ok: bool
    message: str = ""
    checks: list[str] = field(default_factory=list)

    def __bool__(self):
        return self.ok


def _stage_value(chain: CertificateChain, stage: StageCertificate, theta: float) -> float:
    pairs = UNIT_PAIRS if stage.kind is StageKind.STABILIZING else ((chain.w, chain.w_prime),)
    tol = 0.0 if stage.time <= VERIFY_EXACT_T else DEFAULT_PRUNE_TOL
    series = _series_for(chain.lam, theta, pairs, stage.time, tol)
    if stage.kind is StageKind.STABILIZING:
        return max(float(s.beta[stage.time] + s.eps[stage.time]) for s in series)
    return float(series[0].beta[stage.time])


def verify(chain: CertificateChain) -> VerificationReport:
    """Re-derive every stage inequality from scratch.

    For each stage: strict nesting in its predecessor, anchor parity and
    location, the strict inequality by fresh evaluation at both endpoints and
    the midpoint, and the whole-interval Lipschitz extension recomputed at the anchor.
    """
    checks = []
    prev = chain.initial_interval
    declared = getattr(chain, "declared_final", None)
    for i, st in enumerate(chain.stages, start=1):
        name = f"stage {i} ({st.kind.value}, rank {st.rank})"
        lo, hi = st.interval
        if not (prev[0] < lo < hi < prev[1]) or not (hi - lo) < (prev[1] - prev[0]):
            return VerificationReport(False, f"{name}: interval ({lo!r}, {hi!r}) not strictly "
                                             f"inside ({prev[0]!r}, {prev[1]!r})", checks)
        want_parity = 0 if st.kind is StageKind.STABILIZING else 1
        th0 = st.anchor.value
        if st.anchor.parity != want_parity or not lo < th0 < hi:
            return VerificationReport(False, f"{name}: anchor {st.anchor} has wrong parity or "
                                             f"lies outside its interval", checks)
        t = st.time
        if st.kind is StageKind.STABILIZING:
            threshold = float(chain.target.a_at(t)) / st.rank
            holds = lambda v: v < threshold
            pairs = UNIT_PAIRS
        else:
            threshold = st.rank * float(chain.target.b_at(t))
            holds = lambda v: v > threshold
            pairs = ((chain.w, chain.w_prime),)
        for label, theta in (("lo", lo), ("mid", 0.5 * (lo + hi)), ("hi", hi)):
            v = _stage_value(chain, st, theta)
            if not holds(v):
                return VerificationReport(False, f"{name}: inequality fails at {label}="
                                                 f"{theta!r} (value {v:.12g}, threshold "
                                                 f"{threshold:.12g})", checks)
        series = _series_for(chain.lam, th0, pairs, t, 0.0 if t <= VERIFY_EXACT_T else DEFAULT_PRUNE_TOL)
        h = max(th0 - lo, hi - th0)
        lip = _stage_lipschitz(series, t, h, _u_max(pairs))
        if st.kind is StageKind.STABILIZING:
            at_anchor = max(float(s.beta[t] + s.eps[t]) for s in series)
            bound_ok = at_anchor + lip * h < threshold
        else:
            at_anchor = float(series[0].beta[t])
            bound_ok = at_anchor - lip * h > threshold
        if not bound_ok:
            return VerificationReport(False, f"{name}: Lipschitz extension fails (value at anchor "
                                             f"{at_anchor:.12g}, L={lip:.6g}, half-width {h:.3g}, "
                                             f"threshold {threshold:.12g})", checks)
        checks.append(f"{name}: anchor {st.anchor}, t={t}, interval ({lo!r}, {hi!r}) ok")
        prev = st.interval
    if declared is not None and tuple(declared) != tuple(chain.final_interval):
        return VerificationReport(False, "final_interval does not match the last stage", checks)
    return VerificationReport(True, "all stages verified", checks)
