"""Rational-angle classification with quantitative certificates.

For ``theta = p*pi/q``:

* ``p`` odd: ``A1**q`` has block ``-I`` and ``A0 @ A1**q`` has a lower-right
  2x2 block ``[[1, c], [0, 1]]``.  When the coupling ``c`` is nonzero its powers
  grow linearly and ``lim alpha_t / t >= |c| / (q + 1)``.
* ``p`` even, ``q > 1``: ``A1**q = I`` and every product is bounded by
  ``C1**2 * (1 + 2 * C1**2 / kappa)``.

The coupling is always read off the directly computed matrix product.  Written
out, ``c = b - r * cos(theta/2 - phi) / sin(theta/2)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import (AffineTriangularMatrix, RationalAngle, SystemParams, block_norm,
                   build_generators, compose, matrix_power, op_norm, rotation)

DEGENERATE_TOL = 1e-10
IDENTITY_TOL = 1e-10
POWER_CHECK_M = 10**4
GROWTH_CHECK_M = 10**5


class Kind(str, enum.Enum):
    MARGINALLY_STABLE_EVEN_P = "MarginallyStableEvenP"
    MARGINALLY_UNSTABLE_LINEAR_ODD_P = "MarginallyUnstableLinearOddP"
    DEGENERATE_ODD_P = "DegenerateOddP"
    OUT_OF_SCOPE_ANGLE = "OutOfScopeAngle"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class RotationSum:
    """Direct sums of ``cos`` and ``sin`` over ``k*theta + phi``, ``k < q``."""

    direct: tuple[float, float]
    closed_form: tuple[float, float] | None = None

    @property
    def discrepancy(self) -> float | None:
        if self.closed_form is None:
            return None
        return max(abs(self.direct[0] - self.closed_form[0]),
                   abs(self.direct[1] - self.closed_form[1]))


def _as_float(theta) -> float:
    return theta.value if isinstance(theta, RationalAngle) else float(theta)


def rotation_power_sum(theta, phi: float, q: int) -> RotationSum:
    """``(sum cos(k theta + phi), sum sin(k theta + phi))`` for ``k = 0..q-1``.

    When ``q*theta`` is an odd multiple of pi the closed form
    ``(sin(theta/2 - phi), cos(theta/2 - phi)) / sin(theta/2)`` is attached
    for cross-validation.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    th = _as_float(theta)
    k = np.arange(q)
    ang = k * th + phi
    direct = (float(math.fsum(np.cos(ang))), float(math.fsum(np.sin(ang))))
    closed = None
    half = math.sin(th / 2)
    turns = q * th / math.pi
    n = round(turns)
    if abs(half) > 1e-12 and abs(turns - n) < 1e-9 and n % 2 == 1:
        closed = (math.sin(th / 2 - phi) / half, math.cos(th / 2 - phi) / half)
    return RotationSum(direct, closed)


@dataclass(frozen=True)
class SlopeCertificate:
    q: int
    coupling: float
    slope_lower_bound: float
    power_ratio: float
    power_check_m: int = POWER_CHECK_M

    @property
    def degenerate(self) -> bool:
        return abs(self.coupling) < DEGENERATE_TOL

    @property
    def power_check_ok(self) -> bool:
        """``||(A0 A1^q)^m|| / m`` agrees with ``|coupling|`` to 1%."""
        c = abs(self.coupling)
        return abs(self.power_ratio - c) <= 0.01 * c

    def to_dict(self) -> dict:
        return {"q": self.q, "coupling": self.coupling,
                "slope_lower_bound": self.slope_lower_bound,
                "power_ratio": self.power_ratio, "power_check_m": self.power_check_m}


@dataclass(frozen=True)
class StabilityCertificate:
    """``||P R^t P|| <= 1 - kappa`` off multiples of ``q``; ``||A0^t||, ||A1^t|| <= C1``."""

    kappa: float
    C1: float
    q: int = 0

    @property
    def C2(self) -> float:
        return 1.0 + 2.0 * self.C1 ** 2 / self.kappa

    @property
    def overall_bound(self) -> float:
        return self.C1 ** 2 * self.C2

    def to_dict(self) -> dict:
        return {"q": self.q, "kappa": self.kappa, "C1": self.C1, "C2": self.C2,
                "overall_bound": self.overall_bound}


@dataclass(frozen=True)
class Classification:
    kind: Kind
    angle: RationalAngle
    certificate: SlopeCertificate | StabilityCertificate | None = None

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "p": self.angle.p, "q": self.angle.q,
                "theta": self.angle.value,
                "certificate": None if self.certificate is None else self.certificate.to_dict()}

    def summary(self) -> str:
        a = self.angle
        if isinstance(self.certificate, SlopeCertificate):
            c = self.certificate
            detail = (f"coupling={c.coupling:.12g}, lim alpha_t/t >= {c.slope_lower_bound:.12g}")
        elif isinstance(self.certificate, StabilityCertificate):
            c = self.certificate
            detail = (f"kappa={c.kappa:.12g}, C1={c.C1:.12g}, C2={c.C2:.12g}, "
                      f"sup ||products|| <= {c.overall_bound:.12g}")
        else:
            detail = "no certificate"
        return f"theta={a} ({a.value:.12g}): {self.kind.value}; {detail}"


def _power_by_composition(m: AffineTriangularMatrix, k: int) -> AffineTriangularMatrix:
    result = m
    for _ in range(k - 1):
        result = compose(m, result)
    return result


def _checked_angle(params: SystemParams, angle: RationalAngle | None) -> tuple[SystemParams, RationalAngle]:
    angle = angle or params.angle
    if angle is None:
        raise ValueError("classification needs an exact rational angle p*pi/q")
    return params.with_theta(angle), angle


def jordan_coupling(params: SystemParams, angle: RationalAngle | None = None) -> SlopeCertificate:
    """Coupling entry (row 2, column 3) of ``A0 @ A1**q`` for odd ``p``."""
    params, angle = _checked_angle(params, angle)
    if not angle.odd:
        raise ValueError(f"jordan_coupling needs odd p, got {angle}")
    a0, a1 = build_generators(params)
    w = compose(a0, _power_by_composition(a1, angle.q))
    coupling = float(w.offset[1])
    ratio = op_norm(matrix_power(w, POWER_CHECK_M)) / POWER_CHECK_M
    return SlopeCertificate(angle.q, coupling, abs(coupling) / (angle.q + 1), ratio)


def stability_certificate(params: SystemParams, angle: RationalAngle | None = None) -> StabilityCertificate:
    """Explicit uniform bound on all products for even ``p`` and ``q > 1``."""
    params, angle = _checked_angle(params, angle)
    p, q = angle.p, angle.q
    if angle.odd or q == 1:
        raise ValueError(f"stability_certificate needs even p and q > 1, got {angle}")
    a0, a1 = build_generators(params)
    a1q = _power_by_composition(a1, q)
    dev = np.max(np.abs(a1q.to_matrix() - np.eye(3)))
    if dev > IDENTITY_TOL:
        raise ArithmeticError(f"A1**{q} differs from I by {dev:.3g}")

    pmat = np.diag([params.lam, -1.0])
    worst = max(block_norm(pmat @ rotation(t * params.theta) @ pmat) for t in range(1, q))
    kappa = 1.0 - worst
    if kappa <= 1e-12:
        raise ArithmeticError(f"kappa={kappa:.3g} is not positive for {angle}")

    norms = [1.0]
    power = AffineTriangularMatrix.identity()
    t = 0
    lam = abs(params.lam)
    # |lam|^t decays to nothing, then the sequence alternates with period 2
    while True:
        power = compose(a0, power)
        t += 1
        norms.append(op_norm(power))
        if lam ** t < 1e-14 and t >= 2:
            break
    lim_x = params.a / (1.0 - params.lam)
    for odd in (0.0, 1.0):
        limit = AffineTriangularMatrix(np.diag([0.0, -1.0 if odd else 1.0]), [lim_x, params.b * odd])
        norms.append(op_norm(limit))
    power = AffineTriangularMatrix.identity()
    for _ in range(2 * q):
        power = compose(a1, power)
        norms.append(op_norm(power))
    # absorb rounding in the finite sup
    c1 = max(norms) * (1.0 + 1e-12)
    return StabilityCertificate(kappa=kappa, C1=c1, q=q)


def word_growth_coefficient(w: AffineTriangularMatrix, check_m: int | None = GROWTH_CHECK_M) -> float:
    """``lim ||W**m|| / m``: the norm of the offset projected onto the eigenvalue-1 eigenspace."""
    block = np.asarray(w.block)
    eig = np.linalg.eigvals(block)
    if np.max(np.abs(eig)) > 1 + 1e-9:
        raise ValueError(f"block spectral radius {np.max(np.abs(eig)):.12g} exceeds 1")
    near_one = np.abs(eig - 1.0) < 1e-9
    u = np.asarray(w.offset, dtype=float)
    if not near_one.any():
        coef = 0.0
        bounded = np.linalg.solve(np.eye(2) - block, u)
    elif near_one.all():
        coef = float(np.linalg.norm(u))
        bounded = np.zeros(2)
    else:
        mu = eig[~near_one][0]
        proj = (block - mu * np.eye(2)) / (1.0 - mu)
        coef = float(np.linalg.norm(np.real_if_close(proj @ u)))
        bounded = np.real_if_close((u - proj @ u) / (1.0 - mu))
    if check_m:
        # the non-growing part of W^m stays within 1 + 2|x|, x the fixed point off the unit eigenspace
        transient = (1.0 + 2.0 * float(np.linalg.norm(bounded))) / check_m
        ratio = op_norm(matrix_power(w, check_m)) / check_m
        if abs(ratio - coef) > 1e-3 * max(coef, 1.0) + transient:
            raise ArithmeticError(f"projection gives {coef:.12g} but ||W^m||/m = {ratio:.12g}")
    return coef


def classify(params: SystemParams, angle: RationalAngle | None = None) -> Classification:
    """Dispatch on the parity of ``p``."""
    params, angle = _checked_angle(params, angle)
    if angle.odd:
        cert = jordan_coupling(params, angle)
        kind = Kind.DEGENERATE_ODD_P if cert.degenerate else Kind.MARGINALLY_UNSTABLE_LINEAR_ODD_P
        return Classification(kind, angle, cert)
    if angle.q == 1:
        return Classification(Kind.OUT_OF_SCOPE_ANGLE, angle, None)
    return Classification(Kind.MARGINALLY_STABLE_EVEN_P, angle, stability_certificate(params, angle))


def coupling_closed_form(params: SystemParams) -> float:
    """``b - r cos(theta/2 - phi) / sin(theta/2)``, the direct coupling written out."""
    th = params.theta
    return params.b - params.r * math.cos(th / 2 - params.phi) / math.sin(th / 2)
