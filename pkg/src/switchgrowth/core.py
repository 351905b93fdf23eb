"""Domain types for the two-generator block-triangular switched system.

Every matrix in the family has the shape ``[[B, u], [0, 1]]`` with a 2x2
block ``B`` and an offset ``u``; only ``B`` and ``u`` are stored.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

NORM_TOL = 1e-12


@dataclass(frozen=True)
class RationalAngle:
    """The angle p*pi/q, reduced on construction."""

    p: int
    q: int

    def __post_init__(self):
        p, q = int(self.p), int(self.q)
        if p < 1 or q < 1:
            raise ValueError(f"p and q must be positive, got p={p}, q={q}")
        g = math.gcd(p, q)
        p, q = p // g, q // g
        if not p < 2 * q:
            raise ValueError(f"p/q = {p}/{q} puts theta outside (0, 2*pi)")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def parity(self) -> int:
        return self.p % 2

    @property
    def odd(self) -> bool:
        return self.parity == 1

    @property
    def value(self) -> float:
        return self.p * math.pi / self.q

    def __str__(self):
        return f"{self.p}pi/{self.q}"


@dataclass(frozen=True)
class SystemParams:
    """Parameters (lambda, theta, a, b, r, phi) of the generator pair.

    ``angle`` optionally carries the exact rational form of ``theta``; it is
    required for classification but never inferred from a float.
    """

    lam: float
    theta: float
    a: float = 0.0
    b: float = 0.0
    r: float = 1.0
    phi: float = 0.0
    angle: RationalAngle | None = None

    def __post_init__(self):
        if self.angle is not None:
            object.__setattr__(self, "theta", self.angle.value)
        if not abs(self.lam) < 1:
            raise ValueError(f"|lambda| must be < 1, got {self.lam}")
        if not 0 < self.theta < 2 * math.pi:
            raise ValueError(f"theta must lie in (0, 2*pi), got {self.theta}")
        if self.r < 0:
            raise ValueError(f"r must be >= 0, got {self.r}")

    @classmethod
    def from_rational(cls, lam: float, p: int, q: int, **kw) -> "SystemParams":
        return cls(lam=lam, theta=RationalAngle(p, q).value,
                   angle=RationalAngle(p, q), **kw)

    @classmethod
    def from_offsets(cls, lam: float, theta: float, u0, u1,
                     angle: RationalAngle | None = None) -> "SystemParams":
        """Build params from Cartesian offsets ``u0 = (a, b)``, ``u1``."""
        x, y = float(u1[0]), float(u1[1])
        return cls(lam=lam, theta=theta, a=float(u0[0]), b=float(u0[1]),
                   r=math.hypot(x, y), phi=math.atan2(y, x), angle=angle)

    @property
    def u0(self) -> np.ndarray:
        return np.array([self.a, self.b], dtype=float)

    @property
    def u1(self) -> np.ndarray:
        return np.array([self.r * math.cos(self.phi), self.r * math.sin(self.phi)])

    @property
    def u_max(self) -> float:
        return max(math.hypot(self.a, self.b), self.r)

    def with_theta(self, theta: float | RationalAngle) -> "SystemParams":
        if isinstance(theta, RationalAngle):
            return SystemParams(self.lam, theta.value, self.a, self.b, self.r,
                                self.phi, angle=theta)
        return SystemParams(self.lam, float(theta), self.a, self.b, self.r, self.phi)

    def with_offsets(self, u0, u1) -> "SystemParams":
        return SystemParams.from_offsets(self.lam, self.theta, u0, u1, angle=self.angle)

    def scaled(self, c: float) -> "SystemParams":
        """Both offsets multiplied by ``c``."""
        return self.with_offsets(c * self.u0, c * self.u1)

    def to_dict(self) -> dict:
        d = {"lambda": self.lam, "theta": self.theta, "a": self.a, "b": self.b,
             "r": self.r, "phi": self.phi}
        if self.angle is not None:
            d["p"], d["q"] = self.angle.p, self.angle.q
        return d


def rotation(psi: float) -> np.ndarray:
    c, s = math.cos(psi), math.sin(psi)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True, eq=False)
class AffineTriangularMatrix:
    """The 3x3 matrix ``[[block, offset], [0, 1]]``."""

    block: np.ndarray
    offset: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        block = np.array(self.block, dtype=float).reshape(2, 2)
        offset = np.array(self.offset, dtype=float).reshape(2)
        block.setflags(write=False)
        offset.setflags(write=False)
        object.__setattr__(self, "block", block)
        object.__setattr__(self, "offset", offset)

    @classmethod
    def identity(cls) -> "AffineTriangularMatrix":
        return cls(np.eye(2), np.zeros(2))

    @classmethod
    def from_matrix(cls, m) -> "AffineTriangularMatrix":
        m = np.asarray(m, dtype=float)
        if m.shape != (3, 3) or not np.allclose(m[2], [0, 0, 1], atol=0):
            raise ValueError("expected a 3x3 matrix with bottom row (0, 0, 1)")
        return cls(m[:2, :2], m[:2, 2])

    def to_matrix(self) -> np.ndarray:
        m = np.eye(3)
        m[:2, :2] = self.block
        m[:2, 2] = self.offset
        return m

    def __matmul__(self, other: "AffineTriangularMatrix") -> "AffineTriangularMatrix":
        return compose(self, other)

    def __pow__(self, m: int) -> "AffineTriangularMatrix":
        return matrix_power(self, m)

    def __repr__(self):
        return f"AffineTriangularMatrix(block={self.block.tolist()}, offset={self.offset.tolist()})"


def build_generators(params: SystemParams):
    """Return ``(A0, A1)``: ``A0 = [[diag(lam, -1), (a, b)]]``, ``A1 = [[R_theta, r*v_phi]]``."""
    a0 = AffineTriangularMatrix(np.diag([params.lam, -1.0]), params.u0)
    a1 = AffineTriangularMatrix(rotation(params.theta), params.u1)
    return a0, a1


def compose(m: AffineTriangularMatrix, n: AffineTriangularMatrix) -> AffineTriangularMatrix:
    """Matrix product ``m @ n``, i.e. apply ``n`` first."""
    return AffineTriangularMatrix(m.block @ n.block, m.block @ n.offset + m.offset)


def matrix_power(m: AffineTriangularMatrix, k: int) -> AffineTriangularMatrix:
    if k < 0:
        raise ValueError("negative powers are not supported")
    result = AffineTriangularMatrix.identity()
    base = m
    while k:
        if k & 1:
            result = compose(result, base)
        base = compose(base, base)
        k >>= 1
    return result


@dataclass(frozen=True)
class SwitchingWord:
    """A finite word over {0, 1}; the first letter acts first."""

    letters: tuple[int, ...] = ()

    def __post_init__(self):
        letters = tuple(int(x) for x in self.letters)
        if any(x not in (0, 1) for x in letters):
            raise ValueError(f"letters must be 0 or 1, got {letters}")
        object.__setattr__(self, "letters", letters)

    @classmethod
    def parse(cls, text: str) -> "SwitchingWord":
        return cls(tuple(int(c) for c in text.strip() if c in "01"))

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __str__(self):
        return "".join(map(str, self.letters))


def word_product(word: SwitchingWord | Sequence[int], a0: AffineTriangularMatrix,
                 a1: AffineTriangularMatrix) -> AffineTriangularMatrix:
    """Product ``A_{i_t} ... A_{i_1}`` for the word ``(i_1, ..., i_t)``."""
    gens = (a0, a1)
    result = AffineTriangularMatrix.identity()
    for letter in word:
        result = compose(gens[letter], result)
    return result


def _jacobi_max_eigenvalue(g: np.ndarray, sweeps: int = 30) -> float:
    """Largest eigenvalue of a symmetric 3x3 matrix by cyclic Jacobi rotations."""
    a = [[float(g[i][j]) for j in range(3)] for i in range(3)]
    for _ in range(sweeps):
        off = a[0][1] ** 2 + a[0][2] ** 2 + a[1][2] ** 2
        scale = a[0][0] ** 2 + a[1][1] ** 2 + a[2][2] ** 2
        if off <= 1e-36 * scale or off == 0.0:
            break
        for p, q in ((0, 1), (0, 2), (1, 2)):
            apq = a[p][q]
            if apq == 0.0:
                continue
            tau = (a[q][q] - a[p][p]) / (2.0 * apq)
            tn = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
            c = 1.0 / math.sqrt(1.0 + tn * tn)
            s = tn * c
            for k in range(3):
                akp, akq = a[k][p], a[k][q]
                a[k][p] = c * akp - s * akq
                a[k][q] = s * akp + c * akq
            for k in range(3):
                apk, aqk = a[p][k], a[q][k]
                a[p][k] = c * apk - s * aqk
                a[q][k] = s * apk + c * aqk
    return max(a[0][0], a[1][1], a[2][2])


def op_norm(m: AffineTriangularMatrix) -> float:
    """Spectral norm of the full 3x3 matrix, via the top eigenvalue of its Gram matrix."""
    full = m.to_matrix()
    gram = full.T @ full
    top = _jacobi_max_eigenvalue(gram)
    return math.sqrt(max(top, 0.0))


def block_norm(block: np.ndarray) -> float:
    """Spectral norm of a 2x2 matrix in closed form."""
    a, b, c, d = (float(x) for x in np.asarray(block).ravel())
    # half-sum of the norms of the conformal and anticonformal parts; no cancellation
    return 0.5 * (math.hypot(a + d, c - b) + math.hypot(a - d, b + c))


def all_words(t: int) -> Iterable[tuple[int, ...]]:
    """All ``2**t`` words of length ``t`` in lexicographic order."""
    for k in range(1 << t):
        yield tuple((k >> (t - 1 - j)) & 1 for j in range(t))
