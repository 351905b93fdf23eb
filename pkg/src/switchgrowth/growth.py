"""Worst-case offset growth via convex hulls of the reachable offset set.

The offset of a product ``A_{i_t} ... A_{i_1}`` obeys ``v <- B_i v + u_i``, so
the set ``S_t`` of attainable offsets satisfies
``S_{t+1} = (B_0 S_t + u_0) U (B_1 S_t + u_1)``.  Affine maps commute with
taking convex hulls and the norm is convex, so ``beta_t = max_{S_t} |v|`` is
attained at a vertex of ``conv(S_t)``; tracking only the hull keeps the cost
polynomial instead of ``2**t``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .core import AffineTriangularMatrix, SwitchingWord, SystemParams, build_generators

DEDUP_TOL = 1e-13
COLLINEAR_TOL = 1e-12
DEFAULT_PRUNE_TOL = 1e-10
DEFAULT_VERTEX_CAP = 10**6
BRUTE_FORCE_MAX_T = 24


class VertexCapExceeded(RuntimeError):
    """The reachable hull outgrew the configured vertex cap."""


@numba.njit(cache=True)
def _convex_hull(pts):
    """Counterclockwise hull vertices of ``pts`` (Andrew's monotone chain)."""
    n = pts.shape[0]
    order = np.argsort(pts[:, 1], kind="mergesort")
    order = order[np.argsort(pts[order, 0], kind="mergesort")]
    srt = np.empty((n, 2))
    m = 0
    for k in range(n):
        x = pts[order[k], 0]
        y = pts[order[k], 1]
        if m > 0 and abs(x - srt[m - 1, 0]) <= DEDUP_TOL and abs(y - srt[m - 1, 1]) <= DEDUP_TOL:
            continue
        srt[m, 0] = x
        srt[m, 1] = y
        m += 1
    if m <= 2:
        return srt[:m].copy()
    out = np.empty((2 * m, 2))
    k = 0
    for i in range(m):
        while k >= 2 and ((out[k - 1, 0] - out[k - 2, 0]) * (srt[i, 1] - out[k - 2, 1])
                          - (out[k - 1, 1] - out[k - 2, 1]) * (srt[i, 0] - out[k - 2, 0])) <= COLLINEAR_TOL:
            k -= 1
        out[k] = srt[i]
        k += 1
    lower = k + 1
    for i in range(m - 2, -1, -1):
        while k >= lower and ((out[k - 1, 0] - out[k - 2, 0]) * (srt[i, 1] - out[k - 2, 1])
                              - (out[k - 1, 1] - out[k - 2, 1]) * (srt[i, 0] - out[k - 2, 0])) <= COLLINEAR_TOL:
            k -= 1
        out[k] = srt[i]
        k += 1
    return out[:k - 1].copy()


@numba.njit(cache=True)
def _segment_distance(p, a, b):
    dx = b[0] - a[0]
    dy = b[1] - a[1]
    den = dx * dx + dy * dy
    if den == 0.0:
        return math.hypot(p[0] - a[0], p[1] - a[1])
    s = ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / den
    s = min(1.0, max(0.0, s))
    return math.hypot(p[0] - a[0] - s * dx, p[1] - a[1] - s * dy)


@numba.njit(cache=True)
def _prune(hull, tol):
    """Drop vertices lying within ``tol`` of the chord between their neighbours.

    No two adjacent vertices are dropped in one pass, so every dropped point is
    within ``tol`` of the retained polygon.
    """
    n = hull.shape[0]
    if tol <= 0.0 or n <= 3:
        return hull, False
    keep = np.ones(n, dtype=np.bool_)
    dropped = 0
    for i in range(n):
        prev = (i - 1) % n
        nxt = (i + 1) % n
        if not keep[prev] or (i == n - 1 and not keep[0]):
            continue
        if n - dropped <= 3:
            break
        if _segment_distance(hull[i], hull[prev], hull[nxt]) < tol:
            keep[i] = False
            dropped += 1
    if dropped == 0:
        return hull, False
    return hull[keep].copy(), True


@numba.njit(cache=True)
def _image_hull(pts, b0, u0, b1, u1):
    n = pts.shape[0]
    both = np.empty((2 * n, 2))
    for i in range(n):
        x = pts[i, 0]
        y = pts[i, 1]
        both[i, 0] = b0[0, 0] * x + b0[0, 1] * y + u0[0]
        both[i, 1] = b0[1, 0] * x + b0[1, 1] * y + u0[1]
        both[n + i, 0] = b1[0, 0] * x + b1[0, 1] * y + u1[0]
        both[n + i, 1] = b1[1, 0] * x + b1[1, 1] * y + u1[1]
    return _convex_hull(both)


@numba.njit(cache=True)
def _max_norm(pts):
    best = 0.0
    for i in range(pts.shape[0]):
        v = math.hypot(pts[i, 0], pts[i, 1])
        if v > best:
            best = v
    return best


@numba.njit(cache=True)
def _series_kernel(start, b0, u0, b1, u1, steps, prune_tol, cap):
    beta = np.zeros(steps + 1)
    eps = np.zeros(steps + 1)
    hull = start
    beta[0] = _max_norm(hull)
    err = 0.0
    for t in range(1, steps + 1):
        hull = _image_hull(hull, b0, u0, b1, u1)
        hull, pruned = _prune(hull, prune_tol)
        if pruned:
            err += prune_tol
        beta[t] = _max_norm(hull)
        eps[t] = err
        if hull.shape[0] > cap:
            return beta[:t + 1], eps[:t + 1], hull, t
    return beta, eps, hull, -1


@dataclass(frozen=True, eq=False)
class ReachableHull:
    """Counterclockwise extreme points of ``conv(S_t)`` plus the pruning error so far."""

    vertices: np.ndarray
    accumulated_error: float = 0.0

    @classmethod
    def origin(cls) -> "ReachableHull":
        return cls(np.zeros((1, 2)))

    @property
    def max_norm(self) -> float:
        return float(_max_norm(self.vertices))

    def __len__(self):
        return self.vertices.shape[0]


def convex_hull(points) -> np.ndarray:
    """Counterclockwise convex hull of a point cloud, collinear points removed."""
    pts = np.ascontiguousarray(np.asarray(points, dtype=float).reshape(-1, 2))
    if pts.shape[0] == 0:
        return pts
    return _convex_hull(pts)


def _arrays(a0: AffineTriangularMatrix, a1: AffineTriangularMatrix):
    return (np.ascontiguousarray(a0.block), np.ascontiguousarray(a0.offset),
            np.ascontiguousarray(a1.block), np.ascontiguousarray(a1.offset))


def hull_step(h: ReachableHull, a0: AffineTriangularMatrix, a1: AffineTriangularMatrix,
              prune_tol: float = 0.0) -> ReachableHull:
    """One step of the reachable-hull recursion."""
    if prune_tol < 0:
        raise ValueError("prune_tol must be >= 0")
    verts = _image_hull(np.ascontiguousarray(h.vertices, dtype=float), *_arrays(a0, a1))
    verts, pruned = _prune(verts, float(prune_tol))
    return ReachableHull(verts, h.accumulated_error + (prune_tol if pruned else 0.0))


@dataclass(frozen=True, eq=False)
class GrowthSeries:
    """Per-time records; the true ``beta_t`` lies in ``[beta, beta + eps]``."""

    beta: np.ndarray
    eps: np.ndarray
    params: SystemParams | None = None
    prune_tol: float = 0.0
    final_hull: ReachableHull | None = field(default=None, repr=False)

    @property
    def T(self) -> int:
        return len(self.beta) - 1

    @property
    def t(self) -> np.ndarray:
        return np.arange(len(self.beta))

    @property
    def alpha_lo(self) -> np.ndarray:
        return np.maximum(1.0, self.beta)

    @property
    def alpha_hi(self) -> np.ndarray:
        return self.beta + self.eps + 1.0

    @property
    def beta_hi(self) -> np.ndarray:
        return self.beta + self.eps

    def records(self):
        """Yield ``(t, beta, eps, alpha_lo, alpha_hi)`` tuples."""
        lo, hi = self.alpha_lo, self.alpha_hi
        for t in range(len(self.beta)):
            yield t, float(self.beta[t]), float(self.eps[t]), float(lo[t]), float(hi[t])


def growth_series_from_generators(a0: AffineTriangularMatrix, a1: AffineTriangularMatrix, T: int,
                                  prune_tol: float = DEFAULT_PRUNE_TOL,
                                  vertex_cap: int = DEFAULT_VERTEX_CAP,
                                  params: SystemParams | None = None) -> GrowthSeries:
    if T < 0:
        raise ValueError("T must be >= 0")
    if prune_tol < 0:
        raise ValueError("prune_tol must be >= 0")
    beta, eps, hull, failed_at = _series_kernel(np.zeros((1, 2)), *_arrays(a0, a1), int(T),
                                                float(prune_tol), int(vertex_cap))
    if failed_at >= 0:
        raise VertexCapExceeded(
            f"hull reached {hull.shape[0]} vertices at t={failed_at} (cap {vertex_cap}); "
            f"raise prune_tol (currently {prune_tol}) or the cap")
    return GrowthSeries(beta, eps, params, prune_tol, ReachableHull(hull, float(eps[-1])))


def growth_series(params: SystemParams, T: int, prune_tol: float = DEFAULT_PRUNE_TOL,
                  vertex_cap: int = DEFAULT_VERTEX_CAP) -> GrowthSeries:
    """``beta_t`` for ``t = 0..T`` with a certified pruning-error ledger."""
    a0, a1 = build_generators(params)
    return growth_series_from_generators(a0, a1, T, prune_tol, vertex_cap, params)


def beta_at(params: SystemParams, t: int, prune_tol: float = 0.0) -> tuple[float, float]:
    """``(beta_t, eps_t)`` at a single time."""
    s = growth_series(params, t, prune_tol)
    return float(s.beta[t]), float(s.eps[t])


@dataclass(frozen=True)
class BruteForceResult:
    t: int
    alpha: float
    beta: float
    alpha_word: SwitchingWord
    beta_word: SwitchingWord


def _all_products(a0, a1, k):
    """Blocks and offsets of all ``2**k`` products; row ``j`` is the word with binary digits of ``j``."""
    blocks = np.eye(2)[None]
    offsets = np.zeros((1, 2))
    gens = ((a0.block, a0.offset), (a1.block, a1.offset))
    for _ in range(k):
        nb, no = [], []
        for b, u in gens:
            nb.append(np.einsum("ij,njk->nik", b, blocks))
            no.append(offsets @ b.T + u)
        # new letter is the least significant digit; word order follows the binary index
        blocks = np.stack(nb, axis=1).reshape(-1, 2, 2)
        offsets = np.stack(no, axis=1).reshape(-1, 2)
    return blocks, offsets


def brute_force(params: SystemParams, t: int) -> BruteForceResult:
    """Exact ``alpha_t`` and ``beta_t`` by enumerating all ``2**t`` words."""
    if t < 0 or t > BRUTE_FORCE_MAX_T:
        raise ValueError(f"brute force needs 0 <= t <= {BRUTE_FORCE_MAX_T}, got {t}")
    a0, a1 = build_generators(params)
    if t == 0:
        return BruteForceResult(0, 1.0, 0.0, SwitchingWord(), SwitchingWord())
    # split the word into an early part (k_first letters) and a late part
    k_first = (t + 1) // 2
    k_late = t - k_first
    fb, fo = _all_products(a0, a1, k_first)
    lb, lo = _all_products(a0, a1, k_late)
    best_a = best_b = -1.0
    arg_a = arg_b = (0, 0)
    chunk = max(1, (1 << 20) >> k_late)
    for start in range(0, fb.shape[0], chunk):
        sb, so = fb[start:start + chunk], fo[start:start + chunk]
        blocks = np.einsum("mij,njk->nmik", lb, sb)
        offsets = np.einsum("mij,nj->nmi", lb, so) + lo[None]
        norms_b = np.hypot(offsets[..., 0], offsets[..., 1])
        full = np.zeros(blocks.shape[:2] + (3, 3))
        full[..., :2, :2] = blocks
        full[..., :2, 2] = offsets
        full[..., 2, 2] = 1.0
        gram = np.swapaxes(full, -1, -2) @ full
        norms_a = np.sqrt(np.maximum(np.linalg.eigvalsh(gram)[..., -1], 0.0))
        ib = np.unravel_index(int(np.argmax(norms_b)), norms_b.shape)
        ia = np.unravel_index(int(np.argmax(norms_a)), norms_a.shape)
        if norms_b[ib] > best_b:
            best_b, arg_b = float(norms_b[ib]), (start + ib[0], ib[1])
        if norms_a[ia] > best_a:
            best_a, arg_a = float(norms_a[ia]), (start + ia[0], ia[1])

    def word(idx):
        first, late = idx
        letters = [(first >> (k_first - 1 - j)) & 1 for j in range(k_first)]
        letters += [(late >> (k_late - 1 - j)) & 1 for j in range(k_late)]
        return SwitchingWord(tuple(letters))

    return BruteForceResult(t, best_a, best_b, word(arg_a), word(arg_b))
