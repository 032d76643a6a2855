"""Osculating subspaces, the associated map Gamma and mu-type hyperplanes.

For a closed convex curve gamma in R^{2n}, L(t) is the codimension-2 affine
subspace through gamma(t) spanned by gamma'(t), ..., gamma^{(2n-2)}(t).
Gamma(t_1, ..., t_n) is the intersection point of L(t_1), ..., L(t_n).
Coincident parameters are handled by replacing a cluster of m equal angles
with the codimension-2m osculating subspace at that angle, which is the
continuous extension across the diagonal; the fully diagonal tuple
therefore maps to gamma(t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .trigcurve import TWO_PI, TrigCurve, canonical_angle

TAU_DIAG = 1e-7
RANK_TOL = 1e-10
COND_LIMIT = 1e15


class DegenerateFrameError(ArithmeticError):
    """Rank-deficient derivative span (curve degenerate or not generic here)."""


class SingularSystemError(ArithmeticError):
    """The stacked osculating equations do not determine a unique point."""

    def __init__(self, message, condition=math.inf):
        super().__init__(message)
        self.condition = condition


@dataclass(frozen=True, order=True)
class YoungDiagram:
    parts: tuple[int, ...]

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        if not parts:
            raise ValueError("empty Young diagram")
        if any(p < 1 for p in parts):
            raise ValueError(f"Young diagram parts must be positive: {parts}")
        if any(a < b for a, b in zip(parts, parts[1:])):
            raise ValueError(f"Young diagram parts must be weakly decreasing: {parts}")
        object.__setattr__(self, "parts", parts)

    @property
    def area(self) -> int:
        return sum(self.parts)

    @property
    def length(self) -> int:
        return len(self.parts)

    @classmethod
    def parse(cls, text: str) -> YoungDiagram:
        return cls(tuple(int(p) for p in text.replace("(", "").replace(")", "").split(",") if p.strip()))

    def __str__(self):
        return "(" + ",".join(map(str, self.parts)) + ")"


def partitions(n: int) -> list[YoungDiagram]:
    """All Young diagrams of area n in increasing lexicographic order."""

    def gen(remaining, cap):
        if remaining == 0:
            yield ()
            return
        for first in range(min(remaining, cap), 0, -1):
            for rest in gen(remaining - first, first):
                yield (first,) + rest

    return sorted(YoungDiagram(p) for p in gen(n, n))


def stratum_of(multiplicities) -> YoungDiagram:
    return YoungDiagram(tuple(sorted(multiplicities, reverse=True)))


def orthogonal_complement(vectors: np.ndarray, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal rows spanning the complement of the columns of ``vectors``.

    ``vectors`` has shape (..., dim, k).  Returns (normals (..., dim-k, dim),
    relative rank margin (...,)) where the margin is min|R_ii| / max|R_ii|.
    """
    k = vectors.shape[-1]
    batch = vectors.shape[:-2]
    if k == 0:
        return np.broadcast_to(np.eye(dim), batch + (dim, dim)).copy(), np.ones(batch)
    q, r = np.linalg.qr(vectors, mode="complete")
    diag = np.abs(np.diagonal(r[..., :k, :k], axis1=-2, axis2=-1))
    margin = diag.min(axis=-1) / np.maximum(diag.max(axis=-1), np.finfo(float).tiny)
    return np.swapaxes(q[..., :, k:], -1, -2), margin


def osculating_constraints(curve: TrigCurve, t, multiplicity: int = 1):
    """Equations A x = b cutting out gamma(t) + span(gamma', ..., gamma^{(2n-2m)}).

    Returns (A (..., 2m, 2n), b (..., 2m), rank margin).
    """
    n = curve.half_dim
    span_order = 2 * n - 2 * multiplicity
    d = curve.derivatives(t, max(span_order, 0))
    span = np.swapaxes(d[..., 1 : span_order + 1, :], -1, -2)
    normals, margin = orthogonal_complement(span, curve.dim)
    offsets = np.einsum("...ij,...j->...i", normals, d[..., 0, :])
    return normals, offsets, margin


@dataclass(frozen=True)
class OsculatingSubspace:
    t: float
    base: np.ndarray
    span: np.ndarray  # (2n-2, 2n), rows gamma'..gamma^{(2n-2)}
    normals: np.ndarray  # (2, 2n), orthonormal
    offsets: np.ndarray  # (2,)

    def residual(self, x) -> np.ndarray:
        return self.normals @ np.asarray(x, dtype=float) - self.offsets


def osculating_subspace(curve: TrigCurve, t: float) -> OsculatingSubspace:
    n = curve.half_dim
    d = curve.derivatives(float(t), 2 * n - 2)
    normals, offsets, margin = osculating_constraints(curve, float(t))
    if margin < RANK_TOL:
        raise DegenerateFrameError(f"derivative span is rank deficient at t={t!r}")
    return OsculatingSubspace(canonical_angle(float(t)), d[0].copy(), d[1:].copy(), normals, offsets)


def cluster_angles(ts, tau: float = TAU_DIAG) -> list[tuple[float, int]]:
    """Group angles that coincide (cyclically) within tau.

    Returns (representative, multiplicity) pairs in increasing order of the
    representative; the representative is the first angle of each cluster
    in cyclic order, which makes the result independent of input order.
    """
    a = np.sort(canonical_angle(np.asarray(ts, dtype=float).ravel()))
    if a.size == 0:
        return []
    groups = [[a[0]]]
    for x in a[1:]:
        if x - groups[-1][-1] <= tau:
            groups[-1].append(x)
        else:
            groups.append([x])
    if len(groups) > 1 and a[0] + TWO_PI - a[-1] <= tau:
        groups[0] = groups.pop() + groups[0]
    return sorted((float(g[0]), len(g)) for g in groups)


def gamma_system(curve: TrigCurve, ts: np.ndarray, multiplicities):
    """Reduced linear system for Gamma on batches of clustered tuples.

    The first cluster (t_0, m_0) is the base: the unknown point is written as
    x = gamma(t_0) + sum_j a_j gamma^{(j)}(t_0), j = 1..2n-2m_0, which lies in
    its osculating subspace by construction.  Each other cluster contributes
    the equations N_i (x - gamma(t_i)) = 0.  Inner products against
    gamma^{(j)}(t_0) are rewritten through exact differences
    gamma^{(j)}(t_0) - gamma^{(j)}(t_i) wherever N_i annihilates
    gamma^{(j)}(t_i), which keeps nearly coincident clusters accurate.

    ``ts`` has shape (B, r) with one column per cluster.  Returns
    (M (B, k, k), rhs (B, k), basis (B, k, 2n), base point (B, 2n)).
    """
    ts = np.asarray(ts, dtype=float)
    if sum(multiplicities) != curve.half_dim:
        raise ValueError("multiplicities must sum to n")
    dim = curve.dim
    k0 = dim - 2 * multiplicities[0]
    d0 = curve.derivatives(ts[:, 0], k0)
    rows, rhs = [], []
    for col in range(1, len(multiplicities)):
        m = multiplicities[col]
        normals, _, _ = osculating_constraints(curve, ts[:, col], m)
        diffs = curve.differences(ts[:, 0], ts[:, col], k0)
        vanishing = dim - 2 * m
        block = np.empty(normals.shape[:-1] + (k0,))
        for j in range(1, k0 + 1):
            vec = -diffs[:, j] if j <= vanishing else d0[:, j]
            block[..., j - 1] = np.einsum("bij,bj->bi", normals, vec)
        rows.append(block)
        rhs.append(np.einsum("bij,bj->bi", normals, diffs[:, 0]))
    return np.concatenate(rows, axis=-2), np.concatenate(rhs, axis=-1), d0[:, 1:], d0[:, 0]


def system_condition(m: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Smallest singular value of the reduced system against the basis scale.

    Column scaling would hide a matrix that is uniformly at rounding level,
    so the reference is the largest derivative in the base frame.
    """
    ref = np.linalg.norm(basis, axis=-1).max(axis=-1)
    smin = np.linalg.svd(m, compute_uv=False)[..., -1]
    with np.errstate(divide="ignore"):
        return np.where(smin > 0, ref / smin, np.inf)


def gamma_batch(curve: TrigCurve, ts, multiplicities=None, return_condition: bool = False):
    """Gamma on a batch of tuples with a fixed coincidence pattern.

    ``ts`` (B, r); ``multiplicities`` defaults to all ones (r = n).
    Singular systems produce NaN rows instead of raising.  With
    ``return_condition`` the per-tuple condition numbers are returned too.
    """
    ts = np.atleast_2d(np.asarray(ts, dtype=float))
    if multiplicities is None:
        multiplicities = (1,) * ts.shape[1]
    if len(multiplicities) == 1:
        pts = curve(ts[:, 0])
        return (pts, np.ones(len(ts))) if return_condition else pts
    m, rhs, basis, base = gamma_system(curve, ts, multiplicities)
    try:
        coef = np.linalg.solve(m, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError:
        coef = np.full(rhs.shape, np.nan)
        for i in range(len(rhs)):
            try:
                coef[i] = np.linalg.solve(m[i], rhs[i])
            except np.linalg.LinAlgError:
                pass
    pts = base + np.einsum("bj,bji->bi", coef, basis)
    if not return_condition:
        return pts
    cond = system_condition(m, basis)
    pts[cond > COND_LIMIT] = np.nan
    return pts, cond


def gamma_map(curve: TrigCurve, ts, tau: float = TAU_DIAG) -> np.ndarray:
    """The associated map Gamma(t_1, ..., t_n), symmetric in its arguments.

    Angles within ``tau`` of each other are merged.  Separated but very close
    angles make the system ill-conditioned (the condition number grows like
    gap**-3), so gaps much below 1e-5 raise SingularSystemError.
    """
    ts = np.asarray(ts, dtype=float).ravel()
    if ts.size != curve.half_dim:
        raise ValueError(f"expected {curve.half_dim} angles, got {ts.size}")
    clusters = cluster_angles(ts, tau)
    if len(clusters) == 1:
        return curve(clusters[0][0])
    reps = np.array([[c[0] for c in clusters]])
    mults = tuple(c[1] for c in clusters)
    m, rhs, basis, base = gamma_system(curve, reps, mults)
    cond = float(system_condition(m, basis)[0])
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularSystemError(
            f"osculating subspaces do not meet in a point at ts={ts.tolist()} (cond={cond:.3e})", cond
        )
    return base[0] + np.linalg.solve(m[0], rhs[0]) @ basis[0]


def pad_repeated(ts, n: int) -> np.ndarray:
    """(t_1, ..., t_{j-1}, t_j, ..., t_j) with the last angle repeated n-j+1 times."""
    ts = np.asarray(ts, dtype=float).ravel()
    j = ts.size
    if not 1 <= j <= n:
        raise ValueError(f"need 1 <= len(ts) <= n, got {j} angles for n={n}")
    return np.concatenate([ts, np.full(n - j, ts[-1])])


def gamma_map_repeated(curve: TrigCurve, ts, n: int | None = None, tau: float = TAU_DIAG) -> np.ndarray:
    n = curve.half_dim if n is None else n
    return gamma_map(curve, pad_repeated(ts, n), tau)


def _central_difference(curve: TrigCurve, ts: np.ndarray, h: float) -> np.ndarray:
    """Central differences of Gamma in every argument, shape (B, 2n, n)."""
    bsz, n = ts.shape
    shifted = np.empty((2, n, bsz, n))
    for i in range(n):
        for k, sign in enumerate((1.0, -1.0)):
            s = ts.copy()
            s[:, i] += sign * h
            shifted[k, i] = s
    vals = gamma_batch(curve, shifted.reshape(-1, n)).reshape(2, n, bsz, curve.dim)
    diff = (vals[0] - vals[1]) / (2.0 * h)  # (n, B, 2n)
    return np.transpose(diff, (1, 2, 0))


def jacobian_batch(curve: TrigCurve, ts, step: float = 1e-4) -> np.ndarray:
    """Richardson-extrapolated central differences of Gamma, shape (B, 2n, n)."""
    ts = np.atleast_2d(np.asarray(ts, dtype=float))
    d1 = _central_difference(curve, ts, step)
    d2 = _central_difference(curve, ts, step / 2.0)
    return (4.0 * d2 - d1) / 3.0


def min_circular_gap(ts) -> float:
    ts = np.asarray(ts, dtype=float).ravel()
    if ts.size < 2:
        return math.inf
    gaps = [abs(canonical_angle(a - b)) for a, b in combinations(ts, 2)]
    return min(min(g, TWO_PI - g) for g in gaps)


def gamma_jacobian(curve: TrigCurve, ts, step: float = 1e-4) -> np.ndarray:
    """d Gamma / d t_i as the columns of a (2n, n) matrix."""
    ts = np.asarray(ts, dtype=float).ravel()
    if ts.size != curve.half_dim:
        raise ValueError(f"expected {curve.half_dim} angles, got {ts.size}")
    if min_circular_gap(ts) <= 4 * step:
        raise ValueError(f"tuple {ts.tolist()} is within 4*step of the diagonal")
    jac = jacobian_batch(curve, ts[None, :], step)[0]
    if not np.all(np.isfinite(jac)):
        raise SingularSystemError(f"Gamma is singular near ts={ts.tolist()}")
    return jac


@dataclass(frozen=True)
class MuHyperplane:
    """{x : <normal, x> = offset}, oriented so the curve has value >= 0."""

    normal: np.ndarray
    offset: float
    diagram: YoungDiagram
    ts: tuple[float, ...]

    def value(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.normal - self.offset


def mu_conditions(curve: TrigCurve, diagram: YoungDiagram, ts) -> np.ndarray:
    """Rows of the homogeneous tangency system, shape (..., 2n-1, 2n).

    gamma^{(j)}(t_i) for j = 1..2k_i-1, then gamma(t_i) - gamma(t_1) for
    i >= 2.  Rows are scaled to unit length.
    """
    ts = np.asarray(ts, dtype=float)
    if diagram.area != curve.half_dim:
        raise ValueError(f"diagram {diagram} has area {diagram.area}, need {curve.half_dim}")
    if ts.shape[-1] != diagram.length:
        raise ValueError(f"diagram {diagram} needs {diagram.length} angles")
    top = 2 * max(diagram.parts) - 1
    d = curve.derivatives(ts, top)  # (..., r, top+1, 2n)
    rows = [d[..., i, 1 : 2 * k, :] for i, k in enumerate(diagram.parts)]
    if diagram.length > 1:
        rows.append(d[..., 1:, 0, :] - d[..., :1, 0, :])
    m = np.concatenate(rows, axis=-2)
    norms = np.linalg.norm(m, axis=-1, keepdims=True)
    return m / np.maximum(norms, np.finfo(float).tiny)


def mu_normals_batch(curve: TrigCurve, diagram: YoungDiagram, ts, rank_tol: float = 1e-9):
    """Unit normals and offsets of mu-hyperplanes for a batch of tuples.

    Orientation puts the curve centroid on the positive side, which for a
    support hyperplane is the side containing the curve.  Returns
    (normals (B, 2n), offsets (B,), valid mask (B,)).
    """
    ts = np.atleast_2d(np.asarray(ts, dtype=float))
    m = mu_conditions(curve, diagram, ts)
    _, s, vh = np.linalg.svd(m)
    normals = vh[..., -1, :]
    valid = s[..., -1] > rank_tol * s[..., 0]
    base = curve(ts[:, 0])
    offsets = np.einsum("bi,bi->b", normals, base)
    side = normals @ curve.centroid - offsets
    sign = np.where(side < 0, -1.0, 1.0)
    valid &= np.abs(side) > 1e-12
    return normals * sign[:, None], offsets * sign, valid


def mu_hyperplane(curve: TrigCurve, diagram: YoungDiagram, ts, grid: int = 4096) -> MuHyperplane:
    """The support hyperplane tangent at gamma(t_i) with multiplicity 2 k_i."""
    ts = np.asarray(ts, dtype=float).ravel()
    if ts.size > 1 and min_circular_gap(ts) <= TAU_DIAG:
        raise ValueError(f"tangency angles must be pairwise distinct: {ts.tolist()}")
    m = mu_conditions(curve, diagram, ts)
    _, s, vh = np.linalg.svd(m)
    if s[-1] <= 1e-9 * s[0]:
        raise DegenerateFrameError(
            f"tangency conditions for {diagram} at {ts.tolist()} leave more than one normal direction"
        )
    normal = vh[-1]
    offset = float(normal @ curve(ts[0]))
    values = curve(np.arange(grid) * (TWO_PI / grid)) @ normal - offset
    scale = float(np.max(np.abs(values)))
    if scale < 1e-12:
        raise DegenerateFrameError("hyperplane contains the whole curve sample")
    pos = np.count_nonzero(values > 1e-12 * scale)
    neg = np.count_nonzero(values < -1e-12 * scale)
    if pos == neg:
        raise DegenerateFrameError("cannot orient hyperplane: curve sample splits evenly")
    if neg > pos:
        normal, offset = -normal, -offset
    return MuHyperplane(normal, offset, diagram, tuple(canonical_angle(ts).tolist()))


@dataclass(frozen=True)
class SpanningSubspace:
    diagram: YoungDiagram
    ts: tuple[float, ...]
    base: np.ndarray
    span: np.ndarray  # rows, linearly independent
    codimension: int


def spanning_vectors(curve: TrigCurve, diagram: YoungDiagram, ts) -> np.ndarray:
    """Chords gamma(t_i) - gamma(t_1) and gamma^{(j)}(t_i), j = 1..2k_i-2."""
    ts = np.asarray(ts, dtype=float).ravel()
    top = max(2 * max(diagram.parts) - 2, 0)
    d = curve.derivatives(ts, top)
    rows = []
    for i in range(1, ts.size):
        rows.append(d[i, 0] - d[0, 0])
    for i, k in enumerate(diagram.parts):
        rows.extend(d[i, 1 : 2 * k - 1])
    return np.array(rows).reshape(-1, curve.dim)


def spanning_subspace(curve: TrigCurve, diagram: YoungDiagram, ts) -> SpanningSubspace:
    """L_mu(t_1, ..., t_r) for the doubled diagram 2 mu; codimension r + 1."""
    ts = np.asarray(ts, dtype=float).ravel()
    if diagram.area != curve.half_dim:
        raise ValueError(f"diagram {diagram} has area {diagram.area}, need {curve.half_dim}")
    if ts.size != diagram.length:
        raise ValueError(f"diagram {diagram} needs {diagram.length} angles")
    if ts.size > 1 and min_circular_gap(ts) <= TAU_DIAG:
        raise ValueError(f"angles must be pairwise distinct: {ts.tolist()}")
    span = spanning_vectors(curve, diagram, ts)
    expected = curve.dim - diagram.length - 1
    if span.shape[0] != expected:
        raise AssertionError("spanning set has the wrong size")  # pragma: no cover
    if expected:
        sv = np.linalg.svd(span / np.linalg.norm(span, axis=1, keepdims=True), compute_uv=False)
        if sv[-1] <= RANK_TOL * sv[0]:
            raise DegenerateFrameError(
                f"spanning set for {diagram} at {ts.tolist()} is rank deficient (curve not generic here)"
            )
    return SpanningSubspace(
        diagram, tuple(canonical_angle(ts).tolist()), curve(ts[0]), span, curve.dim - expected
    )
