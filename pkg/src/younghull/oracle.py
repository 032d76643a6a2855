"""Membership tests for Young hulls, skeleton sampling and Monte Carlo volumes.

These routines never touch the volume integrals: a point is in a Young hull
iff it lies on the curve side of every support hyperplane of the given type,
and the tests below sample those hyperplanes directly.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations, combinations_with_replacement, permutations

import numpy as np
from scipy.optimize import linprog, minimize
from scipy.spatial import ConvexHull

from . import frames
from .frames import YoungDiagram, partitions
from .trigcurve import TWO_PI, TrigCurve

MEMBERSHIP_TOL = 1e-8
MC_CHUNK = 1 << 15
INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class FeasibilityError(RuntimeError):
    """The LP solver stopped without deciding feasibility."""


def _dot_rows(points: np.ndarray, normals: np.ndarray) -> np.ndarray:
    """points @ normals.T with a fixed summation order (chunk-size independent)."""
    out = points[:, :1] * normals[:, 0]
    for k in range(1, points.shape[1]):
        out = out + points[:, k : k + 1] * normals[:, k]
    return out


def osculating_normals(curve: TrigCurve, t) -> tuple[np.ndarray, np.ndarray]:
    """Unit normals of the osculating hyperplanes, oriented towards the curve.

    The normal at t is the cofactor vector of gamma'(t), ..., gamma^{(2n-1)}(t),
    which depends smoothly on t.  Returns (normals (..., 2n), offsets (...)).
    """
    t = np.asarray(t, dtype=float)
    dim = curve.dim
    d = curve.derivatives(t, dim - 1)
    mat = np.zeros(t.shape + (dim, dim))
    mat[..., :, : dim - 1] = np.swapaxes(d[..., 1:, :], -1, -2)
    normals = np.empty(t.shape + (dim,))
    for i in range(dim):
        mat[..., :, dim - 1] = 0.0
        mat[..., i, dim - 1] = 1.0
        normals[..., i] = np.linalg.det(mat)
    normals /= np.linalg.norm(normals, axis=-1, keepdims=True)
    offsets = np.einsum("...i,...i->...", normals, d[..., 0, :])
    side = normals @ curve.centroid - offsets
    sign = np.where(side < 0, -1.0, 1.0)
    return normals * sign[..., None], offsets * sign


class EllipticHullOracle:
    """Signed distance-like margins against all osculating hyperplanes.

    margin(p) = min_t <N(t), p - gamma(t)> with unit normals N(t).  The min
    is first taken over ``grid`` angles; points whose grid margin is small
    enough that the grid could have missed the true minimum are refined by
    golden-section search around the best grid minima.
    """

    def __init__(self, curve: TrigCurve, grid: int = 512, tol: float = MEMBERSHIP_TOL, iterations: int = 40):
        if grid < 16:
            raise ValueError("grid must be >= 16")
        self.curve = curve
        self.grid = grid
        self.tol = tol
        self.iterations = iterations
        self.ts = np.arange(grid) * (TWO_PI / grid)
        self.normals, self.offsets = osculating_normals(curve, self.ts)

    def _values_at(self, points, t):
        normals, offsets = osculating_normals(self.curve, t)
        return np.einsum("bi,bi->b", normals, points) - offsets

    def _golden(self, points, lo, hi):
        a, b = lo.copy(), hi.copy()
        for _ in range(self.iterations):
            c = b - INV_GOLDEN * (b - a)
            d = a + INV_GOLDEN * (b - a)
            left = self._values_at(points, c) < self._values_at(points, d)
            b = np.where(left, d, b)
            a = np.where(left, a, c)
        mid = 0.5 * (a + b)
        return self._values_at(points, mid), mid

    def margins(self, points, refine: bool = True, full: bool = False, chunk: int = 4096) -> np.ndarray:
        """Margins of ``points`` (shape (B, 2n)).

        By default only points whose classification could change are
        refined; grid margins below -tol are already conclusive.  ``full``
        refines every point around its two lowest grid minima, which gives
        accurate margin values everywhere at a higher cost.
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.empty(len(points))
        for s in range(0, len(points), chunk):
            out[s : s + chunk] = self._margins_chunk(points[s : s + chunk], refine, full)
        return out

    def _margins_chunk(self, points, refine, full):
        vals = _dot_rows(points, self.normals) - self.offsets
        k = np.argmin(vals, axis=1)
        rows = np.arange(len(points))
        gmin = vals[rows, k]
        if not refine:
            return gmin
        second = np.abs(np.roll(vals, -1, axis=1) - 2 * vals + np.roll(vals, 1, axis=1))
        # grid min exceeds the true min by at most max|phi''| h^2 / 8
        band = 0.5 * second.max(axis=1) + 10 * self.tol
        todo = np.arange(len(points)) if full else np.flatnonzero((gmin < band) & (gmin >= -self.tol))
        if todo.size == 0:
            return gmin
        h = TWO_PI / self.grid
        sub = vals[todo]
        is_min = (sub <= np.roll(sub, 1, axis=1)) & (sub <= np.roll(sub, -1, axis=1))
        ranked = np.where(is_min, sub, np.inf)
        order = np.argsort(ranked, axis=1)[:, :2]
        result = gmin.copy()
        for col in range(order.shape[1]):
            idx = order[:, col]
            cand = ranked[np.arange(todo.size), idx]
            use = np.isfinite(cand) & (full | (cand < gmin[todo] + band[todo]))
            if not np.any(use):
                continue
            sel = todo[use]
            t0 = self.ts[idx[use]]
            refined, _ = self._golden(points[sel], t0 - h, t0 + h)
            result[sel] = np.minimum(result[sel], refined)
        return result

    def __call__(self, points) -> np.ndarray:
        return self.margins(points) >= -self.tol


def membership_eh(curve: TrigCurve, p, grid: int = 512) -> float:
    """Margin of p against the elliptic hull; p is inside iff margin >= -1e-8."""
    point = np.asarray(p, dtype=float)[None, :]
    return float(EllipticHullOracle(curve, grid).margins(point, full=True)[0])


def tuple_grid(diagram: YoungDiagram, grid_per_axis: int) -> np.ndarray:
    """Pairwise distinct angle tuples for a diagram, one per hyperplane.

    Angles come from a common grid of ``grid_per_axis`` points.  Tuples that
    differ only by permuting angles attached to equal parts describe the same
    hyperplane, so only one ordering is kept.
    """
    r = diagram.length
    h = TWO_PI / grid_per_axis
    rows = []
    for combo in combinations(range(grid_per_axis), r):
        seen = set()
        for perm in permutations(combo):
            key = tuple(sorted(zip(diagram.parts, perm)))
            if key in seen:
                continue
            seen.add(key)
            rows.append(perm)
    return (np.array(rows, dtype=float) + 0.5) * h


class YoungHullOracle:
    """Margins against the mu-type support hyperplanes on a tuple grid."""

    def __init__(
        self, curve: TrigCurve, diagram: YoungDiagram, grid_per_axis: int = 64, tol: float = MEMBERSHIP_TOL
    ):
        if diagram.area != curve.half_dim:
            raise ValueError(f"diagram {diagram} has area {diagram.area}, need {curve.half_dim}")
        self.curve = curve
        self.diagram = diagram
        self.tol = tol
        self.grid_per_axis = grid_per_axis
        if diagram.length == 1:
            self._eh = EllipticHullOracle(curve, max(grid_per_axis, 16), tol)
            self.skipped = 0
            return
        self._eh = None
        tuples = tuple_grid(diagram, grid_per_axis)
        normals, offsets, valid = frames.mu_normals_batch(curve, diagram, tuples)
        self.skipped = int(np.count_nonzero(~valid))
        self.tuples = tuples[valid]
        self.normals = normals[valid]
        self.offsets = offsets[valid]

    def _value(self, p, ts):
        n, off, ok = frames.mu_normals_batch(self.curve, self.diagram, np.asarray(ts)[None, :])
        if not ok[0]:
            return np.inf
        return float(n[0] @ p - off[0])

    def margins(self, points, refine: bool = True, band: float = 5e-3, full: bool = False) -> np.ndarray:
        """Grid margins, refined by Nelder-Mead for points within ``band`` of 0.

        ``full=True`` refines every point, giving an accurate signed margin
        instead of one that is only reliable for classification.
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if self._eh is not None:
            return self._eh.margins(points, refine, full=full)
        out = np.empty(len(points))
        arg = np.empty(len(points), dtype=int)
        for s in range(0, len(points), 2048):
            vals = _dot_rows(points[s : s + 2048], self.normals) - self.offsets
            arg[s : s + 2048] = np.argmin(vals, axis=1)
            out[s : s + 2048] = vals[np.arange(len(vals)), arg[s : s + 2048]]
        if refine:
            todo = np.arange(len(out)) if full else np.flatnonzero(np.abs(out) < band)
            for i in todo:
                p = points[i]
                res = minimize(
                    lambda ts: self._value(p, ts),
                    self.tuples[arg[i]],
                    method="Nelder-Mead",
                    options={"xatol": 1e-9, "fatol": 1e-12, "maxiter": 400},
                )
                if np.isfinite(res.fun):
                    out[i] = min(out[i], float(res.fun))
        return out

    def __call__(self, points) -> np.ndarray:
        return self.margins(points) >= -self.tol


def membership_yh(curve: TrigCurve, diagram: YoungDiagram, p, grid_per_axis: int = 64) -> float:
    oracle = YoungHullOracle(curve, diagram, grid_per_axis)
    return float(oracle.margins(np.asarray(p, dtype=float)[None, :], full=True)[0])


def curve_samples(curve: TrigCurve, samples: int) -> np.ndarray:
    return curve(np.arange(samples) * (TWO_PI / samples))


def in_convex_hull_lp(cloud: np.ndarray, p) -> bool:
    """Is p a convex combination of the rows of ``cloud``?  (HiGHS LP.)"""
    cloud = np.asarray(cloud, dtype=float)
    a_eq = np.vstack([cloud.T, np.ones(len(cloud))])
    b_eq = np.append(np.asarray(p, dtype=float), 1.0)
    res = linprog(np.zeros(len(cloud)), A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if res.status == 0:
        return True
    if res.status == 2:
        return False
    raise FeasibilityError(f"LP solver did not converge (status {res.status}: {res.message})")


def membership_ch(curve: TrigCurve, p, samples: int = 512) -> bool:
    """Inner test: p in the convex hull of ``samples`` equally spaced curve points."""
    if samples < curve.dim + 1:
        raise ValueError(f"need at least {curve.dim + 1} samples")
    return in_convex_hull_lp(curve_samples(curve, samples), p)


class PointCloudHull:
    """Facet representation of conv(points) for fast vectorized membership.

    Large clouds also get an inner hull built from a fixed subsample: any
    point inside it is inside the full hull, so only the thin shell between
    the two pays for the full facet scan.
    """

    def __init__(self, points, tol: float = 1e-10, inner_size: int = 512):
        self.points = np.asarray(points, dtype=float)
        self.tol = tol
        hull = ConvexHull(self.points)
        self.volume = float(hull.volume)
        rng = np.random.default_rng(0)
        # a fixed shuffle spreads each block over the whole boundary, so
        # outside points are rejected within the first block or two
        eq = hull.equations[rng.permutation(len(hull.equations))]
        self.normals, self.offsets = eq[:, :-1], -eq[:, -1]
        self.inner = None
        if len(self.points) > 4 * inner_size:
            pick = rng.choice(len(self.points), inner_size, replace=False)
            self.inner = PointCloudHull(self.points[pick], tol=-tol, inner_size=inner_size)

    def _scan(self, points, block):
        inside = np.ones(len(points), dtype=bool)
        live = np.arange(len(points))
        for s in range(0, len(self.normals), block):
            if live.size == 0:
                break
            vals = points[live] @ self.normals[s : s + block].T - self.offsets[s : s + block]
            ok = vals.max(axis=1) <= self.tol
            inside[live[~ok]] = False
            live = live[ok]
        return inside

    def contains(self, points, block: int = 1024) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if self.inner is None:
            return self._scan(points, block)
        inside = self.inner.contains(points, block)
        rest = np.flatnonzero(~inside)
        inside[rest] = self._scan(points[rest], block)
        return inside

    __call__ = contains


@dataclass(frozen=True)
class SkeletonSample:
    ts: tuple[float, ...]
    point: np.ndarray
    stratum: YoungDiagram


def _runs(index_tuple):
    runs = []
    for i in index_tuple:
        if runs and runs[-1][0] == i:
            runs[-1][1] += 1
        else:
            runs.append([i, 1])
    return runs


def skeleton_sample(curve: TrigCurve, grid_per_axis: int = 128) -> tuple[list[SkeletonSample], int]:
    """Gamma over all sorted tuples of a common angle grid (diagonals included).

    Returns the samples and the number of tuples whose solve failed.
    """
    n = curve.half_dim
    h = TWO_PI / grid_per_axis
    groups: dict[tuple[int, ...], list[tuple[int, ...]]] = {}
    for combo in combinations_with_replacement(range(grid_per_axis), n):
        mults = tuple(m for _, m in _runs(combo))
        groups.setdefault(mults, []).append(combo)
    samples, failures = [], 0
    for mults, combos in groups.items():
        reps = np.array([[i for i, _ in _runs(c)] for c in combos], dtype=float) * h
        pts, cond = frames.gamma_batch(curve, reps, mults, return_condition=True)
        stratum = frames.stratum_of(mults)
        for combo, pt in zip(combos, pts):
            if not np.all(np.isfinite(pt)):
                failures += 1
                continue
            samples.append(SkeletonSample(tuple(i * h for i in combo), pt, stratum))
    samples.sort(key=lambda s: s.ts)
    return samples, failures


def bounding_box(curve: TrigCurve, grid_per_axis: int = 64, pad: float = 0.1) -> tuple[np.ndarray, np.ndarray]:
    """Box around the skeleton and curve samples, padded by ``pad`` of the extent per side."""
    samples, _ = skeleton_sample(curve, grid_per_axis)
    pts = np.vstack([np.array([s.point for s in samples]), curve_samples(curve, 4 * grid_per_axis)])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    width = hi - lo
    return lo - pad * width, hi + pad * width


@dataclass(frozen=True)
class McEstimate:
    volume: float
    stderr: float
    hits: int
    trials: int
    seed: int
    box: tuple[tuple[float, ...], tuple[float, ...]]

    def to_dict(self) -> dict:
        return {
            "volume": self.volume,
            "stderr": self.stderr,
            "hits": self.hits,
            "trials": self.trials,
            "seed": self.seed,
            "box": [list(self.box[0]), list(self.box[1])],
        }


def _chunk_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def mc_volume(membership, box, trials: int, seed: int = 0, threads: int = 1) -> McEstimate:
    """Hit-or-miss volume estimate of {p in box : membership(p)}.

    Trials are split into fixed chunks, each with its own counter-based
    stream keyed by (seed, chunk index), so results do not depend on the
    thread count.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    lo, hi = (np.asarray(b, dtype=float) for b in box)
    width = hi - lo
    if np.any(width <= 0):
        raise ValueError("box must have positive extent in every coordinate")

    def run(index):
        count = min(MC_CHUNK, trials - index * MC_CHUNK)
        pts = lo + width * _chunk_rng(seed, index).random((count, lo.size))
        return int(np.count_nonzero(membership(pts)))

    n_chunks = -(-trials // MC_CHUNK)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            hits = sum(pool.map(run, range(n_chunks)))
    else:
        hits = sum(run(i) for i in range(n_chunks))
    box_volume = float(np.prod(width))
    p = hits / trials
    if hits == 0:
        warnings.warn("Monte Carlo run produced zero hits; the box probably misses the body", RuntimeWarning)
    return McEstimate(
        box_volume * p,
        box_volume * math.sqrt(p * (1 - p) / trials),
        hits,
        trials,
        seed,
        (tuple(lo.tolist()), tuple(hi.tolist())),
    )


@dataclass
class NestingReport:
    violations: int
    excluded: int
    checked: int
    diagrams: list[YoungDiagram]
    per_pair: dict = field(default_factory=dict)
    inside: dict = field(default_factory=dict)


def nesting_check(
    curve: TrigCurve,
    points: int,
    seed: int = 0,
    grid_per_axis: int | None = None,
    band: float = 1e-4,
    box=None,
) -> NestingReport:
    """Check YH(mu) within YH(nu) for consecutive diagrams in lexicographic order.

    Points whose margin for either diagram of a pair lies within ``band`` of
    zero are excluded from that pair and counted.
    """
    n = curve.half_dim
    diagrams = partitions(n)
    if len(diagrams) < 2:
        return NestingReport(0, 0, points, diagrams)
    if grid_per_axis is None:
        grid_per_axis = {2: 96, 3: 40}.get(n, 24)
    lo, hi = bounding_box(curve, 32) if box is None else box
    rng = _chunk_rng(seed, 0)
    pts = lo + (hi - lo) * rng.random((points, curve.dim))
    margins = {}
    for d in diagrams:
        grid = 512 if d.length == 1 else grid_per_axis
        margins[d] = YoungHullOracle(curve, d, grid).margins(pts)
    violations = excluded = 0
    per_pair = {}
    for small, big in zip(diagrams, diagrams[1:]):
        ms, mb = margins[small], margins[big]
        ambiguous = (np.abs(ms) <= band) | (np.abs(mb) <= band)
        bad = (ms > band) & (mb < -band) & ~ambiguous
        per_pair[f"{small}<{big}"] = {"violations": int(bad.sum()), "excluded": int(ambiguous.sum())}
        violations += int(bad.sum())
        excluded += int(ambiguous.sum())
    inside = {str(d): int(np.count_nonzero(m >= -MEMBERSHIP_TOL)) for d, m in margins.items()}
    return NestingReport(violations, excluded, points, diagrams, per_pair, inside)


@dataclass(frozen=True)
class RulingPoint:
    ts: tuple[float, ...]
    point: np.ndarray
    diagram: YoungDiagram


def export_ruling(
    curve: TrigCurve,
    diagram: YoungDiagram,
    grid: int = 32,
    rays_per_subspace: int = 8,
    seed: int = 0,
    box=None,
) -> tuple[list[RulingPoint], int]:
    """Points on the spanning subspaces L_mu(t_1..t_r) inside the padded box.

    Each subspace gets ``rays_per_subspace`` points: a random unit direction
    in the span and a uniform distance up to where the ray leaves the box.
    Returns the points and the number of tuples skipped for rank failures.
    """
    if not isinstance(diagram, YoungDiagram):
        diagram = YoungDiagram(tuple(diagram))
    lo, hi = bounding_box(curve, 32) if box is None else box
    rng = _chunk_rng(seed, 0)
    out, skipped = [], 0
    for ts in tuple_grid(diagram, grid):
        try:
            sub = frames.spanning_subspace(curve, diagram, ts)
        except frames.DegenerateFrameError:
            skipped += 1
            continue
        if sub.span.shape[0] == 0:  # the subspace is a single point
            out.append(RulingPoint(tuple(ts.tolist()), sub.base.copy(), diagram))
            continue
        q, _ = np.linalg.qr(sub.span.T)
        for _ in range(rays_per_subspace):
            u = q @ rng.standard_normal(q.shape[1])
            u /= np.linalg.norm(u)
            with np.errstate(divide="ignore", invalid="ignore"):
                steps = np.where(u > 0, (hi - sub.base) / u, np.where(u < 0, (lo - sub.base) / u, np.inf))
            reach = max(float(np.min(steps)), 0.0)
            out.append(RulingPoint(tuple(ts.tolist()), sub.base + rng.random() * reach * u, diagram))
    return out, skipped
