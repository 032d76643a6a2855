"""Volumes of the convex and elliptic hulls by periodic quadrature on the torus.

Both hull volumes are integrals of a determinant over T^n = (S^1)^n.  The
integrands are smooth and periodic, so a tensor-product midpoint rule is
spectrally accurate.  Cell values are computed in fixed-size chunks and
summed with ``math.fsum`` in cell order, which makes the result independent
of the number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import frames
from .trigcurve import TWO_PI, TrigCurve

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
CHUNK_CELLS = 8192
MAX_FAILED_FRACTION = 1e-3


class QuadratureFailure(ArithmeticError):
    """Too many quadrature cells hit a singular Gamma solve."""


def golden_offsets(dims: int) -> tuple[float, ...]:
    """Offsets frac(k * golden ratio), k = 1..dims: distinct and far from rational."""
    return tuple(math.fmod(k * GOLDEN, 1.0) for k in range(1, dims + 1))


@dataclass(frozen=True)
class QuadratureSpec:
    points_per_axis: int
    dims: int
    axis_offsets: tuple[float, ...] = ()

    def __post_init__(self):
        if self.points_per_axis < 8:
            raise ValueError(f"points_per_axis must be >= 8, got {self.points_per_axis}")
        if self.dims < 1:
            raise ValueError("dims must be >= 1")
        offsets = tuple(self.axis_offsets) or golden_offsets(self.dims)
        if len(offsets) != self.dims:
            raise ValueError(f"need {self.dims} axis offsets, got {len(offsets)}")
        if any(not 0.0 < o < 1.0 for o in offsets):
            raise ValueError("axis offsets must lie in (0, 1)")
        if len(set(offsets)) != len(offsets):
            raise ValueError("axis offsets must be pairwise distinct")
        object.__setattr__(self, "axis_offsets", offsets)

    @property
    def cells(self) -> int:
        return self.points_per_axis**self.dims

    @property
    def cell_volume(self) -> float:
        return (TWO_PI / self.points_per_axis) ** self.dims

    def nodes(self, flat_index: np.ndarray) -> np.ndarray:
        """Angles of the cells with the given flat indices, shape (B, dims)."""
        idx = np.unravel_index(flat_index, (self.points_per_axis,) * self.dims)
        h = TWO_PI / self.points_per_axis
        return np.stack([(i + o) * h for i, o in zip(idx, self.axis_offsets)], axis=-1)

    def to_dict(self) -> dict:
        return {"points_per_axis": self.points_per_axis, "dims": self.dims, "axis_offsets": list(self.axis_offsets)}


@dataclass(frozen=True)
class VolumeResult:
    value: float
    signed_raw: float
    grid: QuadratureSpec
    diagnostics: dict = field(default_factory=dict)


def integrate_cells(integrand, spec: QuadratureSpec, threads: int = 1):
    """Evaluate ``integrand(ts) -> (values, info)`` over all cells.

    ``info`` is a dict of integer counters and float maxima merged across
    chunks.  Returns (exact-rounded sum of cell values, merged info).
    """
    starts = range(0, spec.cells, CHUNK_CELLS)

    def run(start):
        flat = np.arange(start, min(start + CHUNK_CELLS, spec.cells))
        return integrand(spec.nodes(flat))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, starts))
    else:
        parts = [run(s) for s in starts]
    values = np.concatenate([p[0] for p in parts])
    info: dict = {}
    for _, part in parts:
        for key, val in part.items():
            if isinstance(val, float):
                info[key] = max(info.get(key, -math.inf), val)
            else:
                info[key] = info.get(key, 0) + val
    return math.fsum(values.tolist()), info


def _check_dims(curve: TrigCurve, spec: QuadratureSpec):
    if spec.dims != curve.half_dim:
        raise ValueError(f"quadrature dims {spec.dims} != half dimension {curve.half_dim}")


def convex_hull_integrand(curve: TrigCurve):
    """det[gamma(t_1), ..., gamma(t_n), gamma'(t_1), ..., gamma'(t_n)], centroid at 0."""
    centered = curve.transformed(shift=-curve.centroid)

    def integrand(ts):
        d = centered.derivatives(ts, 1)  # (B, n, 2, 2n)
        cols = np.concatenate([d[:, :, 0, :], d[:, :, 1, :]], axis=1)
        return np.linalg.det(cols), {}

    return integrand


def vol_convex_hull(curve: TrigCurve, spec: QuadratureSpec | None = None, threads: int = 1) -> VolumeResult:
    n = curve.half_dim
    spec = spec or QuadratureSpec(default_points(n), n)
    _check_dims(curve, spec)
    total, info = integrate_cells(convex_hull_integrand(curve), spec, threads)
    signed = total * spec.cell_volume / (math.factorial(n) * math.factorial(2 * n))
    return VolumeResult(abs(signed), signed, spec, {"cells": spec.cells, **info})


def elliptic_prefactor(n: int) -> float:
    """Normalization 1/(2n)! of the elliptic-hull integral."""
    return 1.0 / math.factorial(2 * n)


def elliptic_hull_integrand(curve: TrigCurve, step: float = 1e-4, tau: float = frames.TAU_DIAG):
    """det[Gamma(t_1), Gamma(t_1,t_2,..,t_2), ..., Gamma(t_1..t_n), dGamma/dt_1, ..., dGamma/dt_n].

    Gamma(t_1, .., t_j) pads the last argument to n entries.  Cells within
    ``tau`` of the diagonal contribute 0; cells whose Gamma solve or
    Jacobian is singular contribute 0 and are counted as failures.
    """
    n = curve.half_dim
    centered = curve.transformed(shift=-curve.centroid)

    def integrand(ts):
        bsz = len(ts)
        values = np.zeros(bsz)
        if n == 1:
            d = centered.derivatives(ts[:, 0], 1)
            return np.linalg.det(np.stack([d[:, 0], d[:, 1]], axis=-1)), {}
        gaps = np.full(bsz, np.inf)
        for i in range(n):
            for j in range(i + 1, n):
                g = np.mod(ts[:, i] - ts[:, j], TWO_PI)
                gaps = np.minimum(gaps, np.minimum(g, TWO_PI - g))
        live = gaps > tau
        near = gaps <= 4 * step
        work = ts[live & ~near]
        cols = np.empty((len(work), 2 * n, 2 * n))
        max_cond = 1.0
        for j in range(1, n + 1):
            mults = (1,) * (j - 1) + (n - j + 1,)
            pts, cond = frames.gamma_batch(centered, work[:, :j], mults, return_condition=True)
            cols[:, :, j - 1] = pts
            if len(cond):
                max_cond = max(max_cond, float(np.max(cond[np.isfinite(cond)], initial=1.0)))
        cols[:, :, n:] = frames.jacobian_batch(centered, work, step)
        with np.errstate(invalid="ignore"):
            dets = np.linalg.det(cols)
        bad = ~np.isfinite(dets)
        dets[bad] = 0.0
        values[live & ~near] = dets
        info = {
            "diagonal_cells": int(np.count_nonzero(~live)),
            "near_diagonal_cells": int(np.count_nonzero(live & near)),
            "failed_cells": int(np.count_nonzero(bad)),
            "max_condition": max_cond,
        }
        return values, info

    return integrand


def vol_elliptic_hull(
    curve: TrigCurve, spec: QuadratureSpec | None = None, threads: int = 1, step: float = 1e-4
) -> VolumeResult:
    n = curve.half_dim
    spec = spec or QuadratureSpec(default_points(n), n)
    _check_dims(curve, spec)
    total, info = integrate_cells(elliptic_hull_integrand(curve, step), spec, threads)
    failed = info.get("failed_cells", 0)
    if failed > MAX_FAILED_FRACTION * spec.cells:
        raise QuadratureFailure(f"{failed} of {spec.cells} cells had singular Gamma solves")
    signed = total * spec.cell_volume * elliptic_prefactor(n)
    return VolumeResult(abs(signed), signed, spec, {"cells": spec.cells, **info})


def default_points(n: int) -> int:
    return {1: 512, 2: 256, 3: 48}.get(n, 16)


def arc_length(curve: TrigCurve, samples: int = 1024) -> float:
    """Periodic trapezoid rule for the length; spectrally accurate here."""
    if samples < 64:
        raise ValueError("samples must be >= 64")
    ts = np.arange(samples) * (TWO_PI / samples)
    speed = np.linalg.norm(curve.derivative(ts, 1), axis=-1)
    return math.fsum(speed.tolist()) * (TWO_PI / samples)


def isoperimetric_ratio(
    curve: TrigCurve, spec: QuadratureSpec | None = None, samples: int = 1024, threads: int = 1
) -> float:
    """l^{2n} / ((2 pi n)^n n! (2n)! Vol(CH)); at least 1 for convex curves."""
    n = curve.half_dim
    vol = vol_convex_hull(curve, spec, threads).value
    length = arc_length(curve, samples)
    if vol <= 1e-300 or vol < 1e-14 * length ** (2 * n):
        raise ArithmeticError("convex hull volume vanishes; curve is degenerate")
    return length ** (2 * n) / ((TWO_PI * n) ** n * math.factorial(n) * math.factorial(2 * n) * vol)
