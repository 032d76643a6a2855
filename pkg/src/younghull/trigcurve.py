"""Closed curves in R^{2n} given by finite Fourier series.

Every coordinate is a trigonometric polynomial, so derivatives of any
order are exact and the curve is 2*pi-periodic by construction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

TWO_PI = 2.0 * math.pi


class CurveSpecError(ValueError):
    """Raised for malformed curve descriptions (names, files, coefficients)."""


def canonical_angle(t):
    """Reduce an angle (or array of angles) to [0, 2*pi)."""
    # np.mod can round up to exactly 2*pi for tiny negative inputs
    r = np.mod(t, TWO_PI)
    r = np.where(r >= TWO_PI, 0.0, r)
    return float(r) if r.ndim == 0 else r


@dataclass(frozen=True)
class FourierSeries:
    """a0 + sum_m (cos_coeffs[m-1] cos(m t) + sin_coeffs[m-1] sin(m t))."""

    constant: float
    cos_coeffs: tuple[float, ...] = ()
    sin_coeffs: tuple[float, ...] = ()

    def __post_init__(self):
        cos = tuple(float(c) for c in self.cos_coeffs)
        sin = tuple(float(s) for s in self.sin_coeffs)
        k = max(len(cos), len(sin))
        object.__setattr__(self, "constant", float(self.constant))
        object.__setattr__(self, "cos_coeffs", cos + (0.0,) * (k - len(cos)))
        object.__setattr__(self, "sin_coeffs", sin + (0.0,) * (k - len(sin)))

    @property
    def degree(self) -> int:
        return len(self.cos_coeffs)


@dataclass(frozen=True, eq=False)
class TrigCurve:
    """Closed curve gamma: S^1 -> R^{2n}, one Fourier series per coordinate.

    Coefficients are held as arrays ``constants`` (2n,), ``cos`` and
    ``sin`` (2n, K) where column m-1 multiplies frequency m.
    """

    half_dim: int
    coords: tuple[FourierSeries, ...]
    constants: np.ndarray = field(init=False, repr=False)
    cos: np.ndarray = field(init=False, repr=False)
    sin: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = int(self.half_dim)
        if n < 1:
            raise CurveSpecError(f"half_dim must be >= 1, got {self.half_dim}")
        coords = tuple(self.coords)
        if len(coords) != 2 * n:
            raise CurveSpecError(f"expected {2 * n} coordinate series, got {len(coords)}")
        k = max(1, max(c.degree for c in coords))
        cos = np.zeros((2 * n, k))
        sin = np.zeros((2 * n, k))
        for i, c in enumerate(coords):
            cos[i, : c.degree] = c.cos_coeffs
            sin[i, : c.degree] = c.sin_coeffs
        consts = np.array([c.constant for c in coords], dtype=float)
        if not (np.all(np.isfinite(cos)) and np.all(np.isfinite(sin)) and np.all(np.isfinite(consts))):
            raise CurveSpecError("non-finite Fourier coefficient")
        for arr in (cos, sin, consts):
            arr.setflags(write=False)
        object.__setattr__(self, "half_dim", n)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "constants", consts)
        object.__setattr__(self, "cos", cos)
        object.__setattr__(self, "sin", sin)

    @classmethod
    def from_arrays(cls, constants, cos, sin) -> TrigCurve:
        constants = np.asarray(constants, dtype=float)
        cos = np.atleast_2d(np.asarray(cos, dtype=float))
        sin = np.atleast_2d(np.asarray(sin, dtype=float))
        dim = constants.shape[0]
        if dim % 2:
            raise CurveSpecError(f"ambient dimension must be even, got {dim}")
        coords = tuple(
            FourierSeries(constants[i], tuple(cos[i]), tuple(sin[i])) for i in range(dim)
        )
        return cls(dim // 2, coords)

    @property
    def dim(self) -> int:
        return 2 * self.half_dim

    @property
    def degree(self) -> int:
        return self.cos.shape[1]

    @property
    def centroid(self) -> np.ndarray:
        """Mean of the curve over one period (the constant terms)."""
        return self.constants.copy()

    def derivative(self, t, order: int = 0) -> np.ndarray:
        """gamma^{(order)}(t); returns shape ``np.shape(t) + (2n,)``."""
        return self.derivatives(t, order)[..., order, :]

    def derivatives(self, t, upto: int) -> np.ndarray:
        """Derivatives of orders 0..upto, shape ``np.shape(t) + (upto+1, 2n)``."""
        t = np.asarray(t, dtype=float)
        m = np.arange(1, self.degree + 1, dtype=float)
        phase = t[..., None] * m  # (..., K)
        c, s = np.cos(phase), np.sin(phase)
        out = np.empty(t.shape + (upto + 1, self.dim))
        for j in range(upto + 1):
            # d^j/dt^j cos(mt) = m^j cos(mt + j pi/2), same shift for sin
            scale = m**j
            if j % 4 == 0:
                cj, sj = c, s
            elif j % 4 == 1:
                cj, sj = -s, c
            elif j % 4 == 2:
                cj, sj = -c, -s
            else:
                cj, sj = s, -c
            out[..., j, :] = (cj * scale) @ self.cos.T + (sj * scale) @ self.sin.T
        out[..., 0, :] += self.constants
        return out

    def differences(self, t1, t2, upto: int) -> np.ndarray:
        """gamma^{(j)}(t2) - gamma^{(j)}(t1) for j = 0..upto without cancellation.

        Uses cos u2 - cos u1 = -2 sin(mid) sin(half) and the sine analogue,
        so nearby parameters keep full relative accuracy.
        Shape ``broadcast(t1, t2).shape + (upto+1, 2n)``.
        """
        t1 = np.asarray(t1, dtype=float)
        t2 = np.asarray(t2, dtype=float)
        m = np.arange(1, self.degree + 1, dtype=float)
        half = np.sin(((t2 - t1) / 2.0)[..., None] * m)
        mid = ((t1 + t2) / 2.0)[..., None] * m
        shape = np.broadcast_shapes(t1.shape, t2.shape)
        out = np.empty(shape + (upto + 1, self.dim))
        for j in range(upto + 1):
            u = mid + j * (math.pi / 2.0)
            dc = -2.0 * np.sin(u) * half * m**j
            ds = 2.0 * np.cos(u) * half * m**j
            out[..., j, :] = dc @ self.cos.T + ds @ self.sin.T
        return out

    def __call__(self, t) -> np.ndarray:
        return self.derivative(t, 0)

    def transformed(self, matrix=None, shift=None, scale: float = 1.0) -> TrigCurve:
        """Curve t -> scale * matrix @ gamma(t) + shift."""
        A = np.eye(self.dim) if matrix is None else np.asarray(matrix, dtype=float)
        b = np.zeros(self.dim) if shift is None else np.asarray(shift, dtype=float)
        A = scale * A
        return TrigCurve.from_arrays(A @ self.constants + b, A @ self.cos, A @ self.sin)

    def __add__(self, other: TrigCurve) -> TrigCurve:
        if not isinstance(other, TrigCurve):
            return NotImplemented
        if other.dim != self.dim:
            raise CurveSpecError("cannot add curves of different dimension")
        k = max(self.degree, other.degree)
        pad = lambda a: np.pad(a, ((0, 0), (0, k - a.shape[1])))
        return TrigCurve.from_arrays(
            self.constants + other.constants,
            pad(self.cos) + pad(other.cos),
            pad(self.sin) + pad(other.sin),
        )

    def to_dict(self) -> dict:
        return {
            "half_dim": self.half_dim,
            "coords": [
                {"constant": c.constant, "cos": list(c.cos_coeffs), "sin": list(c.sin_coeffs)}
                for c in self.coords
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> TrigCurve:
        try:
            n = int(data["half_dim"])
            coords = tuple(
                FourierSeries(c.get("constant", 0.0), tuple(c.get("cos", ())), tuple(c.get("sin", ())))
                for c in data["coords"]
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CurveSpecError(f"malformed curve spec: {exc}") from exc
        return cls(n, coords)


@dataclass(frozen=True)
class CurveJet:
    t: float
    derivatives: np.ndarray  # (order+1, 2n)

    @property
    def point(self) -> np.ndarray:
        return self.derivatives[0]

    @property
    def order(self) -> int:
        return len(self.derivatives) - 1


def make_generalized_ellipse(n: int) -> TrigCurve:
    """(sin t, cos t, 1/2 sin 2t, 1/2 cos 2t, ..., 1/n sin nt, 1/n cos nt)."""
    if int(n) != n or n < 1:
        raise CurveSpecError(f"generalized ellipse needs n >= 1, got {n}")
    n = int(n)
    coords = []
    for m in range(1, n + 1):
        zeros = [0.0] * n
        sin_part = list(zeros)
        sin_part[m - 1] = 1.0 / m
        cos_part = list(zeros)
        cos_part[m - 1] = 1.0 / m
        coords.append(FourierSeries(0.0, zeros, sin_part))
        coords.append(FourierSeries(0.0, cos_part, zeros))
    return TrigCurve(n, tuple(coords))


def make_lissajoux(k: int, l: int) -> TrigCurve:
    """(1/k sin kt, 1/k cos kt, 1/l sin lt, 1/l cos lt) in R^4, k < l."""
    if int(k) != k or int(l) != l or k < 1 or l < 1:
        raise CurveSpecError(f"Lissajoux frequencies must be positive integers, got {k}, {l}")
    if k >= l:
        raise CurveSpecError(f"Lissajoux curve needs k < l, got k={k}, l={l}")
    k, l = int(k), int(l)

    def harmonic(freq, use_sin):
        coeffs = [0.0] * l
        coeffs[freq - 1] = 1.0 / freq
        zeros = [0.0] * l
        return FourierSeries(0.0, zeros, coeffs) if use_sin else FourierSeries(0.0, coeffs, zeros)

    return TrigCurve(2, (harmonic(k, True), harmonic(k, False), harmonic(l, True), harmonic(l, False)))


def jet(curve: TrigCurve, t: float, order: int) -> CurveJet:
    if order < 0:
        raise ValueError("order must be nonnegative")
    return CurveJet(canonical_angle(float(t)), curve.derivatives(float(t), order))


def frame_matrix(curve: TrigCurve, t) -> np.ndarray:
    """Columns gamma'(t), ..., gamma^{(2n)}(t); shape ``np.shape(t) + (2n, 2n)``."""
    d = curve.derivatives(t, curve.dim)
    return np.swapaxes(d[..., 1:, :], -1, -2)


def nondegeneracy(curve: TrigCurve, t) -> float | np.ndarray:
    """det[gamma'(t), ..., gamma^{(2n)}(t)]."""
    det = np.linalg.det(frame_matrix(curve, t))
    return float(det) if np.ndim(det) == 0 else det


@dataclass(frozen=True)
class ConvexityCertificate:
    """Sampled (heuristic) convexity verdict; not a proof."""

    nondegenerate_everywhere: bool
    min_abs_frame_det: float
    max_intersection_count: int
    probes: int
    seed: int
    grid: int
    verdict: bool


def count_sign_changes(values: np.ndarray) -> np.ndarray:
    """Cyclic sign changes along the last axis (exact zeros are skipped)."""
    s = np.sign(values)
    count = np.zeros(values.shape[:-1], dtype=int)
    flat_s = s.reshape(-1, s.shape[-1])
    flat_c = count.reshape(-1)
    for i, row in enumerate(flat_s):
        nz = row[row != 0]
        if nz.size:
            flat_c[i] = int(np.count_nonzero(nz != np.roll(nz, 1)))
    return count


def convexity_certificate(
    curve: TrigCurve, probes: int = 200, seed: int = 0, grid: int = 4096, det_tol: float = 1e-10
) -> ConvexityCertificate:
    """Grid nondegeneracy test plus sign-change counts over random hyperplanes.

    Each probe draws a random unit normal N and a level c uniformly between
    the min and max of <N, gamma> so the hyperplane actually cuts the curve.
    The verdict passes iff the frame determinant never vanishes on the grid
    (relative to its scale) and no probe meets the curve more than 2n times.
    """
    if probes < 1:
        raise ValueError("probes must be >= 1")
    ts = np.arange(grid) * (TWO_PI / grid)
    dets = nondegeneracy(curve, ts)
    scale = max(float(np.max(np.abs(dets))), np.finfo(float).tiny)
    min_abs = float(np.min(np.abs(dets)))
    signs = np.sign(dets)
    nondeg = bool(min_abs > det_tol * scale and np.all(signs == signs[0]))

    rng = np.random.default_rng(seed)
    pts = curve(ts)
    normals = rng.standard_normal((probes, curve.dim))
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    proj = normals @ pts.T  # (probes, grid)
    lo, hi = proj.min(axis=1), proj.max(axis=1)
    levels = lo + rng.random(probes) * (hi - lo)
    counts = count_sign_changes(proj - levels[:, None])
    max_count = int(counts.max())
    verdict = nondeg and max_count <= curve.dim
    return ConvexityCertificate(nondeg, min_abs, max_count, probes, seed, grid, verdict)


def parse_curve(spec: str) -> TrigCurve:
    """Resolve ``gen-ellipse:n``, ``lissajoux:k,l`` or a path to a JSON curve file."""
    spec = spec.strip()
    name, _, args = spec.partition(":")
    try:
        if name == "gen-ellipse":
            return make_generalized_ellipse(int(args))
        if name == "lissajoux":
            k, l = (int(a) for a in args.split(","))
            return make_lissajoux(k, l)
    except ValueError as exc:
        if isinstance(exc, CurveSpecError):
            raise
        raise CurveSpecError(f"bad curve name {spec!r}: {exc}") from exc
    path = Path(spec)
    if not path.is_file():
        raise CurveSpecError(f"unknown curve {spec!r} (not a built-in name or a file)")
    return load_curve(path)


def load_curve(path) -> TrigCurve:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CurveSpecError(f"{path}: invalid JSON ({exc})") from exc
    return TrigCurve.from_dict(data)


def save_curve(curve: TrigCurve, path) -> None:
    Path(path).write_text(json.dumps(curve.to_dict(), indent=2) + "\n", encoding="utf-8")
