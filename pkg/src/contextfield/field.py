"""Smooth scalar-field regression over scattered canvas samples.

The estimator is an adaptive-bandwidth kernel regression with a singular
inverse-square factor, so it reproduces every sample value exactly while
staying smooth in between.  Per-sample bandwidths follow the usual
adaptive KDE recipe: a fixed-bandwidth pilot density at each sample sets
a local scale factor lambda_i = (f_i / g)^(-alpha), geometric-mean
normalized so the lambdas multiply to one.  Optional zero-valued samples
along the bounding-box perimeter pull the field toward zero at the
canvas edge.
"""

import struct
import warnings
from dataclasses import dataclass

import numpy as np

SNAP_EPS = 1e-12
MERGE_EPS_FACTOR = 1e-9
FALLBACK_BW_FACTOR = 1e-3

FIELD_MAGIC = b"OIEF"
# magic(4) + W(u32) + H(u32) + pad(4) + bbox(4 doubles) = 48 bytes
FIELD_HEADER = struct.Struct("<4sII4x4d")


@dataclass(frozen=True)
class GridSpec:
    """Regular W x H node grid over a bounding box."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float
    width: int
    height: int
    margin: float = 0.0

    def __post_init__(self):
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ValueError("bounding box must have positive extent")
        if self.width < 2 or self.height < 2:
            raise ValueError("grid must be at least 2x2")

    @classmethod
    def from_bbox(cls, bbox, width, height, margin=0.05):
        """Expand a tight bbox by ``margin`` of its extent on every side."""
        xmin, ymin, xmax, ymax = bbox
        dx = (xmax - xmin) or 1.0
        dy = (ymax - ymin) or 1.0
        return cls(
            xmin - margin * dx,
            ymin - margin * dy,
            xmax + margin * dx,
            ymax + margin * dy,
            width,
            height,
            margin,
        )

    @property
    def diagonal(self):
        return float(np.hypot(self.xmax - self.xmin, self.ymax - self.ymin))

    def xs(self):
        return np.linspace(self.xmin, self.xmax, self.width)

    def ys(self):
        return np.linspace(self.ymin, self.ymax, self.height)


@dataclass(frozen=True)
class SampleSet:
    """Scattered (x, y, z) samples; origin flags separate data from border."""

    positions: np.ndarray  # (k, 2)
    values: np.ndarray  # (k,)
    origins: tuple  # "data" | "border" per sample

    def __post_init__(self):
        if not np.all(np.isfinite(self.positions)) or not np.all(
            np.isfinite(self.values)
        ):
            raise ValueError("sample positions and values must be finite")
        if self.positions.shape[0] != self.values.shape[0]:
            raise ValueError("positions/values length mismatch")

    @property
    def k(self):
        return self.positions.shape[0]

    def bbox(self):
        return (
            float(self.positions[:, 0].min()),
            float(self.positions[:, 1].min()),
            float(self.positions[:, 0].max()),
            float(self.positions[:, 1].max()),
        )

    def bbox_diagonal(self):
        xmin, ymin, xmax, ymax = self.bbox()
        return float(np.hypot(xmax - xmin, ymax - ymin))


def make_samples(positions, values, origins=None):
    """Build a SampleSet, merging near-coincident positions by averaging z.

    Two samples closer than 1e-9 x bbox diagonal would put two kernel
    singularities at one point, so they are merged (with a warning).
    """
    positions = np.asarray(positions, dtype=float).reshape(-1, 2)
    values = np.asarray(values, dtype=float).reshape(-1)
    k = positions.shape[0]
    if origins is None:
        origins = ("data",) * k
    xmin, ymin = positions.min(axis=0)
    xmax, ymax = positions.max(axis=0)
    eps = MERGE_EPS_FACTOR * float(np.hypot(xmax - xmin, ymax - ymin))

    keep_pos, keep_val, keep_org, counts = [], [], [], []
    for i in range(k):
        merged = False
        for j in range(len(keep_pos)):
            if np.hypot(*(positions[i] - keep_pos[j])) <= eps:
                keep_val[j] += values[i]
                counts[j] += 1
                merged = True
                break
        if not merged:
            keep_pos.append(positions[i])
            keep_val.append(values[i])
            keep_org.append(origins[i])
            counts.append(1)
    if len(keep_pos) < k:
        warnings.warn(
            f"merged {k - len(keep_pos)} near-coincident sample(s) by averaging"
        )
    vals = np.array([v / c for v, c in zip(keep_val, counts)])
    return SampleSet(np.array(keep_pos), vals, tuple(keep_org))


@dataclass(frozen=True)
class BandwidthSet:
    h_x: np.ndarray  # per-sample bandwidth along x
    h_y: np.ndarray
    pilot_x: float
    pilot_y: float
    alpha: float

    def __post_init__(self):
        if np.any(self.h_x <= 0) or np.any(self.h_y <= 0):
            raise ValueError("bandwidths must be strictly positive")
        if not (np.all(np.isfinite(self.h_x)) and np.all(np.isfinite(self.h_y))):
            raise ValueError("bandwidths must be finite")


@dataclass(frozen=True)
class ScalarFieldGrid:
    values: np.ndarray  # (H, W), row iy, column ix
    spec: GridSpec

    def __post_init__(self):
        if self.values.shape != (self.spec.height, self.spec.width):
            raise ValueError("grid value shape does not match spec")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")

    @property
    def zmin(self):
        return float(self.values.min())

    @property
    def zmax(self):
        return float(self.values.max())


def pilot_bandwidth(samples):
    """Scott-rule pilot bandwidth per dimension: sigma * k^(-1/6) for 2D."""
    k = samples.k
    fallback = FALLBACK_BW_FACTOR * samples.bbox_diagonal()
    if fallback == 0.0:
        fallback = FALLBACK_BW_FACTOR
    factor = k ** (-1.0 / 6.0)

    def one(coords):
        if k < 2:
            return fallback
        sigma = float(np.std(coords, ddof=1))
        if sigma == 0.0:
            return fallback
        return sigma * factor

    return one(samples.positions[:, 0]), one(samples.positions[:, 1])


def pilot_density(samples, h0):
    """Fixed-bandwidth product-Gaussian KDE evaluated at every sample."""
    hx, hy = h0
    px = samples.positions[:, 0]
    py = samples.positions[:, 1]
    ux = (px[:, None] - px[None, :]) / hx
    uy = (py[:, None] - py[None, :]) / hy
    kern = np.exp(-0.5 * (ux * ux + uy * uy)) / (2.0 * np.pi * hx * hy)
    return kern.sum(axis=1) / samples.k


def adaptive_bandwidths(densities, h0, alpha=0.5):
    """Per-sample bandwidths h_i = h0 * (f_i / g)^(-alpha), g = geomean(f)."""
    densities = np.asarray(densities, dtype=float)
    if np.any(densities <= 0):
        raise ValueError("pilot densities must be positive")
    log_g = np.mean(np.log(densities))
    lam = np.exp(-alpha * (np.log(densities) - log_g))
    hx, hy = h0
    return BandwidthSet(hx * lam, hy * lam, hx, hy, alpha)


def add_border_samples(samples, grid, count=256, value=0.0):
    """Append ``count`` equally spaced zero(ish)-valued perimeter samples."""
    if count < 4:
        raise ValueError("need at least 4 border samples")
    w = grid.xmax - grid.xmin
    h = grid.ymax - grid.ymin
    perimeter = 2.0 * (w + h)
    step = perimeter / count
    pts = []
    for i in range(count):
        s = i * step  # arc length from (xmin, ymin), counter-clockwise
        if s < w:
            pts.append((grid.xmin + s, grid.ymin))
        elif s < w + h:
            pts.append((grid.xmax, grid.ymin + (s - w)))
        elif s < 2 * w + h:
            pts.append((grid.xmax - (s - w - h), grid.ymax))
        else:
            pts.append((grid.xmin, grid.ymax - (s - 2 * w - h)))
    positions = np.vstack([samples.positions, np.array(pts)])
    values = np.concatenate([samples.values, np.full(count, float(value))])
    origins = samples.origins + ("border",) * count
    return SampleSet(positions, values, origins)


def _weighted_values(rsq, values):
    """Shepard-style weights from squared scaled distances; one probe row."""
    # rsq: (N, k) squared scaled distances for N probes
    n = rsq.shape[0]
    out = np.empty(n)
    rmin = rsq.min(axis=1)
    snap = rmin < SNAP_EPS
    if np.any(snap):
        idx = rsq[snap].argmin(axis=1)
        out[snap] = values[idx]
    rest = ~snap
    if np.any(rest):
        r = rsq[rest]
        with np.errstate(over="ignore", under="ignore"):
            w = np.exp(-0.5 * r) / r
        wsum = w.sum(axis=1)
        dead = wsum == 0.0
        if np.any(dead):
            # All kernels underflowed: shift exponents by the smallest
            # distance so the relative weights survive in float range.
            rd = r[dead]
            rm = rd.min(axis=1)
            w2 = np.exp(0.5 * (rm[:, None] - rd)) * (rm[:, None] / rd)
            w[dead] = w2
            wsum = w.sum(axis=1)
        # Row-wise reductions (not BLAS matmul) so the result is bitwise
        # identical whether probes are evaluated singly or in batches.
        out[rest] = (w * values[None, :]).sum(axis=1) / wsum
    return out


def _scaled_sq_distances(points, samples, bw):
    dx = (points[:, 0][:, None] - samples.positions[:, 0][None, :]) / bw.h_x
    dy = (points[:, 1][:, None] - samples.positions[:, 1][None, :]) / bw.h_y
    return dx * dx + dy * dy


def evaluate_at(samples, bw, point):
    """Field value at one point: exact at samples, smooth everywhere else."""
    p = np.asarray(point, dtype=float).reshape(1, 2)
    rsq = _scaled_sq_distances(p, samples, bw)
    return float(_weighted_values(rsq, samples.values)[0])


def evaluate_points(samples, bw, points):
    """Vectorized evaluate_at over an (N, 2) array of probes."""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    out = np.empty(points.shape[0])
    chunk = max(1, 2_000_000 // max(samples.k, 1))
    for start in range(0, points.shape[0], chunk):
        block = points[start : start + chunk]
        rsq = _scaled_sq_distances(block, samples, bw)
        out[start : start + block.shape[0]] = _weighted_values(rsq, samples.values)
    return out


def evaluate_field(samples, bw, grid):
    """Evaluate the regression at every grid node."""
    xs = grid.xs()
    ys = grid.ys()
    gx, gy = np.meshgrid(xs, ys)  # (H, W)
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    vals = evaluate_points(samples, bw, pts).reshape(grid.height, grid.width)
    return ScalarFieldGrid(vals, grid)


def fit_bandwidths(samples, alpha=0.5):
    """Pilot bandwidth -> pilot density -> adaptive bandwidths in one call."""
    h0 = pilot_bandwidth(samples)
    dens = pilot_density(samples, h0)
    return adaptive_bandwidths(dens, h0, alpha)


def write_field_csv(fieldgrid, path):
    """Row-major CSV dump with a bbox/resolution header comment."""
    g = fieldgrid.spec
    with open(path, "w", newline="") as fh:
        fh.write(
            "# bbox=%r,%r,%r,%r width=%d height=%d\n"
            % (g.xmin, g.ymin, g.xmax, g.ymax, g.width, g.height)
        )
        for row in fieldgrid.values:
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")


def write_field_binary(fieldgrid, path):
    """Little-endian float64 dump with a fixed-size binary header."""
    g = fieldgrid.spec
    header = FIELD_HEADER.pack(
        FIELD_MAGIC, g.width, g.height, g.xmin, g.ymin, g.xmax, g.ymax
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(fieldgrid.values.astype("<f8").tobytes())


def read_field_binary(path):
    from .errors import MalformedDump

    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < FIELD_HEADER.size:
        raise MalformedDump("field dump truncated in header", offset=len(blob))
    magic, width, height, xmin, ymin, xmax, ymax = FIELD_HEADER.unpack_from(blob)
    if magic != FIELD_MAGIC:
        raise MalformedDump("bad field dump magic", offset=0)
    expected = FIELD_HEADER.size + 8 * width * height
    if len(blob) != expected:
        raise MalformedDump(
            f"field dump has {len(blob)} bytes, expected {expected}",
            offset=min(len(blob), expected),
        )
    values = np.frombuffer(
        blob, dtype="<f8", count=width * height, offset=FIELD_HEADER.size
    ).reshape(height, width)
    spec = GridSpec(xmin, ymin, xmax, ymax, width, height)
    return ScalarFieldGrid(values.copy(), spec)
