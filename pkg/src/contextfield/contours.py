"""Iso-contour extraction from a regular scalar grid via marching squares.

Cells are scanned row-major; crossings are linearly interpolated along
cell edges and keyed by the edge they sit on, so segments from adjacent
cells share bitwise-identical vertices and chain cleanly into polylines.
Polylines that touch the grid boundary stay open; interior ones close.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRange

LEVEL_PERTURB = 1e-12


@dataclass(frozen=True)
class Polyline:
    points: np.ndarray  # (v, 2)
    closed: bool

    def __post_init__(self):
        if self.points.shape[0] < 2:
            raise ValueError("polyline needs at least 2 vertices")


@dataclass(frozen=True)
class ContourSet:
    levels: tuple  # ascending
    polylines: tuple  # tuple of tuples of Polyline, parallel to levels


# Edge of cell (ix, iy): bottom, right, top, left.
def _cell_edges(ix, iy):
    return (
        ("h", ix, iy),
        ("v", ix + 1, iy),
        ("h", ix, iy + 1),
        ("v", ix, iy),
    )


# Per case: list of (edge index, edge index) segments; saddles handled inline.
_SEGMENTS = {
    0: [],
    1: [(3, 0)],
    2: [(0, 1)],
    3: [(3, 1)],
    4: [(1, 2)],
    6: [(0, 2)],
    7: [(3, 2)],
    8: [(2, 3)],
    9: [(0, 2)],
    11: [(1, 2)],
    12: [(3, 1)],
    13: [(0, 1)],
    14: [(3, 0)],
    15: [],
}


def marching_squares(grid, level):
    """Polylines of the level set of ``grid`` at one iso-value."""
    v = grid.values.astype(float, copy=True)
    zrange = grid.zmax - grid.zmin
    eps = LEVEL_PERTURB * (zrange if zrange > 0 else 1.0)
    v[v == level] += eps  # degenerate-vertex rule: no node sits on the level

    xs = grid.spec.xs()
    ys = grid.spec.ys()
    height, width = v.shape
    above = v > level

    crossings = {}  # edge key -> (x, y)

    def crossing(key):
        pt = crossings.get(key)
        if pt is None:
            kind, ix, iy = key
            if kind == "h":
                v0, v1 = v[iy, ix], v[iy, ix + 1]
                t = (level - v0) / (v1 - v0)
                pt = (xs[ix] + t * (xs[ix + 1] - xs[ix]), ys[iy])
            else:
                v0, v1 = v[iy, ix], v[iy + 1, ix]
                t = (level - v0) / (v1 - v0)
                pt = (xs[ix], ys[iy] + t * (ys[iy + 1] - ys[iy]))
            crossings[key] = pt
        return pt

    segments = []  # (edge key, edge key) in row-major discovery order
    for iy in range(height - 1):
        for ix in range(width - 1):
            case = (
                int(above[iy, ix])
                | int(above[iy, ix + 1]) << 1
                | int(above[iy + 1, ix + 1]) << 2
                | int(above[iy + 1, ix]) << 3
            )
            if case in (5, 10):
                center = 0.25 * (
                    v[iy, ix] + v[iy, ix + 1] + v[iy + 1, ix + 1] + v[iy + 1, ix]
                )
                center_above = center >= level
                if case == 5:  # above at bottom-left and top-right
                    pairs = [(0, 1), (2, 3)] if center_above else [(3, 0), (1, 2)]
                else:  # above at bottom-right and top-left
                    pairs = [(3, 0), (1, 2)] if center_above else [(0, 1), (2, 3)]
            else:
                pairs = _SEGMENTS[case]
            edges = _cell_edges(ix, iy)
            for a, b in pairs:
                segments.append((edges[a], edges[b]))

    return _chain(segments, crossing)


def _chain(segments, crossing):
    """Join shared-edge segments into open or closed polylines."""
    adjacency = {}
    for idx, (a, b) in enumerate(segments):
        adjacency.setdefault(a, []).append((idx, b))
        adjacency.setdefault(b, []).append((idx, a))

    used = [False] * len(segments)
    polylines = []

    def walk(start_key, first_idx, first_next):
        used[first_idx] = True
        keys = [start_key, first_next]
        while True:
            current = keys[-1]
            ext = None
            for idx, other in adjacency[current]:
                if not used[idx]:
                    ext = (idx, other)
                    break
            if ext is None:
                break
            used[ext[0]] = True
            keys.append(ext[1])
        return keys

    for idx, (a, b) in enumerate(segments):
        if used[idx]:
            continue
        # Prefer to start at a loose end so open curves come out in one piece.
        start = a
        if len(adjacency[a]) > 1 and len(adjacency[b]) == 1:
            start, b = b, a
        elif len(adjacency[a]) > 1 and len(adjacency[b]) > 1:
            # Possibly mid-loop; walk one way, then extend the other.
            keys = walk(a, idx, b)
            if keys[-1] == keys[0]:
                polylines.append(
                    Polyline(np.array([crossing(k) for k in keys[:-1]]), True)
                )
                continue
            back = []
            current = keys[0]
            while True:
                ext = None
                for jdx, other in adjacency[current]:
                    if not used[jdx]:
                        ext = (jdx, other)
                        break
                if ext is None:
                    break
                used[ext[0]] = True
                back.append(ext[1])
                current = ext[1]
            keys = list(reversed(back)) + keys
            polylines.append(Polyline(np.array([crossing(k) for k in keys]), False))
            continue
        keys = walk(start, idx, b if start is a else a)
        closed = keys[-1] == keys[0]
        if closed:
            keys = keys[:-1]
        polylines.append(Polyline(np.array([crossing(k) for k in keys]), closed))

    return polylines


def topographic_levels(grid, count):
    """``count`` equally spaced levels strictly inside the value range."""
    if count < 1:
        raise ValueError("need at least one level")
    zmin, zmax = grid.zmin, grid.zmax
    if zmax == zmin:
        raise DegenerateRange("field is constant; no interior levels exist")
    step = (zmax - zmin) / (count + 1)
    return [zmin + j * step for j in range(1, count + 1)]


def extract_contours(grid, levels):
    """Marching squares at each level, assembled into a ContourSet."""
    levels = list(levels)
    if levels != sorted(levels):
        raise ValueError("levels must be sorted ascending")
    per_level = tuple(tuple(marching_squares(grid, lv)) for lv in levels)
    return ContourSet(tuple(levels), per_level)


def contours_to_json(cs):
    """Deterministic JSON serialization of a ContourSet."""
    payload = [
        {
            "level": lv,
            "polylines": [[[x, y] for x, y in pl.points] for pl in pls],
            "closed": [pl.closed for pl in pls],
        }
        for lv, pls in zip(cs.levels, cs.polylines)
    ]
    return json.dumps(payload, separators=(",", ":"))


def contours_from_json(text):
    from .errors import MalformedDump

    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedDump(f"bad contour JSON: {exc.msg}", offset=exc.pos)
    levels = []
    polylines = []
    for entry in payload:
        levels.append(float(entry["level"]))
        polylines.append(
            tuple(
                Polyline(np.asarray(points, dtype=float), bool(closed))
                for points, closed in zip(entry["polylines"], entry["closed"])
            )
        )
    return ContourSet(tuple(levels), tuple(polylines))
