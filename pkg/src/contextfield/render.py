"""Scene composition and deterministic SVG/PNG emission.

The figure is a layer stack: colorized field raster at the bottom, then
contour polylines, then blue data markers, red attribute markers with
labels, and red-circled highlight callouts on top.  SVG is the primary
backend and is byte-deterministic (fixed attribute order, 6-decimal
coordinates); PNG rasterization uses Pillow.
"""

import base64
import io
from dataclasses import dataclass

import numpy as np
from PIL import Image, ImageDraw

from .errors import ShapeMismatch

_BUILTIN_COLORMAPS = {
    "gray": ((0.0, (0, 0, 0)), (1.0, (255, 255, 255))),
    # Perceptually ordered multi-hue ramp (sampled viridis anchors).
    "viridis": (
        (0.0, (68, 1, 84)),
        (0.25, (59, 82, 139)),
        (0.5, (33, 145, 140)),
        (0.75, (94, 201, 98)),
        (1.0, (253, 231, 37)),
    ),
}


@dataclass(frozen=True)
class ColorMap:
    name: str
    stops: tuple  # ((t, (r, g, b)), ...), t ascending from 0 to 1

    def __post_init__(self):
        ts = [t for t, _ in self.stops]
        if ts[0] != 0.0 or ts[-1] != 1.0 or ts != sorted(set(ts)):
            raise ValueError("stops must increase strictly from 0 to 1")

    @classmethod
    def named(cls, name):
        try:
            return cls(name, _BUILTIN_COLORMAPS[name])
        except KeyError:
            raise ValueError(
                f"unknown colormap {name!r}; available: "
                + ", ".join(sorted(_BUILTIN_COLORMAPS))
            ) from None

    def at(self, t):
        """Piecewise-linear RGB at t in [0, 1]."""
        t = min(1.0, max(0.0, float(t)))
        stops = self.stops
        for i in range(len(stops) - 1):
            t0, c0 = stops[i]
            t1, c1 = stops[i + 1]
            if t <= t1:
                f = 0.0 if t1 == t0 else (t - t0) / (t1 - t0)
                return tuple(
                    int(round(c0[j] + f * (c1[j] - c0[j]))) for j in range(3)
                )
        return stops[-1][1]


def colorize(fieldgrid, cmap):
    """Map grid values through the colormap to an opaque RGBA raster."""
    v = fieldgrid.values
    zmin, zmax = fieldgrid.zmin, fieldgrid.zmax
    if zmax > zmin:
        t = (v - zmin) / (zmax - zmin)
    else:
        t = np.full_like(v, 0.5)
    ts = np.array([s for s, _ in cmap.stops])
    rgb_stops = np.array([c for _, c in cmap.stops], dtype=float)
    out = np.empty(v.shape + (4,), dtype=np.uint8)
    for ch in range(3):
        out[..., ch] = np.rint(
            np.interp(t, ts, rgb_stops[:, ch])
        ).astype(np.uint8)
    out[..., 3] = 255
    return out


@dataclass(frozen=True)
class Viewport:
    """Affine map from field/data coordinates to canvas pixels (y down)."""

    bbox: tuple  # (xmin, ymin, xmax, ymax) in data units
    width: int
    height: int

    def to_canvas(self, x, y):
        xmin, ymin, xmax, ymax = self.bbox
        px = (x - xmin) / (xmax - xmin) * self.width
        py = self.height - (y - ymin) / (ymax - ymin) * self.height
        return px, py

    def to_data(self, px, py):
        xmin, ymin, xmax, ymax = self.bbox
        x = xmin + px / self.width * (xmax - xmin)
        y = ymin + (self.height - py) / self.height * (ymax - ymin)
        return x, y


@dataclass(frozen=True)
class Scene:
    width: int
    height: int
    viewport: Viewport
    raster: np.ndarray = None  # (H, W, 4) uint8, grid orientation (y up)
    raster_opacity: float = 1.0
    contours: tuple = ()  # (level, points (v,2) data coords, closed)
    data_points: tuple = ()  # (x, y) data coords
    attribute_nodes: tuple = ()  # (x, y, name)
    highlights: tuple = ()  # (x, y, label)
    contour_labels: bool = False
    data_radius: float = 3.0

    @property
    def attr_radius(self):
        return 3.0 * self.data_radius


def compose_scene(
    embedding,
    labels,
    raster,
    viewport,
    contours=None,
    highlight_mask=None,
    raster_opacity=1.0,
    contour_labels=False,
):
    """Assemble the hybrid figure from pipeline artifacts.

    ``labels`` is the full node label list (data rows, then attribute
    names), parallel to the embedding.  ``highlight_mask`` marks data
    rows to circle and call out.
    """
    if len(labels) != embedding.m:
        raise ShapeMismatch("labels do not match embedding size")
    data_pts = []
    attr_nodes = []
    for i in range(embedding.m):
        x, y = float(embedding.coords[i, 0]), float(embedding.coords[i, 1])
        if embedding.node_kinds[i] == "data":
            data_pts.append((x, y))
        else:
            attr_nodes.append((x, y, labels[i]))
    highlights = []
    if highlight_mask is not None:
        for i, flagged in enumerate(highlight_mask):
            if flagged:
                x, y = embedding.coords[i]
                highlights.append((float(x), float(y), labels[i]))
    contour_layers = []
    if contours is not None:
        for level, pls in zip(contours.levels, contours.polylines):
            for pl in pls:
                contour_layers.append((float(level), pl.points, pl.closed))
    return Scene(
        width=viewport.width,
        height=viewport.height,
        viewport=viewport,
        raster=raster,
        raster_opacity=raster_opacity,
        contours=tuple(contour_layers),
        data_points=tuple(data_pts),
        attribute_nodes=tuple(attr_nodes),
        highlights=tuple(highlights),
        contour_labels=contour_labels,
    )


def _fmt(v):
    return f"{v:.6f}"


def _png_bytes(rgba):
    img = Image.fromarray(rgba, mode="RGBA")
    buf = io.BytesIO()
    img.save(buf, format="PNG", compress_level=6)
    return buf.getvalue()


def emit_svg(scene):
    """Standalone deterministic SVG document as bytes."""
    w, h = scene.width, scene.height
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" '
        f'xmlns:xlink="http://www.w3.org/1999/xlink" '
        f'width="{w}" height="{h}" viewBox="0 0 {w} {h}">\n'
    ]
    if scene.raster is not None:
        # Grid row 0 is ymin; flip so the image's top row is ymax.
        png = _png_bytes(np.ascontiguousarray(scene.raster[::-1]))
        b64 = base64.b64encode(png).decode("ascii")
        parts.append(
            f'<image x="0" y="0" width="{w}" height="{h}" '
            f'opacity="{_fmt(scene.raster_opacity)}" '
            f'preserveAspectRatio="none" '
            f'xlink:href="data:image/png;base64,{b64}"/>\n'
        )
    vp = scene.viewport
    for level, points, closed in scene.contours:
        coords = [vp.to_canvas(x, y) for x, y in points]
        d = "M " + " L ".join(f"{_fmt(px)} {_fmt(py)}" for px, py in coords)
        if closed:
            d += " Z"
        parts.append(
            f'<path d="{d}" fill="none" stroke="#404040" stroke-width="1"/>\n'
        )
        if scene.contour_labels and coords:
            mx, my = coords[len(coords) // 2]
            parts.append(
                f'<text x="{_fmt(mx)}" y="{_fmt(my)}" font-size="9" '
                f'fill="#404040">{_fmt(level)}</text>\n'
            )
    r = scene.data_radius
    for x, y in scene.data_points:
        px, py = vp.to_canvas(x, y)
        parts.append(
            f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="{_fmt(r)}" '
            f'fill="#1f4fbf"/>\n'
        )
    ra = scene.attr_radius
    for x, y, name in scene.attribute_nodes:
        px, py = vp.to_canvas(x, y)
        parts.append(
            f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="{_fmt(ra)}" '
            f'fill="#d62728"/>\n'
            f'<text x="{_fmt(px + ra + 2)}" y="{_fmt(py + 4)}" '
            f'font-size="12" fill="#d62728">{_escape(name)}</text>\n'
        )
    for x, y, label in scene.highlights:
        px, py = vp.to_canvas(x, y)
        rr = 2.5 * r
        parts.append(
            f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="{_fmt(rr)}" '
            f'fill="none" stroke="#ff0000" stroke-width="1.5"/>\n'
            f'<text x="{_fmt(px + rr + 2)}" y="{_fmt(py - rr)}" '
            f'font-size="11" fill="#ff0000">{_escape(label)}</text>\n'
        )
    parts.append("</svg>\n")
    return "".join(parts).encode("utf-8")


def _escape(text):
    return (
        str(text).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    )


def emit_png(scene):
    """Rasterized composite at canvas resolution as PNG bytes."""
    w, h = scene.width, scene.height
    canvas = Image.new("RGBA", (w, h), (255, 255, 255, 255))
    if scene.raster is not None:
        img = Image.fromarray(
            np.ascontiguousarray(scene.raster[::-1]), mode="RGBA"
        ).resize((w, h), Image.NEAREST)
        canvas = Image.blend(canvas, img, scene.raster_opacity)
    draw = ImageDraw.Draw(canvas)
    vp = scene.viewport
    for level, points, closed in scene.contours:
        coords = [vp.to_canvas(x, y) for x, y in points]
        if closed:
            coords.append(coords[0])
        draw.line(coords, fill=(64, 64, 64, 255), width=1)
        if scene.contour_labels and coords:
            mx, my = coords[len(coords) // 2]
            draw.text((mx, my), f"{level:.6g}", fill=(64, 64, 64, 255))
    r = scene.data_radius
    for x, y in scene.data_points:
        px, py = vp.to_canvas(x, y)
        draw.ellipse([px - r, py - r, px + r, py + r], fill=(31, 79, 191, 255))
    ra = scene.attr_radius
    for x, y, name in scene.attribute_nodes:
        px, py = vp.to_canvas(x, y)
        draw.ellipse(
            [px - ra, py - ra, px + ra, py + ra], fill=(214, 39, 40, 255)
        )
        draw.text((px + ra + 2, py - 5), str(name), fill=(214, 39, 40, 255))
    for x, y, label in scene.highlights:
        px, py = vp.to_canvas(x, y)
        rr = 2.5 * r
        draw.ellipse(
            [px - rr, py - rr, px + rr, py + rr],
            outline=(255, 0, 0, 255),
            width=2,
        )
        draw.text((px + rr + 2, py - rr - 5), str(label), fill=(255, 0, 0, 255))
    buf = io.BytesIO()
    canvas.save(buf, format="PNG", compress_level=6)
    return buf.getvalue()
