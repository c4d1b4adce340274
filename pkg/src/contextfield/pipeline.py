"""Stage orchestration: each stage reads the previous stage's files and
writes its own, so composing stages is byte-identical to one full run."""

import csv
import json
import time
from pathlib import Path

import numpy as np

from . import affinity, contours, field, ingest, mds, render
from .config import ConfigError
from .errors import MalformedDump, UnknownAttribute


def _load_dataset(cfg):
    ds = ingest.load_csv(cfg.input, label_column=cfg.label_column)
    if cfg.scalar not in ds.attribute_names:
        raise ConfigError(
            "scalar",
            f"{cfg.scalar!r} is not an attribute; valid names: "
            + ", ".join(ds.attribute_names),
        )
    return ds


def write_embedding_csv(path, embedding, labels, trace_path, report):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["label", "kind", "x", "y"])
        for i in range(embedding.m):
            w.writerow(
                [
                    labels[i],
                    embedding.node_kinds[i],
                    repr(float(embedding.coords[i, 0])),
                    repr(float(embedding.coords[i, 1])),
                ]
            )
    with open(trace_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "stress"])
        for i, s in enumerate(report.trace):
            w.writerow([i, repr(float(s))])


def read_embedding_csv(path):
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise MalformedDump(f"cannot read embedding file: {exc}")
    if not rows or rows[0] != ["label", "kind", "x", "y"]:
        raise MalformedDump("embedding file missing 'label,kind,x,y' header")
    labels, kinds, coords = [], [], []
    for idx, row in enumerate(rows[1:], start=1):
        if len(row) != 4 or row[1] not in ("data", "attribute"):
            raise MalformedDump(f"bad embedding row {idx}")
        try:
            coords.append((float(row[2]), float(row[3])))
        except ValueError:
            raise MalformedDump(f"non-numeric coordinate in embedding row {idx}")
        labels.append(row[0])
        kinds.append(row[1])
    if not coords:
        raise MalformedDump("embedding file has no rows")
    return mds.Embedding(np.array(coords), tuple(kinds)), labels


def run_embed(cfg, out_dir):
    ds = _load_dataset(cfg)
    nds = ingest.normalize_minmax(ds)
    weights = affinity.FusionWeights(cfg.w_dd, cfg.w_aa, cfg.w_da)
    composite = affinity.composite_from_dataset(nds, weights)
    params = mds.MdsParams(
        max_iter=cfg.max_iter,
        rel_tol=cfg.rel_tol,
        init_mode=cfg.init_mode,
        seed=cfg.seed,
    )
    embedding, report = mds.run_mds(composite, params)
    labels = list(ds.row_labels) + list(ds.attribute_names)
    write_embedding_csv(
        out_dir / "embedding.csv",
        embedding,
        labels,
        out_dir / "stress_trace.csv",
        report,
    )
    return embedding, report


def run_field(cfg, out_dir):
    embedding, labels = read_embedding_csv(out_dir / "embedding.csv")
    ds = _load_dataset(cfg)
    data_idx = [i for i, k in enumerate(embedding.node_kinds) if k == "data"]
    if len(data_idx) != ds.n:
        raise MalformedDump(
            f"embedding has {len(data_idx)} data nodes, input has {ds.n} rows"
        )
    grid = field.GridSpec.from_bbox(
        embedding.bbox(), cfg.grid_width, cfg.grid_height, cfg.margin
    )
    samples = field.make_samples(
        embedding.coords[data_idx], ds.column(cfg.scalar)
    )
    if cfg.extrapolate_border:
        samples = field.add_border_samples(samples, grid, cfg.border_count)
    bw = field.fit_bandwidths(samples, cfg.alpha)
    grid_values = field.evaluate_field(samples, bw, grid)
    field.write_field_csv(grid_values, out_dir / "field.csv")
    field.write_field_binary(grid_values, out_dir / "field.bin")
    return grid_values


def run_contours(cfg, out_dir):
    grid_values = field.read_field_binary(out_dir / "field.bin")
    if cfg.explicit_levels:
        levels = sorted(float(v) for v in cfg.explicit_levels)
    else:
        levels = contours.topographic_levels(grid_values, cfg.levels)
    cs = contours.extract_contours(grid_values, levels)
    (out_dir / "contours.json").write_text(contours.contours_to_json(cs))
    return cs


def run_render(cfg, out_dir):
    embedding, labels = read_embedding_csv(out_dir / "embedding.csv")
    grid_values = field.read_field_binary(out_dir / "field.bin")
    cs = contours.contours_from_json((out_dir / "contours.json").read_text())
    ds = _load_dataset(cfg)
    try:
        predicate = ingest.parse_filter(cfg.filter, ds.attribute_names)
    except UnknownAttribute as exc:
        raise ConfigError("filter", str(exc))
    mask = ingest.apply_filter(ds, predicate) if predicate.clauses else None
    if mask is not None:
        # Pad to embedding length: attribute nodes are never highlighted.
        mask = np.concatenate([mask, np.zeros(embedding.m - ds.n, dtype=bool)])
    cmap = render.ColorMap.named(cfg.colormap)
    raster = render.colorize(grid_values, cmap)
    g = grid_values.spec
    viewport = render.Viewport(
        (g.xmin, g.ymin, g.xmax, g.ymax), cfg.canvas_width, cfg.canvas_height
    )
    scene = render.compose_scene(
        embedding,
        labels,
        raster,
        viewport,
        contours=cs,
        highlight_mask=mask,
        raster_opacity=cfg.raster_opacity,
        contour_labels=cfg.contour_labels,
    )
    (out_dir / "figure.svg").write_bytes(render.emit_svg(scene))
    if cfg.emit_png:
        (out_dir / "figure.png").write_bytes(render.emit_png(scene))
    return scene


def run_pipeline(cfg, out_dir):
    """embed -> field -> contours -> render, plus a run manifest."""
    timings = {}
    t0 = time.perf_counter()
    _, report = run_embed(cfg, out_dir)
    timings["embed_s"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    grid_values = run_field(cfg, out_dir)
    timings["field_s"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    run_contours(cfg, out_dir)
    timings["contours_s"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    run_render(cfg, out_dir)
    timings["render_s"] = time.perf_counter() - t0
    manifest = {
        "config": cfg.echo(),
        "final_stress": report.final_stress,
        "mds_iterations": report.iterations,
        "mds_converged": report.converged,
        "field_range": [grid_values.zmin, grid_values.zmax],
        "timings": timings,
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )
    return manifest


def prepare_out_dir(cfg):
    out_dir = Path(cfg.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError("out_dir", f"cannot create output directory: {exc}")
    return out_dir
