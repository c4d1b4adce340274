"""Command-line entry point.

Subcommands run the pipeline end-to-end or stage by stage against a
shared output directory:

    contextfield pipeline --input cars.csv --scalar Hpower --out-dir out
    contextfield embed ... ; contextfield field ... ; contextfield contour ...

Exit codes: 0 ok, 2 configuration error, 3 malformed data or dump.
"""

import argparse
import sys

from . import pipeline
from .config import ConfigError, PipelineConfig, load_toml, merge_overrides
from .errors import ContextFieldError, MalformedDump

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3


def _parse_grid(text):
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"grid must look like 256x256, got {text!r}"
        )


def _parse_canvas(text):
    return _parse_grid(text)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="contextfield",
        description="Embed a numeric table and render its scalar-field map.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("embed", "composite matrix + MDS embedding"),
        ("field", "scalar field from a saved embedding"),
        ("contour", "iso-contours from a saved field"),
        ("render", "figure from saved embedding/field/contours"),
        ("pipeline", "all stages end to end"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="TOML config file")
        p.add_argument("--input", help="input CSV path")
        p.add_argument("--label-column", dest="label_column")
        p.add_argument("--scalar", help="attribute to map as the scalar field")
        p.add_argument("--filter", help="highlight filter, e.g. 'mpg>30'")
        p.add_argument("--out-dir", dest="out_dir")
        p.add_argument("--seed", type=int)
        p.add_argument("--weights", help="fusion weights as dd,aa,da")
        p.add_argument("--max-iter", dest="max_iter", type=int)
        p.add_argument("--rel-tol", dest="rel_tol", type=float)
        p.add_argument("--init-mode", dest="init_mode")
        p.add_argument("--alpha", type=float)
        p.add_argument(
            "--extrapolate-border",
            dest="extrapolate_border",
            action="store_const",
            const=True,
        )
        p.add_argument("--border-count", dest="border_count", type=int)
        p.add_argument("--grid", type=_parse_grid, help="field grid, WxH")
        p.add_argument("--margin", type=float)
        p.add_argument("--levels", type=int, help="number of contour levels")
        p.add_argument("--colormap")
        p.add_argument("--canvas", type=_parse_canvas, help="canvas size, WxH")
        p.add_argument(
            "--raster-opacity", dest="raster_opacity", type=float
        )
        p.add_argument(
            "--contour-labels",
            dest="contour_labels",
            action="store_const",
            const=True,
        )
        p.add_argument(
            "--png", dest="emit_png", action="store_const", const=True
        )
    return parser


def config_from_args(args):
    cfg = load_toml(args.config) if args.config else PipelineConfig()
    overrides = {
        key: getattr(args, key)
        for key in (
            "input",
            "label_column",
            "scalar",
            "filter",
            "out_dir",
            "seed",
            "max_iter",
            "rel_tol",
            "init_mode",
            "alpha",
            "extrapolate_border",
            "border_count",
            "margin",
            "levels",
            "colormap",
            "raster_opacity",
            "contour_labels",
            "emit_png",
        )
    }
    if args.grid is not None:
        overrides["grid_width"], overrides["grid_height"] = args.grid
    if args.canvas is not None:
        overrides["canvas_width"], overrides["canvas_height"] = args.canvas
    if args.weights is not None:
        try:
            dd, aa, da = (float(v) for v in args.weights.split(","))
        except ValueError:
            raise ConfigError("weights", "expected three comma-separated numbers")
        overrides["w_dd"], overrides["w_aa"], overrides["w_da"] = dd, aa, da
    merge_overrides(cfg, overrides)
    cfg.validate()
    return cfg


_STAGES = {
    "embed": pipeline.run_embed,
    "field": pipeline.run_field,
    "contour": pipeline.run_contours,
    "render": pipeline.run_render,
    "pipeline": pipeline.run_pipeline,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        out_dir = pipeline.prepare_out_dir(cfg)
        _STAGES[args.command](cfg, out_dir)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MalformedDump as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ContextFieldError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
