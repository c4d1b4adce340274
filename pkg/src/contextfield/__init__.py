"""High-dimensional tables to continuous 2D scalar-field maps.

Pipeline: fuse data/attribute dissimilarities into one composite matrix,
embed it by SMACOF stress majorization, regress a chosen attribute into
a smooth value-preserving field over the canvas, extract iso-contours,
and render the hybrid figure.
"""

from .affinity import (
    CompositeMatrix,
    DissimilarityBlock,
    FusionWeights,
    attribute_dissimilarity_block,
    composite_from_dataset,
    data_attribute_block,
    data_distance_block,
    fuse,
)
from .contours import (
    ContourSet,
    Polyline,
    extract_contours,
    marching_squares,
    topographic_levels,
)
from .field import (
    BandwidthSet,
    GridSpec,
    SampleSet,
    ScalarFieldGrid,
    adaptive_bandwidths,
    add_border_samples,
    evaluate_at,
    evaluate_field,
    fit_bandwidths,
    make_samples,
    pilot_bandwidth,
    pilot_density,
)
from .ingest import (
    Dataset,
    NormalizedDataset,
    RowPredicate,
    apply_filter,
    load_csv,
    normalize_minmax,
    parse_filter,
)
from .mds import (
    Embedding,
    MdsParams,
    StressReport,
    classical_init,
    run_mds,
    smacof_step,
    stress,
)
from .render import ColorMap, Scene, Viewport, colorize, compose_scene, emit_png, emit_svg

__version__ = "0.1.0"
