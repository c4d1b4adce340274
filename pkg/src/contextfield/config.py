"""Pipeline configuration: TOML file plus one-to-one CLI flag overrides."""

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from dataclasses import dataclass, field, asdict

from .errors import ContextFieldError


class ConfigError(ContextFieldError):
    """Invalid configuration; names the offending field."""

    def __init__(self, field_name, message):
        self.field_name = field_name
        super().__init__(f"config field {field_name!r}: {message}")


@dataclass
class PipelineConfig:
    input: str = ""
    label_column: str = None
    scalar: str = ""
    filter: str = ""
    out_dir: str = "out"
    seed: int = 0

    # composite fusion
    w_dd: float = 1.0
    w_aa: float = 1.0
    w_da: float = 1.0

    # MDS
    max_iter: int = 300
    rel_tol: float = 1e-7
    init_mode: str = "classical"

    # field estimation
    alpha: float = 0.5
    extrapolate_border: bool = False
    border_count: int = 256
    grid_width: int = 128
    grid_height: int = 128
    margin: float = 0.05

    # contours
    levels: int = 8
    explicit_levels: list = field(default_factory=list)

    # rendering
    colormap: str = "gray"
    canvas_width: int = 800
    canvas_height: int = 800
    raster_opacity: float = 1.0
    contour_labels: bool = False
    emit_png: bool = False

    def validate(self):
        if not self.input:
            raise ConfigError("input", "an input CSV path is required")
        if not self.scalar:
            raise ConfigError("scalar", "a scalar attribute name is required")
        if self.grid_width < 16 or self.grid_height < 16:
            raise ConfigError("grid", "grid must be at least 16x16")
        if self.levels < 1 and not self.explicit_levels:
            raise ConfigError("levels", "need at least one contour level")
        if self.max_iter < 1:
            raise ConfigError("max_iter", "must be >= 1")
        if self.rel_tol <= 0:
            raise ConfigError("rel_tol", "must be positive")
        if self.init_mode not in ("classical", "random"):
            raise ConfigError("init_mode", "must be 'classical' or 'random'")
        if min(self.w_dd, self.w_aa, self.w_da) < 0 or max(
            self.w_dd, self.w_aa, self.w_da
        ) <= 0:
            raise ConfigError(
                "weights", "must be nonnegative with at least one positive"
            )
        return self

    def echo(self):
        return asdict(self)


_FIELDS = {f for f in PipelineConfig.__dataclass_fields__}


def load_toml(path):
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    unknown = set(raw) - _FIELDS
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown config key")
    return PipelineConfig(**raw)


def merge_overrides(cfg, overrides):
    """Apply non-None override values onto a config, in place."""
    for key, value in overrides.items():
        if value is None:
            continue
        if key not in _FIELDS:
            raise ConfigError(key, "unknown config key")
        setattr(cfg, key, value)
    return cfg
