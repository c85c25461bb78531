"""
Contrast Enhancement CLI
Offline runs of the enhancement pipeline over image files: single frames,
frame directories, method comparisons, lambda sweeps and the runtime bench
"""

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

# Add the service directory to the path when run as a script
sys.path.insert(0, str(Path(__file__).parent))

from config import Config, parse_fov, read_run_config_file
from models.baselines import SubtractionParams
from models.contrast_optimizer import EnhanceParams
from models.enhancer import METHODS, ContrastEnhancer, EnhancementResult
from models.evaluator import MethodMetrics, MetricsReport, comparison_grid, merge_metrics
from utils.fixtures import synthetic_backgrounds, synthetic_virtual_scene
from utils.image_preprocessor import BlurParams, FovMapping
from utils.raster import RasterImage, load_image, save_image

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_INVALID = 3

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff", ".webp")

BENCH_SIZE = (1268, 720)
BENCH_SAMPLES = 10
BENCH_COVERAGES = tuple(range(0, 101, 10))

# Keys accepted from a --config file, same names as the long flags
SETTING_KEYS = (
    "virtual", "background", "out", "report", "lambda_e", "jnd", "blur_sigma", "blur_kernel",
    "attenuation", "fov", "method", "workers", "subtract_k_v", "subtract_k_b", "emit_overlay",
    "no_chroma_constraint", "no_luminance_constraint", "no_jnd_constraint",
)


class UsageError(Exception):
    """Command line that cannot be acted on"""


class RunConfig(BaseModel):
    """Everything one CLI run needs, validated"""
    model_config = ConfigDict(frozen=True)

    virtual: Optional[Path] = None
    background: Optional[Path] = None
    out: Path = Path("out")
    report: Optional[Path] = None
    params: EnhanceParams = Field(default_factory=EnhanceParams)
    blur: BlurParams = Field(default_factory=BlurParams)
    mapping: FovMapping = Field(default_factory=FovMapping)
    subtraction: SubtractionParams = Field(default_factory=SubtractionParams)
    attenuation: float = Field(default=0.6, ge=0.0, le=1.0, allow_inf_nan=False)
    jnd: float = Field(default=2.3, ge=0.0, allow_inf_nan=False)
    method: str = "ours"
    emit_overlay: bool = False
    bench: bool = False
    workers: int = Field(default=1, ge=1)

    @field_validator("method")
    @classmethod
    def _known_method(cls, value: str) -> str:
        if value not in METHODS:
            raise ValueError(f"Unknown method '{value}'; expected one of {', '.join(METHODS)}")
        return value

    def check_paths(self):
        """Raise FileNotFoundError for missing inputs"""
        if self.virtual is None or self.background is None:
            raise UsageError("--virtual and --background are required")
        if not self.virtual.is_file():
            raise FileNotFoundError(f"Virtual image not found: {self.virtual}")
        if not self.background.exists():
            raise FileNotFoundError(f"Background not found: {self.background}")

    def report_path(self, name: str = "report.json") -> Path:
        return self.report or self.out / name

    def build_enhancer(self, params: Optional[EnhanceParams] = None) -> ContrastEnhancer:
        return ContrastEnhancer(
            params=params or self.params,
            blur=self.blur,
            mapping=self.mapping,
            attenuation=self.attenuation,
            subtraction=self.subtraction,
            jnd=self.jnd,
            workers=self.workers,
        )


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="contrast-enhance",
        description="Simulate color contrast enhancement for optical see-through displays",
    )
    parser.add_argument("--virtual", help="Rendered virtual image (alpha marks the foreground)")
    parser.add_argument("--background", help="Background capture, or a directory of frames")
    parser.add_argument("--out", help="Output directory (default: out)")
    parser.add_argument("--report", help="Metrics JSON path (default: OUT/report.json)")
    parser.add_argument("--config", help="KEY=VALUE run-config file; flags win over it")

    tuning = parser.add_argument_group("tuning")
    tuning.add_argument("--lambda-e", type=float, help=f"Scaled color-difference budget (default: {Config.LAMBDA_E})")
    tuning.add_argument("--jnd", type=float, help=f"Just noticeable difference, unscaled LAB (default: {Config.JND})")
    tuning.add_argument("--blur-sigma", type=float, help=f"Background blur sigma (default: {Config.BLUR_SIGMA})")
    tuning.add_argument("--blur-kernel", type=int, help=f"Odd blur kernel size (default: {Config.BLUR_KERNEL})")
    tuning.add_argument("--attenuation", type=float, help=f"Background attenuation (default: {Config.ATTENUATION})")
    tuning.add_argument("--fov", help=f"FoV calibration SU,SV,BU,BV (default: {Config.FOV})")
    tuning.add_argument("--method", help=f"One of {', '.join(METHODS)} (default: {Config.METHOD})")
    tuning.add_argument("--subtract-k-v", type=float, help="Display gain of subtraction compensation")
    tuning.add_argument("--subtract-k-b", type=float, help="Lens transparency of subtraction compensation")
    tuning.add_argument("--no-chroma-constraint", action="store_true", default=None, help="Ablation: drop the chroma gate")
    tuning.add_argument("--no-luminance-constraint", action="store_true", default=None, help="Ablation: keep the full luminance shift")
    tuning.add_argument("--no-jnd-constraint", action="store_true", default=None, help="Ablation: skip the JND step")
    tuning.add_argument("--workers", type=int, help="Optimizer threads; output does not depend on it")

    modes = parser.add_argument_group("modes")
    modes.add_argument("--emit-overlay", action="store_true", default=None, help="Also write the cyan enhanced-pixel overlay")
    modes.add_argument("--compare", help="Comma-separated methods to compare side by side")
    modes.add_argument("--sweep", help="Comma-separated lambda-e values to sweep")
    modes.add_argument("--bench", action="store_true", help="Run the per-stage runtime benchmark")
    modes.add_argument("--bench-size", default=f"{BENCH_SIZE[0]}x{BENCH_SIZE[1]}", help="Bench frame size WxH")
    modes.add_argument("--bench-samples", type=int, default=BENCH_SAMPLES, help="Bench samples per coverage step")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    return parser


def _config_defaults() -> Dict[str, object]:
    return {
        "lambda_e": Config.LAMBDA_E,
        "jnd": Config.JND,
        "blur_sigma": Config.BLUR_SIGMA,
        "blur_kernel": Config.BLUR_KERNEL,
        "attenuation": Config.ATTENUATION,
        "fov": Config.FOV,
        "method": Config.METHOD,
        "workers": Config.WORKERS,
        "subtract_k_v": Config.SUBTRACT_K_V,
        "subtract_k_b": Config.SUBTRACT_K_B,
    }


def resolve_settings(args: argparse.Namespace) -> Dict[str, object]:
    """Defaults and environment, then the --config file, then explicit flags"""
    settings = _config_defaults()
    if args.config:
        for key, value in read_run_config_file(args.config).items():
            if key not in SETTING_KEYS:
                logger.warning(f"Ignoring unknown run-config key '{key}'")
                continue
            settings[key] = value
    for key in SETTING_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    return settings


def _flag(value) -> bool:
    if isinstance(value, str):
        return value.strip().lower() in ("1", "true", "yes", "on")
    return bool(value)


def build_run_config(settings: Dict[str, object], bench: bool = False) -> RunConfig:
    """Validate resolved settings into a RunConfig; bad values raise ValueError"""
    jnd = float(settings["jnd"])
    params = EnhanceParams.from_unscaled_jnd(
        jnd,
        lambda_e=float(settings["lambda_e"]),
        chroma_constraint=not _flag(settings.get("no_chroma_constraint", False)),
        luminance_constraint=not _flag(settings.get("no_luminance_constraint", False)),
        jnd_constraint=not _flag(settings.get("no_jnd_constraint", False)),
    )
    return RunConfig(
        virtual=settings.get("virtual"),
        background=settings.get("background"),
        out=settings.get("out") or "out",
        report=settings.get("report"),
        params=params,
        blur=BlurParams(kernel_size=int(settings["blur_kernel"]), sigma=float(settings["blur_sigma"])),
        mapping=FovMapping.from_tuple(parse_fov(settings["fov"])),
        subtraction=SubtractionParams(k_v=float(settings["subtract_k_v"]), k_b=float(settings["subtract_k_b"])),
        attenuation=float(settings["attenuation"]),
        jnd=jnd,
        method=str(settings["method"]),
        emit_overlay=_flag(settings.get("emit_overlay", False)),
        bench=bench,
        workers=int(settings["workers"]),
    )


def list_frames(background: Path) -> List[Path]:
    """A single background file, or the image files of a directory in lexicographic order"""
    if background.is_file():
        return [background]
    frames = sorted(p for p in background.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    if not frames:
        raise FileNotFoundError(f"No background frames found in {background}")
    return frames


def _load_inputs(cfg: RunConfig) -> Tuple[RasterImage, List[Tuple[str, RasterImage]]]:
    cfg.check_paths()
    virtual = load_image(cfg.virtual)
    frames = [(path.stem, load_image(path)) for path in list_frames(cfg.background)]
    logger.info(f"Loaded virtual image {virtual.width}x{virtual.height} and {len(frames)} background frame(s)")
    return virtual, frames


def _prefix(stem: str, multi: bool) -> str:
    return f"{stem}_" if multi else ""


def _mean_timing(results: Sequence[EnhancementResult]) -> Dict[str, float]:
    stages = results[0].timing.keys()
    return {stage: float(np.mean([r.timing[stage] for r in results])) for stage in stages}


def _write_outputs(images: Dict[Path, RasterImage], report_path: Path, report: BaseModel):
    for path, image in images.items():
        save_image(image, path)
    report_path.parent.mkdir(parents=True, exist_ok=True)
    report_path.write_text(report.model_dump_json(indent=2))
    logger.info(f"Wrote {len(images)} image(s) and {report_path}")


def run_enhance(cfg: RunConfig) -> int:
    """
    Enhance every background frame with the configured method

    Writes enhanced.png, blend.png, optionally overlay.png, and the metrics
    report. Nothing is written until every frame has been processed.
    """
    virtual, frames = _load_inputs(cfg)
    enhancer = cfg.build_enhancer()
    multi = len(frames) > 1

    images: Dict[Path, RasterImage] = {}
    results = []
    for stem, background in frames:
        result = enhancer.run(virtual, background, cfg.method)
        results.append(result)
        prefix = _prefix(stem, multi)
        images[cfg.out / f"{prefix}enhanced.png"] = result.display
        images[cfg.out / f"{prefix}blend.png"] = result.blend
        if cfg.emit_overlay:
            images[cfg.out / f"{prefix}overlay.png"] = result.overlay

    report = MetricsReport.from_methods(
        [merge_metrics([r.metrics for r in results])],
        frames=[stem for stem, _ in frames],
        parameters={"method": cfg.method, **enhancer.describe()},
        timing=_mean_timing(results),
    )
    _write_outputs(images, cfg.report_path(), report)
    logger.info(f"Enhanced {report.enhanced_percent:.2f}% of foreground pixels")
    return EXIT_OK


def _unique_labels(methods: Sequence[str]) -> List[str]:
    seen: Dict[str, int] = {}
    labels = []
    for method in methods:
        seen[method] = seen.get(method, 0) + 1
        labels.append(method if seen[method] == 1 else f"{method}#{seen[method]}")
    return labels


def run_compare(cfg: RunConfig, methods: Sequence[str]) -> int:
    """Run several methods on the same inputs; writes a comparison grid and a ranked report"""
    if len(methods) < 2:
        raise ValueError(f"--compare needs at least two methods, got {len(methods)}")
    for method in methods:
        if method not in METHODS:
            raise ValueError(f"Unknown method '{method}'; expected one of {', '.join(METHODS)}")

    virtual, frames = _load_inputs(cfg)
    enhancer = cfg.build_enhancer()
    labels = _unique_labels(methods)
    multi = len(frames) > 1

    images: Dict[Path, RasterImage] = {}
    per_label: Dict[str, List[MethodMetrics]] = {label: [] for label in labels}
    all_results = []
    for stem, background in frames:
        results = enhancer.compare(virtual, background, methods)
        all_results.extend(results)
        captions = []
        for label, result in zip(labels, results):
            per_label[label].append(result.metrics)
            captions.append(f"{label} {result.metrics.enhanced_percent:.1f}%")
            if cfg.emit_overlay:
                images[cfg.out / f"{_prefix(stem, multi)}{label}_overlay.png"] = result.overlay
        grid = comparison_grid([r.blend for r in results], captions)
        images[cfg.out / f"{_prefix(stem, multi)}comparison.png"] = grid

    merged = [merge_metrics(per_label[label]).model_copy(update={"method": label}) for label in labels]
    report = MetricsReport.from_methods(
        merged,
        frames=[stem for stem, _ in frames],
        parameters={"methods": list(methods), **enhancer.describe()},
        timing=_mean_timing(all_results),
    )
    _write_outputs(images, cfg.report_path(), report)
    logger.info(f"Ranking by enhanced percentage: {', '.join(report.ranking)}")
    return EXIT_OK


def run_sweep(cfg: RunConfig, lambdas: Sequence[float]) -> int:
    """Enhanced percentage of the configured method for each lambda-e value"""
    if not lambdas:
        raise ValueError("--sweep needs at least one lambda-e value")
    virtual, frames = _load_inputs(cfg)

    merged = []
    all_results = []
    for value in lambdas:
        params = EnhanceParams(**{**cfg.params.model_dump(), "lambda_e": value})
        enhancer = cfg.build_enhancer(params)
        results = [enhancer.run(virtual, background, cfg.method) for _, background in frames]
        all_results.extend(results)
        label = f"lambda_e={value:g}"
        merged.append(merge_metrics([r.metrics for r in results]).model_copy(update={"method": label}))
        logger.info(f"{label}: {merged[-1].enhanced_percent:.2f}% enhanced")

    report = MetricsReport.from_methods(
        merged,
        frames=[stem for stem, _ in frames],
        parameters={"method": cfg.method, "sweep": list(lambdas), **cfg.build_enhancer().describe()},
        timing=_mean_timing(all_results),
    )
    _write_outputs({}, cfg.report_path(), report)
    return EXIT_OK


class StageTiming(BaseModel):
    mean: float
    min: float
    max: float


class BenchReport(BaseModel):
    """Per-stage wall time in milliseconds for each foreground coverage step"""
    width: int
    height: int
    samples: int
    method: str
    workers: int
    coverage: Dict[int, Dict[str, StageTiming]] = Field(default_factory=dict)


def parse_size(text: str) -> Tuple[int, int]:
    """Parse "WxH" into (width, height)"""
    try:
        width, height = (int(part) for part in text.lower().split("x"))
    except ValueError:
        raise ValueError(f"Size must look like WxH, got '{text}'")
    if width < 1 or height < 1:
        raise ValueError(f"Size must be positive, got '{text}'")
    return width, height


def run_bench(cfg: RunConfig, size: Tuple[int, int] = BENCH_SIZE, samples: int = BENCH_SAMPLES) -> int:
    """
    Time every pipeline stage over foreground coverage 0-100% in steps of 10

    Uses the --background capture when given, otherwise a synthetic one.
    """
    if samples < 1:
        raise ValueError(f"--bench-samples must be at least 1, got {samples}")
    width, height = size
    if cfg.background is not None and cfg.background.is_file():
        background = load_image(cfg.background)
    else:
        background = synthetic_backgrounds(width, height)["hue_ramp"]
    enhancer = cfg.build_enhancer()
    # First call compiles and loads the kernels
    enhancer.run(synthetic_virtual_scene(width, height, 1.0), background, cfg.method)

    report = BenchReport(width=width, height=height, samples=samples, method=cfg.method, workers=cfg.workers)
    for coverage in BENCH_COVERAGES:
        virtual = synthetic_virtual_scene(width, height, coverage / 100.0)
        runs = []
        for _ in range(samples):
            start = time.perf_counter()
            result = enhancer.run(virtual, background, cfg.method)
            result.timing["wall"] = (time.perf_counter() - start) * 1000.0
            runs.append(result.timing)
        report.coverage[coverage] = {
            stage: StageTiming(
                mean=float(np.mean([t[stage] for t in runs])),
                min=float(np.min([t[stage] for t in runs])),
                max=float(np.max([t[stage] for t in runs])),
            )
            for stage in runs[0]
        }
        total = report.coverage[coverage]["total"]
        logger.info(f"coverage {coverage:3d}%: total {total.mean:.2f} ms (min {total.min:.2f}, max {total.max:.2f})")

    _write_outputs({}, cfg.report_path("bench.json"), report)
    return EXIT_OK


def _split(text: str) -> List[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    Config.setup_logging("DEBUG" if args.verbose else None)

    try:
        cfg = build_run_config(resolve_settings(args), bench=args.bench)
        if cfg.bench:
            return run_bench(cfg, parse_size(args.bench_size), args.bench_samples)
        if args.compare:
            return run_compare(cfg, _split(args.compare))
        if args.sweep:
            return run_sweep(cfg, [float(v) for v in _split(args.sweep)])
        return run_enhance(cfg)
    except UsageError as e:
        logger.error(str(e))
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except (ValidationError, ValueError) as e:
        logger.error(f"Invalid parameter: {e}")
        return EXIT_INVALID
    except OSError as e:
        logger.error(f"I/O error: {e}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
