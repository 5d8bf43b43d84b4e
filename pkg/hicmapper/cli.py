"""
hicmapper command line

Each pipeline stage is a subcommand that reads the previous stage's files and
writes its own, plus a manifest.json (config echo and SHA-256 of inputs):

    bin        pair files         -> <sample>.coo
    smooth     .coo files         -> <sample>.coo
    bands      .coo files         -> bands.csv
    scc        .coo files         -> similarities.csv, distances.csv
    mds        distances.csv      -> filters.csv
    mapper     distances, filters -> mapper.json, mapper.dot
    diagram    mapper.json        -> diagram_f<s>.csv
    bootstrap  distances, filters, mapper.json -> report.json, points.csv
    pipeline   pair directory (or --distance-matrix) -> all of the above
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .core.config import settings
from .core.errors import DegenerateInputError, DimensionError, EmptyInputError, HicMapperError, InputParseError
from .logging_config import get_component_logger, log_section_header, setup_logging
from .models.contact_models import ContactMap, DistanceMatrix, FragmentPairRecord
from .models.mapper_models import FilterValues, MapperGraph, MetricDataset
from .models.pipeline_models import PipelineConfig, RunManifest
from .models.topology_models import BootstrapConfig, ConfidenceReport, ExtendedDiagram
from .services import file_formats
from .services.bootstrap_stats import run_bootstrap
from .services.contact_ingest import band_fractions, bin_pairs, group_by_sample, parse_pairs, smooth
from .services.extended_persistence import extended_diagrams
from .services.mapper_core import auto_cover, build_mapper, select_delta
from .services.scc_metric import distances_from_similarities, pairwise_similarities
from .services.spectral_filters import mds_filters

logger = get_component_logger("cli")

STAGES = ("bin", "smooth", "bands", "scc", "mds", "mapper", "diagram", "bootstrap", "pipeline")
CONTACT_SUFFIX = ".coo"
DENSE_SUFFIX = ".csv"
BAND_COLUMNS = ("near_fraction", "mitotic_fraction")


def _check_aligned(distances: DistanceMatrix, filters: FilterValues, graph: Optional[MapperGraph] = None):
    """
    Raises:
        DimensionError: If the inputs do not list the same samples in the same order
    """
    if list(filters.sample_ids) != list(distances.sample_ids):
        raise DimensionError("filter sample ids do not match distance matrix sample ids")
    if graph is not None and list(graph.sample_ids) != list(distances.sample_ids):
        raise DimensionError("Mapper graph sample ids do not match distance matrix sample ids")


class StageRunner:
    """Runs stages for one command, tracking inputs and outputs for the manifest."""

    def __init__(self, command: str, config: PipelineConfig, out_dir: Path):
        self.command = command
        self.config = config
        self.out_dir = Path(out_dir)
        self.inputs: Dict[str, str] = {}
        self.outputs: List[str] = []

    # ====================
    # BOOKKEEPING
    # ====================

    def track_input(self, path: Path):
        path = Path(path)
        if not path.is_file():
            raise InputParseError("input file not found", source=str(path))
        self.inputs[str(path)] = file_formats.sha256_file(path)

    def output(self, name: str) -> Path:
        self.outputs.append(name)
        return self.out_dir / name

    def write_contacts(self, maps: Dict[str, ContactMap], subdir: str):
        """
        One .coo per sample (and a dense .csv with --dense-csv).

        Raises:
            InputParseError: If a sample id cannot serve as a file name
        """
        for sample_id in maps:
            if not sample_id or sample_id in (".", "..") or any(sep in sample_id for sep in ("/", "\\")):
                raise InputParseError(f"sample id {sample_id!r} cannot be used as a file name")
        for sample_id, contact_map in maps.items():
            file_formats.write_contact_map(self.output(f"{subdir}{sample_id}{CONTACT_SUFFIX}"), contact_map)
            if self.config.dense_csv:
                file_formats.write_dense_csv(self.output(f"{subdir}{sample_id}{DENSE_SUFFIX}"), contact_map)

    def write_manifest(self):
        manifest = RunManifest(
            version=__version__,
            command=self.command,
            config=self.config.echo(),
            inputs=dict(sorted(self.inputs.items())),
            outputs=self.outputs,
        )
        file_formats.write_manifest(self.out_dir / "manifest.json", manifest)
        logger.info(f"🧾 Manifest written to {self.out_dir / 'manifest.json'}")

    # ====================
    # INPUT LOADING
    # ====================

    def load_pairs(self, paths: Sequence[Path]) -> Dict[str, List[FragmentPairRecord]]:
        files: List[Path] = []
        for path in paths:
            files.extend(file_formats.pair_files(path) if Path(path).is_dir() else [Path(path)])
        records: List[FragmentPairRecord] = []
        for path in files:
            self.track_input(path)
            with open(path, "r", encoding="utf-8") as handle:
                records.extend(parse_pairs(handle, source=str(path)))
        logger.info(f"📥 {len(records)} fragment pairs from {len(files)} file(s)")
        return group_by_sample(records)

    def load_contact_maps(self, paths: Sequence[Path]) -> Dict[str, ContactMap]:
        files: List[Path] = []
        for path in paths:
            path = Path(path)
            if path.is_dir():
                files.extend(sorted(p for p in path.iterdir() if p.suffix == CONTACT_SUFFIX))
            else:
                files.append(path)
        maps: Dict[str, ContactMap] = {}
        for path in files:
            self.track_input(path)
            maps[path.stem] = file_formats.read_contact_map(path)
        if not maps:
            raise EmptyInputError("no contact map files found")
        return maps

    def load_distances(self, path: Path) -> DistanceMatrix:
        self.track_input(path)
        return file_formats.read_sample_matrix(path, DistanceMatrix)

    def load_filters(self, path: Path) -> FilterValues:
        self.track_input(path)
        return file_formats.read_filters(path)

    def load_metadata(self, paths: Sequence[Path], sample_ids: Sequence[str]) -> Dict[str, np.ndarray]:
        columns: Dict[str, np.ndarray] = {}
        for path in paths or []:
            self.track_input(path)
            columns.update(file_formats.read_metadata(path, sample_ids))
        return columns

    # ====================
    # STAGES
    # ====================

    def bin(self, grouped: Dict[str, List[FragmentPairRecord]], subdir: str = "") -> Dict[str, ContactMap]:
        if not grouped:
            raise EmptyInputError("no fragment pairs to bin")
        n_bins = self.config.n_bins
        if n_bins is None:
            top = max(max(r.pos_a, r.pos_b) for records in grouped.values() for r in records)
            n_bins = top // self.config.bin_size + 1
        log_section_header(logger, f"BIN {len(grouped)} SAMPLES ({n_bins} x {self.config.bin_size}bp)")
        maps = {sample_id: bin_pairs(records, self.config.bin_size, n_bins) for sample_id, records in grouped.items()}
        self.write_contacts(maps, subdir)
        return maps

    def smooth(self, maps: Dict[str, ContactMap], subdir: str = "") -> Dict[str, ContactMap]:
        log_section_header(logger, f"SMOOTH h={self.config.smoothing_radius}")
        smoothed = {
            sample_id: smooth(contact_map, self.config.smoothing_radius) for sample_id, contact_map in maps.items()
        }
        self.write_contacts(smoothed, subdir)
        return smoothed

    def bands(self, maps: Dict[str, ContactMap], tolerate_degenerate: bool = False) -> Dict[str, np.ndarray]:
        log_section_header(logger, "BAND FRACTIONS")
        sample_ids = list(maps)
        columns = {name: np.full(len(sample_ids), np.nan) for name in BAND_COLUMNS}
        for index, sample_id in enumerate(sample_ids):
            try:
                near, mitotic = band_fractions(
                    maps[sample_id], self.config.near_max, self.config.mitotic_min, self.config.mitotic_max
                )
            except DegenerateInputError as exc:
                if not tolerate_degenerate:
                    raise DegenerateInputError(f"sample {sample_id!r}: {exc}") from exc
                logger.warning(f"⚠️  {sample_id}: {exc}")
                continue
            columns["near_fraction"][index] = near
            columns["mitotic_fraction"][index] = mitotic
        file_formats.write_metadata(self.output("bands.csv"), sample_ids, columns)
        return columns

    def scc(self, maps: Dict[str, ContactMap]) -> DistanceMatrix:
        log_section_header(logger, "PAIRWISE SCC")
        similarities = pairwise_similarities(
            list(maps.values()), list(maps), self.config.max_separation, self.config.workers
        )
        distances = distances_from_similarities(similarities)
        file_formats.write_sample_matrix(self.output("similarities.csv"), similarities)
        file_formats.write_sample_matrix(self.output("distances.csv"), distances)
        return distances

    def mds(self, distances: DistanceMatrix) -> FilterValues:
        log_section_header(logger, f"SPECTRAL FILTERS (p={self.config.p})")
        filters = mds_filters(distances, self.config.p, self.config.scale_by_sqrt_eigenvalue)
        file_formats.write_filters(self.output("filters.csv"), filters)
        return filters

    def mapper(
        self,
        distances: DistanceMatrix,
        filters: FilterValues,
        metadata: Optional[Dict[str, np.ndarray]] = None,
    ) -> MapperGraph:
        log_section_header(logger, "MAPPER")
        _check_aligned(distances, filters)
        data = MetricDataset(sample_ids=distances.sample_ids, dist=distances.values)
        delta = select_delta(data, self.config.beta, self.config.delta_draws, self.config.seed)
        cover = auto_cover(filters, delta, data, self.config.gains_for(filters.p))
        graph = build_mapper(data, filters, cover, delta, self.config.node_function, metadata)
        logger.info(
            f"🕸️  {len(graph.nodes)} nodes, {len(graph.edges)} edges, "
            f"{graph.n_components} component(s), cycle rank {graph.cycle_rank}"
        )
        file_formats.write_mapper_json(self.output("mapper.json"), graph)
        file_formats.write_mapper_dot(self.output("mapper.dot"), graph)
        return graph

    def diagrams(self, graph: MapperGraph) -> List[ExtendedDiagram]:
        log_section_header(logger, "EXTENDED PERSISTENCE")
        diagrams = extended_diagrams(graph)
        for diagram in diagrams:
            name = file_formats.diagram_path("", diagram.filter_coordinate).name
            file_formats.write_diagram_csv(self.output(name), diagram)
            logger.info(f"📈 f_{diagram.filter_coordinate + 1}: {len(diagram.points)} point(s)")
        return diagrams

    def bootstrap(
        self,
        distances: DistanceMatrix,
        filters: FilterValues,
        graph: MapperGraph,
        diagrams: List[ExtendedDiagram],
    ) -> ConfidenceReport:
        log_section_header(logger, f"BOOTSTRAP ({self.config.bootstrap_iterations} iterations)")
        _check_aligned(distances, filters, graph)
        data = MetricDataset(sample_ids=distances.sample_ids, dist=distances.values)
        config = BootstrapConfig(
            n_iterations=self.config.bootstrap_iterations,
            seed=self.config.seed,
            confidence_level=self.config.confidence_level,
        )
        report = run_bootstrap(
            data, filters, graph.cover, graph.delta, diagrams, config, graph.node_function, self.config.workers
        )
        extra = {"delta": graph.delta, "cycle_rank": graph.cycle_rank}
        file_formats.write_report_json(self.output("report.json"), report, extra)
        file_formats.write_points_csv(self.output("points.csv"), report)
        for record in report.per_point:
            if record.significant:
                logger.info(
                    f"✅ f_{record.coordinate + 1} {record.point.kind.value} "
                    f"({record.point.birth:.4g}, {record.point.death:.4g}) confidence {record.confidence:.2f}"
                )
        return report

    def pipeline(
        self,
        pairs_dir: Optional[Path],
        distance_matrix: Optional[Path],
        metadata_paths: Sequence[Path],
    ) -> ConfidenceReport:
        band_columns: Dict[str, np.ndarray] = {}
        if distance_matrix is not None:
            distances = self.load_distances(distance_matrix)
        elif pairs_dir is not None:
            grouped = self.load_pairs([pairs_dir])
            raw = self.bin(grouped, subdir="contacts/raw/")
            smoothed = self.smooth(raw, subdir="contacts/smoothed/")
            band_columns = self.bands(smoothed if self.config.bands_on_smoothed else raw, tolerate_degenerate=True)
            distances = self.scc(smoothed)
        else:
            raise InputParseError("pipeline needs a pair directory or --distance-matrix")

        filters = self.mds(distances)
        metadata = dict(band_columns)
        metadata.update(self.load_metadata(metadata_paths, distances.sample_ids))
        graph = self.mapper(distances, filters, metadata)
        diagrams = self.diagrams(graph)
        return self.bootstrap(distances, filters, graph, diagrams)


# ====================
# ARGUMENTS
# ====================

def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", default=".", help="Output directory (default: current directory)")
    common.add_argument("--workers", type=int, default=settings.workers, help="Worker processes for parallel stages")
    common.add_argument("--log-level", default=settings.log_level.upper(),
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="Terminal log level")
    common.add_argument("--log-file", default=settings.log_file, help="Detailed log file (optional)")
    return common


def _add_bin_args(parser: argparse.ArgumentParser):
    parser.add_argument("--bin-size", type=int, default=settings.bin_size, help="Bin size in bp (default: 500000)")
    parser.add_argument("--n-bins", type=int, default=None, help="Number of bins (default: from largest position)")


def _add_smooth_args(parser: argparse.ArgumentParser):
    parser.add_argument("--h", type=int, default=settings.smoothing_radius, help="Smoothing window radius (default: 1)")


def _add_dense_arg(parser: argparse.ArgumentParser):
    parser.add_argument("--dense-csv", action=argparse.BooleanOptionalAction, default=settings.dense_csv,
                        help="Also write each contact map as a dense CSV")


def _add_band_args(parser: argparse.ArgumentParser):
    parser.add_argument("--near-max", type=int, default=settings.near_max, help="Near band upper bound (bp)")
    parser.add_argument("--mitotic-min", type=int, default=settings.mitotic_min, help="Mitotic band lower bound (bp)")
    parser.add_argument("--mitotic-max", type=int, default=settings.mitotic_max, help="Mitotic band upper bound (bp)")


def _add_scc_args(parser: argparse.ArgumentParser):
    parser.add_argument("--cap-k", type=int, default=settings.max_separation,
                        help="Largest stratum separation in bins (default: uncapped)")


def _add_mds_args(parser: argparse.ArgumentParser):
    parser.add_argument("--p", type=int, default=settings.n_filters, help="Number of filter coordinates (default: 2)")
    parser.add_argument("--scale-by-sqrt-eigenvalue", action=argparse.BooleanOptionalAction,
                        default=settings.scale_by_sqrt_eigenvalue, help="Scale eigenvectors by sqrt(eigenvalue)")


def _add_mapper_args(parser: argparse.ArgumentParser):
    parser.add_argument("--gains", type=float, nargs="+", default=[settings.gain],
                        help="Gain per filter coordinate in (1/3, 1/2); one value applies to all")
    parser.add_argument("--beta", type=float, default=settings.beta, help="Subsample exponent (default: 0.05)")
    parser.add_argument("--delta-draws", type=int, default=settings.delta_draws,
                        help="Subsamples for the delta median (default: 10)")
    parser.add_argument("--node-function", choices=["mean", "midpoint"], default=settings.node_function,
                        help="Node value: member mean or cube midpoint")
    parser.add_argument("--metadata", type=Path, action="append", default=[],
                        help="CSV (sample_id, columns...) averaged onto nodes; repeatable")


def _add_bootstrap_args(parser: argparse.ArgumentParser):
    parser.add_argument("--iterations", type=int, default=settings.bootstrap_iterations,
                        help="Bootstrap iterations (default: 100)")
    parser.add_argument("--confidence", type=float, default=settings.confidence_level,
                        help="Confidence level in (0, 1) (default: 0.90)")


def _add_seed(parser: argparse.ArgumentParser):
    parser.add_argument("--seed", type=int, required=True, help="Seed for every random draw")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hicmapper",
        description="Topological summaries of Hi-C contact map collections",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = _common_parser()
    commands = parser.add_subparsers(dest="command", required=True)

    stage = commands.add_parser("bin", parents=[common], help="Bin fragment pairs into contact maps")
    stage.add_argument("inputs", type=Path, nargs="+", help="Pair files or directories")
    _add_bin_args(stage)
    _add_dense_arg(stage)

    stage = commands.add_parser("smooth", parents=[common], help="Moving-average smoothing")
    stage.add_argument("inputs", type=Path, nargs="+", help=".coo files or directories")
    _add_smooth_args(stage)
    _add_dense_arg(stage)

    stage = commands.add_parser("bands", parents=[common], help="Near / mitotic band fractions")
    stage.add_argument("inputs", type=Path, nargs="+", help=".coo files or directories")
    _add_band_args(stage)

    stage = commands.add_parser("scc", parents=[common], help="Pairwise SCC and d_SCC matrices")
    stage.add_argument("inputs", type=Path, nargs="+", help=".coo files or directories")
    _add_scc_args(stage)

    stage = commands.add_parser("mds", parents=[common], help="Spectral filters from a distance matrix")
    stage.add_argument("distances", type=Path, help="Distance matrix CSV")
    _add_mds_args(stage)

    stage = commands.add_parser("mapper", parents=[common], help="Mapper graph with automatic parameters")
    stage.add_argument("--distances", type=Path, required=True, help="Distance matrix CSV")
    stage.add_argument("--filters", type=Path, required=True, help="Filter CSV")
    _add_mapper_args(stage)
    _add_seed(stage)

    stage = commands.add_parser("diagram", parents=[common], help="Extended persistence diagrams")
    stage.add_argument("mapper", type=Path, help="mapper.json")

    stage = commands.add_parser("bootstrap", parents=[common], help="Bootstrap confidence report")
    stage.add_argument("--distances", type=Path, required=True, help="Distance matrix CSV")
    stage.add_argument("--filters", type=Path, required=True, help="Filter CSV")
    stage.add_argument("--mapper", type=Path, required=True, help="mapper.json")
    _add_bootstrap_args(stage)
    _add_seed(stage)

    stage = commands.add_parser("pipeline", parents=[common], help="Every stage end to end")
    stage.add_argument("pairs_dir", type=Path, nargs="?", help="Directory of fragment-pair files")
    stage.add_argument("--distance-matrix", type=Path, help="Start from a distance matrix CSV instead")
    stage.add_argument("--bands-on-smoothed", action=argparse.BooleanOptionalAction,
                       default=settings.bands_on_smoothed, help="Band fractions from smoothed maps")
    _add_bin_args(stage)
    _add_smooth_args(stage)
    _add_band_args(stage)
    _add_dense_arg(stage)
    _add_scc_args(stage)
    _add_mds_args(stage)
    _add_mapper_args(stage)
    _add_bootstrap_args(stage)
    _add_seed(stage)

    return parser


def build_config(args: argparse.Namespace) -> PipelineConfig:
    """Validated config from parsed flags; flags a stage lacks keep their settings defaults."""
    return PipelineConfig.checked(
        bin_size=getattr(args, "bin_size", settings.bin_size),
        n_bins=getattr(args, "n_bins", None),
        smoothing_radius=getattr(args, "h", settings.smoothing_radius),
        near_max=getattr(args, "near_max", settings.near_max),
        mitotic_min=getattr(args, "mitotic_min", settings.mitotic_min),
        mitotic_max=getattr(args, "mitotic_max", settings.mitotic_max),
        bands_on_smoothed=getattr(args, "bands_on_smoothed", settings.bands_on_smoothed),
        dense_csv=getattr(args, "dense_csv", settings.dense_csv),
        max_separation=getattr(args, "cap_k", settings.max_separation),
        p=getattr(args, "p", settings.n_filters),
        scale_by_sqrt_eigenvalue=getattr(args, "scale_by_sqrt_eigenvalue", settings.scale_by_sqrt_eigenvalue),
        gains=getattr(args, "gains", [settings.gain]),
        beta=getattr(args, "beta", settings.beta),
        delta_draws=getattr(args, "delta_draws", settings.delta_draws),
        seed=getattr(args, "seed", None),
        node_function=getattr(args, "node_function", settings.node_function),
        bootstrap_iterations=getattr(args, "iterations", settings.bootstrap_iterations),
        confidence_level=getattr(args, "confidence", settings.confidence_level),
        workers=args.workers,
    )


def run_stage(command: str, args: argparse.Namespace, config: PipelineConfig) -> int:
    """
    Run one subcommand and write its manifest.

    Returns:
        0 on success

    Raises:
        HicMapperError: Any stage failure (carries the exit code)
    """
    runner = StageRunner(command, config, Path(args.out_dir))

    if command == "bin":
        runner.bin(runner.load_pairs(args.inputs))
    elif command == "smooth":
        runner.smooth(runner.load_contact_maps(args.inputs))
    elif command == "bands":
        runner.bands(runner.load_contact_maps(args.inputs))
    elif command == "scc":
        runner.scc(runner.load_contact_maps(args.inputs))
    elif command == "mds":
        runner.mds(runner.load_distances(args.distances))
    elif command == "mapper":
        distances = runner.load_distances(args.distances)
        filters = runner.load_filters(args.filters)
        runner.mapper(distances, filters, runner.load_metadata(args.metadata, distances.sample_ids))
    elif command == "diagram":
        runner.track_input(args.mapper)
        runner.diagrams(file_formats.read_mapper_json(args.mapper))
    elif command == "bootstrap":
        distances = runner.load_distances(args.distances)
        filters = runner.load_filters(args.filters)
        runner.track_input(args.mapper)
        graph = file_formats.read_mapper_json(args.mapper)
        runner.bootstrap(distances, filters, graph, extended_diagrams(graph))
    elif command == "pipeline":
        runner.pipeline(args.pairs_dir, args.distance_matrix, args.metadata)
    else:
        raise HicMapperError(f"unknown command {command!r}")

    runner.write_manifest()
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    setup_logging(args.log_file, getattr(logging, args.log_level))
    logger.debug(f"Command: {args.command}")

    try:
        config = build_config(args)
        return run_stage(args.command, args, config)
    except HicMapperError as exc:
        logger.debug("Stage failed", exc_info=True)
        print(f"❌ {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
