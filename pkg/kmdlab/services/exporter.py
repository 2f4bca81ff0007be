"""
Sweep result export.

CSV holds the statistics table only (one row per grid cell); JSON carries
the full SweepResult including run metadata; SVG renders one group of box
plots per delay count over the companion orders.
"""
import csv
import json
import logging
from pathlib import Path
from typing import List, Optional, Union

import matplotlib
from matplotlib import rc_context
from matplotlib.figure import Figure
from pydantic import ValidationError

from kmdlab.core.exceptions import CsvFormatError, ExportError, InputError
from kmdlab.models.enums import ExportFormat, IndicatorKind
from kmdlab.models.responses import CellStats, SweepResult

logger = logging.getLogger(__name__)
logging.getLogger("matplotlib").setLevel(logging.WARNING)

CSV_COLUMNS = ["theta", "delays", "min", "q1", "median", "q3", "max", "count"]

# Floor for plotting non-positive values on a log axis
LOG_FLOOR = 1e-17

INDICATOR_LABELS = {
    IndicatorKind.DFT_DISTANCE: "Relative distance to DFT",
    IndicatorKind.KMD_QUALITY: "KMD-Quality",
    IndicatorKind.PRUNED_SPECTRUM: "Eigenvalues with non-trivial modes",
}


def format_for(path: Union[str, Path]) -> ExportFormat:
    """Export format implied by a file suffix."""
    suffix = Path(path).suffix.lower().lstrip(".")
    try:
        return ExportFormat(suffix)
    except ValueError:
        raise ExportError(str(path), f"unknown output suffix '.{suffix}' (expected csv, json or svg)")


def _prepare(path: Path) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ExportError(str(path), f"cannot create parent directory: {e}")
    return path


def write_csv(result: SweepResult, path: Path) -> Path:
    """Statistics table with shortest round-trip floats."""
    try:
        with open(_prepare(path), "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(CSV_COLUMNS)
            for c in result.cells:
                writer.writerow([
                    c.theta, c.delays,
                    repr(c.min), repr(c.q1), repr(c.median), repr(c.q3), repr(c.max),
                    c.count,
                ])
    except OSError as e:
        raise ExportError(str(path), str(e))
    return path


def write_json(result: SweepResult, path: Path) -> Path:
    try:
        _prepare(path).write_text(result.model_dump_json(indent=2), encoding="utf-8")
    except OSError as e:
        raise ExportError(str(path), str(e))
    return path


def render_figure(result: SweepResult, log_scale: Optional[bool] = None) -> Figure:
    """
    Grouped box plots: one group per delay count, one box per θ.

    Artists of each group carry the SVG id prefix ``delays-<d>-``. Log scale
    defaults to on for DftDistance.
    """
    if log_scale is None:
        log_scale = result.indicator is IndicatorKind.DFT_DISTANCE

    delays = result.delay_values
    thetas = result.theta_values
    fig = Figure(figsize=(max(6.0, 0.6 * len(thetas) * len(delays)), 4.5))
    ax = fig.add_subplot(1, 1, 1)
    colors = matplotlib.colormaps["viridis"].resampled(max(len(delays), 2))

    group_width = 0.8
    box_width = group_width / len(delays)
    for k, d in enumerate(delays):
        cells = sorted((c for c in result.cells if c.delays == d), key=lambda c: c.theta)
        stats = []
        positions = []
        for c in cells:
            values = [c.min, c.q1, c.median, c.q3, c.max]
            if log_scale:
                values = [max(v, LOG_FLOOR) for v in values]
            lo, q1, med, q3, hi = values
            stats.append({
                'whislo': lo, 'q1': q1, 'med': med, 'q3': q3, 'whishi': hi,
                'fliers': [], 'label': str(c.theta),
            })
            positions.append(thetas.index(c.theta) - group_width / 2 + (k + 0.5) * box_width)

        artists = ax.bxp(
            stats, positions=positions, widths=box_width * 0.9,
            patch_artist=True, showfliers=False, manage_ticks=False,
        )
        color = colors(k)
        for name, items in artists.items():
            for i, artist in enumerate(items):
                artist.set_gid(f"delays-{d}-{name}-{i}")
        for box in artists['boxes']:
            box.set_facecolor(color)
        artists['boxes'][0].set_label(f"d = {d}")

    ax.set_xticks(range(len(thetas)))
    ax.set_xticklabels([str(t) for t in thetas])
    ax.set_xlabel("Companion order θ")
    ax.set_ylabel(INDICATOR_LABELS[result.indicator])
    if log_scale:
        ax.set_yscale("log")
    ax.set_title(f"{result.system}: {result.indicator.value} over {result.ensemble_size} trajectories")
    ax.legend(title="Delays", loc="best")
    fig.tight_layout()
    return fig


def write_svg(result: SweepResult, path: Path, log_scale: Optional[bool] = None) -> Path:
    fig = render_figure(result, log_scale)
    try:
        # Fixed hash salt and no date keep the SVG byte-stable across runs
        with rc_context({'svg.hashsalt': "kmdlab"}):
            fig.savefig(_prepare(path), format="svg", metadata={'Date': None})
    except OSError as e:
        raise ExportError(str(path), str(e))
    return path


def export_result(
    result: SweepResult,
    path: Union[str, Path],
    fmt: Optional[Union[ExportFormat, str]] = None,
    log_scale: Optional[bool] = None,
) -> Path:
    """
    Write a sweep result.

    Args:
        result: Sweep result with at least one cell
        path: Output file
        fmt: csv, json or svg (defaults to the file suffix)
        log_scale: SVG y-axis scale

    Raises:
        ExportError: Unknown format or unwritable path
    """
    path = Path(path)
    fmt = ExportFormat(fmt) if fmt is not None else format_for(path)

    if fmt is ExportFormat.CSV:
        write_csv(result, path)
    elif fmt is ExportFormat.JSON:
        write_json(result, path)
    else:
        write_svg(result, path, log_scale)

    logger.info(f"Wrote {fmt.value.upper()} result ({len(result.cells)} cells) to {path}")
    return path


def _read_csv_cells(path: Path) -> List[CellStats]:
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != CSV_COLUMNS:
            raise CsvFormatError(str(path), f"header must be {','.join(CSV_COLUMNS)}", 1)
        cells = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(CSV_COLUMNS):
                raise CsvFormatError(str(path), f"expected {len(CSV_COLUMNS)} fields, got {len(row)}", line_no)
            try:
                cells.append(CellStats(
                    theta=int(row[0]), delays=int(row[1]),
                    min=float(row[2]), q1=float(row[3]), median=float(row[4]),
                    q3=float(row[5]), max=float(row[6]),
                    count=int(row[7]),
                ))
            except (ValueError, ValidationError) as e:
                raise CsvFormatError(str(path), f"invalid row: {e}", line_no)
    if not cells:
        raise CsvFormatError(str(path), "no data rows")
    return cells


def load_result(
    path: Union[str, Path],
    indicator: IndicatorKind = IndicatorKind.DFT_DISTANCE,
) -> SweepResult:
    """
    Read a CSV or JSON sweep result.

    CSV files carry no run metadata: ``indicator`` is taken from the argument
    and the ensemble size from the largest cell count.
    """
    path = Path(path)
    if not path.is_file():
        raise InputError(f"Result file not found: {path}", details={'path': str(path)})

    fmt = format_for(path)
    if fmt is ExportFormat.JSON:
        try:
            return SweepResult.model_validate(json.loads(path.read_text(encoding="utf-8")))
        except (json.JSONDecodeError, ValidationError) as e:
            raise InputError(f"Invalid result JSON {path}: {e}", details={'path': str(path)})
    if fmt is ExportFormat.CSV:
        cells = _read_csv_cells(path)
        return SweepResult(
            indicator=indicator,
            ensemble_size=max(c.count for c in cells),
            cells=cells,
        )
    raise InputError(f"Cannot load a result from {fmt.value.upper()}", details={'path': str(path)})
