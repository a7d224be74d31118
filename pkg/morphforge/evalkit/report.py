# morphforge/evalkit/report.py

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from lxml import etree

from morphforge.config import format_float
from morphforge.core.exceptions import ArtifactIOError, MetricsError
from morphforge.evalkit.metrics import (
    POOLED,
    MorphMatchRecord,
    ScoreSet,
    apcer,
    bpcer,
    bpcer_at_apcer,
    det_curve,
)

logger = logging.getLogger(__name__)

SCORE_HEADER = ["variant", "label", "score"]
SIMILARITY_HEADER = ["morph_id", "variant", "similarity_a", "similarity_b"]

SVG_NS = "http://www.w3.org/2000/svg"
PLOT_SIZE = 400
MARGIN = 60
LOG_FLOOR = 1e-4
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


@dataclass(frozen=True)
class ReportPaths:
    default_table: Path
    operating_points: Path
    det_plot: Path

    @classmethod
    def in_directory(cls, directory: str | Path, prefix: str = "") -> "ReportPaths":
        directory = Path(directory)
        return cls(
            default_table=directory / f"{prefix}default_threshold.csv",
            operating_points=directory / f"{prefix}bpcer_at_apcer.csv",
            det_plot=directory / f"{prefix}det.svg",
        )


def _write_rows(path: Path, header: list[str], rows: Sequence[Sequence[object]]) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as e:
        raise ArtifactIOError(detail=f"Cannot write {path}: {e}")


def write_score_csv(scores: ScoreSet, path: str | Path) -> None:
    rows = [["genuine", "bona_fide", format_float(s)] for s in scores.bona_fide]
    for variant in scores.variants:
        rows.extend([variant, "attack", format_float(s)] for s in scores.attacks[variant])
    _write_rows(Path(path), SCORE_HEADER, rows)


def read_score_csv(path: str | Path) -> ScoreSet:
    bona_fide: list[float] = []
    attacks: dict[str, list[float]] = {}
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            reader = csv.DictReader(handle)
            if reader.fieldnames != SCORE_HEADER:
                raise MetricsError(detail=f"{path}: expected header {','.join(SCORE_HEADER)}")
            for line_number, row in enumerate(reader, start=2):
                try:
                    value = float(row["score"])
                except (TypeError, ValueError):
                    raise MetricsError(detail=f"{path}:{line_number}: bad score '{row['score']}'")
                if row["label"] == "bona_fide":
                    bona_fide.append(value)
                elif row["label"] == "attack":
                    attacks.setdefault(row["variant"], []).append(value)
                else:
                    raise MetricsError(detail=f"{path}:{line_number}: unknown label '{row['label']}'")
    except OSError as e:
        raise ArtifactIOError(detail=f"Cannot read score file {path}: {e}")
    return ScoreSet(bona_fide=bona_fide, attacks=attacks)


def read_similarity_csv(path: str | Path) -> dict[str, list[MorphMatchRecord]]:
    """``morph_id,variant,similarity_a,similarity_b`` rows grouped by variant."""
    records: dict[str, list[MorphMatchRecord]] = {}
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            reader = csv.DictReader(handle)
            if reader.fieldnames != SIMILARITY_HEADER:
                raise MetricsError(detail=f"{path}: expected header {','.join(SIMILARITY_HEADER)}")
            for line_number, row in enumerate(reader, start=2):
                try:
                    record = MorphMatchRecord(
                        row["morph_id"], float(row["similarity_a"]), float(row["similarity_b"])
                    )
                except (TypeError, ValueError):
                    raise MetricsError(detail=f"{path}:{line_number}: bad similarity value")
                records.setdefault(row["variant"], []).append(record)
    except OSError as e:
        raise ArtifactIOError(detail=f"Cannot read similarity file {path}: {e}")
    return records


def write_mar_csv(rows: list[dict[str, float | str]], path: str | Path) -> None:
    if not rows:
        raise MetricsError(detail="No MAR rows to write")
    header = list(rows[0].keys())
    body = [
        [row[key] if isinstance(row[key], str) else format_float(row[key]) for key in header]
        for row in rows
    ]
    _write_rows(Path(path), header, body)


def _log_position(value: float, length: float) -> float:
    clipped = min(max(value, LOG_FLOOR), 1.0)
    return (math.log10(clipped) - math.log10(LOG_FLOOR)) / -math.log10(LOG_FLOOR) * length


def det_svg(scores: ScoreSet, title: str = "DET") -> bytes:
    """DET plot on log10 axes clipped to [1e-4, 1]: APCER across, BPCER up."""
    width = height = PLOT_SIZE + 2 * MARGIN
    root = etree.Element(
        f"{{{SVG_NS}}}svg",
        nsmap={None: SVG_NS},
        width=str(width),
        height=str(height),
        viewBox=f"0 0 {width} {height}",
    )
    etree.SubElement(root, f"{{{SVG_NS}}}title").text = title
    etree.SubElement(
        root,
        f"{{{SVG_NS}}}rect",
        x=str(MARGIN),
        y=str(MARGIN),
        width=str(PLOT_SIZE),
        height=str(PLOT_SIZE),
        fill="none",
        stroke="black",
    )

    decades = int(round(-math.log10(LOG_FLOOR)))
    for exponent in range(-decades, 1):
        offset = _log_position(10.0**exponent, PLOT_SIZE)
        label = f"1e{exponent}" if exponent else "1"
        etree.SubElement(
            root, f"{{{SVG_NS}}}text", x=f"{MARGIN + offset:.2f}", y=str(MARGIN + PLOT_SIZE + 18),
            **{"text-anchor": "middle", "font-size": "11"},
        ).text = label
        etree.SubElement(
            root, f"{{{SVG_NS}}}text", x=str(MARGIN - 6), y=f"{MARGIN + PLOT_SIZE - offset + 4:.2f}",
            **{"text-anchor": "end", "font-size": "11"},
        ).text = label
    etree.SubElement(
        root, f"{{{SVG_NS}}}text", x=str(MARGIN + PLOT_SIZE // 2), y=str(height - 12),
        **{"text-anchor": "middle", "font-size": "13"},
    ).text = "APCER"
    etree.SubElement(
        root, f"{{{SVG_NS}}}text", x="16", y=str(MARGIN + PLOT_SIZE // 2),
        transform=f"rotate(-90 16 {MARGIN + PLOT_SIZE // 2})",
        **{"text-anchor": "middle", "font-size": "13"},
    ).text = "BPCER"

    for index, variant in enumerate(scores.variants):
        color = COLORS[index % len(COLORS)]
        points = " ".join(
            f"{MARGIN + _log_position(p.apcer, PLOT_SIZE):.2f},"
            f"{MARGIN + PLOT_SIZE - _log_position(p.bpcer, PLOT_SIZE):.2f}"
            for p in det_curve(scores, variant)
        )
        etree.SubElement(
            root, f"{{{SVG_NS}}}polyline", points=points, fill="none", stroke=color,
            **{"stroke-width": "1.5", "data-variant": variant},
        )
        etree.SubElement(
            root, f"{{{SVG_NS}}}text", x=str(MARGIN + PLOT_SIZE - 8), y=str(MARGIN + 16 + 16 * index),
            fill=color, **{"text-anchor": "end", "font-size": "12"},
        ).text = variant

    return etree.tostring(root, xml_declaration=True, encoding="UTF-8", pretty_print=True)


def emit_report(
    scores: ScoreSet,
    targets: Sequence[float],
    paths: ReportPaths,
    default_threshold: float = 0.0,
) -> None:
    """Write the default-threshold table, BPCER@APCER table and DET plot."""
    variants = scores.variants
    _write_rows(
        paths.default_table,
        ["threshold", "bpcer"] + [f"apcer_{v}" for v in variants],
        [
            [format_float(default_threshold), format_float(bpcer(scores.bona_fide, default_threshold))]
            + [format_float(apcer(scores.attacks[v], default_threshold)) for v in variants]
        ],
    )

    rows = []
    for variant in variants + [POOLED]:
        for target in targets:
            point = bpcer_at_apcer(scores, variant, target)
            rows.append(
                [
                    variant,
                    format_float(target),
                    format_float(point.apcer),
                    format_float(point.bpcer),
                    format_float(point.threshold),
                    str(point.achieved).lower(),
                ]
            )
    _write_rows(
        paths.operating_points,
        ["variant", "apcer_target", "apcer", "bpcer", "threshold", "achieved"],
        rows,
    )

    try:
        paths.det_plot.write_bytes(det_svg(scores))
    except OSError as e:
        raise ArtifactIOError(detail=f"Cannot write {paths.det_plot}: {e}")
    logger.info(
        f"Report written: {paths.default_table}, {paths.operating_points}, {paths.det_plot}"
    )
