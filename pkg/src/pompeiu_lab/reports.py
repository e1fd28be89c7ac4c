"""Plot-ready CSV/JSON reports with the resolved run configuration as a header block."""

import csv
import io
import json
import numbers
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any

from .asymptotics import AsymptoticComparison
from .bvp import TrefftzSolution
from .models import OutputFormat
from .pompeiu import DirectionSample, MomentFit, MomentReport
from .search import DefectReport
from .special import BesselZero


def _plain(value: Any) -> Any:
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (bool, int, float, str)):
        return value
    if isinstance(value, numbers.Integral):
        return int(value)
    return float(value)


def _cell(value: Any) -> str:
    value = _plain(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    return repr(value) if isinstance(value, float) else str(value)


@dataclass
class ReportTable:
    """Rows of fixed columns; rendering is byte-identical for identical inputs."""

    title: str
    columns: list[str]
    rows: list[list[Any]] = field(default_factory=list)
    header: dict[str, Any] = field(default_factory=dict)

    def add_row(self, *values: Any) -> None:
        if len(values) != len(self.columns):
            raise ValueError(
                f"{self.title}: expected {len(self.columns)} values, got {len(values)}"
            )
        self.rows.append(list(values))

    def to_csv(self) -> str:
        buffer = io.StringIO()
        buffer.write(f"# report: {self.title}\n")
        for key, value in self.header.items():
            buffer.write(f"# {key}: {json.dumps(value)}\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_cell(v) for v in row])
        return buffer.getvalue()

    def to_json(self) -> str:
        document = {
            "report": self.title,
            "config": self.header,
            "columns": self.columns,
            "data": {
                column: [_plain(row[i]) for row in self.rows]
                for i, column in enumerate(self.columns)
            },
        }
        return json.dumps(document, indent=2) + "\n"

    def render(self, output_format: OutputFormat) -> str:
        return self.to_json() if output_format == OutputFormat.JSON else self.to_csv()

    def write(self, path: Path | None, output_format: OutputFormat) -> str:
        text = self.render(output_format)
        if path is not None:
            Path(path).write_text(text)
        return text


def direction_table(samples: list[DirectionSample], header: dict | None = None) -> ReportTable:
    table = ReportTable(
        "indicator_transform",
        ["re_alpha1", "im_alpha1", "re_alpha2", "im_alpha2", "re", "im", "error_estimate"],
        header=header or {},
    )
    for sample in samples:
        a1, a2 = sample.direction.alpha1, sample.direction.alpha2
        table.add_row(
            a1.real, a1.imag, a2.real, a2.imag, sample.value.real, sample.value.imag,
            sample.error_estimate,
        )
    return table


def moment_table(reports: list[MomentReport], header: dict | None = None) -> ReportTable:
    table = ReportTable(
        "moments",
        ["j", "log_scale", "re_scaled", "im_scaled", "log_abs", "error_estimate", "nodes_used"],
        header=header or {},
    )
    for r in reports:
        table.add_row(
            r.j, r.log_scale, r.scaled_value.real, r.scaled_value.imag, r.log_abs,
            r.error_estimate, r.nodes_used,
        )
    return table


def extraction_table(
    fit: MomentFit, direct: list[MomentReport], header: dict | None = None
) -> ReportTable:
    table = ReportTable(
        "extract_moments",
        ["l", "re_extracted", "im_extracted", "re_direct", "im_direct", "relative_error"],
        header=header or {},
    )
    for l, (extracted, report) in enumerate(zip(fit.moments, direct)):
        value = report.value
        error = abs(extracted - value) / abs(value) if value else abs(extracted)
        table.add_row(l, extracted.real, extracted.imag, value.real, value.imag, error)
    return table


def comparison_table(comparison: AsymptoticComparison, header: dict | None = None) -> ReportTable:
    table = ReportTable(
        "compare_asymptotics",
        [
            "m", "log_abs_direct", "log_abs_predicted", "re_ratio", "im_ratio",
            "re_laplace_ratio", "im_laplace_ratio", "re_single_point_ratio",
            "im_single_point_ratio", "flagged",
        ],
        header=header or {},
    )
    for row in comparison.rows:
        table.add_row(
            row.m, row.log_abs_direct, row.log_abs_predicted,
            row.stated_ratio.real, row.stated_ratio.imag,
            row.laplace_ratio.real, row.laplace_ratio.imag,
            row.single_point_ratio.real, row.single_point_ratio.imag, row.flagged,
        )
    return table


def scan_table(solutions: list[TrefftzSolution], header: dict | None = None) -> ReportTable:
    table = ReportTable(
        "trefftz_scan",
        ["k", "boundary_residual", "neumann_defect", "condition", "rank", "status"],
        header=header or {},
    )
    for s in solutions:
        table.add_row(s.k, s.boundary_residual, s.neumann_defect, s.condition, s.rank, s.severity)
    return table


def trace_table(report: DefectReport, order: int, header: dict | None = None) -> ReportTable:
    coefficient_columns = [f"a_{m}" for m in range(1, order + 1)] + [
        f"b_{m}" for m in range(1, order + 1)
    ]
    table = ReportTable(
        "minimize_defect", ["iteration", "defect", "k", *coefficient_columns], header=header or {}
    )
    for point in report.trace:
        cos = list(point.cos_coeffs) + [0.0] * (order - len(point.cos_coeffs))
        sin = list(point.sin_coeffs) + [0.0] * (order - len(point.sin_coeffs))
        table.add_row(point.iteration, point.defect, point.k, *cos[:order], *sin[:order])
    return table


def zero_table(zeros: list[BesselZero], header: dict | None = None) -> ReportTable:
    table = ReportTable(
        "bessel_zeros", ["order", "index", "value", "residual"], header=header or {}
    )
    for z in zeros:
        table.add_row(z.order, z.index, z.value, z.residual)
    return table
