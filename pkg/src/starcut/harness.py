"""Batch evaluation: run cases from a manifest, score them, summarize.

A manifest is a JSON document::

    {
      "cases": [
        {
          "case_id": "p000",
          "image": "p000/image.png",
          "manual_mask": "p000/truth.png",
          "seeds": "p000/seeds.txt",
          "satisfied": true,
          "manual_time_s": 12.5
        }
      ]
    }

Relative paths resolve against the manifest's directory.  ``satisfied`` and
``manual_time_s`` are optional human-entered columns; satisfaction is never
computed.  Per-case failures become rows with an error column -- a batch
always runs to completion.

Per-case CSV header::

    case_id,dsc,hd_px,diff_a_mm,diff_b_mm,auto_time_s,manual_time_s,satisfied,error

``auto_time_s`` measures the segment() call only (no file I/O); it is not
directly comparable to interactive outlining times, and the summary outputs
carry a note saying so.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path

from . import metrics
from .artifacts import load_seeds_file
from .engine import TemplateConfig, default_config, segment
from .imaging import load_image, load_mask

PER_CASE_HEADER = [
    "case_id",
    "dsc",
    "hd_px",
    "diff_a_mm",
    "diff_b_mm",
    "auto_time_s",
    "manual_time_s",
    "satisfied",
    "error",
]

SUMMARY_METRICS = ["dsc", "hd_px", "diff_a_mm", "diff_b_mm", "auto_time_s", "manual_time_s"]

TIMING_NOTE = (
    "auto_time_s measures the segment() call only; "
    "manual_time_s is interactive outlining time -- the two are not directly comparable"
)


@dataclass(frozen=True)
class CaseRecord:
    case_id: str
    image: str
    manual_mask: str
    seeds: str
    satisfied: bool | None = None
    manual_time_s: float | None = None


@dataclass(frozen=True)
class CaseReport:
    case_id: str
    dsc: float | None = None
    hd_px: float | None = None
    diff_a_mm: float | None = None
    diff_b_mm: float | None = None
    auto_time_s: float | None = None
    manual_time_s: float | None = None
    satisfied: bool | None = None
    error: str | None = None


@dataclass(frozen=True)
class MetricSummary:
    n: int
    median: float
    mad: float


@dataclass(frozen=True)
class EvalSummary:
    stats: dict[str, MetricSummary]
    total_cases: int
    error_cases: int
    satisfied_count: int
    satisfied_known: int

    @property
    def satisfaction_rate(self) -> float | None:
        if self.satisfied_known == 0:
            return None
        return self.satisfied_count / self.satisfied_known


def load_manifest(path) -> tuple[list[CaseRecord], Path]:
    """Parse a manifest; returns the records and the base directory for paths."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise ValueError(f"manifest not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ValueError(f"manifest is not valid JSON: {exc}") from exc
    cases = doc.get("cases")
    if not isinstance(cases, list) or not cases:
        raise ValueError("manifest has no cases")
    records = []
    for raw in cases:
        records.append(
            CaseRecord(
                case_id=str(raw["case_id"]),
                image=raw["image"],
                manual_mask=raw["manual_mask"],
                seeds=raw["seeds"],
                satisfied=raw.get("satisfied"),
                manual_time_s=raw.get("manual_time_s"),
            )
        )
    ids = [r.case_id for r in records]
    if len(set(ids)) != len(ids):
        raise ValueError("case_ids must be unique")
    return records, path.parent


def evaluate_case(record: CaseRecord, cfg: TemplateConfig | None = None, base_dir=None) -> CaseReport:
    """Segment one case and score it against its manual mask.

    Any failure is captured in the report's error column instead of raised.
    """
    base = Path(base_dir) if base_dir is not None else Path(".")
    try:
        image = load_image(base / record.image)
        manual = load_mask(base / record.manual_mask)
        if (manual.width, manual.height) != (image.width, image.height):
            raise ValueError("manual mask dimensions do not match the image")
        if manual.count() == 0:
            raise ValueError("manual mask is empty")
        seed, helpers = load_seeds_file(base / record.seeds)
        result = segment(image, seed, helpers, cfg or default_config())
        manual_diam = metrics.diameters(manual, image.spacing)
        return CaseReport(
            case_id=record.case_id,
            dsc=metrics.dice(manual, result.mask),
            hd_px=metrics.hausdorff(manual, result.mask),
            diff_a_mm=abs(manual_diam.a - result.diameter_a),
            diff_b_mm=abs(manual_diam.b - result.diameter_b),
            auto_time_s=result.elapsed_ms / 1000.0,
            manual_time_s=record.manual_time_s,
            satisfied=record.satisfied,
        )
    except Exception as exc:  # per-case errors never abort the batch
        return CaseReport(case_id=record.case_id, satisfied=record.satisfied, error=str(exc))


def run_manifest(records, cfg: TemplateConfig | None = None, base_dir=None) -> list[CaseReport]:
    reports = [evaluate_case(r, cfg, base_dir) for r in records]
    return sorted(reports, key=lambda r: r.case_id)


def summarize(reports, satisfied_only: bool = False) -> EvalSummary:
    """Median/MAD per metric over the scored (non-error) cases."""
    scored = [r for r in reports if r.error is None]
    if satisfied_only:
        scored = [r for r in scored if r.satisfied]
    if not scored:
        raise ValueError("no cases left to summarize after filtering")
    stats = {}
    for name in SUMMARY_METRICS:
        values = [getattr(r, name) for r in scored if getattr(r, name) is not None]
        if values:
            med, mad = metrics.median_mad(values)
            stats[name] = MetricSummary(n=len(values), median=med, mad=mad)
    with_flag = [r for r in reports if r.satisfied is not None]
    return EvalSummary(
        stats=stats,
        total_cases=len(reports),
        error_cases=sum(1 for r in reports if r.error is not None),
        satisfied_count=sum(1 for r in with_flag if r.satisfied),
        satisfied_known=len(with_flag),
    )


# ---------------------------------------------------------------------------
# emission


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def per_case_csv(reports) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(PER_CASE_HEADER)
    for r in reports:
        writer.writerow([_format_cell(getattr(r, col)) for col in PER_CASE_HEADER])
    return buf.getvalue()


def parse_per_case_csv(text: str) -> list[CaseReport]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != PER_CASE_HEADER:
        raise ValueError("unexpected per-case CSV header")
    reports = []
    for row in rows[1:]:
        cells = dict(zip(PER_CASE_HEADER, row))
        reports.append(
            CaseReport(
                case_id=cells["case_id"],
                dsc=float(cells["dsc"]) if cells["dsc"] else None,
                hd_px=float(cells["hd_px"]) if cells["hd_px"] else None,
                diff_a_mm=float(cells["diff_a_mm"]) if cells["diff_a_mm"] else None,
                diff_b_mm=float(cells["diff_b_mm"]) if cells["diff_b_mm"] else None,
                auto_time_s=float(cells["auto_time_s"]) if cells["auto_time_s"] else None,
                manual_time_s=float(cells["manual_time_s"]) if cells["manual_time_s"] else None,
                satisfied={"true": True, "false": False}.get(cells["satisfied"]),
                error=cells["error"] or None,
            )
        )
    return reports


def summary_csv(summary: EvalSummary) -> str:
    lines = [f"# {TIMING_NOTE}", "metric,n,median,mad"]
    for name in SUMMARY_METRICS:
        if name in summary.stats:
            s = summary.stats[name]
            lines.append(f"{name},{s.n},{s.median!r},{s.mad!r}")
    if summary.satisfaction_rate is not None:
        lines.append(
            f"# satisfied {summary.satisfied_count}/{summary.satisfied_known}"
            f" ({100.0 * summary.satisfaction_rate:.1f}%)"
        )
    lines.append(f"# errors {summary.error_cases}/{summary.total_cases}")
    return "\n".join(lines) + "\n"


def summary_table(summary: EvalSummary) -> str:
    """Human-readable aligned table: one metric per row with n, median, MAD."""
    rows = [("metric", "n", "median", "MAD")]
    for name in SUMMARY_METRICS:
        if name in summary.stats:
            s = summary.stats[name]
            rows.append((name, str(s.n), f"{s.median:.4f}", f"{s.mad:.4f}"))
    widths = [max(len(row[i]) for row in rows) for i in range(4)]
    lines = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip() for row in rows]
    if summary.satisfaction_rate is not None:
        lines.append(
            f"satisfied: {summary.satisfied_count}/{summary.satisfied_known}"
            f" ({100.0 * summary.satisfaction_rate:.1f}%)"
        )
    lines.append(f"errors: {summary.error_cases}/{summary.total_cases}")
    lines.append(f"note: {TIMING_NOTE}")
    return "\n".join(lines) + "\n"


def per_case_table(reports) -> str:
    rows = [tuple(PER_CASE_HEADER)]
    for r in reports:
        rows.append(tuple(_format_cell(getattr(r, col)) for col in PER_CASE_HEADER))
    widths = [max(len(row[i]) for row in rows) for i in range(len(PER_CASE_HEADER))]
    return (
        "\n".join(
            "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip()
            for row in rows
        )
        + "\n"
    )


def emit_report(summary: EvalSummary, reports, out_dir, fmt: str = "csv") -> dict[str, Path]:
    """Write the per-case table and the summary in the chosen format."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        per_case_path = out / "per_case.csv"
        per_case_path.write_text(per_case_csv(reports))
        summary_path = out / "summary.csv"
        summary_path.write_text(summary_csv(summary))
    elif fmt == "txt":
        per_case_path = out / "per_case.txt"
        per_case_path.write_text(per_case_table(reports))
        summary_path = out / "summary.txt"
        summary_path.write_text(summary_table(summary))
    else:
        raise ValueError(f"unknown report format: {fmt!r}")
    return {"per_case": per_case_path, "summary": summary_path}
