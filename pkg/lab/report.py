"""
Description: Report files of a lab or selftest run: one CSV of report rows
per suite, a summary JSON and an optional PDF.

Nothing written here depends on timings, so reruns with any thread count
produce identical CSV and JSON files.
"""

import csv
import json
import logging
import math

from django.utils import timezone
from reportlab.graphics import renderPDF
from reportlab.graphics.charts.barcharts import VerticalBarChart
from reportlab.graphics.shapes import Drawing
from reportlab.lib import colors
from reportlab.lib.pagesizes import A4
from reportlab.pdfgen import canvas

from .suites.base import ROW_COLUMNS

logger = logging.getLogger(__name__)

W, H = A4
PASS_COLOR = colors.HexColor("#16a34a")
FAIL_COLOR = colors.HexColor("#dc2626")


def worst_ratio(rows):
    """Largest finite lhs / rhs among the rows, or None."""
    ratios = [float(row["ratio"]) for row in rows]
    finite = [r for r in ratios if math.isfinite(r)]
    return max(finite) if finite else None


def summarize(results):
    """JSON-ready summary: overall result and, per suite, statuses and the worst ratio."""
    suites = {}
    for name, output in results.items():
        total, passed, failed, skipped = output["summary"]
        suites[name] = {
            "result": output["result"],
            "total": total,
            "passed": passed,
            "failed": failed,
            "skipped": skipped,
            "worst_ratio": worst_ratio(output["rows"]),
            "checks": {
                check: {"status": r["status"], "message": r["message"]}
                for check, r in sorted(output["checks"].items())
            },
        }
    overall = all(s["result"] == "PASS" for s in suites.values())
    return {"result": "PASS" if overall else "FAIL", "suites": suites}


def write_rows(path, rows, columns=ROW_COLUMNS):
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(columns), extrasaction="ignore")
        writer.writeheader()
        writer.writerows(rows)
    return path


def write_report(out_dir, results):
    """
    Writes <suite>.csv for every suite and summary.json.

    Returns:
        list: paths written, in a fixed order.
    """
    paths = []
    for name, output in results.items():
        paths.append(write_rows(out_dir / f"{name}.csv", output["rows"]))
    summary_path = out_dir / "summary.json"
    with open(summary_path, "w") as f:
        json.dump(summarize(results), f, indent=2, sort_keys=True)
    paths.append(summary_path)
    logger.info(f"Wrote {len(paths)} report files to {out_dir}")
    return paths


class LabPDFReport:
    MARGIN = 50
    TOP = H - 60
    BOTTOM = 70
    LINE = 18

    def __init__(self, buffer, results, title="OrliczLab Report", manifest=None):
        self.buffer = buffer
        self.pdf = canvas.Canvas(self.buffer, pagesize=A4)
        self.now = timezone.now()
        self.results = results
        self.title = title
        self.manifest = manifest or {}
        self.y = self.TOP

    def generate(self):
        summary = summarize(self.results)
        self.draw_title_page(summary)
        self.draw_worst_ratios(summary)
        self.draw_suite_table(summary)
        self.draw_failures(summary)
        self.pdf.save()
        return self.buffer

    # cursor helpers
    def new_page(self, heading=None):
        self.pdf.showPage()
        self.y = self.TOP
        if heading:
            self.pdf.setFont("Helvetica-Bold", 20)
            self.pdf.drawString(self.MARGIN, self.y, heading)
            self.y -= 40

    def write_line(self, cells, font=("Helvetica", 11), color=colors.black, heading=None):
        """Writes one row of (x offset, text) cells, breaking the page when full."""
        if self.y < self.BOTTOM:
            self.new_page(heading)
        self.pdf.setFont(*font)
        self.pdf.setFillColor(color)
        for offset, text in cells:
            self.pdf.drawString(self.MARGIN + offset, self.y, text)
        self.pdf.setFillColor(colors.black)
        self.y -= self.LINE

    def draw_title_page(self, summary):
        self.pdf.setFont("Helvetica-Bold", 28)
        self.pdf.drawString(self.MARGIN, self.y - 30, self.title)
        self.y -= 70
        self.pdf.setFont("Helvetica", 12)
        self.pdf.setFillColor(colors.grey)
        generated = self.now.strftime("%Y-%m-%d %H:%M")
        self.pdf.drawString(self.MARGIN, self.y, f"Generated: {generated}")
        self.pdf.setFillColor(colors.black)
        self.y -= 40

        result_color = PASS_COLOR if summary["result"] == "PASS" else FAIL_COLOR
        self.write_line([(0, summary["result"])], font=("Helvetica-Bold", 16), color=result_color)
        self.y -= 10

        params = []
        grid = self.manifest.get("grid")
        if grid:
            params.append(("Grid", f"n={grid['n']}, L={grid['L']:g}, N={grid['N']}"))
        for key in ("family", "potential"):
            if key in self.manifest:
                params.append((key.capitalize(), str(self.manifest[key])))
        suites = list(summary["suites"].values())
        for key in ("total", "passed", "failed", "skipped"):
            label = "Checks" if key == "total" else key.capitalize()
            params.append((label, str(sum(s[key] for s in suites))))
        for label, value in params:
            self.write_line([(0, f"{label}:"), (110, value)], font=("Helvetica", 12))

    def draw_worst_ratios(self, summary):
        """Bar chart of the largest lhs / rhs per suite; suites without rows are left out."""
        bars = [(name, s["worst_ratio"]) for name, s in summary["suites"].items()
                if s["worst_ratio"] is not None]
        if not bars:
            return
        self.new_page("Worst lhs / rhs per suite")
        width = W - 2 * self.MARGIN
        drawing = Drawing(width, 300)
        chart = VerticalBarChart()
        chart.x, chart.y = 40, 60
        chart.width, chart.height = width - 80, 220
        chart.data = [[value for _, value in bars]]
        chart.categoryAxis.categoryNames = [name for name, _ in bars]
        chart.categoryAxis.labels.angle = 30
        chart.categoryAxis.labels.boxAnchor = "ne"
        chart.bars[0].fillColor = colors.HexColor("#2563eb")
        chart.valueAxis.valueMin = 0
        chart.valueAxis.valueMax = max(1.0, max(value for _, value in bars)) * 1.1
        drawing.add(chart)
        renderPDF.draw(drawing, self.pdf, self.MARGIN, self.y - 320)
        self.y -= 340

    def draw_suite_table(self, summary):
        heading = "Suite Summary"
        self.new_page(heading)
        columns = (0, 190, 250, 310, 390)
        header = ["Suite", "Pass", "Fail", "Skipped", "Worst ratio"]
        self.write_line(list(zip(columns, header)), font=("Helvetica-Bold", 12))
        for name, s in summary["suites"].items():
            worst = "-" if s["worst_ratio"] is None else f"{s['worst_ratio']:.4g}"
            cells = [name[:28], str(s["passed"]), str(s["failed"]), str(s["skipped"]), worst]
            color = FAIL_COLOR if s["failed"] else colors.black
            self.write_line(list(zip(columns, cells)), color=color, heading=heading)

    def draw_failures(self, summary):
        heading = "Failed Checks"
        self.new_page(heading)
        failures = [
            (suite, check, r["message"])
            for suite, s in summary["suites"].items()
            for check, r in s["checks"].items()
            if r["status"] == "FAIL"
        ]
        if not failures:
            self.write_line([(0, "No failed checks.")])
        for suite, check, message in failures:
            cells = [(0, suite[:20]), (120, check[:28]), (280, self.format_message(message))]
            self.write_line(cells, font=("Helvetica", 10), heading=heading)
        self.pdf.showPage()

    @staticmethod
    def format_message(message, max_len=45):
        if not message:
            return "No message."
        return message if len(message) <= max_len else message[: max_len - 3] + "..."


def write_pdf(path, results, title, manifest=None):
    with open(path, "wb") as f:
        LabPDFReport(f, results, title=title, manifest=manifest).generate()
    logger.info(f"Wrote PDF report {path}")
    return path
