"""Standalone SVG bar charts from a benchmark summary CSV."""
from __future__ import annotations

import csv
from pathlib import Path
from xml.sax.saxutils import escape

from .bench import SUMMARY_FIELDS

WIDTH, HEIGHT = 640, 400
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 70, 20, 50, 90
COLORS = ("#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860", "#da8bc3")


class SummaryFormatError(ValueError):
    def __init__(self, path, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.line = line


def read_summary(path) -> list[dict]:
    """Parse a summary CSV, skipping ``#`` comment lines; errors carry line numbers."""
    rows = []
    header = None
    with open(path, newline="") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip() or line.startswith("#"):
                continue
            fields = next(csv.reader([line]))
            if header is None:
                if fields != SUMMARY_FIELDS:
                    raise SummaryFormatError(path, lineno, f"unexpected header {fields}")
                header = fields
                continue
            if len(fields) != len(header):
                raise SummaryFormatError(
                    path, lineno, f"expected {len(header)} fields, got {len(fields)}"
                )
            row = dict(zip(header, fields))
            try:
                for key in header[2:]:
                    row[key] = float(row[key])
            except ValueError as exc:
                raise SummaryFormatError(path, lineno, str(exc)) from None
            rows.append(row)
    if header is None:
        raise SummaryFormatError(path, 1, "missing header")
    if not rows:
        raise SummaryFormatError(path, 2, "no summary rows")
    return rows


def _nice_max(value: float) -> float:
    if value <= 0:
        return 1.0
    magnitude = 10 ** len(str(int(value))) / 10
    for step in (1, 2, 2.5, 5, 10):
        if step * magnitude >= value:
            return step * magnitude
    return 10 * magnitude


def bar_chart_svg(task: str, rows: list[dict]) -> str:
    """Steps-to-goal bars (with std whiskers) annotated with success rate."""
    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    top = _nice_max(max(r["steps_mean"] + r["steps_std"] for r in rows))
    slot = plot_w / len(rows)
    bar_w = slot * 0.6

    def y(v):
        return MARGIN_TOP + plot_h * (1.0 - v / top)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="24" text-anchor="middle" font-size="15">'
        f"{escape(task)}: steps to goal</text>",
    ]
    for i in range(5):
        v = top * i / 4
        out.append(
            f'<line x1="{MARGIN_LEFT}" y1="{y(v):.1f}" x2="{WIDTH - MARGIN_RIGHT}" '
            f'y2="{y(v):.1f}" stroke="#dddddd"/>'
        )
        out.append(
            f'<text x="{MARGIN_LEFT - 6}" y="{y(v) + 4:.1f}" text-anchor="end">{v:g}</text>'
        )
    for i, r in enumerate(rows):
        cx = MARGIN_LEFT + slot * (i + 0.5)
        x0 = cx - bar_w / 2
        mean, std = r["steps_mean"], r["steps_std"]
        color = COLORS[i % len(COLORS)]
        out.append(
            f'<rect x="{x0:.1f}" y="{y(mean):.1f}" width="{bar_w:.1f}" '
            f'height="{y(0) - y(mean):.1f}" fill="{color}"/>'
        )
        if std > 0:
            out.append(
                f'<line x1="{cx:.1f}" y1="{y(mean + std):.1f}" x2="{cx:.1f}" '
                f'y2="{y(max(mean - std, 0.0)):.1f}" stroke="black"/>'
            )
        out.append(
            f'<text x="{cx:.1f}" y="{y(mean + std) - 6:.1f}" text-anchor="middle">'
            f'{r["success_pct"]:.0f}%</text>'
        )
        out.append(
            f'<text x="{cx:.1f}" y="{HEIGHT - MARGIN_BOTTOM + 16}" text-anchor="end" '
            f'transform="rotate(-30 {cx:.1f} {HEIGHT - MARGIN_BOTTOM + 16})">'
            f'{escape(r["method"])}</text>'
        )
    out.append(
        f'<line x1="{MARGIN_LEFT}" y1="{y(0):.1f}" x2="{WIDTH - MARGIN_RIGHT}" '
        f'y2="{y(0):.1f}" stroke="black"/>'
    )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _slug(text: str) -> str:
    return "".join(c if c.isalnum() or c in "-_" else "_" for c in text)


def write_plots(summary_path, out_dir) -> list[Path]:
    """One SVG per task next to ``out_dir``; returns the written paths."""
    rows = read_summary(summary_path)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tasks = list(dict.fromkeys(r["task"] for r in rows))
    written = []
    for task in tasks:
        path = out_dir / f"{_slug(task)}.svg"
        path.write_text(bar_chart_svg(task, [r for r in rows if r["task"] == task]))
        written.append(path)
    return written
