"""File outputs: results/bounds CSV schemas and the SVG scatter plot.

All writers go through an atomic temp-file + rename so partially written
files never appear, and floats are serialized with repr so reruns with the
same seed produce byte-identical files.
"""

import csv
import io
import os
import tempfile

from .errors import SchemaError
from .simulation import parse_method

RESULTS_HEADER = (
    "run_id,method,sigma_a,sigma_c,sigma_e,beta_true,beta_hat,"
    "err_unreg,err_method,lambda_method"
)
BOUNDS_HEADER = "trial,sup_gap,margin,violated"

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def atomic_write_text(path, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x) -> str:
    return repr(float(x))


def results_csv_text(records, methods) -> str:
    """One row per (run, requested method string), in run then method order."""
    by_key = {(r.run_id, r.method): r for r in records}
    run_ids = sorted({r.run_id for r in records})
    lines = [RESULTS_HEADER]
    for run_id in run_ids:
        for m in methods:
            selector, family = parse_method(m)
            rec = by_key[(run_id, family)]
            err = rec.err_concorr if selector == "concorr" else rec.err_cv
            lam = rec.lambda_concorr if selector == "concorr" else rec.lambda_cv
            lines.append(
                ",".join(
                    [
                        str(run_id),
                        m,
                        _fmt(rec.sigma_a),
                        _fmt(rec.sigma_c),
                        _fmt(rec.sigma_e),
                        _fmt(rec.beta_true),
                        _fmt(rec.beta_hat),
                        _fmt(rec.err_unreg),
                        _fmt(err),
                        _fmt(lam),
                    ]
                )
            )
    return "\n".join(lines) + "\n"


def read_results_rows(path):
    """Parse a results CSV; raises SchemaError on any header or cell mismatch."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        rows = [r for r in reader if r]
    if not rows or ",".join(rows[0]) != RESULTS_HEADER:
        raise SchemaError(f"{path}: expected header {RESULTS_HEADER!r}")
    names = rows[0]
    out = []
    for r in rows[1:]:
        if len(r) != len(names):
            raise SchemaError(f"{path}: ragged row {r!r}")
        rec = dict(zip(names, r))
        try:
            for k in names:
                if k not in ("method",):
                    rec[k] = float(rec[k])
        except ValueError as exc:
            raise SchemaError(f"{path}: non-numeric cell ({exc})") from exc
        out.append(rec)
    if not out:
        raise SchemaError(f"{path}: no data rows")
    return out


def bounds_csv_text(result) -> str:
    lines = [BOUNDS_HEADER]
    margin = result["margin"]
    for t, (gap, bad) in enumerate(zip(result["sup_gaps"], result["violated"])):
        lines.append(f"{t},{_fmt(gap)},{_fmt(margin)},{int(bad)}")
    return "\n".join(lines) + "\n"


def _svg_escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def scatter_svg_text(rows, title: str = "") -> str:
    """Scatter of err_method (y) against err_unreg (x) on the unit square.

    Reference lines mark the two baselines: the diagonal (unregularized
    error) and the horizontal 1/2 line (trivial zero vector).  Exactly one
    circle element is emitted per input row; the legend uses rectangles.
    """
    left, top, size = 60.0, 30.0, 420.0
    width, height = left + size + 180.0, top + size + 60.0

    def sx(v):
        return left + min(max(v, 0.0), 1.0) * size

    def sy(v):
        return top + (1.0 - min(max(v, 0.0), 1.0)) * size

    methods = []
    for r in rows:
        if r["method"] not in methods:
            methods.append(r["method"])
    color = {m: PALETTE[i % len(PALETTE)] for i, m in enumerate(methods)}

    out = io.StringIO()
    out.write(
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width:.0f}" height="{height:.0f}" '
        f'viewBox="0 0 {width:.0f} {height:.0f}">\n'
    )
    out.write(f'<rect x="0" y="0" width="{width:.0f}" height="{height:.0f}" fill="white"/>\n')
    out.write(
        f'<rect x="{left}" y="{top}" width="{size}" height="{size}" '
        f'fill="none" stroke="black" stroke-width="1"/>\n'
    )
    for tick in (0.0, 0.25, 0.5, 0.75, 1.0):
        out.write(
            f'<text x="{sx(tick):.1f}" y="{top + size + 18:.1f}" font-size="11" '
            f'text-anchor="middle">{tick:g}</text>\n'
        )
        out.write(
            f'<text x="{left - 8:.1f}" y="{sy(tick) + 4:.1f}" font-size="11" '
            f'text-anchor="end">{tick:g}</text>\n'
        )
    out.write(
        f'<line x1="{sx(0)}" y1="{sy(0)}" x2="{sx(1)}" y2="{sy(1)}" '
        f'stroke="#cc3333" stroke-width="1.2"/>\n'
    )
    out.write(
        f'<line x1="{sx(0)}" y1="{sy(0.5)}" x2="{sx(1)}" y2="{sy(0.5)}" '
        f'stroke="#33aa33" stroke-width="1.2"/>\n'
    )
    out.write(
        f'<text x="{left + size / 2:.1f}" y="{top + size + 42:.1f}" font-size="13" '
        f'text-anchor="middle">unregularized relative squared error</text>\n'
    )
    out.write(
        f'<text x="16" y="{top + size / 2:.1f}" font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 16 {top + size / 2:.1f})">method relative squared error</text>\n'
    )
    if title:
        out.write(
            f'<text x="{left + size / 2:.1f}" y="18" font-size="13" '
            f'text-anchor="middle">{_svg_escape(title)}</text>\n'
        )
    for r in rows:
        out.write(
            f'<circle cx="{sx(r["err_unreg"]):.2f}" cy="{sy(r["err_method"]):.2f}" '
            f'r="3" fill="{color[r["method"]]}" fill-opacity="0.55"/>\n'
        )
    ly = top + 10
    for m in methods:
        out.write(f'<rect x="{left + size + 16:.1f}" y="{ly - 9:.1f}" width="10" height="10" fill="{color[m]}"/>\n')
        out.write(
            f'<text x="{left + size + 32:.1f}" y="{ly:.1f}" font-size="12">{_svg_escape(m)}</text>\n'
        )
        ly += 18
    out.write("</svg>\n")
    return out.getvalue()
