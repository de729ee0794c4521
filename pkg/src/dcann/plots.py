"""Static SVG line charts of aggregated sweep results.

Output is plain text built with fixed number formatting, so the same
aggregate always produces byte-identical files.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

from .harness import AggregateRow

SCORES = ("accuracy", "precision", "recall", "f1")
METHOD_STYLE = {"logit": ("#222222", ""), "mlp": ("#d62728", "")}
PROB_DASH = {"mean_prob_actual": "", "mean_prob_predicted": "6,3"}
METHOD_LABEL = {"logit": "multinomial logit", "mlp": "neural network"}


@dataclass
class Series:
    label: str
    color: str
    dash: str
    points: list[tuple[float, float]]


def _f(x: float) -> str:
    return f"{x:.2f}"


def _panel(series: Sequence[Series], x0: float, y0: float, w: float, h: float,
           x_range: tuple[float, float], title: str, y_label: str) -> list[str]:
    left, right, top, bottom = 48, 12, 26, 36
    pw, ph = w - left - right, h - top - bottom
    xmin, xmax = x_range
    span = (xmax - xmin) or 1.0

    def sx(x):
        return x0 + left + (x - xmin) / span * pw

    def sy(y):
        return y0 + top + (1.0 - y) * ph

    out = [f'<text x="{_f(x0 + w / 2)}" y="{_f(y0 + 16)}" text-anchor="middle" font-size="13" font-weight="600">{escape(title)}</text>']
    for i in range(6):
        yv = i / 5
        yy = sy(yv)
        out.append(f'<line x1="{_f(sx(xmin))}" y1="{_f(yy)}" x2="{_f(sx(xmax))}" y2="{_f(yy)}" stroke="#e3e3e3"/>')
        out.append(f'<text x="{_f(sx(xmin) - 6)}" y="{_f(yy + 4)}" text-anchor="end" font-size="10" fill="#555">{yv:.1f}</text>')
    xs = sorted({x for s in series for x, _ in s.points})
    step = max(1, len(xs) // 8)
    for x in xs[::step] + ([xs[-1]] if xs and xs[-1] not in xs[::step] else []):
        out.append(f'<text x="{_f(sx(x))}" y="{_f(y0 + top + ph + 14)}" text-anchor="middle" font-size="10" fill="#555">{x:g}</text>')
    out.append(f'<rect x="{_f(x0 + left)}" y="{_f(y0 + top)}" width="{_f(pw)}" height="{_f(ph)}" fill="none" stroke="#888"/>')
    out.append(f'<text x="{_f(x0 + left + pw / 2)}" y="{_f(y0 + h - 6)}" text-anchor="middle" font-size="11">number of variables used</text>')
    cy = y0 + top + ph / 2
    out.append(f'<text x="{_f(x0 + 12)}" y="{_f(cy)}" text-anchor="middle" font-size="11" transform="rotate(-90 {_f(x0 + 12)} {_f(cy)})">{escape(y_label)}</text>')
    for s in series:
        pts = [(sx(x), sy(y)) for x, y in s.points]
        if not pts:
            continue
        dash = f' stroke-dasharray="{s.dash}"' if s.dash else ""
        path = " ".join(f"{_f(px)},{_f(py)}" for px, py in pts)
        out.append(f'<polyline points="{path}" fill="none" stroke="{s.color}" stroke-width="1.8"{dash}/>')
        for px, py in pts:
            out.append(f'<circle cx="{_f(px)}" cy="{_f(py)}" r="2.4" fill="{s.color}"/>')
    return out


def _legend(series: Sequence[Series], x: float, y: float) -> list[str]:
    out = []
    for i, s in enumerate(series):
        yy = y + i * 16
        dash = f' stroke-dasharray="{s.dash}"' if s.dash else ""
        out.append(f'<line x1="{_f(x)}" y1="{_f(yy)}" x2="{_f(x + 24)}" y2="{_f(yy)}" stroke="{s.color}" stroke-width="2"{dash}/>')
        out.append(f'<text x="{_f(x + 30)}" y="{_f(yy + 4)}" font-size="11">{escape(s.label)}</text>')
    return out


def _document(width: float, height: float, body: list[str]) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:g}" height="{height:g}" '
            f'viewBox="0 0 {width:g} {height:g}" font-family="Helvetica, Arial, sans-serif">')
    return "\n".join([head, f'<rect width="{width:g}" height="{height:g}" fill="#ffffff"/>', *body, "</svg>", ""])


def line_chart(title: str, y_label: str, series: Sequence[Series]) -> str:
    xs = [x for s in series for x, _ in s.points]
    x_range = (min(xs), max(xs)) if xs else (0.0, 1.0)
    body = _panel(series, 0, 0, 560, 360, x_range, title, y_label)
    body += _legend(series, 80, 386)
    return _document(560, 400 + 16 * len(series), body)


def small_multiples(title: str, y_label: str, panels: Sequence[tuple[str, Sequence[Series]]],
                    columns: int = 3) -> str:
    pw, ph = 340, 260
    rows = -(-len(panels) // columns)
    xs = [x for _, ss in panels for s in ss for x, _ in s.points]
    x_range = (min(xs), max(xs)) if xs else (0.0, 1.0)
    body = [f'<text x="{_f(columns * pw / 2)}" y="22" text-anchor="middle" font-size="15" font-weight="600">{escape(title)}</text>']
    for i, (ptitle, series) in enumerate(panels):
        body += _panel(series, (i % columns) * pw, 32 + (i // columns) * ph, pw, ph, x_range, ptitle, y_label)
    legend_series = panels[0][1] if panels else []
    body += _legend(legend_series, 60, 32 + rows * ph + 16)
    return _document(columns * pw, 32 + rows * ph + 24 + 16 * len(legend_series), body)


def _points(rows: Sequence[AggregateRow], name: str) -> list[tuple[float, float]]:
    return [(r.n_vars, r.mean(name)) for r in sorted(rows, key=lambda r: r.n_vars) if r.mean(name) is not None]


def _score_series(groups: dict, kind: str, p: float, score: str) -> list[Series]:
    out = []
    for method in sorted({m for (m, k, q) in groups if k == kind and q == p}):
        color, dash = METHOD_STYLE.get(method, ("#1f77b4", ""))
        out.append(Series(METHOD_LABEL.get(method, method), color, dash, _points(groups[(method, kind, p)], score)))
    return out


def _prob_series(groups: dict, kind: str, p: float, which: Sequence[str]) -> list[Series]:
    out = []
    for method in sorted({m for (m, k, q) in groups if k == kind and q == p}):
        color, _ = METHOD_STYLE.get(method, ("#1f77b4", ""))
        for name in which:
            label = f"{METHOD_LABEL.get(method, method)}, {'actual' if name.endswith('actual') else 'predicted'} class"
            out.append(Series(label, color, PROB_DASH[name], _points(groups[(method, kind, p)], name)))
    return out


def plot_aggregate(rows: Sequence[AggregateRow], out_dir: str | Path) -> list[Path]:
    """Write every chart for ``rows`` into ``out_dir``; returns the paths in write order.

    Per (feature kind, p_true): one chart per score and one probability chart.
    Per feature kind with several p_true values: small-multiple panels per score
    and for each probability.
    """
    if not rows:
        raise ValueError("aggregate has no rows to plot")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    groups: dict[tuple, list[AggregateRow]] = {}
    for r in rows:
        groups.setdefault((r.method, r.feature_kind, r.p_true), []).append(r)
    written = []

    def emit(name: str, svg: str):
        path = out_dir / name
        path.write_text(svg)
        written.append(path)

    kinds = sorted({k for (_, k, _) in groups})
    for kind in kinds:
        ps = sorted({p for (_, k, p) in groups if k == kind})
        for p in ps:
            tag = f"{kind}_p{p:.2f}"
            for score in SCORES:
                emit(f"score_{score}_{tag}.svg",
                     line_chart(f"Mean {score}, {kind} features, p_T = {p:.2f}", f"mean {score}",
                                _score_series(groups, kind, p, score)))
            emit(f"prob_{tag}.svg",
                 line_chart(f"Mean class probabilities, {kind} features, p_T = {p:.2f}", "mean probability",
                            _prob_series(groups, kind, p, ("mean_prob_actual", "mean_prob_predicted"))))
        if len(ps) > 1:
            for score in SCORES:
                panels = [(f"p_T = {p:.2f}", _score_series(groups, kind, p, score)) for p in ps]
                emit(f"panels_{score}_{kind}.svg",
                     small_multiples(f"Mean {score} by p_T, {kind} features", f"mean {score}", panels))
            for name, word in (("mean_prob_actual", "actual"), ("mean_prob_predicted", "predicted")):
                panels = [(f"p_T = {p:.2f}", _prob_series(groups, kind, p, (name,))) for p in ps]
                emit(f"panels_prob_{word}_{kind}.svg",
                     small_multiples(f"Mean probability of the {word} class by p_T, {kind} features",
                                     "mean probability", panels))
    return written
