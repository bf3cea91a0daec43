"""Self-contained SVG plots from the CSV artifacts (no plotting dependency)."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import InvalidInputError

__all__ = ["emit_plot", "SCHEMAS"]

SCHEMAS = {
    "loglog": ("t", "norm"),
    "field": ("x", "re_psi", "im_psi"),
    "sweep": ("eps", "distance"),
}

W, H = 640, 420
ML, MR, MT, MB = 70, 20, 30, 50


def _read(csv_path, kind):
    if kind not in SCHEMAS:
        raise InvalidInputError(f"unknown plot kind {kind!r}")
    with open(csv_path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
        reader = csv.DictReader(lines)
        cols = reader.fieldnames or []
        rows = list(reader)
    need = SCHEMAS[kind]
    missing = [c for c in need if c not in cols]
    if missing or not rows:
        raise InvalidInputError(f"{csv_path}: {kind} plot needs columns {need}, missing {missing}")
    return rows, cols


class _Axes:
    def __init__(self, xs, ys, logx, logy):
        self.logx, self.logy = logx, logy
        fx = np.log10 if logx else (lambda a: np.asarray(a, float))
        fy = np.log10 if logy else (lambda a: np.asarray(a, float))
        self.fx, self.fy = fx, fy
        X, Y = fx(xs), fy(ys)
        self.x0, self.x1 = float(X.min()), float(X.max())
        self.y0, self.y1 = float(Y.min()), float(Y.max())
        if self.x1 == self.x0:
            self.x1 = self.x0 + 1
        if self.y1 == self.y0:
            self.y0, self.y1 = self.y0 - 0.5, self.y1 + 0.5
        pad = 0.05 * (self.y1 - self.y0)
        self.y0, self.y1 = self.y0 - pad, self.y1 + pad

    def px(self, x):
        return ML + (self.fx(x) - self.x0) / (self.x1 - self.x0) * (W - ML - MR)

    def py(self, y):
        return H - MB - (self.fy(y) - self.y0) / (self.y1 - self.y0) * (H - MT - MB)

    def frame(self, xlabel, ylabel, title):
        out = [f'<rect x="{ML}" y="{MT}" width="{W - ML - MR}" height="{H - MT - MB}" '
               'fill="none" stroke="black"/>']
        for i in range(5):
            fx = self.x0 + i / 4 * (self.x1 - self.x0)
            fy = self.y0 + i / 4 * (self.y1 - self.y0)
            X = ML + i / 4 * (W - ML - MR)
            Y = H - MB - i / 4 * (H - MT - MB)
            lx = f"{10 ** fx:.3g}" if self.logx else f"{fx:.3g}"
            ly = f"{10 ** fy:.3g}" if self.logy else f"{fy:.3g}"
            out.append(f'<line x1="{X:.1f}" y1="{H - MB}" x2="{X:.1f}" y2="{H - MB + 5}" stroke="black"/>')
            out.append(f'<text x="{X:.1f}" y="{H - MB + 18}" font-size="11" text-anchor="middle">{lx}</text>')
            out.append(f'<line x1="{ML - 5}" y1="{Y:.1f}" x2="{ML}" y2="{Y:.1f}" stroke="black"/>')
            out.append(f'<text x="{ML - 8}" y="{Y + 4:.1f}" font-size="11" text-anchor="end">{ly}</text>')
        out.append(f'<text x="{(W + ML - MR) / 2}" y="{H - 10}" font-size="13" text-anchor="middle">{xlabel}</text>')
        out.append(f'<text x="15" y="{(H - MB + MT) / 2}" font-size="13" text-anchor="middle" '
                   f'transform="rotate(-90 15 {(H - MB + MT) / 2})">{ylabel}</text>')
        out.append(f'<text x="{W / 2}" y="18" font-size="14" text-anchor="middle">{title}</text>')
        return out


def _polyline(ax, xs, ys, color, dash=None):
    pts = " ".join(f"{ax.px(a):.2f},{ax.py(b):.2f}" for a, b in zip(xs, ys))
    d = f' stroke-dasharray="{dash}"' if dash else ""
    return f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"{d}/>'


def _dots(ax, xs, ys, color):
    return [f'<circle cx="{ax.px(a):.2f}" cy="{ax.py(b):.2f}" r="3" fill="{color}"/>'
            for a, b in zip(xs, ys)]


def _hash_comment(csv_path):
    with open(csv_path) as fh:
        first = fh.readline()
    return first[1:].strip() if first.startswith("#") else ""


def emit_plot(csv_path, kind: str, out_path=None, title: str | None = None) -> Path:
    """Render ``csv_path`` as an SVG of the given kind and return its path.

    A leading ``# ...`` comment line of the CSV (the config hash) is carried
    into the SVG as a comment.
    """
    rows, cols = _read(csv_path, kind)
    tag = _hash_comment(csv_path)
    out_path = Path(out_path) if out_path else Path(csv_path).with_suffix(".svg")
    body = []
    if kind == "loglog":
        t = np.array([float(r["t"]) for r in rows])
        y = np.array([float(r["norm"]) for r in rows])
        ok = (t > 0) & (y > 0)
        t, y = t[ok], y[ok]
        if t.size < 2:
            raise InvalidInputError("loglog plot needs two positive rows")
        ref = y[0] * (t / t[0]) ** -1.5
        ax = _Axes(np.concatenate([t, t]), np.concatenate([y, ref]), True, True)
        body += ax.frame("t", "norm", title or "decay (dashed: slope -3/2)")
        body.append(_polyline(ax, t, ref, "gray", "6,4"))
        body += _dots(ax, t, y, "navy")
    elif kind == "field":
        if "t" in cols:
            t0 = rows[0]["t"]
            rows = [r for r in rows if r["t"] == t0]
        x = np.array([float(r["x"]) for r in rows])
        re = np.array([float(r["re_psi"]) for r in rows])
        im = np.array([float(r["im_psi"]) for r in rows])
        ax = _Axes(np.concatenate([x, x]), np.concatenate([re, im]), False, False)
        body += ax.frame("x", "psi", title or "field (solid: Re, dashed: Im)")
        body.append(_polyline(ax, x, re, "navy"))
        body.append(_polyline(ax, x, im, "darkred", "5,3"))
    else:
        e = np.array([float(r["eps"]) for r in rows])
        d = np.array([float(r["distance"]) for r in rows])
        groups = [r.get("label", "") for r in rows] if "label" in cols else [""] * len(rows)
        ax = _Axes(e, d, True, True)
        body += ax.frame("eps", "distance", title or "limiting absorption sweep")
        palette = ["navy", "darkred", "darkgreen", "purple", "gray", "orange"]
        for i, lab in enumerate(dict.fromkeys(groups)):
            sel = np.array([gname == lab for gname in groups])
            order = np.argsort(e[sel])
            body.append(_polyline(ax, e[sel][order], d[sel][order], palette[i % len(palette)]))
            body += _dots(ax, e[sel][order], d[sel][order], palette[i % len(palette)])
    svg = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
           f'viewBox="0 0 {W} {H}" font-family="sans-serif">',
           f"<!-- {tag} -->" if tag else "",
           '<rect width="100%" height="100%" fill="white"/>'] + body + ["</svg>"]
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text("\n".join(svg) + "\n")
    return out_path
