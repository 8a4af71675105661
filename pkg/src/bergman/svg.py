"""Minimal deterministic SVG writer for figures.

No timestamps or random ids are emitted, so identical inputs give
byte-identical files.
"""

from xml.sax.saxutils import escape

import numpy as np


class Figure:
    """Plot in data coordinates ``(x, y)`` with ``y`` pointing up."""

    def __init__(self, xlim, ylim, width=640, title=None, margin=30):
        self.x0, self.x1 = map(float, xlim)
        self.y0, self.y1 = map(float, ylim)
        if self.x1 <= self.x0 or self.y1 <= self.y0:
            raise ValueError("empty plot window")
        self.margin = margin
        self.width = width
        self.height = int(round(width * (self.y1 - self.y0) / (self.x1 - self.x0)))
        self.title = title
        self.items = []

    def _sx(self, x):
        return self.margin + (x - self.x0) / (self.x1 - self.x0) * self.width

    def _sy(self, y):
        return self.margin + (self.y1 - y) / (self.y1 - self.y0) * self.height

    def rect(self, x, y, w, h, fill, opacity=1.0):
        px, py = self._sx(x), self._sy(y + h)
        pw = w / (self.x1 - self.x0) * self.width
        ph = h / (self.y1 - self.y0) * self.height
        self.items.append(
            f'<rect x="{px:.2f}" y="{py:.2f}" width="{pw:.2f}" height="{ph:.2f}" '
            f'fill="{fill}" fill-opacity="{opacity:g}" stroke="none"/>'
        )

    def polyline(self, zs, stroke="black", width=1.0, closed=False, dash=None):
        zs = np.asarray(zs, dtype=complex)
        if len(zs) < 2:
            return
        pts = " ".join(f"{self._sx(z.real):.2f},{self._sy(z.imag):.2f}" for z in zs)
        tag = "polygon" if closed else "polyline"
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.items.append(
            f'<{tag} points="{pts}" fill="none" stroke="{stroke}" stroke-width="{width:g}"{extra}/>'
        )

    def points(self, zs, fill="black", radius=2.0):
        for z in np.asarray(zs, dtype=complex):
            self.items.append(
                f'<circle cx="{self._sx(z.real):.2f}" cy="{self._sy(z.imag):.2f}" '
                f'r="{radius:g}" fill="{fill}"/>'
            )

    def text(self, x, y, s, size=12):
        self.items.append(
            f'<text x="{self._sx(x):.2f}" y="{self._sy(y):.2f}" font-size="{size}" '
            f'font-family="sans-serif">{escape(s)}</text>'
        )

    def axes(self, stroke="#999999"):
        if self.y0 < 0 < self.y1:
            self.polyline([complex(self.x0, 0), complex(self.x1, 0)], stroke=stroke, width=0.5)
        if self.x0 < 0 < self.x1:
            self.polyline([complex(0, self.y0), complex(0, self.y1)], stroke=stroke, width=0.5)

    def render(self):
        W = self.width + 2 * self.margin
        H = self.height + 2 * self.margin
        head = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
            f'viewBox="0 0 {W} {H}">',
            f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        ]
        if self.title:
            head.append(
                f'<text x="{self.margin}" y="{self.margin * 0.7:.1f}" font-size="14" '
                f'font-family="sans-serif">{escape(self.title)}</text>'
            )
        return "\n".join(head + self.items + ["</svg>", ""])

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.render())
