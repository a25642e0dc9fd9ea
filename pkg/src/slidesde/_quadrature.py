"""Composite Gauss-Legendre panel helpers used by the analytic quadratures."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

__all__ = ["leggauss", "panel_nodes", "panels", "geometric_edges", "graded_edges"]


@lru_cache(maxsize=None)
def leggauss(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def panel_nodes(edges: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights per panel, shaped (n_panels, order)."""
    edges = np.asarray(edges, dtype=float)
    xg, wg = leggauss(order)
    mid = 0.5 * (edges[1:] + edges[:-1])
    rad = 0.5 * (edges[1:] - edges[:-1])
    return mid[:, None] + rad[:, None] * xg[None, :], rad[:, None] * wg[None, :]


def panels(edges: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Flattened composite Gauss-Legendre rule over the given panel edges."""
    n, w = panel_nodes(edges, order)
    return n.ravel(), w.ravel()


def geometric_edges(lo: float, hi: float, first_width: float, growth: float = 2.0) -> np.ndarray:
    """Edges from lo to hi with widths growing geometrically from first_width."""
    edges = [lo]
    w = first_width
    while edges[-1] + w < hi:
        edges.append(edges[-1] + w)
        w *= growth
    edges.append(hi)
    return np.array(edges)


def graded_edges(lo: float, hi: float, anchors, width: float, growth: float = 1.8) -> np.ndarray:
    """Panel edges on [lo, hi] clustered geometrically around each anchor point."""
    pts = {float(lo), float(hi)}
    for a in anchors:
        a = float(a)
        if not (lo <= a <= hi):
            continue
        pts.add(a)
        w = width
        up = dn = a
        while True:
            up += w
            dn -= w
            added = False
            if lo < dn < hi:
                pts.add(dn)
                added = True
            if lo < up < hi:
                pts.add(up)
                added = True
            w *= growth
            if not added and up > hi and dn < lo:
                break
    return np.array(sorted(pts))
