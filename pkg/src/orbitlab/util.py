"""Small numeric helpers: deterministic reductions, quadrature nodes, pools."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np


def tree_sum(values) -> float:
    """Pairwise (tree-ordered) sum; deterministic regardless of worker count."""
    vals = list(values)
    if not vals:
        return 0.0
    while len(vals) > 1:
        nxt = []
        for i in range(0, len(vals) - 1, 2):
            nxt.append(vals[i] + vals[i + 1])
        if len(vals) % 2:
            nxt.append(vals[-1])
        vals = nxt
    return vals[0]


def parallel_map(fn, items, workers: int | None = None) -> list:
    """Ordered map over independent items.

    Results are collected in input order, so reductions downstream are
    reproducible for any worker count.
    """
    items = list(items)
    if workers is None:
        workers = default_workers()
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def default_workers() -> int:
    return os.cpu_count() or 1


def gauss_legendre(n: int, a: float, b: float):
    """Nodes and weights of n-point Gauss-Legendre on [a, b]."""
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return 0.5 * (a + b) + half * x, half * w


def adaptive_gl(f, a: float, b: float, rel_tol: float = 1e-6, abs_floor: float = 1e-14,
                n: int = 32, max_depth: int = 14):
    """Composite Gauss-Legendre with dyadic refinement until successive
    estimates differ by < rel_tol (relative, floored by abs_floor).

    f must accept a numpy array of nodes. Returns (value, est_error).
    """
    panels = 1
    x, w = gauss_legendre(n, a, b)
    prev = float(np.dot(w, f(x)))
    for _ in range(max_depth):
        panels *= 2
        edges = np.linspace(a, b, panels + 1)
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            x, w = gauss_legendre(n, lo, hi)
            total += float(np.dot(w, f(x)))
        err = abs(total - prev)
        if err <= rel_tol * max(abs(total), abs_floor / rel_tol):
            return total, err
        prev = total
    return prev, abs(err)


def panel_nodes(edges: np.ndarray, n: int):
    """Gauss-Legendre nodes/weights tiled over consecutive panels."""
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        x, w = gauss_legendre(n, lo, hi)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def composite_gl(f, a: float, b: float, rel_tol: float = 1e-8,
                 abs_tol: float = 1e-12, n: int = 16, max_depth: int = 10,
                 min_panels: int = 4):
    """Dyadically refined composite Gauss-Legendre; f is evaluated once per
    depth on the full node array.  Returns (value, est_error)."""
    panels = min_panels
    prev = None
    while True:
        x, w = panel_nodes(np.linspace(a, b, panels + 1), n)
        total = float(np.dot(w, f(x)))
        if prev is not None:
            err = abs(total - prev)
            if err <= max(rel_tol * abs(total), abs_tol):
                return total, err
        prev = total
        panels *= 2
        if panels > min_panels * 2 ** max_depth:
            return prev, abs(total - prev)


def wrap_angle(theta: float) -> float:
    """Wrap to (-pi, pi]."""
    t = (theta + np.pi) % (2 * np.pi) - np.pi
    if t == -np.pi:
        t = np.pi
    return t
