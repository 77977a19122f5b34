"""Stock metric charts used across the verification corpus."""

from __future__ import annotations

import numpy as np

from . import jets
from .charts import MetricChart


def flat(dim: int) -> MetricChart:
    ident = np.eye(dim)
    return MetricChart(dim, lambda coords: ident, name=f"flat{dim}")


def sphere_stereographic(dim: int, scale: float = 1.0) -> MetricChart:
    """Round sphere of sectional curvature 1/scale in a stereographic chart.

    g = scale * 4 / (1 + |x|^2)^2 * identity; the chart covers everything
    but one point, and the components are rational, so jets of any order
    are exact.
    """

    def components(coords):
        s = 1.0
        for c in coords:
            s = s + c * c
        factor = (4.0 * scale) / (s * s)
        return [
            [factor if i == j else 0.0 for j in range(dim)] for i in range(dim)
        ]

    return MetricChart(dim, components, name=f"sphere{dim}(scale={scale:g})")


def sphere_polar2(radius: float = 1.0) -> MetricChart:
    """Round 2-sphere in the (theta, phi) chart: diag(r^2, r^2 sin^2 theta)."""

    def components(coords):
        th = coords[0]
        s = jets.sin(th)
        r2 = radius * radius
        return [[r2, 0.0], [0.0, r2 * s * s]]

    def domain(point):
        return 0.05 < point[0] < np.pi - 0.05

    return MetricChart(2, components, name=f"sphere2-polar(r={radius:g})", domain=domain)


def hyperbolic_upper_half(dim: int, scale: float = 1.0) -> MetricChart:
    """Hyperbolic space of sectional curvature -1/scale, upper-half-space chart:
    g = scale / (x_last)^2 * identity on {x_last > 0}."""

    def components(coords):
        h = coords[dim - 1]
        factor = scale / (h * h)
        return [[factor if i == j else 0.0 for j in range(dim)] for i in range(dim)]

    def domain(point):
        return point[dim - 1] > 0

    return MetricChart(dim, components, name=f"hyperbolic{dim}(scale={scale:g})", domain=domain)


def hyperbolic_fiber(n_fiber: int) -> MetricChart:
    """Hyperbolic fiber model scaled so the sectional curvature is -1/(2N)."""
    return hyperbolic_upper_half(n_fiber, scale=2.0 * n_fiber)


def spherical_fiber(n_fiber: int) -> MetricChart:
    """Spherical fiber model scaled so the sectional curvature is +1/(2N)."""
    return sphere_stereographic(n_fiber, scale=2.0 * n_fiber)


def product_chart(a: MetricChart, b: MetricChart, name: str = "") -> MetricChart:
    """Block-diagonal product of two charts."""
    dim = a.dim + b.dim

    def components(coords):
        ga = a.components(coords[: a.dim])
        gb = b.components(coords[a.dim :])
        out = [[0.0] * dim for _ in range(dim)]
        for i in range(a.dim):
            for j in range(a.dim):
                out[i][j] = ga[i][j]
        for i in range(b.dim):
            for j in range(b.dim):
                out[a.dim + i][a.dim + j] = gb[i][j]
        return out

    def domain(point):
        ok_a = a.domain is None or a.domain(point[: a.dim])
        ok_b = b.domain is None or b.domain(point[a.dim :])
        return ok_a and ok_b

    return MetricChart(dim, components, name=name or f"{a.name}x{b.name}", domain=domain)


def random_polynomial(dim: int, seed: int, amplitude: float = 0.15) -> MetricChart:
    """Identity plus a random quartic symmetric perturbation, positive
    definite near the origin.  Deterministic for a fixed seed."""
    rng = np.random.default_rng(seed)
    lin = rng.uniform(-1, 1, size=(dim, dim, dim))
    quad = rng.uniform(-1, 1, size=(dim, dim, dim, dim))
    cub = rng.uniform(-1, 1, size=(dim, dim, dim, dim, dim))
    quart = rng.uniform(-1, 1, size=(dim, dim, dim))
    lin = 0.5 * (lin + lin.transpose(0, 2, 1))
    quad = 0.5 * (quad + quad.transpose(0, 1, 3, 2))
    cub = 0.5 * (cub + cub.transpose(0, 1, 2, 4, 3))
    quart = 0.5 * (quart + quart.transpose(0, 2, 1))

    def components(coords):
        sq = 0.0
        for c in coords:
            sq = sq + c * c
        out = [[0.0] * dim for _ in range(dim)]
        for i in range(dim):
            for j in range(i, dim):
                val = 1.0 if i == j else 0.0
                for a in range(dim):
                    val = val + amplitude * lin[a, i, j] * coords[a]
                    val = val + 0.25 * amplitude * quart[a, i, j] * coords[a] * coords[a] * sq
                    for b in range(dim):
                        val = val + 0.5 * amplitude * quad[a, b, i, j] * coords[a] * coords[b]
                        for c in range(dim):
                            val = val + (amplitude / 6.0) * cub[a, b, c, i, j] * (
                                coords[a] * coords[b] * coords[c]
                            )
                out[i][j] = val
                out[j][i] = val
        return out

    def domain(point):
        return float(np.max(np.abs(point))) < 0.5

    return MetricChart(dim, components, name=f"random{dim}(seed={seed})", domain=domain)


def scaled(chart: MetricChart, factor: float) -> MetricChart:
    """The chart with every component multiplied by a positive constant."""

    def components(coords):
        g = chart.components(coords)
        return [[g[i][j] * factor for j in range(chart.dim)] for i in range(chart.dim)]

    return MetricChart(chart.dim, components, name=f"{chart.name}*{factor:g}", domain=chart.domain)
