"""Product space-time metrics built from a base flow, and their verification.

Three variants over a base flow g(t) on an n-manifold, with fiber dimension
N and the time coordinate stored LAST in the product chart:

    hyperbolic   dim n+N+1:  blocks g_ij, t * gamma_ab, R - N/(2t),
                 fiber of sectional curvature -1/(2N);
    spherical    dim n+N+1:  blocks g_ij, tau * gamma_ab, R + N/(2tau),
                 fiber of curvature +1/(2N), over a backward flow;
    restricted   dim n+1:    g_ij and R - N/(2t) only (no fiber).

Every closed-form Christoffel/curvature/Ricci component implemented here is
cross-checked against the generic jet pipeline on the built chart; that
comparison is the central contract of the module.  The time-time block uses
the scalar curvature of the base, supplied as a Taylor polynomial so the
product chart stays jet-differentiable to the order the checks need.

Two sign/exponent choices in the component tables are pinned by that
cross-check: the space-block correction enters antisymmetrized,
-(R - N/2t)^{-1} (Ric_ik Ric_jl - Ric_il Ric_jk), and the gradient-square
term of the double-time block carries the inverse factor (R - N/2t)^{-1};
the symmetric and non-inverted readings fail at leading order on curved
bases.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import library
from .charts import (
    MetricChart,
    curvature_data,
    frame_components,
    orthonormal_frame,
)
from .errors import DegenerateMetricError, PreconditionError, UnsupportedConfigurationError
from .flows import flow_point_data
from .harnack import HarnackTriple, harnack_min_eig
from .jets import Jet

VARIANTS = ("hyperbolic", "spherical", "restricted")


@dataclass
class ThermostatSpec:
    variant: str
    n_fiber: int
    base: object  # FlowFamily or surface.SurfaceBase

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise PreconditionError(f"unknown variant {self.variant!r}")
        if self.n_fiber < 2:
            raise PreconditionError("fiber dimension must be at least 2")

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def dim(self) -> int:
        if self.variant == "restricted":
            return self.n + 1
        return self.n + self.n_fiber + 1

    @property
    def time_index(self) -> int:
        return self.dim - 1

    @property
    def g00_sign(self) -> float:
        """Sign of the N/(2t) term in the time-time block."""
        return 1.0 if self.variant == "spherical" else -1.0

    @property
    def flow_sign(self) -> float:
        """Sign of dg/dt / (2 Ric) for the base convention."""
        return 1.0 if self.variant == "spherical" else -1.0

    def g00(self, r: float, t: float) -> float:
        return r + self.g00_sign * self.n_fiber / (2.0 * t)

    def fiber_chart(self) -> MetricChart:
        if self.variant == "spherical":
            return library.spherical_fiber(self.n_fiber)
        return library.hyperbolic_fiber(self.n_fiber)

    def default_fiber_point(self) -> np.ndarray:
        y = 0.1 * np.arange(1, self.n_fiber + 1) / self.n_fiber
        if self.variant != "spherical":
            y[-1] = 1.3  # upper-half-space chart needs a positive last coordinate
        return y


@dataclass
class SpacetimePoint:
    base: np.ndarray
    t: float
    fiber: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.t <= 0:
            raise PreconditionError("space-time points require t > 0")


def product_point(spec: ThermostatSpec, pt: SpacetimePoint) -> np.ndarray:
    if spec.variant == "restricted":
        return np.concatenate([pt.base, [pt.t]])
    fiber = pt.fiber if pt.fiber is not None else spec.default_fiber_point()
    return np.concatenate([pt.base, fiber, [pt.t]])


def build_metric(spec: ThermostatSpec) -> MetricChart:
    """The product chart; components accept jets in any coordinate slots.

    The scalar-curvature block is rebuilt from the base family's Taylor
    polynomial around each numeric evaluation point (cached), so the chart
    is exact for closed-form bases and stencil-accurate for grid bases.
    """
    base = spec.base
    n, nf = base.n, spec.n_fiber
    tix = spec.time_index
    fiber = spec.fiber_chart() if spec.variant != "restricted" else None
    poly_cache: dict = {}

    def scalar_at(x_vals, t_val, coords_for_eval):
        key = (tuple(np.round(x_vals, 12)), round(t_val, 12))
        poly = poly_cache.get(key)
        if poly is None:
            poly = base.scalar_poly(list(x_vals), t_val, order=4)
            poly_cache[key] = poly
        return poly(coords_for_eval)

    def components(coords):
        x = list(coords[:n])
        tcoord = coords[tix]
        x_vals = [c.value if isinstance(c, Jet) else float(c) for c in x]
        t_val = tcoord.value if isinstance(tcoord, Jet) else float(tcoord)
        base.check_time(t_val)
        dim = spec.dim
        out = [[0.0] * dim for _ in range(dim)]
        gb = base.metric_components(x, tcoord)
        for i in range(n):
            for j in range(n):
                out[i][j] = gb[i][j]
        r_val = scalar_at(x_vals, t_val, list(x) + [tcoord])
        r_num = r_val.value if isinstance(r_val, Jet) else float(r_val)
        g00_num = spec.g00(r_num, t_val)
        if abs(g00_num) < 1e-10 * max(1.0, nf / (2 * t_val)):
            raise DegenerateMetricError(
                f"time-time block vanishes (R = {r_num:g}, N/(2t) = {nf / (2 * t_val):g})"
            )
        out[tix][tix] = r_val + spec.g00_sign * nf / (2.0 * tcoord)
        if fiber is not None:
            y = list(coords[n : n + nf])
            gf = fiber.components(y)
            for a in range(nf):
                for b in range(nf):
                    entry = gf[a][b]
                    if isinstance(entry, Jet) or entry != 0.0:
                        out[n + a][n + b] = tcoord * entry
        return out

    def domain(point):
        return point[tix] > 0

    return MetricChart(
        spec.dim,
        components,
        name=f"thermostat-{spec.variant}(N={nf},{base.kind})",
        domain=domain,
    )


# ---------------------------------------------------------------------------
# base-flow data shared by the closed forms
# ---------------------------------------------------------------------------


def base_data(spec: ThermostatSpec, x: Sequence[float], t: float) -> dict:
    """Curvature payload of the base flow at (x, t) in base coordinates."""
    base = spec.base
    if hasattr(base, "base_data"):
        return base.base_data(x, t)
    data = flow_point_data(base, x, t)
    geom = data.geom
    return {
        "g": geom.g,
        "ginv": geom.ginv,
        "gamma": geom.gamma,
        "rm": geom.rm,
        "ric": geom.ric,
        "r": geom.scalar,
        "dr": geom.grad_scalar(),
        "hess_r": geom.cov2_scalar(),
        "lap_ric": geom.lap_ric(),
        "p": data.p,
        "m": data.m,
        "dr_dt": data.time.dR,
    }


def _g00(spec: ThermostatSpec, bd: dict, t: float) -> float:
    val = spec.g00(bd["r"], t)
    if abs(val) < 1e-12:
        raise DegenerateMetricError("time-time block vanishes at the sample point")
    return val


def _dg00_dt(spec: ThermostatSpec, bd: dict, t: float) -> float:
    return bd["dr_dt"] - spec.g00_sign * spec.n_fiber / (2.0 * t * t)


# ---------------------------------------------------------------------------
# closed-form Christoffel symbols
# ---------------------------------------------------------------------------

NONZERO_GAMMA = (
    "t_tt",
    "t_it",
    "i_tt",
    "i_jt",
    "t_ij",
    "i_jk",
    "a_bt",
    "t_ab",
    "a_bc",
)
VANISHING_GAMMA = (
    "a_tt",
    "t_at",
    "i_at",
    "a_it",
    "t_ia",
    "i_ab",
    "a_ij",
    "i_ja",
    "a_bi",
)


def closed_form_christoffel(
    spec: ThermostatSpec, x: Sequence[float], t: float, fiber_point=None
) -> dict:
    """The nine nonzero Christoffel families of the product metric.

    Keys name upper_lower-lower slots with i,j,k base, a,b,c fiber and t
    time.  Fiber tables use the fiber chart at ``fiber_point``.
    """
    bd = base_data(spec, x, t)
    g00 = _g00(spec, bd, t)
    dg00 = _dg00_dt(spec, bd, t)
    rmix = bd["ginv"] @ bd["ric"]
    out = {
        "t_tt": 0.5 * dg00 / g00,
        "t_it": 0.5 * bd["dr"] / g00,
        "i_tt": -0.5 * bd["ginv"] @ bd["dr"],
        "i_jt": spec.flow_sign * rmix,
        "t_ij": -spec.flow_sign * bd["ric"] / g00,
        "i_jk": bd["gamma"],
    }
    if spec.variant != "restricted":
        fiber = spec.fiber_chart()
        y = spec.default_fiber_point() if fiber_point is None else np.asarray(fiber_point)
        fdata = curvature_data(fiber, y)
        out["a_bt"] = np.eye(spec.n_fiber) / (2.0 * t)
        out["t_ab"] = -0.5 * fdata.g / g00
        out["a_bc"] = fdata.gamma
    return out


def christoffel_crosscheck(
    spec: ThermostatSpec, pt: SpacetimePoint
) -> dict[str, float]:
    """Max-abs discrepancy of every closed-form family against the jet
    pipeline on the built chart, plus the max over the vanishing families."""
    chart = build_metric(spec)
    coords = product_point(spec, pt)
    gamma = curvature_data(chart, coords).gamma
    n, nf, tix = spec.n, spec.n_fiber, spec.time_index
    S = slice(0, n)
    F = slice(n, n + nf) if spec.variant != "restricted" else None
    cf = closed_form_christoffel(spec, pt.base, pt.t, fiber_point=pt.fiber)
    out = {}
    out["t_tt"] = abs(gamma[tix, tix, tix] - cf["t_tt"])
    out["t_it"] = float(np.max(np.abs(gamma[tix, S, tix] - cf["t_it"])))
    out["i_tt"] = float(np.max(np.abs(gamma[S, tix, tix] - cf["i_tt"])))
    out["i_jt"] = float(np.max(np.abs(gamma[S, S, tix] - cf["i_jt"])))
    out["t_ij"] = float(np.max(np.abs(gamma[tix, S, S] - cf["t_ij"])))
    out["i_jk"] = float(np.max(np.abs(gamma[S, S, S] - cf["i_jk"])))
    if F is not None:
        out["a_bt"] = float(np.max(np.abs(gamma[F, F, tix] - cf["a_bt"])))
        out["t_ab"] = float(np.max(np.abs(gamma[tix, F, F] - cf["t_ab"])))
        out["a_bc"] = float(np.max(np.abs(gamma[F, F, F] - cf["a_bc"])))
        vanishing = [
            gamma[F, tix, tix],
            gamma[tix, F, tix],
            gamma[S, F, tix],
            gamma[F, S, tix],
            gamma[tix, S, F],
            gamma[S, F, F],
            gamma[F, S, S],
            gamma[S, S, F],
            gamma[F, F, S],
        ]
        out["vanishing"] = max(float(np.max(np.abs(v))) for v in vanishing)
    return out


# ---------------------------------------------------------------------------
# closed-form curvature and Ricci components
# ---------------------------------------------------------------------------


def closed_form_curvature(
    spec: ThermostatSpec, x: Sequence[float], t: float, fiber_point=None
) -> dict:
    """Closed-form curvature components of the product metric.

    space      R~_ijkl ; ts R~_ij t k ; tt R~_i t j t ;
    fiber      R~_abcd ; mixed R~_a i b j ; fiber_t_space R~_a t b i ;
    fiber_tt   R~_a t b t.
    """
    bd = base_data(spec, x, t)
    g00 = _g00(spec, bd, t)
    dg00 = _dg00_dt(spec, bd, t)
    ric = bd["ric"]
    ric_sq = ric @ bd["ginv"] @ ric
    quad = np.einsum("ikjl,kl->ij", bd["rm"], bd["ginv"] @ ric @ bd["ginv"])
    if spec.variant == "spherical":
        # the backward flow flips the substituted evolution terms
        tt = (
            -bd["lap_ric"]
            - 2.0 * quad
            + 3.0 * ric_sq
            - 0.5 * bd["hess_r"]
            + 0.5 * dg00 * ric / g00
            + 0.25 * np.outer(bd["dr"], bd["dr"]) / g00
        )
        ts = -bd["p"] - 0.5 * (
            np.einsum("j,ik->ijk", bd["dr"], ric) - np.einsum("i,jk->ijk", bd["dr"], ric)
        ) / g00
    else:
        tt = (
            bd["lap_ric"]
            + 2.0 * quad
            - ric_sq
            - 0.5 * bd["hess_r"]
            - 0.5 * dg00 * ric / g00
            + 0.25 * np.outer(bd["dr"], bd["dr"]) / g00
        )
        ts = bd["p"] + 0.5 * (
            np.einsum("j,ik->ijk", bd["dr"], ric) - np.einsum("i,jk->ijk", bd["dr"], ric)
        ) / g00
    out = {
        "space": bd["rm"]
        - (np.einsum("ik,jl->ijkl", ric, ric) - np.einsum("il,jk->ijkl", ric, ric))
        / g00,
        "ts": ts,
        "tt": tt,
    }
    if spec.variant != "restricted":
        fiber = spec.fiber_chart()
        y = spec.default_fiber_point() if fiber_point is None else np.asarray(fiber_point)
        gf = fiber.matrix(y)
        pattern = np.einsum("ac,bd->abcd", gf, gf) - np.einsum("bc,ad->abcd", gf, gf)
        mixed_sign = -1.0 if spec.variant == "spherical" else 1.0
        out["fiber"] = fiber_block_coefficient(spec, bd, t) * pattern
        out["mixed"] = mixed_sign * 0.5 * np.einsum("ab,ij->aibj", gf, ric) / g00
        out["fiber_t_space"] = 0.25 * np.einsum("ab,i->abi", gf, bd["dr"]) / g00
        out["fiber_tt"] = 0.25 * (bd["dr_dt"] + bd["r"] / t) * gf / g00
    return out


def fiber_block_coefficient(spec: ThermostatSpec, bd: dict, t: float) -> float:
    """Coefficient of (gamma_ac gamma_bd - gamma_bc gamma_ad) in the fiber
    curvature block.  Hyperbolic: -1/4 (2t/N + G00^{-1}); the spherical one
    is the same expression with N/(2t) |-> -N/(2tau), i.e. +1/4 (2tau/N -
    G00^{-1})."""
    g00 = _g00(spec, bd, t)
    if spec.variant == "spherical":
        return 0.25 * (2.0 * t / spec.n_fiber - 1.0 / g00)
    return -0.25 * (2.0 * t / spec.n_fiber + 1.0 / g00)


def closed_form_ricci(
    spec: ThermostatSpec, x: Sequence[float], t: float
) -> dict:
    """Closed-form Ricci components: tt, t_space, fiber (coefficient of the
    fiber metric), space block; the time-fiber and space-fiber blocks vanish."""
    bd = base_data(spec, x, t)
    g00 = _g00(spec, bd, t)
    dg00 = _dg00_dt(spec, bd, t)
    grad_sq = float(bd["dr"] @ bd["ginv"] @ bd["dr"])
    quad = np.einsum("ikjl,kl->ij", bd["rm"], bd["ginv"] @ bd["ric"] @ bd["ginv"])
    ric_sq = bd["ric"] @ bd["ginv"] @ bd["ric"]
    if spec.variant == "restricted":
        # no fiber block: the slice Ricci is the contraction of the slice
        # curvature blocks alone
        blocks = closed_form_curvature(spec, x, t)
        return {
            "tt": float(np.einsum("ij,ij->", bd["ginv"], blocks["tt"])),
            "t_space": np.einsum("jk,ikj->i", bd["ginv"], blocks["ts"]),
            "space": blocks["tt"] / g00
            + np.einsum("kl,ikjl->ij", bd["ginv"], blocks["space"]),
        }
    if spec.variant == "spherical":
        # backward-flow analogue; the trace of the double-time block flips
        # the substituted evolution terms and the quadratic no longer cancels
        space = (
            -bd["lap_ric"] - 2.0 * quad + 4.0 * ric_sq - 0.5 * bd["hess_r"]
        ) / g00 + 0.5 * (0.5 * np.outer(bd["dr"], bd["dr"]) + dg00 * bd["ric"]) / g00**2
        ric_scal = float(np.einsum("ij,ij->", bd["ginv"] @ bd["ric"] @ bd["ginv"], bd["ric"]))
        lap_r = float(np.einsum("ij,ij->", bd["ginv"], bd["hess_r"]))
        tt = (
            -1.5 * lap_r
            + ric_scal
            + 0.25 * grad_sq / g00
            + 0.5 * dg00 * bd["r"] / g00
            + 0.25 * spec.n_fiber * (bd["dr_dt"] + bd["r"] / t) / (t * g00)
        )
        fiber_coeff = 0.25 * (bd["dr_dt"] - 2.0 * bd["r"] ** 2 / spec.n_fiber) / g00**2
    else:
        space = (bd["lap_ric"] + 2.0 * quad - 0.5 * bd["hess_r"]) / g00 + 0.5 * (
            0.5 * np.outer(bd["dr"], bd["dr"]) - dg00 * bd["ric"]
        ) / g00**2
        tt = 0.25 * grad_sq / g00
        fiber_coeff = 0.25 * (bd["dr_dt"] + 2.0 * bd["r"] ** 2 / spec.n_fiber) / g00**2
    out = {
        "tt": tt,
        "t_space": 0.5 * (bd["dr"] @ (bd["ginv"] @ bd["ric"])) / g00,
        "space": space,
    }
    if spec.variant != "restricted":
        out["fiber_coeff_per_gamma"] = fiber_coeff
    return out


def curvature_crosscheck(spec: ThermostatSpec, pt: SpacetimePoint) -> dict[str, float]:
    """Closed-form curvature and Ricci components against the jet pipeline."""
    chart = build_metric(spec)
    coords = product_point(spec, pt)
    data = curvature_data(chart, coords)
    rm = data.rm
    n, nf, tix = spec.n, spec.n_fiber, spec.time_index
    S = slice(0, n)
    cf = closed_form_curvature(spec, pt.base, pt.t, fiber_point=pt.fiber)
    out = {
        "space": float(np.max(np.abs(rm[S, S, S, S] - cf["space"]))),
        "ts": float(np.max(np.abs(rm[S, S, tix, S] - cf["ts"]))),
        "tt": float(np.max(np.abs(rm[S, tix, S, tix] - cf["tt"]))),
    }
    if spec.variant != "restricted":
        F = slice(n, n + nf)
        out["fiber"] = float(np.max(np.abs(rm[F, F, F, F] - cf["fiber"])))
        out["mixed"] = float(np.max(np.abs(rm[F, S, F, S] - cf["mixed"])))
        out["fiber_t_space"] = float(
            np.max(np.abs(rm[F, tix, F, S] - cf["fiber_t_space"]))
        )
        out["fiber_tt"] = float(np.max(np.abs(rm[F, tix, F, tix] - cf["fiber_tt"])))
        vanishing = [
            rm[F, F, F, S],
            rm[F, F, F, tix],
            rm[F, F, S, S],
            rm[F, F, tix, S],
            rm[F, S, S, S],
            rm[F, S, S, tix],
            rm[F, tix, S, S],
            rm[F, tix, S, tix],
        ]
        out["vanishing"] = max(float(np.max(np.abs(v))) for v in vanishing)

    ric = data.ric
    cr = closed_form_ricci(spec, pt.base, pt.t)
    out["ricci_tt"] = abs(ric[tix, tix] - cr["tt"])
    out["ricci_t_space"] = float(np.max(np.abs(ric[tix, S] - cr["t_space"])))
    out["ricci_space"] = float(np.max(np.abs(ric[S, S] - cr["space"])))
    if spec.variant != "restricted":
        F = slice(n, n + nf)
        fiber = spec.fiber_chart()
        y = pt.fiber if pt.fiber is not None else spec.default_fiber_point()
        gf = fiber.matrix(y)
        out["ricci_fiber"] = float(
            np.max(np.abs(ric[F, F] - cr["fiber_coeff_per_gamma"] * gf))
        )
        out["ricci_vanishing"] = max(
            float(np.max(np.abs(ric[tix, F]))), float(np.max(np.abs(ric[S, F])))
        )
    return out


# ---------------------------------------------------------------------------
# orthonormal-frame machinery and the decay fit
# ---------------------------------------------------------------------------


def _space_frame(bd: dict) -> np.ndarray:
    return orthonormal_frame(bd["g"])


def ricci_frame_norm(spec: ThermostatSpec, x: Sequence[float], t: float) -> float:
    """Max-abs Ricci component of the product metric in a blockwise
    orthonormal frame (|G00| on the time direction)."""
    bd = base_data(spec, x, t)
    g00 = _g00(spec, bd, t)
    cr = closed_form_ricci(spec, x, t)
    E = _space_frame(bd)
    vals = [abs(cr["tt"]) / abs(g00)]
    vals.append(float(np.max(np.abs(E.T @ cr["t_space"]))) / np.sqrt(abs(g00)))
    vals.append(float(np.max(np.abs(E.T @ cr["space"] @ E))))
    if spec.variant != "restricted":
        # fiber block is proportional to gamma; t*gamma frames divide by t
        vals.append(abs(cr["fiber_coeff_per_gamma"]) / t)
    return max(vals)


@dataclass
class DecayFit:
    norms: list
    slope: Optional[float]
    verdict: str
    skipped: list


def ricci_decay_fit(
    spec_template: ThermostatSpec,
    n_list: Sequence[int],
    samples: Sequence[tuple],
) -> DecayFit:
    """Least-squares slope of log(max frame Ricci norm) against log N.

    ``samples`` are (x, t) pairs on the base flow.  A flat base yields norms
    at round-off and the fit is skipped with an "exactly_flat" verdict.
    """
    if len(n_list) < 4:
        raise PreconditionError("decay fit needs at least 4 fiber dimensions")
    norms = []
    skipped = []
    for nf in n_list:
        spec = ThermostatSpec(spec_template.variant, nf, spec_template.base)
        worst = 0.0
        for x, t in samples:
            try:
                worst = max(worst, ricci_frame_norm(spec, x, t))
            except DegenerateMetricError:
                skipped.append((nf, tuple(x), t))
        norms.append((nf, worst))
    if max(v for _, v in norms) <= 1e-12:
        return DecayFit(norms=norms, slope=None, verdict="exactly_flat", skipped=skipped)
    logs = np.log([float(nf) for nf, _ in norms])
    vals = np.log([v for _, v in norms])
    slope = float(np.polyfit(logs, vals, 1)[0])
    return DecayFit(norms=norms, slope=slope, verdict="fitted", skipped=skipped)


# ---------------------------------------------------------------------------
# Harnack-block limits
# ---------------------------------------------------------------------------


def harnack_limit_check(
    spec_template: ThermostatSpec,
    x: Sequence[float],
    t: float,
    n_list: Sequence[int],
) -> dict:
    """Distance of the closed-form product curvature blocks from the
    Harnack blocks of the base flow, per fiber dimension.

    Space indices are moved to a base-orthonormal frame; the time index is
    kept raw, which is exactly the normalization in which the three blocks
    converge to (Rm, P, M).  Returns per-N discrepancies and the fitted
    constants C = N * discrepancy with their spread."""
    spec0 = ThermostatSpec(spec_template.variant, max(n_list), spec_template.base)
    bd = base_data(spec0, x, t)
    E = _space_frame(bd)

    def framed(tensor, n_space_slots):
        out = tensor
        for _ in range(n_space_slots):
            out = np.tensordot(out, E, axes=([0], [0]))
        return out

    rm_f = framed(bd["rm"], 4)
    p_f = framed(bd["p"], 3)
    m_f = framed(bd["m"], 2)
    rows = []
    for nf in n_list:
        spec = ThermostatSpec(spec_template.variant, nf, spec_template.base)
        cf = closed_form_curvature(spec, x, t)
        d_rm = float(np.max(np.abs(framed(cf["space"], 4) - rm_f)))
        d_p = float(np.max(np.abs(framed(cf["ts"], 3) - p_f)))
        d_m = float(np.max(np.abs(framed(cf["tt"], 2) - m_f)))
        rows.append({"N": nf, "rm": d_rm, "p": d_p, "m": d_m})
    fits = {}
    for key in ("rm", "p", "m"):
        cs = [row["N"] * row[key] for row in rows]
        top = max(cs)
        fits[key] = {
            "C": top,
            "spread": (top - min(cs)) / top if top > 1e-13 else 0.0,
            "all_zero": top <= 1e-12,
        }
    return {"rows": rows, "fits": fits}


# ---------------------------------------------------------------------------
# restricted-slice curvature operator
# ---------------------------------------------------------------------------


def restricted_blocks(spec: ThermostatSpec, x: Sequence[float], t: float):
    """(space, time-space, time-time) blocks of the restricted-slice
    curvature via the jet pipeline, space indices base-orthonormalized."""
    if spec.variant != "restricted":
        spec = ThermostatSpec("restricted", spec.n_fiber, spec.base)
    chart = build_metric(spec)
    coords = np.concatenate([np.asarray(x, float), [t]])
    data = curvature_data(chart, coords)
    n, tix = spec.n, spec.time_index
    S = slice(0, n)
    g_base = data.g[S, S]
    E = orthonormal_frame(g_base)

    def framed(tensor, slots):
        out = tensor
        for _ in range(slots):
            out = np.tensordot(out, E, axes=([0], [0]))
        return out

    rm_ss = framed(data.rm[S, S, S, S], 4)
    rm_st = framed(data.rm[S, S, tix, S], 3)
    rm_tt = framed(data.rm[S, tix, S, tix], 2)
    return rm_ss, rm_st, rm_tt


def restricted_min_eig(spec: ThermostatSpec, x: Sequence[float], t: float) -> float:
    """Minimum eigenvalue of the restricted-slice curvature form over unit
    2-forms, with the time-pair components weighted so the N -> infinity
    limit is exactly the Harnack form of the base flow.

    Requires the base flow to have a weakly positive curvature operator at
    (x, t); the offending eigenvalue is named otherwise."""
    from .charts import curvature_operator_eigs

    base_chart = spec.base.chart_at(t) if hasattr(spec.base, "chart_at") else None
    if base_chart is not None:
        geom = curvature_data(base_chart, x)
        eigs, _ = curvature_operator_eigs(geom.rm, geom.g)
        if eigs[0] < -1e-8:
            raise PreconditionError(
                f"base curvature operator not weakly positive (eigenvalue {eigs[0]:.3e})"
            )
    rm_ss, rm_st, rm_tt = restricted_blocks(spec, x, t)
    triple = HarnackTriple(rm=rm_ss, p=rm_st, m=rm_tt, t=t, dim=spec.n)
    return harnack_min_eig(triple)


# ---------------------------------------------------------------------------
# space-time residual operations (homogeneous bases)
# ---------------------------------------------------------------------------


def _homogeneous_or_raise(spec: ThermostatSpec, bd: dict) -> None:
    if float(np.max(np.abs(bd["dr"]))) > 1e-9 or float(np.max(np.abs(bd["p"]))) > 1e-9:
        raise UnsupportedConfigurationError(
            "space-time residuals are only verified over homogeneous bases"
        )


def _time_cov_rhs(spec: ThermostatSpec, bd: dict, x: Sequence[float], t: float) -> dict:
    """Homogeneous right sides of the time-direction covariant derivative
    of the three curvature blocks."""
    base = spec.base
    rmix = bd["ginv"] @ bd["ric"]
    tder = base.curvature_time_derivatives(x, t)
    dm = base.dm_dt(x, t)
    line1 = (
        tder.dRm
        + np.einsum("mi,mjkl->ijkl", rmix, bd["rm"])
        + np.einsum("mj,imkl->ijkl", rmix, bd["rm"])
        + np.einsum("mk,ijml->ijkl", rmix, bd["rm"])
        + np.einsum("ml,ijkm->ijkl", rmix, bd["rm"])
    )
    line3 = dm + rmix.T @ bd["m"] + bd["m"] @ rmix + bd["m"] / t
    return {"rm": line1, "p": np.zeros_like(bd["p"]), "m": line3}


def spacetime_residuals(
    spec: ThermostatSpec,
    x: Sequence[float],
    t: float,
    which: Sequence[str] = ("time_cov", "laplacian", "heat"),
) -> dict[str, float]:
    """Residuals of the space-time derivative relations of the restricted
    slice against their base-flow right sides, at O(1/N) tolerance.

    Only homogeneous bases are supported: spatial curvature gradients
    multiply every term the order-4 jet budget cannot reach, and they
    vanish identically there.
    """
    rspec = spec if spec.variant == "restricted" else ThermostatSpec(
        "restricted", spec.n_fiber, spec.base
    )
    bd = base_data(rspec, x, t)
    _homogeneous_or_raise(rspec, bd)
    chart = build_metric(rspec)
    coords = np.concatenate([np.asarray(x, float), [t]])
    data = curvature_data(chart, coords, nderiv=2)
    n, tix = rspec.n, rspec.time_index
    S = slice(0, n)
    rhs_cov = _time_cov_rhs(rspec, bd, x, t)
    out: dict[str, float] = {}

    E = orthonormal_frame(bd["g"])

    def framed(tensor):
        res = tensor
        for _ in range(tensor.ndim):
            res = np.tensordot(res, E, axes=([0], [0]))
        return res

    def block_diff(lhs, rhs):
        return float(np.max(np.abs(framed(lhs) - framed(rhs))))

    cov_t = data.cov_rm[tix]
    lhs_cov = {
        "rm": cov_t[S, S, S, S],
        "p": cov_t[S, S, tix, S],
        "m": cov_t[S, tix, S, tix],
    }
    lap = data.lap_rm()
    lhs_lap = {
        "rm": lap[S, S, S, S],
        "p": lap[S, S, tix, S],
        "m": lap[S, tix, S, tix],
    }
    rup = np.einsum("am,bn,ab->mn", bd["ginv"], bd["ginv"], bd["ric"])
    ric_lm = bd["ric"] @ bd["ginv"]
    rhs_lap = {
        "rm": np.zeros_like(bd["rm"]),
        "p": np.zeros_like(bd["p"]),
        "m": 2.0 * np.einsum("mn,ml,injl->ij", rup, ric_lm, bd["rm"]),
    }
    if "time_cov" in which:
        out["time_cov_rm"] = block_diff(lhs_cov["rm"], rhs_cov["rm"])
        out["time_cov_p"] = block_diff(lhs_cov["p"], rhs_cov["p"])
        out["time_cov_m"] = block_diff(lhs_cov["m"], rhs_cov["m"])
    if "laplacian" in which:
        out["laplacian_rm"] = block_diff(lhs_lap["rm"], rhs_lap["rm"])
        out["laplacian_p"] = block_diff(lhs_lap["p"], rhs_lap["p"])
        out["laplacian_m"] = block_diff(lhs_lap["m"], rhs_lap["m"])
    if "heat" in which:
        m_up = np.einsum("ab,am,bn->mn", bd["m"], bd["ginv"], bd["ginv"])
        up2 = np.einsum("ma,nb,kalb->kmln", bd["ginv"], bd["ginv"], bd["rm"])
        rhs_heat_rm = (
            2.0 * np.einsum("imjn,kmln->ijkl", bd["rm"], up2)
            - 2.0 * np.einsum("imjn,lmkn->ijkl", bd["rm"], up2)
            + 2.0 * np.einsum("imkn,jmln->ijkl", bd["rm"], up2)
            - 2.0 * np.einsum("imln,jmkn->ijkl", bd["rm"], up2)
        )
        rhs_heat_m = (
            2.0 * np.einsum("imjn,mn->ij", bd["rm"], m_up)
            - bd["ric"] / (2.0 * t * t)
            + bd["m"] / t
        )
        out["heat_rm"] = block_diff(lhs_cov["rm"] - lhs_lap["rm"], rhs_heat_rm)
        out["heat_p"] = block_diff(lhs_cov["p"] - lhs_lap["p"], np.zeros_like(bd["p"]))
        out["heat_m"] = block_diff(lhs_cov["m"] - lhs_lap["m"], rhs_heat_m)
    if "time_cov_full" in which:
        fspec = spec if spec.variant != "restricted" else ThermostatSpec(
            "hyperbolic", spec.n_fiber, spec.base
        )
        fchart = build_metric(fspec)
        fcoords = product_point(fspec, SpacetimePoint(base=np.asarray(x), t=t))
        fdata = curvature_data(fchart, fcoords, nderiv=1)
        ftix = fspec.time_index
        Sf = slice(0, n)
        fcov = fdata.cov_rm[ftix]
        out["time_cov_full_rm"] = block_diff(fcov[Sf, Sf, Sf, Sf], rhs_cov["rm"])
        out["time_cov_full_p"] = block_diff(fcov[Sf, Sf, ftix, Sf], rhs_cov["p"])
        out["time_cov_full_m"] = block_diff(fcov[Sf, ftix, Sf, ftix], rhs_cov["m"])
    return out


def fiber_sectional_sampled(
    variant: str, n_fiber: int, pairs: Sequence[tuple[int, int]]
) -> dict[tuple[int, int], float]:
    """Orthonormal-frame sectional curvature of the scaled fiber model on
    sampled coordinate planes, valid for any fiber dimension.

    Both models restrict exactly to lower-dimensional copies of themselves
    along coordinate slices (the upper-half metric depends only on the last
    coordinate; the stereographic one only on the kept radii when the
    frozen coordinates sit at the origin), so each plane is checked on a
    2- or 3-dimensional subchart."""
    out = {}
    for a, b in pairs:
        if not 0 <= a < b < n_fiber:
            raise PreconditionError(f"invalid fiber pair {(a, b)}")
        if variant == "spherical":
            sub = library.sphere_stereographic(2, scale=2.0 * n_fiber)
            point = [0.07, -0.04]
        else:
            keep_last = b == n_fiber - 1
            dim = 2 if keep_last else 3
            sub = library.hyperbolic_upper_half(dim, scale=2.0 * n_fiber)
            point = [0.3, 1.1] if keep_last else [0.3, -0.2, 1.1]
        data = curvature_data(sub, point)
        rm_f = frame_components(data.rm, data.g)
        out[(a, b)] = float(rm_f[0, 1, 0, 1])
    return out


def spherical_hyperbolic_fiber_relation(
    n: int, c0: float, n_fiber: int, x: Sequence[float], t: float
) -> float:
    """|spherical fiber coefficient(tau) - hyperbolic coefficient with
    N/(2t) |-> -N/(2 tau)| evaluated on matching base curvature data."""
    from . import flows as _flows

    bwd = _flows.backward_constant_curvature(n, c0)
    sph = ThermostatSpec("spherical", n_fiber, bwd)
    bd_s = base_data(sph, x, t)
    coeff_s = fiber_block_coefficient(sph, bd_s, t)
    # hyperbolic closed form with the substituted time-time block
    g00_sub = bd_s["r"] + n_fiber / (2.0 * t)
    coeff_sub = -0.25 * (-2.0 * t / n_fiber + 1.0 / g00_sub)
    return abs(coeff_s - coeff_sub)
