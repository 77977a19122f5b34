"""Rotationally symmetric Ricci flow on the 2-sphere.

The metric is g = e^{2u(theta,t)} g_round in the polar chart; in two
dimensions the flow reduces to a conformal-factor equation

    du/dt = e^{-2u} (Lap_round u - 1) ,   R = 2 e^{-2u} (1 - Lap_round u) ,

advanced by explicit Heun steps with a conservative CFL factor of 0.2 and
second-order centered stencils on a uniform theta grid.  Pole regularity is
enforced by even reflection (u'(0) = u'(pi) = 0) with the l'Hopital value
Lap u = 2 u'' at the poles.

Curvature fields on a slice (P, M, their covariant derivatives and
Laplacians) are computed by differentiating the grid scalar-curvature field
with the same stencils rather than by jets of interpolated data; time
derivatives come from differencing adjacent stored slices with a step
matched to the spatial accuracy.  In two dimensions Ric = (R/2) g and
Rm = (R/2)(g_ik g_jl - g_il g_jk), so every field reduces to derivatives of
R and the conformal factor.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ExtinctionError, PreconditionError, StepSizeError

CFL_FACTOR = 0.2
CURVATURE_BLOWUP = 1e3


def _mirror(values: np.ndarray) -> np.ndarray:
    """Pad with even reflection across both poles."""
    return np.concatenate([[values[1]], values, [values[-2]]])


def _dtheta(values: np.ndarray, h: float) -> np.ndarray:
    v = _mirror(values)
    return (v[2:] - v[:-2]) / (2 * h)


def _d2theta(values: np.ndarray, h: float) -> np.ndarray:
    v = _mirror(values)
    return (v[2:] - 2 * v[1:-1] + v[:-2]) / (h * h)


class SurfaceFlow:
    """Conformal round-sphere flow state on a uniform theta grid."""

    def __init__(
        self,
        grid_size: int = 128,
        profile: Callable[[np.ndarray], np.ndarray] | None = None,
        t_start: float = 1.0,
    ):
        if grid_size < 16:
            raise PreconditionError("grid_size must be at least 16")
        self.m = grid_size
        self.theta = np.linspace(0.0, np.pi, grid_size + 1)
        self.h = np.pi / grid_size
        self.t = float(t_start)
        if profile is None:
            self.u = np.zeros(grid_size + 1)
        else:
            self.u = np.asarray(profile(self.theta), dtype=float)
        if not np.all(np.isfinite(self.u)):
            raise PreconditionError("initial profile must be finite")
        self.kind = f"surface_rotsym(m={grid_size})"
        self.n = 2

    # -- PDE -------------------------------------------------------------

    def _laplacian_round(self, u: np.ndarray) -> np.ndarray:
        up = _dtheta(u, self.h)
        upp = _d2theta(u, self.h)
        out = np.empty_like(u)
        interior = slice(1, -1)
        out[interior] = upp[interior] + up[interior] / np.tan(self.theta[interior])
        out[0] = 2.0 * upp[0]
        out[-1] = 2.0 * upp[-1]
        return out

    def _rhs(self, u: np.ndarray) -> np.ndarray:
        return np.exp(-2.0 * u) * (self._laplacian_round(u) - 1.0)

    def stable_dt(self) -> float:
        return CFL_FACTOR * self.h**2 / float(np.max(np.exp(-2.0 * self.u)))

    def scalar_curvature(self, u: np.ndarray | None = None) -> np.ndarray:
        u = self.u if u is None else u
        return 2.0 * np.exp(-2.0 * u) * (1.0 - self._laplacian_round(u))

    def step(self, dt: float | None = None) -> None:
        bound = self.stable_dt()
        if dt is None:
            dt = bound
        elif dt > bound * (1.0 + 1e-12):
            raise StepSizeError(f"dt={dt:g} exceeds stability bound {bound:g}")
        k1 = self._rhs(self.u)
        k2 = self._rhs(self.u + dt * k1)
        self.u = self.u + 0.5 * dt * (k1 + k2)
        self.t += dt
        r = self.scalar_curvature()
        if not np.all(np.isfinite(self.u)) or np.max(np.abs(r)) > CURVATURE_BLOWUP:
            raise ExtinctionError(
                f"curvature blow-up ({np.max(np.abs(r)):.3g}) at t={self.t:g}", self.t
            )

    def run_to(self, t_target: float) -> None:
        if t_target < self.t:
            raise PreconditionError("cannot run backwards")
        while self.t < t_target - 1e-14:
            self.step(min(self.stable_dt(), t_target - self.t))

    def slice(self) -> "SurfaceSlice":
        return SurfaceSlice(theta=self.theta.copy(), u=self.u.copy(), t=self.t, h=self.h)

    def record(self) -> dict:
        """JSON-ready persistence record with the grid values."""
        return {
            "family": self.kind,
            "t": self.t,
            "grid_size": self.m,
            "u": [float(v) for v in self.u],
        }

    def triple_at(self, t: float, dt_out: float | None = None):
        """Slices at t - dt_out, t, t + dt_out for time differencing.

        dt_out defaults to the grid spacing so the differencing error is
        matched to the spatial one.
        """
        if dt_out is None:
            dt_out = self.h
        if t - dt_out <= self.t:
            raise PreconditionError("target time too close to the current state")
        self.run_to(t - dt_out)
        before = self.slice()
        self.run_to(t)
        middle = self.slice()
        self.run_to(t + dt_out)
        after = self.slice()
        return before, middle, after


# ---------------------------------------------------------------------------
# per-slice geometry
# ---------------------------------------------------------------------------


@dataclass
class SurfaceSlice:
    """One time slice: the conformal factor and the derived grid fields."""

    theta: np.ndarray
    u: np.ndarray
    t: float
    h: float

    def __post_init__(self):
        self.m = len(self.theta) - 1
        self.up = _dtheta(self.u, self.h)
        self.upp = _d2theta(self.u, self.h)
        lap = np.empty_like(self.u)
        interior = slice(1, -1)
        lap[interior] = self.upp[interior] + self.up[interior] / np.tan(self.theta[interior])
        lap[0] = 2.0 * self.upp[0]
        lap[-1] = 2.0 * self.upp[-1]
        self.r = 2.0 * np.exp(-2.0 * self.u) * (1.0 - lap)
        self.rp = _dtheta(self.r, self.h)
        self.rpp = _d2theta(self.r, self.h)

    # chart components at a node, coordinates (theta, phi)
    def metric(self, k: int) -> np.ndarray:
        e2u = np.exp(2.0 * self.u[k])
        s = np.sin(self.theta[k])
        return np.diag([e2u, e2u * s * s])

    def metric_inv(self, k: int) -> np.ndarray:
        g = self.metric(k)
        # the phi-phi component degenerates at the poles; those nodes are
        # excluded from every residual loop, so a zero entry is inert
        inv_phi = 1.0 / g[1, 1] if g[1, 1] > 1e-300 else 0.0
        return np.diag([1.0 / g[0, 0], inv_phi])

    def gamma(self, k: int) -> np.ndarray:
        """Gamma^a_bc at node k (phi-independence built in)."""
        th = self.theta[k]
        s, c = np.sin(th), np.cos(th)
        up = self.up[k]
        gam = np.zeros((2, 2, 2))
        gam[0, 0, 0] = up
        gam[0, 1, 1] = -(up * s * s + s * c)
        gam[1, 0, 1] = gam[1, 1, 0] = up + (c / s if s > 1e-12 else 0.0)
        return gam

    def interior(self, margin: float = 0.15) -> np.ndarray:
        """Node indices safely away from the poles."""
        return np.where((self.theta > margin) & (self.theta < np.pi - margin))[0]

    # -- nodewise tensor fields ------------------------------------------

    def grad_r(self, k: int) -> np.ndarray:
        return np.array([self.rp[k], 0.0])

    def hess_r_field(self) -> np.ndarray:
        """Hessian of R at every node, shape (nodes, 2, 2)."""
        out = np.zeros((self.m + 1, 2, 2))
        for k in range(self.m + 1):
            gam = self.gamma(k)
            out[k, 0, 0] = self.rpp[k] - gam[0, 0, 0] * self.rp[k]
            out[k, 1, 1] = -gam[0, 1, 1] * self.rp[k]
        return out

    def field_partial(self, field: np.ndarray) -> np.ndarray:
        """theta-partial of a nodewise tensor field, component by component."""
        out = np.zeros_like(field)
        flat = field.reshape(self.m + 1, -1)
        dflat = np.stack([_dtheta(flat[:, c], self.h) for c in range(flat.shape[1])], axis=1)
        return dflat.reshape(field.shape)

    def cov_field(self, field: np.ndarray) -> np.ndarray:
        """Covariant derivative of a nodewise covariant tensor field; the new
        derivative index comes first: out[node, m, S]."""
        shape = field.shape[1:]
        rank = len(shape)
        dfield = self.field_partial(field)
        out = np.zeros((self.m + 1, 2) + shape)
        for k in range(self.m + 1):
            gam = self.gamma(k)
            for mdir in range(2):
                val = dfield[k].copy() if mdir == 0 else np.zeros(shape)
                for slot in range(rank):
                    moved = np.moveaxis(field[k], slot, 0)
                    # Gamma^q_{m s_slot} T[... q ...]: contract q, the slot
                    # index of Gamma lands where the tensor slot was
                    corr = np.tensordot(gam[:, mdir, :], moved, axes=([0], [0]))
                    val = val - np.moveaxis(corr, 0, slot)
                out[k, mdir] = val
        return out

    def laplacian_field(self, field: np.ndarray) -> np.ndarray:
        """Rough Laplacian of a nodewise covariant tensor field."""
        cov1 = self.cov_field(field)
        cov2 = self.cov_field(cov1)
        out = np.zeros_like(field)
        for k in range(self.m + 1):
            out[k] = np.einsum("ml,ml...->...", self.metric_inv(k), cov2[k])
        return out

    # -- curvature package at a node --------------------------------------

    def point_data(self, k: int) -> dict:
        g = self.metric(k)
        ginv = self.metric_inv(k)
        r = self.r[k]
        pattern = np.einsum("ik,jl->ijkl", g, g) - np.einsum("il,jk->ijkl", g, g)
        rm = 0.5 * r * pattern
        ric = 0.5 * r * g
        dr = self.grad_r(k)
        hess = self.hess_r_field()[k]
        lap_r = float(np.einsum("ij,ij->", ginv, hess))
        p = 0.5 * (np.einsum("i,jk->ijk", dr, g) - np.einsum("j,ik->ijk", dr, g))
        m = (0.5 * lap_r + 0.25 * r * r + 0.25 * r / self.t) * g - 0.5 * hess
        return {
            "g": g,
            "ginv": ginv,
            "rm": rm,
            "ric": ric,
            "scalar": r,
            "grad_r": dr,
            "hess_r": hess,
            "lap_r": lap_r,
            "p": p,
            "m": m,
        }

    def p_field(self) -> np.ndarray:
        out = np.zeros((self.m + 1, 2, 2, 2))
        for k in range(self.m + 1):
            g = self.metric(k)
            dr = self.grad_r(k)
            out[k] = 0.5 * (
                np.einsum("i,jk->ijk", dr, g) - np.einsum("j,ik->ijk", dr, g)
            )
        return out

    def m_field(self) -> np.ndarray:
        hess = self.hess_r_field()
        out = np.zeros((self.m + 1, 2, 2))
        for k in range(self.m + 1):
            g = self.metric(k)
            lap_r = float(np.einsum("ij,ij->", self.metric_inv(k), hess[k]))
            out[k] = (
                0.5 * lap_r + 0.25 * self.r[k] ** 2 + 0.25 * self.r[k] / self.t
            ) * g - 0.5 * hess[k]
        return out

    def rm_field(self) -> np.ndarray:
        out = np.zeros((self.m + 1, 2, 2, 2, 2))
        for k in range(self.m + 1):
            g = self.metric(k)
            pattern = np.einsum("ik,jl->ijkl", g, g) - np.einsum("il,jk->ijkl", g, g)
            out[k] = 0.5 * self.r[k] * pattern
        return out

    def ric_field(self) -> np.ndarray:
        out = np.zeros((self.m + 1, 2, 2))
        for k in range(self.m + 1):
            out[k] = 0.5 * self.r[k] * self.metric(k)
        return out


# ---------------------------------------------------------------------------
# evolution residuals on the grid
# ---------------------------------------------------------------------------


def surface_evolution_residuals(
    flow: SurfaceFlow,
    t: float,
    which: Sequence[str] = ("riemann", "ricci", "scalar", "p_evolution", "m_evolution"),
    margin: float = 0.5,
) -> dict[str, float]:
    """Max-abs residuals of the evolution equations over interior nodes.

    The time derivative of every field is a centered difference of the
    slices at t -/+ h, so the residuals carry the O(h^2) discretization
    error of the scheme; they are asserted to shrink under grid refinement,
    not to vanish outright.
    """
    from . import flows as _flows

    before, mid, after = flow.triple_at(t)
    dt2 = after.t - before.t
    nodes = mid.interior(margin)
    out = {name: 0.0 for name in which}

    hess = mid.hess_r_field()
    p_fld = mid.p_field()
    m_fld = mid.m_field()
    rm_fld = mid.rm_field()
    ric_fld = mid.ric_field()
    lap_p = mid.laplacian_field(p_fld)
    lap_m = mid.laplacian_field(m_fld)
    lap_rm = mid.laplacian_field(rm_fld)
    lap_ric = mid.laplacian_field(ric_fld)
    cov_p = mid.cov_field(p_fld)
    cov_rm = mid.cov_field(rm_fld)

    d_rm = (after.rm_field() - before.rm_field()) / dt2
    d_ric = (after.ric_field() - before.ric_field()) / dt2
    d_r = (after.r - before.r) / dt2
    d_p = (after.p_field() - before.p_field()) / dt2
    d_m = (after.m_field() - before.m_field()) / dt2

    for k in nodes:
        pd = mid.point_data(k)
        g, ginv, rm, ric, r = pd["g"], pd["ginv"], pd["rm"], pd["ric"], pd["scalar"]
        if "riemann" in which:
            rhs = _flows.riemann_evolution_rhs(rm, ginv, ric, lap_rm[k])
            out["riemann"] = max(out["riemann"], float(np.max(np.abs(d_rm[k] - rhs))))
        if "ricci" in which:
            rhs = (
                lap_ric[k]
                - 2.0 * ric @ ginv @ ric
                + 2.0 * np.einsum("ikjl,kl->ij", rm, ginv @ ric @ ginv)
            )
            out["ricci"] = max(out["ricci"], float(np.max(np.abs(d_ric[k] - rhs))))
        if "scalar" in which:
            ric_up = ginv @ ric @ ginv
            lap_r_scal = float(np.einsum("ij,ij->", ginv, hess[k]))
            rhs = lap_r_scal + 2.0 * float(np.einsum("ij,ij->", ric_up, ric))
            out["scalar"] = max(out["scalar"], abs(d_r[k] - rhs))
        if "p_evolution" in which:
            rhs = _flows.p_evolution_rhs(rm, ginv, ric, pd["p"], cov_rm[k], lap_p[k])
            out["p_evolution"] = max(out["p_evolution"], float(np.max(np.abs(d_p[k] - rhs))))
        if "m_evolution" in which:
            rhs = _flows.m_evolution_rhs(
                rm, ginv, ric, pd["p"], pd["m"], cov_p[k], lap_m[k], mid.t
            )
            out["m_evolution"] = max(out["m_evolution"], float(np.max(np.abs(d_m[k] - rhs))))
    return out


class SurfaceBase:
    """A frozen neighborhood of the surface flow exposed as a base flow.

    Built from three stored slices around t0, it provides jet-compatible
    metric components and the scalar-curvature Taylor polynomial at grid
    nodes, with stencil-accurate (order h^2) coefficients.  Evaluation
    points must sit on grid nodes.
    """

    def __init__(self, flow: SurfaceFlow, t0: float):
        self.before, self.mid, self.after = flow.triple_at(t0)
        self.t0 = float(self.mid.t)
        self.dt2 = self.after.t - self.before.t
        self.n = 2
        self.kind = f"surface_base(t={t0:g})"
        self.homogeneous = False
        self.t_max = self.after.t

    def check_time(self, t: float) -> None:
        if abs(t - self.t0) > 1e-9:
            raise PreconditionError("surface base is frozen at its anchor time")

    def _node(self, theta: float) -> int:
        k = int(round(theta / self.mid.h))
        if abs(self.mid.theta[k] - theta) > 1e-9:
            raise PreconditionError("surface base must be evaluated at grid nodes")
        return k

    def _u_poly(self, k: int):
        from .jets import TaylorPoly

        mid = self.mid
        du_dt = (self.after.u[k] - self.before.u[k]) / self.dt2
        up_dt = (
            _dtheta(self.after.u, self.mid.h)[k] - _dtheta(self.before.u, self.mid.h)[k]
        ) / self.dt2
        d2u_dt2 = (self.after.u[k] - 2 * mid.u[k] + self.before.u[k]) / (self.dt2 / 2) ** 2
        coeffs = {
            (0, 0, 0): mid.u[k],
            (1, 0, 0): mid.up[k],
            (2, 0, 0): 0.5 * mid.upp[k],
            (0, 0, 1): du_dt,
            (1, 0, 1): up_dt,
            (0, 0, 2): 0.5 * d2u_dt2,
        }
        return TaylorPoly([mid.theta[k], 0.0, self.t0], coeffs)

    def metric_components(self, coords, t):
        from . import jets as _jets
        from .jets import Jet

        theta = coords[0]
        th0 = theta.value if isinstance(theta, Jet) else float(theta)
        k = self._node(th0)
        upoly = self._u_poly(k)
        u = upoly([coords[0], coords[1], t])
        e2u = _jets.exp(2.0 * u)
        s = _jets.sin(coords[0])
        return [[e2u, 0.0], [0.0, e2u * s * s]]

    def scalar_poly(self, x, t, order):
        from .jets import TaylorPoly

        k = self._node(float(x[0]))
        mid = self.mid
        dr_dt = (self.after.r[k] - self.before.r[k]) / self.dt2
        drp_dt = (self.after.rp[k] - self.before.rp[k]) / self.dt2
        d2r_dt2 = (self.after.r[k] - 2 * mid.r[k] + self.before.r[k]) / (self.dt2 / 2) ** 2
        coeffs = {
            (0, 0, 0): mid.r[k],
            (1, 0, 0): mid.rp[k],
            (2, 0, 0): 0.5 * mid.rpp[k],
            (0, 0, 1): dr_dt,
            (1, 0, 1): drp_dt,
            (0, 0, 2): 0.5 * d2r_dt2,
        }
        return TaylorPoly([mid.theta[k], 0.0, self.t0], coeffs)

    def node_theta(self, k: int) -> float:
        return float(self.mid.theta[k])

    def base_data(self, x, t):
        """Grid curvature data at a node, shaped like the closed-form
        families' flow-point payload (see thermostat.base_data)."""
        self.check_time(t)
        k = self._node(float(x[0]))
        mid = self.mid
        pd = mid.point_data(k)
        dr_dt = (self.after.r[k] - self.before.r[k]) / self.dt2
        return {
            "g": pd["g"],
            "ginv": pd["ginv"],
            "gamma": mid.gamma(k),
            "rm": pd["rm"],
            "ric": pd["ric"],
            "r": pd["scalar"],
            "dr": pd["grad_r"],
            "hess_r": pd["hess_r"],
            "lap_ric": 0.5 * float(np.einsum("ij,ij->", pd["ginv"], pd["hess_r"])) * pd["g"],
            "p": pd["p"],
            "m": pd["m"],
            "dr_dt": dr_dt,
        }


def round_profile_oracle(u0: float, t_start: float, t: float) -> float:
    """Exact conformal factor of the round flow: e^{2u} = e^{2u0} - 2(t - t0)."""
    c = np.exp(2.0 * u0) - 2.0 * (t - t_start)
    if c <= 0:
        raise ExtinctionError("round flow extinct", t_start + 0.5 * np.exp(2.0 * u0))
    return 0.5 * float(np.log(c))


def curvature_spread_series(
    flow: SurfaceFlow, times: Sequence[float]
) -> list[tuple[float, float]]:
    """(t, max R - min R) along the flow: spatial constancy diagnostic."""
    out = []
    for t in times:
        flow.run_to(t)
        r = flow.scalar_curvature()
        out.append((float(t), float(np.max(r) - np.min(r))))
    return out
