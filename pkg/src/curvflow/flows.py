"""Explicit Ricci-flow solutions and evolution-equation residuals.

The closed-form families evolve by block scale factors: a round-sphere block
of dimension k and scale c has c(t) = c(0) - 2(k-1) t under d g / d t =
-2 Ric, so Riemann, Ricci, scalar curvature and their exact time derivatives
are available analytically.  Residual checks pit those analytic time
derivatives against the jet-computed spatial side of each evolution
equation; they agree only because the family really solves the flow.

Sign note on the coupled evolution equations for the first- and
second-order curvature combinations (p_tensor / m_tensor): with the plain
coordinate time derivative on the left, the Ricci correction terms enter
the right-hand side with a minus sign,

    (d/dt - Lap) M_ij = 2 R_imjn M^mn + 2 R^mn (cov_m P_nij + cov_m P_nji)
                        + 2 P_imn P_j^mn - 4 P_imn P_j^nm
                        + 2 R^mn R_m^l R_injl - 1/(2 t^2) Ric_ij
                        - R^m_i M_mj - R^m_j M_im

(and likewise -R^m P corrections in the P equation); the opposite sign
belongs to the frame-corrected time derivative that keeps an evolving
orthonormal frame orthonormal.  The constant-curvature residual test pins
this down numerically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .charts import CurvatureData, MetricChart, curvature_data
from .errors import ExtinctionError, PreconditionError, UnsupportedConfigurationError

_HOMOGENEITY_TOL = 1e-9


@dataclass
class BlockSpec:
    dim: int
    c0: float
    rate: float  # c(t) = c0 - rate * t; rate = 2 (dim - 1) for a unit sphere block

    def scale(self, t):
        return self.c0 - self.rate * t


class FlowFamily:
    """Base class: a family of metrics g(t) on a fixed chart, t in (0, T]."""

    n: int
    t_max: float
    kind: str
    homogeneous: bool = False

    def metric_components(self, coords, t):
        raise NotImplementedError

    def chart_at(self, t: float) -> MetricChart:
        self.check_time(t)
        return MetricChart(
            self.n,
            lambda coords, _t=float(t): self.metric_components(coords, _t),
            name=f"{self.kind}@t={t:g}",
            domain=self.domain,
        )

    domain = None

    def check_time(self, t: float) -> None:
        if not 0.0 < t <= self.t_max:
            raise ExtinctionError(
                f"{self.kind}: t={t:g} outside (0, {self.t_max:g}]", self.t_max
            )

    def dg_dt(self, x: Sequence[float], t: float) -> np.ndarray:
        raise NotImplementedError

    def curvature_time_derivatives(self, x: Sequence[float], t: float):
        raise NotImplementedError

    def scalar_time_taylor(self, x: Sequence[float], t: float, order: int) -> list[float]:
        """Taylor coefficients [R, dR/dt, d2R/dt2 / 2!, ...] at fixed x."""
        raise NotImplementedError

    def dp_dt(self, x: Sequence[float], t: float) -> np.ndarray:
        raise NotImplementedError

    def dm_dt(self, x: Sequence[float], t: float) -> np.ndarray:
        raise NotImplementedError

    def scalar_poly(self, x: Sequence[float], t: float, order: int):
        """Taylor polynomial of the scalar curvature in (x..., t) at (x, t).

        Homogeneous families have no spatial dependence, so only pure time
        powers appear, with exact closed-form coefficients.
        """
        from .jets import TaylorPoly

        if not self.homogeneous:
            raise NotImplementedError("inhomogeneous families provide their own poly")
        taylor = self.scalar_time_taylor(x, t, order)
        center = list(x) + [t]
        zero = (0,) * self.n
        return TaylorPoly(center, {zero + (k,): c for k, c in enumerate(taylor)})


@dataclass
class TimeDerivs:
    dRm: np.ndarray
    dRic: np.ndarray
    dR: float


class BlockSphereFlow(FlowFamily):
    """Product of round-sphere blocks (possibly a single one) in stereographic
    charts, each block shrinking with its own closed-form scale factor."""

    def __init__(self, blocks: Sequence[BlockSpec], kind: str):
        self.blocks = list(blocks)
        self.n = sum(b.dim for b in self.blocks)
        self.kind = kind
        self.homogeneous = True
        times = [b.c0 / b.rate for b in self.blocks if b.rate > 0]
        extinction = min(times) if times else np.inf
        self.extinction_time = extinction
        self.t_max = 0.95 * extinction if np.isfinite(extinction) else 10.0

    def check_time(self, t: float) -> None:
        if t <= 0.0:
            raise ExtinctionError(f"{self.kind}: t={t:g} must be positive", self.extinction_time)
        for b in self.blocks:
            if b.scale(t) <= 0.0:
                raise ExtinctionError(
                    f"{self.kind}: block scale vanished at t={b.c0 / b.rate:g}",
                    b.c0 / b.rate,
                )
        if t > self.t_max:
            raise ExtinctionError(f"{self.kind}: t={t:g} beyond t_max={self.t_max:g}", self.t_max)

    # -- chart ----------------------------------------------------------

    def _block_ranges(self):
        start = 0
        for b in self.blocks:
            yield b, range(start, start + b.dim)
            start += b.dim

    def metric_components(self, coords, t):
        out = [[0.0] * self.n for _ in range(self.n)]
        for b, rng in self._block_ranges():
            s = 1.0
            for k in rng:
                s = s + coords[k] * coords[k]
            factor = b.scale(t) * 4.0 / (s * s)
            for k in rng:
                out[k][k] = factor
        return out

    def _unit_block_metric(self, x: np.ndarray) -> np.ndarray:
        """Unit-scale stereographic metric of each block, block diagonal."""
        g = np.zeros((self.n, self.n))
        for b, rng in self._block_ranges():
            s = 1.0 + sum(x[k] * x[k] for k in rng)
            for k in rng:
                g[k, k] = 4.0 / (s * s)
        return g

    # -- analytic flow data ----------------------------------------------

    def dg_dt(self, x, t) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        ghat = self._unit_block_metric(x)
        out = np.zeros_like(ghat)
        for b, rng in self._block_ranges():
            idx = np.array(list(rng))
            out[np.ix_(idx, idx)] = -b.rate * ghat[np.ix_(idx, idx)]
        return out

    def _block_pattern(self, x) -> list:
        """Per block: (index range, unit metric restricted to block)."""
        x = np.asarray(x, dtype=float)
        ghat = self._unit_block_metric(x)
        out = []
        for b, rng in self._block_ranges():
            idx = np.array(list(rng))
            out.append((b, idx, ghat[np.ix_(idx, idx)]))
        return out

    def curvature_time_derivatives(self, x, t) -> TimeDerivs:
        self.check_time(t)
        dRm = np.zeros((self.n,) * 4)
        dRic = np.zeros((self.n, self.n))
        dR = 0.0
        for b, idx, ghat in self._block_pattern(x):
            c = b.scale(t)
            # within the block: Rm_abcd = (1/c) (g_ac g_bd - g_ad g_bc), g = c ghat,
            # so Rm = c * (unit pattern) and d Rm / dt = -rate * (unit pattern)
            pat = np.einsum("ac,bd->abcd", ghat, ghat) - np.einsum("ad,bc->abcd", ghat, ghat)
            dRm[np.ix_(idx, idx, idx, idx)] = -b.rate * pat
            # Ric = (dim-1) ghat is time independent
            dR += b.dim * (b.dim - 1) * b.rate / c**2
        return TimeDerivs(dRm=dRm, dRic=dRic, dR=float(dR))

    def scalar_time_taylor(self, x, t, order):
        self.check_time(t)
        coeffs = []
        for k in range(order + 1):
            val = 0.0
            for b in self.blocks:
                # d^k/dt^k of 1/c(t) is k! rate^k / c^{k+1}; divide by k! for Taylor
                val += b.dim * (b.dim - 1) * b.rate**k / b.scale(t) ** (k + 1)
            coeffs.append(val)
        return coeffs

    def dp_dt(self, x, t) -> np.ndarray:
        return np.zeros((self.n,) * 3)

    def dm_dt(self, x, t) -> np.ndarray:
        self.check_time(t)
        out = np.zeros((self.n, self.n))
        for b, idx, ghat in self._block_pattern(x):
            c = b.scale(t)
            k = b.dim - 1
            # M block = (k^2 / c + k / (2t)) ghat; differentiate in t
            coeff = k**2 * b.rate / c**2 - k / (2.0 * t**2)
            out[np.ix_(idx, idx)] = coeff * ghat
        return out

    def m_closed_form(self, x, t) -> np.ndarray:
        self.check_time(t)
        out = np.zeros((self.n, self.n))
        for b, idx, ghat in self._block_pattern(x):
            c = b.scale(t)
            k = b.dim - 1
            out[np.ix_(idx, idx)] = (k**2 / c + k / (2.0 * t)) * ghat
        return out


class StaticFlat(FlowFamily):
    """Flat chart, constant in time: the trivial flow."""

    def __init__(self, n: int):
        self.n = n
        self.kind = f"static_flat({n})"
        self.t_max = 10.0
        self.homogeneous = True

    def metric_components(self, coords, t):
        return np.eye(self.n)

    def dg_dt(self, x, t):
        return np.zeros((self.n, self.n))

    def curvature_time_derivatives(self, x, t):
        z = np.zeros
        return TimeDerivs(z((self.n,) * 4), z((self.n, self.n)), 0.0)

    def scalar_time_taylor(self, x, t, order):
        return [0.0] * (order + 1)

    def dp_dt(self, x, t):
        return np.zeros((self.n,) * 3)

    def dm_dt(self, x, t):
        return np.zeros((self.n, self.n))

    def m_closed_form(self, x, t):
        return np.zeros((self.n, self.n))


def static_flat(n: int) -> StaticFlat:
    return StaticFlat(n)


def constant_curvature(n: int, c0: float) -> BlockSphereFlow:
    """Shrinking round n-sphere: g(t) = (c0 - 2(n-1) t) g_unit."""
    return BlockSphereFlow(
        [BlockSpec(dim=n, c0=c0, rate=2.0 * (n - 1))], kind=f"constant_curvature({n},{c0:g})"
    )


def product_spheres(c1_0: float, c2_0: float) -> BlockSphereFlow:
    """S^2 x S^2 with independently shrinking factors (rate 2 each)."""
    return BlockSphereFlow(
        [BlockSpec(2, c1_0, 2.0), BlockSpec(2, c2_0, 2.0)],
        kind=f"product_spheres({c1_0:g},{c2_0:g})",
    )


def backward_constant_curvature(n: int, c0: float) -> BlockSphereFlow:
    """Backward flow d g / d tau = +2 Ric: an expanding round sphere."""
    fam = BlockSphereFlow(
        [BlockSpec(dim=n, c0=c0, rate=-2.0 * (n - 1))],
        kind=f"backward_constant_curvature({n},{c0:g})",
    )
    fam.t_max = 10.0
    return fam


@dataclass
class FlowSnapshot:
    """One time slice of a flow with its analytic time derivative."""

    family: FlowFamily
    time: float
    chart: MetricChart

    def dg_dt(self, x) -> np.ndarray:
        return self.family.dg_dt(x, self.time)

    def flow_residual(self, x) -> float:
        """max-abs of dg/dt + 2 Ric at a point (0 for an exact flow)."""
        data = curvature_data(self.chart, x)
        return float(np.max(np.abs(self.dg_dt(x) + 2.0 * data.ric)))

    def record(self) -> dict:
        """JSON-ready persistence record: family, time and parameters."""
        rec = {"family": self.family.kind, "t": self.time, "n": self.family.n}
        blocks = getattr(self.family, "blocks", None)
        if blocks is not None:
            rec["blocks"] = [
                {"dim": b.dim, "c0": b.c0, "rate": b.rate} for b in blocks
            ]
        return rec


def flow_closed_form(family: FlowFamily, t: float) -> FlowSnapshot:
    family.check_time(t)
    return FlowSnapshot(family=family, time=float(t), chart=family.chart_at(t))


# ---------------------------------------------------------------------------
# point data along a flow
# ---------------------------------------------------------------------------


@dataclass
class FlowPointData:
    """Everything the downstream consumers need at one (x, t)."""

    family: FlowFamily
    x: np.ndarray
    t: float
    geom: CurvatureData
    p: np.ndarray
    m: np.ndarray
    time: TimeDerivs

    @property
    def g(self):
        return self.geom.g

    @property
    def ginv(self):
        return self.geom.ginv

    @property
    def rm(self):
        return self.geom.rm

    @property
    def ric(self):
        return self.geom.ric

    @property
    def scalar(self):
        return self.geom.scalar


def flow_point_data(family: FlowFamily, x: Sequence[float], t: float) -> FlowPointData:
    family.check_time(t)
    geom = curvature_data(family.chart_at(t), x, nderiv=2)
    return FlowPointData(
        family=family,
        x=np.asarray(x, dtype=float),
        t=float(t),
        geom=geom,
        p=geom.p_tensor(),
        m=geom.m_tensor(t),
        time=family.curvature_time_derivatives(x, t),
    )


def require_homogeneous(geom: CurvatureData, what: str) -> None:
    grad = float(np.max(np.abs(geom.cov_rm)))
    if grad > _HOMOGENEITY_TOL:
        raise UnsupportedConfigurationError(
            f"{what} needs a homogeneous base (|cov Rm| = {grad:.2e})"
        )


# ---------------------------------------------------------------------------
# evolution residuals
# ---------------------------------------------------------------------------


def riemann_evolution_rhs(
    rm: np.ndarray, ginv: np.ndarray, ric: np.ndarray, lap_rm: np.ndarray
) -> np.ndarray:
    """Right side of the Riemann evolution equation: Lap Rm plus the
    quadratic curvature terms and the Ricci corrections."""
    up2 = np.einsum("ma,nb,kalb->kmln", ginv, ginv, rm)
    rmix = ginv @ ric  # [m, j] = R^m_j
    quads = (
        2.0 * np.einsum("imjn,kmln->ijkl", rm, up2)
        - 2.0 * np.einsum("imjn,lmkn->ijkl", rm, up2)
        + 2.0 * np.einsum("imkn,jmln->ijkl", rm, up2)
        - 2.0 * np.einsum("imln,jmkn->ijkl", rm, up2)
    )
    ric_terms = (
        -np.einsum("ml,ijkm->ijkl", rmix, rm)
        + np.einsum("mk,ijlm->ijkl", rmix, rm)
        - np.einsum("mj,klim->ijkl", rmix, rm)
        + np.einsum("mi,kljm->ijkl", rmix, rm)
    )
    return lap_rm + quads + ric_terms


def p_evolution_rhs(
    rm: np.ndarray,
    ginv: np.ndarray,
    ric: np.ndarray,
    p: np.ndarray,
    cov_rm: np.ndarray,
    lap_p: np.ndarray,
) -> np.ndarray:
    """Right side of the evolution equation for the antisymmetrized
    Ricci-derivative tensor (coordinate-time form, minus-sign corrections)."""
    p_upup = np.einsum("abc,am,bn->mnc", p, ginv, ginv)  # P^{mn}_c
    p_up13 = np.einsum("abc,am,cn->mbn", p, ginv, ginv)  # P^{m}_b{}^{n}
    p_up23 = np.einsum("abc,bm,cn->amn", p, ginv, ginv)  # P_a^{mn}
    rmix = ginv @ ric
    grad_rm_up = np.einsum("mijkl,ln->mijkn", cov_rm, ginv)  # cov_m R_ijk^n
    return lap_p + (
        2.0 * np.einsum("imjn,mnk->ijk", rm, p_upup)
        + 2.0 * np.einsum("imkn,mjn->ijk", rm, p_up13)
        + 2.0 * np.einsum("jmkn,imn->ijk", rm, p_up23)
        - 2.0 * np.einsum("mn,mijkn->ijk", rmix, grad_rm_up)
        - np.einsum("mi,mjk->ijk", rmix, p)
        - np.einsum("mj,imk->ijk", rmix, p)
        - np.einsum("mk,ijm->ijk", rmix, p)
    )


def m_evolution_rhs(
    rm: np.ndarray,
    ginv: np.ndarray,
    ric: np.ndarray,
    p: np.ndarray,
    m: np.ndarray,
    cov_p: np.ndarray,
    lap_m: np.ndarray,
    t: float,
) -> np.ndarray:
    """Right side of the evolution equation for the second-order Harnack
    block (coordinate-time form, minus-sign corrections).  ``cov_p`` is
    indexed [m, n, i, j] = cov_m P_nij."""
    rup = np.einsum("am,bn,ab->mn", ginv, ginv, ric)  # R^{mn}
    rmix = ginv @ ric  # R^m_j
    m_up = np.einsum("ab,am,bn->mn", m, ginv, ginv)
    p_up_jmn = np.einsum("jab,am,bn->jmn", p, ginv, ginv)  # P_j^{mn}
    term_p2 = 2.0 * np.einsum("imn,jmn->ij", p, p_up_jmn) - 4.0 * np.einsum(
        "imn,jnm->ij", p, p_up_jmn
    )
    ric_low_mixed = ric @ ginv  # [m, l] = R_m^l
    return lap_m + (
        2.0 * np.einsum("imjn,mn->ij", rm, m_up)
        + 2.0 * np.einsum("mn,mnij->ij", rup, cov_p + cov_p.transpose(0, 1, 3, 2))
        + term_p2
        + 2.0 * np.einsum("mn,ml,injl->ij", rup, ric_low_mixed, rm)
        - ric / (2.0 * t * t)
        - rmix.T @ m
        - m @ rmix
    )


def evolution_residuals(
    family: FlowFamily,
    t: float,
    x: Sequence[float],
    which: Sequence[str] = ("riemann", "ricci", "scalar", "p_evolution", "m_evolution"),
) -> dict[str, float]:
    """Max-abs residuals of the curvature evolution equations at (x, t).

    Time derivatives come from the family's closed-form scale factors; the
    spatial side is jet-computed.  The P/M equations additionally require a
    homogeneous family, which kills their Laplacian terms (the only pieces
    that would need fifth metric derivatives).
    """
    if t <= 0:
        raise PreconditionError("evolution residuals need t > 0")
    data = flow_point_data(family, x, t)
    geom = data.geom
    out: dict[str, float] = {}
    if "riemann" in which:
        rhs = riemann_evolution_rhs(geom.rm, geom.ginv, geom.ric, geom.lap_rm())
        out["riemann"] = float(np.max(np.abs(data.time.dRm - rhs)))
    if "ricci" in which:
        rhs = (
            geom.lap_ric()
            - 2.0 * geom.ric @ geom.ginv @ geom.ric
            + 2.0 * np.einsum("ikjl,kl->ij", geom.rm, geom.ric_up)
        )
        out["ricci"] = float(np.max(np.abs(data.time.dRic - rhs)))
    if "scalar" in which:
        ric_sq = float(np.einsum("ij,ij->", geom.ric_up, geom.ric))
        out["scalar"] = abs(data.time.dR - (geom.lap_scalar() + 2.0 * ric_sq))
    if "p_evolution" in which or "m_evolution" in which:
        require_homogeneous(geom, "P/M evolution residuals")
    if "p_evolution" in which:
        lhs = family.dp_dt(x, t)  # homogeneous: Lap P = 0
        rhs = p_evolution_rhs(
            geom.rm, geom.ginv, geom.ric, data.p, geom.cov_rm, np.zeros_like(data.p)
        )
        out["p_evolution"] = float(np.max(np.abs(lhs - rhs)))
    if "m_evolution" in which:
        lhs = family.dm_dt(x, t)  # homogeneous: Lap M = 0
        cov2_ric = geom.cov2_ric()
        cov_p = cov2_ric - cov2_ric.transpose(0, 2, 1, 3)
        rhs = m_evolution_rhs(
            geom.rm, geom.ginv, geom.ric, data.p, data.m, cov_p, np.zeros_like(data.m), t
        )
        out["m_evolution"] = float(np.max(np.abs(lhs - rhs)))
    return out


def operator_positivity_series(
    family: FlowFamily, t_grid: Sequence[float], x: Sequence[float]
) -> list[tuple[float, float]]:
    """(t, min curvature-operator eigenvalue) along the flow at a fixed point."""
    from .charts import curvature_operator_eigs

    out = []
    for t in t_grid:
        geom = curvature_data(family.chart_at(t), x)
        eigs, _ = curvature_operator_eigs(geom.rm, geom.g)
        out.append((float(t), float(eigs[0])))
    return out
