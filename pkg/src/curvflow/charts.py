"""Curvature of coordinate-chart metrics.

Sign conventions used throughout:

    Gamma^a_bc = 1/2 g^{ad} (d_b g_cd + d_c g_bd - d_d g_bc)
    R_abcd     = g_df (d_b Gamma^f_ac - d_a Gamma^f_bc
                       + Gamma^e_ac Gamma^f_be - Gamma^e_bc Gamma^f_ae)
    Ric_ab     = g^{cd} R_acbd ,   R = g^{ab} Ric_ab

so that R_ijij > 0 on the round sphere and Ric equals the metric on the
unit 2-sphere.

Metric derivatives come from jet evaluation of the chart components (exact
to the stored order); everything downstream -- Christoffel symbols, their
coordinate derivatives, the Riemann tensor and its first two covariant
derivatives -- is assembled from those tables with numpy contractions.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DegenerateMetricError, UnsupportedRankError
from .jets import Jet, JetSpace

DENSE_DIM_CAP = 32  # charts above this only support sampled components


@dataclass
class MetricChart:
    """A coordinate-chart metric: dimension plus a smooth component map.

    ``components(coords)`` must accept a list with one entry per coordinate
    (floats, or jets for the active directions) and return a dim x dim
    nested structure of scalars written in jet-compatible arithmetic.
    Entries may be plain numbers where a component is constant.
    """

    dim: int
    components: Callable[[Sequence], Sequence]
    name: str = ""
    domain: Optional[Callable[[Sequence[float]], bool]] = None

    def matrix(self, point: Sequence[float]) -> np.ndarray:
        vals = self.components([float(p) for p in point])
        g = np.array([[float(vals[i][j]) for j in range(self.dim)] for i in range(self.dim)])
        if np.max(np.abs(g - g.T)) > 1e-12 * max(1.0, np.max(np.abs(g))):
            raise DegenerateMetricError(f"metric components not symmetric at {point}")
        return 0.5 * (g + g.T)

    def inverse(self, point: Sequence[float]) -> np.ndarray:
        return _invert(self.matrix(point), self.name, point)


def _invert(g: np.ndarray, name: str, point) -> np.ndarray:
    try:
        ginv = np.linalg.inv(g)
    except np.linalg.LinAlgError as exc:
        raise DegenerateMetricError(f"singular metric {name!r} at {point}") from exc
    if not np.all(np.isfinite(ginv)) or np.linalg.cond(g) > 1e13:
        raise DegenerateMetricError(f"ill-conditioned metric {name!r} at {point}")
    return ginv


# ---------------------------------------------------------------------------
# metric derivative tables
# ---------------------------------------------------------------------------


@dataclass
class MetricTables:
    g: np.ndarray
    d: list  # d[k] has shape (dim,)*k + (dim, dim); d[0] is g itself


def _jet_coords(point, active, order):
    space = JetSpace(len(active), order)
    coords: list = list(point)
    for pos, slot in enumerate(active):
        coords[slot] = Jet.variable(space, pos, point[slot])
    return coords


def metric_tables(chart: MetricChart, point: Sequence[float], order: int) -> MetricTables:
    """Partial derivatives of the metric components up to ``order``.

    Charts of dimension <= 4 use a single all-coordinates jet evaluation;
    larger charts loop over coordinate subsets so no evaluation ever has
    more than four active directions.
    """
    dim = chart.dim
    point = [float(p) for p in point]
    if chart.domain is not None and not chart.domain(point):
        raise DegenerateMetricError(f"point {point} outside domain of {chart.name!r}")
    g = chart.matrix(point)
    tables = [g] + [np.zeros((dim,) * k + (dim, dim)) for k in range(1, order + 1)]

    if dim <= 4:
        subsets = [tuple(range(dim))]
    else:
        subsets = list(combinations(range(dim), min(order, 4)))
    for sub in subsets:
        jets_out = chart.components(_jet_coords(point, sub, order))
        for i in range(dim):
            for j in range(i, dim):
                entry = jets_out[i][j]
                if not isinstance(entry, Jet):
                    continue
                for e, val in entry.partial_table().items():
                    deg = sum(e)
                    if deg == 0 or val == 0.0:
                        continue
                    dirs = []
                    for pos, mult in enumerate(e):
                        dirs.extend([sub[pos]] * mult)
                    for perm in set(permutations(dirs)):
                        tables[deg][perm + (i, j)] = val
                        tables[deg][perm + (j, i)] = val
    return MetricTables(g=g, d=tables)


# ---------------------------------------------------------------------------
# curvature assembly
# ---------------------------------------------------------------------------


def _sym_d(table: np.ndarray) -> np.ndarray:
    """[..., b, c, d] = d_b g_cd + d_c g_bd - d_d g_bc built from a table
    whose trailing three axes are (derivative direction, i, j)."""
    return table + table.swapaxes(-3, -2) - np.moveaxis(table, -3, -1)


@dataclass
class CurvatureData:
    """Metric, connection and curvature tables at a single point."""

    chart: MetricChart
    point: np.ndarray
    g: np.ndarray
    ginv: np.ndarray
    gamma: np.ndarray                    # [a, b, c] = Gamma^a_bc
    rm: np.ndarray                       # [a, b, c, d], all indices down
    ric: np.ndarray
    scalar: float
    tables: MetricTables
    dgamma: Optional[np.ndarray] = None  # [e, a, b, c] = d_e Gamma^a_bc
    drm: Optional[np.ndarray] = None     # [e, a, b, c, d] coordinate partials
    cov_rm: Optional[np.ndarray] = None  # [p, a, b, c, d] covariant derivative
    d2gamma: Optional[np.ndarray] = None
    d2rm: Optional[np.ndarray] = None
    cov2_rm: Optional[np.ndarray] = None  # [q, p, a, b, c, d]

    @property
    def ric_up(self) -> np.ndarray:
        return self.ginv @ self.ric @ self.ginv

    @property
    def ric_mixed(self) -> np.ndarray:
        """[m, j] = R^m_j."""
        return self.ginv @ self.ric

    def cov_ric(self) -> np.ndarray:
        """[p, i, j] = cov_p Ric_ij via the metric-parallel contraction."""
        return np.einsum("kl,pakbl->pab", self.ginv, self.cov_rm)

    def cov2_ric(self) -> np.ndarray:
        return np.einsum("kl,qpakbl->qpab", self.ginv, self.cov2_rm)

    def lap_ric(self) -> np.ndarray:
        return np.einsum("qp,qpab->ab", self.ginv, self.cov2_ric())

    def grad_scalar(self) -> np.ndarray:
        """[i] = d_i R."""
        return np.einsum("kl,pkl->p", self.ginv, self.cov_ric())

    def cov2_scalar(self) -> np.ndarray:
        """Hessian of the scalar curvature."""
        d2 = np.einsum("kl,qpkl->qp", self.ginv, self.cov2_ric())
        return 0.5 * (d2 + d2.T)

    def lap_scalar(self) -> float:
        return float(np.einsum("qp,qp->", self.ginv, self.cov2_scalar()))

    def lap_rm(self) -> np.ndarray:
        return np.einsum("qp,qpabcd->abcd", self.ginv, self.cov2_rm)

    def p_tensor(self) -> np.ndarray:
        """[i, j, k] = cov_i Ric_jk - cov_j Ric_ik."""
        cr = self.cov_ric()
        return cr - cr.transpose(1, 0, 2)

    def m_tensor(self, t: float) -> np.ndarray:
        """Lap Ric_ij + 2 R_ikjl Ric^kl - Ric_i^k Ric_kj - 1/2 Hess_ij R
        + 1/(2t) Ric_ij."""
        if t <= 0:
            raise DegenerateMetricError("m_tensor requires t > 0")
        quad = np.einsum("ikjl,kl->ij", self.rm, self.ric_up)
        ric_sq = self.ric @ self.ginv @ self.ric
        return (
            self.lap_ric()
            + 2.0 * quad
            - ric_sq
            - 0.5 * self.cov2_scalar()
            + self.ric / (2.0 * t)
        )


def curvature_data(chart: MetricChart, point: Sequence[float], nderiv: int = 0) -> CurvatureData:
    """Christoffel symbols, Riemann tensor and optionally its first two
    covariant derivatives at one point.

    nderiv 0 needs second metric derivatives, 1 needs third, 2 needs fourth.
    """
    dim = chart.dim
    if dim > DENSE_DIM_CAP:
        raise UnsupportedRankError(f"dense curvature capped at dim {DENSE_DIM_CAP}")
    if nderiv not in (0, 1, 2):
        raise ValueError("nderiv must be 0, 1 or 2")
    if nderiv == 2 and dim > 6:
        raise UnsupportedRankError("second covariant derivatives limited to dim <= 6")
    tab = metric_tables(chart, point, order=2 + nderiv)
    g = tab.g
    d1, d2 = tab.d[1], tab.d[2]
    ginv = _invert(g, chart.name, point)

    sym1 = _sym_d(d1)
    gamma = 0.5 * np.einsum("ad,bcd->abc", ginv, sym1)

    dginv = -np.einsum("ap,epq,qb->eab", ginv, d1, ginv)
    sym2 = _sym_d(d2)
    dgamma = 0.5 * (
        np.einsum("ead,bcd->eabc", dginv, sym1) + np.einsum("ad,ebcd->eabc", ginv, sym2)
    )

    gam_gam = np.einsum("eac,fbe->abcf", gamma, gamma)
    k_tab = (
        np.einsum("bfac->abcf", dgamma)
        - np.einsum("afbc->abcf", dgamma)
        + gam_gam
        - gam_gam.swapaxes(0, 1)
    )
    rm = np.einsum("df,abcf->abcd", g, k_tab)
    ric = np.einsum("cd,acbd->ab", ginv, rm)
    scalar = float(np.einsum("ab,ab->", ginv, ric))

    data = CurvatureData(
        chart=chart,
        point=np.asarray(point, dtype=float),
        g=g,
        ginv=ginv,
        gamma=gamma,
        rm=rm,
        ric=ric,
        scalar=scalar,
        dgamma=dgamma,
        tables=tab,
    )
    if nderiv == 0:
        return data

    d3 = tab.d[3]
    d2ginv = -(
        np.einsum("fap,epq,qb->efab", dginv, d1, ginv)
        + np.einsum("ap,fepq,qb->efab", ginv, d2, ginv)
        + np.einsum("ap,epq,fqb->efab", ginv, d1, dginv)
    )
    sym3 = _sym_d(d3)
    d2gamma = 0.5 * (
        np.einsum("efad,bcd->efabc", d2ginv, sym1)
        + np.einsum("ead,fbcd->efabc", dginv, sym2)
        + np.einsum("fad,ebcd->efabc", dginv, sym2)
        + np.einsum("ad,efbcd->efabc", ginv, sym3)
    )
    dk = (
        np.einsum("ebfac->eabcf", d2gamma)
        - np.einsum("eafbc->eabcf", d2gamma)
        + np.einsum("eqac,fbq->eabcf", dgamma, gamma)
        + np.einsum("qac,efbq->eabcf", gamma, dgamma)
        - np.einsum("eqbc,faq->eabcf", dgamma, gamma)
        - np.einsum("qbc,efaq->eabcf", gamma, dgamma)
    )
    drm = np.einsum("edf,abcf->eabcd", d1, k_tab) + np.einsum("df,eabcf->eabcd", g, dk)
    data.d2gamma = d2gamma
    data.drm = drm
    data.cov_rm = _cov_deriv(rm, drm, gamma)
    if nderiv == 1:
        return data

    d4 = tab.d[4]
    d3ginv = -(
        np.einsum("fhap,epq,qb->efhab", d2ginv, d1, ginv)
        + np.einsum("fap,hepq,qb->efhab", dginv, d2, ginv)
        + np.einsum("fap,epq,hqb->efhab", dginv, d1, dginv)
        + np.einsum("hap,fepq,qb->efhab", dginv, d2, ginv)
        + np.einsum("ap,hfepq,qb->efhab", ginv, d3, ginv)
        + np.einsum("ap,fepq,hqb->efhab", ginv, d2, dginv)
        + np.einsum("hap,epq,fqb->efhab", dginv, d1, dginv)
        + np.einsum("ap,hepq,fqb->efhab", ginv, d2, dginv)
        + np.einsum("ap,epq,fhqb->efhab", ginv, d1, d2ginv)
    )
    sym4 = _sym_d(d4)
    d3gamma = 0.5 * (
        np.einsum("efhad,bcd->efhabc", d3ginv, sym1)
        + np.einsum("efad,hbcd->efhabc", d2ginv, sym2)
        + np.einsum("ehad,fbcd->efhabc", d2ginv, sym2)
        + np.einsum("fhad,ebcd->efhabc", d2ginv, sym2)
        + np.einsum("ead,fhbcd->efhabc", dginv, sym3)
        + np.einsum("fad,ehbcd->efhabc", dginv, sym3)
        + np.einsum("had,efbcd->efhabc", dginv, sym3)
        + np.einsum("ad,efhbcd->efhabc", ginv, sym4)
    )
    d2k = (
        np.einsum("efbmac->efabcm", d3gamma)
        - np.einsum("efambc->efabcm", d3gamma)
        + np.einsum("efqac,mbq->efabcm", d2gamma, gamma)
        + np.einsum("eqac,fmbq->efabcm", dgamma, dgamma)
        + np.einsum("fqac,embq->efabcm", dgamma, dgamma)
        + np.einsum("qac,efmbq->efabcm", gamma, d2gamma)
        - np.einsum("efqbc,maq->efabcm", d2gamma, gamma)
        - np.einsum("eqbc,fmaq->efabcm", dgamma, dgamma)
        - np.einsum("fqbc,emaq->efabcm", dgamma, dgamma)
        - np.einsum("qbc,efmaq->efabcm", gamma, d2gamma)
    )
    d2rm = (
        np.einsum("efdm,abcm->efabcd", d2, k_tab)
        + np.einsum("edm,fabcm->efabcd", d1, dk)
        + np.einsum("fdm,eabcm->efabcd", d1, dk)
        + np.einsum("dm,efabcm->efabcd", g, d2k)
    )
    data.d2rm = d2rm
    data.cov2_rm = _cov_deriv2(rm, drm, d2rm, gamma, dgamma)
    return data


# ---------------------------------------------------------------------------
# covariant derivatives of covariant tensors
# ---------------------------------------------------------------------------

_LETTERS = "abcdijkl"


def _cov_deriv(T: np.ndarray, dT: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """cov_p T_S = d_p T_S - sum_slots Gamma^q_{p s} T_{S|s->q}, covariant T."""
    out = dT.copy()
    src = _LETTERS[: T.ndim]
    for slot in range(T.ndim):
        t_sub = src[:slot] + "q" + src[slot + 1 :]
        out -= np.einsum(f"qp{src[slot]},{t_sub}->p{src}", gamma, T)
    return out


def _cov_deriv2(
    T: np.ndarray,
    dT: np.ndarray,
    d2T: np.ndarray,
    gamma: np.ndarray,
    dgamma: np.ndarray,
) -> np.ndarray:
    """cov_e cov_p T for covariant T, output indexed [e, p, S]."""
    r = T.ndim
    src = _LETTERS[:r]
    covT = _cov_deriv(T, dT, gamma)
    d_covT = d2T.copy()  # [e, p, S]
    for slot in range(r):
        t_sub = src[:slot] + "q" + src[slot + 1 :]
        d_covT -= np.einsum(f"eqp{src[slot]},{t_sub}->ep{src}", dgamma, T)
        d_covT -= np.einsum(f"qp{src[slot]},e{t_sub}->ep{src}", gamma, dT)
    out = d_covT - np.einsum(f"qep,q{src}->ep{src}", gamma, covT)
    for slot in range(r):
        t_sub = src[:slot] + "q" + src[slot + 1 :]
        out -= np.einsum(f"qe{src[slot]},p{t_sub}->ep{src}", gamma, covT)
    return out


def _cov_commutator(
    T: np.ndarray, dT: np.ndarray, gamma: np.ndarray, dgamma: np.ndarray
) -> np.ndarray:
    """[cov_m, cov_n] T for covariant T, indexed [m, n, S].

    The symmetric second-partial block and the Gamma^q_mn cov_q T block
    cancel in the commutator, so only T and its first partials are needed;
    this keeps rank-3 inputs inside the order-4 jet budget.
    """
    r = T.ndim
    src = _LETTERS[:r]
    covT = _cov_deriv(T, dT, gamma)
    out = np.zeros((gamma.shape[0],) * 2 + T.shape)
    for slot in range(r):
        t_sub = src[:slot] + "q" + src[slot + 1 :]
        out -= np.einsum(f"mqn{src[slot]},{t_sub}->mn{src}", dgamma, T)
        out -= np.einsum(f"qn{src[slot]},m{t_sub}->mn{src}", gamma, dT)
        out -= np.einsum(f"qm{src[slot]},n{t_sub}->mn{src}", gamma, covT)
    return out - out.swapaxes(0, 1)


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------


def christoffel(chart: MetricChart, point: Sequence[float]) -> np.ndarray:
    """Gamma^a_bc table at ``point`` (exactly symmetric in the lower pair)."""
    return curvature_data(chart, point, nderiv=0).gamma


def riemann(chart: MetricChart, point: Sequence[float]) -> np.ndarray:
    return curvature_data(chart, point, nderiv=0).rm


def contract_curvature(rm: np.ndarray, ginv: np.ndarray) -> tuple[np.ndarray, float]:
    ric = np.einsum("cd,acbd->ab", ginv, rm)
    return ric, float(np.einsum("ab,ab->", ginv, ric))


@dataclass
class CurvatureBundle:
    gamma: np.ndarray
    riemann: np.ndarray
    ricci: np.ndarray
    scalar: float
    point: np.ndarray
    metric: np.ndarray
    inverse: np.ndarray


def curvature_bundle(chart: MetricChart, point: Sequence[float]) -> CurvatureBundle:
    d = curvature_data(chart, point, nderiv=0)
    return CurvatureBundle(
        gamma=d.gamma,
        riemann=d.rm,
        ricci=d.ric,
        scalar=d.scalar,
        point=d.point,
        metric=d.g,
        inverse=d.ginv,
    )


def covariant_derivative(
    field: Callable,
    rank: int,
    chart: MetricChart,
    point: Sequence[float],
    order: int = 1,
) -> np.ndarray:
    """First or second covariant derivative of a covariant tensor field.

    ``field(coords)`` returns a nested rank-``rank`` structure (a bare
    scalar for rank 0) in jet-compatible arithmetic.  The order-2 result is
    indexed [e, p, S] = cov_e cov_p T_S; for scalars that is the Hessian.
    """
    if rank > 4:
        raise UnsupportedRankError("tensor rank capped at 4")
    if order not in (1, 2):
        raise ValueError("derivative order must be 1 or 2")
    dim = chart.dim
    data = curvature_data(chart, point, nderiv=min(order - 1, 1))
    shape = (dim,) * rank
    T = np.zeros(shape)
    dT = np.zeros((dim,) + shape)
    d2T = np.zeros((dim, dim) + shape) if order == 2 else None

    if dim <= 4:
        subsets = [tuple(range(dim))]
    else:
        subsets = list(combinations(range(dim), min(order, 4)))
    for sub in subsets:
        vals = field(_jet_coords([float(p) for p in point], sub, order))
        for idx in np.ndindex(*shape):
            entry = vals
            for k in idx:
                entry = entry[k]
            if not isinstance(entry, Jet):
                T[idx] = float(entry)
                continue
            T[idx] = entry.value
            for e, val in entry.partial_table().items():
                deg = sum(e)
                if deg == 0 or val == 0.0:
                    continue
                dirs = []
                for pos, mult in enumerate(e):
                    dirs.extend([sub[pos]] * mult)
                for perm in set(permutations(dirs)):
                    if deg == 1:
                        dT[perm + idx] = val
                    elif deg == 2:
                        d2T[perm + idx] = val
    if order == 1:
        return _cov_deriv(T, dT, data.gamma)
    return _cov_deriv2(T, dT, d2T, data.gamma, data.dgamma)


def orthonormal_frame(g: np.ndarray) -> np.ndarray:
    """Columns form a g-orthonormal frame: E^T g E = I.  Positive-definite only."""
    try:
        chol = np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise DegenerateMetricError("metric not positive definite") from exc
    return np.linalg.inv(chol).T


def frame_components(tensor: np.ndarray, g: np.ndarray) -> np.ndarray:
    """All-lower tensor components in a g-orthonormal frame."""
    E = orthonormal_frame(g)
    out = tensor
    for _ in range(tensor.ndim):
        out = np.tensordot(out, E, axes=([0], [0]))
    return out


def curvature_operator_eigs(
    rm: np.ndarray, g: Optional[np.ndarray] = None
) -> tuple[np.ndarray, str]:
    """Eigenvalues (ascending) of the symmetric form 2*R_abcd on unit 2-forms.

    For positive-definite ``g`` the components are first moved to a
    g-orthonormal frame, making the basis {(e_a ^ e_b)/sqrt 2} orthonormal,
    so "weakly positive" (min eigenvalue >= -tol) is the frame-independent
    curvature-operator statement.  Indefinite or degenerate metrics fall
    back to the raw coordinate 2-form basis with identity weights and the
    result is flagged "coordinate".
    """
    dim = rm.shape[0]
    basis = "coordinate"
    if g is not None:
        try:
            rm = frame_components(rm, g)
            basis = "orthonormal"
        except DegenerateMetricError:
            basis = "coordinate"
    pairs = [(a, b) for a in range(dim) for b in range(a + 1, dim)]
    mat = np.empty((len(pairs), len(pairs)))
    for r, (a, b) in enumerate(pairs):
        for c, (cc, dd) in enumerate(pairs):
            mat[r, c] = 2.0 * rm[a, b, cc, dd]
    mat = 0.5 * (mat + mat.T)
    return np.linalg.eigvalsh(mat), basis


def bianchi_residuals(chart: MetricChart, point: Sequence[float]) -> dict[str, float]:
    """Max-abs residuals of the structural curvature identities at a point.

    first                   R_abcd + R_bcad + R_cabd
    second                  cov_a R_bcde + cov_b R_cade + cov_c R_abde
    contracted              cov^l R_libc - (cov_b Ric_ci - cov_c Ric_bi)
    twice_contracted        cov^a Ric_ab - 1/2 d_b R
    ricci_commutator        [cov_m, cov_n] Ric_ij - R_mni^p Ric_pj - R_mnj^p Ric_ip
    ricci_commutator_rank3  the same commutator acting on cov Ric
    """
    data = curvature_data(chart, point, nderiv=2)
    rm, ginv = data.rm, data.ginv
    out: dict[str, float] = {}
    out["first"] = float(
        np.max(np.abs(rm + rm.transpose(1, 2, 0, 3) + rm.transpose(2, 0, 1, 3)))
    )
    cov = data.cov_rm
    out["second"] = float(
        np.max(np.abs(cov + cov.transpose(1, 2, 0, 3, 4) + cov.transpose(2, 0, 1, 3, 4)))
    )
    cov_ric = data.cov_ric()
    lhs = np.einsum("lp,plibc->ibc", ginv, cov)
    rhs = np.einsum("bci->ibc", cov_ric) - np.einsum("cbi->ibc", cov_ric)
    out["contracted"] = float(np.max(np.abs(lhs - rhs)))
    twice = np.einsum("ap,pab->b", ginv, cov_ric) - 0.5 * data.grad_scalar()
    out["twice_contracted"] = float(np.max(np.abs(twice)))

    cov2_ric = data.cov2_ric()
    lhs2 = cov2_ric - cov2_ric.transpose(1, 0, 2, 3)
    rm_up = np.einsum("mnil,lp->mnip", rm, ginv)
    rhs2 = np.einsum("mnip,pj->mnij", rm_up, data.ric) + np.einsum(
        "mnjp,ip->mnij", rm_up, data.ric
    )
    out["ricci_commutator"] = float(np.max(np.abs(lhs2 - rhs2)))

    T = cov_ric
    dT = _partials_of_cov_ric(data)
    lhs3 = _cov_commutator(T, dT, data.gamma, data.dgamma)
    rhs3 = (
        np.einsum("mnpq,qij->mnpij", rm_up, T)
        + np.einsum("mniq,pqj->mnpij", rm_up, T)
        + np.einsum("mnjq,piq->mnpij", rm_up, T)
    )
    out["ricci_commutator_rank3"] = float(np.max(np.abs(lhs3 - rhs3)))
    return out


def _partials_of_cov_ric(data: CurvatureData) -> np.ndarray:
    """Coordinate partials d_e (cov_p Ric_ij), assembled from stored tables."""
    d1, d2 = data.tables.d[1], data.tables.d[2]
    ginv = data.ginv
    dginv = -np.einsum("ap,epq,qb->eab", ginv, d1, ginv)
    dric = np.einsum("ekl,akbl->eab", dginv, data.rm) + np.einsum(
        "kl,eakbl->eab", ginv, data.drm
    )
    d2ginv = -(
        np.einsum("fap,epq,qb->feab", dginv, d1, ginv)
        + np.einsum("ap,fepq,qb->feab", ginv, d2, ginv)
        + np.einsum("ap,epq,fqb->feab", ginv, d1, dginv)
    )
    d2ric = (
        np.einsum("fekl,akbl->feab", d2ginv, data.rm)
        + np.einsum("ekl,fakbl->feab", dginv, data.drm)
        + np.einsum("fkl,eakbl->feab", dginv, data.drm)
        + np.einsum("kl,feakbl->feab", ginv, data.d2rm)
    )
    ric, gamma, dgamma = data.ric, data.gamma, data.dgamma
    out = d2ric.copy()  # [e, p, i, j]
    out -= np.einsum("eqpi,qj->epij", dgamma, ric) + np.einsum("qpi,eqj->epij", gamma, dric)
    out -= np.einsum("eqpj,iq->epij", dgamma, ric) + np.einsum("qpj,eiq->epij", gamma, dric)
    return out


# ---------------------------------------------------------------------------
# finite-difference oracle
# ---------------------------------------------------------------------------


def fd_metric_tables(chart: MetricChart, point: Sequence[float], step: float) -> MetricTables:
    """First and second metric derivatives by central differences (oracle)."""
    dim = chart.dim
    point = np.asarray(point, dtype=float)

    def m(q):
        return chart.matrix(q)

    g = m(point)
    d1 = np.zeros((dim, dim, dim))
    d2 = np.zeros((dim, dim, dim, dim))
    for a in range(dim):
        ea = np.zeros(dim)
        ea[a] = step
        gp, gm = m(point + ea), m(point - ea)
        d1[a] = (gp - gm) / (2 * step)
        d2[a, a] = (gp - 2 * g + gm) / step**2
    for a in range(dim):
        for b in range(a + 1, dim):
            ea, eb = np.zeros(dim), np.zeros(dim)
            ea[a] = step
            eb[b] = step
            val = (
                m(point + ea + eb) - m(point + ea - eb) - m(point - ea + eb) + m(point - ea - eb)
            ) / (4 * step**2)
            d2[a, b] = val
            d2[b, a] = val
    return MetricTables(g=g, d=[g, d1, d2])


def christoffel_riemann_fd(
    chart: MetricChart, point: Sequence[float], step: float
) -> tuple[np.ndarray, np.ndarray]:
    """Christoffel and Riemann tables assembled from finite-difference
    metric tables: the independent oracle for the jet pipeline."""
    tab = fd_metric_tables(chart, point, step)
    g, d1, d2 = tab.g, tab.d[1], tab.d[2]
    ginv = _invert(g, chart.name, point)
    sym1 = _sym_d(d1)
    gamma = 0.5 * np.einsum("ad,bcd->abc", ginv, sym1)
    dginv = -np.einsum("ap,epq,qb->eab", ginv, d1, ginv)
    sym2 = _sym_d(d2)
    dgamma = 0.5 * (
        np.einsum("ead,bcd->eabc", dginv, sym1) + np.einsum("ad,ebcd->eabc", ginv, sym2)
    )
    gam_gam = np.einsum("eac,fbe->abcf", gamma, gamma)
    k_tab = (
        np.einsum("bfac->abcf", dgamma)
        - np.einsum("afbc->abcf", dgamma)
        + gam_gam
        - gam_gam.swapaxes(0, 1)
    )
    rm = np.einsum("df,abcf->abcd", g, k_tab)
    return gamma, rm
