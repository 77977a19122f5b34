"""The weighted entropy functional and its monotonicity along flows.

For a metric g, a potential f and a scale tau > 0 the functional is

    W(g, f, tau) = int [tau (R + |grad f|^2) + f - n] (4 pi tau)^(-n/2) e^-f dV,

with f constrained so the weighted measure (4 pi tau)^(-n/2) e^-f dV has
unit mass at every tau.  On homogeneous backward flows (d g / d tau =
+2 Ric) the potential is spatially constant and the whole construction
reduces to one ODE, f0' = tr(dg/dtau)/2 - n/(2 tau), whose solution the
normalization fixes in closed form; that closed form is the oracle for the
evolved ODE state.  The flat Gaussian surrogate (f = |x|^2 / 4 tau) is
integrated by quadrature over growing boxes.

The monotonicity verdict reports the measured sign of the finite
differences of W(tau); the direction is recorded, not assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EvaluationDomainError, PreconditionError
from .flows import BlockSphereFlow, FlowFamily, backward_constant_curvature

UNIT_SPHERE_VOLUME = {2: 4.0 * math.pi, 3: 2.0 * math.pi**2}

NORMALIZATION_HARD_LIMIT = 1e-4


@dataclass
class EntropyState:
    """Homogeneous entropy data: a backward flow, a scale and a spatially
    constant potential value."""

    family: FlowFamily
    n: int
    tau: float
    f0: float

    def __post_init__(self):
        if self.tau <= 0:
            raise EvaluationDomainError("entropy states require tau > 0")


def sphere_volume(n: int, scale: float) -> float:
    if n not in UNIT_SPHERE_VOLUME:
        raise PreconditionError(f"no closed-form volume for dimension {n}")
    return UNIT_SPHERE_VOLUME[n] * scale ** (n / 2.0)


def _scale_at(family: BlockSphereFlow, tau: float) -> float:
    if len(family.blocks) != 1:
        raise PreconditionError("homogeneous entropy states need a single sphere block")
    return family.blocks[0].scale(tau)


def normalized_f0(family: BlockSphereFlow, tau: float) -> float:
    """Potential value forced by unit mass of the weighted measure."""
    n = family.n
    vol = sphere_volume(n, _scale_at(family, tau))
    return math.log(vol) - 0.5 * n * math.log(4.0 * math.pi * tau)


def normalized_state(family: BlockSphereFlow, tau: float) -> EntropyState:
    return EntropyState(family=family, n=family.n, tau=tau, f0=normalized_f0(family, tau))


def normalization_integral(state: EntropyState) -> float:
    vol = sphere_volume(state.n, _scale_at(state.family, state.tau))
    return (4.0 * math.pi * state.tau) ** (-state.n / 2.0) * math.exp(-state.f0) * vol


def w_entropy(state: EntropyState) -> float:
    """W on a homogeneous state: tau R + f0 - n (grad f vanishes and the
    measure integrates to one)."""
    drift = abs(normalization_integral(state) - 1.0)
    if drift > NORMALIZATION_HARD_LIMIT:
        raise PreconditionError(f"weighted measure not normalized (drift {drift:.2e})")
    scale = _scale_at(state.family, state.tau)
    n = state.n
    r = n * (n - 1) / scale
    return state.tau * r + state.f0 - n


def evolve_conjugate_f(state: EntropyState, d_tau: float, steps: int = 64) -> EntropyState:
    """Advance the potential by f0' = tr(dg/dtau)/2 - n/(2 tau) (RK4).

    On a homogeneous backward flow tr(dg/dtau)/2 = R, so the equation is a
    scalar ODE; the normalization constraint provides the independent
    closed-form answer the tests compare against.
    """
    if d_tau == 0.0:
        return state
    if state.tau + d_tau <= 0.0:
        raise EvaluationDomainError("tau must stay positive")
    fam, n = state.family, state.n

    def rhs(tau):
        return n * (n - 1) / _scale_at(fam, tau) - 0.5 * n / tau

    h = d_tau / steps
    tau, f0 = state.tau, state.f0
    for _ in range(steps):
        k1 = rhs(tau)
        k2 = rhs(tau + 0.5 * h)
        k3 = rhs(tau + 0.5 * h)
        k4 = rhs(tau + h)
        f0 += h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
        tau += h
    return EntropyState(family=fam, n=n, tau=tau, f0=f0)


@dataclass
class MonotonicityReport:
    taus: list
    values: list
    diffs: list
    verdict: str          # "monotone" | "constant" | "mixed"
    direction: str        # "decreasing_in_tau" | "increasing_in_tau" | "flat"
    normalization_drift: float


def monotonicity_report(
    family: BlockSphereFlow, tau_grid: Sequence[float], tol: float = 1e-8
) -> MonotonicityReport:
    """W(tau) series with the sign pattern of its finite differences.

    The potential is evolved by the conjugate equation from the first grid
    point; the reported drift is the worst normalization error accumulated
    along the evolution.
    """
    taus = [float(t) for t in tau_grid]
    if any(b <= a for a, b in zip(taus, taus[1:])):
        raise PreconditionError("tau grid must be strictly increasing")
    state = normalized_state(family, taus[0])
    values = [w_entropy(state)]
    drift = abs(normalization_integral(state) - 1.0)
    for tau_next in taus[1:]:
        state = evolve_conjugate_f(state, tau_next - state.tau)
        drift = max(drift, abs(normalization_integral(state) - 1.0))
        values.append(w_entropy(state))
    diffs = [b - a for a, b in zip(values, values[1:])]
    pos = any(d > tol for d in diffs)
    neg = any(d < -tol for d in diffs)
    if pos and neg:
        verdict, direction = "mixed", "mixed"
    elif not pos and not neg:
        verdict, direction = "constant", "flat"
    else:
        verdict = "monotone"
        direction = "increasing_in_tau" if pos else "decreasing_in_tau"
    return MonotonicityReport(
        taus=taus,
        values=values,
        diffs=diffs,
        verdict=verdict,
        direction=direction,
        normalization_drift=drift,
    )


def shrinking_sphere_report(
    n: int, c0: float, tau_grid: Sequence[float]
) -> MonotonicityReport:
    """Monotonicity along the backward-parameterized round sphere: tau runs
    opposite to the forward shrinking time."""
    return monotonicity_report(backward_constant_curvature(n, c0), tau_grid)


# ---------------------------------------------------------------------------
# flat Gaussian surrogate
# ---------------------------------------------------------------------------


def gaussian_w(tau: float, box: float, points: int = 129) -> float:
    """W of the flat plane with f = |x|^2/(4 tau), by Simpson quadrature
    over [-box, box]^2; converges to 0 as the box grows."""
    if points % 2 == 0:
        points += 1
    xs = np.linspace(-box, box, points)
    h = xs[1] - xs[0]
    w = np.ones(points)
    w[1:-1:2], w[2:-1:2] = 4.0, 2.0
    w *= h / 3.0
    xg, yg = np.meshgrid(xs, xs, indexing="ij")
    r2 = xg * xg + yg * yg
    f = r2 / (4.0 * tau)
    grad_sq = r2 / (4.0 * tau * tau)
    density = (4.0 * math.pi * tau) ** -1.0 * np.exp(-f)
    integrand = (tau * grad_sq + f - 2.0) * density
    return float(w @ integrand @ w)


def gaussian_mass(tau: float, box: float, points: int = 129) -> float:
    if points % 2 == 0:
        points += 1
    xs = np.linspace(-box, box, points)
    h = xs[1] - xs[0]
    w = np.ones(points)
    w[1:-1:2], w[2:-1:2] = 4.0, 2.0
    w *= h / 3.0
    xg, yg = np.meshgrid(xs, xs, indexing="ij")
    density = (4.0 * math.pi * tau) ** -1.0 * np.exp(-(xg * xg + yg * yg) / (4.0 * tau))
    return float(w @ density @ w)


def gaussian_conjugate_residual(n: int, tau: float, points: Sequence[Sequence[float]]) -> float:
    """Residual of df/dtau = Lap f + R - n/(2 tau) - |grad f|^2 for the
    self-similar flat potential f = |x|^2/(4 tau): exact up to round-off."""
    worst = 0.0
    for x in points:
        r2 = float(sum(v * v for v in x))
        lhs = -r2 / (4.0 * tau * tau)
        lap_f = n / (2.0 * tau)
        grad_sq = r2 / (4.0 * tau * tau)
        rhs = lap_f + 0.0 - 0.5 * n / tau - grad_sq
        worst = max(worst, abs(lhs - rhs))
    return worst


# ---------------------------------------------------------------------------
# pullback components
# ---------------------------------------------------------------------------


@dataclass
class PullbackComponents:
    g_m_00: float
    g_m_fiber_factor: float
    scalar_m: float
    volume_factor: float
    identity_residual: float


def pullback_components(
    f_value: float,
    grad_f_sq: float,
    laplacian_f: float,
    r_value: float,
    tau: float,
    n_fiber: int,
    n: int,
) -> PullbackComponents:
    """Definitional recomputation of the pulled-back product components.

    g_m_00       (1/tau) (N/2 - [tau (2 Lap f - |grad f|^2 + R) + f - n])
    scalar_m     N/(2 tau) + (1/tau) [tau (2 Lap f - |grad f|^2 + R) + f]
    volume       tau^(N/2) e^-f
    The identity residual checks tau scalar_m - N/2 - [ ... + f] = 0, which
    ties the three displays together exactly.
    """
    if tau <= 0:
        raise EvaluationDomainError("pullback components require tau > 0")
    core = tau * (2.0 * laplacian_f - grad_f_sq + r_value) + f_value
    g_m_00 = (0.5 * n_fiber - (core - n)) / tau
    scalar_m = 0.5 * n_fiber / tau + core / tau
    volume_factor = tau ** (0.5 * n_fiber) * math.exp(-f_value)
    identity = tau * scalar_m - 0.5 * n_fiber - core
    return PullbackComponents(
        g_m_00=g_m_00,
        g_m_fiber_factor=1.0 - 2.0 * f_value / n_fiber,
        scalar_m=scalar_m,
        volume_factor=volume_factor,
        identity_residual=abs(identity),
    )
