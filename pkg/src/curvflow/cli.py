"""Command-line front end: suite orchestration, configuration, reports.

Subcommands run one verification suite (or all of them) over the built-in
corpus of explicit flows, write a deterministic ``summary.json`` plus CSV
series to the output directory, and exit 0 only if every check passed.
Configuration comes from ``key=value`` files and/or flags (flags win);
unknown keys are rejected outright so a typo cannot silently skip checks.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field

import numpy as np

from . import entropy as entropy_mod
from . import flows, harnack, library, surface, thermostat
from .charts import (
    bianchi_residuals,
    christoffel,
    christoffel_riemann_fd,
    curvature_data,
    riemann,
)
from .errors import CurvflowError, UsageError
from .report import SuiteResult, emit
from .surface import SurfaceBase, SurfaceFlow

SUITES = ("identities", "flow", "harnack", "thermostat", "entropy", "all")

DEFAULT_TOLERANCES = {
    "flat": 1e-10,
    "identity": 1e-8,
    "autodiff_fd": 1e-6,
    "flow": 1e-10,
    "evolution": 1e-8,
    "refinement_order": 1.8,
    "christoffel_closed": 1e-8,
    "curvature_closed": 1e-7,
    "fiber": 1e-9,
    "decay_band": 0.15,
    "limit_spread": 0.25,
    "positivity": 1e-6,
    "mc_agreement": 1e-6,
    "algebraic": 1e-9,
    "soliton": 1e-10,
    "entropy_drift": 1e-6,
    "sign_relation": 1e-12,
}


@dataclass
class RunConfig:
    suite: str = "all"
    n_list: list = field(default_factory=lambda: [8, 12, 16, 24])
    t_grid: list = field(default_factory=lambda: [0.2, 0.25, 0.5, 0.75, 1.0])
    seed: int = 0
    out: str = "curvflow-out"
    tol: dict = field(default_factory=dict)

    def tolerance(self, name: str) -> float:
        if name in self.tol:
            return self.tol[name]
        return DEFAULT_TOLERANCES[name]

    def echo(self) -> dict:
        return {
            "suite": self.suite,
            "N": list(self.n_list),
            "t_grid": list(self.t_grid),
            "seed": self.seed,
            "tol_overrides": dict(sorted(self.tol.items())),
        }

    def validate(self) -> None:
        if self.suite not in SUITES:
            raise UsageError(f"unknown suite {self.suite!r}")
        if any(t <= 0 for t in self.t_grid):
            raise UsageError("t grid values must lie strictly inside (0, T]")
        if any(n < 2 for n in self.n_list):
            raise UsageError("fiber dimensions must be at least 2")
        for key in self.tol:
            if key not in DEFAULT_TOLERANCES:
                raise UsageError(f"unknown tolerance name {key!r}")


_CONFIG_KEYS = {"suite", "N", "t_grid", "seed", "out"}


def parse_config_file(path: str) -> dict:
    """Plain key=value configuration; unknown keys are errors."""
    out: dict = {"tol": {}}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            try:
                if key == "suite":
                    out["suite"] = value
                elif key == "N":
                    out["n_list"] = [int(v) for v in value.split(",") if v]
                elif key == "t_grid":
                    out["t_grid"] = [float(v) for v in value.split(",") if v]
                elif key == "seed":
                    out["seed"] = int(value)
                elif key == "out":
                    out["out"] = value
                elif key.startswith("tol."):
                    out["tol"][key[4:]] = float(value)
                else:
                    raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            except ValueError as exc:
                raise UsageError(f"{path}:{lineno}: malformed number ({exc})") from exc
    return out


def build_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        file_vals = parse_config_file(args.config)
        for key, val in file_vals.items():
            if key == "tol":
                cfg.tol.update(val)
            else:
                setattr(cfg, key, val)
    if args.suite:
        cfg.suite = args.suite
    if args.N:
        cfg.n_list = [int(v) for v in args.N.split(",") if v]
    if args.t_grid:
        cfg.t_grid = [float(v) for v in args.t_grid.split(",") if v]
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out:
        cfg.out = args.out
    for item in args.tol or []:
        if "=" not in item:
            raise UsageError(f"--tol expects NAME=VALUE, got {item!r}")
        name, value = item.split("=", 1)
        try:
            cfg.tol[name.strip()] = float(value)
        except ValueError as exc:
            raise UsageError(f"--tol {item!r}: malformed number") from exc
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# corpus
# ---------------------------------------------------------------------------


def corpus_flows():
    return [
        flows.static_flat(2),
        flows.constant_curvature(2, 3.0),
        flows.constant_curvature(3, 5.0),
        flows.product_spheres(4.0, 2.0),
    ]


def corpus_charts(seed: int):
    rng = np.random.default_rng(seed)
    charts = [
        library.flat(3),
        library.sphere_stereographic(2),
        library.sphere_stereographic(3),
        library.hyperbolic_upper_half(2),
        library.hyperbolic_upper_half(3),
        library.random_polynomial(2, seed=seed + 1),
        library.random_polynomial(3, seed=seed + 2),
        library.random_polynomial(4, seed=seed + 3),
    ]
    points = []
    for chart in charts:
        pt = rng.uniform(-0.15, 0.15, size=chart.dim)
        if chart.domain is not None and not chart.domain(pt):
            pt = np.abs(pt) + 0.6
        points.append(pt)
    return list(zip(charts, points))


def _flow_samples(rng, fam, count, t_lo=0.1, t_hi=0.9):
    out = []
    for _ in range(count):
        t = float(rng.uniform(t_lo, t_hi)) * fam.t_max
        x = rng.uniform(-0.25, 0.25, size=fam.n)
        out.append((x, t))
    return out


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------


def suite_identities(cfg: RunConfig, n_random: int = 20) -> SuiteResult:
    res = SuiteResult(suite="identities")
    rng = np.random.default_rng(cfg.seed)
    tol = cfg.tolerance("identity")
    for chart, pt in corpus_charts(cfg.seed):
        values = bianchi_residuals(chart, pt)
        for name, val in values.items():
            ref = {
                "first": "first structural curvature identity",
                "second": "second (differential) curvature identity",
                "contracted": "contracted differential curvature identity",
                "twice_contracted": "twice-contracted differential curvature identity",
                "ricci_commutator": "second-derivative commutator on the Ricci tensor",
                "ricci_commutator_rank3": "second-derivative commutator on the Ricci derivative",
            }[name]
            res.check(f"{name}[{chart.name}]", ref, val, tol)
    # jet pipeline against central finite differences with Richardson order
    fd_tol = cfg.tolerance("autodiff_fd")
    for k in range(n_random):
        dim = int(rng.integers(2, 5))
        chart = library.random_polynomial(dim, seed=cfg.seed + 100 + k)
        pt = rng.uniform(-0.15, 0.15, size=dim)
        gamma, rm = christoffel(chart, pt), riemann(chart, pt)

        def disc(step):
            gamma_fd, rm_fd = christoffel_riemann_fd(chart, pt, step)
            return max(
                float(np.max(np.abs(gamma - gamma_fd))),
                float(np.max(np.abs(rm - rm_fd))),
            )

        # order measured where the h^2 term dominates round-off; the final
        # agreement measured at the fine step
        coarse, mid, fine = disc(8e-3), disc(4e-3), disc(1e-4)
        if coarse < 1e-9:
            order = 2.0
        else:
            order = float(np.log(coarse / mid) / np.log(2.0))
        res.check(
            f"autodiff_vs_fd[{k}]",
            "connection and curvature against central differences at step 1e-4",
            fine,
            fd_tol,
            detail=f"richardson_order={order:.2f}",
        )
        res.check(
            f"autodiff_vs_fd_order[{k}]",
            "Richardson convergence order of the difference oracle",
            -order,
            -cfg.tolerance("refinement_order"),
            detail=f"order={order:.2f}",
        )
    return res


def suite_flow(cfg: RunConfig) -> SuiteResult:
    res = SuiteResult(suite="flow")
    rng = np.random.default_rng(cfg.seed)
    tol_flow = cfg.tolerance("flow")
    tol_evo = cfg.tolerance("evolution")
    for fam in corpus_flows():
        worst = 0.0
        for x, t in _flow_samples(rng, fam, 5):
            worst = max(worst, flows.flow_closed_form(fam, t).flow_residual(x))
        res.check(
            f"flow_equation[{fam.kind}]",
            "defining flow equation dg/dt = -2 Ric",
            worst,
            tol_flow,
        )
        x, t = _flow_samples(rng, fam, 1)[0]
        for name, val in flows.evolution_residuals(fam, t, x).items():
            ref = {
                "riemann": "full curvature evolution equation",
                "ricci": "Ricci evolution equation",
                "scalar": "scalar-curvature evolution equation",
                "p_evolution": "coupled evolution of the first-order Harnack block",
                "m_evolution": "coupled evolution of the second-order Harnack block",
            }[name]
            res.check(f"evolution_{name}[{fam.kind}]", ref, val, tol_evo)
    # positivity preserved along every corpus flow
    for fam in corpus_flows():
        x = rng.uniform(-0.2, 0.2, size=fam.n)
        grid = np.linspace(0.05, 0.9, 6) * fam.t_max
        series = flows.operator_positivity_series(fam, grid, x)
        res.check(
            f"positivity_preserved[{fam.kind}]",
            "preservation of the weakly positive curvature operator",
            -min(v for _, v in series),
            1e-8,
        )
    # surface flow: closed-form reproduction and refinement order
    flow = SurfaceFlow(grid_size=64, t_start=1.0)
    for _ in range(100):
        flow.step()
    err = float(np.max(np.abs(flow.u - surface.round_profile_oracle(0.0, 1.0, flow.t))))
    res.check(
        "surface_round_reproduction",
        "conformal surface flow against the closed-form round solution",
        err,
        1e-6,
    )
    residuals = {}
    for m in (48, 96):
        f2 = SurfaceFlow(grid_size=m, profile=lambda th: 0.05 * np.cos(th), t_start=1.0)
        residuals[m] = surface.surface_evolution_residuals(f2, 1.08)
    for name in residuals[48]:
        order = float(np.log(residuals[48][name] / residuals[96][name]) / np.log(2.0))
        res.check(
            f"surface_refinement_order[{name}]",
            "grid-refinement order of the surface evolution residuals",
            -order,
            -cfg.tolerance("refinement_order"),
            detail=f"order={order:.2f}",
        )
    spread = surface.curvature_spread_series(
        SurfaceFlow(grid_size=96, profile=lambda th: 0.05 * np.cos(th), t_start=1.0),
        [1.0, 1.05, 1.1, 1.15],
    )
    monotone = all(b < a for (_, a), (_, b) in zip(spread, spread[1:]))
    res.check(
        "surface_curvature_spread",
        "spatial curvature spread decreasing along the surface flow",
        0.0 if monotone else 1.0,
        passed=monotone,
        tolerance=0.5,
        detail=";".join(f"{t:g}:{s:.3e}" for t, s in spread),
    )
    res.csv_files["flow_diagnostics.csv"] = _flow_diagnostics_csv(cfg)
    return res


def _flow_diagnostics_csv(cfg: RunConfig):
    rows = [("family", "t", "R_min", "R_max", "operator_min_eig")]
    from .charts import curvature_operator_eigs

    rng = np.random.default_rng(cfg.seed)
    for fam in corpus_flows():
        xs = [rng.uniform(-0.25, 0.25, size=fam.n) for _ in range(5)]
        for frac in cfg.t_grid:
            t = min(frac, 0.95) * fam.t_max
            scal = []
            eig = []
            for x in xs:
                data = curvature_data(fam.chart_at(t), x)
                scal.append(data.scalar)
                eig.append(curvature_operator_eigs(data.rm, data.g)[0][0])
            rows.append(
                (fam.kind, f"{t:.6g}", f"{min(scal):.12g}", f"{max(scal):.12g}", f"{min(eig):.12g}")
            )
    return rows


def suite_harnack(cfg: RunConfig, samples_per_flow: int = 20, mc_samples: int = 10_000) -> SuiteResult:
    res = SuiteResult(suite="harnack")
    rng = np.random.default_rng(cfg.seed)
    tol_pos = cfg.tolerance("positivity")
    corpus = [
        flows.constant_curvature(2, 3.0),
        flows.constant_curvature(3, 5.0),
        flows.product_spheres(4.0, 2.0),
    ]
    for fam in corpus:
        worst_eig = np.inf
        worst_sym = 0.0
        for x, t in _flow_samples(rng, fam, samples_per_flow):
            tr = harnack.triple_from_flow_point(flows.flow_point_data(fam, x, t))
            worst_sym = max(worst_sym, max(tr.check_symmetries().values()))
            worst_eig = min(worst_eig, harnack.harnack_min_eig(tr))
        res.check(
            f"triple_symmetries[{fam.kind}]",
            "antisymmetry, cyclic and symmetry structure of the Harnack blocks",
            worst_sym,
            1e-10,
        )
        res.check(
            f"harnack_positive[{fam.kind}]",
            "positivity of the Harnack quadratic form along the flow",
            -worst_eig,
            tol_pos,
        )
        x, t = _flow_samples(rng, fam, 1)[0]
        tr = harnack.triple_from_flow_point(flows.flow_point_data(fam, x, t))
        exact = harnack.harnack_min_eig(tr)
        sampled = harnack.harnack_min_eig_sampled(tr, n_samples=mc_samples, seed=cfg.seed)
        res.check(
            f"min_eig_vs_sampling[{fam.kind}]",
            "eigensolve against seeded Monte Carlo minimization",
            abs(exact - sampled),
            cfg.tolerance("mc_agreement"),
        )
    # perturbed surface flow
    sf = SurfaceFlow(grid_size=96, profile=lambda th: 0.05 * np.cos(th), t_start=1.0)
    sf.run_to(1.05)
    slc = sf.slice()
    nodes = slc.interior(0.4)
    take = nodes[:: max(1, len(nodes) // samples_per_flow)][:samples_per_flow]
    grid_tol = 10.0 * slc.h**2
    worst = np.inf
    for k in take:
        worst = min(worst, harnack.harnack_min_eig(harnack.triple_from_surface(slc, k)))
    res.check(
        "harnack_positive[surface]",
        "positivity of the Harnack quadratic form on the perturbed surface flow",
        -worst,
        max(tol_pos, grid_tol),
    )
    # algebraic identities on random symmetry-correct tensors
    tol_alg = cfg.tolerance("algebraic")
    for dim in (2, 3, 4):
        vals = harnack.algebraic_identities(dim, trials=100, seed=cfg.seed + dim)
        res.check(
            f"curvature_rearrangement[dim{dim}]",
            "pairwise curvature product rearrangement identity",
            vals["curvature_rearrangement"],
            tol_alg,
        )
        res.check(
            f"p_rearrangement[dim{dim}]",
            "first-order-block product rearrangement identity",
            vals["p_rearrangement"],
            tol_alg,
        )
        res.check(
            f"p_cyclic[dim{dim}]",
            "cyclic identity of the first-order Harnack block",
            vals["p_cyclic"],
            tol_alg,
        )
    # sum-of-squares identity: random factors and an eigen-factorized triple
    worst = 0.0
    for dim in (2, 3):
        for k in range(30):
            factors = []
            for _ in range(1 + k % 4):
                a = rng.normal(size=(dim + 1, dim + 1))
                factors.append(a - a.T)
            u = rng.normal(size=(dim, dim))
            u = u - u.T
            x_vec = rng.normal(size=dim)
            worst = max(worst, harnack.sum_of_squares_check(factors, u, x_vec))
    res.check(
        "sum_of_squares_random",
        "square-sum expansion of the positive curvature form",
        worst,
        tol_alg,
    )
    tr = harnack.triple_from_flow_point(
        flows.flow_point_data(flows.constant_curvature(2, 3.0), [0.2, 0.1], 1.0)
    )
    factors = harnack.factorize_curvature_form(tr.rm, tr.p, tr.m)
    u = rng.normal(size=(2, 2))
    u = u - u.T
    res.check(
        "sum_of_squares_factorized",
        "square-sum expansion on the eigen-factorized flow form",
        harnack.sum_of_squares_check(factors, u, rng.normal(size=2)),
        tol_alg,
    )
    # M decomposition along flows (sampled trials)
    worst = 0.0
    trials = 0
    for fam in corpus:
        for x, t in _flow_samples(rng, fam, 34):
            worst = max(
                worst, harnack.m_decomposition_residual(flows.flow_point_data(fam, x, t))
            )
            trials += 1
    res.check(
        "m_decomposition",
        "divergence decomposition of the second-order Harnack block",
        worst,
        tol_alg,
        detail=f"trials={trials}",
    )
    # gradient expanding soliton
    tol_sol = cfg.tolerance("soliton")
    chart = library.flat(2)

    def gaussian(coords):
        return (coords[0] * coords[0] + coords[1] * coords[1]) / 4.0

    pts = [[0.0, 0.0], [0.5, -0.2], [1.0, 0.7]]
    rep = harnack.soliton_check(1.0, chart, gaussian, pts, seed=cfg.seed)
    res.check(
        "soliton_gaussian_hessian",
        "gradient expanding soliton potential equation",
        rep["hessian_residual"],
        tol_sol,
    )
    res.check(
        "soliton_gaussian_vanishing",
        "vanishing contraction of the Harnack blocks on soliton data",
        rep["vanishing_residual"],
        tol_sol,
    )
    rep_bad = harnack.soliton_check(
        1.0, chart, lambda c: 1.1 * gaussian(c), [[0.3, 0.4]], seed=cfg.seed
    )
    res.check(
        "soliton_detects_perturbation",
        "non-soliton potentials are detected",
        0.0 if not rep_bad["is_soliton"] else 1.0,
        tolerance=0.5,
        passed=not rep_bad["is_soliton"],
        detail=f"hessian_residual={rep_bad['hessian_residual']:.3e}",
    )
    return res


def suite_thermostat(cfg: RunConfig, closed_form_samples: int = 10) -> SuiteResult:
    res = SuiteResult(suite="thermostat")
    rng = np.random.default_rng(cfg.seed)
    # fiber sectional curvature, both signs
    tol_fiber = cfg.tolerance("fiber")
    for nf in (4, 8, 16):
        vals = thermostat.fiber_sectional_sampled("hyperbolic", nf, [(0, 1), (0, nf - 1)])
        worst = max(abs(v + 1.0 / (2 * nf)) for v in vals.values())
        res.check(
            f"fiber_sectional_hyperbolic[N={nf}]",
            "constant sectional curvature -1/(2N) of the fiber",
            worst,
            tol_fiber,
        )
        vals = thermostat.fiber_sectional_sampled("spherical", nf, [(0, 1)])
        worst = max(abs(v - 1.0 / (2 * nf)) for v in vals.values())
        res.check(
            f"fiber_sectional_spherical[N={nf}]",
            "constant sectional curvature +1/(2N) of the fiber",
            worst,
            tol_fiber,
        )
    # closed-form component tables against the jet pipeline
    tol_g = cfg.tolerance("christoffel_closed")
    tol_c = cfg.tolerance("curvature_closed")
    bases = [
        (flows.static_flat(2), 6, (0.4, 1.4)),
        (flows.constant_curvature(2, 3.0), 6, (0.15, 0.75)),
        (flows.constant_curvature(3, 9.0), 6, (0.2, 1.0)),
    ]
    for fam, nf, (t_lo, t_hi) in bases:
        spec = thermostat.ThermostatSpec("hyperbolic", nf, fam)
        worst_g, worst_c = 0.0, 0.0
        for _ in range(closed_form_samples):
            t = float(rng.uniform(t_lo, t_hi))
            x = rng.uniform(-0.25, 0.25, size=fam.n)
            pt = thermostat.SpacetimePoint(base=x, t=t)
            worst_g = max(worst_g, max(thermostat.christoffel_crosscheck(spec, pt).values()))
            worst_c = max(worst_c, max(thermostat.curvature_crosscheck(spec, pt).values()))
        res.check(
            f"christoffel_closed_forms[{fam.kind}]",
            "product-metric Christoffel table against the jet pipeline",
            worst_g,
            tol_g,
        )
        res.check(
            f"curvature_closed_forms[{fam.kind}]",
            "product-metric curvature and Ricci components against the jet pipeline",
            worst_c,
            tol_c,
        )
    # one larger-N spot check per curved base
    for fam, t in ((flows.constant_curvature(2, 3.0), 0.25), (flows.constant_curvature(3, 9.0), 0.5)):
        spec = thermostat.ThermostatSpec("hyperbolic", 16, fam)
        pt = thermostat.SpacetimePoint(base=np.asarray([0.2, 0.1, -0.1][: fam.n]), t=t)
        res.check(
            f"curvature_closed_forms_N16[{fam.kind}]",
            "product-metric curvature components at larger fiber dimension",
            max(thermostat.curvature_crosscheck(spec, pt).values()),
            tol_c,
        )
    # spherical variant and the sign relation
    sspec = thermostat.ThermostatSpec(
        "spherical", 6, flows.backward_constant_curvature(2, 1.0)
    )
    spt = thermostat.SpacetimePoint(base=np.array([0.2, 0.1]), t=0.8)
    res.check(
        "curvature_closed_forms[spherical]",
        "spherical-variant component tables against the jet pipeline",
        max(thermostat.curvature_crosscheck(sspec, spt).values()),
        tol_c,
    )
    res.check(
        "fiber_coefficient_sign_relation",
        "spherical/hyperbolic fiber coefficient substitution relation",
        thermostat.spherical_hyperbolic_fiber_relation(2, 1.0, 8, [0.2, 0.1], 0.8),
        cfg.tolerance("sign_relation"),
    )
    # Ricci decay in the fiber dimension
    decay_rows = [("N", "ricci_norm")]
    for fam, samples in (
        (flows.constant_curvature(2, 3.0), [([0.2, 0.1], 0.25), ([0.0, 0.0], 0.2)]),
        (flows.constant_curvature(3, 9.0), [([0.1, 0.0, 0.2], 0.3)]),
    ):
        fit = thermostat.ricci_decay_fit(
            thermostat.ThermostatSpec("hyperbolic", cfg.n_list[0], fam), cfg.n_list, samples
        )
        band = cfg.tolerance("decay_band")
        res.check(
            f"ricci_decay_slope[{fam.kind}]",
            "log-log decay rate of the product Ricci norm in the fiber dimension",
            abs(fit.slope + 1.0) if fit.slope is not None else 0.0,
            band,
            detail=f"slope={fit.slope}",
        )
        for nf, norm in fit.norms:
            decay_rows.append((nf, f"{norm:.12e}"))
    fit_flat = thermostat.ricci_decay_fit(
        thermostat.ThermostatSpec("hyperbolic", cfg.n_list[0], flows.static_flat(2)),
        cfg.n_list,
        [([0.1, 0.2], 1.0)],
    )
    res.check(
        "ricci_decay_flat",
        "exactly flat product over the trivial flow",
        max(v for _, v in fit_flat.norms),
        1e-12,
        detail=f"verdict={fit_flat.verdict}",
    )
    res.csv_files["ricci_decay.csv"] = decay_rows
    # block limits toward the Harnack data
    spread_tol = cfg.tolerance("limit_spread")
    for fam, x, t in (
        (flows.constant_curvature(2, 3.0), [0.2, 0.1], 0.5),
        (flows.constant_curvature(3, 9.0), [0.1, 0.0, 0.2], 0.5),
    ):
        rep = thermostat.harnack_limit_check(
            thermostat.ThermostatSpec("hyperbolic", 16, fam), x, t, [16, 32]
        )
        worst_spread = max(f["spread"] for f in rep["fits"].values())
        res.check(
            f"harnack_limit_stability[{fam.kind}]",
            "1/N convergence of the product curvature blocks to the Harnack data",
            worst_spread,
            spread_tol,
            detail=";".join(
                f"{k}:C={v['C']:.4g}" for k, v in sorted(rep["fits"].items())
            ),
        )
    sflow = SurfaceFlow(grid_size=96, profile=lambda th: 0.05 * np.cos(th), t_start=1.0)
    sbase = SurfaceBase(sflow, 1.05)
    rep = thermostat.harnack_limit_check(
        thermostat.ThermostatSpec("hyperbolic", 16, sbase),
        [sbase.node_theta(32), 0.0],
        sbase.t0,
        [16, 32, 64],
    )
    res.check(
        "harnack_limit_stability[surface]",
        "1/N convergence of the first-order block over the surface flow",
        rep["fits"]["p"]["spread"],
        spread_tol,
        detail=f"C={rep['fits']['p']['C']:.4g}",
    )
    # restricted-slice positivity and convergence to the Harnack minimum
    corpus = [
        flows.constant_curvature(2, 3.0),
        flows.constant_curvature(3, 5.0),
        flows.product_spheres(4.0, 2.0),
    ]
    for fam in corpus:
        worst_margin = -np.inf
        for x, t in _flow_samples(rng, fam, 5, t_lo=0.2, t_hi=0.8):
            spec = thermostat.ThermostatSpec("restricted", 64, fam)
            val = thermostat.restricted_min_eig(spec, x, t)
            worst_margin = max(worst_margin, -val - 10.0 / 64)
        res.check(
            f"restricted_positive[{fam.kind}]",
            "weak positivity of the restricted-slice curvature form",
            worst_margin,
            0.0,
            passed=worst_margin <= 0.0,
        )
    tr = harnack.triple_from_flow_point(
        flows.flow_point_data(flows.constant_curvature(2, 3.0), [0.2, 0.1], 1.0)
    )
    h_eig = harnack.harnack_min_eig(tr)
    diffs = []
    for nf in (256, 512, 1024):
        spec = thermostat.ThermostatSpec("restricted", nf, flows.constant_curvature(2, 3.0))
        diffs.append(abs(thermostat.restricted_min_eig(spec, [0.2, 0.1], 1.0) - h_eig))
    shrinking = all(b <= 0.7 * a for a, b in zip(diffs, diffs[1:]))
    res.check(
        "restricted_converges_to_harnack",
        "restricted-slice minimum approaches the Harnack minimum at rate 1/N",
        diffs[-1],
        1e-2,
        passed=shrinking and diffs[-1] <= 1e-2,
        detail=";".join(f"{d:.3e}" for d in diffs),
    )
    # space-time derivative relations over homogeneous bases
    for fam, x, t in (
        (flows.constant_curvature(2, 3.0), [0.2, 0.1], 0.25),
        (flows.constant_curvature(3, 9.0), [0.1, 0.0, 0.2], 0.5),
        (flows.static_flat(2), [0.3, -0.1], 1.0),
    ):
        for nf in (16, 24):
            spec = thermostat.ThermostatSpec("restricted", nf, fam)
            vals = thermostat.spacetime_residuals(
                spec, x, t, which=("time_cov", "laplacian", "heat")
            )
            res.check(
                f"spacetime_residuals[{fam.kind},N={nf}]",
                "restricted-slice derivative relations against base-flow data",
                max(vals.values()),
                10.0 / nf,
            )
    spec = thermostat.ThermostatSpec("restricted", 12, flows.constant_curvature(3, 9.0))
    vals = thermostat.spacetime_residuals(
        spec, [0.1, 0.0, 0.2], 0.5, which=("time_cov_full",)
    )
    res.check(
        "spacetime_residuals_full_product",
        "full-product time-direction derivative against base-flow data",
        max(vals.values()),
        10.0 / 12,
    )
    return res


def _refine_grid(grid):
    out = []
    for a, b in zip(grid, grid[1:]):
        out += [a, 0.5 * (a + b)]
    out.append(grid[-1])
    return out


def suite_entropy(cfg: RunConfig) -> SuiteResult:
    res = SuiteResult(suite="entropy")
    drift_tol = cfg.tolerance("entropy_drift")
    csv_rows = [("family", "tau", "W", "dW_sign")]
    grid = sorted(cfg.t_grid) if len(cfg.t_grid) >= 5 else list(np.linspace(0.4, 1.6, 9))
    for n, c0 in ((2, 1.0), (3, 2.0)):
        rep = entropy_mod.shrinking_sphere_report(n, c0, grid)
        res.check(
            f"normalization_drift[n={n}]",
            "unit mass of the weighted measure along the conjugate evolution",
            rep.normalization_drift,
            drift_tol,
        )
        res.check(
            f"w_monotone[n={n}]",
            "single-signed increments of the entropy series",
            0.0 if rep.verdict == "monotone" else 1.0,
            tolerance=0.5,
            passed=rep.verdict == "monotone",
            detail=f"direction={rep.direction} (claimed increasing_in_tau)",
        )
        fine = entropy_mod.shrinking_sphere_report(n, c0, _refine_grid(grid))
        res.check(
            f"w_verdict_refinement_stable[n={n}]",
            "entropy verdict stability under grid refinement",
            0.0 if (fine.verdict, fine.direction) == (rep.verdict, rep.direction) else 1.0,
            tolerance=0.5,
            passed=(fine.verdict, fine.direction) == (rep.verdict, rep.direction),
        )
        for tau, w, d in zip(rep.taus, rep.values, rep.diffs + [float("nan")]):
            sign = "0" if not np.isfinite(d) else ("+" if d > 0 else "-")
            csv_rows.append((f"sphere{n}", f"{tau:.6g}", f"{w:.12g}", sign))
    # flat Gaussian surrogate
    vals = [abs(entropy_mod.gaussian_w(1.0, box, points=257)) for box in (4.0, 8.0, 12.0)]
    res.check(
        "gaussian_w_box_limit",
        "entropy of the self-similar flat profile vanishes in the box limit",
        vals[-1],
        1e-6,
        detail=";".join(f"{v:.3e}" for v in vals),
    )
    res.check(
        "gaussian_self_similarity",
        "self-similar flat profile solves the conjugate potential equation",
        entropy_mod.gaussian_conjugate_residual(2, 0.8, [[0.0, 0.0], [1.0, -0.5]]),
        1e-12,
    )
    taus = (0.5, 1.0, 2.0)
    ws = [entropy_mod.gaussian_w(tau, box=14.0, points=257) for tau in taus]
    res.check(
        "gaussian_w_constant",
        "entropy constant along the self-similar flat profile",
        max(abs(w) for w in ws),
        1e-6,
    )
    # pullback components
    pc = entropy_mod.pullback_components(0.0, 0.0, 0.0, 0.0, 1.0, 8, 2)
    res.check(
        "pullback_g00_example",
        "pulled-back time-time component, definitional recomputation",
        abs(pc.g_m_00 - 6.0),
        1e-12,
    )
    rng = np.random.default_rng(cfg.seed)
    worst = 0.0
    for _ in range(50):
        pc = entropy_mod.pullback_components(
            float(rng.normal()),
            float(rng.uniform(0, 2)),
            float(rng.normal()),
            float(rng.normal()),
            float(rng.uniform(0.1, 3.0)),
            int(rng.integers(2, 40)),
            int(rng.integers(2, 4)),
        )
        worst = max(worst, pc.identity_residual)
    res.check(
        "pullback_scalar_identity",
        "formula-level identity tying the pulled-back scalar to the integrand",
        worst,
        1e-12,
    )
    res.csv_files["entropy_series.csv"] = csv_rows
    return res


SUITE_FUNCS = {
    "identities": suite_identities,
    "flow": suite_flow,
    "harnack": suite_harnack,
    "thermostat": suite_thermostat,
    "entropy": suite_entropy,
}


def run_suite(cfg: RunConfig) -> SuiteResult:
    cfg.validate()
    if cfg.suite == "all":
        combined = SuiteResult(suite="all")
        for name in ("identities", "flow", "harnack", "thermostat", "entropy"):
            combined.extend(SUITE_FUNCS[name](cfg))
        return combined
    return SUITE_FUNCS[cfg.suite](cfg)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="curvflow",
        description="Verification battery for curvature identities along explicit flows",
    )
    sub = parser.add_subparsers(dest="suite_cmd", required=True)
    for name in SUITES:
        p = sub.add_parser(name, help=f"run the {name} suite")
        p.add_argument("--config", help="key=value configuration file")
        p.add_argument("--suite", help="override the suite selected by the subcommand/config")
        p.add_argument("--N", help="comma-separated fiber dimensions")
        p.add_argument("--t-grid", dest="t_grid", help="comma-separated time grid in (0, T]")
        p.add_argument("--seed", type=int, help="seed for every randomized operation")
        p.add_argument("--out", help="output directory")
        p.add_argument(
            "--tol",
            action="append",
            metavar="NAME=VALUE",
            help="tolerance override (repeatable)",
        )
    args = parser.parse_args(argv)
    try:
        if args.suite is None:
            args.suite = args.suite_cmd
        cfg = build_config(args)
        result = run_suite(cfg)
        emit(result, cfg.echo(), cfg.out)
    except UsageError as exc:
        print(f"curvflow: {exc}", file=sys.stderr)
        return 2
    except CurvflowError as exc:
        print(f"curvflow: {exc}", file=sys.stderr)
        return 2
    if not result.checks:
        print("curvflow: nothing ran", file=sys.stderr)
        return 3
    failure = result.first_failure()
    if failure is not None:
        print(
            f"curvflow: FIRST FAILING CHECK {failure.name}: value {failure.value:.6g}"
            f" tolerance {failure.tolerance}",
            file=sys.stderr,
        )
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
