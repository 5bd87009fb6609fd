"""Scenario registry: each scenario runs one experiment from a config and
returns a time series plus pass/fail metrics.

:func:`run_scenario` writes ``series.csv``, ``summary.csv`` and the
requested frame files into an output directory and returns the exit code
(0 all metrics passed, 1 some metric failed).
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import anisotropy, geometry, kernel, norms, refsolver, scheme, snapshots
from . import domain as dom
from . import forcing as frc
from . import fractional_curvature as fc
from .config import ConfigError, ExperimentConfig


class ScenarioError(RuntimeError):
    pass


@dataclass(frozen=True)
class Metric:
    name: str
    value: float
    threshold: float | None
    passed: bool


@dataclass
class ScenarioResult:
    header: list[str]
    rows: list[list] = field(default_factory=list)
    metrics: list[Metric] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(m.passed for m in self.metrics)

    def metric(self, name: str) -> Metric:
        for m in self.metrics:
            if m.name == name:
                return m
        raise KeyError(name)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_series(result: ScenarioResult, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(result.header)
        for row in result.rows:
            w.writerow([_fmt(v) for v in row])


def write_summary(result: ScenarioResult, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["metric", "value", "threshold", "passed"])
        for m in result.metrics:
            w.writerow([m.name, _fmt(m.value), "" if m.threshold is None else _fmt(m.threshold), _fmt(m.passed)])


# ---------------------------------------------------------------------------
# frame output


class FrameWriter:
    def __init__(self, outdir: Path | None, formats, cadence: int):
        self.outdir = outdir
        self.formats = tuple(f for f in formats if f in ("pgm", "grid"))
        self.cadence = max(1, int(cadence))

    def __call__(self, grid, step: int) -> None:
        if self.outdir is None or not self.formats or step % self.cadence:
            return
        if "grid" in self.formats:
            snapshots.write_grid_snapshot(grid, self.outdir / f"frame_{step:06d}.grid")
        if "pgm" in self.formats and grid.values.ndim == 2:
            snapshots.write_pgm(grid, self.outdir / f"frame_{step:06d}.pgm")


def _no_frames(grid, step):
    return None


# ---------------------------------------------------------------------------
# engines


def threshold_setup(cfg: ExperimentConfig, domain: dom.Domain | None = None, h: float | None = None):
    d = cfg.domain() if domain is None else domain
    params = kernel.scheme_params(cfg.get("flow", "alpha"), cfg.get("flow", "h") if h is None else h)
    conv = scheme.make_convolver(cfg.norm(), params, d, cfg.get("flow", "eps_tail"))
    return d, params, conv


def threshold_states(grid, conv, g, params, n_steps: int, frames=_no_frames):
    """Yield (step, grid) for steps 0..n_steps."""
    cur = grid
    frames(cur, 0)
    yield 0, cur
    for n in range(1, n_steps + 1):
        cur = scheme.threshold_step(cur, conv, g, params, n - 1)
        frames(cur, n)
        yield n, cur


def direction_table(cfg: ExperimentConfig) -> anisotropy.AnisotropyTable:
    return anisotropy.build_direction_table(cfg.norm(), cfg.get("flow", "alpha"), cfg.get("flow", "n_dirs"))


def pde_setup(cfg: ExperimentConfig, spec: dom.SetSpec, domain: dom.Domain | None = None, table=None):
    d = cfg.domain() if domain is None else domain
    eta = cfg.get("flow", "pde_eta") or 6.0 * d.spacing
    field_ = refsolver.init_levelset(d, spec, eta)
    tab = direction_table(cfg) if table is None else table
    return field_, tab


def pde_dt(cfg: ExperimentConfig, field_, table, g, mobility_scale: float = 1.0) -> float:
    gs = g.sup_norm(float(np.abs(field_.origin).max()) + 0.5 * field_.spacing, 2)
    lim = refsolver.cfl_limit(table, field_.spacing, gs) / mobility_scale
    dt = cfg.get("flow", "pde_dt")
    if dt == 0.0:
        return 0.9 * lim
    if dt > lim:
        raise ConfigError(f"flow.pde_dt = {dt:.6g} exceeds the stability limit {lim:.6g}")
    return dt


def pde_states(field_, table, g, times, dt: float, frames=_no_frames, mobility_scale: float = 1.0):
    """Yield (k, field) at the requested (increasing) times, k = step count."""
    count = [0]

    def cb(f, k):
        count[0] += 1
        frames(f, count[0])

    cur = field_
    frames(cur, 0)
    for t in times:
        if t > cur.time:
            cur = refsolver.pde_run(cur, table, g, t - cur.time, dt, mobility_scale, callback=cb)
        yield count[0], cur


def _front_area(front: geometry.FrontPolyline) -> float:
    return front.area if not front.empty else 0.0


def _require_2d(cfg: ExperimentConfig, what: str) -> None:
    if cfg.get("domain", "n") != 2:
        raise ConfigError(f"{what} needs domain.n = 2")


def _require_engine(cfg: ExperimentConfig, allowed, what: str) -> str:
    eng = cfg.get("flow", "engine")
    if eng not in allowed:
        raise ConfigError(f"{what} runs with flow.engine in {tuple(allowed)}, got {eng!r}")
    return eng


# ---------------------------------------------------------------------------
# shrinking circle


def _single_ball(cfg: ExperimentConfig) -> dom.Ball:
    spec = cfg.initial_set()
    if len(spec.parts) != 1 or not isinstance(spec.parts[0], dom.Ball):
        raise ConfigError("initial.set must be a single ball for this scenario")
    return spec.parts[0]


def circle_law(r0: float, mu: float, c: float, t):
    """Radius of a shrinking circle r(t) = sqrt(r0^2 - 4 mu C t) (0 after extinction)."""
    return np.sqrt(np.maximum(r0 * r0 - 4.0 * mu * c * np.asarray(t, dtype=float), 0.0))


def shrink_circle_run(cfg: ExperimentConfig, domain: dom.Domain, h: float, frames=_no_frames):
    """Rows (step, t, r_measured, r_exact, rel_err) up to the configured fraction of extinction."""
    ball = _single_ball(cfg)
    alpha = cfg.get("flow", "alpha")
    desc = cfg.norm()
    mu = anisotropy.mobility_mu(desc, alpha, np.eye(domain.dim)[0])
    c = anisotropy.c_const(domain.dim, alpha)
    r0 = ball.radius
    t_ext = r0 * r0 / (4.0 * mu * c)
    d, params, conv = threshold_setup(cfg, domain, h)
    n = int(math.floor(cfg.get("scenario", "t_fraction") * t_ext / params.h + 1e-9))
    cap = cfg.get("flow", "n_steps")
    if cap:
        n = min(n, cap)
    grid = scheme.init_phase(d, cfg.initial_set())
    rows = []
    for step, gr in threshold_states(grid, conv, frc.zero(), params, n, frames):
        front = geometry.extract_front(gr)
        # mean distance of the front from the ball centre
        r = geometry.radius_stats(front, ball.center)[1] if not front.empty else 0.0
        ex = float(circle_law(r0, mu, c, gr.time))
        rows.append([step, gr.time, r, ex, abs(r - ex) / ex])
    return rows, t_ext


def refined_domain(cfg: ExperimentConfig, h: float) -> dom.Domain:
    """The config domain refined so that sigma^(1/alpha)/dx at step ``h`` matches the configured h."""
    d = cfg.domain()
    alpha = cfg.get("flow", "alpha")
    ratio = kernel.scheme_params(alpha, cfg.get("flow", "h")).width / kernel.scheme_params(alpha, h).width
    return dom.Domain(d.dim, d.extent, int(round(d.cells * ratio)), int(math.ceil(d.margin * ratio)))


def halved_domain(cfg: ExperimentConfig) -> tuple[dom.Domain, float]:
    """Domain and step for h/2, refined so sigma^(1/alpha)/dx stays fixed."""
    h2 = 0.5 * cfg.get("flow", "h")
    return refined_domain(cfg, h2), h2


def scenario_shrink_circle(cfg: ExperimentConfig, frames) -> ScenarioResult:
    _require_2d(cfg, "shrink_circle")
    _require_engine(cfg, ("threshold", "both"), "shrink_circle")
    if cfg.norm().kind != "euclidean":
        raise ConfigError("shrink_circle needs norm.kind = euclidean (only then do circles stay circles)")
    if cfg.forcing().kind != "zero":
        raise ConfigError("shrink_circle needs forcing.kind = zero")
    res = ScenarioResult(["run", "step", "t", "r_measured", "r_exact", "rel_err"])
    tol = cfg.get("scenario", "tolerance")
    rows, _ = shrink_circle_run(cfg, cfg.domain(), cfg.get("flow", "h"), frames)
    res.rows += [["base", *r] for r in rows]
    err = max(r[-1] for r in rows)
    res.metrics.append(Metric("max_rel_radius_err", err, tol, err <= tol))
    if cfg.get("scenario", "halving"):
        d2, h2 = halved_domain(cfg)
        rows2, _ = shrink_circle_run(cfg, d2, h2)
        res.rows += [["half_h", *r] for r in rows2]
        err2 = max(r[-1] for r in rows2)
        res.metrics.append(Metric("max_rel_radius_err_half_h", err2, tol, err2 <= tol))
        res.metrics.append(Metric("error_ratio_half_h", err2 / err if err > 0 else 0.0, 1.0, err2 < err))
    return res


# ---------------------------------------------------------------------------
# ball speed scaling


def linear_fit_r2(x, y, through_origin: bool = False) -> tuple[float, float, float]:
    """Least-squares line y = a x + b (b = 0 if ``through_origin``); returns (a, b, R^2)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if through_origin:
        a = float(x @ y / (x @ x))
        b = 0.0
    else:
        a, b = (float(v) for v in np.polyfit(x, y, 1))
    resid = y - (a * x + b)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else 1.0
    return a, b, r2


def ball_displacement(cfg: ExperimentConfig, radius: float, h: float, steps: int, domain: dom.Domain | None = None) -> float:
    """Mean per-step decrease of the area-equivalent radius of a centred disk."""
    d, params, conv = threshold_setup(cfg, domain, h)
    spec = dom.parse_set(f"ball 0 0 {radius!r}", 2)
    dom.check_inside(spec, d)
    grid = scheme.init_phase(d, spec)
    r_start = geometry.equivalent_radius(grid)
    for _, gr in threshold_states(grid, conv, cfg.forcing(), params, steps):
        pass
    return (r_start - geometry.equivalent_radius(gr)) / steps


def scenario_ball_speed(cfg: ExperimentConfig, frames) -> ScenarioResult:
    _require_2d(cfg, "ball_speed")
    h0 = cfg.get("flow", "h")
    hs = [h0 / 2.0**k for k in range(cfg.get("scenario", "levels"))]
    radii = cfg.get("scenario", "radii")
    steps = cfg.get("scenario", "steps")
    refine = cfg.get("scenario", "refine")
    res = ScenarioResult(["radius", "h", "displacement_per_step"])
    taus = []
    worst = 1.0
    for r in radii:
        # refining the grid with h keeps the front from pinning to it when steps get short
        disp = [ball_displacement(cfg, r, h, steps, refined_domain(cfg, h) if refine else None) for h in hs]
        res.rows += [[r, h, v] for h, v in zip(hs, disp)]
        tau, _, r2 = linear_fit_r2(hs, disp)
        taus.append(tau)
        worst = min(worst, r2)
        res.metrics.append(Metric(f"tau_r{r!r}", tau, None, True))
    res.metrics.append(Metric("min_r2_linear_in_h", worst, 0.99, worst >= 0.99))
    a1, _, r2 = linear_fit_r2(1.0 / np.asarray(radii), taus, through_origin=True)
    res.metrics.append(Metric("A1", a1, None, True))
    res.metrics.append(Metric("r2_tau_vs_inverse_radius", r2, 0.95, r2 >= 0.95))
    return res


# ---------------------------------------------------------------------------
# convexity


def convexity_bound(front: geometry.FrontPolyline, dx: float, factor: float) -> float:
    return factor * dx * front.perimeter / front.area


def scenario_convexity(cfg: ExperimentConfig, frames) -> ScenarioResult:
    _require_2d(cfg, "convexity")
    g = cfg.forcing()
    if not g.time_only:
        raise ConfigError("convexity needs a forcing that depends only on time (kinds zero, constant, time_table)")
    eng = _require_engine(cfg, ("threshold", "pde"), "convexity")
    n = cfg.get("flow", "n_steps")
    if n < 1:
        raise ConfigError("convexity needs flow.n_steps >= 1")
    factor = cfg.get("scenario", "factor")
    d = cfg.domain()
    spec = cfg.initial_set()
    if eng == "threshold":
        _, params, conv = threshold_setup(cfg)
        states = threshold_states(scheme.init_phase(d, spec), conv, g, params, n, frames)
    else:
        f0, tab = pde_setup(cfg, spec)
        dt = pde_dt(cfg, f0, tab, g)
        states = pde_states(f0, tab, g, [k * dt for k in range(n + 1)], dt, frames)
    res = ScenarioResult(["step", "t", "convexity_defect", "bound", "area", "perimeter"])
    worst = 0.0
    for step, gr in states:
        front = geometry.extract_front(gr)
        if front.empty or front.area <= 0:
            break
        dfc = geometry.convexity_defect(front)
        b = convexity_bound(front, d.spacing, factor)
        res.rows.append([step, gr.time, dfc, b, front.area, front.perimeter])
        worst = max(worst, dfc / b)
    res.metrics.append(Metric("max_defect_over_bound", worst, 1.0, worst <= 1.0))
    res.metrics.append(Metric("steps_checked", float(len(res.rows)), None, True))
    return res


# ---------------------------------------------------------------------------
# Wulff asymptotics


def wulff_diameter(c: float, table) -> float:
    v = c * table.wulff_vertices
    return float(np.max(np.linalg.norm(v[:, None, :] - v[None, :, :], axis=-1)))


def scenario_wulff(cfg: ExperimentConfig, frames) -> ScenarioResult:
    _require_2d(cfg, "wulff")
    g = cfg.forcing()
    if g.kind != "constant" or not g.value > 0:
        raise ConfigError(f"wulff needs a constant forcing c > 0 (forcing.kind = constant, forcing.value > 0), got {g.kind} {g.value}")
    eng = _require_engine(cfg, ("threshold", "pde"), "wulff")
    c = g.value
    t_end = cfg.get("scenario", "t_end")
    if not t_end > 0:
        raise ConfigError("wulff needs scenario.t_end > 0")
    tol = cfg.get("scenario", "tolerance")
    d = cfg.domain()
    spec = cfg.initial_set()
    tab = direction_table(cfg)
    target = anisotropy.wulff_boundary(c, tab)
    if eng == "pde":
        f0, tab = pde_setup(cfg, spec, d, tab)
        dt = pde_dt(cfg, f0, tab, g)
        states = pde_states(f0, tab, g, [0.5 * t_end, t_end], dt, frames)
    else:
        _, params, conv = threshold_setup(cfg)
        n = int(round(t_end / params.h))
        half = n // 2
        states = ((k, gr) for k, gr in threshold_states(scheme.init_phase(d, spec), conv, g, params, n, frames) if k in (half, n))
    res = ScenarioResult(["t", "hausdorff_scaled", "diam_wulff"])
    diam = wulff_diameter(c, tab)
    dists = []
    for _, gr in states:
        front = geometry.extract_front(gr)
        dist = geometry.hausdorff(front.scaled(1.0 / gr.time), target)
        dists.append(dist)
        res.rows.append([gr.time, dist, diam])
    res.metrics.append(Metric("hausdorff_half_T", dists[0], None, True))
    res.metrics.append(Metric("hausdorff_T_over_diam", dists[1] / diam, tol, dists[1] <= tol * diam))
    res.metrics.append(Metric("decrease_ratio", dists[1] / dists[0], 1.0, dists[1] < dists[0]))
    return res


# ---------------------------------------------------------------------------
# operator splitting


def splitting_run(field_, table, g: frc.ForcingSpec, t_end: float, eps: float, dt: float):
    """Alternate Wulff dilation by 2 eps c_eps and curvature flow at doubled mobility.

    Over each period [2k eps, 2(k+1) eps] the forcing acts alone during the
    first half (with c_eps the period average of g) and the curvature acts
    alone during the second.
    """
    periods = t_end / (2.0 * eps)
    n = int(round(periods))
    if abs(periods - n) > 1e-9 * max(1.0, periods) or n < 1:
        raise ConfigError(f"t_end = {t_end} is not a whole number of periods 2 eps = {2 * eps}")
    cur = field_
    zero = frc.zero()
    for k in range(n):
        t0 = field_.time + 2 * k * eps
        c_eps = g.time_average(t0, t0 + 2 * eps)
        vals = geometry.morph_levelset(cur.values, 2.0 * eps * c_eps, cur.spacing, table)
        np.clip(vals, -cur.eta, cur.eta, out=vals)
        cur = cur.with_values(vals, t0 + eps)
        cur = refsolver.pde_run(cur, table, zero, eps, min(dt, eps), mobility_scale=2.0)
        cur = cur.with_values(cur.values, t0 + 2 * eps)
    return cur


def scenario_splitting(cfg: ExperimentConfig, frames) -> ScenarioResult:
    _require_2d(cfg, "splitting")
    _require_engine(cfg, ("pde",), "splitting")
    g = cfg.forcing()
    if not g.time_only:
        raise ConfigError("splitting needs a time-only forcing")
    t_end = cfg.get("scenario", "t_end")
    divisors = cfg.get("scenario", "divisors")
    if any(dv < 2 or dv != int(dv) or int(dv) % 2 for dv in divisors):
        raise ConfigError(f"scenario.divisors must be even integers >= 2, got {divisors}")
    slack = cfg.get("scenario", "slack")
    f0, tab = pde_setup(cfg, cfg.initial_set())
    dt = pde_dt(cfg, f0, tab, g, mobility_scale=2.0)
    (_, coupled), = list(pde_states(f0, tab, g, [t_end], dt, frames))
    ref = geometry.extract_front(coupled)
    res = ScenarioResult(["eps", "hausdorff_to_coupled"])
    dists = []
    for dv in divisors:
        eps = t_end / dv
        split = splitting_run(f0, tab, g, t_end, eps, dt)
        dist = geometry.hausdorff(geometry.extract_front(split), ref)
        dists.append(dist)
        res.rows.append([eps, dist])
    worst = max((b / a for a, b in zip(dists[:-1], dists[1:])), default=0.0)
    res.metrics.append(Metric("max_successive_ratio", worst, 1.0 + slack, worst <= 1.0 + slack))
    res.metrics.append(Metric("hausdorff_finest", dists[-1], None, True))
    return res


# ---------------------------------------------------------------------------
# distance between nested fronts


def scenario_distance(cfg: ExperimentConfig, frames) -> ScenarioResult:
    _require_2d(cfg, "distance")
    eng = _require_engine(cfg, ("threshold", "pde"), "distance")
    g1 = cfg.forcing()
    if not g1.time_only:
        raise ConfigError("distance needs a time-only inner forcing")
    g2 = frc.constant(cfg.get("scenario", "g2"))
    d = cfg.domain()
    inner = cfg.initial_set()
    try:
        outer = dom.parse_set(cfg.get("scenario", "outer"), 2)
        dom.check_inside(outer, d)
    except dom.DomainError as exc:
        raise ConfigError(f"scenario.outer: {exc}") from None
    pts = d.points()
    if np.any(inner.contains(pts) & ~outer.contains(pts)):
        raise ConfigError("scenario.outer must contain initial.set")
    t_end = cfg.get("scenario", "t_end")
    n_s = cfg.get("scenario", "samples")
    tab = direction_table(cfg)
    g_sup = max(g1.sup_norm(d.extent, 2), g2.sup_norm(d.extent, 2))
    if eng == "pde":
        fi, _ = pde_setup(cfg, inner, d, tab)
        fo, _ = pde_setup(cfg, outer, d, tab)
        dt = min(pde_dt(cfg, fi, tab, g1), pde_dt(cfg, fo, tab, g2))
        times = [0.0] + [t_end * (k + 1) / n_s for k in range(n_s)]
        si = pde_states(fi, tab, g1, times, dt)
        so = pde_states(fo, tab, g2, times, dt, frames)
    else:
        _, params, conv = threshold_setup(cfg)
        dt = params.h
        n = int(round(t_end / dt))
        keep = {0} | {int(round(n * (k + 1) / n_s)) for k in range(n_s)}
        si = ((k, gr) for k, gr in threshold_states(scheme.init_phase(d, inner), conv, g1, params, n) if k in keep)
        so = ((k, gr) for k, gr in threshold_states(scheme.init_phase(d, outer), conv, g2, params, n, frames) if k in keep)
    tol = 4.0 * d.spacing + 2.0 * dt * g_sup
    res = ScenarioResult(["t", "gap", "lower_bound"])
    gap0 = None
    worst = math.inf
    for (_, a), (_, b) in zip(si, so):
        fa, fb = geometry.extract_front(a), geometry.extract_front(b)
        if fa.empty or fb.empty:
            # a vanished front leaves the gap undefined; the inequality is only checked before
            break
        gap = geometry.boundary_gap(fb, fa, tab)
        if gap0 is None:
            gap0 = gap
            res.rows.append([a.time, gap, gap])
            continue
        bound = gap0 + g2.time_integral(0.0, a.time) - g1.time_integral(0.0, a.time)
        res.rows.append([a.time, gap, bound])
        worst = min(worst, gap - bound + tol)
    res.metrics.append(Metric("tolerance", tol, None, True))
    res.metrics.append(Metric("samples_checked", float(len(res.rows) - 1), None, True))
    res.metrics.append(Metric("min_slack", worst, 0.0, worst >= 0.0))
    return res


# ---------------------------------------------------------------------------
# nonlocal stability


def random_quadratic_specs(dim: int, count: int, seed: int, desc: norms.NormDescriptor, min_ratio: float = 0.2):
    """Random (p, M) pairs whose local curvature is not small next to its scale.

    The scale of a Hessian is the limit for the absolute-valued Hessian
    ``|M|``; specs with ``|limit| < min_ratio * scale`` are redrawn.
    """
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        p = rng.normal(size=dim)
        a = rng.normal(size=(dim, dim))
        m = 0.5 * (a + a.T)
        spec = fc.QuadraticSurfaceSpec(p, m)
        w, v = np.linalg.eigh(spec.m)
        scale = fc.local_limit_curvature(fc.QuadraticSurfaceSpec(p, (v * np.abs(w)) @ v.T), desc)
        if abs(fc.local_limit_curvature(spec, desc)) >= min_ratio * scale:
            out.append(spec)
    return out


def _sweep_job(args):
    spec, desc, alphas = args
    return fc.stability_sweep(spec, desc, alphas)


def _pool_map(fn, jobs, workers: int):
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, jobs))


def scenario_stability(cfg: ExperimentConfig, frames) -> ScenarioResult:
    desc = cfg.norm()
    alphas = sorted(cfg.get("scenario", "alphas"))
    if len(alphas) < 2 or not all(0 < a < 1 for a in alphas):
        raise ConfigError(f"scenario.alphas needs at least two values in (0,1), got {alphas}")
    tol = cfg.get("scenario", "tolerance")
    specs = random_quadratic_specs(desc.dim, cfg.get("scenario", "n_specs"), cfg.get("scenario", "seed"), desc)
    sweeps = _pool_map(_sweep_job, [(s, desc, alphas) for s in specs], scheme.fft_workers())
    res = ScenarioResult(["spec", "alpha", "kappa", "limit", "rel_error"])
    worst_top = 0.0
    monotone = True
    for i, rows in enumerate(sweeps):
        for r in rows:
            res.rows.append([i, r.alpha, r.kappa, r.limit, r.rel_error])
        worst_top = max(worst_top, rows[-1].rel_error)
        monotone &= rows[-1].rel_error < rows[0].rel_error
    res.metrics.append(Metric(f"max_rel_error_at_{alphas[-1]!r}", worst_top, tol, worst_top <= tol))
    res.metrics.append(Metric("error_decreases", float(monotone), 1.0, monotone))
    return res


# ---------------------------------------------------------------------------
# threshold vs level-set cross-validation


def scenario_crossval(cfg: ExperimentConfig, frames) -> ScenarioResult:
    _require_2d(cfg, "crossval")
    _require_engine(cfg, ("both",), "crossval")
    g = cfg.forcing()
    d, params, conv = threshold_setup(cfg)
    spec = cfg.initial_set()
    pcells = cfg.get("scenario", "pde_cells") or d.cells
    pd = dom.Domain(2, d.extent, pcells, max(1, int(math.ceil(d.margin * pcells / d.cells))))
    f0, tab = pde_setup(cfg, spec, pd)
    dt = pde_dt(cfg, f0, tab, g)
    t_end = cfg.get("scenario", "t_end")
    n = int(round(t_end / params.h))
    n_s = cfg.get("scenario", "samples")
    keep = sorted({int(round(n * (k + 1) / n_s)) for k in range(n_s)} - {0})
    th = [(k, gr) for k, gr in threshold_states(scheme.init_phase(d, spec), conv, g, params, n, frames) if k in keep]
    pde = list(pde_states(f0, tab, g, [gr.time for _, gr in th], dt))
    bound = cfg.get("scenario", "factor") * (d.spacing + params.beta)
    res = ScenarioResult(["step", "t", "hausdorff", "bound"])
    worst = 0.0
    for (k, a), (_, b) in zip(th, pde):
        fa, fb = geometry.extract_front(a), geometry.extract_front(b)
        if fa.empty and fb.empty:
            dist = 0.0
        elif fa.empty or fb.empty:
            dist = math.inf
        else:
            dist = geometry.hausdorff(fa, fb)
        res.rows.append([k, a.time, dist, bound])
        worst = max(worst, dist)
    res.metrics.append(Metric("max_hausdorff", worst, bound, worst <= bound))
    return res


# ---------------------------------------------------------------------------
# anisotropy report


def midpoint_convexity_gap(desc, alpha: float, n_pairs: int, seed: int) -> float:
    """max of Phi((p+q)/2) - (Phi(p)+Phi(q))/2 over random pairs (<= 0 when convex)."""
    rng = np.random.default_rng(seed)
    worst = -math.inf
    for _ in range(n_pairs):
        p, q = rng.normal(size=(2, desc.dim))
        mid = anisotropy.mobility_norm_phi(desc, alpha, 0.5 * (p + q))
        avg = 0.5 * (anisotropy.mobility_norm_phi(desc, alpha, p) + anisotropy.mobility_norm_phi(desc, alpha, q))
        worst = max(worst, (mid - avg) / max(avg, 1e-300))
    return worst


def rotated_norm_ratios(desc, alpha: float, n: int) -> np.ndarray:
    """Phi(p) / N(-p2, p1) on ``n`` evenly spaced unit directions (2-D)."""
    ang = 2.0 * np.pi * (np.arange(n) + 0.5) / n
    p = np.column_stack([np.cos(ang), np.sin(ang)])
    phi = np.array([anisotropy.mobility_norm_phi(desc, alpha, v) for v in p])
    return phi / norms.norm_eval(desc, np.column_stack([-p[:, 1], p[:, 0]]))


def scenario_anisotropy_report(cfg: ExperimentConfig, frames) -> ScenarioResult:
    desc = cfg.norm()
    alpha = cfg.get("flow", "alpha")
    tab = direction_table(cfg)
    n = tab.dim
    head = [f"theta{i}" for i in range(n)] + ["mu"] + [f"A{i}{j}" for i in range(n) for j in range(n)] + ["phi"]
    res = ScenarioResult(head)
    for k in range(tab.n_dirs):
        res.rows.append([*tab.dirs[k], tab.mu[k], *tab.amat[k].ravel(), tab.phi[k]])
    gap = midpoint_convexity_gap(desc, alpha, cfg.get("scenario", "n_pairs"), cfg.get("scenario", "seed"))
    res.metrics.append(Metric("midpoint_convexity_violation", gap, 1e-10, gap <= 1e-10))
    res.metrics.append(Metric("c_n_alpha", tab.c_n_alpha, None, True))
    res.metrics.append(Metric("lambda", tab.lam, None, True))
    if n == 2:
        ratios = rotated_norm_ratios(desc, alpha, cfg.get("scenario", "n_ratio"))
        cv = float(np.std(ratios) / np.mean(ratios))
        res.metrics.append(Metric("phi_over_rotated_norm_cv", cv, 1e-8, cv <= 1e-8))
        res.metrics.append(Metric("phi_over_rotated_norm", float(np.mean(ratios)), None, True))
        res.metrics.append(Metric("lambda_over_4", anisotropy.char_constant_2d(alpha), None, True))
    return res


SCENARIOS = {
    "shrink_circle": scenario_shrink_circle,
    "ball_speed": scenario_ball_speed,
    "wulff": scenario_wulff,
    "convexity": scenario_convexity,
    "splitting": scenario_splitting,
    "distance": scenario_distance,
    "stability": scenario_stability,
    "crossval": scenario_crossval,
    "anisotropy_report": scenario_anisotropy_report,
}


def run_scenario(name: str, cfg: ExperimentConfig, outdir) -> tuple[int, ScenarioResult]:
    """Run a scenario and write its outputs; returns (exit code, result)."""
    if name not in SCENARIOS:
        raise ConfigError(f"unknown scenario {name!r}; expected one of {tuple(SCENARIOS)}")
    out = Path(outdir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ScenarioError(f"cannot create output directory {out}: {exc}") from exc
    frames = FrameWriter(out, cfg.get("output", "formats"), cfg.get("output", "cadence"))
    result = SCENARIOS[name](cfg, frames)
    write_series(result, out / "series.csv")
    write_summary(result, out / "summary.csv")
    return (0 if result.passed else 1), result
