"""Command-line front end: one subcommand per experiment.

Every run writes a CSV table (stdout, or --out) and a flat JSON metadata record
(version, seed, parameters, wall time) next to it, or on stderr without --out.
A key=value config file given with --config supplies defaults; flags override it.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__

GOLDEN = (math.sqrt(5) - 1) / 2
THREADS_ENV = "QELAB_THREADS"


def floats(text: str) -> list[float]:
    return [float(x) for x in str(text).split(",") if x.strip()]


def ints(text: str) -> list[int]:
    return [int(float(x)) for x in str(text).split(",") if x.strip()]


def count(text: str) -> int:
    """Integer that may be written as 1e6."""
    v = float(text)
    if v != int(v):
        raise argparse.ArgumentTypeError(f"{text} is not an integer")
    return int(v)


@dataclass
class Command:
    name: str
    help: str
    args: list  # (flag, kwargs)
    validate: Callable
    run: Callable
    seeded: bool = False


@dataclass
class ExperimentConfig:
    command: str
    params: dict
    out: Path | None
    fmt: str = "csv"
    seed: int | None = None
    extra: dict = field(default_factory=dict)


# ---------------------------------------------------------------- subcommands

def _mushroom(a):
    from .billiard import MushroomParams
    return MushroomParams(a.r1, a.r2, a.t)


def v_billiard_fractions(a):
    if a.samples < 1000:
        raise ValueError("need at least 1e3 samples")
    return _mushroom(a)


def r_billiard_fractions(a, p):
    from .billiard import liouville_fractions, monte_carlo_fractions
    d = liouville_fractions(p).d
    mc = monte_carlo_fractions(p, a.samples, a.seed)
    z = (mc.d_hat - d) / mc.stderr
    return ["d", "d_hat", "stderr", "samples", "z"], [[d, mc.d_hat, mc.stderr, mc.n_samples, z]], {}


def v_billiard_orbit(a):
    p = _mushroom(a)
    if a.bounces < 1:
        raise ValueError("bounces must be positive")
    nv = math.hypot(a.vx, a.vy)
    if nv == 0:
        raise ValueError("direction must be nonzero")
    from .billiard import PhasePoint
    return p, PhasePoint((a.x, a.y), (a.vx / nv, a.vy / nv))


def r_billiard_orbit(a, prep):
    from .billiard import classify_initial_condition, simulate_orbits
    p, pt = prep
    label = classify_initial_condition(pt, p)
    tr = simulate_orbits(np.array([pt.x]), np.array([pt.v]), p, a.bounces)
    rows = [[i + 1, tr.x[i, 0, 0], tr.x[i, 0, 1], tr.v[i, 0, 0], tr.v[i, 0, 1], tr.tau[i, 0], int(tr.wall[i, 0])]
            for i in range(a.bounces)]
    return ["bounce", "x", "y", "vx", "vy", "flight_time", "wall"], rows, {
        "label": label.name, "degenerate": bool(tr.degenerate[0])}


def v_quasimode_count(a):
    if a.lam <= 0 or not 0 < a.eps < 1:
        raise ValueError("need lambda > 0 and eps in (0, 1)")
    return _mushroom(a)


def r_quasimode_count(a, p):
    from .quasimodes import count_quasi_eigenvalues
    r = count_quasi_eigenvalues(p, a.lam, a.eps)
    rel = (r.coefficient - r.closed_form) / r.closed_form
    return ["lambda", "eps", "count", "count_over_lambda2", "closed_form", "relative_gap"], \
        [[r.lam, r.eps, r.count, r.coefficient, r.closed_form, rel]], {}


def v_quasimode_residual(a):
    from .quasimodes import make_spec
    return [make_spec(n, a.k, a.r1, a.r2, a.eps) for n in ints(a.n)]


def r_quasimode_residual(a, specs):
    from .quasimodes import quasimode_residual
    rows = []
    for s in specs:
        r = quasimode_residual(s)
        rows.append([s.n, a.k, s.alpha, r.quasi_eigenvalue, r.residual, r.relative, int(s.admissible)])
    return ["n", "k", "alpha", "quasi_eigenvalue", "residual", "relative_residual", "admissible"], rows, {}


def v_quasimode_gram(a):
    from .quasimodes import make_spec, quasi_eigen_family
    p = _mushroom(a)
    ns, ks, _ = quasi_eigen_family(p, a.lam, a.eps)
    if ns.size > a.max_size:
        raise ValueError(f"{ns.size} quasimodes exceed --max-size {a.max_size}")
    return [make_spec(int(n), int(k), a.r1, a.r2, a.eps) for n, k in zip(ns, ks)]


def r_quasimode_gram(a, specs):
    from .quasimodes import gram_matrix
    G = gram_matrix(specs)
    rows = [[i, j, specs[i].n, specs[i].zero.k, specs[j].n, specs[j].zero.k, G[i, j]]
            for i in range(len(specs)) for j in range(i, len(specs))]
    off = np.abs(G - np.eye(len(specs))).max(initial=0.0)
    return ["i", "j", "n_i", "k_i", "n_j", "k_j", "overlap"], rows, {"max_deviation_from_identity": float(off)}


def v_grid(a):
    from .grid import rasterize
    return rasterize(_mushroom(a), a.h)


def r_grid_spectrum(a, dom):
    from .grid import lowest_eigenvalues
    s = lowest_eigenvalues(dom, a.N, seed=a.seed)
    rows = [[i + 1, e, r] for i, (e, r) in enumerate(zip(s.eigenvalues, s.residual_bounds))]
    return ["index", "eigenvalue", "residual"], rows, {"solver": s.solver, "unknowns": s.n_unknowns}


def v_weyl(a):
    lams = floats(a.lambdas)
    if any(l * a.h >= 0.3 for l in lams):
        raise ValueError("lambda h must stay below 0.3")
    return v_grid(a), lams


def r_weyl(a, prep):
    from .grid import lowest_eigenvalues, weyl_deficit
    dom, lams = prep
    s = lowest_eigenvalues(dom, a.N, seed=a.seed)
    p = _mushroom(a)
    rows = []
    for lam in lams:
        w = weyl_deficit(s, p, lam)
        rows.append([lam, w.N_count, w.weyl_main, w.relative_gap])
    return ["lambda", "count", "weyl_main", "relative_gap"], rows, {"solver": s.solver}


def v_branches(a):
    from .billiard import MushroomParams
    from .grid import rasterize
    ps = [MushroomParams(a.r1, a.r2, t) for t in floats(a.ts)]
    for p in ps:
        rasterize(p, a.h)
    return ps


def r_branches(a, ps):
    from .grid import eigenvalue_branches
    tab = eigenvalue_branches(ps, a.N, h_grid=a.h, seed=a.seed, tolerance=a.tolerance)
    head = ["branch"] + [f"E_t{t:g}" for t in tab.ts] + ["monotone"]
    rows = [[j + 1] + list(tab.eigenvalues[:, j]) + [int(tab.monotone[j])] for j in range(a.N)]
    return head, rows, {"all_monotone": bool(tab.monotone.all())}


def v_kam(a):
    from .circle_kam import CircleMap
    return CircleMap.standard(a.theta, a.eps, K=a.K)


def r_kam(a, f):
    from .circle_kam import contraction_exponent, kam_iterate
    r = kam_iterate(f, max_iter=a.max_iter, target=a.target, mode=a.mode)
    tr = r.trace
    rows = [[i, tr.eps[i], tr.defect[i], tr.lam[i], tr.sigma[i], tr.grid[i]] for i in range(len(tr.eps))]
    return ["iteration", "eps", "defect", "lam", "sigma", "grid"], rows, {
        "converged": r.converged, "iterations": r.iterations, "defect": r.defect,
        "exponent": contraction_exponent(tr.eps), "reason": r.reason}


def v_homological(a):
    omega = np.array(floats(a.omega))
    if omega.size < 1:
        raise ValueError("omega must be nonempty")
    if not a.tau > omega.size - 1:
        raise ValueError("need tau > n - 1")
    return omega


def r_homological(a, omega):
    from .torus import (FrequencyVector, apply_regularized, apply_transport, diophantine_margin,
                        regularized_denominator, solve_homological)
    from .fourier import TorusFourier
    kappa = diophantine_margin(omega, a.K, a.tau)
    if kappa <= 0:
        raise ValueError("omega is resonant on the truncation")
    w = FrequencyVector(omega, kappa, a.tau)
    rng = np.random.default_rng(a.seed)
    shape = (2 * a.K + 1,) * omega.size
    c = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    c = 0.5 * (c + np.conj(c[(slice(None, None, -1),) * omega.size]))
    c[(a.K,) * omega.size] = 0
    f = TorusFourier(c)
    u = solve_homological(f, w)
    N = 4 * a.K + 4
    ref = np.abs(f.to_grid(N)).max()
    plug = np.abs((apply_transport(u, w) - f).to_grid(N)).max() / ref
    reg = np.abs((apply_regularized(u, w) - f).coeffs).max()
    worst = math.inf
    for _ in range(a.sweep):
        n = int(rng.integers(2, 4))
        ww = FrequencyVector(rng.uniform(-2, 2, n), float(rng.uniform(0.01, 1)), n - 1 + float(rng.uniform(0.1, 2)))
        k = rng.integers(-6, 7, n)
        if not k.any():
            continue
        worst = min(worst, abs(regularized_denominator(ww, k)) * np.abs(k).sum() ** ww.tau / ww.kappa)
    return ["K", "kappa", "tau", "plug_back_relative", "regularized_residual", "denominator_min_ratio"], \
        [[a.K, kappa, a.tau, plug, reg, worst]], {}


def v_fourier(a):
    if not 0 < a.rho < 1:
        raise ValueError("rho must lie in (0, 1)")
    if not 0 < a.sigma_frac < 1 or not 0 < a.delta_frac < 1:
        raise ValueError("fractions must lie in (0, 1)")
    Ks = ints(a.K)
    if max(Ks) * 2 > a.K_store:
        raise ValueError("--K-store must be at least twice the largest K")
    return Ks


def r_fourier(a, Ks):
    from .torus import fourier_decay_check, geometric_series, truncate_with_bound
    s_star = math.log(1 / a.rho) / (2 * math.pi)
    f = geometric_series(a.rho, 1, a.K_store, sigma=a.sigma_frac * s_star)
    rows = []
    for K in Ks:
        r = truncate_with_bound(f, K, a.delta_frac * f.decay[0])
        rows.append(["truncation", K, r.tail_sup, r.bound, int(r.holds)])
    g = geometric_series(a.rho, 1, a.K_store)
    for label, s in (("decay_exact", s_star - 1e-6), ("decay_inflated", a.inflate * s_star)):
        rows.append([label, s, math.nan, math.nan, int(fourier_decay_check(g, s))])
    return ["check", "parameter", "measured", "bound", "holds"], rows, {"sigma_exact": s_star}


def v_measure(a):
    if not a.tau > a.n - 1:
        raise ValueError("need tau > n - 1")
    if a.samples < 1:
        raise ValueError("samples must be positive")
    return floats(a.kappas)


def r_measure(a, kappas):
    from .torus import diophantine_measure
    r = diophantine_measure(kappas, a.tau, a.n, a.K, a.samples, a.seed)
    rows = [[k, b, s] for k, b, s in zip(r.kappas, r.bad_fraction, r.std_error)]
    return ["kappa", "bad_fraction", "stderr"], rows, {"fit_slope": r.fit_slope}


def v_lattice(a):
    from .torus import ActionLattice, Ball
    c = np.array(floats(a.center))
    m = np.array(ints(a.maslov)) if a.maslov else np.zeros(c.size, int)
    if m.size != c.size:
        raise ValueError("maslov vector must match the dimension")
    if a.radius <= 0:
        raise ValueError("radius must be positive")
    return [ActionLattice(Ball(c, a.radius), h, a.L, m) for h in floats(a.h)]


def r_lattice(a, lats):
    from .torus import quasi_lattice, scaling_exponent
    rows, counts = [], []
    for lat in lats:
        r = quasi_lattice(lat)
        counts.append(r.count)
        rows.append([lat.h, r.count, r.scaled_count, r.phase_volume, (r.scaled_count - r.phase_volume) / r.phase_volume])
    meta = {"exponent": scaling_exponent([l.h for l in lats], counts) if len(lats) > 1 else math.nan}
    return ["h", "count", "scaled_count", "phase_volume", "relative_gap"], rows, meta


def v_flow(a):
    from .flow import FlowConfig
    return FlowConfig(n_lines=a.lines, density=a.density, d=a.d, B=a.B, Q_minus=a.Q_minus, Q_plus=a.Q_plus,
                      M_cap=a.M_cap, eps_frac=a.eps_frac, width=a.width)


def r_flow(a, cfg):
    from .flow import occupancy, synth_flow
    rows = []
    for s in range(a.seed, a.seed + a.seeds):
        rep = occupancy(synth_flow(cfg, s), cfg.window_config(), np.linspace(cfg.t1, cfg.t2, a.t_points))
        rows.append([s, rep.mean_fast, rep.sup_fast, rep.mechanism_bound, int(rep.mechanism_holds),
                     rep.mean_ratio, rep.min_ratio, rep.t_star if rep.t_star is not None else math.nan])
    return ["seed", "mean_fast", "sup_fast", "mechanism_bound", "mechanism_holds", "mean_ratio", "min_ratio",
            "t_star"], rows, {"d_target": cfg.d}


def v_density(a):
    hs = ints(a.horizons)
    if min(hs) < 10:
        raise ValueError("horizons must be at least 10")
    if not 0 < a.d < 1 - a.bad_density + 1e-12:
        raise ValueError("d must not exceed the good-set density")
    return hs


def r_density(a, hs):
    from .flow import density_scenario
    rows = []
    for N in hs:
        r = density_scenario(N, seed=a.seed, bad_density=a.bad_density, d=a.d)
        rows.append([N, r.achieved_density, int(r.density_holds), int(r.limit_holds), int(r.hypotheses_hold), len(r.N)])
    return ["horizon", "achieved_density", "density_holds", "limit_holds", "hypotheses_hold", "cutovers"], rows, {}


MUSHROOM = [("--r1", dict(type=float, default=1.0)), ("--r2", dict(type=float, default=2.0)),
            ("--t", dict(type=float, default=1.0))]

COMMANDS = [
    Command("billiard-fractions", "closed-form vs Monte Carlo integrable fraction",
            MUSHROOM + [("--samples", dict(type=count, default=10 ** 6))],
            v_billiard_fractions, r_billiard_fractions, True),
    Command("billiard-orbit", "collision sequence of one orbit",
            MUSHROOM + [("--x", dict(type=float, default=1.2)), ("--y", dict(type=float, default=0.9)),
                        ("--vx", dict(type=float, default=-0.6)), ("--vy", dict(type=float, default=-0.8)),
                        ("--bounces", dict(type=count, default=20))],
            v_billiard_orbit, r_billiard_orbit),
    Command("quasimode-count", "quasi-eigenvalue count against the closed form",
            MUSHROOM + [("--lambda", dict(dest="lam", type=float, default=200.0)),
                        ("--eps", dict(type=float, default=0.01))],
            v_quasimode_count, r_quasimode_count),
    Command("quasimode-residual", "residual of the cut-off semidisk modes",
            MUSHROOM + [("--eps", dict(type=float, default=0.5)), ("--k", dict(type=count, default=1)),
                        ("--n", dict(default="50,100,200"))],
            v_quasimode_residual, r_quasimode_residual),
    Command("quasimode-gram", "Gram matrix of the quasimode family below lambda",
            MUSHROOM + [("--lambda", dict(dest="lam", type=float, default=10.0)),
                        ("--eps", dict(type=float, default=0.1)), ("--max-size", dict(type=count, default=400))],
            v_quasimode_gram, r_quasimode_gram),
    Command("grid-spectrum", "lowest Dirichlet eigenvalues on the raster",
            MUSHROOM + [("--h", dict(type=float, default=0.02)), ("--N", dict(type=count, default=50))],
            v_grid, r_grid_spectrum, True),
    Command("weyl-check", "eigenvalue counts against the Weyl term",
            MUSHROOM + [("--h", dict(type=float, default=0.01)), ("--N", dict(type=count, default=300)),
                        ("--lambdas", dict(default="15,20"))],
            v_weyl, r_weyl, True),
    Command("eigen-branches", "sorted eigenvalue branches over a t-grid",
            [("--r1", dict(type=float, default=1.0)), ("--r2", dict(type=float, default=2.0)),
             ("--ts", dict(default="0.5,0.75,1.0")), ("--h", dict(type=float, default=0.01)),
             ("--N", dict(type=count, default=100)), ("--tolerance", dict(type=float, default=1e-6))],
            v_branches, r_branches, True),
    Command("kam-circle", "KAM iteration for x + theta + eps sin(2 pi x)",
            [("--theta", dict(type=float, default=GOLDEN)), ("--eps", dict(type=float, default=1e-3)),
             ("--K", dict(type=count, default=8)), ("--max-iter", dict(type=count, default=6)),
             ("--target", dict(type=float, default=1e-10)),
             ("--mode", dict(choices=["offset", "rotation"], default="offset"))],
            v_kam, r_kam),
    Command("homological-solve", "plug-back residual and denominator sweep",
            [("--omega", dict(default=f"1,{GOLDEN!r}")), ("--tau", dict(type=float, default=1.5)),
             ("--K", dict(type=count, default=8)), ("--sweep", dict(type=count, default=10 ** 4))],
            v_homological, r_homological, True),
    Command("fourier-bounds", "truncation tails and coefficient decay for rho^|k|",
            [("--rho", dict(type=float, default=2 - math.sqrt(3))), ("--K", dict(default="10,20,40")),
             ("--K-store", dict(type=count, default=80)), ("--sigma-frac", dict(type=float, default=0.9)),
             ("--delta-frac", dict(type=float, default=0.9)), ("--inflate", dict(type=float, default=1.2))],
            v_fourier, r_fourier),
    Command("diophantine-measure", "Monte Carlo measure of non-Diophantine frequencies",
            [("--kappas", dict(default="0.04,0.02,0.01")), ("--tau", dict(type=float, default=1.5)),
             ("--n", dict(type=count, default=2)), ("--K", dict(type=count, default=20)),
             ("--samples", dict(type=count, default=10 ** 5))],
            v_measure, r_measure, True),
    Command("quasi-lattice", "lattice points near a ball of actions",
            [("--center", dict(default="0.5,0.5")), ("--radius", dict(type=float, default=0.3)),
             ("--h", dict(default="0.01,0.005,0.0025")), ("--L", dict(type=float, default=1.0)),
             ("--maslov", dict(default=""))],
            v_lattice, r_lattice),
    Command("flow-sim", "window occupancy of the synthetic eigenvalue flow",
            [("--lines", dict(type=count, default=1000)), ("--density", dict(type=float, default=100.0)),
             ("--d", dict(type=float, default=0.3)), ("--B", dict(type=float, default=0.2)),
             ("--Q-minus", dict(type=float, default=1.0)), ("--Q-plus", dict(type=float, default=1.1)),
             ("--M-cap", dict(type=float, default=2.0)), ("--eps-frac", dict(type=float, default=0.02)),
             ("--width", dict(type=float, default=1e-3)), ("--seeds", dict(type=count, default=1)),
             ("--t-points", dict(type=count, default=201))],
            v_flow, r_flow, True),
    Command("density-lemma", "full-density subsequence construction on finite horizons",
            [("--horizons", dict(default="10000,20000,40000")), ("--bad-density", dict(type=float, default=0.2)),
             ("--d", dict(type=float, default=0.78))],
            v_density, r_density, True),
]


# ---------------------------------------------------------------- plumbing

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qelab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for c in COMMANDS:
        sp = sub.add_parser(c.name, help=c.help, description=c.help)
        for flag, kw in c.args:
            sp.add_argument(flag, **kw)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", type=Path, default=None, help="CSV path; metadata goes to the .json sidecar")
        sp.add_argument("--config", type=Path, default=None, help="key=value defaults (flags override)")
        sp.add_argument("--threads", type=int, default=None, help=f"thread cap (default ${THREADS_ENV})")
        sp.add_argument("--dry-run", action="store_true", help="validate parameters and stop")
    return p


def read_config(path: Path) -> dict:
    out = {}
    for i, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{i}: expected key=value")
        k, v = line.split("=", 1)
        out[k.strip().lstrip("-").replace("-", "_")] = v.strip()
    return out


def _subparser(parser, name):
    for a in parser._actions:
        if isinstance(a, argparse._SubParsersAction):
            return a.choices[name]
    raise KeyError(name)


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def format_table(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, Path):
        return str(v)
    return v


def dispatch(cfg: ExperimentConfig, args, command: Command, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    t0 = time.perf_counter()
    try:
        prep = command.validate(args)
    except (ValueError, TypeError, ArithmeticError) as exc:
        print(f"qelab {command.name}: invalid parameters: {exc}", file=stderr)
        return 2
    if args.dry_run:
        print(f"qelab {command.name}: parameters ok", file=stderr)
        return 0
    try:
        with threadpool_limits(limits=args.threads):
            header, rows, extra = command.run(args, prep)
    except Exception as exc:  # module errors surface verbatim
        print(f"qelab {command.name}: {type(exc).__name__}: {exc}", file=stderr)
        return 1
    table = format_table(header, rows)
    meta = {"command": command.name, "version": __version__, "seed": cfg.seed,
            "wall_time_s": time.perf_counter() - t0, "threads": args.threads, "columns": ",".join(header)}
    meta.update({f"param_{k}": _jsonable(v) for k, v in cfg.params.items()})
    meta.update({k: _jsonable(v) for k, v in extra.items()})
    if cfg.out is None:
        stdout.write(table)
        print(json.dumps(meta, sort_keys=True), file=stderr)
    else:
        cfg.out.parent.mkdir(parents=True, exist_ok=True)
        cfg.out.write_text(table, encoding="utf-8")
        cfg.out.with_suffix(".json").write_text(json.dumps(meta, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return 0


def main(argv=None, stdout=None, stderr=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    # a config file only changes defaults, so peek at it before the real parse
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", type=Path)
    known, _ = pre.parse_known_args(argv)
    if known.config is not None and argv and not argv[0].startswith("-"):
        try:
            values = read_config(known.config)
            sp = _subparser(parser, argv[0])
        except (OSError, ValueError, KeyError) as exc:
            print(f"qelab: cannot use config: {exc}", file=stderr or sys.stderr)
            return 2
        dests = {a.dest for a in sp._actions}
        unknown = set(values) - dests
        if unknown:
            print(f"qelab: unknown config keys: {', '.join(sorted(unknown))}", file=stderr or sys.stderr)
            return 2
        sp.set_defaults(**values)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads is None and os.environ.get(THREADS_ENV):
        args.threads = int(os.environ[THREADS_ENV])
    command = next(c for c in COMMANDS if c.name == args.command)
    skip = {"command", "out", "config", "threads", "dry_run"}
    params = {k: v for k, v in vars(args).items() if k not in skip}
    cfg = ExperimentConfig(args.command, params, args.out, "csv", args.seed)
    return dispatch(cfg, args, command, stdout, stderr)


if __name__ == "__main__":
    sys.exit(main())
