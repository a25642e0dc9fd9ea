"""Command-line front end.

Subcommands map one-to-one to the reproduction experiments: density / qss
(density curves), moments / variance (planar Monte Carlo vs analytics),
relay-det / relay-noise (the relay system), escape (exit times), and verify
(the self-check suite).  Every CSV starts with a provenance comment line
(# slidesde <version> seed=... config_sha256=...) and is byte-identical when
rerun with the same configuration, seed, and any thread count.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
import sys as _sys
from pathlib import Path

import click
import numpy as np
import tomli

from . import __version__
from .analytic import (
    QssDensity,
    TransitionDensity,
    flux_time_integrals,
    mean_escape_time,
    mean_y,
    q_function,
    q_function_quadrature,
    sliding_solution,
    steady_state_K,
    steady_state_pdf,
    variance_y_leading,
)
from .analytic.flux import FluxIntegrals
from .analytic.qss import K_series, sgn_mean_series, x_mean_series, xsgn_mean_series
from .core import canonical_relay_system, make_piecewise_linear
from .filippov import find_periodic_orbit, integrate_relay, write_trajectory_csv
from .montecarlo import (
    SimConfig,
    quartile_summary,
    run_planar_ensemble,
    run_relay_ensemble,
    variance_confidence_interval,
)
from .verify import full_checks, quick_checks

FULL_SCALE_PATHS = 1_000_000
FULL_SCALE_RELAY_RUNS = 1000
DESK_RELAY_RUNS = 200


def _load_config(path):
    if path is None:
        return {}
    with open(path, "rb") as fh:
        return tomli.load(fh)


def _config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_csv(path: Path, header, rows, ctx_info):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(
            f"# slidesde {__version__} cmd={ctx_info['cmd']} seed={ctx_info['seed']} "
            f"config_sha256={ctx_info['hash']}\n"
        )
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    click.echo(f"wrote {path}")


def _system_from_config(cfg: dict, defaults: dict):
    s = {**defaults, **cfg.get("system", {})}
    return make_piecewise_linear(
        s["a_L"], s["a_R"], s.get("b_L", 0.0), s.get("b_R", 0.0),
        s.get("c_L", 0.0), s.get("c_R", 0.0), s.get("d_L", 0.0), s.get("d_R", 0.0),
        epsilon=s["epsilon"], kappa=s.get("kappa", 0.0),
    )


def _sim_from_config(cfg: dict, seed, full_scale, defaults: dict) -> SimConfig:
    s = {**defaults, **cfg.get("sim", {})}
    n_paths = int(s.get("n_paths", 100_000))
    if full_scale:
        n_paths = max(n_paths, FULL_SCALE_PATHS)
    return SimConfig(
        dt=float(s.get("dt", 1e-4)),
        t_end=float(s.get("t_end", 1.0)),
        n_paths=n_paths,
        master_seed=int(seed if seed is not None else s.get("seed", 20120824)),
    )


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="TOML experiment configuration.")
@click.option("--seed", type=int, default=None, help="Master seed (overrides config).")
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("--out", "out_dir", type=click.Path(), default="out", show_default=True)
@click.option("--full-scale", is_flag=True,
              help="Restore the publication sample counts (1e6 paths / 1000 relay runs).")
@click.pass_context
def main(ctx, config_path, seed, threads, out_dir, full_scale):
    """Stochastically perturbed sliding motion: experiments and self-checks."""
    cfg = _load_config(config_path)
    ctx.obj = {
        "cfg": cfg,
        "seed": seed,
        "threads": threads,
        "out": Path(out_dir),
        "full_scale": full_scale,
        "hash": _config_hash(cfg),
    }


def _info(ctx, cmd, seed):
    return {"cmd": cmd, "seed": seed, "hash": ctx.obj["hash"]}


@main.command()
@click.pass_context
def density(ctx):
    """Transition-density slices p(x, t | x0) on a grid (four default times)."""
    cfg = ctx.obj["cfg"]
    d = cfg.get("density", {})
    sys_ = _system_from_config(cfg, {"a_L": 2.0, "a_R": 1.0, "epsilon": 0.01})
    eps = sys_.epsilon
    x0 = float(d.get("x0", 0.02))
    times = [float(t) for t in d.get("times", [eps / 20, eps / 2, eps, 10 * eps])]
    n_x = int(d.get("n_x", 241))
    td = TransitionDensity(sys_.a_L, sys_.a_R, eps)
    rows = []
    for t in times:
        lo, hi = td.support_interval(t, x0)
        xs = np.linspace(lo, hi, n_x)
        ps = td.pdf(xs, t, x0)
        norm = td.normalization(t, x0)
        for x, p in zip(xs, ps):
            rows.append([t, float(x), float(p), norm])
    _write_csv(ctx.obj["out"] / "density.csv", ["t", "x", "p", "slice_norm"], rows,
               _info(ctx, "density", "-"))


@main.command()
@click.pass_context
def qss(ctx):
    """Quasi-steady-state density curve and normalization constants."""
    cfg = ctx.obj["cfg"]
    d = cfg.get("qss", {})
    sys_ = _system_from_config(cfg, {"a_L": 2.0, "a_R": 1.0, "epsilon": 0.01})
    q = QssDensity(sys_)
    n_x = int(d.get("n_x", 241))
    xs = np.linspace(-q.truncation, q.truncation, n_x)
    rows = [[float(x), float(q.pdf(x))] for x in xs]
    _write_csv(ctx.obj["out"] / "qss.csv", ["x", "p_qss"], rows, _info(ctx, "qss", "-"))
    click.echo(f"K_eps = {q.K_eps!r}  K_series = {K_series(sys_)!r}  K0 = {steady_state_K(sys_)!r}")


@main.command()
@click.pass_context
def moments(ctx):
    """Analytic vs Monte Carlo stationary moments and mean of y."""
    cfg = ctx.obj["cfg"]
    sys_ = _system_from_config(cfg, {"a_L": 2.0, "a_R": 1.0, "b_L": 1.0, "b_R": 0.0, "epsilon": 0.01})
    sim = _sim_from_config(cfg, ctx.obj["seed"], ctx.obj["full_scale"],
                           {"dt": 2e-5, "t_end": 1.0, "n_paths": 100_000})
    res = run_planar_ensemble(sys_, sim, keep_final=True, threads=ctx.obj["threads"])
    x, y = res.x_final, res.y_final
    m = QssDensity(sys_).moments()
    n = x.size
    rows = []
    for name, ana, samp in (
        ("sgn_x", m.mean_sgn, np.sign(x)),
        ("x", m.mean_x, x),
        ("x_sgn_x", m.mean_xsgn, np.abs(x)),
        ("y", mean_y(sys_, 0.0, res.t_end), y),
    ):
        emp = float(samp.mean())
        se = float(samp.std() / math.sqrt(n))
        rows.append([name, ana, emp, se, (emp - ana) / se if se else 0.0])
    rows.append(["y_slide", sliding_solution(sys_, 0.0, res.t_end), "", "", ""])
    _write_csv(ctx.obj["out"] / "moments.csv",
               ["quantity", "analytic", "mc", "se", "z"], rows,
               _info(ctx, "moments", sim.master_seed))


@main.command()
@click.pass_context
def variance(ctx):
    """Fig-4-style table: Var(y) deviation from the leading law, with CIs, per (c,d) row."""
    cfg = ctx.obj["cfg"]
    v = cfg.get("variance", {})
    base = {"a_L": 2.0, "a_R": 1.0, "b_L": 1.0, "b_R": 0.0, "epsilon": 0.01, "kappa": 0.0}
    base.update(cfg.get("system", {}))
    rows_cfg = v.get("rows", [[0, 0, 0, 0], [1, 0, 0, 0], [0, 1, 0, 0],
                              [0, 0, 1, 0], [0, 0, 0, 1], [1, 1, 1, 1]])
    ci_level = float(v.get("ci_level", 0.95))
    sim = _sim_from_config(cfg, ctx.obj["seed"], ctx.obj["full_scale"],
                           {"dt": 1e-4, "t_end": 1.0, "n_paths": 100_000})
    out_rows = []
    for i, (cL, cR, dL, dR) in enumerate(rows_cfg):
        sys_ = make_piecewise_linear(
            base["a_L"], base["a_R"], base["b_L"], base["b_R"],
            float(cL), float(cR), float(dL), float(dR),
            epsilon=base["epsilon"], kappa=base["kappa"],
        )
        res = run_planar_ensemble(sys_, sim, ci_level=ci_level, threads=ctx.obj["threads"])
        theory = variance_y_leading(sys_, res.t_end)
        lo, hi = variance_confidence_interval(res.stats_y)
        out_rows.append([
            float(cL), float(cR), float(dL), float(dR),
            res.stats_y.variance, theory,
            res.stats_y.variance - theory, lo - theory, hi - theory,
        ])
    _write_csv(ctx.obj["out"] / "variance.csv",
               ["c_L", "c_R", "d_L", "d_R", "var_mc", "var_theory", "dev", "dev_lo", "dev_hi"],
               out_rows, _info(ctx, "variance", sim.master_seed))


@main.command("relay-det")
@click.option("--zeta", type=float, default=None, help="Relay parameter (default -0.06).")
@click.pass_context
def relay_det(ctx, zeta):
    """Deterministic relay orbit: trajectory CSV plus the periodic-orbit summary."""
    cfg = ctx.obj["cfg"]
    r = cfg.get("relay", {})
    zeta = float(zeta if zeta is not None else r.get("zeta", -0.06))
    x0 = [float(v) for v in r.get("x0", [0.05, 0.05, 0.05])]
    det = cfg.get("relay", {}).get("det", {})
    rs = canonical_relay_system(zeta)
    po = find_periodic_orbit(rs, x0, transient=float(det.get("transient", 120.0)),
                             tol=float(det.get("tol", 1e-9)))
    traj = integrate_relay(rs, po.section_state, po.period * 1.0001)
    out = ctx.obj["out"]
    out.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(
        traj, out / "relay_orbit.csv",
        header_lines=[
            f"slidesde {__version__} cmd=relay-det seed=- config_sha256={ctx.obj['hash']}",
            f"zeta={zeta!r} period={po.period!r} sliding_segments={po.sliding_segment_count} "
            f"closure_error={po.closure_error!r}",
        ],
    )
    click.echo(
        f"period = {po.period!r}, sliding segments per period = {po.sliding_segment_count}, "
        f"closure error = {po.closure_error:.3e}"
    )


@main.command("relay-noise")
@click.option("--zeta", type=float, default=None, help="Relay parameter (default -0.06).")
@click.pass_context
def relay_noise(ctx, zeta):
    """Oscillation-time quartiles of the noisy relay system over an epsilon grid."""
    cfg = ctx.obj["cfg"]
    r = cfg.get("relay", {})
    noise = r.get("noise", {})
    zeta = float(zeta if zeta is not None else r.get("zeta", -0.06))
    x0 = [float(v) for v in r.get("x0", [0.05, 0.05, 0.05])]
    eps_grid = [float(e) for e in noise.get(
        "eps_grid", [1e-5, 10**-4.5, 1e-4, 10**-3.5, 1e-3])]
    n_runs = int(noise.get("n_runs", DESK_RELAY_RUNS))
    if ctx.obj["full_scale"]:
        n_runs = max(n_runs, FULL_SCALE_RELAY_RUNS)
    debounce = int(noise.get("debounce_steps", 50))
    seed = int(ctx.obj["seed"] if ctx.obj["seed"] is not None else noise.get("seed", 20120824))
    sim = SimConfig(dt=float(noise.get("dt", 1e-4)), t_end=float(noise.get("t_end", 100.0)),
                    n_paths=n_runs, master_seed=seed)
    rs = canonical_relay_system(zeta)
    rows = []
    for gi, eps in enumerate(eps_grid):
        recs = run_relay_ensemble(rs, eps, sim, x0=x0, debounce_steps=debounce,
                                  threads=ctx.obj["threads"], path_offset=gi * n_runs)
        osc = [rec.oscillation_time for rec in recs if rec.times.size >= 3]
        q25, med, q75 = quartile_summary(osc)
        rows.append([eps, math.sqrt(eps), len(osc), q25, med, q75])
    _write_csv(ctx.obj["out"] / "relay_oscillation.csv",
               ["epsilon", "sqrt_epsilon", "n", "q25", "median", "q75"], rows,
               _info(ctx, "relay-noise", seed))


@main.command()
@click.pass_context
def escape(ctx):
    """Exact vs asymptotic mean escape times over an epsilon grid."""
    cfg = ctx.obj["cfg"]
    e = cfg.get("escape", {})
    base = {"a_L": 2.0, "a_R": 1.0, "epsilon": 0.05}
    base.update(cfg.get("system", {}))
    eps_grid = [float(v) for v in e.get("eps_grid", [0.2, 0.1, 0.05])]
    xb = float(e.get("x_b", 1.0))
    x0 = float(e.get("x0", 0.0))
    rows = []
    for eps in eps_grid:
        sys_ = make_piecewise_linear(
            base["a_L"], base["a_R"],
            c_L=base.get("c_L", 0.0), c_R=base.get("c_R", 0.0), epsilon=eps,
        )
        res = mean_escape_time(x0, sys_, xb=xb)
        if res.degenerate:
            rows.append([eps, res.exact, "", "", "degenerate"])
        else:
            rows.append([eps, res.exact, res.asymptotic, res.exact / res.asymptotic, ""])
    _write_csv(ctx.obj["out"] / "escape.csv",
               ["epsilon", "exact", "asymptotic", "ratio", "flag"], rows,
               _info(ctx, "escape", "-"))


@main.command()
@click.option("--quick", is_flag=True, help="Quadrature-only checks (no Monte Carlo).")
@click.pass_context
def verify(ctx, quick):
    """Run the self-verification suite and print one PASS/FAIL line per check."""
    checks = quick_checks() if quick else full_checks(threads=ctx.obj["threads"])
    rows = []
    failed = 0
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        click.echo(f"[{status}] {c.name}: {c.detail}")
        rows.append([status, c.name, c.detail])
        failed += not c.passed
    _write_csv(ctx.obj["out"] / "verify_report.csv", ["status", "check", "detail"], rows,
               _info(ctx, "verify", "-"))
    if failed:
        click.echo(f"{failed} check(s) failed", err=True)
        _sys.exit(1)
    click.echo(f"all {len(checks)} checks passed")


if __name__ == "__main__":
    main()
