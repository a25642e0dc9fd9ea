"""Self-verification suite: every closed form against an independent oracle.

The quick tier is quadrature-only; the full tier adds desk-scale Monte Carlo
cross-checks.  Each check returns a CheckResult; the CLI prints one line per
check and exits nonzero if any fail.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.stats import ks_2samp

from .analytic import (
    K_series,
    QssDensity,
    TransitionDensity,
    first_passage_density,
    first_passage_laplace,
    flux_time_integrals,
    lemma_flux,
    mean_escape_time,
    mean_y,
    q_function,
    q_function_quadrature,
    q_sum_series,
    sgn_autocorrelation_integral,
    sliding_solution,
    steady_state_K,
    steady_state_pdf,
    variance_y_leading,
)
from .analytic.flux import FluxIntegrals
from .analytic.qss import sgn_mean_series, x_mean_series, xsgn_mean_series
from .core import make_piecewise_linear
from .montecarlo import SimConfig, run_planar_ensemble, variance_confidence_interval

__all__ = ["CheckResult", "quick_checks", "full_checks"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _result(name, passed, detail):
    return CheckResult(name=name, passed=bool(passed), detail=detail)


# ---------------------------------------------------------------- quick tier


def check_q_oracle(points=((0.5, 2.0, 0.01), (0.1, 0.5, 0.02), (2.0, 1.0, 0.005))) -> CheckResult:
    worst = 0.0
    for t, a, eps in points:
        sys = make_piecewise_linear(2, 1, epsilon=eps)
        rel = abs(q_function(t, a, sys) / q_function_quadrature(t, a, sys) - 1)
        worst = max(worst, rel)
    return _result("q_function vs triple quadrature", worst < 1e-6, f"worst rel {worst:.2e}")


def check_q_series(t=0.7) -> CheckResult:
    resid = []
    for eps in (0.02, 0.01):
        sys = make_piecewise_linear(2, 1, epsilon=eps)
        s = (q_function(t, sys.a_L, sys) + q_function(t, sys.a_R, sys)) / eps
        resid.append(abs(s - q_sum_series(t, sys)) / eps**2)
    ratio_ok = 0.2 < resid[1] / resid[0] < 5.0 and resid[1] < 1.0
    return _result(
        "Q sum matches series to O(eps^2)", ratio_ok,
        f"resid/eps^2 = {resid[0]:.3f}, {resid[1]:.3f}",
    )


def check_lemma2(a_L=2.0, a_R=1.0, eps=0.02) -> CheckResult:
    td = TransitionDensity(a_L, a_R, eps)
    ints = flux_time_integrals(td)
    e0 = FluxIntegrals.expected_zeroth(a_L, a_R)
    e1 = FluxIntegrals.expected_first(a_L, a_R, eps)
    r0 = abs(ints.zeroth / e0 - 1)
    r1 = abs(ints.first / e1 - 1)
    return _result(
        f"Lemma 2 integrals ({a_L},{a_R}) eps={eps}", r0 < 1e-3 and r1 < 1e-3,
        f"rel {r0:.2e}, {r1:.2e}",
    )


def check_transition_normalization(eps=0.01, x0=0.02) -> CheckResult:
    td = TransitionDensity(2.0, 1.0, eps)
    worst = 0.0
    for t in (eps / 20, eps, 10 * eps):
        worst = max(worst, abs(td.normalization(t, x0) - 1.0))
    return _result("transition pdf normalization", worst < 1e-6, f"worst |norm-1| {worst:.2e}")


def check_transition_continuity(eps=0.01) -> CheckResult:
    td = TransitionDensity(2.0, 1.0, eps)
    worst = 0.0
    for t in (eps / 2, 10 * eps):
        pl = td.pdf(-1e-14, t, 0.02)
        pr = td.pdf(1e-14, t, 0.02)
        worst = max(worst, abs(pl - pr) / pr)
    return _result("transition pdf continuity at 0", worst < 1e-8, f"worst rel jump {worst:.2e}")


def check_laplace(eps=0.01) -> CheckResult:
    worst = 0.0
    for z, mu in ((-0.1, -2.0), (0.05, 1.0)):
        for lam in (0.5, 1.0, 2.0):
            num = quad(
                lambda t: math.exp(-lam * t) * first_passage_density(t, z, mu, eps),
                0, np.inf, epsabs=1e-12, epsrel=1e-10, limit=400,
            )[0]
            worst = max(worst, abs(num - first_passage_laplace(lam, z, mu, eps)))
    return _result("first-passage Laplace transform", worst < 1e-6, f"worst abs err {worst:.2e}")


def check_half_mass(eps=0.01) -> CheckResult:
    td = TransitionDensity(2.0, 1.0, eps)
    d1 = td.right_mass(1e-4) - 0.5
    d2 = td.right_mass(2.5e-5) - 0.5
    ok = abs(d2) < abs(d1) and abs(d2 / d1 - 0.5) < 0.15
    return _result(
        "right mass -> 1/2 as t -> 0 (sqrt-t rate)", ok, f"gaps {d1:.4f}, {d2:.4f}"
    )


def check_flux_identity(eps=0.01) -> CheckResult:
    td = TransitionDensity(2.0, 1.0, eps)
    worst = 0.0
    for t in (2e-3, 2e-2):
        dt = t * 1e-3
        dmdt = (td.right_mass(t + dt) - td.right_mass(t - dt)) / (2 * dt)
        f = lemma_flux(t, td)
        worst = max(worst, abs(f + dmdt) / max(abs(f), 1e-12))
    return _result("d/dt right mass = -flux", worst < 1e-4, f"worst rel {worst:.2e}")


def check_steady_state_limit(eps=0.01, x0=0.02) -> CheckResult:
    sys = make_piecewise_linear(2.0, 1.0, epsilon=eps)
    td = TransitionDensity(2.0, 1.0, eps)
    t = 10 * eps
    lo, hi = td.support_interval(t, x0)
    xs = np.linspace(lo, hi, 401)
    gap = float(np.max(np.abs(td.pdf(xs, t, x0) - steady_state_pdf(xs, sys))))
    bound = 1e-3 * steady_state_K(sys) / eps
    return _result("steady-state sup-norm gap at t=10eps", gap < bound, f"gap {gap:.3e} < {bound:.3e}")


def check_fokker_planck_residual(eps=0.01) -> CheckResult:
    """Residual of p_t + (phi p)_x - (eps/2) p_xx, finite-differenced off x=0,
    must shrink like h^2 under refinement."""
    td = TransitionDensity(2.0, 1.0, eps)
    sys = make_piecewise_linear(2.0, 1.0, epsilon=eps)
    t = 2 * eps
    x_pts = np.array([-2.5 * eps, 1.5 * eps])

    def residual(h, ht):
        xs = np.concatenate([x_pts + k * h for k in (-1, 0, 1)])
        p_mid = td.pdf(xs, t, 0.0)
        p_lo = td.pdf(xs, t - ht, 0.0)
        p_hi = td.pdf(xs, t + ht, 0.0)
        n = x_pts.size
        pm, p0, pp = p_mid[:n], p_mid[n : 2 * n], p_mid[2 * n :]
        dpdt = (p_hi[n : 2 * n] - p_lo[n : 2 * n]) / (2 * ht)
        phim = sys.phi(x_pts - h) * pm
        phip = sys.phi(x_pts + h) * pp
        dphip = (phip - phim) / (2 * h)
        d2p = (pp - 2 * p0 + pm) / (h * h)
        return dpdt + dphip - 0.5 * eps * d2p

    r1 = residual(eps / 10, eps / 20)
    r2 = residual(eps / 20, eps / 40)
    ratios = np.abs(r1) / np.maximum(np.abs(r2), 1e-300)
    ok = np.all(ratios > 2.5)
    return _result(
        "Fokker-Planck residual O(h^2)", bool(ok), f"refinement ratios {np.round(ratios, 2)}"
    )


def check_qss_normalization() -> CheckResult:
    sys = make_piecewise_linear(2, 1, c_L=1.0, c_R=1.0, epsilon=0.01)
    q = QssDensity(sys)
    gap = abs(q.normalization_check() - 1.0)
    return _result("qss density normalized", gap < 1e-8, f"|norm-1| {gap:.2e}")


def check_K_series() -> CheckResult:
    resid = []
    for eps in (0.02, 0.01):
        sys = make_piecewise_linear(2, 1, c_L=1.0, c_R=1.0, epsilon=eps)
        q = QssDensity(sys)
        resid.append(abs(q.K_eps - K_series(sys)))
    ratio = resid[0] / resid[1]
    ok = resid[1] < 7e-5 and 3.0 < ratio < 5.5
    return _result(
        "K_eps matches series to O(eps^2)", ok,
        f"resid {resid[0]:.2e}, {resid[1]:.2e} (ratio {ratio:.2f})",
    )


def check_qss_moments_series() -> CheckResult:
    sys = make_piecewise_linear(2, 1, c_L=1.0, c_R=1.0, epsilon=0.01)
    m = QssDensity(sys).moments()
    eps2 = sys.epsilon**2
    ok = (
        abs(m.mean_sgn - sgn_mean_series(sys)) < 5 * eps2
        and abs(m.mean_x - x_mean_series(sys)) < 5 * eps2
        and abs(m.mean_xsgn - xsgn_mean_series(sys)) < 5 * eps2
    )
    return _result(
        "qss moments match eps-expansions", ok,
        f"resids {m.mean_sgn - sgn_mean_series(sys):.1e}, "
        f"{m.mean_x - x_mean_series(sys):.1e}, {m.mean_xsgn - xsgn_mean_series(sys):.1e}",
    )


def check_escape(eps_grid=(0.2, 0.1, 0.05)) -> CheckResult:
    gaps = []
    for eps in eps_grid:
        sys = make_piecewise_linear(2, 1, epsilon=eps)
        res = mean_escape_time(0.0, sys, xb=1.0)
        gaps.append(abs(res.exact / res.asymptotic - 1))
    ok = gaps[-1] < 0.25 and all(b <= a for a, b in zip(gaps, gaps[1:]))
    return _result(
        "escape exact/asymptotic ratio improves", ok,
        "|ratio-1| = " + ", ".join(f"{g:.2e}" for g in gaps),
    )


def quick_checks() -> list[CheckResult]:
    return [
        check_q_oracle(),
        check_q_series(),
        check_lemma2(),
        check_transition_normalization(),
        check_transition_continuity(),
        check_laplace(),
        check_half_mass(),
        check_flux_identity(),
        check_steady_state_limit(),
        check_fokker_planck_residual(),
        check_qss_normalization(),
        check_K_series(),
        check_qss_moments_series(),
        check_escape(),
    ]


# ----------------------------------------------------------------- full tier


def check_mc_stationarity(seed=20120824, threads=1) -> CheckResult:
    sys = make_piecewise_linear(2, 1, epsilon=0.01)
    cfg = SimConfig(dt=1e-4, t_end=1.0, n_paths=20000, master_seed=seed)
    res = run_planar_ensemble(sys, cfg, record_times=(0.1, 0.5, 1.0), threads=threads)
    a = res.x_snapshots[0.1]
    b = res.x_snapshots[1.0]
    stat = ks_2samp(a, b).statistic
    crit = 1.628 * math.sqrt((a.size + b.size) / (a.size * b.size))  # 99% level
    return _result("x(t) stationary under qss start (KS)", stat < crit, f"D {stat:.4f} < {crit:.4f}")


def check_mc_relaxation(seed=51, threads=1) -> CheckResult:
    sys = make_piecewise_linear(2, 1, epsilon=0.01)
    eps = sys.epsilon
    cfg = SimConfig(dt=1e-5, t_end=10 * eps, n_paths=40000, master_seed=seed)
    res = run_planar_ensemble(sys, cfg, init_x=5 * eps, keep_final=True, threads=threads)
    target = QssDensity(sys).moments().mean_x
    gap = abs(float(res.x_final.mean()) - target)
    return _result(
        "mean x relaxes to qss mean by t=10eps", gap < 0.1 * abs(target),
        f"|mean - {target:.4f}| = {gap:.2e}",
    )


def check_mc_moments(seed=77, threads=1) -> CheckResult:
    sys = make_piecewise_linear(2, 1, epsilon=0.01)
    cfg = SimConfig(dt=2e-5, t_end=0.1, n_paths=100_000, master_seed=seed)
    res = run_planar_ensemble(sys, cfg, keep_final=True, threads=threads)
    x = res.x_final
    m = QssDensity(sys).moments()
    n = x.size
    checks = []
    for emp, ana, sd in (
        (float(np.mean(np.sign(x))), m.mean_sgn, float(np.std(np.sign(x)))),
        (float(np.mean(x)), m.mean_x, float(np.std(x))),
        (float(np.mean(np.abs(x))), m.mean_xsgn, float(np.std(np.abs(x)))),
    ):
        checks.append(abs(emp - ana) / (sd / math.sqrt(n)))
    ok = all(c < 3 for c in checks)
    return _result(
        "empirical moments within 3 SE of qss", ok,
        "z = " + ", ".join(f"{c:.2f}" for c in checks),
    )


def check_mc_lemma3(seed=303, threads=1) -> CheckResult:
    sys = make_piecewise_linear(2, 1, epsilon=0.01)
    cfg = SimConfig(dt=2e-5, t_end=1.0, n_paths=50_000, master_seed=seed)
    res = run_planar_ensemble(sys, cfg, collect_sgn_integral=True, threads=threads)
    s2 = res.sgn_integral**2
    emp, se = float(s2.mean()), float(s2.std() / math.sqrt(s2.size))
    theory = sgn_autocorrelation_integral(sys, 1.0)
    z = abs(emp - theory) / se
    return _result("sgn autocorrelation integral (MC, 3 SE)", z < 3, f"z = {z:.2f}")


def check_mc_variance_row(seed=404, threads=1) -> CheckResult:
    sys = make_piecewise_linear(2, 1, 1, 0, epsilon=0.01, kappa=0.0)
    cfg = SimConfig(dt=1e-4, t_end=1.0, n_paths=50_000, master_seed=seed)
    res = run_planar_ensemble(sys, cfg, threads=threads)
    lo, hi = variance_confidence_interval(res.stats_y)
    theory = variance_y_leading(sys, 1.0)
    eps2 = sys.epsilon**2
    ok = (lo - theory) > -eps2 and (hi - theory) < eps2
    return _result(
        "Var(y) deviation CI within [-eps^2, eps^2]", ok,
        f"CI-theory = [{lo - theory:.2e}, {hi - theory:.2e}]",
    )


def check_mc_mean_y(seed=505, threads=1) -> CheckResult:
    sys = make_piecewise_linear(2, 1, 1, 0, c_R=1.0, epsilon=0.01)
    cfg = SimConfig(dt=2e-5, t_end=1.0, n_paths=50_000, master_seed=seed)
    res = run_planar_ensemble(sys, cfg, keep_final=True, threads=threads)
    y = res.y_final
    se = float(y.std() / math.sqrt(y.size))
    z = abs(float(y.mean()) - mean_y(sys, 0.0, 1.0)) / se
    z_slide = abs(float(y.mean()) - sliding_solution(sys, 0.0, 1.0)) / se
    return _result(
        "mean y matches O(eps) correction (3 SE)", z < 3 and z_slide > 3,
        f"z(mean_y) = {z:.2f}, z(sliding) = {z_slide:.2f}",
    )


def full_checks(threads: int = 1) -> list[CheckResult]:
    out = quick_checks()
    out.extend(
        [
            check_mc_stationarity(threads=threads),
            check_mc_relaxation(threads=threads),
            check_mc_moments(threads=threads),
            check_mc_lemma3(threads=threads),
            check_mc_variance_row(threads=threads),
            check_mc_mean_y(threads=threads),
        ]
    )
    return out
