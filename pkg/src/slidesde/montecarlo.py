"""Euler-Maruyama ensembles, streaming statistics, and the oscillation-time experiment.

Reproducibility contract: every path owns counter-based Philox streams keyed by
(master_seed, path_index, purpose); paths are processed in fixed-size batches
and chunks, and batch statistics are merged in path order.  Results are
therefore byte-identical for any worker count.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import ndtri

from ._kernels import debounce_series, planar_chunk, relay_chunk
from .analytic.qss import QssDensity
from .core import PiecewiseLinearSystem, RelaySystem
from .errors import EmptySample, InsufficientOscillations, TooFewSamples

__all__ = [
    "SimConfig",
    "EnsembleStats",
    "PlanarEnsembleResult",
    "OscillationRecord",
    "em_step_planar",
    "run_planar_ensemble",
    "variance_confidence_interval",
    "run_relay_ensemble",
    "oscillation_time",
    "sign_change_times",
    "quartile_summary",
]

BATCH_PATHS = 4096
CHUNK_STEPS = 4096
_STREAM_INIT = 0
_STREAM_X = 1
_STREAM_Y = 2
_MAX_EVENTS = 4096


def _path_generator(master_seed: int, path_index: int, stream: int) -> np.random.Generator:
    key = np.array([np.uint64(master_seed), np.uint64((path_index << 2) | stream)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-4
    t_end: float = 1.0
    n_paths: int = 100_000
    master_seed: int = 20120824
    record_stride: int = 1

    def __post_init__(self):
        if self.dt <= 0 or self.t_end <= 0:
            raise ValueError("need dt > 0 and t_end > 0")
        if self.n_paths < 1:
            raise ValueError("need n_paths >= 1")
        if self.record_stride < 1:
            raise ValueError("need record_stride >= 1")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    def warn_if_coarse(self, epsilon: float):
        if self.dt > epsilon:
            warnings.warn(
                f"dt={self.dt} exceeds epsilon={epsilon}; the discontinuity is under-resolved",
                stacklevel=2,
            )


@dataclass(frozen=True)
class EnsembleStats:
    """Streaming count/mean/M2; merge is the exact pairwise-update rule and is
    applied in fixed batch order for reproducibility."""

    n: int = 0
    mean: float = 0.0
    m2: float = 0.0
    ci_level: float = 0.95

    @property
    def variance(self) -> float:
        if self.n < 2:
            return float("nan")
        return self.m2 / (self.n - 1)

    @staticmethod
    def from_sample(values: np.ndarray, ci_level: float = 0.95) -> "EnsembleStats":
        values = np.asarray(values, dtype=float)
        n = values.size
        mean = float(values.mean()) if n else 0.0
        m2 = float(np.dot(values - mean, values - mean)) if n else 0.0
        return EnsembleStats(n=n, mean=mean, m2=m2, ci_level=ci_level)

    def merge(self, other: "EnsembleStats") -> "EnsembleStats":
        if self.n == 0:
            return replace(other, ci_level=self.ci_level)
        if other.n == 0:
            return self
        n = self.n + other.n
        delta = other.mean - self.mean
        mean = self.mean + delta * other.n / n
        m2 = self.m2 + other.m2 + delta * delta * self.n * other.n / n
        return EnsembleStats(n=n, mean=mean, m2=m2, ci_level=self.ci_level)


def variance_confidence_interval(stats: EnsembleStats) -> tuple[float, float]:
    """Normal-approximation CI for the variance: sigma^2 (1 +- z sqrt(2/(n-1)))."""
    if stats.n < 10_000:
        raise TooFewSamples(f"need n >= 10^4 for the normal-approximation CI, got {stats.n}")
    if not (0 <= stats.ci_level < 1):
        raise ValueError("ci_level must lie in [0, 1)")
    z = float(ndtri(0.5 + stats.ci_level / 2)) if stats.ci_level > 0 else 0.0
    hw = z * stats.variance * math.sqrt(2.0 / (stats.n - 1))
    return stats.variance - hw, stats.variance + hw


def em_step_planar(state, sys: PiecewiseLinearSystem, dt: float, noise) -> tuple[float, float]:
    """Single EM step (x, y) -> (x', y'); noise is the pair of standard normals."""
    x, y = state
    n1, n2 = noise
    x_new = x + sys.phi(x) * dt + math.sqrt(sys.epsilon * dt) * n1
    y_new = y + sys.psi(x) * dt + math.sqrt(sys.epsilon * sys.kappa * dt) * n2
    return x_new, y_new


@dataclass
class PlanarEnsembleResult:
    stats_y: EnsembleStats
    hist_counts: np.ndarray
    hist_edges: np.ndarray
    x_final: np.ndarray | None = None
    y_final: np.ndarray | None = None
    sgn_integral: np.ndarray | None = None
    x_snapshots: dict = field(default_factory=dict)
    t_end: float = 0.0


def _sample_initial_x(qd: QssDensity, path_indices, master_seed: int) -> np.ndarray:
    """Per-path stationary draws: branch choice + inverse CDF from each path's
    init stream; rejection rounds (c != 0) keep drawing from the same stream."""
    sys = qd.system
    eps, R = sys.epsilon, qd.truncation
    gens = [_path_generator(master_seed, int(i), _STREAM_INIT) for i in path_indices]
    u = np.array([g.uniform() for g in gens])
    wL, _ = qd.branch_masses()
    out = np.empty(u.size)
    left = u < wL
    for mask, a, c, sgn, w_branch, u_lo in (
        (left, sys.a_L, sys.c_L, -1.0, wL, 0.0),
        (~left, sys.a_R, sys.c_R, 1.0, 1.0 - wL, wL),
    ):
        idx = np.nonzero(mask)[0]
        if idx.size == 0:
            continue
        uu = (u[idx] - u_lo) / w_branch
        lam = (2 * a - max(c, 0.0) * R) / eps
        tail = 1.0 - math.exp(-lam * R)
        cand = -np.log1p(-uu * tail) / lam
        if c == 0.0:
            out[idx] = sgn * cand
            continue
        todo = idx
        while todo.size:
            log_acc = (c * cand * cand - max(c, 0.0) * R * cand) / eps
            acc_u = np.array([gens[i].uniform() for i in todo])
            acc = np.log(acc_u) < log_acc
            out[todo[acc]] = sgn * cand[acc]
            todo = todo[~acc]
            if todo.size:
                cand = -np.log1p(-np.array([gens[i].uniform() for i in todo]) * tail) / lam
    return out


def _run_planar_batch(sys, config, y0, init_x, qd, batch_start, batch_size,
                      record_steps, collect_sgn):
    eps = sys.epsilon
    dt = config.dt
    n_steps = config.n_steps
    idx = np.arange(batch_start, batch_start + batch_size)
    if init_x == "qss":
        x = _sample_initial_x(qd, idx, config.master_seed)
    else:
        x = np.full(batch_size, float(init_x))
    y = np.full(batch_size, float(y0))
    sgn_int = np.zeros(batch_size if collect_sgn else 1)
    sx = math.sqrt(eps * dt)
    sy = math.sqrt(eps * sys.kappa * dt)
    use_y_noise = sys.kappa > 0
    gens_x = [_path_generator(config.master_seed, int(i), _STREAM_X) for i in idx]
    gens_y = (
        [_path_generator(config.master_seed, int(i), _STREAM_Y) for i in idx]
        if use_y_noise
        else None
    )
    snapshots = {}
    done = 0
    noise_y = np.zeros((1, 1))
    while done < n_steps:
        k = min(CHUNK_STEPS, n_steps - done)
        noise_x = np.empty((batch_size, k))
        for i, g in enumerate(gens_x):
            noise_x[i] = g.standard_normal(k)
        if use_y_noise:
            noise_y = np.empty((batch_size, k))
            for i, g in enumerate(gens_y):
                noise_y[i] = g.standard_normal(k)
        stops = sorted({s - done for s in record_steps if done < s <= done + k} | {k})
        prev = 0
        for stop in stops:
            if stop > prev:
                planar_chunk(
                    x, y, sgn_int, noise_x[:, prev:stop], noise_y[:, prev:stop] if use_y_noise else noise_y,
                    sys.a_L, sys.a_R, sys.b_L, sys.b_R, sys.c_L, sys.c_R, sys.d_L, sys.d_R,
                    dt, sx, sy, use_y_noise, collect_sgn,
                )
            if (done + stop) in record_steps:
                snapshots[done + stop] = x.copy()
            prev = stop
        done += k
    return x, y, (sgn_int if collect_sgn else None), snapshots


def run_planar_ensemble(
    sys: PiecewiseLinearSystem,
    config: SimConfig,
    y0: float = 0.0,
    init_x="qss",
    threads: int = 1,
    hist_bins: int = 80,
    hist_range: tuple[float, float] | None = None,
    record_times=(),
    collect_sgn_integral: bool = False,
    keep_final: bool = False,
    ci_level: float = 0.95,
    truncation: float | None = None,
) -> PlanarEnsembleResult:
    """Evolve n_paths of the planar SDE; x(0) ~ quasi-steady state unless init_x is a number.

    Returns streaming statistics of y(t_end) and a histogram of x(t_end);
    optional extras: x snapshots at record_times, per-path integral of sgn(x),
    and the final per-path states.
    """
    config.warn_if_coarse(sys.epsilon)
    qd = QssDensity(sys, truncation=truncation) if init_x == "qss" else None
    eps = sys.epsilon
    if hist_range is None:
        hist_range = (-8 * eps / sys.a_L, 8 * eps / sys.a_R)
    hist_edges = np.linspace(hist_range[0], hist_range[1], hist_bins + 1)
    record_steps = {int(round(t / config.dt)) for t in record_times}
    if any(abs(s * config.dt - t) > 1e-9 for s, t in zip(sorted(record_steps), sorted(record_times))):
        raise ValueError("record_times must be multiples of dt")

    starts = list(range(0, config.n_paths, BATCH_PATHS))

    def work(start):
        size = min(BATCH_PATHS, config.n_paths - start)
        return _run_planar_batch(
            sys, config, y0, init_x, qd, start, size, record_steps,
            collect_sgn_integral,
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(work, starts))
    else:
        results = [work(s) for s in starts]

    stats = EnsembleStats(ci_level=ci_level)
    hist_counts = np.zeros(hist_bins, dtype=np.int64)
    xsif = []
    ysif = []
    sgns = []
    snaps: dict = {s: [] for s in record_steps}
    for x, y, sgn_int, snapshots in results:
        stats = stats.merge(EnsembleStats.from_sample(y, ci_level=ci_level))
        hist_counts += np.histogram(x, bins=hist_edges)[0]
        if keep_final:
            xsif.append(x)
            ysif.append(y)
        if collect_sgn_integral:
            sgns.append(sgn_int)
        for s, arr in snapshots.items():
            snaps[s].append(arr)

    return PlanarEnsembleResult(
        stats_y=stats,
        hist_counts=hist_counts,
        hist_edges=hist_edges,
        x_final=np.concatenate(xsif) if xsif else None,
        y_final=np.concatenate(ysif) if ysif else None,
        sgn_integral=np.concatenate(sgns) if sgns else None,
        x_snapshots={s * config.dt: np.concatenate(v) for s, v in snaps.items() if v},
        t_end=config.n_steps * config.dt,
    )


@dataclass(frozen=True)
class OscillationRecord:
    """Accepted sign-change times of x3 for one path."""

    times: np.ndarray

    @property
    def oscillation_time(self) -> float:
        """t3 - t1 over the last three accepted sign changes."""
        if self.times.size < 3:
            raise InsufficientOscillations(
                f"need >= 3 accepted sign changes, got {self.times.size}"
            )
        return float(self.times[-1] - self.times[-3])


def run_relay_ensemble(
    rs: RelaySystem,
    epsilon: float,
    config: SimConfig,
    x0=(0.05, 0.05, 0.05),
    debounce_steps: int = 50,
    threads: int = 1,
    path_offset: int = 0,
) -> list[OscillationRecord]:
    """Fixed-step EM for dx = (A x - B sgn(C^T x)) dt + sqrt(eps) B dW.

    No sliding projection: the noise (or, at eps = 0, the Euler chatter) handles
    the manifold.  Requires the canonical C = e1 so the compiled kernel can
    test the switching sign on the first component.
    """
    if epsilon < 0:
        raise ValueError("need epsilon >= 0")
    if not np.allclose(rs.C, [1.0, 0.0, 0.0]):
        raise ValueError("run_relay_ensemble requires C = e1 (canonical form)")
    n_steps = config.n_steps
    records = []
    starts = list(range(0, config.n_paths, BATCH_PATHS))

    def work(start):
        size = min(BATCH_PATHS, config.n_paths - start)
        idx = np.arange(start, start + size) + path_offset
        X = np.tile(np.asarray(x0, dtype=float), (size, 1))
        cur = np.full(size, int(np.sign(x0[2])), dtype=np.int8)
        cand = np.zeros(size, dtype=np.int8)
        cand_run = np.zeros(size, dtype=np.int64)
        cand_start = np.zeros(size)
        n_acc = np.zeros(size, dtype=np.int64)
        times = np.zeros((size, _MAX_EVENTS))
        gens = [_path_generator(config.master_seed, int(i), _STREAM_X) for i in idx]
        seps = math.sqrt(epsilon * config.dt)
        done = 0
        while done < n_steps:
            k = min(CHUNK_STEPS, n_steps - done)
            noise = np.empty((size, k))
            if epsilon > 0:
                for i, g in enumerate(gens):
                    noise[i] = g.standard_normal(k)
            else:
                noise[:] = 0.0
            relay_chunk(
                X, noise, rs.A, rs.B, config.dt, seps, done * config.dt,
                cur, cand, cand_run, cand_start, n_acc, times, _MAX_EVENTS,
                debounce_steps,
            )
            done += k
        return [times[i, : min(n_acc[i], _MAX_EVENTS)].copy() for i in range(size)]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            batches = list(ex.map(work, starts))
    else:
        batches = [work(s) for s in starts]
    for batch in batches:
        records.extend(OscillationRecord(times=t) for t in batch)
    return records


def sign_change_times(values, dt: float, debounce_steps: int = 50, t0: float = 0.0) -> np.ndarray:
    """Debounced sign-change times of a recorded series (offline route)."""
    values = np.ascontiguousarray(values, dtype=float)
    times = np.zeros(max(values.size, 1))
    n = debounce_series(values, dt, debounce_steps, times, t0)
    return times[:n].copy()


def oscillation_time(values, dt: float, debounce_steps: int = 50) -> float:
    """t3 - t1 over the last three accepted sign changes of the series."""
    t = sign_change_times(values, dt, debounce_steps)
    if t.size < 3:
        raise InsufficientOscillations(f"need >= 3 accepted sign changes, got {t.size}")
    return float(t[-1] - t[-3])


def quartile_summary(samples) -> tuple[float, float, float]:
    """Linear-interpolation quartiles (q25, median, q75)."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise EmptySample("no samples")
    q25, q50, q75 = np.quantile(samples, [0.25, 0.5, 0.75])
    return float(q25), float(q50), float(q75)
