"""Monte-Carlo simulation of the TML Hawkes process and its special cases.

Paths are generated with the cluster (branching) construction: immigrants
arrive as a Poisson process of rate lambda0 and every event has a
Poisson(alpha) number of children delayed by independent kernel draws.
Children falling beyond the horizon are dropped before recursing, which is
exact because a child's own offspring are later still.

Replication ``i`` of master seed ``m`` always draws from the Philox stream
keyed by ``(m, i)``, so histograms do not depend on how replications are
split between worker processes (set ``HPTML_WORKERS``).
"""

from __future__ import annotations

import math
import os
from bisect import bisect_right
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import special as sc

from .kernels import (
    MAX_SHIFT,
    Exponential,
    HawkesParams,
    KernelSpec,
    NoKernel,
    kernel_cdf,
    kernel_density,
    kernel_tail_rate,
    tml_triple,
)

EVENT_CAP = 10_000_000
WORKERS_ENV = "HPTML_WORKERS"
_U64 = 2**64


@dataclass(frozen=True)
class SeedSpec:
    """Master seed; replication ``i`` uses the stream keyed by (master_seed, i)."""

    master_seed: int

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < _U64:
            raise ValueError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")

    def rng(self, replication: int) -> np.random.Generator:
        if not 0 <= replication < _U64:
            raise ValueError(f"replication index out of range: {replication}")
        key = np.array([self.master_seed, replication], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def derive(self, *labels: int) -> "SeedSpec":
        """Independent child seed, e.g. one per experiment cell."""
        ss = np.random.SeedSequence([int(self.master_seed), *map(int, labels)])
        return SeedSpec(int(ss.generate_state(1, np.uint64)[0]))


@dataclass(frozen=True)
class EventSequence:
    """Sorted event times on (0, horizon] with the number of children each event drew.

    ``offspring`` counts all children drawn, including those past the horizon,
    so its mean estimates the branching ratio.
    """

    horizon: float
    times: np.ndarray
    offspring: np.ndarray = field(default=None)

    def __len__(self):
        return len(self.times)


# ---------------------------------------------------------------- sampling


class _TableSampler:
    """Inverse-CDF sampler for a TML-type kernel.

    The CDF is tabulated on log-spaced nodes and interpolated by cubic
    Hermite polynomials in x = log t, using t * density as the exact slope;
    each uniform is inverted by a few clipped Newton steps on the cubic.
    Below the table F(t) ~ gamma t^beta / Gamma(beta + 1); above it the
    tail is continued exponentially (nu > 0) or as a power law (nu = 0).
    """

    LOW_P = 1e-10
    HIGH_Q = 1e-10
    STEP = 0.025
    MIN_NODES = 512
    T_CAP = 1e30

    def __init__(self, spec: KernelSpec):
        beta, nu, gamma = tml_triple(spec)
        self.spec = spec
        self.beta, self.nu, self.gamma = beta, nu, gamma
        self.rate = kernel_tail_rate(spec) if nu > 0 else 0.0
        self._lead = math.lgamma(beta + 1.0) - math.log(gamma)
        t_lo = math.exp((math.log(self.LOW_P) + self._lead) / beta)
        t_hi = max(1.0, t_lo)
        t_cap = self.T_CAP if nu == 0 else min(self.T_CAP, 0.5 * MAX_SHIFT / nu)
        while t_hi < t_cap and kernel_cdf(spec, t_hi) < 1.0 - self.HIGH_Q:
            t_hi = min(4.0 * t_hi, t_cap)
        x_lo, x_hi = math.log(t_lo), math.log(t_hi)
        n = max(self.MIN_NODES, int(math.ceil((x_hi - x_lo) / self.STEP)) + 1)
        self.x = np.linspace(x_lo, x_hi, n)
        t = np.exp(self.x)
        f = np.array([kernel_cdf(spec, ti) for ti in t])
        self.F = np.maximum.accumulate(f)
        self.dF = np.array([kernel_density(spec, ti) * ti for ti in t])
        self.h = self.x[1] - self.x[0]
        self.t_lo, self.t_hi = t_lo, t_hi
        self.coef = self._coefficients()
        self._F_list = self.F.tolist()
        self._coef_list = self.coef.tolist()

    def _coefficients(self) -> np.ndarray:
        # cubic Hermite on each interval as c0 + c1 s + c2 s^2 + c3 s^3, s in [0, 1]
        f0, f1 = self.F[:-1], self.F[1:]
        m0, m1 = self.dF[:-1] * self.h, self.dF[1:] * self.h
        c2 = 3 * (f1 - f0) - 2 * m0 - m1
        c3 = 2 * (f0 - f1) + m0 + m1
        return np.stack([f0, m0, c2, c3], axis=1)

    def quantile_one(self, u: float) -> float:
        # same arithmetic as quantile(), on floats; numpy per-call overhead
        # dominates for the handful of children a typical event has
        if u < self._F_list[0]:
            if u <= 0.0:
                return 0.0
            return math.exp((math.log(u) + self._lead) / self.beta)
        if u >= self._F_list[-1]:
            q_hi = 1.0 - self._F_list[-1]
            q = max(1.0 - u, 1e-300)
            if self.rate > 0:
                return self.t_hi + math.log(q_hi / q) / self.rate
            return self.t_hi * (q_hi / q) ** (1.0 / self.beta)
        i = min(max(bisect_right(self._F_list, u) - 1, 0), len(self._F_list) - 2)
        c0, c1, c2, c3 = self._coef_list[i]
        span = self._F_list[i + 1] - c0
        s = (u - c0) / span if span > 0 else 0.5
        for _ in range(6):
            val = c0 + s * (c1 + s * (c2 + s * c3))
            der = c1 + s * (2 * c2 + 3 * s * c3)
            if der > 0:
                s = min(max(s - (val - u) / der, 0.0), 1.0)
        return math.exp(self.x[i] + s * self.h)

    def quantile(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.size <= 16:
            return np.array([self.quantile_one(v) for v in u.ravel().tolist()]).reshape(u.shape)
        out = np.empty_like(u)
        lo = u < self.F[0]
        hi = u >= self.F[-1]
        mid = ~(lo | hi)
        if lo.any():
            with np.errstate(divide="ignore"):
                out[lo] = np.exp((np.log(u[lo]) + self._lead) / self.beta)
        if hi.any():
            q_hi = 1.0 - self.F[-1]
            q = np.maximum(1.0 - u[hi], 1e-300)
            if self.rate > 0:
                out[hi] = self.t_hi + np.log(q_hi / q) / self.rate
            else:
                out[hi] = self.t_hi * (q_hi / q) ** (1.0 / self.beta)
        if mid.any():
            um = u[mid]
            i = np.clip(np.searchsorted(self.F, um, side="right") - 1, 0, len(self.F) - 2)
            c0, c1, c2, c3 = self.coef[i].T
            span = self.F[i + 1] - c0
            s = np.where(span > 0, (um - c0) / np.where(span > 0, span, 1.0), 0.5)
            for _ in range(6):
                val = c0 + s * (c1 + s * (c2 + s * c3))
                der = c1 + s * (2 * c2 + 3 * s * c3)
                step = (val - um) / np.where(der > 0, der, np.inf)
                s = np.minimum(np.maximum(s - step, 0.0), 1.0)
            out[mid] = np.exp(self.x[i] + s * self.h)
        return out


@lru_cache(maxsize=32)
def _sampler(spec: KernelSpec) -> _TableSampler:
    return _TableSampler(spec)


def kernel_quantile(spec: KernelSpec, u):
    """Inverse kernel CDF at probabilities ``u`` in [0, 1)."""
    u = np.asarray(u, dtype=float)
    if isinstance(spec, NoKernel):
        raise ValueError("NoKernel has no delay distribution")
    if isinstance(spec, Exponential):
        out = -np.log1p(-u) / spec.gamma
    else:
        out = _sampler(spec).quantile(np.atleast_1d(u)).reshape(u.shape)
    return out[()] if out.ndim == 0 else out


def sample_kernel_delay(spec: KernelSpec, rng: np.random.Generator, size=None):
    """Kernel-distributed delays by inverse transform of uniforms from ``rng``."""
    return kernel_quantile(spec, rng.random(size))


# ---------------------------------------------------------------- paths


def _effective_alpha(params: HawkesParams, spec: KernelSpec) -> float:
    return 0.0 if isinstance(spec, NoKernel) else params.alpha


def _check_run(params, spec, T, allow_supercritical):
    if not T > 0:
        raise ValueError(f"horizon must be positive, got {T!r}")
    if _effective_alpha(params, spec) >= 1 and not allow_supercritical:
        raise ValueError("alpha >= 1 is supercritical; pass allow_supercritical=True to simulate")


def _cluster(params, spec, T, rng, event_cap, keep_offspring):
    alpha = _effective_alpha(params, spec)
    n_imm = rng.poisson(params.lambda0 * T)
    gen = T * rng.random(n_imm)
    times, kids = [gen], []
    total = n_imm
    while gen.size and alpha > 0:
        k = rng.poisson(alpha, gen.size)
        kids.append(k)
        n_kids = int(k.sum())
        if n_kids == 0:
            gen = gen[:0]
            break
        delays = sample_kernel_delay(spec, rng, n_kids)
        child = np.repeat(gen, k) + delays
        gen = child[child <= T]
        total += gen.size
        if total > event_cap:
            raise RuntimeError(f"event cap {event_cap} exceeded; the process is exploding")
        times.append(gen)
    if not keep_offspring:
        return total, None, None
    t_all = np.concatenate(times)
    k_all = np.zeros(t_all.size, dtype=np.int64)
    if kids:
        k_cat = np.concatenate(kids)
        k_all[: k_cat.size] = k_cat
    order = np.argsort(t_all, kind="stable")
    return total, t_all[order], k_all[order]


def simulate_cluster(
    params: HawkesParams,
    spec: KernelSpec,
    T: float,
    seed: SeedSpec,
    replication: int = 0,
    event_cap: int = EVENT_CAP,
    allow_supercritical: bool = False,
) -> EventSequence:
    """One path on (0, T] by the branching construction."""
    T = float(T)
    _check_run(params, spec, T, allow_supercritical)
    _, times, kids = _cluster(params, spec, T, seed.rng(replication), event_cap, True)
    return EventSequence(T, times, kids)


def simulate_thinning(
    params: HawkesParams,
    spec: KernelSpec,
    T: float,
    seed: SeedSpec,
    replication: int = 0,
    event_cap: int = EVENT_CAP,
) -> EventSequence:
    """One path by Ogata thinning; only bounded, non-increasing kernels qualify.

    Between events the exponential excitation decays, so the intensity just
    after the current time bounds it until the next candidate.
    """
    if not isinstance(spec, (Exponential, NoKernel)):
        raise ValueError("thinning needs a bounded kernel: Exponential or NoKernel")
    T = float(T)
    _check_run(params, spec, T, False)
    rng = seed.rng(replication)
    alpha = _effective_alpha(params, spec)
    g = spec.gamma if isinstance(spec, Exponential) else 0.0
    base = params.lambda0
    s, excite = 0.0, 0.0
    out = []
    while True:
        bound = base + excite
        w = rng.exponential(1.0 / bound)
        s += w
        if s > T:
            break
        excite *= math.exp(-g * w)
        if rng.random() * bound <= base + excite:
            out.append(s)
            excite += alpha * g
            if len(out) > event_cap:
                raise RuntimeError(f"event cap {event_cap} exceeded; the process is exploding")
    return EventSequence(T, np.array(out))


# ---------------------------------------------------------------- histograms


@dataclass(frozen=True)
class CountHistogram:
    """Frequencies of N(t) over ``n_runs`` replications; ``freq[n]`` counts paths with n events."""

    t: float
    freq: tuple

    @property
    def n_runs(self) -> int:
        return int(sum(self.freq))

    @property
    def counts(self) -> dict:
        return {n: f for n, f in enumerate(self.freq) if f}

    def pmf(self) -> np.ndarray:
        return np.asarray(self.freq, dtype=float) / self.n_runs

    @property
    def mean(self) -> float:
        return float(np.dot(np.arange(len(self.freq)), self.freq) / self.n_runs)

    @property
    def std_error_of_mean(self) -> float:
        n = np.arange(len(self.freq))
        m = self.mean
        var = float(np.dot((n - m) ** 2, self.freq)) / max(self.n_runs - 1, 1)
        return math.sqrt(var / self.n_runs)

    @classmethod
    def from_counts(cls, t: float, counts) -> "CountHistogram":
        counts = np.asarray(counts, dtype=np.int64)
        freq = np.bincount(counts) if counts.size else np.zeros(1, dtype=np.int64)
        return cls(float(t), tuple(int(f) for f in freq))


def _workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    return max(1, n)


def _count_block(args):
    params, spec, t, seed, start, stop, event_cap = args
    out = np.empty(stop - start, dtype=np.int64)
    for j, rep in enumerate(range(start, stop)):
        try:
            out[j] = _cluster(params, spec, t, seed.rng(rep), event_cap, False)[0]
        except Exception as exc:
            raise RuntimeError(f"replication {rep} failed: {exc}") from exc
    return out


def simulate_counts(
    params: HawkesParams,
    spec: KernelSpec,
    t: float,
    n_runs: int,
    seed: SeedSpec,
    event_cap: int = EVENT_CAP,
    workers: int | None = None,
) -> np.ndarray:
    """N(t) for replications 0..n_runs-1, in replication order."""
    t = float(t)
    _check_run(params, spec, t, False)
    workers = workers or _workers()
    if workers == 1 or n_runs < 1000:
        return _count_block((params, spec, t, seed, 0, n_runs, event_cap))
    edges = np.linspace(0, n_runs, 4 * workers + 1).astype(int)
    jobs = [(params, spec, t, seed, a, b, event_cap) for a, b in zip(edges[:-1], edges[1:])]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return np.concatenate(list(pool.map(_count_block, jobs)))


def count_distribution(
    params: HawkesParams,
    spec: KernelSpec,
    t: float,
    n_runs: int,
    seed: SeedSpec,
    workers: int | None = None,
) -> CountHistogram:
    """Monte-Carlo histogram of N(t) from ``n_runs`` cluster simulations."""
    if n_runs < 100:
        raise ValueError(f"n_runs must be at least 100, got {n_runs}")
    counts = simulate_counts(params, spec, t, n_runs, seed, workers=workers)
    return CountHistogram.from_counts(t, counts)


def tv_distance(h1, h2) -> float:
    """Total-variation distance between two count distributions.

    Each argument is a :class:`CountHistogram` or a probability vector
    indexed by count.
    """
    if isinstance(h1, CountHistogram) and isinstance(h2, CountHistogram):
        if not math.isclose(h1.t, h2.t, rel_tol=1e-12):
            raise ValueError(f"histograms at different times: {h1.t} vs {h2.t}")
    p = h1.pmf() if isinstance(h1, CountHistogram) else np.asarray(h1, dtype=float)
    q = h2.pmf() if isinstance(h2, CountHistogram) else np.asarray(h2, dtype=float)
    n = max(p.size, q.size)
    p = np.pad(p, (0, n - p.size))
    q = np.pad(q, (0, n - q.size))
    return float(min(1.0, 0.5 * np.abs(p - q).sum()))


def poisson_pmf(mean: float, n_max: int) -> np.ndarray:
    """Poisson probabilities for 0..n_max."""
    n = np.arange(n_max + 1)
    return np.exp(n * math.log(mean) - mean - sc.gammaln(n + 1)) if mean > 0 else (n == 0) * 1.0
