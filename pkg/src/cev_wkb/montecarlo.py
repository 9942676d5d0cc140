"""Euler-Maruyama Monte Carlo for the CEV call, with antithetic variates.

Paths are simulated in fixed-size chunks of pairs.  Chunk ``c`` draws its
normals from a Philox counter-based generator keyed by ``(seed, c)``, step by
step, so every variate is a function of (seed, path index, step index) only.
Chunks may therefore run in any order or in parallel and the reduction, done
afterwards in path order, is bit-reproducible.

Path ordering: pair ``i`` contributes path ``2i`` (driven by ``+Z``) and path
``2i + 1`` (driven by ``-Z``).  Without antithetics, path ``j`` is the ``+Z``
member of pair ``j``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import CevParams, MarketSpec
from .errors import ParameterDomainError

CHUNK_PAIRS = 8192
THREADS_ENV = "CEV_WKB_THREADS"
DEFAULT_SEED = 20240607


@dataclass(frozen=True)
class McConfig:
    """Simulation size and discretization.

    ``n_pairs`` antithetic pairs give ``2 * n_pairs`` paths.  With
    ``antithetic=False`` the same number of paths is drawn independently.
    """

    n_pairs: int
    steps_per_year: int = 1000
    seed: int = DEFAULT_SEED
    antithetic: bool = True

    def __post_init__(self):
        if int(self.n_pairs) != self.n_pairs or self.n_pairs < 1:
            raise ParameterDomainError(f"n_pairs must be a positive integer, got {self.n_pairs!r}")
        if self.steps_per_year < 50:
            raise ParameterDomainError(f"steps_per_year must be >= 50, got {self.steps_per_year!r}")
        if not 0 <= self.seed < 2**64:
            raise ParameterDomainError("seed must fit in 64 unsigned bits")

    @property
    def n_paths(self) -> int:
        return 2 * self.n_pairs


@dataclass(frozen=True)
class McEstimate:
    """Discounted-payoff estimate.

    ``std_error`` is built from antithetic pair averages (or from single
    paths when antithetics are off); ``path_std_error`` always treats paths
    as independent samples.
    """

    mean: float
    std_error: float
    n_effective: int
    absorbed_fraction: float
    path_std_error: float = float("nan")


def n_steps(T: float, steps_per_year: int) -> int:
    """``ceil(T * steps_per_year)``, robust to representation error in ``T``."""
    return max(1, math.ceil(T * steps_per_year - 1e-9))


def _generator(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.array([seed, chunk], dtype=np.uint64)))


def _simulate_chunk(m, p, n_steps_, dt, seed, chunk, n_used, antithetic):
    """Terminal prices of the first ``n_used`` pairs of ``chunk``.

    The full chunk of normals is always drawn so that a pair's variates do
    not depend on how many pairs are in use.
    """
    rng = _generator(seed, chunk)
    z_full = np.empty(CHUNK_PAIRS)
    z = z_full[:n_used]
    growth = 1.0 + p.mu * dt
    vol = p.sigma * math.sqrt(dt)
    power = p.alpha + 1.0
    plus = np.full(n_used, float(m.s0))
    minus = plus.copy() if antithetic else None
    tmp = np.empty(n_used)
    for _ in range(n_steps_):
        rng.standard_normal(out=z_full)
        for s, sign in ((plus, vol), (minus, -vol)):
            if s is None:
                continue
            np.power(s, power, out=tmp)
            tmp *= s > 0.0          # absorbed paths stay at zero (alpha = -1 gives s**0 = 1)
            tmp *= z
            tmp *= sign
            s *= growth
            s += tmp
            np.maximum(s, 0.0, out=s)
    if antithetic:
        out = np.empty(2 * n_used)
        out[0::2] = plus
        out[1::2] = minus
        return out
    return plus


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
    n = int(raw)
    if n < 0:
        raise ParameterDomainError(f"{THREADS_ENV} must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)


def simulate_terminal(m: MarketSpec, p: CevParams, c: McConfig) -> np.ndarray:
    """Terminal prices of all ``2 * n_pairs`` paths, in path order."""
    N = n_steps(m.maturity, c.steps_per_year)
    dt = m.maturity / N
    # Without antithetics each path consumes the +Z stream of its own pair index.
    n_streams = c.n_pairs if c.antithetic else c.n_paths
    n_chunks = -(-n_streams // CHUNK_PAIRS)
    jobs = [(k, min(CHUNK_PAIRS, n_streams - k * CHUNK_PAIRS)) for k in range(n_chunks)]

    def run(job):
        k, used = job
        return _simulate_chunk(m, p, N, dt, c.seed, k, used, c.antithetic)

    workers = min(_threads(), len(jobs))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(j) for j in jobs]
    return np.concatenate(parts)


def _summarize(disc_payoff: np.ndarray, absorbed: np.ndarray, antithetic: bool) -> McEstimate:
    n = disc_payoff.size
    mean = float(np.sum(disc_payoff) / n)
    path_se = float(np.std(disc_payoff, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    if antithetic:
        pairs = n // 2
        avg = 0.5 * (disc_payoff[0:2 * pairs:2] + disc_payoff[1:2 * pairs:2])
        se = float(np.std(avg, ddof=1) / math.sqrt(pairs)) if pairs > 1 else 0.0
    else:
        se = path_se
    return McEstimate(mean=mean, std_error=se, n_effective=n,
                      absorbed_fraction=float(np.count_nonzero(absorbed) / n),
                      path_std_error=path_se)


def discounted_payoffs(m: MarketSpec, p: CevParams, c: McConfig):
    """Per-path discounted call payoffs and the absorbed-path mask."""
    s_T = simulate_terminal(m, p, c)
    disc = math.exp(-m.rate * m.maturity)
    return disc * np.maximum(s_T - m.strike, 0.0), s_T <= 0.0


def mc_call_price(m: MarketSpec, p: CevParams, c: McConfig) -> McEstimate:
    """Monte Carlo estimate of ``e^{-rT} E[max(S_T - E, 0)]``.

    Paths follow ``S <- S + mu S dt + sigma S**(alpha+1) sqrt(dt) Z`` with
    ``dt = T / ceil(T * steps_per_year)``; a path reaching ``S <= 0`` is
    absorbed at 0 and pays nothing.
    """
    pay, absorbed = discounted_payoffs(m, p, c)
    return _summarize(pay, absorbed, c.antithetic)


def mc_convergence_curve(m: MarketSpec, p: CevParams, c: McConfig, checkpoints):
    """Running estimates ``(n_paths, mean, std_error)`` from one path stream.

    The estimate at checkpoint ``k`` uses exactly the first ``k`` paths; the
    final checkpoint at ``2 * n_pairs`` reproduces :func:`mc_call_price`.
    """
    ks = [int(k) for k in checkpoints]
    if any(k < 1 for k in ks) or any(b <= a for a, b in zip(ks, ks[1:])):
        raise ParameterDomainError("checkpoints must be positive and strictly ascending")
    if ks and ks[-1] > c.n_paths:
        raise ParameterDomainError(f"last checkpoint {ks[-1]} exceeds {c.n_paths} paths")
    pay, absorbed = discounted_payoffs(m, p, c)
    rows = []
    for k in ks:
        est = _summarize(pay[:k], absorbed[:k], c.antithetic)
        rows.append((k, est.mean, est.std_error))
    return rows
