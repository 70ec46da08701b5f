"""Adaptive componentwise random-walk Metropolis sampling.

Each iteration sweeps the coordinates once, proposing a Gaussian move per
coordinate. Proposal scales adapt during burn-in by Robbins-Monro steps
toward a target acceptance rate and are frozen afterwards, so the kept
draws come from a fixed (valid) kernel. Chains own independent named RNG
streams and are therefore runnable in parallel and bit-reproducible.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, SamplerError
from .seeding import rng_stream

_LOG_SCALE_BOUND = 12.0


@dataclass(frozen=True)
class SamplerConfig:
    seed: int
    chains: int = 4
    iterations: int = 20000
    burn_in: int = 5000
    adapt_window: int = 50
    target_acceptance: float = 0.234
    initial_scale: float = 1.0

    def __post_init__(self):
        if self.chains < 1:
            raise DataError("chains must be >= 1")
        if not 0 <= self.burn_in < self.iterations:
            raise DataError("burn_in must satisfy 0 <= burn_in < iterations")
        if not 0 < self.target_acceptance < 1:
            raise DataError("target_acceptance must lie in (0, 1)")
        if self.adapt_window < 1:
            raise DataError("adapt_window must be >= 1")

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "chains": self.chains,
            "iterations": self.iterations,
            "burn_in": self.burn_in,
            "adapt_window": self.adapt_window,
            "target_acceptance": self.target_acceptance,
            "initial_scale": self.initial_scale,
        }


@dataclass
class PosteriorChain:
    """Kept (post burn-in) draws of one chain plus sampling metadata."""

    draws: np.ndarray
    acceptance_rate: float
    proposal_scales: np.ndarray
    chain_index: int
    seed: int
    iterations: int
    burn_in: int

    @property
    def kept(self) -> int:
        return self.draws.shape[0]

    @property
    def dim(self) -> int:
        return self.draws.shape[1]


class DensityTarget:
    """Adapter exposing a plain log-density callable to run_chain."""

    def __init__(self, log_density_fn, dim: int):
        self._fn = log_density_fn
        self.dim = dim

    def log_density(self, theta: np.ndarray) -> float:
        return float(self._fn(theta))


class _GenericEvaluator:
    """Coordinate evaluator that recomputes the full log density per move."""

    def __init__(self, target):
        self._target = target
        self.dim = target.dim

    def reset(self, theta: np.ndarray) -> None:
        self._theta = np.array(theta, dtype=np.float64)
        self.log_density_value = self._target.log_density(self._theta)
        self._pending = None

    def propose(self, j: int, new_value: float) -> float:
        old = self._theta[j]
        self._theta[j] = new_value
        logp = self._target.log_density(self._theta)
        self._theta[j] = old
        self._pending = (j, new_value, logp)
        return logp

    def accept(self) -> None:
        j, value, logp = self._pending
        self._theta[j] = value
        self.log_density_value = logp
        self._pending = None

    def reject(self) -> None:
        self._pending = None


def run_chain(target, config: SamplerConfig, chain_index: int) -> PosteriorChain:
    """Run one adaptive random-walk Metropolis chain.

    ``target`` needs ``dim`` and ``log_density(theta)``; a
    ``coordinate_evaluator()`` method (see LogisticModel) enables the
    incremental fast path. The chain starts at theta = 0.
    """
    d = target.dim
    rng = rng_stream(config.seed, "chain", chain_index)
    if hasattr(target, "coordinate_evaluator"):
        evaluator = target.coordinate_evaluator()
    else:
        evaluator = _GenericEvaluator(target)

    theta = np.zeros(d)
    evaluator.reset(theta)
    if not math.isfinite(evaluator.log_density_value):
        raise SamplerError("log density is not finite at the initial state")

    log_scales = np.full(d, math.log(config.initial_scale))
    scales = np.exp(log_scales)
    window = config.adapt_window
    n_windows = -(-config.iterations // window)
    kept = np.empty((config.iterations - config.burn_in, d))
    window_accepts = np.zeros(d)
    post_burnin_accepts = 0
    adapt_step = 0

    iteration = 0
    for w in range(n_windows):
        noise = rng.standard_normal((window, d))
        unifs = rng.random((window, d))
        rows = min(window, config.iterations - iteration)
        for r in range(rows):
            for j in range(d):
                proposal = theta[j] + scales[j] * noise[r, j]
                logp_new = evaluator.propose(j, proposal)
                u = unifs[r, j]
                if u <= 0.0 or math.log(u) < logp_new - evaluator.log_density_value:
                    evaluator.accept()
                    theta[j] = proposal
                    window_accepts[j] += 1
                    if iteration >= config.burn_in:
                        post_burnin_accepts += 1
                else:
                    evaluator.reject()
            if iteration >= config.burn_in:
                kept[iteration - config.burn_in] = theta
            iteration += 1

        if iteration <= config.burn_in:
            adapt_step += 1
            rates = window_accepts / (rows * 1.0)
            step = min(1.0, 2.0 / math.sqrt(adapt_step))
            log_scales += (rates - config.target_acceptance) * step
            np.clip(log_scales, -_LOG_SCALE_BOUND, _LOG_SCALE_BOUND, out=log_scales)
            scales = np.exp(log_scales)
        window_accepts[:] = 0.0
        # resync cached state so float drift cannot accumulate
        evaluator.reset(theta)

    kept_iterations = config.iterations - config.burn_in
    acceptance_rate = post_burnin_accepts / (kept_iterations * d)
    return PosteriorChain(
        draws=kept,
        acceptance_rate=acceptance_rate,
        proposal_scales=scales,
        chain_index=chain_index,
        seed=config.seed,
        iterations=config.iterations,
        burn_in=config.burn_in,
    )


def run_chains(target, config: SamplerConfig, workers: int = 1) -> list[PosteriorChain]:
    """Run config.chains independent chains, optionally in parallel.

    Results are assembled in chain order regardless of completion order,
    so the output is identical for any worker count.
    """
    indices = list(range(config.chains))
    if workers <= 1 or config.chains == 1:
        return [run_chain(target, config, i) for i in indices]
    with ProcessPoolExecutor(max_workers=min(workers, config.chains)) as pool:
        return list(pool.map(run_chain, [target] * len(indices), [config] * len(indices), indices))


def pooled_draws(chains: list[PosteriorChain]) -> np.ndarray:
    """All kept draws stacked in chain order."""
    return np.vstack([c.draws for c in chains])


def thin_draws(chains: list[PosteriorChain], count: int) -> np.ndarray:
    """Evenly spaced draws across the pooled post burn-in draws.

    The count is split across chains (earlier chains absorb any
    remainder) and indices within each chain are evenly spaced, so the
    selection is deterministic and spans every chain.
    """
    if count <= 0:
        raise DataError(f"thin count must be positive, got {count}")
    total = sum(c.kept for c in chains)
    if count > total:
        raise DataError(f"thin count {count} exceeds {total} kept draws")
    n_chains = len(chains)
    base, rem = divmod(count, n_chains)
    out = []
    for i, chain in enumerate(chains):
        quota = base + (1 if i < rem else 0)
        if quota == 0:
            continue
        if quota > chain.kept:
            raise DataError(
                f"chain {i} has only {chain.kept} kept draws, needs {quota}"
            )
        idx = (np.arange(quota) * chain.kept) // quota
        out.append(chain.draws[idx])
    return np.vstack(out)


@dataclass
class ConvergenceReport:
    ess: np.ndarray
    rhat: np.ndarray
    n_chains: int
    n_kept: int
    rhat_threshold: float = 1.05
    ess_threshold: float = 400.0
    flags: list = field(default_factory=list)

    @property
    def flagged(self) -> bool:
        return bool(self.flags)

    def to_dict(self) -> dict:
        return {
            "ess": [float(v) for v in self.ess],
            "rhat": [float(v) for v in self.rhat],
            "n_chains": self.n_chains,
            "n_kept": self.n_kept,
            "rhat_threshold": self.rhat_threshold,
            "ess_threshold": self.ess_threshold,
            "flags": list(self.flags),
            "flagged": self.flagged,
        }


def _autocovariance(x: np.ndarray) -> np.ndarray:
    """Biased autocovariance of a 1-D sequence via FFT."""
    n = x.shape[0]
    centered = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(centered, size)
    acov = np.fft.irfft(f * np.conjugate(f), size)[:n].real
    return acov / n


def _split_sequences(chains: list[PosteriorChain], coord: int) -> np.ndarray:
    """Each chain's coordinate trace split in half: (2c, L//2) array."""
    halves = []
    for chain in chains:
        x = chain.draws[:, coord]
        half = x.shape[0] // 2
        halves.append(x[:half])
        halves.append(x[x.shape[0] - half:])
    return np.asarray(halves)


def _rhat_ess(sequences: np.ndarray) -> tuple[float, float]:
    m, n = sequences.shape
    means = sequences.mean(axis=1)
    variances = sequences.var(axis=1, ddof=1)
    w = float(variances.mean())
    b_over_n = float(means.var(ddof=1))
    var_plus = (n - 1) / n * w + b_over_n
    if w == 0.0:
        if var_plus == 0.0:  # every sequence stuck at the same constant
            return 1.0, float(m * n)
        return math.inf, 1.0  # sequences stuck at different constants
    rhat = math.sqrt(var_plus / w)

    acov = np.vstack([_autocovariance(sequences[i]) for i in range(m)])
    mean_acov = acov.mean(axis=0)
    rho = 1.0 - (w - mean_acov) / var_plus
    rho[0] = 1.0
    # Geyer initial monotone positive sequence over lag pairs
    tau = 0.0
    prev_pair = math.inf
    k = 0
    while 2 * k + 1 < n:
        pair = rho[2 * k] + rho[2 * k + 1]
        if pair <= 0.0:
            break
        pair = min(pair, prev_pair)
        tau += pair
        prev_pair = pair
        k += 1
    tau = max(2.0 * tau - 1.0, 1e-12)
    ess = m * n / tau
    return rhat, ess


def convergence(chains: list[PosteriorChain]) -> ConvergenceReport:
    """Split R-hat and effective sample size per coordinate.

    Flags any coordinate with R-hat above 1.05 or ESS below 400.
    """
    if len(chains) < 2:
        raise DataError("convergence diagnostics need at least 2 chains")
    kept = min(c.kept for c in chains)
    if kept < 10:
        raise DataError(f"need at least 10 kept draws per chain, got {kept}")
    d = chains[0].dim
    rhat = np.empty(d)
    ess = np.empty(d)
    flags = []
    for j in range(d):
        rhat[j], ess[j] = _rhat_ess(_split_sequences(chains, j))
        if rhat[j] > 1.05:
            flags.append(f"theta_{j}: rhat={rhat[j]:.4f} > 1.05")
        if ess[j] < 400.0:
            flags.append(f"theta_{j}: ess={ess[j]:.1f} < 400")
    return ConvergenceReport(
        ess=ess,
        rhat=rhat,
        n_chains=len(chains),
        n_kept=sum(c.kept for c in chains),
        flags=flags,
    )


def export_trace_csv(chains: list[PosteriorChain], path) -> None:
    """Write draws as CSV with columns chain, iteration, theta_0.."""
    d = chains[0].dim
    header = "chain,iteration," + ",".join(f"theta_{j}" for j in range(d))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for chain in chains:
            for i in range(chain.kept):
                row = ",".join(repr(float(v)) for v in chain.draws[i])
                fh.write(f"{chain.chain_index},{i},{row}\n")


def load_trace_csv(path) -> list[PosteriorChain]:
    """Rebuild chains from an export_trace_csv file (metadata reduced)."""
    data = np.genfromtxt(path, delimiter=",", skip_header=1)
    if data.ndim == 1:
        data = data.reshape(1, -1)
    chains = []
    for index in np.unique(data[:, 0]).astype(int):
        rows = data[data[:, 0] == index]
        order = np.argsort(rows[:, 1], kind="stable")
        draws = rows[order, 2:]
        chains.append(
            PosteriorChain(
                draws=draws,
                acceptance_rate=math.nan,
                proposal_scales=np.full(draws.shape[1], math.nan),
                chain_index=int(index),
                seed=-1,
                iterations=draws.shape[0],
                burn_in=0,
            )
        )
    return chains
