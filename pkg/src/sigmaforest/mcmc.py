"""Metropolis chain on the t-marginal with exact conditional draws of s and T.

The chain is a Gaussian random walk on t with a single global step size,
adapted during burn-in toward 0.35 acceptance and frozen afterwards.
Every retained t is decorated with a fresh exact draw of s (Gaussian
given t) and of T (Wilson's algorithm), since both are exactly sampleable
given t.

RNG: numpy PCG64 seeded through SeedSequence; independent streams for
sweep cells are derived from a master seed via SeedSequence spawn keys
(see experiments.cell_seed).  The algorithm name is recorded in batch
metadata for reproducibility.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .forests import SpanningTree, sample_tree_wilson
from .graphs import AugmentedGraph
from .linalg import NumericalError
from .measure import log_density_t, sample_s_given_t

RNG_ALGORITHM = "numpy-PCG64/SeedSequence"
SMALL_EPS_THRESHOLD = 1e-3
SMALL_EPS_BURNIN_FACTOR = 10


class SamplerError(RuntimeError):
    """Chain failed: nonfinite initial density or degenerate acceptance."""


@dataclass(frozen=True)
class McmcConfig:
    step_size: float = 1.0
    n_samples: int = 10_000
    burn_in: int = 2_000
    thinning: int = 1
    seed: int = 0
    adapt: bool = True

    def __post_init__(self):
        if self.step_size <= 0:
            raise ValueError("step_size must be positive")
        if self.n_samples < 1 or self.burn_in < 0 or self.thinning < 1:
            raise ValueError("invalid chain lengths")


@dataclass
class SampleBatch:
    t: np.ndarray  # (n_samples, n)
    s: np.ndarray  # (n_samples, n)
    trees: list[SpanningTree]
    acceptance_rate: float
    iact: np.ndarray  # per t-coordinate
    config: McmcConfig
    step_size_final: float
    rng_algorithm: str = RNG_ALGORITHM

    def __len__(self) -> int:
        return self.t.shape[0]


def autocorrelation_time(x: np.ndarray) -> float:
    """Integrated autocorrelation time 1 + 2 sum rho_k, truncated at the
    first nonpositive autocorrelation."""
    x = np.asarray(x, dtype=float)
    n = x.size
    v = np.var(x)
    if v == 0 or n < 2:
        return 1.0
    xc = x - np.mean(x)
    # FFT autocovariance.
    nfft = int(2 ** np.ceil(np.log2(2 * n)))
    f = np.fft.rfft(xc, nfft)
    acov = np.fft.irfft(f * np.conj(f), nfft)[:n].real / n
    rho = acov / acov[0]
    tau = 1.0
    for k in range(1, n):
        if rho[k] <= 0:
            break
        tau += 2.0 * rho[k]
    return float(max(tau, 1.0))


def effective_sample_size(batch_or_array) -> np.ndarray:
    """Per-coordinate ESS n / (1 + 2 sum rho_k) of the t-chain (or a plain array)."""
    x = batch_or_array.t if isinstance(batch_or_array, SampleBatch) else np.asarray(batch_or_array, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if n < 100:
        raise ValueError("need at least 100 samples for an ESS estimate")
    return np.array([n / autocorrelation_time(x[:, k]) for k in range(x.shape[1])])


def _safe_log_density(ag: AugmentedGraph, t: np.ndarray) -> float:
    try:
        return log_density_t(ag, t)
    except NumericalError:
        return -np.inf


def run_chain(ag: AugmentedGraph, cfg: McmcConfig) -> SampleBatch:
    """Random-walk Metropolis on t targeting the t-marginal, decorated with (s, T)."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(cfg.seed)))
    n = ag.n
    burn_in = cfg.burn_in
    if ag.pinning.epsilon <= SMALL_EPS_THRESHOLD:
        # Soft zero mode at small epsilon: the t-field spreads over a
        # range of width ~ 2 log(1/eps), so give the walk time to cross it.
        burn_in *= SMALL_EPS_BURNIN_FACTOR

    t = np.zeros(n)
    logp = _safe_log_density(ag, t)
    if not np.isfinite(logp):
        raise SamplerError("log-density nonfinite at initialization")

    step = cfg.step_size
    target_accept = 0.35
    log_step = np.log(step)

    ts = np.empty((cfg.n_samples, n))
    ss = np.empty((cfg.n_samples, n))
    trees: list[SpanningTree] = []
    n_accept = 0
    n_post = 0
    total_steps = burn_in + cfg.n_samples * cfg.thinning
    retained = 0
    for k in range(total_steps):
        prop = t + step * rng.standard_normal(n)
        logp_prop = _safe_log_density(ag, prop)
        accept = np.log(rng.random()) < logp_prop - logp
        if accept:
            t, logp = prop, logp_prop
        if k < burn_in:
            if cfg.adapt:
                gamma = (k + 10) ** -0.6
                log_step += gamma * ((1.0 if accept else 0.0) - target_accept)
                step = float(np.exp(log_step))
        else:
            n_post += 1
            n_accept += 1 if accept else 0
            if (k - burn_in + 1) % cfg.thinning == 0 and retained < cfg.n_samples:
                ts[retained] = t
                ss[retained] = sample_s_given_t(ag, t, rng)
                trees.append(sample_tree_wilson(ag, t, rng))
                retained += 1

    acc_rate = n_accept / max(n_post, 1)
    if acc_rate < 0.01:
        raise SamplerError(f"acceptance rate {acc_rate:.4f} below 0.01 after adaptation")
    iact = np.array([autocorrelation_time(ts[:, j]) for j in range(n)])
    return SampleBatch(t=ts, s=ss, trees=trees, acceptance_rate=float(acc_rate),
                       iact=iact, config=cfg, step_size_final=step)


def write_jsonl(batch: SampleBatch, path, extra_header: dict | None = None) -> None:
    """JSON-lines batch: a header record, then one record per retained draw.

    Records are {"t": [...], "s": [...], "tree": [[i, j], ...]} with rho
    encoded as vertex index 0.
    """
    header = {
        "record": "header",
        "config": asdict(batch.config),
        "rng_algorithm": batch.rng_algorithm,
        "acceptance_rate": batch.acceptance_rate,
        "step_size_final": batch.step_size_final,
    }
    if extra_header:
        header.update(extra_header)
    with open(path, "w") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for k in range(len(batch)):
            rec = {
                "t": batch.t[k].tolist(),
                "s": batch.s[k].tolist(),
                "tree": sorted([list(e) for e in batch.trees[k].edges]),
            }
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def read_jsonl(path) -> tuple[dict, np.ndarray, np.ndarray, list[SpanningTree]]:
    """Inverse of write_jsonl; returns (header, t, s, trees)."""
    with open(path) as fh:
        lines = [json.loads(line) for line in fh if line.strip()]
    header = lines[0]
    t = np.array([rec["t"] for rec in lines[1:]])
    s = np.array([rec["s"] for rec in lines[1:]])
    n = t.shape[1] if t.size else 0
    trees = [SpanningTree(n=n, edges=frozenset(tuple(e) for e in rec["tree"]))
             for rec in lines[1:]]
    return header, t, s, trees
