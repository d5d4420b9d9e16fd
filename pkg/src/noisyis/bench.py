"""Replicated experiment engine.

Runs R independent replicates per (channel, n) cell with seeds
base_seed + replicate index, and compares the replicate variance to the
oracle prediction sigma2_bar / n. Replicate r always sees the same x
draws in every channel's cell (the noise stream is separate), so
empirical inflation ratios are paired comparisons.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .estimator import (
    KIND_IS,
    KIND_NOISY_IS,
    KIND_NOISY_SNIS,
    KIND_SNIS,
    EstimateReport,
    estimate_noisy_is,
    estimate_snis,
    variance_budget,
)
from .model import Density, Integrand
from .noise import NoiseChannel, var_exp_z
from .oracle import oracle_mean

_KINDS = (KIND_IS, KIND_NOISY_IS, KIND_SNIS, KIND_NOISY_SNIS)


@dataclass(frozen=True)
class StudySpec:
    target: Density
    proposal: Density
    f: Integrand
    channels: tuple[NoiseChannel, ...]
    n_grid: tuple[int, ...]
    replicates: int
    base_seed: int
    estimator_kind: str = KIND_IS
    alpha: float = 0.05

    def __post_init__(self):
        if self.replicates < 2:
            raise ValueError(f"replicates must be >= 2, got {self.replicates}")
        if not self.n_grid or any(
            b <= a for a, b in zip(self.n_grid, self.n_grid[1:])
        ):
            raise ValueError(f"n_grid must be nonempty and strictly increasing: {self.n_grid}")
        if not self.channels:
            raise ValueError("channels must be nonempty")
        if self.estimator_kind not in _KINDS:
            raise ValueError(f"unknown estimator_kind {self.estimator_kind!r}")

    @property
    def normalized(self) -> bool:
        return self.estimator_kind in (KIND_SNIS, KIND_NOISY_SNIS)


@dataclass(frozen=True)
class StudyCell:
    channel: NoiseChannel
    n: int
    replicate_mean: float
    replicate_var: float
    predicted_var: float
    inflation_ratio_empirical: float
    inflation_ratio_predicted: float
    ci_coverage: float


@dataclass(frozen=True)
class StudyResult:
    spec: StudySpec
    truth: float
    cells: tuple[StudyCell, ...]


@dataclass(frozen=True)
class SweepRow:
    gamma: float
    n: int
    replicates: int
    empirical_var: float
    predicted_var: float
    inflation_empirical: float
    inflation_predicted: float
    ess_mean: float


def _run_replicates(spec: StudySpec, channel: NoiseChannel, n: int, threads: int):
    estimator = estimate_snis if spec.normalized else estimate_noisy_is

    def one(r: int) -> EstimateReport:
        return estimator(
            spec.target, spec.proposal, spec.f, channel, n, spec.base_seed + r, spec.alpha
        )

    indices = range(spec.replicates)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, indices))
    return [one(r) for r in indices]


def _coverage(reports, truth: float) -> float:
    hits = sum(1 for r in reports if r.ci_lo <= truth <= r.ci_hi)
    return hits / len(reports)


def run_study(spec: StudySpec, threads: int = 1) -> StudyResult:
    """Fill every (channel, n) cell of the study grid.

    Replicate r of every cell uses seed base_seed + r; the clean
    baseline cell is always computed (reused if the identity channel is
    among the requested channels) so inflation ratios are well defined.
    """
    budgets = {ch: variance_budget(spec.target, spec.proposal, spec.f, ch) for ch in spec.channels}
    sigma2 = next(iter(budgets.values())).sigma2
    truth = oracle_mean(spec.target, spec.f)
    identity = NoiseChannel.identity()

    cells = []
    for n in spec.n_grid:
        clean_reports = _run_replicates(spec, identity, n, threads)
        clean_var = float(np.var([r.estimate for r in clean_reports], ddof=1))
        for ch in spec.channels:
            reports = clean_reports if ch.is_identity else _run_replicates(spec, ch, n, threads)
            ests = np.array([r.estimate for r in reports])
            budget = budgets[ch]
            cells.append(
                StudyCell(
                    channel=ch,
                    n=n,
                    replicate_mean=float(np.mean(ests)),
                    replicate_var=float(np.var(ests, ddof=1)),
                    predicted_var=budget.sigma2_bar / n,
                    inflation_ratio_empirical=float(np.var(ests, ddof=1)) / clean_var,
                    inflation_ratio_predicted=budget.sigma2_bar / sigma2,
                    ci_coverage=_coverage(reports, truth),
                )
            )
    return StudyResult(spec=spec, truth=truth, cells=tuple(cells))


def sweep_gamma(
    target: Density,
    proposal: Density,
    f: Integrand,
    gammas,
    n: int,
    replicates: int,
    base_seed: int,
    alpha: float = 0.05,
    threads: int = 1,
) -> tuple[SweepRow, ...]:
    """One row per gamma of the lognormal-channel variance sweep.

    gammas must be sorted ascending and start at 0 so every row's
    inflation is relative to the clean baseline.
    """
    gammas = [float(g) for g in gammas]
    if not gammas or gammas[0] != 0.0 or any(b <= a for a, b in zip(gammas, gammas[1:])):
        raise ValueError(f"gammas must be strictly increasing and start at 0: {gammas}")
    channels = tuple(NoiseChannel.lognormal(g) for g in gammas)
    spec = StudySpec(
        target=target,
        proposal=proposal,
        f=f,
        channels=channels,
        n_grid=(n,),
        replicates=replicates,
        base_seed=base_seed,
        estimator_kind=KIND_IS,
        alpha=alpha,
    )
    budget0 = variance_budget(target, proposal, f, channels[0])
    sigma2, m2 = budget0.sigma2, budget0.second_moment_fw

    rows = []
    baseline_var = None
    for gamma, ch in zip(gammas, channels):
        reports = _run_replicates(spec, ch, n, threads)
        ests = np.array([r.estimate for r in reports])
        empirical_var = float(np.var(ests, ddof=1))
        vez = var_exp_z(ch)
        predicted_var = (sigma2 + vez * m2) / n
        if baseline_var is None:
            baseline_var = empirical_var
        rows.append(
            SweepRow(
                gamma=gamma,
                n=n,
                replicates=replicates,
                empirical_var=empirical_var,
                predicted_var=predicted_var,
                inflation_empirical=empirical_var / baseline_var,
                inflation_predicted=(sigma2 + vez * m2) / sigma2,
                ess_mean=float(np.mean([r.ess for r in reports])),
            )
        )
    return tuple(rows)
