"""Monte Carlo experiments on spiked sample covariance matrices.

Every replicate draws its data from a Philox counter-based generator keyed by
``(seed, rep_index)``, so a replicate's spectrum does not depend on which
other replicates run, in what order, or on how many threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from . import functions
from .centering import centering_value
from .clt_test import clt_params_g, null_centering_g, power, run_test
from .errors import DomainError
from .functions import SpectralFunction
from .spike_model import SpikedModel

ENTRY_DISTS = ("gaussian", "rademacher")
THREADS_ENV = "SPECTRAL_CLT_THREADS"


@dataclass(frozen=True)
class ExperimentConfig:
    model: SpikedModel
    reps: int = 1000
    seed: int = 0
    entry_dist: str = "gaussian"
    test_function: str = "lrt_g"
    alpha: float = 0.05
    threads: Optional[int] = None

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("reps must be at least 1")
        if self.entry_dist not in ENTRY_DISTS:
            raise ValueError(f"entry_dist must be one of {ENTRY_DISTS}, got {self.entry_dist!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")

    @property
    def function(self) -> SpectralFunction:
        return functions.from_name(self.test_function)


@dataclass
class RepRecord:
    rep: int
    statistic: float
    centered: float
    reject: Optional[bool] = None


@dataclass
class ExperimentReport:
    kind: str
    reps: int
    emp_mean: float
    emp_var: Optional[float]
    mean_se: Optional[float]
    ci95: Optional[tuple]
    theory_mean: Optional[float] = None
    theory_var: Optional[float] = None
    reject_rate: Optional[float] = None
    reject_se: Optional[float] = None
    theory_reject_rate: Optional[float] = None
    centering: Optional[float] = None
    records: List[RepRecord] = field(default_factory=list, repr=False)

    @property
    def variance_defined(self) -> bool:
        return self.emp_var is not None

    def to_dict(self):
        return {
            "kind": self.kind,
            "reps": self.reps,
            "emp_mean": self.emp_mean,
            "emp_var": self.emp_var,
            "variance_defined": self.variance_defined,
            "mean_se": self.mean_se,
            "ci95": list(self.ci95) if self.ci95 is not None else None,
            "theory_mean": self.theory_mean,
            "theory_var": self.theory_var,
            "reject_rate": self.reject_rate,
            "reject_se": self.reject_se,
            "theory_reject_rate": self.theory_reject_rate,
            "centering": self.centering,
        }


def rep_generator(seed: int, rep_index: int) -> np.random.Generator:
    key = np.array([seed, rep_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_matrix(model: SpikedModel, rep_index: int, seed: int, entry_dist: str = "gaussian") -> np.ndarray:
    """p x n data matrix Sigma^{1/2} Z for one replicate."""
    rng = rep_generator(seed, rep_index)
    p, n = model.p, model.n
    if entry_dist == "gaussian":
        Z = rng.standard_normal((p, n))
    elif entry_dist == "rademacher":
        Z = rng.integers(0, 2, size=(p, n)).astype(float) * 2.0 - 1.0
    else:
        raise ValueError(f"unknown entry distribution {entry_dist!r}")
    # Sigma is diagonal with the spikes on the leading rows
    row = 0
    for a, mult in model.spikes:
        Z[row:row + mult] *= math.sqrt(a)
        row += mult
    return Z


def sample_covariance(X: np.ndarray) -> np.ndarray:
    n = X.shape[1]
    return (X @ X.T) / n


def sample_eigenvalues(model: SpikedModel, rep_index: int, config: ExperimentConfig) -> np.ndarray:
    """Eigenvalues of S_n for one replicate, in descending order."""
    X = sample_matrix(model, rep_index, config.seed, config.entry_dist)
    try:
        lam = np.linalg.eigvalsh(sample_covariance(X))
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"eigensolver failed on replicate {rep_index}: {exc}") from exc
    return lam[::-1]


def lss(eigenvalues: Sequence[float], f: SpectralFunction) -> float:
    """Linear spectral statistic sum_i f(lambda_i)."""
    lam = np.asarray(eigenvalues, dtype=float)
    ok = np.asarray(f.domain_check(lam.astype(complex)))
    if not np.all(ok):
        raise DomainError(f"{f.name} is undefined at eigenvalue {lam[~ok][0]:g}")
    return float(np.sum(np.real(f.eval(lam))))


def thread_count(config: ExperimentConfig) -> int:
    if config.threads is not None:
        return max(1, int(config.threads))
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def simulate_spectra(config: ExperimentConfig) -> List[np.ndarray]:
    """Spectra of every replicate, returned in replicate order."""
    model = config.model
    reps = range(config.reps)
    workers = thread_count(config)
    if workers == 1:
        return [sample_eigenvalues(model, r, config) for r in reps]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda r: sample_eigenvalues(model, r, config), reps))


def _summarize(kind: str, values: np.ndarray, **extra) -> ExperimentReport:
    reps = len(values)
    mean = float(np.mean(values))
    if reps >= 2:
        var = float(np.var(values, ddof=1))
        se = math.sqrt(var / reps)
        ci = (mean - 1.96 * se, mean + 1.96 * se)
    else:
        var = se = ci = None
    return ExperimentReport(kind=kind, reps=reps, emp_mean=mean, emp_var=var, mean_se=se, ci95=ci, **extra)


def run_clt_experiment(config: ExperimentConfig, spectra: Optional[List[np.ndarray]] = None) -> ExperimentReport:
    """Draws of X_n(f) = T_n(f) - p F^{y_n,H_n}(f) and their mean and variance.

    Theory values are attached only for f = lrt_g with p < n, the case where
    the limiting mean and variance are available in closed form.
    """
    model = config.model
    f = config.function
    centering = centering_value(f, model).total
    if spectra is None:
        spectra = simulate_spectra(config)
    records = []
    for r, lam in enumerate(spectra):
        t = lss(lam, f)
        records.append(RepRecord(rep=r, statistic=t, centered=t - model.p * centering))
    theory_mean = theory_var = None
    if f.name == "lrt_g" and 0 < model.y < 1:
        theory_mean, theory_var = clt_params_g(model.y)
    report = _summarize(
        "clt",
        np.array([rec.centered for rec in records]),
        theory_mean=theory_mean,
        theory_var=theory_var,
        centering=centering,
    )
    report.records = records
    return report


def empirical_size_power(config: ExperimentConfig, spectra: Optional[List[np.ndarray]] = None) -> ExperimentReport:
    """Rejection rate of the likelihood-ratio test over replicates.

    The theory rate is alpha under the identity population and the
    asymptotic power otherwise.
    """
    model = config.model
    if not 0 < model.y < 1:
        raise DomainError("the likelihood-ratio test needs p < n")
    if spectra is None:
        spectra = simulate_spectra(config)
    records = []
    for r, lam in enumerate(spectra):
        out = run_test(lam, model.p, model.n, config.alpha)
        records.append(RepRecord(rep=r, statistic=out.statistic, centered=out.centered, reject=out.reject))
    rejects = np.array([rec.reject for rec in records], dtype=float)
    rate = float(rejects.mean())
    reps = len(records)
    theory = config.alpha if model.is_null else power(model, config.alpha)
    m_g, v_g = clt_params_g(model.y)
    report = _summarize(
        "size" if model.is_null else "power",
        np.array([rec.centered for rec in records]),
        theory_mean=m_g,
        theory_var=v_g,
        reject_rate=rate,
        reject_se=math.sqrt(rate * (1.0 - rate) / reps),
        theory_reject_rate=theory,
        centering=null_centering_g(model.y),
    )
    report.records = records
    return report


__all__ = [
    "ExperimentConfig",
    "ExperimentReport",
    "RepRecord",
    "empirical_size_power",
    "lss",
    "rep_generator",
    "run_clt_experiment",
    "sample_covariance",
    "sample_eigenvalues",
    "sample_matrix",
    "simulate_spectra",
]
