"""Turning posterior draws into an elicited prior for a new case.

For a new encoded case x*, each thinned coefficient draw theta_k yields
one sample p_k = sigmoid(theta_k @ x*) of the decision probability. A
Beta distribution is fitted to those samples by matching moments; a
logit-normal can be fitted by (closed-form) maximum likelihood as an
alternative, and the family with the smaller Kolmogorov-Smirnov distance
to the empirical samples is selected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from ._validation import as_float_vector
from .errors import DataError, DegenerateFitError
from .model import inverse_link
from .sampler import PosteriorChain, thin_draws

NUDGE = 1e-12
DEFAULT_FAMILIES = ("beta", "logitnormal")


@dataclass
class PredictiveSamples:
    """Probability samples for one case, nudged strictly inside (0, 1).

    Saturation to exactly 0 or 1 can only happen through float rounding
    of the sigmoid; such samples are nudged to the nearest representable
    interior value and counted in ``nudged``.
    """

    case_id: str
    samples: np.ndarray
    nudged: int = 0
    provenance: dict = field(default_factory=dict)

    @property
    def m(self) -> int:
        return self.samples.shape[0]


def predictive_samples(
    chains: list[PosteriorChain],
    case_row,
    m: int = 100,
    case_id: str = "case",
) -> PredictiveSamples:
    """Draw m posterior-predictive probability samples for one case."""
    x = as_float_vector(case_row, "case_row")
    d = chains[0].dim
    if x.shape[0] != d:
        raise DataError(
            f"case row has {x.shape[0]} columns, chains carry {d} coefficients"
        )
    if m < 2:
        raise DataError(f"need at least 2 predictive samples, got m={m}")
    draws = thin_draws(chains, m)
    p = inverse_link(draws @ x)
    outside = int(np.sum((p <= 0.0) | (p >= 1.0)))
    p = np.clip(p, NUDGE, 1.0 - NUDGE)
    return PredictiveSamples(
        case_id=case_id,
        samples=p,
        nudged=outside,
        provenance={
            "m": m,
            "chains": len(chains),
            "thinning": "even",
            "seed": chains[0].seed,
        },
    )


def beta_from_moments(mean: float, variance: float) -> tuple[float, float]:
    """Beta (alpha, beta) whose mean and variance match the arguments.

    Requires 0 < variance < mean * (1 - mean); anything else has no Beta
    solution with positive parameters.
    """
    bound = mean * (1.0 - mean)
    if not variance > 0.0 or not variance < bound:
        raise DegenerateFitError(
            "no Beta distribution matches these moments", mean, variance
        )
    common = bound / variance - 1.0
    return mean * common, (1.0 - mean) * common


def sample_moments(samples: np.ndarray) -> tuple[float, float]:
    """Sample mean and population variance (matching moment fitting).

    Computed over the sorted samples so the result is exactly invariant
    to sample order.
    """
    ordered = np.sort(samples)
    mean = float(ordered.mean())
    variance = float(ordered.var())
    return mean, variance


def fit_beta_moments(samples) -> tuple[float, float]:
    samples = as_float_vector(samples, "samples")
    mean, variance = sample_moments(samples)
    return beta_from_moments(mean, variance)


def fit_logitnormal_mle(samples) -> tuple[float, float]:
    """Closed-form MLE for the logit-normal: moments of logit(samples)."""
    samples = as_float_vector(samples, "samples")
    if np.any(samples <= 0.0) or np.any(samples >= 1.0):
        raise DataError("logit-normal fitting needs samples strictly inside (0, 1)")
    logits = np.sort(np.log(samples / (1.0 - samples)))
    mu = float(logits.mean())
    sigma = float(logits.std())
    if sigma == 0.0:
        raise DegenerateFitError(
            "logit-normal fit is degenerate (zero spread)", float(samples.mean()), 0.0
        )
    return mu, sigma


def beta_cdf(alpha: float, beta: float):
    def cdf(x):
        return special.betainc(alpha, beta, np.clip(x, 0.0, 1.0))

    return cdf


def logitnormal_cdf(mu: float, sigma: float):
    def cdf(x):
        x = np.clip(np.asarray(x, dtype=np.float64), NUDGE, 1.0 - NUDGE)
        return special.ndtr((np.log(x / (1.0 - x)) - mu) / sigma)

    return cdf


def beta_pdf(alpha: float, beta: float, x: np.ndarray) -> np.ndarray:
    log_norm = (
        special.gammaln(alpha + beta)
        - special.gammaln(alpha)
        - special.gammaln(beta)
    )
    return np.exp(log_norm + (alpha - 1.0) * np.log(x) + (beta - 1.0) * np.log1p(-x))


def logitnormal_pdf(mu: float, sigma: float, x: np.ndarray) -> np.ndarray:
    z = (np.log(x / (1.0 - x)) - mu) / sigma
    return np.exp(-0.5 * z * z) / (sigma * math.sqrt(2.0 * math.pi) * x * (1.0 - x))


def ks_statistic(samples, cdf) -> float:
    """One-sample Kolmogorov-Smirnov distance between samples and a CDF.

    D = max over sorted samples of max(|i/m - F(x_i)|, |(i-1)/m - F(x_i)|).
    """
    samples = np.sort(as_float_vector(samples, "samples"))
    m = samples.shape[0]
    if m == 0:
        raise DataError("ks_statistic needs at least one sample")
    f = np.asarray(cdf(samples), dtype=np.float64)
    grid = np.arange(1, m + 1) / m
    upper = np.abs(grid - f)
    lower = np.abs((grid - 1.0 / m) - f)
    return float(np.maximum(upper, lower).max())


@dataclass
class ElicitedPrior:
    """A fitted family for the probability of the guarded-against event."""

    family: str
    params: tuple[float, ...]
    fit_method: str
    ks: float
    case_id: str = "case"

    def __post_init__(self):
        if self.family == "beta":
            alpha, beta = self.params
            if not (alpha > 0 and beta > 0):
                raise DegenerateFitError("Beta parameters must be positive", alpha, beta)
        elif self.family == "logitnormal":
            _, sigma = self.params
            if not sigma > 0:
                raise DegenerateFitError("logit-normal sigma must be positive", 0.0, sigma)
        else:
            raise DataError(f"unknown family {self.family!r}")
        if not 0.0 <= self.ks <= 1.0:
            raise DataError(f"KS statistic {self.ks} outside [0, 1]")

    def cdf(self):
        if self.family == "beta":
            return beta_cdf(*self.params)
        return logitnormal_cdf(*self.params)

    def pdf(self, x: np.ndarray) -> np.ndarray:
        if self.family == "beta":
            return beta_pdf(self.params[0], self.params[1], x)
        return logitnormal_pdf(self.params[0], self.params[1], x)

    def mean(self) -> float:
        if self.family == "beta":
            alpha, beta = self.params
            return alpha / (alpha + beta)
        # logit-normal mean has no closed form; quadrature is exact enough
        x = (np.arange(20001) + 0.5) / 20001
        return float(np.mean(x * self.pdf(x)))

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "params": [float(p) for p in self.params],
            "fit_method": self.fit_method,
            "ks": self.ks,
            "case_id": self.case_id,
        }


@dataclass
class FitReport:
    """Every attempted family plus the KS-selected winner."""

    case_id: str
    m: int
    sample_mean: float
    sample_variance: float
    nudged: int
    fits: dict
    failures: dict
    selected: ElicitedPrior
    samples: np.ndarray | None = None
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "case_id": self.case_id,
            "m": self.m,
            "sample_mean": self.sample_mean,
            "sample_variance": self.sample_variance,
            "nudged": self.nudged,
            "fits": {k: v.to_dict() for k, v in self.fits.items()},
            "failures": dict(self.failures),
            "selected": self.selected.to_dict(),
            "provenance": dict(self.provenance),
        }


def fit_families(
    samples: PredictiveSamples, families=DEFAULT_FAMILIES
) -> FitReport:
    """Fit each requested family and select the minimal-KS one.

    The Beta moment fit is always attempted (and reported) whether or not
    it is requested or selected. Raises DegenerateFitError, carrying the
    sample moments, only if every family fails.
    """
    if not families:
        raise DataError("families must be non-empty")
    unknown = [f for f in families if f not in DEFAULT_FAMILIES]
    if unknown:
        raise DataError(f"unknown families: {unknown}")
    values = samples.samples
    mean, variance = sample_moments(values)
    attempted = ["beta"] + [f for f in families if f != "beta"]
    fits: dict[str, ElicitedPrior] = {}
    failures: dict[str, str] = {}
    for family in attempted:
        try:
            if family == "beta":
                params = fit_beta_moments(values)
                method = "moments"
                cdf = beta_cdf(*params)
            else:
                params = fit_logitnormal_mle(values)
                method = "mle"
                cdf = logitnormal_cdf(*params)
            fits[family] = ElicitedPrior(
                family=family,
                params=params,
                fit_method=method,
                ks=ks_statistic(values, cdf),
                case_id=samples.case_id,
            )
        except (DegenerateFitError, DataError) as exc:
            failures[family] = str(exc)
    candidates = {f: p for f, p in fits.items() if f in families}
    if not candidates:
        raise DegenerateFitError(
            "every requested family failed to fit", mean, variance
        )
    selected = min(candidates.values(), key=lambda p: p.ks)
    return FitReport(
        case_id=samples.case_id,
        m=samples.m,
        sample_mean=mean,
        sample_variance=variance,
        nudged=samples.nudged,
        fits=fits,
        failures=failures,
        selected=selected,
        samples=values,
        provenance=dict(samples.provenance),
    )


def elicit_prior(
    chains: list[PosteriorChain],
    case_row,
    m: int = 100,
    families=DEFAULT_FAMILIES,
    case_id: str = "case",
) -> FitReport:
    """Sample the predictive distribution for one case and fit a prior."""
    samples = predictive_samples(chains, case_row, m=m, case_id=case_id)
    return fit_families(samples, families=families)


def density_grid(
    prior: ElicitedPrior, samples: np.ndarray | None = None, points: int = 512
) -> dict[str, np.ndarray]:
    """Evaluate the fitted density (and a kernel estimate) on a grid.

    Returns columns suitable for CSV export: x, fitted pdf, and when
    samples are given a Gaussian kernel density estimate of them.
    """
    x = (np.arange(points) + 0.5) / points
    out = {"x": x, "pdf_fitted": prior.pdf(x)}
    if samples is not None and np.ptp(samples) > 0:
        kde = stats.gaussian_kde(samples)
        out["pdf_kde"] = kde(x)
    return out


def export_density_csv(columns: dict[str, np.ndarray], path) -> None:
    names = list(columns)
    rows = len(columns[names[0]])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(names) + "\n")
        for i in range(rows):
            fh.write(",".join(repr(float(columns[name][i])) for name in names) + "\n")


def export_samples_csv(samples: PredictiveSamples, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("index,probability\n")
        for i, value in enumerate(samples.samples):
            fh.write(f"{i},{float(value)!r}\n")
