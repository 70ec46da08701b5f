"""Bayesian logistic regression target density.

The decision model is Bernoulli with a logit link: given a design row x and
coefficients theta, p = sigmoid(theta @ x). Independent Normal priors on
each coefficient complete the log posterior that the sampler explores.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import as_binary_vector, as_float_matrix, as_float_vector
from .errors import DataError

LOG_HALF = math.log(0.5)


@dataclass(frozen=True)
class PriorSpec:
    """Independent Normal prior on every coefficient.

    ``scale_parameterization`` declares whether ``scale_value`` is a
    variance or a precision; the default Normal(0, 0.001) is read as
    precision 0.001, i.e. variance 1000, the conventional vague prior.
    """

    mean: float = 0.0
    scale_parameterization: str = "precision"
    scale_value: float = 0.001

    def __post_init__(self):
        if self.scale_parameterization not in ("variance", "precision"):
            raise DataError(
                "scale_parameterization must be 'variance' or 'precision', "
                f"got {self.scale_parameterization!r}"
            )
        if not self.scale_value > 0:
            raise DataError(f"scale_value must be > 0, got {self.scale_value!r}")

    @property
    def variance(self) -> float:
        if self.scale_parameterization == "variance":
            return float(self.scale_value)
        return 1.0 / float(self.scale_value)

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "scale_parameterization": self.scale_parameterization,
            "scale_value": self.scale_value,
        }


def linear_predictor(theta, x) -> float:
    """theta @ x for one encoded row."""
    theta = as_float_vector(theta, "theta")
    x = as_float_vector(x, "x")
    if theta.shape[0] != x.shape[0]:
        raise DataError(
            f"dimension mismatch: theta has {theta.shape[0]} entries, "
            f"row has {x.shape[0]}"
        )
    return float(theta @ x)


def inverse_link(eta):
    """Logistic sigmoid 1 / (1 + exp(-eta)), stable for large |eta|.

    Accepts scalars or arrays. The two-branch form never exponentiates a
    large positive argument, so it does not overflow for |eta| up to the
    float64 range.
    """
    eta_arr = np.asarray(eta, dtype=np.float64)
    out = np.empty_like(eta_arr)
    pos = eta_arr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-eta_arr[pos]))
    exp_eta = np.exp(eta_arr[~pos])
    out[~pos] = exp_eta / (1.0 + exp_eta)
    if np.isscalar(eta) or np.ndim(eta) == 0:
        return float(out)
    return out


def _softplus_sum(eta: np.ndarray) -> float:
    """sum_i log(1 + exp(eta_i)) via max(eta, 0) + log1p(exp(-|eta|)),
    which is stable for any eta and cheap to evaluate."""
    return float(
        (np.maximum(eta, 0.0) + np.log1p(np.exp(-np.abs(eta)))).sum()
    )


def log_likelihood(theta, design: np.ndarray, response: np.ndarray) -> float:
    """Bernoulli log likelihood sum_i [y_i log p_i + (1 - y_i) log(1 - p_i)].

    Uses the identity ll = y @ eta - sum log(1 + exp(eta)), which stays
    finite even when individual p_i saturate to 0 or 1.
    """
    theta = as_float_vector(theta, "theta")
    if design.shape[0] == 0:
        raise DataError("dataset is empty")
    eta = design @ theta
    return float(response @ eta) - _softplus_sum(eta)


def log_prior(theta, prior: PriorSpec) -> float:
    """Sum of Normal log densities, additive constants included."""
    theta = as_float_vector(theta, "theta")
    v = prior.variance
    d = theta.shape[0]
    resid = theta - prior.mean
    return -0.5 * d * math.log(2.0 * math.pi * v) - float(resid @ resid) / (2.0 * v)


@dataclass
class LogisticModel:
    """Posterior target for a fixed encoded dataset and prior.

    ``design`` must already include any intercept column; coefficients are
    aligned to its column order. Instances are immutable in practice
    (arrays are not written to) and log_posterior is reentrant, so one
    model can serve several chains at once.
    """

    design: np.ndarray
    response: np.ndarray
    prior: PriorSpec = field(default_factory=PriorSpec)

    def __post_init__(self):
        self.design = as_float_matrix(self.design, "design")
        self.response = as_binary_vector(self.response, self.design.shape[0])
        if self.design.shape[0] == 0:
            raise DataError("dataset is empty")
        at_zero = self.log_posterior(np.zeros(self.dim))
        if not math.isfinite(at_zero):
            raise DataError("log posterior is not finite at theta = 0")

    @property
    def dim(self) -> int:
        return self.design.shape[1]

    def log_likelihood(self, theta) -> float:
        return log_likelihood(theta, self.design, self.response)

    def log_prior(self, theta) -> float:
        return log_prior(theta, self.prior)

    def log_posterior(self, theta) -> float:
        return self.log_likelihood(theta) + self.log_prior(theta)

    # run_chain protocol
    def log_density(self, theta) -> float:
        return self.log_posterior(theta)

    def log_posterior_gradient(self, theta) -> np.ndarray:
        """Analytic gradient: X' (y - p) - (theta - mean) / variance."""
        theta = as_float_vector(theta, "theta")
        p = inverse_link(self.design @ theta)
        grad_lik = self.design.T @ (self.response - p)
        grad_prior = -(theta - self.prior.mean) / self.prior.variance
        return grad_lik + grad_prior

    def coordinate_evaluator(self) -> "LogisticCoordinateEvaluator":
        return LogisticCoordinateEvaluator(self)

    def predict_proba(self, design: np.ndarray, theta) -> np.ndarray:
        return inverse_link(design @ as_float_vector(theta, "theta"))


class LogisticCoordinateEvaluator:
    """Incremental log-posterior evaluation for single-coordinate moves.

    The componentwise sampler changes one theta_j at a time. Caching the
    linear predictor eta = X theta turns each proposal into one axpy and
    one softplus reduction instead of a full O(n d) evaluation. The cached
    eta is resynchronised periodically by the sampler via reset().
    """

    def __init__(self, model: LogisticModel):
        self._X = model.design
        self._y = model.response.astype(np.float64)
        self._yTX = self._X.T @ self._y
        self._prior_mean = model.prior.mean
        self._prior_var = model.prior.variance
        d = model.dim
        self._prior_const = -0.5 * math.log(2.0 * math.pi * self._prior_var)
        self.dim = d
        self._pending = None

    def _prior_term(self, value: float) -> float:
        resid = value - self._prior_mean
        return self._prior_const - resid * resid / (2.0 * self._prior_var)

    def reset(self, theta: np.ndarray) -> None:
        self._theta = np.array(theta, dtype=np.float64)
        self._eta = self._X @ self._theta
        self._ylin = float(self._y @ self._eta)
        self._soft = _softplus_sum(self._eta)
        self._prior_terms = np.array(
            [self._prior_term(v) for v in self._theta], dtype=np.float64
        )
        self.log_density_value = (
            self._ylin - self._soft + float(self._prior_terms.sum())
        )
        self._pending = None

    def propose(self, j: int, new_value: float) -> float:
        """Log density if coordinate j were set to new_value."""
        delta = new_value - self._theta[j]
        eta_new = self._eta + delta * self._X[:, j]
        soft_new = _softplus_sum(eta_new)
        ylin_new = self._ylin + delta * self._yTX[j]
        prior_new = self._prior_term(new_value)
        logp = (
            ylin_new
            - soft_new
            + float(self._prior_terms.sum())
            - self._prior_terms[j]
            + prior_new
        )
        self._pending = (j, new_value, eta_new, soft_new, ylin_new, prior_new, logp)
        return logp

    def accept(self) -> None:
        j, value, eta, soft, ylin, prior_term, logp = self._pending
        self._theta[j] = value
        self._eta = eta
        self._soft = soft
        self._ylin = ylin
        self._prior_terms[j] = prior_term
        self.log_density_value = logp
        self._pending = None

    def reject(self) -> None:
        self._pending = None
