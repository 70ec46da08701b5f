"""Scikit-learn style estimator wrapping the model and the sampler."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import as_binary_vector, as_float_matrix, check_is_fitted
from .errors import DataError
from .model import LogisticModel, PriorSpec, inverse_link
from .sampler import (
    SamplerConfig,
    convergence,
    pooled_draws,
    run_chains,
    thin_draws,
)


class BayesianLogisticRegression(BaseEstimator):
    """Bayesian logistic regression fitted by adaptive random-walk
    Metropolis, exposing the usual fit/predict/predict_proba surface.

    fit() draws posterior samples of the coefficients; point predictions
    average the predictive probability over all kept draws, and
    sample_proba() exposes the per-case predictive samples that the
    elicitation and diagnostics layers consume.

    Parameters mirror SamplerConfig and PriorSpec; ``add_intercept``
    controls whether a column of ones is prepended to X (disable it when
    X is already a full design matrix with its own intercept).
    """

    def __init__(
        self,
        prior_mean: float = 0.0,
        prior_scale: float = 0.001,
        prior_parameterization: str = "precision",
        chains: int = 4,
        iterations: int = 20000,
        burn_in: int = 5000,
        adapt_window: int = 50,
        target_acceptance: float = 0.234,
        seed: int = 0,
        add_intercept: bool = True,
        workers: int = 1,
    ):
        self.prior_mean = prior_mean
        self.prior_scale = prior_scale
        self.prior_parameterization = prior_parameterization
        self.chains = chains
        self.iterations = iterations
        self.burn_in = burn_in
        self.adapt_window = adapt_window
        self.target_acceptance = target_acceptance
        self.seed = seed
        self.add_intercept = add_intercept
        self.workers = workers

    def _prior(self) -> PriorSpec:
        return PriorSpec(
            mean=self.prior_mean,
            scale_parameterization=self.prior_parameterization,
            scale_value=self.prior_scale,
        )

    def _sampler_config(self) -> SamplerConfig:
        return SamplerConfig(
            seed=self.seed,
            chains=self.chains,
            iterations=self.iterations,
            burn_in=self.burn_in,
            adapt_window=self.adapt_window,
            target_acceptance=self.target_acceptance,
        )

    def _design(self, X) -> np.ndarray:
        X = as_float_matrix(X, "X")
        if self.add_intercept:
            X = np.hstack([np.ones((X.shape[0], 1)), X])
        return X

    def fit(self, X, y):
        design = self._design(X)
        y = as_binary_vector(y, design.shape[0])
        self.n_features_in_ = design.shape[1] - (1 if self.add_intercept else 0)
        model = LogisticModel(design, y, self._prior())
        self.model_ = model
        self.chains_ = run_chains(model, self._sampler_config(), workers=self.workers)
        self.convergence_ = (
            convergence(self.chains_) if self.chains >= 2 else None
        )
        draws = pooled_draws(self.chains_)
        self.coef_mean_ = draws.mean(axis=0)
        return self

    def _check_design(self, X) -> np.ndarray:
        check_is_fitted(self, "chains_")
        design = self._design(X)
        if design.shape[1] != self.model_.dim:
            raise DataError(
                f"X has {design.shape[1]} design columns, model expects "
                f"{self.model_.dim}"
            )
        return design

    def sample_proba(self, X, m: int = 100) -> np.ndarray:
        """(n_cases, m) predictive probability samples from thinned draws."""
        design = self._check_design(X)
        draws = thin_draws(self.chains_, m)
        return inverse_link(design @ draws.T)

    def predict_proba(self, X) -> np.ndarray:
        """Posterior-mean predictive probabilities, sklearn layout (n, 2)."""
        design = self._check_design(X)
        draws = pooled_draws(self.chains_)
        p = inverse_link(design @ draws.T).mean(axis=1)
        return np.column_stack([1.0 - p, p])

    def predict(self, X) -> np.ndarray:
        """Binary labels; a mean probability of exactly 0.5 labels positive."""
        p = self.predict_proba(X)[:, 1]
        return (p >= 0.5).astype(np.int8)
