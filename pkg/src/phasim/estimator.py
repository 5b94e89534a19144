"""Adaptive phase-estimation protocols and ensemble statistics.

Two recovery paths share the measurement models: exact dyadic digit
recursion for phases with a finite binary expansion, and a Bayesian
protocol that walks probe sizes 2^K down to 1 with sharpness-maximizing
feedback, repeating each size a fixed number of times.  Randomness is
derived per (seed, step) from a keyed hash, so runs are reproducible and
independent of any parallel scheduling.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .errors import EmptyEnsembleError, NondeterministicOutcomeError
from .models import (
    DetectorConfig,
    DyadicPhase,
    MeasurementModel,
    Parity,
    make_model,
    wrap_phase,
)
from .posterior import TWO_PI, FourierPosterior, bayes_update, choose_feedback

MODEL_NAMES = ("ideal", "classical-resonant", "classical-nonresonant")


def derive_seed(*parts) -> int:
    """Deterministic 64-bit child seed from arbitrary labelled parts."""
    material = ":".join(str(p) for p in parts).encode()
    return int.from_bytes(hashlib.blake2b(material, digest_size=8).digest(), "big")


def hash_uniform(*parts) -> float:
    """Deterministic uniform draw in [0, 1) keyed by the labelled parts."""
    return derive_seed(*parts) / 2.0**64


def dyadic_estimate(
    true_phase: DyadicPhase, model: MeasurementModel, tol: float = 1e-9
) -> DyadicPhase:
    """Recover every binary digit of a dyadic phase exactly.

    Round k probes with size 2^k (finest first) and feedback assembled from
    the digits already recovered, which makes each outcome deterministic;
    a probability strictly inside (tol, 1 - tol) means the input is not
    dyadic at this depth (or the model is noisy) and raises.
    """
    depth = true_phase.depth
    phi = true_phase.to_phase()
    digits: dict[int, int] = {}
    for level in range(depth, -1, -1):
        feedback = math.pi * sum(
            digits[j] / 2.0**j for j in range(level + 1, depth + 1)
        )
        p_even = model.outcome_prob(2**level, phi, feedback, Parity.EVEN)
        if p_even > 1.0 - tol:
            digits[level] = 0
        elif p_even < tol:
            digits[level] = 1
        else:
            raise NondeterministicOutcomeError(
                f"outcome probability {p_even:.6f} at size 2^{level} is not 0/1"
            )
    return DyadicPhase(tuple(digits[k] for k in range(depth, -1, -1)))


@dataclass(frozen=True)
class ProtocolConfig:
    """Shape of one adaptive run: probe sizes 2^k_max .. 1, repeated."""

    k_max: int
    repeats: int = 1
    model: str = "ideal"
    detector: DetectorConfig | None = None
    feedback_grid: int = 256
    interleave: bool = False

    def __post_init__(self) -> None:
        if self.k_max < 0:
            raise ValueError("k_max must be >= 0")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if self.feedback_grid < 8:
            raise ValueError("feedback_grid must be >= 8")
        if self.model not in MODEL_NAMES:
            raise ValueError(f"model must be one of {MODEL_NAMES}")

    @property
    def n_resources(self) -> int:
        """Total photon count N = repeats * (2^(k_max+1) - 1)."""
        return self.repeats * (2 ** (self.k_max + 1) - 1)

    def build_model(self) -> MeasurementModel:
        return make_model(self.model, self.detector)

    def schedule(self) -> list[int]:
        sizes = [2**k for k in range(self.k_max, -1, -1)]
        if self.interleave:
            return [n for _ in range(self.repeats) for n in sizes]
        return [n for n in sizes for _ in range(self.repeats)]


@dataclass(frozen=True)
class EstimateResult:
    """Point estimate plus the dispersion and bookkeeping of one run."""

    estimate: float
    holevo_variance: float
    sharpness: float
    n_resources: int
    outcome_log: tuple[tuple[int, float, Parity], ...]


def holevo_variance(sharpness: float) -> float:
    """Circular dispersion 1/mu^2 - 1; infinite for a fully unsharp state."""
    if sharpness <= 0.0:
        return math.inf
    return max(0.0, 1.0 / sharpness**2 - 1.0)


def run_protocol(true_phase: float, cfg: ProtocolConfig, rng_seed: int) -> EstimateResult:
    """Simulate one adaptive estimation run against a hidden true phase.

    Starting from a uniform prior, each step chooses the feedback that
    maximizes expected sharpness, samples a parity outcome from the
    measurement model, and updates the posterior.  The estimate is the
    posterior mean direction.  Identical seeds give bit-identical results.
    """
    model = cfg.build_model()
    posterior = FourierPosterior.uniform(degree_cap=cfg.n_resources)
    log: list[tuple[int, float, Parity]] = []
    for step, n in enumerate(cfg.schedule()):
        feedback = choose_feedback(posterior, n, model, grid=cfg.feedback_grid)
        p_even = model.outcome_prob(n, true_phase, feedback, Parity.EVEN)
        outcome = Parity.EVEN if hash_uniform(rng_seed, step) < p_even else Parity.ODD
        posterior = bayes_update(posterior, n, feedback, outcome, model)
        log.append((n, feedback, outcome))
    mu = posterior.sharpness()
    return EstimateResult(
        estimate=posterior.mean_direction(),
        holevo_variance=holevo_variance(mu),
        sharpness=mu,
        n_resources=cfg.n_resources,
        outcome_log=tuple(log),
    )


def signed_phase_error(estimate: float, truth: float) -> float:
    """Estimate minus truth, wrapped into (-pi, pi]."""
    err = wrap_phase(estimate - truth)
    return err - TWO_PI if err > math.pi else err


def holevo_variance_of_errors(errors) -> float:
    """Holevo variance of a sample of signed phase errors.

    Mean directions below float resolution (1e-12) report as divergent,
    since the corresponding dispersion is pure roundoff.
    """
    errors = np.asarray(errors, dtype=float)
    if errors.size == 0:
        raise EmptyEnsembleError("no errors to aggregate")
    mu = abs(np.mean(np.exp(1j * errors)))
    if mu < 1e-12:
        return math.inf
    return holevo_variance(float(mu))


def holevo_variance_ensemble(results, true_phases) -> float:
    """Ensemble Holevo variance of estimate-minus-truth over many runs."""
    results = list(results)
    true_phases = list(true_phases)
    if not results:
        raise EmptyEnsembleError("empty result ensemble")
    if len(results) != len(true_phases):
        raise ValueError("results and true phases differ in length")
    errors = [signed_phase_error(r.estimate, t) for r, t in zip(results, true_phases)]
    return holevo_variance_of_errors(errors)


class BayesianPhaseEstimator(BaseEstimator):
    """Posterior phase inference from recorded parity outcomes.

    Fits the circular posterior to rows of (probe size, feedback phase,
    parity) and exposes the point estimate and dispersion as attributes,
    so recorded runs (for example the ``outcome_log`` of
    :func:`run_protocol`) can be re-analyzed or composed with scikit-learn
    tooling.

    Parameters
    ----------
    model : str
        Measurement back-end name: "ideal", "classical-resonant" or
        "classical-nonresonant".
    detector : DetectorConfig, optional
        Classical-detector template (required meaning only for classical
        back-ends; the default resonant template is used when omitted).
    degree_cap : int, optional
        Cap on the posterior Fourier degree; defaults to the total photon
        count of the fitted records.
    """

    def __init__(
        self,
        model: str = "ideal",
        detector: DetectorConfig | None = None,
        degree_cap: int | None = None,
    ):
        self.model = model
        self.detector = detector
        self.degree_cap = degree_cap

    def _validated(self, X, columns: int) -> np.ndarray:
        X = check_array(X, dtype=float, ensure_2d=True)
        if X.shape[1] != columns:
            raise ValueError(f"expected {columns} columns, got {X.shape[1]}")
        sizes = X[:, 0]
        if np.any(sizes < 1) or np.any(sizes != np.round(sizes)):
            raise ValueError("probe sizes must be positive integers")
        return X

    def fit(self, X, y=None):
        """Run the Bayes updates for every recorded outcome row."""
        X = self._validated(X, 3)
        parities = X[:, 2]
        if np.any((parities != 0) & (parities != 1)):
            raise ValueError("parity column must contain only 0 (even) or 1 (odd)")
        backend = make_model(self.model, self.detector)
        cap = self.degree_cap if self.degree_cap is not None else int(X[:, 0].sum())
        posterior = FourierPosterior.uniform(degree_cap=cap)
        for size, feedback, parity in X:
            posterior = bayes_update(
                posterior, int(size), float(feedback), Parity(int(parity)), backend
            )
        self.posterior_ = posterior
        self.sharpness_ = posterior.sharpness()
        self.estimate_ = posterior.mean_direction()
        self.holevo_variance_ = holevo_variance(self.sharpness_)
        self.n_resources_ = int(X[:, 0].sum())
        self.n_features_in_ = 3
        return self

    def predict_proba(self, X) -> np.ndarray:
        """Posterior-predictive parity probabilities for (size, feedback) rows."""
        check_is_fitted(self, "posterior_")
        X = self._validated(X, 2)
        backend = make_model(self.model, self.detector)
        posterior = self.posterior_
        out = np.empty((X.shape[0], 2))
        for i, (size, feedback) in enumerate(X):
            overlap = 0.0
            for m, b in backend.likelihood_harmonics(int(size), float(feedback)).items():
                if m == 0:
                    overlap += b.real * posterior.coef(0).real
                else:
                    overlap += 2.0 * (b * posterior.coef(-m)).real
            p_even = min(1.0, max(0.0, 0.5 + TWO_PI * overlap))
            out[i] = (p_even, 1.0 - p_even)
        return out
