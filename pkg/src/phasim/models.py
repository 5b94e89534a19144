"""Outcome probabilities and rates for the two measurement back-ends.

The ideal back-end detects an n-photon two-mode entangled probe behind a
Mach-Zehnder interferometer; the even/odd parity of the detector counts
follows the fringe ``(1 + (-1)^u cos[n(phi - feedback)]) / 2``.  The
classical back-end replaces the probe by two counter-propagating classical
signal beams driving a frequency-selective 2n-level multiphoton resonance;
its excitation probability reproduces the same fringe once normalized by
its maximum, so an adaptive estimator can treat the two interchangeably.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from enum import IntEnum

from .errors import (
    NonUniformDetuningsError,
    RegimeViolationError,
    ZeroDetuningError,
)

TWO_PI = 2.0 * math.pi


def wrap_phase(value: float) -> float:
    """Map an angle in radians onto the canonical interval [0, 2*pi)."""
    return value % TWO_PI


class Parity(IntEnum):
    """Even/odd classification of the detector record carrying the phase."""

    EVEN = 0
    ODD = 1


def parity_sign(parity: Parity) -> float:
    """(-1)**u for an outcome u."""
    return -1.0 if parity == Parity.ODD else 1.0


@dataclass(frozen=True)
class DyadicPhase:
    """A phase of the form pi * sum_k a_k / 2**k with binary digits a_k.

    ``bits`` stores the digits finest-first, (a_K, ..., a_0); ``depth`` is K.
    """

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.bits:
            raise ValueError("at least one digit required")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("digits must be 0 or 1")

    @property
    def depth(self) -> int:
        return len(self.bits) - 1

    def bit(self, k: int) -> int:
        """Digit a_k (k = 0 is the coarsest, k = depth the finest)."""
        return self.bits[self.depth - k]

    def to_phase(self) -> float:
        k = self.depth
        return wrap_phase(math.pi * sum(b / 2.0 ** (k - i) for i, b in enumerate(self.bits)))

    @classmethod
    def from_phase(cls, phase: float, depth: int) -> "DyadicPhase":
        """Nearest depth-K dyadic phase; exact round-trip for K-bit inputs."""
        if depth < 0:
            raise ValueError("depth must be >= 0")
        scaled = round(wrap_phase(phase) / math.pi * 2.0**depth) % 2 ** (depth + 1)
        bits = tuple((scaled >> i) & 1 for i in range(depth + 1))
        return cls(bits)


@dataclass(frozen=True)
class DetectorConfig:
    """Parameters of the classical-light multiphoton detector.

    ``detunings`` holds the (plus, minus) one-photon detuning pairs of the
    2(n-1) intermediate transitions; ``delta`` is the beat frequency between
    the two signal fields and ``t`` the interaction time.  The constructor
    validates structure only; regime conditions are reported, not enforced,
    by :func:`validity_report`.
    """

    omega_s: float
    omega_d: float
    detunings: tuple[tuple[float, float], ...]
    delta: float
    t: float
    n: int
    gamma: float = 0.0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("photon number n must be >= 1")
        if len(self.detunings) != 2 * (self.n - 1):
            raise ValueError(
                f"need 2(n-1) = {2 * (self.n - 1)} detuning pairs, got {len(self.detunings)}"
            )
        if self.omega_s <= 0 or self.omega_d <= 0:
            raise ValueError("Rabi frequencies must be positive")
        if self.delta <= 0:
            raise ValueError("beat frequency must be positive")
        if self.t <= 0:
            raise ValueError("interaction time must be positive")
        if self.gamma < 0:
            raise ValueError("decay rate must be >= 0")


@dataclass(frozen=True)
class DetectorValidity:
    """Regime flags for a detector configuration (informative, not blocking).

    Hard-precondition quantities carry two levels: ``perturbative`` is the
    formula's < 1 requirement, ``deep_perturbative`` the comfortable < 0.1
    band.  ``nonresonant_excursion`` is how far the normalized exchange
    fringe pokes outside [0, 1] (the sampler clamps it away).
    """

    omega_eff_t: float
    gamma_t: float
    delta_t: float
    detuning_product_ratio: float
    nonresonant_excursion: float
    perturbative: bool = field(init=False)
    deep_perturbative: bool = field(init=False)
    narrowband_gamma: bool = field(init=False)
    narrowband_delta: bool = field(init=False)
    detuning_products_balanced: bool = field(init=False)
    nonresonant_clamped: bool = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "perturbative", abs(self.omega_eff_t) < 1.0)
        object.__setattr__(self, "deep_perturbative", abs(self.omega_eff_t) < 0.1)
        object.__setattr__(self, "narrowband_gamma", self.gamma_t < 1.0)
        # "much larger than one" pinned at > 10 for reporting purposes
        object.__setattr__(self, "narrowband_delta", self.delta_t > 10.0)
        object.__setattr__(
            self,
            "detuning_products_balanced",
            abs(self.detuning_product_ratio - 1.0) <= 0.1,
        )
        object.__setattr__(self, "nonresonant_clamped", self.nonresonant_excursion > 0.0)


def noon_outcome_prob(n: int, phi: float, feedback: float, parity: Parity) -> float:
    """Parity-outcome probability of the ideal n-photon interferometer.

    P(u | phi) = (1 + (-1)^u cos[n (phi - feedback)]) / 2, so the even and
    odd branches sum to one exactly.
    """
    if n < 1:
        raise ValueError("photon number n must be >= 1")
    p = 0.5 * (1.0 + parity_sign(parity) * math.cos(n * (phi - feedback)))
    return min(1.0, max(0.0, p))


def effective_rabi(cfg: DetectorConfig) -> float:
    """Effective 2n-1-photon Rabi frequency of the classical detector.

    omega_s**n * omega_d**(n-1) divided by the product of the n-1 adjacent
    detuning pairs; the plus branch of each pair is used.  May be negative;
    downstream rates use the magnitude.
    """
    denom = 1.0
    for j in range(cfg.n - 1):
        d_odd = cfg.detunings[2 * j][0]
        d_even = cfg.detunings[2 * j + 1][0]
        if d_odd == 0.0 or d_even == 0.0:
            raise ZeroDetuningError(f"detuning pair {j + 1} contains a zero")
        denom *= d_odd * d_even
    return cfg.omega_s**cfg.n * cfg.omega_d ** (cfg.n - 1) / denom


def _nonresonant_weight(cfg: DetectorConfig) -> float:
    """n sin(delta t) / (delta t), the leading photon-exchange weight."""
    dt = cfg.delta * cfg.t
    return cfg.n * math.sin(dt) / dt


def _check_perturbative(cfg: DetectorConfig) -> float:
    omega_eff = effective_rabi(cfg)
    if abs(omega_eff) * cfg.t >= 1.0:
        raise RegimeViolationError("omega_eff * t < 1", abs(omega_eff) * cfg.t)
    return omega_eff


def classical_excitation_prob(
    cfg: DetectorConfig, phi: float, feedback: float, include_nonresonant: bool = False
) -> float:
    """Upper-level occupation probability after the interaction time.

    Resonant form: 2 (omega_eff t)^2 {1 + cos[n (phi - feedback)]}.  With
    ``include_nonresonant`` the one-photon-exchange term
    4 (n sin(dt)/dt) cos[n/2 (phi-feedback)] cos[(n-2)/2 (phi-feedback)]
    is added inside the braces.  The result is clamped below at zero so a
    sampler stays total.
    """
    omega_eff = _check_perturbative(cfg)
    diff = phi - feedback
    braces = 1.0 + math.cos(cfg.n * diff)
    if include_nonresonant:
        weight = _nonresonant_weight(cfg)
        if abs(weight) >= 1.0:
            raise RegimeViolationError("n |sin(delta t)| / (delta t) < 1", abs(weight))
        braces += 4.0 * weight * math.cos(0.5 * cfg.n * diff) * math.cos(0.5 * (cfg.n - 2) * diff)
    scale = 2.0 * (omega_eff * cfg.t) ** 2
    return max(0.0, scale * braces)


def classical_outcome_prob(
    cfg: DetectorConfig,
    phi: float,
    feedback: float,
    parity: Parity,
    include_nonresonant: bool = False,
) -> float:
    """Two-outcome probability of the classical detector.

    The excitation probability is normalized by its fringe maximum
    4 (omega_eff t)^2 and read as the even-parity branch; odd is the
    complement.  In the resonant case this coincides with the ideal
    fringe for every phase pair.
    """
    omega_eff = _check_perturbative(cfg)
    excitation = classical_excitation_prob(cfg, phi, feedback, include_nonresonant)
    p_even = excitation / (4.0 * (omega_eff * cfg.t) ** 2)
    p_even = min(1.0, max(0.0, p_even))
    return p_even if parity == Parity.EVEN else 1.0 - p_even


def max_excitation_rate(cfg: DetectorConfig) -> float:
    """Maximal excitation rate 8 omega_eff^2 t at the fringe peak."""
    return 8.0 * effective_rabi(cfg) ** 2 * cfg.t


def rate_scaling(cfg: DetectorConfig) -> tuple[float, float]:
    """Per-photon efficiency analogue and peak rate for a uniform ladder.

    Returns (eta, r_max) with eta = |omega_s omega_d / delta_1^2|^2 and
    r_max = 2 |2 delta_1^2 / omega_d|^2 eta^n t; requires all detunings to
    share one magnitude, in which case r_max equals
    :func:`max_excitation_rate` up to rounding.
    """
    if cfg.n < 2:
        raise ValueError("rate scaling needs at least one intermediate detuning pair")
    magnitudes = {abs(d) for pair in cfg.detunings for d in pair}
    if len(magnitudes) != 1:
        raise NonUniformDetuningsError(f"detuning magnitudes differ: {sorted(magnitudes)}")
    mag = magnitudes.pop()
    if mag == 0.0:
        raise ZeroDetuningError("uniform detuning magnitude is zero")
    eta = abs(cfg.omega_s * cfg.omega_d / mag**2) ** 2
    r_max = 2.0 * abs(2.0 * mag**2 / cfg.omega_d) ** 2 * eta**cfg.n * cfg.t
    return eta, r_max


def accuracy_factor(cfg: DetectorConfig) -> float:
    """Multiplicative accuracy of digit recovery under photon exchange.

    1 / (1 + 2 n sin(delta t)/(delta t)); approaches one as delta*t grows.
    """
    weight = 2.0 * _nonresonant_weight(cfg)
    if abs(weight) >= 1.0:
        raise RegimeViolationError("2 n |sin(delta t)| / (delta t) < 1", abs(weight))
    return 1.0 / (1.0 + weight)


def validity_report(cfg: DetectorConfig) -> DetectorValidity:
    """Collect the regime flags of a configuration without rejecting it."""
    try:
        omega_eff_t = abs(effective_rabi(cfg)) * cfg.t
    except ZeroDetuningError:
        omega_eff_t = math.inf
    plus = minus = 1.0
    for d_plus, d_minus in cfg.detunings:
        plus *= d_plus
        minus *= d_minus
    ratio = abs(plus / minus) if minus != 0.0 else math.inf

    # scan the normalized exchange fringe for overshoot past [0, 1]
    weight = _nonresonant_weight(cfg)
    excursion = 0.0
    for k in range(512):
        diff = TWO_PI * k / 512
        value = (
            0.5
            + 0.5 * math.cos(cfg.n * diff)
            + weight * (math.cos((cfg.n - 1) * diff) + math.cos(diff))
        )
        excursion = max(excursion, value - 1.0, -value)
    return DetectorValidity(
        omega_eff_t=omega_eff_t,
        gamma_t=cfg.gamma * cfg.t,
        delta_t=cfg.delta * cfg.t,
        detuning_product_ratio=ratio,
        nonresonant_excursion=excursion,
    )


def default_detector(n: int = 2) -> DetectorConfig:
    """A valid-regime configuration usable for any photon number.

    Perturbative, narrow-band (delta t = 20, gamma t < 1), and with branch
    detuning products balanced within 10%.
    """
    delta = 0.05
    return DetectorConfig(
        omega_s=1e-3,
        omega_d=1e-3,
        detunings=tuple((1.0, 1.0 + delta) for _ in range(2 * (n - 1))),
        delta=delta,
        t=400.0,
        n=n,
        gamma=1e-3,
    )


class MeasurementModel(ABC):
    """Polymorphic outcome-probability source used by the estimator.

    Besides the sampling probability, a model exposes the parity-odd part
    of its likelihood as complex Fourier coefficients: P(u | phi) =
    1/2 + (-1)^u Re-sum of b_m e^{i m phi} with b_{-m} = conj(b_m), which is
    what the posterior machinery consumes.
    """

    name: str = "abstract"

    @abstractmethod
    def outcome_prob(self, n: int, phi: float, feedback: float, parity: Parity) -> float:
        """Probability of observing ``parity`` for a true phase ``phi``."""

    @abstractmethod
    def likelihood_harmonics(self, n: int, feedback: float) -> dict[int, complex]:
        """Parity-odd likelihood coefficients {m: b_m} for m >= 0 (b_0 real)."""


class IdealNoonModel(MeasurementModel):
    """Noiseless n-photon entangled-probe interferometer."""

    name = "ideal"

    def outcome_prob(self, n: int, phi: float, feedback: float, parity: Parity) -> float:
        return noon_outcome_prob(n, phi, feedback, parity)

    def likelihood_harmonics(self, n: int, feedback: float) -> dict[int, complex]:
        return {n: 0.25 * complex(math.cos(n * feedback), -math.sin(n * feedback))}


class ClassicalLightModel(MeasurementModel):
    """Classical-light multiphoton detector, resonant or with exchange error.

    The supplied configuration acts as a template: rounds probing a photon
    number other than ``template.n`` reuse its field amplitudes, leading
    detuning pair, beat frequency and interaction time on the matching
    ladder length.
    """

    def __init__(self, template: DetectorConfig, include_nonresonant: bool = False):
        self.template = template
        self.include_nonresonant = include_nonresonant
        self.name = "classical-nonresonant" if include_nonresonant else "classical-resonant"
        self._configs: dict[int, DetectorConfig] = {template.n: template}

    def config_for(self, n: int) -> DetectorConfig:
        cfg = self._configs.get(n)
        if cfg is None:
            lead = self.template.detunings[0] if self.template.detunings else (1.0, 1.0 + self.template.delta)
            cfg = replace(self.template, n=n, detunings=tuple(lead for _ in range(2 * (n - 1))))
            self._configs[n] = cfg
        return cfg

    def outcome_prob(self, n: int, phi: float, feedback: float, parity: Parity) -> float:
        return classical_outcome_prob(
            self.config_for(n), phi, feedback, parity, self.include_nonresonant
        )

    def likelihood_harmonics(self, n: int, feedback: float) -> dict[int, complex]:
        coeffs: dict[int, complex] = {
            n: 0.25 * complex(math.cos(n * feedback), -math.sin(n * feedback))
        }
        if self.include_nonresonant:
            half_weight = 0.5 * _nonresonant_weight(self.config_for(n))
            for m in (1, n - 1):
                term = half_weight * complex(math.cos(m * feedback), -math.sin(m * feedback))
                coeffs[m] = coeffs.get(m, 0.0) + term
        return coeffs


def make_model(
    name: str,
    detector: DetectorConfig | None = None,
) -> MeasurementModel:
    """Instantiate a measurement back-end from its configuration name."""
    if name == "ideal":
        return IdealNoonModel()
    if name in ("classical-resonant", "classical-nonresonant"):
        template = detector if detector is not None else default_detector()
        return ClassicalLightModel(template, include_nonresonant=name.endswith("nonresonant"))
    raise ValueError(f"unknown measurement model {name!r}")
