"""Circular Bayesian posterior over the unknown phase, in Fourier form.

A density p(phi) on the circle is stored as the truncated coefficient
sequence c_0 .. c_J with c_j = (1/2pi) int e^{-i j phi} p(phi) dphi and
c_{-j} = conj(c_j); normalization pins c_0 = 1/(2pi).  Parity likelihoods
are trigonometric polynomials, so a Bayes update is a short coefficient
convolution and the sharpness functionals reduce to a handful of
coefficient lookups.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from .errors import DegreeOverflowError
from .models import MeasurementModel, Parity, parity_sign, wrap_phase

TWO_PI = 2.0 * math.pi

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_FLAT_SPAN = 1e-10


class FourierPosterior:
    """Truncated Fourier representation of a circular density."""

    __slots__ = ("coeffs", "degree_cap")

    def __init__(self, coeffs, degree_cap: int | None = None):
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.ndim != 1 or coeffs.size == 0:
            raise ValueError("coefficients must form a nonempty 1-d sequence")
        self.coeffs = coeffs
        self.degree_cap = degree_cap

    @classmethod
    def uniform(cls, degree_cap: int | None = None) -> "FourierPosterior":
        return cls(np.array([1.0 / TWO_PI], dtype=complex), degree_cap)

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def coef(self, j: int) -> complex:
        """Coefficient c_j for any signed index (zero beyond the degree)."""
        if abs(j) > self.degree:
            return 0.0 + 0.0j
        return self.coeffs[j] if j >= 0 else np.conj(self.coeffs[-j])

    def density(self, phi) -> np.ndarray:
        """Reconstructed density at the given angles (vectorized)."""
        phi = np.atleast_1d(np.asarray(phi, dtype=float))
        j = np.arange(1, self.degree + 1)
        osc = np.exp(1j * phi[:, None] * j[None, :]) @ self.coeffs[1:]
        return np.real(self.coeffs[0]) + 2.0 * np.real(osc)

    def sharpness(self) -> float:
        """First circular moment magnitude |<e^{i phi}>| = 2 pi |c_1|."""
        return float(TWO_PI * abs(self.coef(1)))

    def mean_direction(self) -> float:
        """Phase of the first circular moment, in [0, 2 pi)."""
        moment = np.conj(self.coef(1))
        return wrap_phase(math.atan2(moment.imag, moment.real))

    def normalization_error(self) -> float:
        return abs(TWO_PI * self.coeffs[0] - 1.0)

    def min_density(self, oversample: int = 4) -> float:
        """Smallest reconstructed value on a uniform oversampled grid."""
        points = max(64, oversample * max(1, self.degree))
        grid = np.linspace(0.0, TWO_PI, points, endpoint=False)
        return float(self.density(grid).min())


def _signed_harmonics(
    model: MeasurementModel, n: int, feedback: float, parity: Parity
) -> list[tuple[int, complex]]:
    """Full signed coefficient list of P(u | phi) for the given outcome."""
    sign = parity_sign(parity)
    terms: list[tuple[int, complex]] = []
    constant = 0.5 + 0.0j
    for m, b in model.likelihood_harmonics(n, feedback).items():
        if m == 0:
            constant += sign * b.real
        else:
            terms.append((m, sign * b))
            terms.append((-m, sign * np.conj(b)))
    terms.append((0, constant))
    return terms


def bayes_update(
    posterior: FourierPosterior,
    n: int,
    feedback: float,
    parity: Parity,
    model: MeasurementModel,
) -> FourierPosterior:
    """Multiply the posterior by the outcome likelihood and renormalize.

    The degree grows by the model's highest likelihood harmonic (n); an
    update that would exceed the configured cap raises instead of
    truncating silently.
    """
    harmonics = _signed_harmonics(model, n, feedback, parity)
    growth = max(abs(m) for m, _ in harmonics)
    degree = posterior.degree
    new_degree = degree + growth
    cap = posterior.degree_cap
    if cap is not None and new_degree > cap:
        raise DegreeOverflowError(f"update needs degree {new_degree}, cap is {cap}")

    # signed extension c_{-J} .. c_J padded so every shifted read is in range
    c = posterior.coeffs
    centre = degree + 2 * growth
    padded = np.zeros(2 * centre + 1, dtype=complex)
    padded[centre - degree : centre] = np.conj(c[1:][::-1])
    padded[centre : centre + degree + 1] = c

    new = np.zeros(new_degree + 1, dtype=complex)
    for m, a in harmonics:
        start = centre - m
        new += a * padded[start : start + new_degree + 1]

    norm = TWO_PI * new[0].real
    if norm <= 0.0:
        raise ValueError("outcome has nonpositive marginal probability")
    return FourierPosterior(new / norm, cap)


def expected_sharpness(
    posterior: FourierPosterior,
    n: int,
    feedback: float,
    model: MeasurementModel,
    harmonic: int = 1,
) -> float:
    """Outcome-averaged sharpness of the chosen harmonic after a measurement.

    sum_u | int e^{i h phi} p(phi) P(u | phi, feedback) dphi |, which in
    coefficient form is |Z + W| + |Z - W| with Z = pi c_{-h} and W built
    from the likelihood harmonics shifted by h.
    """
    h = harmonic
    z = math.pi * posterior.coef(-h)
    w = 0.0 + 0.0j
    for m, b in model.likelihood_harmonics(n, feedback).items():
        if m == 0:
            w += TWO_PI * b.real * posterior.coef(-h)
        else:
            w += TWO_PI * (b * posterior.coef(-h - m) + np.conj(b) * posterior.coef(m - h))
    return float(abs(z + w) + abs(z - w))


class _SharpnessObjective:
    """Expected sharpness as a function of the feedback phase.

    Likelihoods depend on phi - feedback only, so the coefficient of
    harmonic m rotates as e^{-i m feedback}; the objective collapses to
    |Z + W(feedback)| + |Z - W(feedback)| with a short exponential sum W,
    cheap to evaluate on arrays of candidates.
    """

    def __init__(
        self,
        posterior: FourierPosterior,
        n: int,
        model: MeasurementModel,
        harmonic: int,
    ):
        h = harmonic
        self.z = math.pi * posterior.coef(-h)
        self.w_const = 0.0 + 0.0j
        amps: list[tuple[int, complex, complex]] = []
        for m, b in model.likelihood_harmonics(n, 0.0).items():
            if m == 0:
                self.w_const += TWO_PI * b.real * posterior.coef(-h)
            else:
                amps.append(
                    (
                        m,
                        TWO_PI * b * posterior.coef(-h - m),
                        TWO_PI * np.conj(b) * posterior.coef(m - h),
                    )
                )
        self.amps = amps

    def _w(self, feedback):
        w = self.w_const
        for m, lower, upper in self.amps:
            w = w + lower * np.exp(-1j * m * feedback) + upper * np.exp(1j * m * feedback)
        return w

    def __call__(self, feedback):
        w = self._w(feedback)
        return np.abs(self.z + w) + np.abs(self.z - w)

    def derivative(self, feedback: float) -> float:
        w = complex(self._w(feedback))
        dw = 0.0 + 0.0j
        for m, lower, upper in self.amps:
            dw += (-1j * m) * lower * cmath.exp(-1j * m * feedback)
            dw += (1j * m) * upper * cmath.exp(1j * m * feedback)
        grad = 0.0
        for vec, sign in ((self.z + w, 1.0), (self.z - w, -1.0)):
            mag = abs(vec)
            if mag > 1e-300:
                grad += sign * (vec.conjugate() * dw).real / mag
        return grad


def choose_feedback(
    posterior: FourierPosterior,
    n: int,
    model: MeasurementModel,
    grid: int = 256,
    refine_tol: float = 1e-10,
) -> float:
    """Feedback phase maximizing the expected sharpness of the update.

    A uniform candidate grid over one objective period is refined by
    golden-section search; ties go to the smallest candidate.  When the
    first-harmonic objective is flat (the posterior holds no harmonics a
    size-n probe can couple to the fundamental), the nth-harmonic sharpness
    is maximized instead, which aligns the probe with the structure the
    coarser rounds still have to resolve; a fully symmetric state yields 0.
    """
    if grid < 8:
        raise ValueError("candidate grid must have at least 8 points")
    keys = set(model.likelihood_harmonics(n, 0.0))
    period = TWO_PI / n if keys == {n} else TWO_PI
    candidates = np.arange(grid) * (period / grid)

    for harmonic in dict.fromkeys((1, n)):
        objective = _SharpnessObjective(posterior, n, model, harmonic)
        values = objective(candidates)
        top = values.max()
        if top - values.min() > _FLAT_SPAN * max(1.0, top):
            break
    else:
        return 0.0

    best_index = int(np.argmax(values))
    step = period / grid
    best_phi = float(candidates[best_index])
    best_val = float(values[best_index])

    lo = best_phi - step
    hi = best_phi + step
    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    fc, fd = objective(c), objective(d)
    while hi - lo > refine_tol:
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - _GOLDEN * (hi - lo)
            fc = objective(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _GOLDEN * (hi - lo)
            fd = objective(d)
    stationary = None
    # the value surface is flat to machine precision within ~sqrt(eps) of a
    # smooth maximum, so locate the stationary point from the exact gradient
    if objective.derivative(best_phi - step) > 0.0 > objective.derivative(best_phi + step):
        a, b = best_phi - step, best_phi + step
        for _ in range(60):
            mid = 0.5 * (a + b)
            if objective.derivative(mid) > 0.0:
                a = mid
            else:
                b = mid
        stationary = 0.5 * (a + b)
    # keep the smallest grid candidate unless a refinement strictly improves
    for candidate in (0.5 * (lo + hi), stationary):
        if candidate is not None and float(objective(candidate)) > best_val:
            best_phi, best_val = candidate, float(objective(candidate))
    return wrap_phase(best_phi)
