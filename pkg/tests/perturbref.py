"""Exact analytic evaluation of the time-ordered triple integral.

Independent of both the shipped closed form (which drops fast-oscillating
terms) and the quadrature oracle: the ladder's single operator path is a
sum over eight branch assignments of a separable exponential, whose nested
simplex integral has an elementary antiderivative.  Used to pin the oracle
at moderate detunings where everything is cheap.
"""

import cmath

from phasim.perturbation import FourLevelParams


def exact_first_order(p: FourLevelParams, x: float) -> complex:
    branches = {
        "+": (p.delta1_plus, p.delta2_plus, p.k_plus),
        "-": (p.delta1_minus, p.delta2_minus, p.k_minus),
    }
    t = p.t

    def segment(freq: complex) -> complex:
        if abs(freq) < 1e-300:
            return t
        return (cmath.exp(1j * freq * t) - 1.0) / (1j * freq)

    total = 0j
    for b3 in "+-":  # ground -> first intermediate (signal photon)
        for b2 in "+-":  # intermediate hop (drive photon emitted)
            for b1 in "+-":  # last intermediate -> top (signal photon)
                d1_3, _, k3 = branches[b3]
                d1_2, d2_2, _ = branches[b2]
                _, d2_1, k1 = branches[b1]
                alpha = d2_1
                beta = -(d1_2 + d2_2)
                gamma = d1_3
                t1 = segment(alpha + beta + gamma) / (1j * (beta + gamma))
                t2 = -segment(alpha) / (1j * (beta + gamma))
                t3 = -segment(alpha + beta) / (1j * beta)
                t4 = segment(alpha) / (1j * beta)
                total += cmath.exp(1j * (k1 + k3) * x) * (t1 + t2 + t3 + t4) / (1j * gamma)
    return 1j * p.omega_s**2 * p.omega_d * total
