"""Central numerical tolerance configuration.

All validation thresholds live in one record so property tests have a single
knob to turn. Functions accept an optional ``tol`` argument defaulting to
``DEFAULT``.
"""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    antisymmetry: float = 1e-12      # max-norm of M + M^T
    state_validity: float = 1e-10    # slack on eigenvalues of -M^2 in [0, 1]
    purity: float = 1e-9             # max-norm of M M^T - I for pure states
    orthogonality: float = 1e-8      # max-norm of Q Q^T - I
    isometry: float = 1e-10          # max-norm of V^dag V - I
    reconstruction: float = 1e-9     # canonical-form round trip
    prob_clamp: float = 1e-12        # slack when clamping probabilities to [0, 1]
    rotation_cut: float = 1e-14      # Givens angles below this are dropped
    coeff_prune: float = 1e-12       # Hamiltonian coefficients below this are dropped
    mitigation_guard: float = 1e-6   # smallest |s_hat / s| accepted as a divisor
    symmetry_check: float = 1e-10    # integral permutational-symmetry validation


DEFAULT = Tolerances()
