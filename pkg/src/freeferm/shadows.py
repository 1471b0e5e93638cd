"""Randomized-measurement tomography over the signed-permutation ensemble.

The measurement primitive rotates the state by a uniformly random signed
permutation of the Majorana axes (a matchgate Clifford circuit), measures in
the computational basis, and stores the pair (rotation, bit string). Linear
inversion of the measurement channel turns those samples into unbiased
estimates of every even Majorana-monomial expectation; the channel is
diagonal with eigenvalues binom(n, k) / binom(2n, 2k) on the degree-2k
sector.

Postprocessing iterates over diagonal index sets and pushes them through the
permutation, so a size-T sample yields all degree <= 2k estimates in
O(n^k T) time. Symmetry adjustment divides each degree sector by the
measured-to-ideal ratio of the corresponding particle-number moment,
cancelling noise that acts uniformly inside the sector.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb, ceil, log, sqrt

import numpy as np

from .gaussian import CovarianceMatrix, sample_measurement
from .majorana import MajoranaMonomial, SignedPermutation
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "ShadowSample",
    "ShadowAccumulator",
    "NoiseModel",
    "SymmetrySpec",
    "MitigationError",
    "sample_ensemble",
    "channel_eigenvalue",
    "shadow_norm_sq",
    "observable_norm_bound",
    "acquire",
    "accumulate",
    "estimates",
    "sample_bound",
    "symmetry_spec",
    "mitigate",
    "two_rdm",
    "ladder_product_expansion",
]


class MitigationError(RuntimeError):
    """Raised when a symmetry ratio is too close to zero to divide by."""


@dataclass(frozen=True)
class ShadowSample:
    """One snapshot: the applied rotation and the measured bit string."""

    q: SignedPermutation
    bits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "bits", tuple(int(b) for b in self.bits))
        if len(self.bits) != self.q.n_modes:
            raise ValueError("bit count must equal the mode count")


@dataclass(frozen=True)
class NoiseModel:
    """Classical readout channel applied bitwise after sampling.

    bit_flip flips each bit w.p. p, depolarizing w.p. p/2, amplitude_damping
    sends 1 -> 0 w.p. p. These reductions are exact for the corresponding
    single-qubit channels applied immediately before a Z-basis readout.
    """

    kind: str = "none"
    p: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "bit_flip", "depolarizing", "amplitude_damping"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("noise probability must lie in [0, 1]")

    def apply(self, bits, rng: np.random.Generator) -> tuple[int, ...]:
        arr = np.array(bits, dtype=np.uint8)[None, :]
        return tuple(int(b) for b in self.apply_batch(arr, rng)[0])

    def apply_batch(self, bits: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "none" or self.p == 0.0:
            return bits
        if self.kind == "bit_flip":
            flips = rng.random(bits.shape) < self.p
            return bits ^ flips.astype(np.uint8)
        if self.kind == "depolarizing":
            flips = rng.random(bits.shape) < 0.5 * self.p
            return bits ^ flips.astype(np.uint8)
        # amplitude damping: occupied bits decay to 0
        decay = rng.random(bits.shape) < self.p
        return np.where(decay, np.uint8(0), bits)


@dataclass(frozen=True)
class SymmetrySpec:
    """Known particle-number moments used for symmetry adjustment."""

    n_modes: int
    eta: int
    s2: float
    s4: float
    ancilla_added: bool


def channel_eigenvalue(n: int, k: int) -> Fraction:
    """Exact attenuation factor of the degree-2k sector."""
    if k < 0 or k > n:
        raise ValueError("degree index must satisfy 0 <= k <= n")
    return Fraction(comb(n, k), comb(2 * n, 2 * k))


def shadow_norm_sq(n: int, k: int) -> Fraction:
    """Squared shadow norm of a degree-2k monomial: the inverse eigenvalue."""
    return 1 / channel_eigenvalue(n, k)


def observable_norm_bound(poly) -> float:
    """Triangle-inequality bound on the shadow norm of a coefficient map.

    ``poly`` may be a MajoranaPolynomial or a plain {index set: coefficient}
    map; the identity component is ignored.
    """
    terms = poly.terms if hasattr(poly, "terms") else poly
    n = poly.n_modes if hasattr(poly, "n_modes") else None
    if n is None:
        top = max((max(idx) for idx in terms if idx), default=1)
        n = top // 2 + 1
    total = 0.0
    for idx, coeff in terms.items():
        if not idx:
            continue
        if len(idx) % 2:
            raise ValueError("observable must be even degree")
        k = len(idx) // 2
        total += abs(coeff) * sqrt(float(shadow_norm_sq(n, k)))
    return total


def sample_ensemble(n: int, rng: np.random.Generator, group: str = "b") -> SignedPermutation:
    """Uniform element of B(2n) (signed) or Alt(2n) (unsigned, even)."""
    perms, signs = _sample_ensemble_batch(n, rng, 1, group)
    return SignedPermutation(n, tuple(int(x) for x in perms[0]), tuple(int(s) for s in signs[0]))


def _sample_ensemble_batch(n, rng, size, group="b"):
    if n < 1:
        raise ValueError("n must be positive")
    if group not in ("b", "alt"):
        raise ValueError("group must be 'b' or 'alt'")
    m = 2 * n
    perms = np.argsort(rng.random((size, m)), axis=1)
    if group == "b":
        signs = np.where(rng.random((size, m)) < 0.5, -1, 1).astype(np.int8)
        return perms, signs
    # force even parity by swapping the first two images of odd permutations
    parity = _permutation_parity_batch(perms)
    odd = parity == 1
    perms[odd, 0], perms[odd, 1] = perms[odd, 1].copy(), perms[odd, 0].copy()
    signs = np.ones((size, m), dtype=np.int8)
    return perms, signs


def _permutation_parity_batch(perms: np.ndarray) -> np.ndarray:
    size, m = perms.shape
    parity = np.zeros(size, dtype=np.int64)
    for i in range(m):
        for j in range(i + 1, m):
            parity += perms[:, i] > perms[:, j]
    return parity % 2


def _rotate_covariance(m: np.ndarray, perm: np.ndarray, signs: np.ndarray) -> np.ndarray:
    """Q M Q^T for Q[u, v] = signs[u] delta(perm[u], v), elementwise."""
    rotated = m[np.ix_(perm, perm)] * np.outer(signs, signs)
    return rotated


def acquire(g: CovarianceMatrix, q: SignedPermutation, noise: NoiseModel,
            rng: np.random.Generator) -> ShadowSample:
    """Run one measurement primitive on the state: rotate, sample, add noise."""
    if g.n_modes != q.n_modes:
        raise ValueError("mode-count mismatch")
    rotated = CovarianceMatrix(
        _rotate_covariance(g.matrix, np.array(q.perm), np.array(q.signs, dtype=float)),
        validate=False,
    )
    bits = sample_measurement(rotated, rng)
    return ShadowSample(q, noise.apply(bits, rng))


def _sample_bits_batch(m: np.ndarray, perms: np.ndarray, signs: np.ndarray,
                       rng: np.random.Generator) -> np.ndarray:
    """Vectorized rotate-and-measure for a batch of signed permutations."""
    size = perms.shape[0]
    n = m.shape[0] // 2
    sf = signs.astype(float)
    rot = m[perms[:, :, None], perms[:, None, :]] * sf[:, :, None] * sf[:, None, :]
    bits = np.empty((size, n), dtype=np.uint8)
    draws = rng.random((size, n))
    for j in range(n):
        p1 = 0.5 * (1.0 - rot[:, 2 * j, 2 * j + 1])
        np.clip(p1, 0.0, 1.0, out=p1)
        bit = (draws[:, j] < p1).astype(np.uint8)
        bits[:, j] = bit
        if j == n - 1:
            break
        prob = np.where(bit == 1, p1, 1.0 - p1)
        coeff = np.where(bit == 1, 1.0, -1.0) / (2.0 * np.maximum(prob, 1e-300))
        row_a = rot[:, 2 * j, :].copy()
        row_b = rot[:, 2 * j + 1, :].copy()
        rot += coeff[:, None, None] * (
            row_a[:, :, None] * row_b[:, None, :] - row_b[:, :, None] * row_a[:, None, :]
        )
    return bits


class _Frame:
    """Precomputed index bookkeeping for degree sectors up to k_max."""

    _cache: dict = {}

    def __new__(cls, n_modes: int, k_max: int):
        key = (n_modes, k_max)
        if key in cls._cache:
            return cls._cache[key]
        self = super().__new__(cls)
        self.n_modes = n_modes
        self.k_max = k_max
        m = 2 * n_modes
        if not 1 <= k_max <= n_modes:
            raise ValueError("k_max must lie in [1, n_modes]")
        # colex ranking table: rank(mu) = sum_i C(mu_i, i + 1)
        self.rank_table = np.array(
            [[comb(x, t + 1) for t in range(2 * k_max)] for x in range(m)], dtype=np.int64
        )
        self.diag_sets = {}
        self.diag_qubits = {}
        self.sector_sets = {}
        self.lambda_inv = {}
        for j in range(1, k_max + 1):
            pairs = list(combinations(range(n_modes), j))
            self.diag_qubits[j] = np.array(pairs, dtype=np.int64)
            tau = np.array(
                [[idx for p in pair for idx in (2 * p, 2 * p + 1)] for pair in pairs],
                dtype=np.int64,
            )
            self.diag_sets[j] = tau
            # position r holds the set with colex rank r, matching rank_rows
            by_rank: list = [None] * comb(m, 2 * j)
            for idx in combinations(range(m), 2 * j):
                rank = sum(comb(x, t + 1) for t, x in enumerate(idx))
                by_rank[rank] = idx
            self.sector_sets[j] = by_rank
            self.lambda_inv[j] = float(1 / channel_eigenvalue(n_modes, j))
        cls._cache[key] = self
        return self

    def rank_rows(self, mu: np.ndarray) -> np.ndarray:
        """Colex ranks of ascending index rows."""
        cols = np.arange(mu.shape[1])
        return self.rank_table[mu, cols[None, :]].sum(axis=1)


def _sort_rows_with_parity(rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise sort plus permutation parity (rows hold distinct entries)."""
    width = rows.shape[1]
    parity = np.zeros(rows.shape[0], dtype=np.int64)
    for i in range(width):
        for j in range(i + 1, width):
            parity += rows[:, i] > rows[:, j]
    return np.sort(rows, axis=1), parity % 2


class ShadowAccumulator:
    """Running sums of single-shot estimates for every even set of degree <= 2 k_max.

    Memory is preallocated for the full sectors; sets never hit by a sample
    implicitly hold zero. Accumulators merge by entrywise addition, so
    parallel workers can each fill one and combine results deterministically.
    """

    def __init__(self, n_modes: int, k_max: int):
        self.frame = _Frame(n_modes, k_max)
        self.n_modes = n_modes
        self.k_max = k_max
        self.sums = {
            j: np.zeros(comb(2 * n_modes, 2 * j)) for j in range(1, k_max + 1)
        }
        self.count = 0

    def add(self, sample: ShadowSample):
        """Accumulate one snapshot in O(n^k_max) time."""
        if sample.q.n_modes != self.n_modes:
            raise ValueError("mode-count mismatch")
        perm = np.array(sample.q.perm)
        signs = np.array(sample.q.signs)
        bits = np.array(sample.bits, dtype=np.uint8)
        self.add_batch(perm[None, :], signs[None, :], bits[None, :])

    def add_batch(self, perms: np.ndarray, signs: np.ndarray, bits: np.ndarray):
        """Vectorized accumulation of a batch of snapshots."""
        size = perms.shape[0]
        if perms.shape[1] != 2 * self.n_modes or bits.shape[1] != self.n_modes:
            raise ValueError("batch shape mismatch")
        zsign = 1.0 - 2.0 * bits.astype(float)
        for j in range(1, self.k_max + 1):
            tau = self.frame.diag_sets[j]        # (S, 2j)
            qubits = self.frame.diag_qubits[j]   # (S, j)
            lam_inv = self.frame.lambda_inv[j]
            for t in range(tau.shape[0]):
                image = perms[:, tau[t]]
                mu, parity = _sort_rows_with_parity(image)
                sign = signs[:, tau[t]].prod(axis=1).astype(float)
                sign *= 1.0 - 2.0 * parity
                zval = zsign[:, qubits[t]].prod(axis=1)
                ranks = self.frame.rank_rows(mu)
                np.add.at(self.sums[j], ranks, lam_inv * sign * zval)
        self.count += size

    def merge(self, other: "ShadowAccumulator"):
        """Entrywise sum merge; associative and commutative."""
        if (other.n_modes, other.k_max) != (self.n_modes, self.k_max):
            raise ValueError("accumulator shape mismatch")
        for j in self.sums:
            self.sums[j] += other.sums[j]
        self.count += other.count

    def estimates(self) -> dict[tuple[int, ...], float]:
        """Empirical means keyed by ascending Majorana index sets."""
        if self.count < 1:
            raise ValueError("empty accumulator")
        out = {}
        for j in range(1, self.k_max + 1):
            means = self.sums[j] / self.count
            for r, idx in enumerate(self.frame.sector_sets[j]):
                out[idx] = float(means[r])
        return out


def accumulate(acc: ShadowAccumulator, sample: ShadowSample):
    acc.add(sample)


def estimates(acc: ShadowAccumulator) -> dict[tuple[int, ...], float]:
    return acc.estimates()


def sample_bound(epsilon: float, delta: float, n_observables: int,
                 max_sq_norm: float) -> int:
    """Sample count guaranteeing epsilon accuracy for bounded mean estimators.

    Conservative integerization of the Bernstein bound: the base count
    2 ln(2 L / delta) max_norm^2 / eps^2 is rounded up before applying the
    (1 + eps/3) factor, so the result is never below the analytic bound.
    """
    if not 0.0 < epsilon < 1.0 or not 0.0 < delta < 1.0:
        raise ValueError("epsilon and delta must lie in (0, 1)")
    if n_observables < 1:
        raise ValueError("need at least one observable")
    base = 2.0 * log(2.0 * n_observables / delta) / epsilon ** 2 * max_sq_norm
    return ceil((1.0 + epsilon / 3.0) * ceil(base))


def symmetry_spec(n: int, eta: int, auto_ancilla: bool = True,
                  tol: Tolerances = DEFAULT) -> SymmetrySpec:
    """Particle-number moments s2 = eta - n/2 and s4 = C(n,2)/2 - eta(n - eta).

    When either moment vanishes (for example at half filling) and
    ``auto_ancilla`` is set, one extra unoccupied mode is appended and the
    moments recomputed; they are then always nonzero for n > 1.
    """
    if not 0 <= eta <= n:
        raise ValueError("eta must lie in [0, n]")

    def moments(modes):
        s2 = eta - modes / 2.0
        s4 = comb(modes, 2) / 2.0 - eta * (modes - eta)
        return s2, s4

    s2, s4 = moments(n)
    ancilla = False
    if min(abs(s2), abs(s4)) < tol.mitigation_guard:
        if not auto_ancilla:
            raise MitigationError(
                "symmetry moment vanishes for this filling; enable the ancilla mode"
            )
        n = n + 1
        ancilla = True
        s2, s4 = moments(n)
        if min(abs(s2), abs(s4)) < tol.mitigation_guard:
            raise MitigationError("symmetry moments vanish even with an ancilla")
    return SymmetrySpec(n_modes=n, eta=eta, s2=s2, s4=s4, ancilla_added=ancilla)


def _symmetry_ratios(est: dict, spec: SymmetrySpec, tol: Tolerances) -> dict[int, float]:
    n = spec.n_modes
    s2_hat = -0.5 * sum(est[(2 * p, 2 * p + 1)] for p in range(n))
    s4_hat = 0.5 * sum(
        est[(2 * p, 2 * p + 1, 2 * q, 2 * q + 1)] for p, q in combinations(range(n), 2)
    )
    ratios = {1: s2_hat / spec.s2, 2: s4_hat / spec.s4}
    for k, r in ratios.items():
        if abs(r) < tol.mitigation_guard:
            raise MitigationError(
                f"measured symmetry ratio {r:.3e} in the degree-{2 * k} sector is too "
                "close to zero; mitigation would divide by it"
            )
    return ratios


def mitigate(est: dict, spec: SymmetrySpec, tol: Tolerances = DEFAULT) -> dict:
    """Symmetry-adjusted estimates: divide each sector by its measured ratio."""
    if any(len(idx) > 4 for idx in est):
        raise ValueError("symmetry adjustment is defined for the one- and two-body sectors")
    ratios = _symmetry_ratios(est, spec, tol)
    out = {}
    for idx, value in est.items():
        out[idx] = value / ratios[len(idx) // 2]
    return out


def ladder_product_expansion(n_modes: int, ops: list[tuple[int, bool]]) -> dict:
    """Expand a product of ladder operators over canonical Majorana monomials.

    ``ops`` lists (mode, dagger) factors left to right. Returns a map from
    ascending index sets (possibly empty, for the identity component) to
    complex coefficients against the canonical Hermitian monomials.
    """
    poly = {(): 1.0 + 0j}
    for mode, dagger in ops:
        even = MajoranaMonomial.canonical(n_modes, (2 * mode,))
        odd = MajoranaMonomial.canonical(n_modes, (2 * mode + 1,))
        factor = [(even, 0.5), (odd, -0.5j if dagger else 0.5j)]
        new: dict = {}
        for idx, coeff in poly.items():
            left = MajoranaMonomial.canonical(n_modes, idx)
            for mono, w in factor:
                prod = left * mono
                val = coeff * w * prod.phase_rel_canonical
                key = prod.indices
                new[key] = new.get(key, 0j) + val
        poly = new
    return poly


def two_rdm(est: dict, n: int) -> np.ndarray:
    """Assemble the two-body RDM from degree <= 4 Majorana estimates.

    Rows and columns run over ascending pairs (p, q); the (row, col) entry is
    the expectation of a_p+ a_q+ a_s a_r for row (p, q), column (r, s). Modes
    beyond ``n`` (an ancilla, for instance) are ignored.
    """
    pairs = list(combinations(range(n), 2))
    size = len(pairs)
    out = np.zeros((size, size), dtype=complex)
    for i, (p, q) in enumerate(pairs):
        for j, (r, s) in enumerate(pairs):
            if j < i:
                continue
            poly = ladder_product_expansion(
                n, [(p, True), (q, True), (s, False), (r, False)]
            )
            val = 0j
            for idx, coeff in poly.items():
                if not idx:
                    val += coeff
                elif len(idx) % 2 == 0:
                    val += coeff * est[idx]
            out[i, j] = val
            out[j, i] = val.conjugate()
    return out


def exact_two_rdm(d1: np.ndarray) -> np.ndarray:
    """Determinantal two-body RDM of a Slater state, for ground truths.

    Entry ((p, q), (r, s)) is <a_p+ a_q+ a_s a_r> = D_rp D_sq - D_sp D_rq,
    with D_pq = <a_q+ a_p> the one-body RDM.
    """
    d1 = np.asarray(d1)
    n = d1.shape[0]
    pairs = list(combinations(range(n), 2))
    out = np.zeros((len(pairs), len(pairs)), dtype=complex)
    for i, (p, q) in enumerate(pairs):
        for j, (r, s) in enumerate(pairs):
            out[i, j] = d1[r, p] * d1[s, q] - d1[s, p] * d1[r, q]
    return out
