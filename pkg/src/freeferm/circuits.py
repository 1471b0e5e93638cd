"""Compile orthogonal Majorana rotations into matchgate circuits.

Any Q in O(2n) is realized over the gate set {Z rotation, nearest-neighbor
XX rotation, one layer of Pauli gates}. Two schemes are provided:

* ``compile_naive``: element-wise QR elimination into adjacent-axis Givens
  rotations followed by a sign layer.
* ``compile_blocked``: a two-sided elimination that zeroes 2x2 blocks of Q
  (treating each pair of Majorana axes as one qubit) with 4x4 orthogonal
  factors, a single corner Givens rotation, and a sign layer. Each 4x4
  factor is reduced to five elementary rotations; local sign layers are
  commuted through and folded into the single global Pauli layer.

Gate conventions (Heisenberg action U^dag g_u U = sum_v O_uv g_v):
* ZRot(p, t)  = exp(-i t Z_p / 2)        acts as Givens(t) on axes (2p, 2p+1)
* XXRot(p, t) = exp(-i t X_p X_{p+1}/2)  acts as Givens(t) on axes (2p+1, 2p+2)
* PauliLayer(P) acts as diag(+-1), -1 on each axis whose generator
  anticommutes with P.

``program_to_orthogonal`` composes these actions to recover Q without any
dense simulation, which is the compiler's verifier.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import atan2, cos, sin
from typing import Union

import numpy as np

from . import dense as _dense
from .majorana import multiply_pauli_letters, to_pauli, MajoranaMonomial
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "ZRot",
    "XXRot",
    "PauliLayer",
    "Gate",
    "ProgramStats",
    "GateProgram",
    "compile_naive",
    "compile_blocked",
    "program_to_orthogonal",
    "stats_compare",
    "dense_unitary",
]


@dataclass(frozen=True)
class ZRot:
    qubit: int
    theta: float


@dataclass(frozen=True)
class XXRot:
    qubit: int  # acts on (qubit, qubit + 1)
    theta: float


@dataclass(frozen=True)
class PauliLayer:
    letters: str


Gate = Union[ZRot, XXRot, PauliLayer]


@dataclass(frozen=True)
class ProgramStats:
    one_qubit_count: int
    two_qubit_count: int
    depth: int

    @property
    def rotation_count(self) -> int:
        return self.one_qubit_count + self.two_qubit_count


def _gate_support(gate: Gate) -> tuple[int, ...]:
    if isinstance(gate, ZRot):
        return (gate.qubit,)
    if isinstance(gate, XXRot):
        return (gate.qubit, gate.qubit + 1)
    return tuple(i for i, c in enumerate(gate.letters) if c != "I")


@dataclass(frozen=True)
class GateProgram:
    """Time-ordered gate list; the first gate acts on the state first."""

    n_qubits: int
    gates: tuple[Gate, ...]

    def __post_init__(self):
        layers = sum(isinstance(g, PauliLayer) for g in self.gates)
        if layers > 1:
            raise ValueError("a program carries at most one Pauli layer")
        for g in self.gates:
            if isinstance(g, XXRot) and not 0 <= g.qubit < self.n_qubits - 1:
                raise ValueError("XX rotation must act on adjacent qubits in range")
            if isinstance(g, ZRot) and not 0 <= g.qubit < self.n_qubits:
                raise ValueError("Z rotation qubit out of range")
            if isinstance(g, PauliLayer) and len(g.letters) != self.n_qubits:
                raise ValueError("Pauli layer length mismatch")

    def stats(self) -> ProgramStats:
        ones = sum(isinstance(g, ZRot) for g in self.gates)
        twos = sum(isinstance(g, XXRot) for g in self.gates)
        frontier = [0] * self.n_qubits
        depth = 0
        for g in self.gates:
            support = _gate_support(g)
            if not support:
                continue
            layer = 1 + max(frontier[q] for q in support)
            for q in support:
                frontier[q] = layer
            depth = max(depth, layer)
        return ProgramStats(ones, twos, depth)


# ---------------------------------------------------------------------------
# primitive factors
#
# A primitive is either ("givens", axis, theta) for the rotation
# [[cos t, -sin t], [sin t, cos t]] embedded at (axis, axis + 1), or
# ("diag", sign_vector). Primitive lists are kept in time order.
# ---------------------------------------------------------------------------


def _givens_matrix(dim: int, axis: int, theta: float) -> np.ndarray:
    g = np.eye(dim)
    c, s = cos(theta), sin(theta)
    g[axis, axis] = c
    g[axis + 1, axis + 1] = c
    g[axis, axis + 1] = -s
    g[axis + 1, axis] = s
    return g


def _layer_letters(signs) -> str:
    """Pauli string realizing g_u -> signs[u] g_u, as a single layer.

    Per mode pair: (+, +) -> I; (-, -) -> Z_p; (+, -) -> X_p with a Z tail on
    qubits p+1..n-1; (-, +) -> Y_p with the same tail.
    """
    n = len(signs) // 2
    letters = "I" * n
    for p in range(n):
        a, b = signs[2 * p], signs[2 * p + 1]
        if a > 0 and b > 0:
            continue
        if a < 0 and b < 0:
            word = "I" * p + "Z" + "I" * (n - p - 1)
        else:
            head = "X" if a > 0 else "Y"
            word = "I" * p + head + "Z" * (n - p - 1)
        letters, _ = multiply_pauli_letters(letters, word)
    return letters


def _layer_action(letters: str) -> np.ndarray:
    """Diagonal orthogonal action of a Pauli layer on the Majorana axes."""
    n = len(letters)
    signs = np.ones(2 * n)
    for u in range(2 * n):
        p = to_pauli(MajoranaMonomial.canonical(n, (u,)))
        clashes = sum(
            1 for x, y in zip(letters, p.letters) if x != "I" and y != "I" and x != y
        )
        if clashes % 2:
            signs[u] = -1.0
    return signs


def _assemble(n_qubits: int, primitives, tol: Tolerances) -> GateProgram:
    """Defer sign layers to the end, merge adjacent same-axis rotations.

    Pushing a sign layer past a later rotation on axes (a, a+1) multiplies its
    angle by signs[a] * signs[a+1]; merging is allowed when no intervening
    gate touched the rotation's qubits.
    """
    signs = [1.0] * (2 * n_qubits)
    rots: list[list] = []  # [axis, theta]
    last_on_qubit = [-1] * n_qubits

    def qubits_of(axis):
        if axis % 2 == 0:
            return (axis // 2,)
        return (axis // 2, axis // 2 + 1)

    for prim in primitives:
        if prim[0] == "diag":
            for u, s in enumerate(prim[1]):
                signs[u] *= s
            continue
        _, axis, theta = prim
        theta = signs[axis] * signs[axis + 1] * theta
        qs = qubits_of(axis)
        prev = max(last_on_qubit[q] for q in qs)
        if prev >= 0 and rots[prev][0] == axis and all(last_on_qubit[q] == prev for q in qs):
            rots[prev][1] += theta
        else:
            rots.append([axis, theta])
            for q in qs:
                last_on_qubit[q] = len(rots) - 1

    gates: list[Gate] = []
    for axis, theta in rots:
        theta = (theta + np.pi) % (2 * np.pi) - np.pi
        if abs(theta) < tol.rotation_cut:
            continue
        if axis % 2 == 0:
            gates.append(ZRot(axis // 2, theta))
        else:
            gates.append(XXRot(axis // 2, theta))
    snapped = [1.0 if s > 0 else -1.0 for s in signs]
    gates.append(PauliLayer(_layer_letters(snapped)))
    return GateProgram(n_qubits, tuple(gates))


def _check_orthogonal(q: np.ndarray, tol: Tolerances):
    q = np.asarray(q, dtype=float)
    dim = q.shape[0]
    if q.ndim != 2 or q.shape != (dim, dim) or dim % 2:
        raise ValueError("input must be a square even-dimensional matrix")
    if np.max(np.abs(q @ q.T - np.eye(dim))) > tol.orthogonality:
        raise ValueError("input matrix is not orthogonal")
    return q


def compile_naive(q: np.ndarray, tol: Tolerances = DEFAULT) -> GateProgram:
    """Adjacent-axis Givens QR scheme: Q = D * G_L^T * ... * G_1^T.

    Eliminates Q^T column by column from the bottom; the residual diagonal
    of signs becomes the trailing Pauli layer.
    """
    q = _check_orthogonal(q, tol)
    dim = q.shape[0]
    y = q.T.copy()
    prims = []
    for j in range(dim - 1):
        for i in range(dim - 1, j, -1):
            x, z = y[i - 1, j], y[i, j]
            if z == 0.0:
                continue
            theta = atan2(z, x)
            c, s = cos(theta), sin(theta)
            upper = c * y[i - 1, :] + s * y[i, :]
            lower = -s * y[i - 1, :] + c * y[i, :]
            y[i - 1, :] = upper
            y[i, :] = lower
            y[i, j] = 0.0
            prims.append(("givens", i - 1, -theta))
    d = np.sign(np.diag(y))
    # bugs leave O(1) residue; honest roundoff stays far below this
    if np.max(np.abs(y - np.diag(np.diag(y)))) > 1e-6:
        raise ValueError("QR elimination failed to diagonalize the input")
    prims.append(("diag", d))
    return _assemble(dim // 2, prims, tol)


def _right_eliminate(m: np.ndarray, blk_row: int, blk_col: int, prims: list):
    """Zero block (blk_row, blk_col) with column rotations on axes 2*blk_col..+3.

    Leaves the 2x4 band in the pattern [[0, 0, *, *], [0, 0, 0, *]].
    """
    b0 = 2 * blk_col
    r0, r1 = 2 * blk_row, 2 * blk_row + 1
    for row, col in ((r1, b0), (r1, b0 + 1), (r1, b0 + 2), (r0, b0), (r0, b0 + 1)):
        x, ynext = m[row, col], m[row, col + 1]
        if x == 0.0:
            continue
        theta = atan2(-x, ynext)
        c, s = cos(theta), sin(theta)
        left = c * m[:, col] + s * m[:, col + 1]
        right = -s * m[:, col] + c * m[:, col + 1]
        m[:, col] = left
        m[:, col + 1] = right
        m[row, col] = 0.0
        prims.append(("givens", col, -theta))


def _left_eliminate(m: np.ndarray, blk_row: int, blk_col: int, ops: list):
    """Zero block (blk_row, blk_col) with row rotations on axes 2*blk_row-2..+1.

    Leaves the 4x2 band upper triangular.
    """
    a0 = 2 * blk_row - 2
    c0, c1 = 2 * blk_col, 2 * blk_col + 1
    for row, col in ((a0 + 3, c0), (a0 + 2, c0), (a0 + 1, c0), (a0 + 3, c1), (a0 + 2, c1)):
        x, y = m[row - 1, col], m[row, col]
        if y == 0.0:
            continue
        theta = atan2(y, x)
        c, s = cos(theta), sin(theta)
        upper = c * m[row - 1, :] + s * m[row, :]
        lower = -s * m[row - 1, :] + c * m[row, :]
        m[row - 1, :] = upper
        m[row, :] = lower
        m[row, col] = 0.0
        ops.append(("givens", row - 1, theta))


def compile_blocked(q: np.ndarray, tol: Tolerances = DEFAULT) -> GateProgram:
    """Two-sided 2x2-block elimination scheme.

    Sweeps anti-diagonals of the n x n block grid, alternating right
    (column) and left (row) eliminations, leaving a diagonal of signs plus
    one residual 2x2 corner block: top-left for even n, bottom-right for
    odd n. The corner is closed with a single Givens rotation.
    """
    q = _check_orthogonal(q, tol)
    dim = q.shape[0]
    n = dim // 2
    m = q.copy()
    right_prims: list = []
    left_ops: list = []

    for d in range(1, n):
        if d % 2 == 1:
            for j in range(d):
                _right_eliminate(m, n - 1 - j, d - 1 - j, right_prims)
        else:
            for j in range(d):
                _left_eliminate(m, n - d + j, j, left_ops)

    corner = 0 if n % 2 == 0 else n - 1
    ca = 2 * corner
    block = m[ca:ca + 2, ca:ca + 2].copy()
    d_corner = np.eye(2)
    if np.linalg.det(block) < 0:
        d_corner = np.diag([1.0, -1.0])
    rot = d_corner @ block
    theta_c = atan2(rot[1, 0], rot[0, 0])

    d_vec = np.sign(np.diag(m))
    d_vec[ca] = d_corner[0, 0]
    d_vec[ca + 1] = d_corner[1, 1]

    expected = np.diag(d_vec.copy())
    expected[ca:ca + 2, ca:ca + 2] = d_corner @ _givens_matrix(2, 0, theta_c)
    if np.max(np.abs(m - expected)) > 1e-6:
        raise ValueError("block elimination failed to reach the corner form")

    # time order: right factors, corner rotation, sign diagonal, then the left
    # factors in reverse; _assemble commutes the diagonal through to the end
    prims = list(right_prims)
    prims.append(("givens", ca, theta_c))
    prims.append(("diag", d_vec))
    prims.extend(reversed(left_ops))
    return _assemble(n, prims, tol)


def program_to_orthogonal(p: GateProgram) -> np.ndarray:
    """Compose gate actions on the Majorana axes to recover the rotation."""
    dim = 2 * p.n_qubits
    q = np.eye(dim)
    for gate in p.gates:
        if isinstance(gate, ZRot):
            action = _givens_matrix(dim, 2 * gate.qubit, gate.theta)
        elif isinstance(gate, XXRot):
            action = _givens_matrix(dim, 2 * gate.qubit + 1, gate.theta)
        else:
            action = np.diag(_layer_action(gate.letters))
        q = action @ q
    return q


def stats_compare(q: np.ndarray, tol: Tolerances = DEFAULT) -> dict:
    """Compile both schemes and report counts, depths, and their ratios."""
    naive = compile_naive(q, tol).stats()
    blocked = compile_blocked(q, tol).stats()
    return {
        "naive": naive,
        "blocked": blocked,
        "depth_ratio": blocked.depth / max(naive.depth, 1),
        "rotation_ratio": blocked.rotation_count / max(naive.rotation_count, 1),
    }


def dense_unitary(p: GateProgram, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Dense 2^n x 2^n unitary of a program (small n; validation only)."""
    if p.n_qubits > _dense.MAX_DENSE_MODES:
        raise ValueError("dense realization guarded to small qubit counts")
    dim = 2 ** p.n_qubits
    u = np.eye(dim, dtype=complex)
    for gate in p.gates:
        if isinstance(gate, ZRot):
            letters = "I" * gate.qubit + "Z" + "I" * (p.n_qubits - gate.qubit - 1)
            mat = _dense.pauli_matrix(letters)
        elif isinstance(gate, XXRot):
            letters = (
                "I" * gate.qubit + "XX" + "I" * (p.n_qubits - gate.qubit - 2)
            )
            mat = _dense.pauli_matrix(letters)
        else:
            u = _dense.pauli_matrix(gate.letters) @ u
            continue
        g = np.cos(gate.theta / 2) * np.eye(dim) - 1j * np.sin(gate.theta / 2) * mat
        u = g @ u
    return u
