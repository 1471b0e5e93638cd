"""Compiler round trips, dense consistency, and gate statistics."""
import numpy as np
import pytest

import freeferm as ff
from freeferm import dense
from freeferm.circuits import (
    PauliLayer,
    XXRot,
    ZRot,
    compile_blocked,
    compile_naive,
    dense_unitary,
    program_to_orthogonal,
    stats_compare,
)

from conftest import random_orthogonal

COMPILERS = [compile_naive, compile_blocked]


# ------------------------------------------------------------ gate actions

def test_empty_program_is_identity():
    prog = ff.GateProgram(2, ())
    assert np.array_equal(program_to_orthogonal(prog), np.eye(4))


def test_zrot_action_is_givens():
    theta = 0.4
    prog = ff.GateProgram(1, (ZRot(0, theta),))
    expected = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    assert np.max(np.abs(program_to_orthogonal(prog) - expected)) < 1e-15


def test_pauli_layer_action():
    prog = ff.GateProgram(3, (PauliLayer("ZII"),))
    got = np.diag(program_to_orthogonal(prog))
    assert np.array_equal(got, [-1, -1, 1, 1, 1, 1])
    # dense conjugation agrees
    u = dense.pauli_matrix("ZII")
    for mu, sign in enumerate(got):
        lhs = u.conj().T @ dense.build_majorana(3, mu).matrix @ u
        assert np.array_equal(lhs, sign * dense.build_majorana(3, mu).matrix)


def test_gate_actions_match_dense(rng):
    # every gate type: U^dag g U composed densely equals the claimed action
    n = 3
    gates = [ZRot(1, 0.7), XXRot(0, -1.2), XXRot(1, 0.3), PauliLayer("XZY")]
    for gate in gates:
        prog = ff.GateProgram(n, (gate,))
        q = program_to_orthogonal(prog)
        u = dense_unitary(prog)
        for mu in range(2 * n):
            lhs = u.conj().T @ dense.build_majorana(n, mu).matrix @ u
            rhs = sum(q[mu, v] * dense.build_majorana(n, v).matrix for v in range(2 * n))
            assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_program_invariants():
    with pytest.raises(ValueError):
        ff.GateProgram(2, (PauliLayer("II"), PauliLayer("ZI")))
    with pytest.raises(ValueError):
        ff.GateProgram(2, (XXRot(1, 0.1),))
    with pytest.raises(ValueError):
        ff.GateProgram(2, (PauliLayer("III"),))


# ------------------------------------------------------- compiler specifics

def test_naive_identity():
    prog = compile_naive(np.eye(6))
    assert prog.stats().rotation_count == 0
    assert prog.gates == (PauliLayer("III"),)


def test_naive_sign_layers():
    n = 3
    q = np.diag([1.0, 1.0, 1.0, 1.0, -1.0, -1.0])
    prog = compile_naive(q)
    assert prog.gates == (PauliLayer("IIZ"),)

    # block diag(1, -1) at mode p compiles to X_p with a Z tail
    q = np.diag([1.0, -1.0, 1.0, 1.0, 1.0, 1.0])
    prog = compile_naive(q)
    assert prog.gates == (PauliLayer("XZZ"),)
    q = np.diag([1.0, 1.0, -1.0, 1.0, 1.0, 1.0])
    prog = compile_naive(q)
    assert prog.gates == (PauliLayer("IYZ"),)


def test_blocked_identity():
    prog = compile_blocked(np.eye(8))
    assert prog.stats().rotation_count == 0
    assert prog.gates == (PauliLayer("IIII"),)


@pytest.mark.parametrize("n", list(range(1, 9)))
def test_round_trip_both_schemes(n, rng):
    for _ in range(100):
        q = random_orthogonal(2 * n, rng)
        for compiler in COMPILERS:
            prog = compiler(q)
            recomposed = program_to_orthogonal(prog)
            assert np.max(np.abs(recomposed - q)) <= 1e-9


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_dense_conjugation(n, rng):
    q = random_orthogonal(2 * n, rng)
    gammas = [dense.build_majorana(n, mu).matrix for mu in range(2 * n)]
    for compiler in COMPILERS:
        u = dense_unitary(compiler(q))
        for mu in range(2 * n):
            lhs = u.conj().T @ gammas[mu] @ u
            rhs = sum(q[mu, v] * gammas[v] for v in range(2 * n))
            assert np.max(np.abs(lhs - rhs)) <= 1e-8


def test_reflections_compile_and_parity(rng):
    n = 3
    parity = dense.pauli_matrix("Z" * n)
    for _ in range(5):
        q = random_orthogonal(2 * n, rng)
        det = np.linalg.det(q)
        for compiler in COMPILERS:
            u = dense_unitary(compiler(q))
            comm = u @ parity - parity @ u
            if det > 0:
                assert np.max(np.abs(comm)) < 1e-10
            else:
                anti = u @ parity + parity @ u
                assert np.max(np.abs(anti)) < 1e-10


def test_embedded_unitaries_compile(rng):
    from conftest import random_unitary

    n = 4
    u = random_unitary(n, rng)
    q = ff.embed_unitary(u)
    for compiler in COMPILERS:
        assert np.max(np.abs(program_to_orthogonal(compiler(q)) - q)) <= 1e-9


# ------------------------------------------------------------------- stats

def test_rotation_counts_scale_quadratically(rng):
    sizes = [4, 8, 16, 32, 64]
    counts = {"naive": [], "blocked": []}
    depths = {"naive": [], "blocked": []}
    for n in sizes:
        q = random_orthogonal(2 * n, rng)
        for name, compiler in (("naive", compile_naive), ("blocked", compile_blocked)):
            st = compiler(q).stats()
            counts[name].append(st.rotation_count)
            depths[name].append(st.depth)
    logs = np.log(np.array(sizes, dtype=float))
    for name in counts:
        count_slope = np.polyfit(logs, np.log(counts[name]), 1)[0]
        depth_slope = np.polyfit(logs, np.log(depths[name]), 1)[0]
        assert abs(count_slope - 2.0) < 0.2
        assert abs(depth_slope - 1.0) < 0.2


def test_stats_compare_small_instance(rng):
    report = stats_compare(random_orthogonal(4, rng))
    assert 0.5 <= report["depth_ratio"] <= 2.0
    assert 0.5 <= report["rotation_ratio"] <= 2.0


def test_naive_count_is_parameter_minimal(rng):
    # a generic rotation needs n(2n-1) angles; the QR scheme meets it exactly
    n = 8
    q = random_orthogonal(2 * n, rng)
    assert compile_naive(q).stats().rotation_count == n * (2 * n - 1)


def test_depth_definition():
    prog = ff.GateProgram(3, (ZRot(0, 0.1), ZRot(1, 0.1), XXRot(0, 0.2), ZRot(2, 0.3)))
    # layer 1: Z0 | Z1 | Z2, layer 2: XX(0,1)
    assert prog.stats().depth == 2


# ------------------------------------------------------------ serialization

def test_program_json_round_trip(rng):
    from freeferm import io

    q = random_orthogonal(6, rng)
    prog = compile_blocked(q)
    back = io.program_from_json(io.program_to_json(prog), prog.n_qubits)
    assert back == prog
