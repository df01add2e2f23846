"""Shared oracles and generators.

The dense oracles here are written from the textbook definitions and do not
call into the package's own matrix helpers.
"""

from __future__ import annotations

import math
from functools import reduce

import numpy as np
import pytest

from chemcut.circuit import Circuit, Gate, GateKind
from chemcut.cutting import LocalOpKind
from chemcut.pauli import PauliSum

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
P0 = np.diag([1.0, 0.0]).astype(complex)
P1 = np.diag([0.0, 1.0]).astype(complex)
PAULI = {"X": X, "Y": Y, "Z": Z}


def rz(t):
    return np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])


def rx(t):
    return math.cos(t / 2) * I2 - 1j * math.sin(t / 2) * X


def ry(t):
    return math.cos(t / 2) * I2 - 1j * math.sin(t / 2) * Y


def embed(ops: dict[int, np.ndarray], n: int) -> np.ndarray:
    """Kronecker product with qubit 0 as the least significant (rightmost) factor."""
    return reduce(np.kron, [ops.get(q, I2) for q in reversed(range(n))])


def dense_gate(g: Gate, n: int) -> np.ndarray:
    k, t = g.kind, g.angle
    one = {
        GateKind.X: lambda: X, GateKind.H: lambda: H, GateKind.S: lambda: np.diag([1, 1j]),
        GateKind.SDG: lambda: np.diag([1, -1j]), GateKind.RX: lambda: rx(t), GateKind.RY: lambda: ry(t),
        GateKind.RZ: lambda: rz(t), GateKind.PHASE: lambda: np.diag([1, np.exp(1j * t)]),
    }
    if k in one:
        return embed({g.qubits[0]: one[k]()}, n)
    a, b = g.qubits
    if k is GateKind.CX:
        return embed({a: P0}, n) + embed({a: P1, b: X}, n)
    if k is GateKind.CZ:
        return embed({a: P0}, n) + embed({a: P1, b: Z}, n)
    if k is GateKind.CP:
        return embed({a: P0}, n) + embed({a: P1, b: np.diag([1, np.exp(1j * t)])}, n)
    if k is GateKind.RZZ:
        zz = embed({a: Z, b: Z}, n)
        return math.cos(t / 2) * np.eye(1 << n) - 1j * math.sin(t / 2) * zz
    raise AssertionError(k)


def dense_unitary(c: Circuit) -> np.ndarray:
    u = np.eye(1 << c.n_qubits, dtype=complex)
    for g in c.gates:
        u = dense_gate(g, c.n_qubits) @ u
    return u


def dense_pauli(O: PauliSum) -> np.ndarray:
    out = np.zeros((1 << O.n_qubits,) * 2, dtype=complex)
    for s in O.strings():
        out += s.coefficient * embed({q: PAULI[a] for q, a in s.axes.items()}, O.n_qubits)
    return out


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, atol: float = 1e-10) -> bool:
    idx = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    if abs(b[idx]) < atol:
        return np.allclose(a, b, atol=atol)
    phase = a[idx] / b[idx]
    return abs(abs(phase) - 1) < atol and np.allclose(a, phase * b, atol=atol)


def fenwick_matrix(n: int) -> np.ndarray:
    """BK transform from the Fenwick-tree definition: bit i stores the parity of
    modes (i - lowbit(i+1), i]."""
    m = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        low = (i + 1) & -(i + 1)
        for j in range(i + 1 - low, i + 1):
            m[i, j] = 1
    return m


def jw_ladder_dense(p: int, n: int, create: bool) -> np.ndarray:
    sigma = np.array([[0, 0], [1, 0]], dtype=complex) if create else np.array([[0, 1], [0, 0]], dtype=complex)
    ops = {q: Z for q in range(p)}
    ops[p] = sigma
    return embed(ops, n)


def perm_matrix(beta: np.ndarray) -> np.ndarray:
    """Basis map |k> -> |beta k mod 2> on occupation integers (bit p = mode p)."""
    n = beta.shape[0]
    dim = 1 << n
    P = np.zeros((dim, dim))
    for k in range(dim):
        occ = np.array([(k >> p) & 1 for p in range(n)])
        bits = beta @ occ % 2
        P[sum(int(b) << q for q, b in enumerate(bits)), k] = 1
    return P


# -- dense channel oracle -------------------------------------------------------------

_S = {LocalOpKind.S_PLUS: np.diag([np.exp(1j * math.pi / 4), np.exp(-1j * math.pi / 4)]),
      LocalOpKind.S_MINUS: np.diag([np.exp(-1j * math.pi / 4), np.exp(1j * math.pi / 4)])}


def local_kraus(kind):
    """Signed Kraus list [(sign, K)] of each local operation from its definition."""
    if kind is LocalOpKind.IDENTITY:
        return [(1, np.eye(2))]
    if kind is LocalOpKind.Z_CONJUGATION:
        return [(1, Z)]
    if kind is LocalOpKind.SIGNED_Z_MEASURE:
        return [(1, P0), (-1, P1)]
    return [(1, _S[kind])]


def apply_two(rho, kraus_a, kraus_b):
    out = np.zeros_like(rho)
    for sa, ka in kraus_a:
        for sb, kb in kraus_b:
            k = np.kron(kb, ka)  # operand 0 is the low bit
            out += sa * sb * k @ rho @ k.conj().T
    return out


def with_gates(kraus, pre, post):
    u_pre = np.eye(2, dtype=complex)
    for k, a in pre:
        u_pre = dense_gate(Gate(k, (0,), a), 1) @ u_pre
    u_post = np.eye(2, dtype=complex)
    for k, a in post:
        u_post = dense_gate(Gate(k, (0,), a), 1) @ u_post
    return [(s, u_post @ K @ u_pre) for s, K in kraus]


def qpd_channel(qpd, rho):
    out = np.zeros_like(rho)
    for t in qpd.terms:
        ka = with_gates(local_kraus(t.op_block0.kind), t.op_block0.pre, t.op_block0.post)
        kb = with_gates(local_kraus(t.op_block1.kind), t.op_block1.pre, t.op_block1.post)
        out += t.coefficient * apply_two(rho, ka, kb)
    return out


def matrix_units():
    for i in range(4):
        for j in range(4):
            e = np.zeros((4, 4), dtype=complex)
            e[i, j] = 1
            yield e


def zz_unitary(phi):
    return np.diag(np.exp(1j * phi * np.array([1, -1, -1, 1])))


TWO_QUBIT = (GateKind.CX, GateKind.CZ, GateKind.CP, GateKind.RZZ)
ONE_QUBIT = (GateKind.X, GateKind.H, GateKind.S, GateKind.SDG, GateKind.RX, GateKind.RY, GateKind.RZ,
             GateKind.PHASE)


def random_gate(rng: np.random.Generator, n: int, kinds=None) -> Gate:
    kinds = kinds or (ONE_QUBIT + TWO_QUBIT if n > 1 else ONE_QUBIT)
    k = kinds[rng.integers(len(kinds))]
    angle = float(rng.uniform(-math.pi, math.pi)) if k.parametric else None
    qubits = tuple(int(q) for q in rng.choice(n, size=k.n_qubits, replace=False))
    return Gate(k, qubits, angle)


def random_circuit(rng: np.random.Generator, n: int, n_gates: int, kinds=None) -> Circuit:
    return Circuit(n, [random_gate(rng, n, kinds) for _ in range(n_gates)])


def random_cut_circuit(rng: np.random.Generator, n: int, split: int, n_local: int, n_cuts: int) -> Circuit:
    """Local gates inside the blocks [0, split) and [split, n), plus ``n_cuts``
    crossing gates at random positions."""
    gates = []
    for _ in range(n_local):
        block = (range(split), range(split, n))[int(rng.integers(2))]
        if len(block) == 1:
            gates.append(random_gate(rng, 1, ONE_QUBIT)._replace(qubits=(block[0],)))
            continue
        g = random_gate(rng, len(block))
        gates.append(g._replace(qubits=tuple(block[q] for q in g.qubits)))
    for _ in range(n_cuts):
        k = TWO_QUBIT[rng.integers(len(TWO_QUBIT))]
        a, b = int(rng.integers(split)), int(rng.integers(split, n))
        if rng.integers(2):
            a, b = b, a
        angle = float(rng.uniform(-math.pi, math.pi)) if k.parametric else None
        gates.insert(int(rng.integers(len(gates) + 1)), Gate(k, (a, b), angle))
    # a layer of single-qubit gates first so the state is not a basis state
    prefix = [Gate(GateKind.RY, (q,), float(rng.uniform(0, math.pi))) for q in range(n)]
    return Circuit(n, prefix + gates)


def random_observable(rng: np.random.Generator, n: int, n_terms: int) -> PauliSum:
    terms = {}
    for _ in range(n_terms):
        axes = rng.integers(0, 4, size=n)  # 0 = identity
        x = z = 0
        for q, a in enumerate(axes):
            x |= int(a in (1, 2)) << q
            z |= int(a in (2, 3)) << q
        terms[(x, z)] = terms.get((x, z), 0) + float(rng.normal())
    return PauliSum(terms, n)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


FUZZ_ALPHABET = "qreg[]();,.*/+-pi0123456789 \n\r\tabcdehrxyzOPENQASM\"'#&{}>=e"


def mutate_text(rng: np.random.Generator, text: str, n_edits: int = 3) -> str:
    """Random character insertions, deletions, substitutions and splices."""
    s = list(text)
    for _ in range(n_edits):
        op = int(rng.integers(4))
        pos = int(rng.integers(len(s) + 1))
        if op == 0:
            s.insert(pos, FUZZ_ALPHABET[int(rng.integers(len(FUZZ_ALPHABET)))])
        elif op == 1 and s:
            del s[min(pos, len(s) - 1)]
        elif op == 2 and s:
            s[min(pos, len(s) - 1)] = chr(int(rng.integers(1, 0x250)))
        elif s:
            a, b = sorted(int(x) for x in rng.integers(len(s) + 1, size=2))
            s[pos:pos] = s[a:b]
    return "".join(s)
