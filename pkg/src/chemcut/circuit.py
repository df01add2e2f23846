"""Circuit representation, statevector simulation and Pauli-exponential synthesis."""

from __future__ import annotations

import contextlib
import enum
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from chemcut.pauli import PauliString, PauliSum, axes_to_key, key_support, key_to_axes, pauli_simplify

MAX_QUBITS = 24


class GateKind(enum.Enum):
    X = "x"
    H = "h"
    S = "s"
    SDG = "sdg"
    RX = "rx"
    RY = "ry"
    RZ = "rz"
    PHASE = "p"
    CX = "cx"
    CZ = "cz"
    CP = "cp"
    RZZ = "rzz"

    @property
    def n_qubits(self) -> int:
        return 2 if self in TWO_QUBIT_KINDS else 1

    @property
    def parametric(self) -> bool:
        return self in PARAMETRIC_KINDS


TWO_QUBIT_KINDS = frozenset({GateKind.CX, GateKind.CZ, GateKind.CP, GateKind.RZZ})
PARAMETRIC_KINDS = frozenset({GateKind.RX, GateKind.RY, GateKind.RZ, GateKind.PHASE, GateKind.CP, GateKind.RZZ})


class Gate(NamedTuple):
    kind: GateKind
    qubits: tuple[int, ...]
    angle: float | None = None
    param: str | None = None

    def same_as(self, other: "Gate") -> bool:
        return self.kind is other.kind and self.qubits == other.qubits and self.angle == other.angle


def gate(kind: GateKind, *qubits: int, angle: float | None = None, param: str | None = None) -> Gate:
    """Checked gate constructor."""
    if len(qubits) != kind.n_qubits:
        raise ValueError(f"{kind.name} acts on {kind.n_qubits} qubit(s), got {len(qubits)}")
    if kind.parametric != (angle is not None):
        raise ValueError(f"{kind.name} {'requires' if kind.parametric else 'takes no'} angle")
    if len(set(qubits)) != len(qubits):
        raise ValueError(f"{kind.name} operands must be distinct")
    return Gate(kind, tuple(int(q) for q in qubits), None if angle is None else float(angle), param)


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            for q in g.qubits:
                if not 0 <= q < self.n_qubits:
                    raise ValueError(f"gate {g.kind.name} on qubit {q} outside {self.n_qubits}-qubit circuit")
            if len(g.qubits) == 2 and g.qubits[0] == g.qubits[1]:
                raise ValueError(f"gate {g.kind.name} has repeated operand {g.qubits[0]}")

    @classmethod
    def _trusted(cls, n_qubits: int, gates: Sequence[Gate]) -> "Circuit":
        # skips operand validation; for builders whose gates are correct by construction
        c = object.__new__(cls)
        object.__setattr__(c, "n_qubits", n_qubits)
        object.__setattr__(c, "gates", tuple(gates))
        return c

    def __len__(self) -> int:
        return len(self.gates)

    def __add__(self, other: "Circuit") -> "Circuit":
        return Circuit(max(self.n_qubits, other.n_qubits), self.gates + other.gates)

    def two_qubit_gates(self) -> Iterator[Gate]:
        return (g for g in self.gates if len(g.qubits) == 2)

    def parameters(self) -> list[str]:
        seen: dict[str, None] = {}
        for g in self.gates:
            if g.param is not None:
                seen.setdefault(g.param)
        return list(seen)


def gate_census(c: Circuit) -> dict[GateKind, int]:
    return dict(Counter(g.kind for g in c.gates))


def decompose_cx_via_cz(c: Circuit) -> Circuit:
    """Replace every CX(c, t) by H(t) CZ(c, t) H(t)."""
    out: list[Gate] = []
    for g in c.gates:
        if g.kind is GateKind.CX:
            t = g.qubits[1]
            out += [Gate(GateKind.H, (t,)), Gate(GateKind.CZ, g.qubits), Gate(GateKind.H, (t,))]
        else:
            out.append(g)
    return Circuit(c.n_qubits, out)


# -- gate matrices -------------------------------------------------------------

_SQ2 = 1 / math.sqrt(2)


def gate_matrix(g: Gate) -> np.ndarray:
    """Matrix of ``g`` in its own operand order; for two-qubit gates the first
    operand is the least significant index bit (basis ``|q1 q0>`` -> ``2*q1 + q0``)."""
    k, th = g.kind, g.angle
    if k is GateKind.X:
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if k is GateKind.H:
        return np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex)
    if k is GateKind.S:
        return np.diag([1, 1j])
    if k is GateKind.SDG:
        return np.diag([1, -1j])
    if k is GateKind.RX:
        c, s = math.cos(th / 2), math.sin(th / 2)
        return np.array([[c, -1j * s], [-1j * s, c]])
    if k is GateKind.RY:
        c, s = math.cos(th / 2), math.sin(th / 2)
        return np.array([[c, -s], [s, c]], dtype=complex)
    if k is GateKind.RZ:
        return np.diag([np.exp(-0.5j * th), np.exp(0.5j * th)])
    if k is GateKind.PHASE:
        return np.diag([1, np.exp(1j * th)])
    if k is GateKind.CX:
        # control = operand 0 (low bit), target = operand 1 (high bit)
        m = np.eye(4, dtype=complex)
        m[[1, 3]] = m[[3, 1]]
        return m
    if k is GateKind.CZ:
        return np.diag([1, 1, 1, -1]).astype(complex)
    if k is GateKind.CP:
        return np.diag([1, 1, 1, np.exp(1j * th)])
    if k is GateKind.RZZ:
        a, b = np.exp(-0.5j * th), np.exp(0.5j * th)
        return np.diag([a, b, b, a])
    raise ValueError(f"no matrix for {k}")


# -- simulation ------------------------------------------------------------------

_register_observers: list[list[int]] = []


@contextlib.contextmanager
def track_registers():
    """Record the qubit count of every register simulated inside the block."""
    seen: list[int] = []
    _register_observers.append(seen)
    try:
        yield seen
    finally:
        _register_observers.remove(seen)


def basis_state(bits: Sequence[int] | int, n_qubits: int) -> np.ndarray:
    """``bits`` is a qubit-0-first bit sequence, or an integer index."""
    if n_qubits > MAX_QUBITS:
        raise ValueError(f"{n_qubits} qubits exceeds the simulation cap of {MAX_QUBITS}")
    if isinstance(bits, (int, np.integer)):
        index = int(bits)
    else:
        bits = list(bits)
        if len(bits) != n_qubits:
            raise ValueError(f"initial bitstring has {len(bits)} bits, circuit has {n_qubits} qubits")
        index = sum(int(b) << q for q, b in enumerate(bits))
    psi = np.zeros(1 << n_qubits, dtype=complex)
    psi[index] = 1.0
    return psi


def apply_gate(psi: np.ndarray, g: Gate, n_qubits: int) -> np.ndarray:
    """Apply ``g`` to a statevector in place (the array is also returned)."""
    k = g.kind
    t = psi.reshape((2,) * n_qubits)
    if len(g.qubits) == 1:
        ax = n_qubits - 1 - g.qubits[0]
        lo = (slice(None),) * ax + (0,)
        hi = (slice(None),) * ax + (1,)
        if k is GateKind.X:
            tmp = t[lo].copy()
            t[lo] = t[hi]
            t[hi] = tmp
        elif k in (GateKind.S, GateKind.SDG, GateKind.RZ, GateKind.PHASE):
            m = gate_matrix(g)
            if m[0, 0] != 1:
                t[lo] *= m[0, 0]
            t[hi] *= m[1, 1]
        else:
            m = gate_matrix(g)
            a, b = t[lo].copy(), t[hi].copy()
            t[lo] = m[0, 0] * a + m[0, 1] * b
            t[hi] = m[1, 0] * a + m[1, 1] * b
        return psi
    q0, q1 = g.qubits
    a0, a1 = n_qubits - 1 - q0, n_qubits - 1 - q1

    def idx(v0: int, v1: int):
        sl = [slice(None)] * n_qubits
        sl[a0], sl[a1] = v0, v1
        return tuple(sl)

    if k is GateKind.CX:
        tmp = t[idx(1, 0)].copy()
        t[idx(1, 0)] = t[idx(1, 1)]
        t[idx(1, 1)] = tmp
    else:
        d = np.diag(gate_matrix(g))
        for v0 in (0, 1):
            for v1 in (0, 1):
                f = d[v0 + 2 * v1]
                if f != 1:
                    t[idx(v0, v1)] *= f
    return psi


def run_gates(psi: np.ndarray, gates: Iterable[Gate], n_qubits: int) -> np.ndarray:
    for obs in _register_observers:
        obs.append(n_qubits)
    for g in gates:
        apply_gate(psi, g, n_qubits)
    return psi


def simulate(c: Circuit, initial: Sequence[int] | int = 0) -> np.ndarray:
    """Exact statevector after ``c`` (qubit 0 is the least significant amplitude bit)."""
    psi = basis_state(initial, c.n_qubits)
    return run_gates(psi, c.gates, c.n_qubits)


def circuit_unitary(c: Circuit) -> np.ndarray:
    dim = 1 << c.n_qubits
    cols = [simulate(c, i) for i in range(dim)]
    return np.stack(cols, axis=1)


def pauli_apply(psi: np.ndarray, key: tuple[int, int]) -> np.ndarray:
    """``P|psi>`` for a Hermitian Pauli string key."""
    x, z = key
    idx = np.arange(psi.shape[0], dtype=np.int64)
    sign = 1 - 2 * (np.bitwise_count(idx & z) & 1).astype(np.int64)
    out = np.empty_like(psi)
    phase = (1, 1j, -1, -1j)[bin(x & z).count("1") % 4]
    out[idx ^ x] = phase * sign * psi
    return out


def pauli_expectations(psi: np.ndarray, keys: Sequence[tuple[int, int]]) -> np.ndarray:
    """``<psi|P|psi>`` for each key (complex; real for normalized or unnormalized states)."""
    idx = np.arange(psi.shape[0], dtype=np.int64)
    out = np.empty(len(keys), dtype=complex)
    for i, (x, z) in enumerate(keys):
        if x == 0 and z == 0:
            out[i] = np.vdot(psi, psi)
            continue
        sign = 1 - 2 * (np.bitwise_count(idx & z) & 1).astype(np.int64)
        phase = (1, 1j, -1, -1j)[bin(x & z).count("1") % 4]
        out[i] = phase * np.vdot(psi[idx ^ x], sign * psi)
    return out


def expectation(psi: np.ndarray, O: PauliSum, atol: float = 1e-10) -> float:
    n = int(psi.shape[0]).bit_length() - 1
    if O.n_qubits != n:
        raise ValueError(f"observable acts on {O.n_qubits} qubits, state has {n}")
    if not O.is_hermitian(atol):
        raise ValueError("observable has non-real coefficients")
    keys = list(O.terms)
    vals = pauli_expectations(psi, keys)
    coeffs = np.array([O.terms[k].real for k in keys])
    return float(np.real(coeffs @ vals))


# -- synthesis --------------------------------------------------------------------

_HALF_PI = math.pi / 2
_shared: dict[tuple, Gate] = {}


def _fixed(kind: GateKind, qubits: tuple[int, ...], angle: float | None = None) -> Gate:
    # Gates are immutable, so fixed ones are interned and shared between rotations.
    # Keyed on the string value: enum hashing is slow on this path.
    key = (kind.value, qubits, angle)
    g = _shared.get(key)
    if g is None:
        g = _shared[key] = Gate(kind, qubits, angle)
    return g


def rotation_frame(key: tuple[int, int]) -> tuple[tuple[Gate, ...], int, tuple[Gate, ...]]:
    """Angle-independent part of a rotation: (gates before RZ, RZ target, gates after)."""
    support = key_support(key)
    if not support:
        raise ValueError("cannot synthesize a rotation about the identity")
    x, z = key
    pre: list[Gate] = []
    post: list[Gate] = []
    for q in support:
        if (x >> q) & 1:
            if (z >> q) & 1:
                pre.append(_fixed(GateKind.RX, (q,), _HALF_PI))
                post.append(_fixed(GateKind.RX, (q,), -_HALF_PI))
            else:
                pre.append(_fixed(GateKind.H, (q,)))
                post.append(_fixed(GateKind.H, (q,)))
    ladder = [_fixed(GateKind.CX, (a, b)) for a, b in zip(support, support[1:])]
    return tuple(pre + ladder), support[-1], tuple(ladder[::-1] + post)


def pauli_rotation(
    P: PauliString | tuple[int, int], theta: float, param: str | None = None
) -> list[Gate]:
    """Gates implementing ``exp(-i theta/2 P)`` (the coefficient of ``P`` is ignored).

    Basis change (H for X, RX(pi/2) for Y), CX ladder onto the highest qubit,
    RZ(theta), then the inverse ladder and basis change.
    """
    key = P if isinstance(P, tuple) else axes_to_key(P.axes)
    before, target, after = rotation_frame((int(key[0]), int(key[1])))
    return [*before, Gate(GateKind.RZ, (target,), float(theta), param), *after]


def generator_rotations(
    G: PauliSum, scale: float = 1.0, param: str | None = None, atol: float = 1e-12
) -> list[Gate]:
    """First-order product of ``exp(scale * c_k P_k)`` over the terms of an
    anti-Hermitian generator ``G = sum c_k P_k`` (each ``c_k`` imaginary)."""
    return rotations_from_terms(pauli_simplify(G).terms.items(), scale, param, atol)


def rotations_from_terms(items, scale: float = 1.0, param: str | None = None, atol: float = 1e-12) -> list[Gate]:
    """As :func:`generator_rotations`, for ``(key, coefficient)`` pairs already in order."""
    gates: list[Gate] = []
    for key, c in items:
        if abs(c.real) > atol:
            raise ValueError(f"generator term {key_to_axes(key)} has non-imaginary coefficient {c}")
        if key == (0, 0):
            continue  # global phase
        # exp(i r P) = exp(-i theta/2 P) with theta = -2r
        before, target, after = rotation_frame(key)
        gates += before
        gates.append(Gate(GateKind.RZ, (target,), -2.0 * scale * c.imag, param))
        gates += after
    return gates


def trotter_circuit(G: PauliSum, reps: int = 1, n_qubits: int | None = None) -> Circuit:
    """Circuit for ``exp(G)`` as a first-order product over the terms of ``G``."""
    if reps < 1:
        raise ValueError("reps must be positive")
    step = generator_rotations(G, 1.0 / reps)
    return Circuit(G.n_qubits if n_qubits is None else n_qubits, step * reps)
