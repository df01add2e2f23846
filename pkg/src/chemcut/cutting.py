"""Gate cutting with local operations (LO): partitions, overheads and
quasiprobability decompositions of ZZ-type gates."""

from __future__ import annotations

import enum
import math
import sys
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

from chemcut.circuit import TWO_QUBIT_KINDS, Circuit, Gate, GateKind

DOUBLE_MAX = sys.float_info.max
LOG10_DOUBLE_MAX = math.log10(DOUBLE_MAX)


@dataclass(frozen=True)
class Partition:
    """Assignment of every qubit to block 0 or block 1."""

    block_of: Mapping[int, int]

    def __post_init__(self):
        block_of = {int(q): int(b) for q, b in dict(self.block_of).items()}
        if set(block_of.values()) != {0, 1}:
            raise ValueError("a partition needs two nonempty blocks labelled 0 and 1")
        if sorted(block_of) != list(range(len(block_of))):
            raise ValueError("partition must cover qubits 0..n-1 exactly once")
        object.__setattr__(self, "block_of", block_of)

    @classmethod
    def from_blocks(cls, block0: Sequence[int], block1: Sequence[int]) -> "Partition":
        overlap = set(block0) & set(block1)
        if overlap:
            raise ValueError(f"qubits {sorted(overlap)} appear in both blocks")
        return cls({**{q: 0 for q in block0}, **{q: 1 for q in block1}})

    @classmethod
    def parse(cls, spec: str) -> "Partition":
        """``"0,1;2,3"`` -> blocks {0, 1} and {2, 3}."""
        parts = spec.strip().split(";")
        if len(parts) != 2:
            raise ValueError(f"partition spec {spec!r} must have exactly two ';'-separated blocks")
        try:
            blocks = [[int(tok) for tok in p.split(",") if tok.strip()] for p in parts]
        except ValueError:
            raise ValueError(f"partition spec {spec!r} contains a non-integer qubit") from None
        return cls.from_blocks(*blocks)

    @property
    def n_qubits(self) -> int:
        return len(self.block_of)

    def block(self, b: int) -> list[int]:
        return sorted(q for q, x in self.block_of.items() if x == b)

    def local_index(self) -> dict[int, int]:
        """Original qubit -> dense index inside its block."""
        out = {}
        for b in (0, 1):
            for i, q in enumerate(self.block(b)):
                out[q] = i
        return out

    def __str__(self) -> str:
        return ";".join(",".join(map(str, self.block(b))) for b in (0, 1))


def contiguous_partition(n_qubits: int, split: int) -> Partition:
    """Block 0 = qubits ``[0, split)``, block 1 = the rest."""
    return Partition.from_blocks(range(split), range(split, n_qubits))


class CutGate(NamedTuple):
    gate_index: int
    kind: GateKind
    angle: float | None
    qubits: tuple[int, int]


def find_cuts(c: Circuit, p: Partition) -> list[CutGate]:
    """Two-qubit gates whose operands lie in different blocks, in circuit order."""
    if c.n_qubits != p.n_qubits:
        raise ValueError(f"partition covers {p.n_qubits} qubits, circuit has {c.n_qubits}")
    block = [p.block_of[q] for q in range(c.n_qubits)]
    gates = c.gates
    # every GateKind has arity 1 or 2, so a two-operand check is all that is needed
    hits = [i for i, g in enumerate(gates) if len(q := g.qubits) == 2 and block[q[0]] != block[q[1]]]
    return [CutGate(i, gates[i].kind, gates[i].angle, gates[i].qubits) for i in hits]


# -- overheads ------------------------------------------------------------------


def zz_angle(kind: GateKind, angle: float | None = None) -> float:
    """Angle ``phi`` such that the gate equals ``exp(i phi Z(x)Z)`` up to local unitaries."""
    if kind in (GateKind.CX, GateKind.CZ):
        return math.pi / 4
    if kind is GateKind.CP:
        return angle / 4
    if kind is GateKind.RZZ:
        return -angle / 2
    raise ValueError(f"{kind.name} is not a supported two-qubit gate")


def zz_kappa(phi: float) -> float:
    return 1.0 + 2.0 * abs(math.sin(2.0 * phi))


def gate_gamma_squared(kind: GateKind, angle: float | None = None) -> float:
    """LO sampling overhead of one cut gate.

    CX, CZ -> 9; CP(t) -> (1 + 2|sin(t/2)|)^2; RZZ(t) -> (1 + 2|sin t|)^2.
    """
    if kind not in TWO_QUBIT_KINDS:
        raise ValueError(f"{kind.name} is a single-qubit gate")
    if kind in (GateKind.CX, GateKind.CZ):
        return 9.0
    return zz_kappa(zz_angle(kind, angle)) ** 2


@dataclass(frozen=True)
class OverheadReport:
    counts: dict[GateKind, int]
    per_gate: tuple[float, ...]
    total_gamma_squared: float
    log10_total: float

    @property
    def n_cuts(self) -> int:
        return len(self.per_gate)

    @property
    def saturated(self) -> bool:
        return math.isinf(self.total_gamma_squared)


def total_overhead(cuts: Sequence[CutGate] | Sequence[tuple[GateKind, float | None]]) -> OverheadReport:
    """Product of per-gate overheads, saturating to ``inf`` above the double maximum."""
    counts: dict[GateKind, int] = {}
    per_gate = []
    for cut in cuts:
        kind, angle = (cut.kind, cut.angle) if isinstance(cut, CutGate) else cut
        counts[kind] = counts.get(kind, 0) + 1
        per_gate.append(gate_gamma_squared(kind, angle))
    log10_total = math.fsum(math.log10(g) for g in per_gate)
    if log10_total > LOG10_DOUBLE_MAX:
        total = math.inf
    else:
        total = math.prod(per_gate)
        if total > DOUBLE_MAX:
            total = math.inf
    return OverheadReport(counts, tuple(per_gate), total, log10_total)


# -- quasiprobability decompositions ----------------------------------------------


class LocalOpKind(enum.Enum):
    IDENTITY = "identity"
    Z_CONJUGATION = "z_conjugation"
    SIGNED_Z_MEASURE = "signed_z_measure"
    S_PLUS = "s_plus"  # rho -> e^{+i pi Z/4} rho e^{-i pi Z/4}
    S_MINUS = "s_minus"


# single-qubit gates realizing the unitary local ops (global phase dropped);
# RZ(theta) = exp(-i theta Z / 2)
_LOCAL_GATES = {
    LocalOpKind.IDENTITY: (),
    LocalOpKind.Z_CONJUGATION: ((GateKind.RZ, math.pi),),
    LocalOpKind.S_PLUS: ((GateKind.RZ, -math.pi / 2),),
    LocalOpKind.S_MINUS: ((GateKind.RZ, math.pi / 2),),
}


@dataclass(frozen=True)
class LocalOp:
    """A local operation on one qubit, with fixed single-qubit corrections.

    ``pre`` and ``post`` are sequences of ``(GateKind, angle)`` applied before
    and after the operation on the same qubit.
    """

    kind: LocalOpKind
    pre: tuple[tuple[GateKind, float | None], ...] = ()
    post: tuple[tuple[GateKind, float | None], ...] = ()

    def gates_on(self, q: int) -> tuple[list[Gate], bool, list[Gate]]:
        """``(gates before, has signed measurement, gates after)`` on qubit ``q``."""
        before = [Gate(k, (q,), a) for k, a in self.pre]
        after = [Gate(k, (q,), a) for k, a in self.post]
        if self.kind is LocalOpKind.SIGNED_Z_MEASURE:
            return before, True, after
        before += [Gate(k, (q,), a) for k, a in _LOCAL_GATES[self.kind]]
        return before + after, False, []


class QPDTerm(NamedTuple):
    coefficient: float
    op_block0: LocalOp  # acts on the gate's first operand
    op_block1: LocalOp  # acts on the gate's second operand


@dataclass(frozen=True)
class QPDDecomposition:
    terms: tuple[QPDTerm, ...]

    @property
    def kappa(self) -> float:
        return math.fsum(abs(t.coefficient) for t in self.terms)

    @property
    def probabilities(self) -> list[float]:
        k = self.kappa
        return [abs(t.coefficient) / k for t in self.terms]


_ID = LocalOp(LocalOpKind.IDENTITY)
_ZC = LocalOp(LocalOpKind.Z_CONJUGATION)
_MEAS = LocalOp(LocalOpKind.SIGNED_Z_MEASURE)
_SP = LocalOp(LocalOpKind.S_PLUS)
_SM = LocalOp(LocalOpKind.S_MINUS)


def decompose_zz(phi: float, atol: float = 1e-15) -> QPDDecomposition:
    """LO decomposition of the channel ``rho -> U rho U^dagger``, ``U = exp(i phi Z(x)Z)``.

    Uses ``i[ZZ, rho] = M(x)(S+ - S-) + (S+ - S-)(x)M`` with ``M`` the signed
    Z measurement and ``S+-`` conjugation by ``exp(+-i pi Z / 4)``.
    """
    c, s = math.cos(phi), math.sin(phi)
    cs = c * s
    raw = [
        (c * c, _ID, _ID),
        (s * s, _ZC, _ZC),
        (cs, _MEAS, _SP),
        (-cs, _MEAS, _SM),
        (cs, _SP, _MEAS),
        (-cs, _SM, _MEAS),
    ]
    return QPDDecomposition(tuple(QPDTerm(a, x, y) for a, x, y in raw if abs(a) > atol))


class SideCorrection(NamedTuple):
    pre: tuple[tuple[GateKind, float | None], ...]
    post: tuple[tuple[GateKind, float | None], ...]


class GateDecomposition(NamedTuple):
    qpd: QPDDecomposition
    corrections: tuple[SideCorrection, SideCorrection]


def _with(op: LocalOp, corr: SideCorrection) -> LocalOp:
    return LocalOp(op.kind, corr.pre + op.pre, op.post + corr.post)


def decompose_gate(g: CutGate | Gate) -> GateDecomposition:
    """QPD of a cut gate via its reduction to ``exp(i phi Z(x)Z)`` plus local gates.

    CP(t) = phase * (RZ(t/2) x RZ(t/2)) * exp(i t/4 ZZ); CZ = CP(pi);
    CX = (I x H) CZ (I x H); RZZ(t) = exp(-i t/2 ZZ).
    """
    kind, angle = g.kind, g.angle
    none = SideCorrection((), ())
    if kind is GateKind.RZZ:
        corr = (none, none)
    elif kind in (GateKind.CP, GateKind.CZ, GateKind.CX):
        theta = math.pi if kind is not GateKind.CP else angle
        rz = ((GateKind.RZ, theta / 2),)
        if kind is GateKind.CX:
            corr = (SideCorrection((), rz), SideCorrection(((GateKind.H, None),), rz + ((GateKind.H, None),)))
        else:
            corr = (SideCorrection((), rz), SideCorrection((), rz))
    else:
        raise ValueError(f"cannot decompose {kind.name}")
    base = decompose_zz(zz_angle(kind, angle))
    terms = tuple(QPDTerm(t.coefficient, _with(t.op_block0, corr[0]), _with(t.op_block1, corr[1])) for t in base.terms)
    return GateDecomposition(QPDDecomposition(terms), corr)


# -- realization -------------------------------------------------------------------


class SignedMeasure(NamedTuple):
    """Mid-circuit Z measurement whose +-1 outcome multiplies the sample sign."""

    qubit: int
    cut: int  # position of the originating cut in the cut list


@dataclass(frozen=True)
class Subcircuit:
    n_qubits: int
    ops: tuple  # Gate | SignedMeasure, in order
    qubits: tuple[int, ...]  # original qubit of each local index

    @property
    def n_measurements(self) -> int:
        return sum(isinstance(o, SignedMeasure) for o in self.ops)

    def gates_only(self) -> Circuit:
        return Circuit(self.n_qubits, [o for o in self.ops if isinstance(o, Gate)])


@dataclass(frozen=True)
class Realization:
    blocks: tuple[Subcircuit, Subcircuit]
    weight: float
    measures: tuple[tuple[int, SignedMeasure], ...] = field(default=())  # (block, marker)


def realize_assignment(
    c: Circuit,
    p: Partition,
    choice: Mapping[int, int] | Sequence[int],
    cuts: Sequence[CutGate] | None = None,
    decompositions: Sequence[QPDDecomposition] | None = None,
) -> Realization:
    """Replace every cut gate by the chosen QPD term and split the circuit into blocks.

    ``choice[i]`` is the term index for the ``i``-th cut (in circuit order).
    """
    cuts = find_cuts(c, p) if cuts is None else cuts
    if decompositions is None:
        decompositions = [decompose_gate(cut).qpd for cut in cuts]
    choice = dict(enumerate(choice)) if not isinstance(choice, Mapping) else dict(choice)
    missing = [i for i in range(len(cuts)) if i not in choice]
    if missing:
        raise ValueError(f"no term chosen for cuts {missing}")
    local = p.local_index()
    ops: list[list] = [[], []]
    measures = []
    weight = 1.0
    cut_at = {cut.gate_index: i for i, cut in enumerate(cuts)}
    for gi, g in enumerate(c.gates):
        ci = cut_at.get(gi)
        if ci is None:
            b = p.block_of[g.qubits[0]]
            ops[b].append(Gate(g.kind, tuple(local[q] for q in g.qubits), g.angle, g.param))
            continue
        term = decompositions[ci].terms[choice[ci]]
        weight *= term.coefficient
        for q, op in zip(g.qubits, (term.op_block0, term.op_block1)):
            b = p.block_of[q]
            before, measured, after = op.gates_on(local[q])
            ops[b] += before
            if measured:
                marker = SignedMeasure(local[q], ci)
                ops[b].append(marker)
                measures.append((b, marker))
            ops[b] += after
    blocks = tuple(Subcircuit(len(p.block(b)), tuple(ops[b]), tuple(p.block(b))) for b in (0, 1))
    return Realization(blocks, weight, tuple(measures))
