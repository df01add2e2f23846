"""Ansatz circuit builders.

The Pauli-gadget ansätze (UCCSD, UpCCD, UpCCGSD) emit one group of rotations
per excitation; each group keeps its gates even when the amplitude is zero, so
the gate structure (and hence the cut structure) does not depend on parameter
values. LUCJ is built natively from Givens, RZZ and CP gates.
"""

from __future__ import annotations

import enum
import functools
import itertools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from chemcut.circuit import Circuit, Gate, GateKind, rotation_frame, rotations_from_terms
from chemcut.encodings import Encoding, encode, encode_reference
from chemcut.fermion import (
    AmplitudeSet,
    FermionSum,
    FermionTerm,
    QubitOrdering,
    Spin,
    SpinOrbital,
    anti_hermitian,
    double_operator,
    doubles_excitations,
    generalized_singles_pairs,
    hartree_fock_occupation,
    pair_excitations,
    pair_operator,
    single_operator,
    singles_excitations,
)

__all__ = [
    "Layout",
    "LucjParameters",
    "QubitOrdering",
    "AnsatzInfo",
    "reference_prep",
    "uccsd",
    "upccd",
    "upccgsd",
    "lucj",
    "ansatz_catalog",
]


class Layout(enum.Enum):
    ALL_TO_ALL = "all-to-all"
    HEAVY_HEX = "heavy-hex"

    @classmethod
    def parse(cls, value: "str | Layout") -> "Layout":
        if isinstance(value, Layout):
            return value
        v = value.lower().replace("_", "-")
        for member in cls:
            if member.value == v:
                return member
        raise ValueError(f"unknown layout {value!r}")


def reference_prep(
    n_elec: int,
    n_spatial: int,
    ordering: QubitOrdering = QubitOrdering.SPATIAL_BLOCKED,
    enc: Encoding | str = Encoding.JORDAN_WIGNER,
) -> Circuit:
    """X gates preparing the closed-shell reference determinant."""
    occ = hartree_fock_occupation(n_elec, n_spatial, ordering)
    bits = encode_reference(occ, enc)
    return Circuit(2 * n_spatial, [Gate(GateKind.X, (q,)) for q, b in enumerate(bits) if b])


def _excitation_gates(
    ops: tuple, amplitude: float, n_modes: int, enc: Encoding, param: str
) -> list[Gate]:
    unit = FermionSum((FermionTerm(1.0, ops),))
    G = encode(anti_hermitian(unit), n_modes, enc)
    # encode() already returns simplified, ordered terms
    return rotations_from_terms(G.terms.items(), amplitude, param)


def _so_label(so: SpinOrbital) -> str:
    return f"{so.spatial}{'ab'[so.spin]}"


def _lookup(table: dict, key, default: float = 0.0) -> float:
    if key in table:
        return float(table[key])
    # keys may also be given as plain (spatial, spin) tuples
    plain = tuple((k.spatial, int(k.spin)) if isinstance(k, SpinOrbital) else k for k in key)
    return float(table.get(plain, default))


def uccsd(
    n_elec: int,
    n_spatial: int,
    amps: AmplitudeSet | None = None,
    enc: Encoding | str = Encoding.JORDAN_WIGNER,
    ordering: QubitOrdering = QubitOrdering.SPATIAL_BLOCKED,
) -> Circuit:
    """UCCSD: reference followed by one rotation group per single and double excitation."""
    amps = amps or AmplitudeSet()
    enc = Encoding.parse(enc)
    n_modes = 2 * n_spatial
    gates = list(reference_prep(n_elec, n_spatial, ordering, enc).gates)
    for i, a in singles_excitations(n_elec, n_spatial):
        t = _lookup(amps.singles, (i, a))
        ops = single_operator(i, a, n_spatial, ordering)
        gates += _excitation_gates(ops, t, n_modes, enc, f"t1_{_so_label(i)}_{_so_label(a)}")
    for i, j, a, b in doubles_excitations(n_elec, n_spatial):
        t = _lookup(amps.doubles, (i, j, a, b))
        ops = double_operator(i, j, a, b, n_spatial, ordering)
        name = "t2_" + "_".join(map(_so_label, (i, j, a, b)))
        gates += _excitation_gates(ops, t, n_modes, enc, name)
    return Circuit._trusted(n_modes, gates)


def _pair_gates(n_elec, n_spatial, amps, enc, ordering) -> list[Gate]:
    gates: list[Gate] = []
    for i, a in pair_excitations(n_elec, n_spatial):
        t = float(amps.pair_doubles.get((i, a), 0.0))
        ops = pair_operator(i, a, n_spatial, ordering)
        gates += _excitation_gates(ops, t, 2 * n_spatial, enc, f"tp_{i}_{a}")
    return gates


def upccd(
    n_elec: int,
    n_spatial: int,
    amps: AmplitudeSet | None = None,
    enc: Encoding | str = Encoding.JORDAN_WIGNER,
    ordering: QubitOrdering = QubitOrdering.SPATIAL_BLOCKED,
) -> Circuit:
    """Unitary pair CCD: one rotation group per occupied -> virtual pair excitation."""
    amps = amps or AmplitudeSet()
    enc = Encoding.parse(enc)
    gates = list(reference_prep(n_elec, n_spatial, ordering, enc).gates)
    gates += _pair_gates(n_elec, n_spatial, amps, enc, ordering)
    return Circuit._trusted(2 * n_spatial, gates)


def upccgsd(
    n_elec: int,
    n_spatial: int,
    amps: AmplitudeSet | None = None,
    enc: Encoding | str = Encoding.JORDAN_WIGNER,
    ordering: QubitOrdering = QubitOrdering.SPATIAL_BLOCKED,
    k: int = 1,
) -> Circuit:
    """Pair doubles plus generalized (spin-conserving) singles, repeated ``k`` times.

    The singles angle for the pair ``p < q`` is ``(t^q_p - t^p_q) / 2``, which is
    the coefficient of ``a+_q a_p - a+_p a_q`` in the anti-Hermitian part of the
    generalized cluster operator.
    """
    if k < 1:
        raise ValueError("k must be positive")
    amps = amps or AmplitudeSet()
    enc = Encoding.parse(enc)
    n_modes = 2 * n_spatial
    block = _pair_gates(n_elec, n_spatial, amps, enc, ordering)
    for p, q in generalized_singles_pairs(n_spatial):
        t = 0.5 * (_lookup(amps.gen_singles, (p, q)) - _lookup(amps.gen_singles, (q, p)))
        ops = single_operator(p, q, n_spatial, ordering)
        block += _excitation_gates(ops, t, n_modes, enc, f"g1_{_so_label(p)}_{_so_label(q)}")
    gates = list(reference_prep(n_elec, n_spatial, ordering, enc).gates)
    for rep in range(k):
        gates += [g._replace(param=f"{g.param}_k{rep}") if g.param and k > 1 else g for g in block]
    return Circuit._trusted(n_modes, gates)


# -- LUCJ -----------------------------------------------------------------------


def _n_pairs(n: int) -> int:
    return n * (n - 1) // 2


@dataclass
class LucjParameters:
    """Per-layer LUCJ angles (radians).

    ``givens``: shape ``(L, 2, n(n-1)/2)``, one angle per orbital pair ``p < q``
    per spin sector, indexed in ``itertools.combinations`` order; each pair owns
    one rotation of the triangular network. ``j_same``: shape ``(L, n, n)``, symmetric same-spin
    couplings (shared by both sectors). ``j_opposite``: shape ``(L, n)``, the
    opposite-spin couplings ``J_pp``.
    """

    givens: np.ndarray
    j_same: np.ndarray
    j_opposite: np.ndarray

    def __post_init__(self):
        self.givens = np.asarray(self.givens, dtype=float)
        self.j_same = np.asarray(self.j_same, dtype=float)
        self.j_opposite = np.asarray(self.j_opposite, dtype=float)
        if self.j_opposite.ndim != 2:
            raise ValueError("j_opposite must have shape (layers, n_spatial)")
        L, n = self.j_opposite.shape
        if L < 1:
            raise ValueError("at least one layer is required")
        if self.givens.shape != (L, 2, _n_pairs(n)):
            raise ValueError(f"givens must have shape {(L, 2, _n_pairs(n))}, got {self.givens.shape}")
        if self.j_same.shape != (L, n, n):
            raise ValueError(f"j_same must have shape {(L, n, n)}, got {self.j_same.shape}")

    @property
    def layers(self) -> int:
        return self.j_opposite.shape[0]

    @property
    def n_spatial(self) -> int:
        return self.j_opposite.shape[1]

    @classmethod
    def zeros(cls, n_spatial: int, layers: int = 1) -> "LucjParameters":
        return cls(
            np.zeros((layers, 2, _n_pairs(n_spatial))),
            np.zeros((layers, n_spatial, n_spatial)),
            np.zeros((layers, n_spatial)),
        )

    @classmethod
    def constant_cp(cls, n_spatial: int, layers: int, angle: float) -> "LucjParameters":
        """All opposite-spin couplings set to ``angle``, everything else zero."""
        p = cls.zeros(n_spatial, layers)
        p.j_opposite[:] = angle
        return p

    @classmethod
    def random(cls, n_spatial: int, layers: int, sigma: float, seed: int = 0) -> "LucjParameters":
        rng = np.random.default_rng(seed)
        j_same = rng.normal(0.0, sigma, (layers, n_spatial, n_spatial))
        j_same = 0.5 * (j_same + j_same.transpose(0, 2, 1))
        return cls(
            rng.normal(0.0, sigma, (layers, 2, _n_pairs(n_spatial))),
            j_same,
            rng.normal(0.0, sigma, (layers, n_spatial)),
        )

    def to_json(self) -> dict:
        return {"givens": self.givens.tolist(), "j_same": self.j_same.tolist(),
                "j_opposite": self.j_opposite.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "LucjParameters":
        return cls(data["givens"], data["j_same"], data["j_opposite"])


def opposite_spin_pairs(n_spatial: int, layout: Layout) -> list[int]:
    """Spatial orbitals ``p`` whose (p_alpha, p_beta) pair carries a CP gate."""
    if layout is Layout.ALL_TO_ALL:
        return list(range(n_spatial))
    return list(range(0, n_spatial, 2))


def _triangle(n_spatial: int) -> list[tuple[int, int]]:
    """Adjacent mode ``p`` (rotating ``p, p+1``) for each pair index, in sweep order.

    Pair ``(p, q)`` owns the rotation on ``(p, p+1)`` in sweep ``q``; the sweeps
    ``q = 1 .. n-1`` each run ``p = q-1 .. 0``, the usual triangular network of
    nearest-neighbour rotations.
    """
    index = {pair: i for i, pair in enumerate(itertools.combinations(range(n_spatial), 2))}
    return [(index[(p, q)], p) for q in range(1, n_spatial) for p in reversed(range(q))]


@functools.lru_cache(maxsize=4096)
def _givens_frames(p: int, spin: Spin, n_spatial: int) -> tuple:
    """``(coefficient, gates before RZ, RZ target, gates after)`` per generator term of
    the rotation on modes ``p, p+1``; only the RZ angle depends on the Givens angle."""
    ops = single_operator(SpinOrbital(p, spin), SpinOrbital(p + 1, spin), n_spatial, QubitOrdering.SPIN_SECTORED)
    G = encode(anti_hermitian(FermionSum((FermionTerm(1.0, ops),))), 2 * n_spatial, Encoding.JORDAN_WIGNER)
    return tuple((c.imag, *rotation_frame(key)) for key, c in G.terms.items())


def _givens_network(n_spatial: int, angles: np.ndarray, sign: float, layer: int) -> list[Gate]:
    """Orbital rotation as a triangular network of nearest-neighbour Givens rotations.

    ``sign = -1`` gives the exact inverse of ``sign = +1``: reversed order, negated angles.
    """
    gates: list[Gate] = []
    sweep = _triangle(n_spatial)
    for idx, p in (sweep if sign > 0 else reversed(sweep)):
        for spin in Spin:
            theta = float(angles[int(spin), idx])
            name = f"k{layer}_{'ab'[spin]}_{idx}"
            # exp(i r P) = exp(-i t/2 P) with t = -2r, as in rotations_from_terms
            for c, before, target, after in _givens_frames(p, spin, n_spatial):
                gates += before
                gates.append(Gate(GateKind.RZ, (target,), -2.0 * sign * theta * c, name))
                gates += after
    return gates


def _jastrow(n_spatial: int, j_same: np.ndarray, j_opp: np.ndarray, layout: Layout, layer: int) -> list[Gate]:
    """``exp(i J)`` with ``J = sum J^ss_pq n_p n_q (p<q) + sum J^ss_pp n_p + sum J^ab_pp n_pa n_pb``."""
    gates: list[Gate] = []
    for spin in Spin:
        off = int(spin) * n_spatial
        for p in range(n_spatial):
            if j_same[p, p] != 0.0:
                gates.append(Gate(GateKind.PHASE, (off + p,), float(j_same[p, p]), f"js{layer}_{p}_{p}"))
        for p, q in itertools.combinations(range(n_spatial), 2):
            j = float(j_same[p, q])
            name = f"js{layer}_{'ab'[spin]}_{p}_{q}"
            # exp(i j n_p n_q) = phase * RZ_p(j/2) RZ_q(j/2) RZZ(-j/2)
            gates += [
                Gate(GateKind.RZZ, (off + p, off + q), -0.5 * j, name),
                Gate(GateKind.RZ, (off + p,), 0.5 * j, name),
                Gate(GateKind.RZ, (off + q,), 0.5 * j, name),
            ]
    for p in opposite_spin_pairs(n_spatial, layout):
        gates.append(Gate(GateKind.CP, (p, p + n_spatial), float(j_opp[p]), f"jo{layer}_{p}"))
    return gates


def lucj(
    n_elec: int,
    n_spatial: int,
    params: LucjParameters | None = None,
    layout: Layout | str = Layout.ALL_TO_ALL,
    layers: int | None = None,
) -> Circuit:
    """LUCJ in spin-sectored order: per layer ``e^{K} e^{iJ} e^{-K}`` applied to the reference.

    Opposite-spin couplings are CP gates on ``(p_alpha, p_beta)``; heavy-hex keeps
    only even ``p``. All other two-qubit gates stay inside a spin sector.
    """
    layout = Layout.parse(layout)
    if params is None:
        params = LucjParameters.zeros(n_spatial, layers or 1)
    if params.n_spatial != n_spatial:
        raise ValueError(f"parameters sized for {params.n_spatial} orbitals, circuit has {n_spatial}")
    if layers is not None and layers != params.layers:
        raise ValueError(f"requested {layers} layers, parameters have {params.layers}")
    gates = list(reference_prep(n_elec, n_spatial, QubitOrdering.SPIN_SECTORED, Encoding.JORDAN_WIGNER).gates)
    # the product is applied right to left: layer L acts first
    for mu in reversed(range(params.layers)):
        gates += _givens_network(n_spatial, params.givens[mu], -1.0, mu)
        gates += _jastrow(n_spatial, params.j_same[mu], params.j_opposite[mu], layout, mu)
        gates += _givens_network(n_spatial, params.givens[mu], +1.0, mu)
    return Circuit._trusted(2 * n_spatial, gates)


# -- catalog --------------------------------------------------------------------


@dataclass(frozen=True)
class AnsatzInfo:
    name: str
    build: Callable[..., Circuit]
    encodings: tuple[Encoding, ...]
    ordering: QubitOrdering
    layouts: tuple[Layout, ...] = field(default=())

    def build_h2n(self, n: int, config: "Encoding | Layout | str", layers: int = 1, params=None) -> Circuit:
        """Build for an H_{2n} chain with a (2n, 2n) active space."""
        n_elec = n_spatial = 2 * n
        if self.name == "lucj":
            return self.build(n_elec, n_spatial, params, Layout.parse(config), layers)
        return self.build(n_elec, n_spatial, params, Encoding.parse(config), self.ordering)


_PAULI_ENCODINGS = (Encoding.JORDAN_WIGNER, Encoding.BRAVYI_KITAEV)


def ansatz_catalog() -> list[tuple[str, AnsatzInfo]]:
    entries = [
        AnsatzInfo("uccsd", uccsd, _PAULI_ENCODINGS, QubitOrdering.SPATIAL_BLOCKED),
        AnsatzInfo("upccd", upccd, _PAULI_ENCODINGS, QubitOrdering.SPATIAL_BLOCKED),
        AnsatzInfo("upccgsd", upccgsd, _PAULI_ENCODINGS, QubitOrdering.SPATIAL_BLOCKED),
        AnsatzInfo("lucj", lucj, (Encoding.JORDAN_WIGNER,), QubitOrdering.SPIN_SECTORED,
                   (Layout.ALL_TO_ALL, Layout.HEAVY_HEX)),
    ]
    return [(e.name, e) for e in entries]


def get_ansatz(name: str) -> AnsatzInfo:
    for key, info in ansatz_catalog():
        if key == name.lower():
            return info
    raise ValueError(f"unknown ansatz {name!r}; choose from {[k for k, _ in ansatz_catalog()]}")
