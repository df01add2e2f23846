"""Second-quantized operators and the cluster operators used by the ansatz builders."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

COEFF_ATOL = 1e-14


class Spin(enum.IntEnum):
    ALPHA = 0
    BETA = 1


class QubitOrdering(enum.Enum):
    """How (spatial orbital, spin) pairs are laid out on qubits.

    ``SPATIAL_BLOCKED`` keeps both spin-orbitals of a spatial orbital adjacent
    (``2*s + spin``); ``SPIN_SECTORED`` places all alpha orbitals first and all
    beta orbitals after them (``s + spin*n_spatial``).
    """

    SPATIAL_BLOCKED = "spatial_blocked"
    SPIN_SECTORED = "spin_sectored"


class SpinOrbital(NamedTuple):
    spatial: int
    spin: Spin

    def mode(self, n_spatial: int, ordering: QubitOrdering = QubitOrdering.SPATIAL_BLOCKED) -> int:
        return mode_index(self, n_spatial, ordering)

    def __repr__(self) -> str:
        return f"{self.spatial}{'ab'[self.spin]}"


def mode_index(so: SpinOrbital, n_spatial: int, ordering: QubitOrdering) -> int:
    if not 0 <= so.spatial < n_spatial:
        raise ValueError(f"spatial orbital {so.spatial} out of range for {n_spatial} orbitals")
    if ordering is QubitOrdering.SPATIAL_BLOCKED:
        return 2 * so.spatial + int(so.spin)
    return so.spatial + int(so.spin) * n_spatial


def spin_orbitals(n_spatial: int) -> list[SpinOrbital]:
    """All spin-orbitals, alpha before beta within each spatial orbital."""
    return [SpinOrbital(s, spin) for s in range(n_spatial) for spin in Spin]


class OpKind(enum.IntEnum):
    # ANNIHILATE sorts first so that lexicographic order is stable and readable
    ANNIHILATE = 0
    CREATE = 1


class LadderOp(NamedTuple):
    mode: int
    kind: OpKind

    @property
    def is_create(self) -> bool:
        return self.kind is OpKind.CREATE

    def dagger(self) -> "LadderOp":
        return LadderOp(self.mode, OpKind(1 - self.kind))

    def __repr__(self) -> str:
        return f"a{'^' if self.is_create else ''}{self.mode}"


def cre(mode: int) -> LadderOp:
    return LadderOp(mode, OpKind.CREATE)


def des(mode: int) -> LadderOp:
    return LadderOp(mode, OpKind.ANNIHILATE)


@dataclass(frozen=True)
class FermionTerm:
    coefficient: complex
    ops: tuple[LadderOp, ...]

    def dagger(self) -> "FermionTerm":
        return FermionTerm(
            complex(self.coefficient).conjugate(),
            tuple(op.dagger() for op in reversed(self.ops)),
        )


@dataclass(frozen=True)
class FermionSum:
    """A sum of ladder-operator products; operator order inside a term is kept as written."""

    terms: tuple[FermionTerm, ...] = ()

    @classmethod
    def from_dict(cls, data: dict[tuple[LadderOp, ...], complex]) -> "FermionSum":
        return cls(tuple(FermionTerm(complex(c), tuple(ops)) for ops, c in data.items()))

    def __add__(self, other: "FermionSum") -> "FermionSum":
        return FermionSum(self.terms + other.terms)

    def __sub__(self, other: "FermionSum") -> "FermionSum":
        return self + other.scaled(-1)

    def scaled(self, factor: complex) -> "FermionSum":
        return FermionSum(tuple(FermionTerm(t.coefficient * factor, t.ops) for t in self.terms))

    def dagger(self) -> "FermionSum":
        return FermionSum(tuple(t.dagger() for t in self.terms))

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def max_mode(self) -> int:
        return max((op.mode for t in self.terms for op in t.ops), default=-1)

    def as_dict(self) -> dict[tuple[LadderOp, ...], complex]:
        return {t.ops: t.coefficient for t in simplify(self).terms}


def simplify(F: FermionSum) -> FermionSum:
    """Merge identical operator strings, drop negligible coefficients, sort terms."""
    merged: dict[tuple[LadderOp, ...], complex] = {}
    for t in F.terms:
        key = tuple(LadderOp(int(op.mode), OpKind(op.kind)) for op in t.ops)
        merged[key] = merged.get(key, 0j) + complex(t.coefficient)
    keep = sorted(
        (ops for ops, c in merged.items() if abs(c) >= COEFF_ATOL),
        key=_ops_key,
    )
    return FermionSum(tuple(FermionTerm(merged[ops], ops) for ops in keep))


def _ops_key(ops: tuple[LadderOp, ...]) -> tuple:
    return (len(ops), tuple((op.mode, int(op.kind)) for op in ops))


def anti_hermitian(T: FermionSum) -> FermionSum:
    """Return ``T - T^dagger`` (terms are not merged)."""
    return T - T.dagger()


def build_hamiltonian(
    h: np.ndarray,
    g: np.ndarray,
    h_nuc: float = 0.0,
    ordering: QubitOrdering = QubitOrdering.SPATIAL_BLOCKED,
) -> FermionSum:
    """Molecular Hamiltonian from spatial-orbital integrals (chemists' notation).

    ``H = sum h_PQ a+_P a_Q + 1/2 sum g_PQRS a+_P a+_R a_S a_Q + h_nuc``,
    expanded over both spin labels.
    """
    h = np.asarray(h, dtype=float)
    g = np.asarray(g, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"one-electron integrals must be square, got shape {h.shape}")
    n = h.shape[0]
    if g.shape != (n, n, n, n):
        raise ValueError(f"two-electron integrals must have shape {(n,) * 4}, got {g.shape}")

    def m(p: int, spin: Spin) -> int:
        return mode_index(SpinOrbital(p, spin), n, ordering)

    terms: list[FermionTerm] = []
    if h_nuc != 0.0:
        terms.append(FermionTerm(complex(h_nuc), ()))
    for p, q in itertools.product(range(n), repeat=2):
        if h[p, q] == 0.0:
            continue
        for s in Spin:
            terms.append(FermionTerm(complex(h[p, q]), (cre(m(p, s)), des(m(q, s)))))
    for p, q, r, s in itertools.product(range(n), repeat=4):
        if g[p, q, r, s] == 0.0:
            continue
        for sa, sb in itertools.product(Spin, repeat=2):
            ops = (cre(m(p, sa)), cre(m(r, sb)), des(m(s, sb)), des(m(q, sa)))
            terms.append(FermionTerm(0.5 * g[p, q, r, s], ops))
    return simplify(FermionSum(tuple(terms)))


@dataclass(frozen=True)
class AmplitudeSet:
    """Cluster amplitudes keyed by spin-orbitals (or spatial orbitals for pair doubles).

    - ``singles[(I, A)]``: t^A_I, I occupied and A virtual spin-orbital
    - ``doubles[(I, J, A, B)]``: t^{AB}_{IJ} with I > J and A > B
    - ``pair_doubles[(i, a)]``: pair excitation between spatial orbitals i -> a
    - ``gen_singles[(p, q)]``: generalized t^q_p over any spin-orbitals
    - ``gen_doubles[(p, q, r, s)]``: generalized t^{rs}_{pq}
    """

    singles: dict = field(default_factory=dict)
    doubles: dict = field(default_factory=dict)
    pair_doubles: dict = field(default_factory=dict)
    gen_singles: dict = field(default_factory=dict)
    gen_doubles: dict = field(default_factory=dict)


class OccupationVector(tuple):
    """Occupation-number vector ``|k_0, k_1, ..., k_{M-1}>`` over modes."""

    def __new__(cls, bits: Iterable[int]):
        bits = tuple(int(b) for b in bits)
        if any(b not in (0, 1) for b in bits):
            raise ValueError("occupations must be 0 or 1")
        return super().__new__(cls, bits)

    @property
    def n_electrons(self) -> int:
        return sum(self)

    def __str__(self) -> str:
        return "".join(map(str, self))


def hartree_fock_occupation(
    n_elec: int, n_spatial: int, ordering: QubitOrdering = QubitOrdering.SPATIAL_BLOCKED
) -> OccupationVector:
    """Closed-shell reference: alpha and beta of the lowest ``n_elec/2`` spatial orbitals."""
    if n_elec % 2:
        raise ValueError("only closed-shell (even electron count) references are supported")
    if not 0 <= n_elec <= 2 * n_spatial:
        raise ValueError(f"{n_elec} electrons do not fit in {n_spatial} spatial orbitals")
    bits = [0] * (2 * n_spatial)
    for so in occupied_spin_orbitals(n_elec, n_spatial):
        bits[mode_index(so, n_spatial, ordering)] = 1
    return OccupationVector(bits)


def occupied_spin_orbitals(n_elec: int, n_spatial: int) -> list[SpinOrbital]:
    return [so for so in spin_orbitals(n_spatial) if so.spatial < n_elec // 2]


def virtual_spin_orbitals(n_elec: int, n_spatial: int) -> list[SpinOrbital]:
    return [so for so in spin_orbitals(n_spatial) if so.spatial >= n_elec // 2]


def _check_shape(n_elec: int, n_spatial: int) -> None:
    if n_elec % 2 or not 0 <= n_elec <= 2 * n_spatial:
        raise ValueError(f"unsupported active space ({n_elec}e, {n_spatial}o)")


# Excitation structure. Builders need the index structure independently of the
# amplitude values, since zero-valued parameters still produce gates.


def singles_excitations(n_elec: int, n_spatial: int) -> list[tuple[SpinOrbital, SpinOrbital]]:
    """Spin-conserving (I, A) pairs, I occupied, A virtual."""
    _check_shape(n_elec, n_spatial)
    occ = occupied_spin_orbitals(n_elec, n_spatial)
    vir = virtual_spin_orbitals(n_elec, n_spatial)
    return [(i, a) for i in occ for a in vir if i.spin == a.spin]


def doubles_excitations(
    n_elec: int, n_spatial: int
) -> list[tuple[SpinOrbital, SpinOrbital, SpinOrbital, SpinOrbital]]:
    """S_z-conserving (I, J, A, B) with I > J, A > B (spatial-major, alpha first)."""
    _check_shape(n_elec, n_spatial)
    occ = occupied_spin_orbitals(n_elec, n_spatial)
    vir = virtual_spin_orbitals(n_elec, n_spatial)
    out = []
    for j, i in itertools.combinations(occ, 2):
        for b, a in itertools.combinations(vir, 2):
            if i.spin + j.spin == a.spin + b.spin:
                out.append((i, j, a, b))
    return out


def pair_excitations(n_elec: int, n_spatial: int) -> list[tuple[int, int]]:
    _check_shape(n_elec, n_spatial)
    n_occ = n_elec // 2
    return [(i, a) for i in range(n_occ) for a in range(n_occ, n_spatial)]


def generalized_singles_pairs(n_spatial: int) -> list[tuple[SpinOrbital, SpinOrbital]]:
    """Unordered spin-conserving pairs (p, q), p before q, over all spin-orbitals."""
    sos = spin_orbitals(n_spatial)
    return [(p, q) for p, q in itertools.combinations(sos, 2) if p.spin == q.spin]


def single_operator(i: SpinOrbital, a: SpinOrbital, n_spatial: int, ordering: QubitOrdering) -> tuple[LadderOp, ...]:
    return (cre(mode_index(a, n_spatial, ordering)), des(mode_index(i, n_spatial, ordering)))


def double_operator(
    i: SpinOrbital, j: SpinOrbital, a: SpinOrbital, b: SpinOrbital, n_spatial: int, ordering: QubitOrdering
) -> tuple[LadderOp, ...]:
    m = lambda so: mode_index(so, n_spatial, ordering)  # noqa: E731
    return (cre(m(a)), cre(m(b)), des(m(i)), des(m(j)))


def pair_operator(i: int, a: int, n_spatial: int, ordering: QubitOrdering) -> tuple[LadderOp, ...]:
    m = lambda s, spin: mode_index(SpinOrbital(s, spin), n_spatial, ordering)  # noqa: E731
    return (cre(m(a, Spin.ALPHA)), cre(m(a, Spin.BETA)), des(m(i, Spin.BETA)), des(m(i, Spin.ALPHA)))


def _as_so(x) -> SpinOrbital:
    if isinstance(x, SpinOrbital):
        return x
    s, spin = x
    return SpinOrbital(int(s), Spin(spin))


def make_singles_doubles(
    amps: AmplitudeSet,
    n_elec: int,
    n_spatial: int,
    ordering: QubitOrdering = QubitOrdering.SPATIAL_BLOCKED,
) -> FermionSum:
    """T1 + T2 over occupied -> virtual spin-orbital excitations."""
    _check_shape(n_elec, n_spatial)
    occ = set(occupied_spin_orbitals(n_elec, n_spatial))
    vir = set(virtual_spin_orbitals(n_elec, n_spatial))
    terms = []
    for key, t in amps.singles.items():
        i, a = map(_as_so, key)
        if i not in occ or a not in vir:
            raise ValueError(f"single excitation {key} is not occupied -> virtual")
        terms.append(FermionTerm(complex(t), single_operator(i, a, n_spatial, ordering)))
    for key, t in amps.doubles.items():
        i, j, a, b = map(_as_so, key)
        if not {i, j} <= occ or not {a, b} <= vir:
            raise ValueError(f"double excitation {key} is not occupied -> virtual")
        terms.append(FermionTerm(complex(t), double_operator(i, j, a, b, n_spatial, ordering)))
    return simplify(FermionSum(tuple(terms)))


def make_pair_doubles(
    amps: AmplitudeSet,
    n_elec: int,
    n_spatial: int,
    ordering: QubitOrdering = QubitOrdering.SPATIAL_BLOCKED,
) -> FermionSum:
    """Pair cluster operator ``sum t a+_{A a} a+_{A b} a_{I b} a_{I a}``, one term per (I, A)."""
    _check_shape(n_elec, n_spatial)
    n_occ = n_elec // 2
    terms = []
    for (i, a), t in amps.pair_doubles.items():
        if not (0 <= i < n_occ and n_occ <= a < n_spatial):
            raise ValueError(f"pair excitation {(i, a)} is not occupied -> virtual")
        terms.append(FermionTerm(complex(t), pair_operator(i, a, n_spatial, ordering)))
    return simplify(FermionSum(tuple(terms)))


def make_generalized_cluster(
    amps: AmplitudeSet,
    n_spatial: int,
    ordering: QubitOrdering = QubitOrdering.SPATIAL_BLOCKED,
    merge: bool = True,
) -> FermionSum:
    """``1/2 sum t^q_p a+_q a_p + 1/4 sum t^{rs}_{pq} a+_r a+_s a_q a_p`` over all spin-orbitals.

    With ``merge=False`` the raw term list is returned (one term per amplitude slot).
    """
    m = lambda x: mode_index(_as_so(x), n_spatial, ordering)  # noqa: E731
    terms = []
    for (p, q), t in amps.gen_singles.items():
        terms.append(FermionTerm(0.5 * t, (cre(m(q)), des(m(p)))))
    for (p, q, r, s), t in amps.gen_doubles.items():
        terms.append(FermionTerm(0.25 * t, (cre(m(r)), cre(m(s)), des(m(q)), des(m(p)))))
    out = FermionSum(tuple(terms))
    return simplify(out) if merge else out


# Dense reference matrices, used for verification.


def ladder_matrix(mode: int, n_modes: int, create: bool) -> np.ndarray:
    """Dense matrix of a ladder operator in the occupation basis.

    Basis index bit ``p`` is the occupation of mode ``p``; the sign counts
    occupied modes below ``p``.
    """
    dim = 1 << n_modes
    mat = np.zeros((dim, dim), dtype=complex)
    bit = 1 << mode
    for k in range(dim):
        occupied = bool(k & bit)
        if occupied == create:
            continue
        sign = -1.0 if bin(k & (bit - 1)).count("1") % 2 else 1.0
        mat[k ^ bit, k] = sign
    return mat


def fermion_matrix(F: FermionSum, n_modes: int) -> np.ndarray:
    dim = 1 << n_modes
    cache: dict[LadderOp, np.ndarray] = {}
    out = np.zeros((dim, dim), dtype=complex)
    for t in F.terms:
        mat = np.eye(dim, dtype=complex)
        for op in t.ops:
            if op not in cache:
                cache[op] = ladder_matrix(op.mode, n_modes, op.is_create)
            mat = mat @ cache[op]
        out += t.coefficient * mat
    return out


def ops_from_sequence(seq: Sequence[tuple[int, int]]) -> tuple[LadderOp, ...]:
    """Convenience: ``[(2, 1), (0, 0)]`` -> ``(a^2, a0)``."""
    return tuple(LadderOp(int(m), OpKind(int(k))) for m, k in seq)
