"""Pauli strings and sums in symplectic (x, z) bitmask form.

A key ``(x, z)`` denotes the Hermitian Pauli string with X on bits of ``x`` only,
Z on bits of ``z`` only and Y where both are set. Qubit ``q`` is bit ``q``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

COEFF_ATOL = 1e-14

_AXIS_BITS = {"X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
# i**k for k mod 4
_IPOW = (1, 1j, -1, -1j)


def _popcount(v: int) -> int:
    return v.bit_count()


def mul_keys(k1: tuple[int, int], k2: tuple[int, int]) -> tuple[complex, tuple[int, int]]:
    """Product of two Hermitian Pauli strings: ``P1 P2 = phase * P3``."""
    x1, z1 = k1
    x2, z2 = k2
    x3, z3 = x1 ^ x2, z1 ^ z2
    # P = i^{|x&z|} X^x Z^z and Z^z1 X^x2 = (-1)^{|z1&x2|} X^x2 Z^z1
    e = (x1 & z1).bit_count() + (x2 & z2).bit_count() + 2 * (z1 & x2).bit_count() - (x3 & z3).bit_count()
    return _IPOW[e % 4], (x3, z3)


@dataclass(frozen=True)
class PauliString:
    coefficient: complex
    axes: Mapping[int, str]

    @property
    def key(self) -> tuple[int, int]:
        return axes_to_key(self.axes)

    @property
    def weight(self) -> int:
        return len(self.axes)

    def __str__(self) -> str:
        body = " ".join(f"{a}{q}" for q, a in sorted(self.axes.items())) or "I"
        return f"{self.coefficient:.6g}*{body}"


def axes_to_key(axes: Mapping[int, str]) -> tuple[int, int]:
    x = z = 0
    for q, a in axes.items():
        bx, bz = _AXIS_BITS[a.upper()]
        x |= bx << q
        z |= bz << q
    return x, z


def key_support(key: tuple[int, int]) -> list[int]:
    bits = bin(key[0] | key[1])[:1:-1]
    return [q for q, b in enumerate(bits) if b == "1"]


def key_to_axes(key: tuple[int, int]) -> dict[int, str]:
    x, z = key
    axes = {}
    for q in key_support(key):
        bx, bz = (x >> q) & 1, (z >> q) & 1
        axes[q] = "Y" if bx and bz else ("X" if bx else "Z")
    return axes


def _sort_key(key: tuple[int, int]) -> tuple:
    # weight, then the flattened (qubit, axis) sequence with X < Y < Z as 0 < 1 < 2
    x, z = key
    flat = []
    for q in key_support(key):
        bz = (z >> q) & 1
        flat += (q, bz * (2 - ((x >> q) & 1)))
    return (len(flat), tuple(flat))


class PauliSum:
    """A linear combination of Pauli strings on ``n_qubits`` qubits."""

    __slots__ = ("terms", "n_qubits")

    def __init__(self, terms: Mapping[tuple[int, int], complex] | None = None, n_qubits: int = 0):
        self.terms: dict[tuple[int, int], complex] = dict(terms or {})
        self.n_qubits = int(n_qubits)
        limit = 1 << self.n_qubits
        for x, z in self.terms:
            if x >= limit or z >= limit:
                raise ValueError(f"Pauli term acts outside {self.n_qubits} qubits")

    @classmethod
    def identity(cls, n_qubits: int, coefficient: complex = 1.0) -> "PauliSum":
        return cls({(0, 0): complex(coefficient)}, n_qubits)

    @classmethod
    def from_strings(cls, strings: Iterable[PauliString], n_qubits: int) -> "PauliSum":
        out: dict[tuple[int, int], complex] = {}
        for s in strings:
            k = s.key
            out[k] = out.get(k, 0j) + complex(s.coefficient)
        return cls(out, n_qubits)

    @classmethod
    def from_label(cls, label: str, coefficient: complex = 1.0, n_qubits: int | None = None) -> "PauliSum":
        """``PauliSum.from_label("X0 Z1")``; ``"I"`` or ``""`` is the identity."""
        axes: dict[int, str] = {}
        for tok in label.split():
            if tok.upper() == "I":
                continue
            a, q = tok[0].upper(), int(tok[1:])
            if a not in _AXIS_BITS or q in axes:
                raise ValueError(f"bad Pauli token {tok!r}")
            axes[q] = a
        n = n_qubits if n_qubits is not None else (max(axes) + 1 if axes else 0)
        return cls({axes_to_key(axes): complex(coefficient)}, n)

    def strings(self) -> list[PauliString]:
        """Terms as :class:`PauliString`, in deterministic order."""
        return [PauliString(self.terms[k], key_to_axes(k)) for k in sorted(self.terms, key=_sort_key)]

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.n_qubits == other.n_qubits and self.terms == other.terms

    def __repr__(self) -> str:
        return f"PauliSum(n_qubits={self.n_qubits}, terms=[{', '.join(map(str, self.strings()))}])"

    def _check(self, other: "PauliSum") -> int:
        return max(self.n_qubits, other.n_qubits)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0j) + c
        return PauliSum(out, self._check(other))

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + other.scaled(-1)

    def scaled(self, factor: complex) -> "PauliSum":
        return PauliSum({k: c * factor for k, c in self.terms.items()}, self.n_qubits)

    def __mul__(self, other):
        if isinstance(other, PauliSum):
            out: dict[tuple[int, int], complex] = {}
            for k1, c1 in self.terms.items():
                for k2, c2 in other.terms.items():
                    ph, k3 = mul_keys(k1, k2)
                    out[k3] = out.get(k3, 0j) + ph * c1 * c2
            return PauliSum(out, self._check(other))
        return self.scaled(other)

    __rmul__ = scaled

    def dagger(self) -> "PauliSum":
        return PauliSum({k: complex(c).conjugate() for k, c in self.terms.items()}, self.n_qubits)

    def is_hermitian(self, atol: float = 1e-12) -> bool:
        return all(abs(complex(c).imag) <= atol for c in self.terms.values())

    def to_matrix(self) -> np.ndarray:
        n = self.n_qubits
        dim = 1 << n
        idx = np.arange(dim, dtype=np.int64)
        out = np.zeros((dim, dim), dtype=complex)
        for (x, z), c in self.terms.items():
            phase = _IPOW[_popcount(x & z) % 4] * (-1.0) ** (np.bitwise_count(idx & z) % 2)
            out[idx ^ x, idx] += c * phase
        return out


def pauli_simplify(P: PauliSum, atol: float = COEFF_ATOL) -> PauliSum:
    """Drop terms with ``|c| < atol`` and order terms deterministically."""
    keep = sorted((k for k, c in P.terms.items() if abs(c) >= atol), key=_sort_key)
    return PauliSum({k: complex(P.terms[k]) for k in keep}, P.n_qubits)
