"""Jordan-Wigner and Bravyi-Kitaev fermion-to-qubit maps."""

from __future__ import annotations

import enum
from functools import lru_cache

import numpy as np

from chemcut.fermion import FermionSum, LadderOp, OccupationVector
from chemcut.pauli import _IPOW, PauliSum, pauli_simplify


class Encoding(enum.Enum):
    JORDAN_WIGNER = "jw"
    BRAVYI_KITAEV = "bk"

    @classmethod
    def parse(cls, value: "str | Encoding") -> "Encoding":
        if isinstance(value, Encoding):
            return value
        v = value.lower().replace("-", "_")
        aliases = {"jw": cls.JORDAN_WIGNER, "jordan_wigner": cls.JORDAN_WIGNER,
                   "bk": cls.BRAVYI_KITAEV, "bravyi_kitaev": cls.BRAVYI_KITAEV}
        try:
            return aliases[v]
        except KeyError:
            raise ValueError(f"unknown encoding {value!r}") from None


def _mask(indices) -> int:
    m = 0
    for i in indices:
        m |= 1 << int(i)
    return m


# Each ladder operator maps to a sum of two Pauli strings:
# 0.5 * P_real  -/+ 0.5i * P_imag  (creation: minus, annihilation: plus)


def _jw_ladder(mode: int) -> tuple[tuple[int, int], tuple[int, int]]:
    below = (1 << mode) - 1
    bit = 1 << mode
    return (bit, below), (bit, below | bit)


@lru_cache(maxsize=None)
def bk_matrix(n: int) -> np.ndarray:
    """Bravyi-Kitaev matrix for ``n`` modes: ``bits = B @ occupations (mod 2)``.

    Built recursively for the next power of two and truncated to ``n x n``.
    """
    size = 1
    mat = np.ones((1, 1), dtype=np.uint8)
    while size < n:
        new = np.zeros((2 * size, 2 * size), dtype=np.uint8)
        new[:size, :size] = mat
        new[size:, size:] = mat
        new[2 * size - 1, :size] = 1
        mat = new
        size *= 2
    return mat[:n, :n].copy()


def _gf2_inverse_lower(mat: np.ndarray) -> np.ndarray:
    # unit lower-triangular over GF(2): forward substitution
    n = mat.shape[0]
    inv = np.zeros_like(mat)
    for col in range(n):
        e = np.zeros(n, dtype=np.uint8)
        e[col] = 1
        x = np.zeros(n, dtype=np.uint8)
        for i in range(n):
            x[i] = (e[i] + int(mat[i, :i] @ x[:i])) % 2
        inv[:, col] = x
    return inv


@lru_cache(maxsize=None)
def bk_sets(n: int) -> tuple[tuple[int, int, int], ...]:
    """Per mode ``j``: bitmasks of (update set, parity set, remainder set)."""
    beta = bk_matrix(n).astype(np.int64)
    inv = _gf2_inverse_lower(bk_matrix(n)).astype(np.int64)
    parity = np.tril(np.ones((n, n), dtype=np.int64), -1)
    pinv = (parity @ inv) % 2
    out = []
    for j in range(n):
        update = [i for i in range(j + 1, n) if beta[i, j]]
        par = [m for m in range(n) if pinv[j, m]]
        flip = [m for m in range(j) if inv[j, m]]
        rem = set(par) ^ set(flip)
        out.append((_mask(update), _mask(par), _mask(rem)))
    return tuple(out)


def _bk_ladder(mode: int, n: int) -> tuple[tuple[int, int], tuple[int, int]]:
    update, par, rem = bk_sets(n)[mode]
    bit = 1 << mode
    return (bit | update, par), (bit | update, rem | bit)


def _ladder_images(op: LadderOp, n_modes: int, encoding: Encoding) -> dict[tuple[int, int], complex]:
    if encoding is Encoding.JORDAN_WIGNER:
        re_key, im_key = _jw_ladder(op.mode)
    else:
        re_key, im_key = _bk_ladder(op.mode, n_modes)
    return {re_key: 0.5, im_key: (-0.5j if op.is_create else 0.5j)}


def encode(F: FermionSum, n_modes: int, encoding: Encoding | str = Encoding.JORDAN_WIGNER) -> PauliSum:
    encoding = Encoding.parse(encoding)
    images: dict[LadderOp, dict] = {}
    out: dict[tuple[int, int], complex] = {}
    for term in F.terms:
        acc: dict[tuple[int, int], complex] = {(0, 0): complex(term.coefficient)}
        for op in term.ops:
            if not 0 <= op.mode < n_modes:
                raise ValueError(f"mode {op.mode} out of range for {n_modes} modes")
            img = images.get(op)
            if img is None:
                img = images[op] = _ladder_images(op, n_modes, encoding)
            nxt: dict[tuple[int, int], complex] = {}
            for (x1, z1), c1 in acc.items():
                y1 = (x1 & z1).bit_count()
                for (x2, z2), c2 in img.items():
                    # inlined mul_keys
                    x3, z3 = x1 ^ x2, z1 ^ z2
                    e = y1 + (x2 & z2).bit_count() + 2 * (z1 & x2).bit_count() - (x3 & z3).bit_count()
                    k3 = (x3, z3)
                    nxt[k3] = nxt.get(k3, 0j) + _IPOW[e % 4] * c1 * c2
            acc = nxt
        for k, c in acc.items():
            out[k] = out.get(k, 0j) + c
    return pauli_simplify(PauliSum(out, n_modes))


def jordan_wigner(F: FermionSum, n_modes: int) -> PauliSum:
    """``a+_p -> 1/2 (X_p - i Y_p) Z_{p-1} ... Z_0``."""
    return encode(F, n_modes, Encoding.JORDAN_WIGNER)


def bravyi_kitaev(F: FermionSum, n_modes: int) -> PauliSum:
    """Bravyi-Kitaev image built from update, parity and remainder sets."""
    return encode(F, n_modes, Encoding.BRAVYI_KITAEV)


def encode_reference(occ: OccupationVector, encoding: Encoding | str = Encoding.JORDAN_WIGNER) -> tuple[int, ...]:
    """Computational-basis bits (qubit 0 first) representing an occupation vector."""
    encoding = Encoding.parse(encoding)
    k = np.array(occ, dtype=np.int64)
    if encoding is Encoding.JORDAN_WIGNER or len(k) == 0:
        return tuple(int(b) for b in k)
    return tuple(int(b) for b in (bk_matrix(len(k)).astype(np.int64) @ k) % 2)
