"""Reconstruction of observables from cut circuits.

Each block is simulated on its own register. Signed measurements split a block
state into the unnormalized branches ``P0 psi`` (sign +1) and ``P1 psi``
(sign -1). Block observables are evaluated exactly on each branch, so the only
sampling noise in :func:`mc_estimate` comes from the quasiprobability terms and
the measurement outcomes.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from chemcut.circuit import (
    MAX_QUBITS,
    Circuit,
    Gate,
    basis_state,
    expectation,
    pauli_expectations,
    run_gates,
    simulate,
)
from chemcut.cutting import (
    DOUBLE_MAX,
    OverheadReport,
    Partition,
    QPDDecomposition,
    SignedMeasure,
    Subcircuit,
    decompose_gate,
    find_cuts,
    realize_assignment,
)
from chemcut.pauli import PauliSum

MAX_EXACT_CUTS = 6
_BRANCH_ATOL = 1e-30


@dataclass(frozen=True)
class EstimatorConfig:
    shots: int = 10_000
    seed: int = 0
    shards: int = 1

    def __post_init__(self):
        if self.shots < 1 or self.shards < 1:
            raise ValueError("shots and shards must be positive")


@dataclass(frozen=True)
class ExpectationEstimate:
    value: float
    stderr: float
    samples: int
    kappa_total: float


@dataclass(frozen=True)
class _Leaf:
    sign: int
    prob: float  # squared norm of the unnormalized branch
    values: np.ndarray  # <branch|P_k|branch> for each block Pauli factor (unnormalized)


def restrict_key(key: tuple[int, int], qubits: Sequence[int]) -> tuple[int, int]:
    """Restrict a Pauli key to ``qubits`` and re-index them densely."""
    x, z = key
    lx = lz = 0
    for i, q in enumerate(qubits):
        lx |= ((x >> q) & 1) << i
        lz |= ((z >> q) & 1) << i
    return lx, lz


def _check_observable(c: Circuit, O: PauliSum) -> None:
    if O.n_qubits != c.n_qubits:
        raise ValueError(f"observable acts on {O.n_qubits} qubits, circuit has {c.n_qubits}")
    if not O.is_hermitian(1e-10):
        raise ValueError("observable has non-real coefficients")


def _block_leaves(sub: Subcircuit, keys: Sequence[tuple[int, int]]) -> list[_Leaf]:
    branches = [(1, basis_state(0, sub.n_qubits))]
    pending: list[Gate] = []

    def flush():
        for _, psi in branches:
            run_gates(psi, pending, sub.n_qubits)
        pending.clear()

    idx = np.arange(1 << sub.n_qubits)
    for op in sub.ops:
        if isinstance(op, SignedMeasure):
            flush()
            mask = ((idx >> op.qubit) & 1).astype(bool)
            nxt = []
            for sign, psi in branches:
                zero = np.where(mask, 0, psi)
                one = np.where(mask, psi, 0)
                for s, phi in ((sign, zero), (-sign, one)):
                    if np.vdot(phi, phi).real > _BRANCH_ATOL:
                        nxt.append((s, phi))
            branches = nxt
        else:
            pending.append(op)
    flush()
    leaves = []
    for sign, psi in branches:
        vals = pauli_expectations(psi, keys).real
        leaves.append(_Leaf(sign, float(np.vdot(psi, psi).real), vals))
    return leaves


class _CutContext:
    """Cuts, decompositions and per-block leaf caches for one (circuit, partition, observable)."""

    def __init__(self, c: Circuit, p: Partition, O: PauliSum):
        _check_observable(c, O)
        self.circuit = c
        self.partition = p
        self.cuts = find_cuts(c, p)
        self.qpds: list[QPDDecomposition] = [decompose_gate(cut).qpd for cut in self.cuts]
        self.keys = list(O.terms)
        self.coeffs = np.array([O.terms[k].real for k in self.keys])
        self.block_keys = [[restrict_key(k, p.block(b)) for k in self.keys] for b in (0, 1)]
        self._cache: dict = {}

    @property
    def kappa_total(self) -> float:
        return math.prod(q.kappa for q in self.qpds)

    def realize(self, choice: Sequence[int]):
        return realize_assignment(self.circuit, self.partition, list(choice), self.cuts, self.qpds)

    def leaves(self, b: int, sub: Subcircuit) -> list[_Leaf]:
        key = (b, sub.ops)
        hit = self._cache.get(key)
        if hit is None:
            hit = self._cache[key] = _block_leaves(sub, self.block_keys[b])
        return hit


def exact_reconstruction(c: Circuit, p: Partition, O: PauliSum) -> float:
    """Sum over every term assignment and measurement branch; equals the uncut expectation."""
    ctx = _CutContext(c, p, O)
    if len(ctx.cuts) > MAX_EXACT_CUTS:
        raise ValueError(f"{len(ctx.cuts)} cuts exceed the exact-enumeration limit of {MAX_EXACT_CUTS}")
    # a block only sees its own side of each term, so its factor is keyed by those ops
    sides = [[p.block_of[q] for q in cut.qubits] for cut in ctx.cuts]
    factor_cache: list[dict] = [{}, {}]
    total = 0.0
    for choice in itertools.product(*(range(len(q.terms)) for q in ctx.qpds)):
        terms = [q.terms[t] for q, t in zip(ctx.qpds, choice)]
        weight = math.prod(t.coefficient for t in terms)
        factors = []
        for b in (0, 1):
            key = tuple(t.op_block0 if s[0] == b else t.op_block1 for t, s in zip(terms, sides))
            f = factor_cache[b].get(key)
            if f is None:
                leaves = ctx.leaves(b, ctx.realize(choice).blocks[b])
                f = factor_cache[b][key] = sum((leaf.sign * leaf.values for leaf in leaves), np.zeros(len(ctx.keys)))
            factors.append(f)
        total += weight * float(ctx.coeffs @ (factors[0] * factors[1]))
    return total


def _shard_sizes(shots: int, shards: int) -> list[int]:
    base, extra = divmod(shots, shards)
    return [base + (1 if s < extra else 0) for s in range(shards)]


def shard_rng(seed: int, shard: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(shard,))))


def _sample_shard(ctx: _CutContext, n: int, rng: np.random.Generator) -> np.ndarray:
    kappa = ctx.kappa_total
    if not ctx.cuts:
        return _sample_assignment(ctx, ctx.realize(()), n, rng, kappa, 1.0)
    choices = np.empty((n, len(ctx.cuts)), dtype=np.int64)
    for i, q in enumerate(ctx.qpds):
        choices[:, i] = rng.choice(len(q.terms), size=n, p=q.probabilities)
    out = np.empty(n)
    uniq, inverse = np.unique(choices, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    for u, row in enumerate(uniq):
        members = np.flatnonzero(inverse == u)
        real = ctx.realize(row.tolist())
        sign = math.prod(1.0 if q.terms[t].coefficient > 0 else -1.0 for q, t in zip(ctx.qpds, row))
        out[members] = _sample_assignment(ctx, real, len(members), rng, kappa, sign)
    return out


def _leaf_product_matrix(ctx: _CutContext, real) -> tuple[np.ndarray, list[np.ndarray]]:
    """Per-leaf-pair estimator values (before the kappa/sign factor) and leaf probabilities."""
    per_block = []
    probs = []
    for b in (0, 1):
        leaves = ctx.leaves(b, real.blocks[b])
        f = np.array([leaf.sign * leaf.values / leaf.prob for leaf in leaves])
        p = np.array([leaf.prob for leaf in leaves])
        per_block.append(f)
        probs.append(p / p.sum())
    # E[l0, l1] = sum_k c_k f0[l0, k] f1[l1, k]
    mat = (per_block[0] * ctx.coeffs) @ per_block[1].T
    return mat, probs


def _sample_assignment(ctx, real, n, rng, kappa, sign) -> np.ndarray:
    mat, probs = _leaf_product_matrix(ctx, real)
    l0 = rng.choice(len(probs[0]), size=n, p=probs[0]) if len(probs[0]) > 1 else np.zeros(n, dtype=np.int64)
    l1 = rng.choice(len(probs[1]), size=n, p=probs[1]) if len(probs[1]) > 1 else np.zeros(n, dtype=np.int64)
    return kappa * sign * mat[l0, l1]


def _all_samples(ctx: _CutContext, cfg: EstimatorConfig) -> np.ndarray:
    # shards are independent streams; concatenated in shard order
    sizes = _shard_sizes(cfg.shots, cfg.shards)
    return np.concatenate([_sample_shard(ctx, n, shard_rng(cfg.seed, s)) for s, n in enumerate(sizes)])


def mc_samples(c: Circuit, p: Partition, O: PauliSum, cfg: EstimatorConfig) -> np.ndarray:
    """All per-sample estimator values."""
    return _all_samples(_CutContext(c, p, O), cfg)


def mc_estimate(c: Circuit, p: Partition, O: PauliSum, cfg: EstimatorConfig = EstimatorConfig()) -> ExpectationEstimate:
    """Monte Carlo QPD estimate: terms drawn with probability ``|a_i| / kappa``,
    measurement outcomes drawn by the Born rule, weighted by ``kappa * sign``."""
    ctx = _CutContext(c, p, O)
    samples = _all_samples(ctx, cfg)
    stderr = float(samples.std(ddof=1) / math.sqrt(len(samples))) if len(samples) > 1 else 0.0
    return ExpectationEstimate(float(samples.mean()), stderr, len(samples), ctx.kappa_total)


def uncut_expectation(c: Circuit, O: PauliSum) -> float:
    if c.n_qubits > MAX_QUBITS:
        raise ValueError(f"{c.n_qubits} qubits is too many for joint simulation")
    return expectation(simulate(c), O)


def shots_for_parity(base_shots: float, report: OverheadReport) -> float:
    """Circuit evaluations needed to match ``base_shots`` of the uncut circuit."""
    total = base_shots * report.total_gamma_squared
    return math.inf if total > DOUBLE_MAX else total


def log10_shots_for_parity(base_shots: float, report: OverheadReport) -> float:
    return math.log10(base_shots) + report.log10_total
