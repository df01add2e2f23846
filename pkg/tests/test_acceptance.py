"""Acceptance gate. Each test prints one PASS/FAIL line with the measured numbers."""

import itertools
import math
import time
import warnings

import numpy as np
import pytest

from chemcut.ansatz import Layout, LucjParameters, lucj
from chemcut.circuit import Circuit, GateKind, gate
from chemcut.cli import run_sweep, sweep_jobs
from chemcut.cutting import Partition, decompose_gate, decompose_zz, find_cuts, gate_gamma_squared, total_overhead
from chemcut.encodings import Encoding, encode
from chemcut.estimator import EstimatorConfig, exact_reconstruction, mc_estimate, uncut_expectation
from chemcut.fermion import FermionSum, FermionTerm, cre, des
from chemcut.pauli import PauliSum
from chemcut.qasm import ParseError, emit_qasm, parse_qasm

from conftest import (
    dense_pauli,
    fenwick_matrix,
    matrix_units,
    mutate_text,
    perm_matrix,
    qpd_channel,
    random_circuit,
    random_cut_circuit,
    random_observable,
    zz_unitary,
)


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {number}: {'PASS' if ok else 'FAIL'} ({detail})")
        return ok
    return emit


def test_1_overhead_arithmetic(report):
    t0 = time.perf_counter()
    expected = {18: 1.5009e17, 24: 7.9766e22, 14: 2.2877e13, 13: 2.5419e12,
             11: 3.1381e10, 9: 3.8742e8, 5: 5.9049e4, 4: 6.5610e3}
    worst = 0.0
    for cuts, value in expected.items():
        for kind in (GateKind.CX, GateKind.CZ):
            worst = max(worst, abs(total_overhead([(kind, None)] * cuts).total_gamma_squared / value - 1))
    worst = max(worst, abs(gate_gamma_squared(GateKind.CP, -0.0566) / 1.1164 - 1))
    worst = max(worst, abs(total_overhead([(GateKind.CP, -0.0566)] * 2).total_gamma_squared / 1.2463 - 1))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-3 and elapsed < 1
    assert report(1, ok, f"max rel err {worst:.2e}, {elapsed:.3f}s")


def test_2_lucj_structure(report):
    t0 = time.perf_counter()
    structural = []
    for n_spatial in (2, 3, 6, 10):
        for L in (1, 2, 5):
            p = Partition.from_blocks(range(n_spatial), range(n_spatial, 2 * n_spatial))
            params = LucjParameters.constant_cp(n_spatial, L, -0.0566)
            a2a = find_cuts(lucj(2, n_spatial, params, Layout.ALL_TO_ALL), p)
            hh = find_cuts(lucj(2, n_spatial, params, Layout.HEAVY_HEX), p)
            structural.append(len(a2a) == n_spatial * L and len(hh) == -(-n_spatial // 2) * L)
    h2 = Partition.parse("0,1;2,3")
    h2_params = LucjParameters.constant_cp(2, 1, -0.0566)
    h2_ok = (len(find_cuts(lucj(2, 2, h2_params, Layout.ALL_TO_ALL), h2)) == 2
             and len(find_cuts(lucj(2, 2, h2_params, Layout.HEAVY_HEX), h2)) == 1)

    # H50: 50 spatial orbitals, L = 5, every CP angle -0.0566
    p = Partition.from_blocks(range(50), range(50, 100))
    params = LucjParameters.constant_cp(50, 5, -0.0566)
    totals = {}
    for layout in Layout:
        cuts = find_cuts(lucj(50, 50, params, layout), p)
        totals[layout] = (len(cuts), total_overhead([(c.kind, c.angle) for c in cuts]))
    counts_ok = totals[Layout.ALL_TO_ALL][0] == 250 and totals[Layout.HEAVY_HEX][0] == 125
    finite = all(not r.saturated for _, r in totals.values())
    below = all(r.total_gamma_squared < 1e3 for _, r in totals.values())
    elapsed = time.perf_counter() - t0
    detail = (f"structure {'ok' if all(structural) and h2_ok else 'broken'}; "
              f"H50 cuts {totals[Layout.ALL_TO_ALL][0]}/{totals[Layout.HEAVY_HEX][0]}; "
              f"gamma^2 = 10^{totals[Layout.ALL_TO_ALL][1].log10_total:.2f} (all-to-all), "
              f"10^{totals[Layout.HEAVY_HEX][1].log10_total:.2f} (heavy-hex); "
              f"finite={finite}, below 1e3={below}; {elapsed:.2f}s")
    ok = all(structural) and h2_ok and counts_ok and finite and below and elapsed < 1
    assert report(2, ok, detail)


def test_3_saturation(report):
    t0 = time.perf_counter()
    rows = run_sweep(sweep_jobs([1, 5, 9], ["uccsd", "upccd", "upccgsd"], [1]))
    elapsed = time.perf_counter() - t0
    series: dict = {}
    consistent = True
    for r in rows:
        series.setdefault((r.method, r.config), []).append(r)
        consistent &= all(k is GateKind.CX for k, _ in r.cuts) or not r.cuts
        consistent &= r.log10_gamma_sq == pytest.approx(r.n_cuts * math.log10(9), rel=1e-12)
    finite_h2_only = all(
        math.isfinite(s[0].gamma_sq) and all(math.isinf(r.gamma_sq) for r in s[1:]) for s in series.values()
    )
    increasing = all(all(a.log10_gamma_sq < b.log10_gamma_sq for a, b in zip(s, s[1:])) for s in series.values())
    complete = sorted(series) == sorted(itertools.product(("uccsd", "upccd", "upccgsd"), ("jw", "bk")))
    complete &= all([r.system for r in s] == ["H2", "H10", "H18"] for s in series.values())
    ok = finite_h2_only and increasing and consistent and complete and elapsed < 10
    log10s = {f"{m}/{c}": [round(r.log10_gamma_sq, 1) for r in s] for (m, c), s in series.items()}
    assert report(3, ok, f"finite only at H2={finite_h2_only}, increasing={increasing}, "
                         f"gamma^2=9^cuts={consistent}, {elapsed:.1f}s; log10 {log10s}")


def test_4_cut_execution(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    shapes = []
    for _ in range(50):
        n = int(rng.integers(2, 9))
        shapes.append((n, int(rng.integers(1, n)), int(rng.integers(1, 4))))
    obs_seeds = [int(s) for s in rng.integers(2**31, size=20)]
    worst_exact, worst_z = 0.0, 0.0
    for i, (n, split, n_cuts) in enumerate(shapes):
        c = random_cut_circuit(rng, n, split, 4 * n, n_cuts)
        O = random_observable(np.random.default_rng(obs_seeds[i % 20]), n, 6)
        p = Partition.from_blocks(range(split), range(split, n))
        assert len(find_cuts(c, p)) == n_cuts
        ref = uncut_expectation(c, O)
        worst_exact = max(worst_exact, abs(exact_reconstruction(c, p, O) - ref))
        est = mc_estimate(c, p, O, EstimatorConfig(shots=100_000, seed=i))
        z = abs(est.value - ref) / est.stderr if est.stderr > 0 else (0.0 if abs(est.value - ref) < 1e-8 else math.inf)
        worst_z = max(worst_z, z)
    elapsed = time.perf_counter() - t0
    ok = worst_exact < 1e-8 and worst_z < 5 and elapsed < 60
    assert report(4, ok, f"max exact err {worst_exact:.1e}, max |z| {worst_z:.2f}, {elapsed:.1f}s")


def test_5_channel_identity(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    worst = 0.0
    for phi in rng.uniform(-math.pi, math.pi, 100):
        U = zz_unitary(phi)
        qpd = decompose_zz(phi)
        for E in matrix_units():
            worst = max(worst, np.abs(qpd_channel(qpd, E) - U @ E @ U.conj().T).max())
    forms = [abs(gate_gamma_squared(GateKind.CZ) - 9), abs(gate_gamma_squared(GateKind.CX) - 9),
             abs(decompose_zz(math.pi / 4).kappa ** 2 - 9)]
    for theta in rng.uniform(-2 * math.pi, 2 * math.pi, 50):
        forms.append(abs(gate_gamma_squared(GateKind.CP, theta) - (1 + 2 * abs(math.sin(theta / 2))) ** 2))
        forms.append(abs(decompose_gate(gate(GateKind.CP, 0, 1, angle=theta)).qpd.kappa ** 2
                         - (1 + 2 * abs(math.sin(theta / 2))) ** 2))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-10 and max(forms) < 1e-12 and elapsed < 5
    assert report(5, ok, f"max channel err {worst:.1e}, max kappa^2 err {max(forms):.1e}, {elapsed:.2f}s")


def hermitian_terms(n):
    """Every Hermitian one- and two-body term on n modes: T + T^dagger and i(T - T^dagger)."""
    ones = [(cre(p), des(q)) for p in range(n) for q in range(n)]
    twos = [(cre(p), cre(q), des(r), des(s))
            for p, q in itertools.combinations(range(n), 2) for r, s in itertools.combinations(range(n), 2)]
    for ops in ones + twos:
        dag = tuple(o.dagger() for o in reversed(ops))
        yield FermionSum((FermionTerm(1.0, ops), FermionTerm(1.0, dag)))
        if dag != ops:
            yield FermionSum((FermionTerm(1j, ops), FermionTerm(-1j, dag)))


def test_6_encodings(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    car_err = herm_err = exp_err = 0.0
    n_terms = 0
    for n in range(1, 5):
        eye = np.eye(1 << n)
        for enc in Encoding:
            a = [dense_pauli(encode(FermionSum((FermionTerm(1.0, (des(p),)),)), n, enc)) for p in range(n)]
            ad = [dense_pauli(encode(FermionSum((FermionTerm(1.0, (cre(p),)),)), n, enc)) for p in range(n)]
            for p, q in itertools.product(range(n), repeat=2):
                car_err = max(car_err, np.abs(a[p] @ ad[q] + ad[q] @ a[p] - (p == q) * eye).max(),
                              np.abs(a[p] @ a[q] + a[q] @ a[p]).max())
        Pm = perm_matrix(fenwick_matrix(n))
        states = rng.normal(size=(4, 1 << n)) + 1j * rng.normal(size=(4, 1 << n))
        for F in hermitian_terms(n):
            n_terms += 1
            jw, bk = encode(F, n, Encoding.JORDAN_WIGNER), encode(F, n, Encoding.BRAVYI_KITAEV)
            for P in (jw, bk):
                herm_err = max(herm_err, max((abs(c.imag) for c in P.terms.values()), default=0.0))
            mj, mb = dense_pauli(jw), dense_pauli(bk)
            for psi in states:
                psi = psi / np.linalg.norm(psi)
                phi = Pm @ psi  # the same fermionic state in the BK basis
                exp_err = max(exp_err, abs(np.vdot(psi, mj @ psi) - np.vdot(phi, mb @ phi)))
    elapsed = time.perf_counter() - t0
    ok = max(car_err, herm_err, exp_err) < 1e-10 and elapsed < 10
    assert report(6, ok, f"{n_terms} terms; CAR err {car_err:.1e}, imag coeff {herm_err:.1e}, "
                         f"JW-BK err {exp_err:.1e}, {elapsed:.2f}s")


def test_7_kappa_scaling(report):
    t0 = time.perf_counter()
    p = Partition.parse("0;1")
    O = PauliSum.from_label("Z0 Z1")
    prep = [gate(GateKind.RY, 0, angle=0.3), gate(GateKind.RY, 1, angle=0.5)]
    stderr = {}
    for k in (1, 2):
        c = Circuit(2, prep + [gate(GateKind.CZ, 0, 1)] * k)
        stderr[k] = mc_estimate(c, p, O, EstimatorConfig(shots=100_000, seed=7)).stderr
    ratio = stderr[2] / stderr[1]
    elapsed = time.perf_counter() - t0
    ok = abs(ratio - 3) <= 0.75 and elapsed < 120
    assert report(7, ok, f"stderr {stderr[1]:.4g} -> {stderr[2]:.4g}, ratio {ratio:.3f}, {elapsed:.2f}s")


def test_8_parser_robustness(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    round_trips = 0
    corpus = []
    for _ in range(500):
        n = int(rng.integers(2, 9))
        c = random_circuit(rng, n, int(rng.integers(0, 60)))
        text = emit_qasm(c)
        round_trips += parse_qasm(text) == c
        corpus.append(text)
    crashes, unpositioned, parsed, rejected = [], 0, 0, 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for i in range(10_000):
            text = mutate_text(rng, corpus[i % len(corpus)], int(rng.integers(1, 8)))
            try:
                parse_qasm(text)
                parsed += 1
            except ParseError as e:
                rejected += 1
                lines = text.replace("\r\n", "\n").split("\n")
                unpositioned += not (1 <= e.line <= len(lines) and 1 <= e.column <= len(lines[e.line - 1]) + 1)
            except Exception as e:  # noqa: BLE001 - any other exception is a crash
                crashes.append(repr(e))
    elapsed = time.perf_counter() - t0
    ok = round_trips == 500 and not crashes and unpositioned == 0 and elapsed < 10
    assert report(8, ok, f"round-trips {round_trips}/500; fuzz {parsed} parsed, {rejected} rejected, "
                         f"{len(crashes)} crashes, {unpositioned} bad positions, {elapsed:.1f}s")
