"""Command-line driver: per-circuit cut reports, hydrogen-chain sweeps, cut verification."""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import io
import itertools
import json
import math
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from chemcut.ansatz import LucjParameters, Layout, get_ansatz
from chemcut.circuit import MAX_QUBITS, Circuit, GateKind
from chemcut.cutting import Partition, SignedMeasure, decompose_gate, find_cuts, realize_assignment, total_overhead
from chemcut.encodings import Encoding
from chemcut.estimator import (
    MAX_EXACT_CUTS,
    EstimatorConfig,
    exact_reconstruction,
    mc_estimate,
    shots_for_parity,
    uncut_expectation,
)
from chemcut.fermion import QubitOrdering
from chemcut.pauli import PauliSum
from chemcut.qasm import EMIT_NAMES, ParseError, parse_qasm

CSV_COLUMNS = (
    "system", "method", "config", "layers", "n_qubits", "n_cuts",
    "cuts_cx", "cuts_cz", "cuts_cp", "cuts_rzz",
    "gamma_sq", "log10_gamma_sq", "shots_1e3", "shots_1e4",
)
DEFAULT_CHAIN = (1, 5, 9, 13, 17, 21, 25)
DEFAULT_METHODS = ("uccsd", "upccd", "upccgsd", "lucj")
DEFAULT_SIGMA = 0.05
DEFAULT_MAX_QUBITS = 36  # applies to uccsd only
EXACT_TOL = 1e-8
MC_SIGMAS = 5.0


class UsageError(Exception):
    """Invalid combination of options; exit code 2."""


# -- report rows -------------------------------------------------------------------


def canonical_partition(method: str, n_elec: int, n_spatial: int) -> Partition:
    """Occupied|virtual for spatially blocked ansätze, alpha|beta for spin-sectored ones."""
    n_qubits = 2 * n_spatial
    if get_ansatz(method).ordering is QubitOrdering.SPATIAL_BLOCKED:
        split = n_elec  # lowest n_elec/2 spatial orbitals, both spins
    else:
        split = n_spatial
    return Partition.from_blocks(range(split), range(split, n_qubits))


def _fmt(x: float) -> str:
    return "inf" if math.isinf(x) else repr(float(x))


@dataclass(frozen=True)
class ReportRow:
    system: str
    method: str
    config: str
    layers: int
    n_qubits: int
    partition: str
    cuts: tuple[tuple[GateKind, float | None], ...]
    gamma_sq: float
    log10_gamma_sq: float
    counts: dict = field(default_factory=dict)

    @property
    def n_cuts(self) -> int:
        return len(self.cuts)

    def shots(self, base: float) -> float:
        return shots_for_parity(base, total_overhead(self.cuts))

    def csv_fields(self) -> list[str]:
        return [
            self.system, self.method, self.config, str(self.layers), str(self.n_qubits), str(self.n_cuts),
            *(str(self.counts.get(k, 0)) for k in (GateKind.CX, GateKind.CZ, GateKind.CP, GateKind.RZZ)),
            _fmt(self.gamma_sq), _fmt(self.log10_gamma_sq), _fmt(self.shots(1e3)), _fmt(self.shots(1e4)),
        ]

    def to_json(self) -> dict:
        out = dict(zip(CSV_COLUMNS, self.csv_fields()))
        for key in ("layers", "n_qubits", "n_cuts", "cuts_cx", "cuts_cz", "cuts_cp", "cuts_rzz"):
            out[key] = int(out[key])
        for key in ("gamma_sq", "log10_gamma_sq", "shots_1e3", "shots_1e4"):
            out[key] = out[key] if out[key] == "inf" else float(out[key])
        out["partition"] = self.partition
        out["cut_gates"] = [[k.value, a] for k, a in self.cuts]
        return out


def lucj_params(n_spatial: int, layers: int, cp_angle: float | None = None, sigma: float | None = None,
                params_path: str | None = None, seed: int = 0) -> LucjParameters:
    given = sum(x is not None for x in (cp_angle, sigma, params_path))
    if given > 1:
        raise UsageError("choose at most one of --cp-angle, --synthetic-angles, --params")
    if params_path is not None:
        try:
            data = json.loads(Path(params_path).read_text())
            params = LucjParameters.from_json(data)
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise UsageError(f"cannot load parameters from {params_path}: {exc}") from None
        if params.n_spatial != n_spatial or params.layers != layers:
            raise UsageError(f"parameter file is for {params.n_spatial} orbitals x {params.layers} layers, "
                             f"need {n_spatial} x {layers}")
        return params
    if cp_angle is not None:
        return LucjParameters.constant_cp(n_spatial, layers, cp_angle)
    if sigma is not None:
        return LucjParameters.random(n_spatial, layers, sigma, seed)
    return LucjParameters.zeros(n_spatial, layers)


def build_h2n(method: str, n: int, config: str, layers: int = 1, *, cp_angle=None, sigma=None,
              params_path=None, seed: int = 0) -> tuple[Circuit, str]:
    """Build an H_{2n} circuit and return it with the normalized config label."""
    if n < 1:
        raise UsageError("--n must be positive")
    if layers < 1:
        raise UsageError("--layers must be positive")
    try:
        info = get_ansatz(method)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    n_spatial = 2 * n
    if info.name == "lucj":
        try:
            layout = Layout.parse(config)
        except ValueError as exc:
            raise UsageError(f"lucj needs a layout ({', '.join(l.value for l in Layout)}): {exc}") from None
        params = lucj_params(n_spatial, layers, cp_angle, sigma, params_path, seed)
        return info.build_h2n(n, layout, layers, params), layout.value
    if any(x is not None for x in (cp_angle, sigma, params_path)):
        raise UsageError(f"angle options apply to lucj only, not {info.name}")
    try:
        enc = Encoding.parse(config)
    except ValueError as exc:
        raise UsageError(f"{info.name} needs an encoding (jw, bk): {exc}") from None
    if info.name == "upccgsd":
        circuit = info.build(2 * n, n_spatial, None, enc, info.ordering, k=layers)
    elif layers != 1:
        raise UsageError(f"{info.name} has a single layer")
    else:
        circuit = info.build_h2n(n, enc)
    return circuit, enc.value


def analyze_circuit(circuit: Circuit, partition: Partition, *, system: str, method: str, config: str,
                    layers: int) -> ReportRow:
    cuts = find_cuts(circuit, partition)
    report = total_overhead(cuts)
    return ReportRow(
        system=system, method=method, config=config, layers=layers, n_qubits=circuit.n_qubits,
        partition=str(partition), cuts=tuple((c.kind, c.angle) for c in cuts),
        gamma_sq=report.total_gamma_squared, log10_gamma_sq=report.log10_total, counts=dict(report.counts),
    )


def analyze(method: str, n: int, config: str, layers: int = 1, **angle_opts) -> ReportRow:
    circuit, config = build_h2n(method, n, config, layers, **angle_opts)
    partition = canonical_partition(method, 2 * n, 2 * n)
    return analyze_circuit(circuit, partition, system=f"H{2 * n}", method=method.lower(), config=config,
                           layers=layers)


def write_rows(rows: Sequence[ReportRow], fmt: str, out) -> None:
    if fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in rows:
            w.writerow(row.csv_fields())
    elif fmt == "json":
        json.dump([r.to_json() for r in rows], out, indent=2)
        out.write("\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")


# -- sweep -------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepJob:
    method: str
    n: int
    config: str
    layers: int
    sigma: float | None
    cp_angle: float | None
    seed: int


def sweep_jobs(ns: Sequence[int], methods: Sequence[str], layers: Sequence[int], *,
               encodings: Sequence[str] = ("jw", "bk"), layouts: Sequence[str] = ("all-to-all", "heavy-hex"),
               max_qubits: int = DEFAULT_MAX_QUBITS, sigma: float | None = DEFAULT_SIGMA,
               cp_angle: float | None = None, seed: int = 0) -> list[SweepJob]:
    """Sweep grid in output order: method, config, layers, then n."""
    jobs = []
    for method in methods:
        info = get_ansatz(method)
        if info.name == "lucj":
            configs, layer_list = layouts, layers
        else:
            configs, layer_list = encodings, (1,)
        for config in configs:
            for L in layer_list:
                for n in ns:
                    if info.name == "uccsd" and 4 * n > max_qubits:
                        continue
                    is_lucj = info.name == "lucj"
                    jobs.append(SweepJob(info.name, n, config, L,
                                         sigma if is_lucj and cp_angle is None else None,
                                         cp_angle if is_lucj else None, seed))
    return jobs


def run_job(job: SweepJob) -> ReportRow:
    return analyze(job.method, job.n, job.config, job.layers, cp_angle=job.cp_angle, sigma=job.sigma,
                   seed=job.seed)


def run_sweep(jobs: Sequence[SweepJob], workers: int = 1) -> list[ReportRow]:
    if workers <= 1:
        return [run_job(j) for j in jobs]
    # map preserves submission order whatever the completion order
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_job, jobs))


# -- observables -------------------------------------------------------------------

_OBS_TOKEN = re.compile(r"\s*(?:(?P<num>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
                        r"|(?P<pauli>[XYZ])(?P<idx>\d+)|(?P<op>[-+*]))")


def parse_observable(text: str, n_qubits: int) -> PauliSum:
    """Parse ``0.5*Z0 Z1 - 0.25*X0`` into a Pauli sum on ``n_qubits`` qubits.

    Raises:
        ParseError: positioned at the offending character (line 1, 1-based column).
    """
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _OBS_TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(1, start + 1, "unexpected character in observable", text[start:start + 1])
        col = m.start(m.lastgroup if m.lastgroup != "idx" else "pauli") + 1
        toks.append((m, col))
        pos = m.end()
    toks.append((None, len(text) + 1))

    def fail(i: int, msg: str):
        m, col = toks[i]
        raise ParseError(1, col, msg, m.group().strip() if m else "")

    terms: dict = {}
    i = 0
    first = True
    while True:
        sign = 1.0
        m, _ = toks[i]
        if m is not None and m.group("op") in ("+", "-"):
            sign = -1.0 if m.group("op") == "-" else 1.0
            i += 1
        elif not first:
            fail(i, "expected '+' or '-' between terms")
        m, _ = toks[i]
        if m is None or m.group("num") is None:
            fail(i, "expected a coefficient")
        coeff = sign * float(m.group("num"))
        i += 1
        m, _ = toks[i]
        if m is None or m.group("op") != "*":
            fail(i, "expected '*' after the coefficient")
        i += 1
        x = z = 0
        seen = set()
        while toks[i][0] is not None and toks[i][0].group("pauli"):
            m, _ = toks[i]
            q = int(m.group("idx"))
            if q >= n_qubits:
                fail(i, f"qubit {q} out of range for {n_qubits} qubits")
            if q in seen:
                fail(i, f"qubit {q} repeated in one term")
            seen.add(q)
            axis = m.group("pauli")
            x |= (axis in "XY") << q
            z |= (axis in "YZ") << q
            i += 1
        if not seen:
            fail(i, "expected a Pauli factor such as Z0")
        terms[(x, z)] = terms.get((x, z), 0.0) + coeff
        first = False
        if toks[i][0] is None:
            return PauliSum(terms, n_qubits)


# -- verify / cut ------------------------------------------------------------------


@dataclass(frozen=True)
class VerifyReport:
    mode: str
    n_cuts: int
    kappa_total: float
    estimate: float
    uncut: float | None
    stderr: float | None
    shots: int | None

    @property
    def difference(self) -> float | None:
        return None if self.uncut is None else abs(self.estimate - self.uncut)

    @property
    def verified(self) -> bool:
        if self.difference is None:
            return False
        if self.mode == "exact":
            return self.difference < EXACT_TOL
        # the floor covers zero-variance estimates such as uncut circuits
        return self.difference < max(MC_SIGMAS * self.stderr, EXACT_TOL)

    def to_json(self) -> dict:
        return {"mode": self.mode, "n_cuts": self.n_cuts, "kappa_total": self.kappa_total,
                "estimate": self.estimate, "uncut": self.uncut, "difference": self.difference,
                "stderr": self.stderr, "shots": self.shots, "verified": self.verified}


def verify(circuit: Circuit, partition: Partition, observable: PauliSum, mode: str = "exact",
           shots: int = 100_000, seed: int = 0, shards: int = 1) -> VerifyReport:
    if partition.n_qubits != circuit.n_qubits:
        raise UsageError(f"partition covers {partition.n_qubits} qubits, circuit has {circuit.n_qubits}")
    for b in (0, 1):
        if len(partition.block(b)) > MAX_QUBITS:
            raise UsageError(f"block {b} has more than {MAX_QUBITS} qubits")
    cuts = find_cuts(circuit, partition)
    kappa = math.prod(decompose_gate(c).qpd.kappa for c in cuts)
    uncut = uncut_expectation(circuit, observable) if circuit.n_qubits <= MAX_QUBITS else None
    if mode == "exact":
        if len(cuts) > MAX_EXACT_CUTS:
            raise UsageError(f"{len(cuts)} cuts exceed the exact-mode limit of {MAX_EXACT_CUTS}; use --mode mc")
        est = exact_reconstruction(circuit, partition, observable)
        return VerifyReport(mode, len(cuts), kappa, est, uncut, None, None)
    res = mc_estimate(circuit, partition, observable, EstimatorConfig(shots, seed, shards))
    return VerifyReport(mode, len(cuts), kappa, res.value, uncut, res.stderr, res.samples)


def subcircuit_qasm(sub, register: str = "q") -> str:
    """Subcircuit text; signed measurements become mid-circuit measurements into ``m``."""
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg {register}[{sub.n_qubits}];"]
    n_meas = sub.n_measurements
    if n_meas:
        lines.append(f"creg m[{n_meas}];")
    k = 0
    for op in sub.ops:
        if isinstance(op, SignedMeasure):
            lines.append(f"measure {register}[{op.qubit}] -> m[{k}];  // sign of cut {op.cut}")
            k += 1
            continue
        name = EMIT_NAMES[op.kind]
        if op.angle is not None:
            name += f"({op.angle:.17g})"
        lines.append(f"{name} {','.join(f'{register}[{q}]' for q in op.qubits)};")
    return "\n".join(lines) + "\n"


def write_cut_files(circuit: Circuit, partition: Partition, out_dir: Path) -> dict:
    """One QASM file per block per term assignment plus a manifest with weights."""
    cuts = find_cuts(circuit, partition)
    if len(cuts) > MAX_EXACT_CUTS:
        raise UsageError(f"{len(cuts)} cuts give too many assignments (limit {MAX_EXACT_CUTS} cuts)")
    qpds = [decompose_gate(c).qpd for c in cuts]
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for choice in itertools.product(*(range(len(q.terms)) for q in qpds)):
        real = realize_assignment(circuit, partition, list(choice), cuts, qpds)
        tag = "-".join(map(str, choice)) or "uncut"
        files = []
        for b in (0, 1):
            name = f"assign_{tag}_block{b}.qasm"
            (out_dir / name).write_text(subcircuit_qasm(real.blocks[b]))
            files.append(name)
        entries.append({"choice": list(choice), "weight": real.weight, "files": files,
                        "qubits": [list(real.blocks[b].qubits) for b in (0, 1)]})
    manifest = {"partition": str(partition), "n_cuts": len(cuts),
                "kappa_total": math.prod(q.kappa for q in qpds), "assignments": entries}
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


# -- argument parsing --------------------------------------------------------------


def _int_list(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            lo, hi = part.split("-", 1)
            out += range(int(lo), int(hi) + 1)
        elif part:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def _str_list(text: str) -> list[str]:
    return [p.strip() for p in text.split(",") if p.strip()]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chemcut", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def out_opts(p, default_fmt="json"):
        p.add_argument("--format", choices=("json", "csv"), default=default_fmt)
        p.add_argument("--out", help="write to this file instead of stdout")

    def angle_opts(p):
        p.add_argument("--cp-angle", type=float, help="lucj: every opposite-spin CP angle")
        p.add_argument("--synthetic-angles", type=float, metavar="SIGMA",
                       help="lucj: draw all angles from N(0, SIGMA^2)")
        p.add_argument("--seed", type=int, default=0)

    a = sub.add_parser("analyze", help="cut report for one H_2n circuit")
    a.add_argument("--method", required=True, choices=DEFAULT_METHODS)
    a.add_argument("--n", type=int, required=True, help="H_2n chain size")
    a.add_argument("--encoding", help="jw or bk (Pauli-gadget methods)")
    a.add_argument("--layout", help="all-to-all or heavy-hex (lucj)")
    a.add_argument("--layers", type=int, default=1)
    a.add_argument("--params", help="lucj: JSON parameter file")
    angle_opts(a)
    out_opts(a)

    s = sub.add_parser("sweep", help="CSV table over hydrogen chains")
    s.add_argument("--n", type=_int_list, default=list(DEFAULT_CHAIN), help="e.g. 1,5,9")
    s.add_argument("--methods", type=_str_list, default=list(DEFAULT_METHODS))
    s.add_argument("--encodings", type=_str_list, default=["jw", "bk"])
    s.add_argument("--layouts", type=_str_list, default=["all-to-all", "heavy-hex"])
    s.add_argument("--layers", type=_int_list, default=[1, 2, 3, 4, 5], help="lucj layers, e.g. 1-5")
    s.add_argument("--max-qubits", type=int, default=DEFAULT_MAX_QUBITS, help="uccsd qubit cap")
    s.add_argument("--jobs", type=int, default=1, help="worker processes")
    angle_opts(s)
    out_opts(s, "csv")

    v = sub.add_parser("verify", help="check cut reconstruction against the uncut circuit")
    v.add_argument("qasm")
    v.add_argument("--partition", required=True, help="e.g. '0,1;2,3'")
    v.add_argument("--observable", required=True, help="e.g. '0.5*Z0 Z1 - 0.25*X0'")
    v.add_argument("--mode", choices=("exact", "mc"), default="exact")
    v.add_argument("--shots", type=int, default=100_000)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--shards", type=int, default=1)
    out_opts(v)

    c = sub.add_parser("cut", help="write subcircuit QASM for every term assignment")
    c.add_argument("qasm")
    c.add_argument("--partition", required=True)
    c.add_argument("--out", required=True, help="output directory")
    return ap


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _read_circuit(path: str) -> Circuit:
    try:
        text = Path(path).read_bytes().decode("utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    try:
        return parse_qasm(text)
    except ParseError as exc:
        raise UsageError(f"{path}:{exc}") from None


def _parse_partition(spec: str, n_qubits: int) -> Partition:
    try:
        p = Partition.parse(spec)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if p.n_qubits != n_qubits:
        raise UsageError(f"partition covers {p.n_qubits} qubits, circuit has {n_qubits}")
    return p


def _cmd_analyze(args) -> int:
    is_lucj = args.method == "lucj"
    if is_lucj and args.encoding:
        raise UsageError("lucj takes --layout, not --encoding")
    if not is_lucj and args.layout:
        raise UsageError(f"{args.method} takes --encoding, not --layout")
    config = (args.layout or "all-to-all") if is_lucj else (args.encoding or "jw")
    row = analyze(args.method, args.n, config, args.layers, cp_angle=args.cp_angle,
                  sigma=args.synthetic_angles, params_path=args.params, seed=args.seed)
    buf = io.StringIO()
    write_rows([row], args.format, buf)
    _emit(buf.getvalue(), args.out)
    return 0


def _cmd_sweep(args) -> int:
    try:
        jobs = sweep_jobs(args.n, args.methods, args.layers, encodings=args.encodings, layouts=args.layouts,
                          max_qubits=args.max_qubits,
                          sigma=args.synthetic_angles if args.synthetic_angles is not None else DEFAULT_SIGMA,
                          cp_angle=args.cp_angle, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = run_sweep(jobs, args.jobs)
    buf = io.StringIO()
    write_rows(rows, args.format, buf) if rows else buf.write(",".join(CSV_COLUMNS) + "\n")
    _emit(buf.getvalue(), args.out)
    return 0


def _cmd_verify(args) -> int:
    circuit = _read_circuit(args.qasm)
    partition = _parse_partition(args.partition, circuit.n_qubits)
    try:
        observable = parse_observable(args.observable, circuit.n_qubits)
    except ParseError as exc:
        raise UsageError(f"observable:{exc}") from None
    try:
        report = verify(circuit, partition, observable, args.mode, args.shots, args.seed, args.shards)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.format == "json":
        text = json.dumps(report.to_json(), indent=2) + "\n"
    else:
        d = report.to_json()
        text = ",".join(d) + "\n" + ",".join("" if v is None else str(v) for v in d.values()) + "\n"
    _emit(text, args.out)
    if report.uncut is None:
        print("uncut reference unavailable: circuit too large for joint simulation", file=sys.stderr)
    return 0 if report.verified else 1


def _cmd_cut(args) -> int:
    circuit = _read_circuit(args.qasm)
    partition = _parse_partition(args.partition, circuit.n_qubits)
    manifest = write_cut_files(circuit, partition, Path(args.out))
    print(f"{len(manifest['assignments'])} assignments written to {args.out}")
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"analyze": _cmd_analyze, "sweep": _cmd_sweep, "verify": _cmd_verify, "cut": _cmd_cut}
    try:
        return handler[args.command](args)
    except UsageError as exc:
        print(f"chemcut {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"chemcut {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
