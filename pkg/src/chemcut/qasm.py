"""Reader and writer for a unitary subset of OpenQASM 2."""

from __future__ import annotations

import math
import re
import warnings
from typing import NamedTuple

from chemcut.circuit import Circuit, Gate, GateKind

# name -> (kind, number of angle params, number of qubits)
GATES: dict[str, tuple[GateKind, int, int]] = {
    "x": (GateKind.X, 0, 1),
    "h": (GateKind.H, 0, 1),
    "s": (GateKind.S, 0, 1),
    "sdg": (GateKind.SDG, 0, 1),
    "rx": (GateKind.RX, 1, 1),
    "ry": (GateKind.RY, 1, 1),
    "rz": (GateKind.RZ, 1, 1),
    "p": (GateKind.PHASE, 1, 1),
    "u1": (GateKind.PHASE, 1, 1),
    "cx": (GateKind.CX, 0, 2),
    "cz": (GateKind.CZ, 0, 2),
    "cp": (GateKind.CP, 1, 2),
    "cu1": (GateKind.CP, 1, 2),
    "rzz": (GateKind.RZZ, 1, 2),
}
EMIT_NAMES = {
    GateKind.X: "x", GateKind.H: "h", GateKind.S: "s", GateKind.SDG: "sdg",
    GateKind.RX: "rx", GateKind.RY: "ry", GateKind.RZ: "rz", GateKind.PHASE: "p",
    GateKind.CX: "cx", GateKind.CZ: "cz", GateKind.CP: "cp", GateKind.RZZ: "rzz",
}
MAX_EXPR_DEPTH = 64


class ParseError(ValueError):
    def __init__(self, line: int, column: int, message: str, token: str = ""):
        self.line = line
        self.column = column
        self.message = message
        self.token = token
        where = f" near {token!r}" if token else ""
        super().__init__(f"{line}:{column}: {message}{where}")


class Token(NamedTuple):
    kind: str
    text: str
    line: int
    column: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<real>(?:\d+\.\d*|\.\d+)(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
  | (?P<int>\d+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"[^"\n]*")
  | (?P<arrow>->)
  | (?P<sym>[;,()\[\]{}+\-*/^])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    tokens = []
    line, line_start = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError(line, col, "unexpected character", text[pos])
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.regs: dict[str, tuple[int, int]] = {}  # name -> (offset, size)
        self.cregs: set[str] = set()
        self.n_qubits = 0
        self.gates: list[Gate] = []

    # -- token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(tok.line, tok.column, message, tok.text)

    def advance(self) -> Token:
        tok = self.tok
        if tok.kind != "eof":
            self.i += 1
        return tok

    def expect(self, text: str) -> Token:
        if self.tok.text != text or self.tok.kind in ("string",):
            raise self.error(f"expected {text!r}")
        return self.advance()

    def expect_kind(self, kind: str, what: str) -> Token:
        if self.tok.kind != kind:
            raise self.error(f"expected {what}")
        return self.advance()

    # -- statements

    def parse(self) -> Circuit:
        if self.tok.kind == "id" and self.tok.text == "OPENQASM":
            self.advance()
            ver = self.tok
            if ver.kind not in ("real", "int") or not ver.text.startswith("2"):
                raise self.error("only OPENQASM 2 is supported")
            self.advance()
            self.expect(";")
        while self.tok.kind != "eof":
            self.statement()
        return Circuit(self.n_qubits, self.gates)

    def statement(self) -> None:
        tok = self.tok
        if tok.kind != "id":
            raise self.error("expected a statement")
        name = tok.text
        if name == "OPENQASM":
            raise self.error("OPENQASM header must come first")
        if name == "include":
            self.advance()
            self.expect_kind("string", "a quoted file name")
            self.expect(";")
        elif name in ("qreg", "creg"):
            self.declaration(name)
        elif name == "barrier":
            self.advance()
            self.arguments(allow_register=True)
            self.expect(";")
        elif name == "measure":
            self.advance()
            self.qubit_ref(allow_register=True)
            self.expect("->")
            self.creg_ref()
            self.expect(";")
            warnings.warn(f"line {tok.line}: measurement ignored", stacklevel=3)
        elif name in GATES:
            self.gate()
        elif name in ("gate", "opaque", "if", "reset", "U", "CX"):
            raise self.error(f"'{name}' is not supported in this subset")
        else:
            raise self.error("unknown gate")

    def declaration(self, kind: str) -> None:
        self.advance()
        name_tok = self.expect_kind("id", "a register name")
        self.expect("[")
        size_tok = self.expect_kind("int", "a register size")
        self.expect("]")
        self.expect(";")
        size = int(size_tok.text)
        if name_tok.text in self.regs or name_tok.text in self.cregs:
            raise self.error("register already declared", name_tok)
        if kind == "creg":
            self.cregs.add(name_tok.text)
            warnings.warn(f"line {name_tok.line}: classical register {name_tok.text!r} ignored", stacklevel=4)
            return
        self.regs[name_tok.text] = (self.n_qubits, size)
        self.n_qubits += size

    def qubit_ref(self, allow_register: bool = False) -> list[int]:
        name_tok = self.expect_kind("id", "a qubit reference")
        if name_tok.text not in self.regs:
            raise self.error("undeclared quantum register", name_tok)
        offset, size = self.regs[name_tok.text]
        if self.tok.text != "[":
            if allow_register:
                return list(range(offset, offset + size))
            raise self.error("expected '[' (register broadcasting is not supported)")
        self.advance()
        idx_tok = self.expect_kind("int", "a qubit index")
        self.expect("]")
        idx = int(idx_tok.text)
        if idx >= size:
            raise self.error(f"qubit index out of range for {name_tok.text}[{size}]", idx_tok)
        return [offset + idx]

    def creg_ref(self) -> None:
        name_tok = self.expect_kind("id", "a classical register")
        if name_tok.text not in self.cregs:
            raise self.error("undeclared classical register", name_tok)
        if self.tok.text == "[":
            self.advance()
            self.expect_kind("int", "a bit index")
            self.expect("]")

    def arguments(self, allow_register: bool = False) -> list[tuple[int, Token]]:
        out = []
        while True:
            tok = self.tok
            out += [(q, tok) for q in self.qubit_ref(allow_register)]
            if self.tok.text != ",":
                return out
            self.advance()

    def gate(self) -> None:
        name_tok = self.advance()
        kind, n_params, n_qubits = GATES[name_tok.text]
        params: list[float] = []
        if self.tok.text == "(":
            self.advance()
            if self.tok.text != ")":
                params.append(self.expr(0))
                while self.tok.text == ",":
                    self.advance()
                    params.append(self.expr(0))
            self.expect(")")
        if len(params) != n_params:
            raise self.error(f"{name_tok.text} takes {n_params} parameter(s), got {len(params)}", name_tok)
        args = self.arguments()
        self.expect(";")
        if len(args) != n_qubits:
            raise self.error(f"{name_tok.text} acts on {n_qubits} qubit(s), got {len(args)}", name_tok)
        qubits = tuple(q for q, _ in args)
        if len(set(qubits)) != len(qubits):
            raise self.error("repeated qubit operand", args[-1][1])
        self.gates.append(Gate(kind, qubits, params[0] if params else None))

    # -- expressions: + - at the lowest level, then * /, unary minus, atoms

    def expr(self, depth: int) -> float:
        if depth > MAX_EXPR_DEPTH:
            raise self.error("expression nested too deeply")
        value = self.term(depth)
        while self.tok.text in ("+", "-") and self.tok.kind == "sym":
            op = self.advance().text
            rhs = self.term(depth)
            value = value + rhs if op == "+" else value - rhs
        return self._finite(value)

    def term(self, depth: int) -> float:
        value = self.unary(depth)
        while self.tok.text in ("*", "/") and self.tok.kind == "sym":
            op_tok = self.advance()
            rhs = self.unary(depth)
            if op_tok.text == "*":
                value *= rhs
            elif rhs == 0:
                raise self.error("division by zero", op_tok)
            else:
                value /= rhs
            self._finite(value, op_tok)
        return value

    def unary(self, depth: int) -> float:
        if self.tok.text in ("-", "+") and self.tok.kind == "sym":
            if depth > MAX_EXPR_DEPTH:
                raise self.error("expression nested too deeply")
            neg = self.advance().text == "-"
            v = self.unary(depth + 1)
            return -v if neg else v
        return self.atom(depth)

    def atom(self, depth: int) -> float:
        tok = self.tok
        if tok.kind in ("int", "real"):
            self.advance()
            return self._finite(float(tok.text), tok)
        if tok.kind == "id" and tok.text == "pi":
            self.advance()
            return math.pi
        if tok.text == "(" and tok.kind == "sym":
            self.advance()
            v = self.expr(depth + 1)
            self.expect(")")
            return v
        raise self.error("malformed expression")

    def _finite(self, value: float, tok: Token | None = None) -> float:
        if not math.isfinite(value):
            raise self.error("angle is not a finite number", tok)
        return value


def parse_qasm(text: str) -> Circuit:
    """Parse the supported OpenQASM 2 subset into a :class:`Circuit`.

    Raises:
        ParseError: with 1-based line/column on any unsupported or malformed input.
    """
    if not isinstance(text, str):
        raise TypeError("parse_qasm expects text")
    return _Parser(text).parse()


def emit_qasm(c: Circuit, register: str = "q") -> str:
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg {register}[{c.n_qubits}];"]
    for g in c.gates:
        name = EMIT_NAMES[g.kind]
        if g.angle is not None:
            name += f"({g.angle:.17g})"
        args = ",".join(f"{register}[{q}]" for q in g.qubits)
        lines.append(f"{name} {args};")
    return "\n".join(lines) + "\n"
