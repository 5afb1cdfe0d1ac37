"""Text formats: structures, instances, operation tables, theory specs.

All printers are canonical (signature order, sorted tuples, LF endings), so
parse(print(x)) == x and a second print is byte-identical. Structure files
are deliberately line-oriented and diffable:

    structure <name> over <sym/arity> <sym/arity> ...
    domain <k>
    label <id> <text>          # optional, one per labeled element
    rel <R>: (a,b) (c,d) ...   # one line per relation symbol

Instances are atom lists: ``R(x,y)``, ``x = y``, ``x != y``, ``false``,
separated by ``;``, ``&`` or newlines, with an optional ``vars a, b`` line
declaring variables that occur in no atom. ``#`` starts a comment.

Theory specs name sample families and combine them:

    theory A = dense_order { rel lt/2 = base; rel min3/3 = "..."; }
    theory B = partition(2) { rel p0/1 = part(1); rel p1/1 = part(2); }
    theory T = union(A, B)

Builders: dense_order{...}, partition(m){...}, successor,
alternating_cycles, succ2col, marked_colors, explicit{...},
from_decider(name, max_n), union(a, b), expand(a){...}.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Optional

from . import families, qf
from .formulas import BOT, Atom, Eq, Instance, Neq, Rel, validate
from .model import Signature, Structure
from .polymorphisms import OperationTable
from .sampling import (
    SampleFamily,
    equality_expansion,
    explicit_sampling,
    product_sampling,
    sampling_from_decider,
)

IDENT = r"[A-Za-z_][A-Za-z0-9_]*"


class ParseError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "")
            message = f"{where}: {message}"
        super().__init__(message)
        self.line = line
        self.column = column


def _strip_comment(line: str) -> str:
    # a comment starts with '#' at line start or after whitespace, outside
    # quotes; a bare '#' inside a token (e.g. an element label) is content
    out = []
    in_string = False
    for i, ch in enumerate(line):
        if ch == '"':
            in_string = not in_string
        if (
            ch == "#"
            and not in_string
            and (i == 0 or line[i - 1].isspace())
        ):
            break
        out.append(ch)
    return "".join(out)


# --- structures ---------------------------------------------------------------


def print_structure(s: Structure, name: str = "structure") -> str:
    lines = [
        "structure "
        + name
        + " over "
        + " ".join(f"{sym}/{arity}" for sym, arity in s.signature)
    ]
    lines.append(f"domain {s.domain_size}")
    if s.labels is not None:
        for i, text in enumerate(s.labels):
            lines.append(f"label {i} {text}")
    for sym, _ in s.signature:
        body = " ".join(
            "(" + ",".join(str(e) for e in t) + ")" for t in s.sorted_tuples(sym)
        )
        lines.append(f"rel {sym}:" + (" " + body if body else ""))
    return "\n".join(lines) + "\n"


def parse_structures(text: str) -> list[tuple[str, Structure]]:
    """Parse a file of one or more structure blocks separated by blank lines."""
    out = []
    block: list[tuple[int, str]] = []
    for no, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            if block:
                out.append(_parse_structure_block(block))
                block = []
            continue
        block.append((no, line))
    if block:
        out.append(_parse_structure_block(block))
    return out


def parse_structure(text: str) -> tuple[str, Structure]:
    parsed = parse_structures(text)
    if len(parsed) != 1:
        raise ParseError(f"expected exactly one structure, found {len(parsed)}")
    return parsed[0]


def _parse_structure_block(block: list[tuple[int, str]]) -> tuple[str, Structure]:
    no, header = block[0]
    m = re.fullmatch(rf"structure\s+({IDENT})\s+over(.*)", header)
    if not m:
        raise ParseError("expected 'structure <name> over <sym/arity> ...'", no)
    name = m.group(1)
    symbols = []
    for part in m.group(2).split():
        sm = re.fullmatch(rf"({IDENT}|<)/(\d+)", part)
        if not sm:
            raise ParseError(f"bad symbol declaration {part!r}", no)
        symbols.append((sm.group(1), int(sm.group(2))))
    signature = Signature(symbols)
    domain_size = None
    labels: dict[int, str] = {}
    relations: dict[str, set[tuple[int, ...]]] = {}
    for no, line in block[1:]:
        if line.startswith("domain"):
            m = re.fullmatch(r"domain\s+(\d+)", line)
            if not m:
                raise ParseError("expected 'domain <k>'", no)
            domain_size = int(m.group(1))
        elif line.startswith("label"):
            m = re.fullmatch(r"label\s+(\d+)\s+(.*)", line)
            if not m:
                raise ParseError("expected 'label <id> <text>'", no)
            labels[int(m.group(1))] = m.group(2)
        elif line.startswith("rel"):
            m = re.fullmatch(rf"rel\s+({IDENT}|<):\s*(.*)", line)
            if not m:
                raise ParseError("expected 'rel <R>: (a,b) ...'", no)
            sym = m.group(1)
            if sym not in signature:
                raise ParseError(f"relation {sym!r} is not declared", no)
            tuples = set()
            rest = m.group(2).strip()
            if rest:
                for tm in rest.split():
                    if not (tm.startswith("(") and tm.endswith(")")):
                        raise ParseError(f"bad tuple {tm!r}", no)
                    try:
                        tuples.add(tuple(int(x) for x in tm[1:-1].split(",")))
                    except ValueError:
                        raise ParseError(f"bad tuple {tm!r}", no) from None
            relations[sym] = tuples
        else:
            raise ParseError(f"unexpected line {line!r}", no)
    if domain_size is None:
        raise ParseError("structure block missing its 'domain' line", block[0][0])
    label_list = None
    if labels:
        if sorted(labels) != list(range(domain_size)):
            raise ParseError("labels must cover elements 0..domain-1", block[0][0])
        label_list = [labels[i] for i in range(domain_size)]
    try:
        return name, Structure(signature, domain_size, relations, label_list)
    except ValueError as exc:
        raise ParseError(str(exc), block[0][0]) from None


# --- instances ----------------------------------------------------------------


_REL_RE = re.compile(rf"({IDENT})\s*\(([^()]*)\)\s*$")
_NEQ_RE = re.compile(rf"({IDENT})\s*!=\s*({IDENT})\s*$")
_EQ_RE = re.compile(rf"({IDENT})\s*=\s*({IDENT})\s*$")
_VARS_RE = re.compile(rf"vars\s+({IDENT}(\s*,\s*{IDENT})*)\s*$")


def parse_instance(text: str, signature: Signature) -> Instance:
    atoms: list[Atom] = []
    declared: list[str] = []
    for no, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        for chunk in re.split(r"[;&]", line):
            chunk = chunk.strip()
            if not chunk:
                continue
            m = _VARS_RE.fullmatch(chunk)
            if m:
                declared.extend(v.strip() for v in m.group(1).split(","))
                continue
            if chunk == "false":
                atoms.append(BOT)
                continue
            m = _REL_RE.fullmatch(chunk)
            if m:
                args = [a.strip() for a in m.group(2).split(",")] if m.group(2).strip() else []
                if not all(re.fullmatch(IDENT, a) for a in args):
                    raise ParseError(f"bad argument list in {chunk!r}", no)
                atoms.append(Rel(m.group(1), args))
                continue
            m = _NEQ_RE.fullmatch(chunk)
            if m:
                atoms.append(Neq(m.group(1), m.group(2)))
                continue
            m = _EQ_RE.fullmatch(chunk)
            if m:
                atoms.append(Eq(m.group(1), m.group(2)))
                continue
            raise ParseError(f"cannot parse atom {chunk!r}", no)
    inst = Instance.of(signature, atoms, declared)
    try:
        validate(inst)
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    return inst


def print_instance(inst: Instance) -> str:
    lines = []
    occurring = {v for a in inst.atoms for v in _atom_vars(a)}
    extras = [v for v in inst.variables if v not in occurring]
    if extras:
        lines.append("vars " + ", ".join(extras))
    for a in inst.atoms:
        if isinstance(a, Rel):
            lines.append(f"{a.symbol}({','.join(a.args)})")
        elif isinstance(a, Eq):
            lines.append(f"{a.left} = {a.right}")
        elif isinstance(a, Neq):
            lines.append(f"{a.left} != {a.right}")
        else:
            lines.append("false")
    return "\n".join(lines) + "\n"


def _atom_vars(a: Atom) -> tuple[str, ...]:
    if isinstance(a, Rel):
        return a.args
    if isinstance(a, (Eq, Neq)):
        return (a.left, a.right)
    return ()


# --- operation tables -----------------------------------------------------------


def print_operation_table(f: OperationTable, per_line: int = 16) -> str:
    values = [
        str(f.table[args])
        for args in sorted(f.table)
    ]
    lines = [f"optable domain {f.domain_size} arity {f.arity}"]
    for i in range(0, len(values), per_line):
        lines.append(" ".join(values[i : i + per_line]))
    return "\n".join(lines) + "\n"


def parse_operation_table(text: str) -> OperationTable:
    lines = [l for l in (_strip_comment(x).strip() for x in text.splitlines()) if l]
    if not lines:
        raise ParseError("empty operation table")
    m = re.fullmatch(r"optable\s+domain\s+(\d+)\s+arity\s+(\d+)", lines[0])
    if not m:
        raise ParseError("expected 'optable domain <m> arity <k>'", 1)
    domain_size, arity = int(m.group(1)), int(m.group(2))
    values = []
    for line in lines[1:]:
        values.extend(int(v) for v in line.split())
    args_in_order = list(itertools.product(range(domain_size), repeat=arity))
    if len(values) != len(args_in_order):
        raise ParseError(
            f"expected {len(args_in_order)} values, found {len(values)}"
        )
    return OperationTable(domain_size, arity, dict(zip(args_in_order, values)))


# --- theory specifications --------------------------------------------------------


@dataclass(frozen=True)
class TheorySpec:
    """Named sample families from a theory-spec file; last one is the default."""

    theories: dict[str, SampleFamily]
    default: Optional[str]

    def family(self, name: Optional[str] = None) -> SampleFamily:
        if name is None:
            if self.default is None:
                raise ParseError("the theory file defines no theories")
            name = self.default
        if name not in self.theories:
            raise ParseError(f"theory {name!r} is not defined")
        return self.theories[name]


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<string>"[^"\n]*")
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[={}()/,;:])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    value: str
    line: int
    column: int


class _TokenStream:
    def __init__(self, text: str):
        self.tokens: list[_Token] = []
        line, col = 1, 1
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if not m:
                raise ParseError(f"unexpected character {text[pos]!r}", line, col)
            kind = m.lastgroup
            value = m.group()
            if kind not in ("ws", "comment"):
                self.tokens.append(_Token(kind, value, line, col))
            newlines = value.count("\n")
            if newlines:
                line += newlines
                col = len(value) - value.rfind("\n")
            else:
                col += len(value)
            pos = m.end()
        self.pos = 0

    def peek(self) -> Optional[_Token]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> _Token:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else None
            raise ParseError(
                "unexpected end of input",
                last.line if last else 1,
                last.column if last else 1,
            )
        self.pos += 1
        return tok

    def expect(self, value: str) -> _Token:
        tok = self.next()
        if tok.value != value:
            raise ParseError(f"expected {value!r}, found {tok.value!r}", tok.line, tok.column)
        return tok

    def expect_kind(self, kind: str) -> _Token:
        tok = self.next()
        if tok.kind != kind:
            raise ParseError(f"expected {kind}, found {tok.value!r}", tok.line, tok.column)
        return tok

    def try_eat(self, value: str) -> bool:
        tok = self.peek()
        if tok is not None and tok.value == value:
            self.pos += 1
            return True
        return False


def parse_theory_spec(text: str) -> TheorySpec:
    toks = _TokenStream(text)
    theories: dict[str, SampleFamily] = {}
    default = None
    while toks.peek() is not None:
        toks.expect("theory")
        name_tok = toks.expect_kind("ident")
        if name_tok.value in theories:
            raise ParseError(
                f"theory {name_tok.value!r} defined twice", name_tok.line, name_tok.column
            )
        toks.expect("=")
        family = _parse_builder(toks, theories, name_tok.value)
        theories[name_tok.value] = family
        default = name_tok.value
    return TheorySpec(theories, default)


def _parse_builder(
    toks: _TokenStream, theories: dict[str, SampleFamily], name: str
) -> SampleFamily:
    tok = toks.expect_kind("ident")
    kind = tok.value
    try:
        if kind == "dense_order":
            defs = _parse_reldefs(toks, base=("order", None))
            return families.dense_order_sampling(defs, name=name)
        if kind == "partition":
            toks.expect("(")
            m = int(toks.expect_kind("int").value)
            toks.expect(")")
            defs = _parse_reldefs(toks, base=("part", m))
            return families.colored_partition_sampling(m, defs, name=name)
        if kind == "successor":
            return families.successor_sampling(name=name)
        if kind == "alternating_cycles":
            return families.alternating_cycles_sampling(name=name)
        if kind == "succ2col":
            return families.succ2col_sampling(name=name)
        if kind == "marked_colors":
            return families.marked_colors_sampling(name=name)
        if kind == "union":
            toks.expect("(")
            left = _lookup(toks, theories)
            toks.expect(",")
            right = _lookup(toks, theories)
            toks.expect(")")
            return product_sampling(left, right)
        if kind == "expand":
            toks.expect("(")
            base = _lookup(toks, theories)
            toks.expect(")")
            defs = _parse_reldefs(toks, base=("equality", None))
            return equality_expansion(base, defs)
        if kind == "from_decider":
            toks.expect("(")
            base = _lookup(toks, theories)
            toks.expect(",")
            max_n = int(toks.expect_kind("int").value)
            toks.expect(")")
            if base.decider is None:
                raise ParseError(f"theory {base.name!r} has no reference decider",
                                 tok.line, tok.column)
            return sampling_from_decider(
                base.signature, base.decider, max_n, name=name
            )
        if kind == "explicit":
            return _parse_explicit(toks, name)
    except (ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(str(exc), tok.line, tok.column) from None
    raise ParseError(f"unknown theory builder {kind!r}", tok.line, tok.column)


def _lookup(toks: _TokenStream, theories: dict[str, SampleFamily]) -> SampleFamily:
    tok = toks.expect_kind("ident")
    if tok.value not in theories:
        raise ParseError(f"theory {tok.value!r} used before definition", tok.line, tok.column)
    return theories[tok.value]


def _parse_reldefs(toks: _TokenStream, base: tuple[str, Optional[int]]):
    kind, m = base
    toks.expect("{")
    defs = []
    while not toks.try_eat("}"):
        toks.expect("rel")
        name = toks.expect_kind("ident").value
        toks.expect("/")
        arity = int(toks.expect_kind("int").value)
        toks.expect("=")
        tok = toks.next()
        if tok.value == "base":
            if kind != "order":
                raise ParseError("'base' is only available inside dense_order", tok.line, tok.column)
            if arity != 2:
                raise ParseError("'base' denotes the binary order", tok.line, tok.column)
            defn: qf.QFDef = qf.RelAtom(qf.ORDER_SYMBOL, (1, 2))
        elif tok.value == "part":
            if kind != "part":
                raise ParseError("'part(j)' is only available inside partition", tok.line, tok.column)
            toks.expect("(")
            j = int(toks.expect_kind("int").value)
            toks.expect(")")
            if not (1 <= j <= (m or 0)):
                raise ParseError(f"part({j}) is out of range", tok.line, tok.column)
            if arity != 1:
                raise ParseError("'part(j)' denotes a unary relation", tok.line, tok.column)
            defn = qf.RelAtom(qf.part_symbol(j), (1,))
        elif tok.kind == "string":
            try:
                defn = qf.parse_definition(tok.value[1:-1])
            except qf.DefinitionError as exc:
                raise ParseError(str(exc), tok.line, tok.column) from None
        else:
            raise ParseError(
                f"expected 'base', 'part(j)' or a quoted formula, found {tok.value!r}",
                tok.line,
                tok.column,
            )
        defs.append((name, arity, defn))
        toks.try_eat(";")
    return defs


def _parse_explicit(toks: _TokenStream, name: str) -> SampleFamily:
    toks.expect("{")
    toks.expect("sig")
    symbols = []
    while True:
        sym = toks.expect_kind("ident").value
        toks.expect("/")
        arity = int(toks.expect_kind("int").value)
        symbols.append((sym, arity))
        if not toks.try_eat(","):
            break
    toks.expect(";")
    signature = Signature(symbols)
    equality_matching = False
    no_pp_algebraicity = False
    while toks.peek() is not None and toks.peek().value in (
        "equality_matching",
        "no_pp_algebraicity",
    ):
        flag = toks.next().value
        toks.expect(";")
        if flag == "equality_matching":
            equality_matching = True
        else:
            no_pp_algebraicity = True
    structures = []
    while not toks.try_eat("}"):
        tok = toks.expect("sample")
        toks.expect("{")
        domain_size = None
        relations: dict[str, set[tuple[int, ...]]] = {}
        while not toks.try_eat("}"):
            inner = toks.expect_kind("ident")
            if inner.value == "domain":
                domain_size = int(toks.expect_kind("int").value)
                toks.expect(";")
            elif inner.value == "rel":
                sym = toks.expect_kind("ident").value
                toks.expect(":")
                tuples = set()
                while toks.peek() is not None and toks.peek().value == "(":
                    toks.expect("(")
                    entries = [int(toks.expect_kind("int").value)]
                    while toks.try_eat(","):
                        entries.append(int(toks.expect_kind("int").value))
                    toks.expect(")")
                    tuples.add(tuple(entries))
                toks.expect(";")
                relations[sym] = tuples
            else:
                raise ParseError(
                    f"expected 'domain' or 'rel', found {inner.value!r}",
                    inner.line,
                    inner.column,
                )
        if domain_size is None:
            raise ParseError("sample block missing 'domain'", tok.line, tok.column)
        try:
            structures.append(Structure(signature, domain_size, relations))
        except ValueError as exc:
            raise ParseError(str(exc), tok.line, tok.column) from None
    return explicit_sampling(
        signature,
        structures,
        equality_matching=equality_matching,
        no_pp_algebraicity=no_pp_algebraicity,
        name=name,
    )
