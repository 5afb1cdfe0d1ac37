"""Conjunctions of atomic formulas and their normalization.

An instance is a conjunction of relation atoms, equalities, disequalities
and the falsum atom over named variables. Variables are interned strings;
the canonical database orders elements by first occurrence, so it is
deterministic. Any normalization that discovers a contradiction rewrites
the instance to the single falsum atom: solvers need only one
unsatisfiability sentinel.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .model import Signature, Structure


@dataclass(frozen=True)
class Rel:
    symbol: str
    args: tuple[str, ...]

    def __init__(self, symbol: str, args: Iterable[str]):
        object.__setattr__(self, "symbol", symbol)
        object.__setattr__(self, "args", tuple(args))


@dataclass(frozen=True)
class Eq:
    left: str
    right: str


@dataclass(frozen=True)
class Neq:
    left: str
    right: str


@dataclass(frozen=True)
class Bot:
    pass


Atom = Rel | Eq | Neq | Bot
BOT = Bot()


def atom_variables(atom: Atom) -> tuple[str, ...]:
    if isinstance(atom, Rel):
        return atom.args
    if isinstance(atom, (Eq, Neq)):
        return (atom.left, atom.right)
    return ()


class InstanceError(ValueError):
    """Raised for atoms that do not fit the instance's signature."""


@dataclass(frozen=True)
class Instance:
    """A conjunction of atoms plus its ordered variable set.

    The variable set is the union of names occurring in atoms, in first
    occurrence order, followed by any declared-but-unused names. Declaring
    a variable without atoms is how an instance says "this variable exists
    but is unconstrained".
    """

    signature: Signature
    atoms: tuple[Atom, ...]
    variables: tuple[str, ...]

    @classmethod
    def of(
        cls,
        signature: Signature,
        atoms: Iterable[Atom],
        declared: Sequence[str] = (),
    ) -> "Instance":
        atoms = tuple(atoms)
        seen: dict[str, None] = {}
        for atom in atoms:
            for v in atom_variables(atom):
                seen.setdefault(v)
        for v in declared:
            seen.setdefault(v)
        return cls(signature, atoms, tuple(seen))

    def has_bot(self) -> bool:
        return any(isinstance(a, Bot) for a in self.atoms)


def validate(inst: Instance) -> str:
    """Check well-formedness; returns ``"well-formed"`` or ``"contains-bot"``.

    Raises InstanceError on unknown symbols or arity mismatches.
    """
    for atom in inst.atoms:
        if isinstance(atom, Rel):
            if atom.symbol not in inst.signature:
                raise InstanceError(f"unknown relation symbol {atom.symbol!r}")
            arity = inst.signature.arity(atom.symbol)
            if len(atom.args) != arity:
                raise InstanceError(
                    f"{atom.symbol} expects {arity} arguments, got {len(atom.args)}"
                )
    return "contains-bot" if inst.has_bot() else "well-formed"


def contract_equalities(inst: Instance) -> tuple[Instance, dict[str, str]]:
    """Remove equality atoms by merging variables into representatives.

    Each equality class is replaced by its first-occurring variable.
    Disequalities are rewritten to representatives; a disequality between
    identical representatives collapses the instance to falsum. Idempotent.
    """
    order = {v: i for i, v in enumerate(inst.variables)}
    parent: dict[str, str] = {v: v for v in inst.variables}

    def find(v: str) -> str:
        root = v
        while parent[root] != root:
            root = parent[root]
        while parent[v] != root:
            parent[v], v = root, parent[v]
        return root

    def union(a: str, b: str) -> None:
        ra, rb = find(a), find(b)
        if ra == rb:
            return
        if order[ra] > order[rb]:
            ra, rb = rb, ra
        parent[rb] = ra

    for atom in inst.atoms:
        if isinstance(atom, Eq):
            union(atom.left, atom.right)

    mapping = {v: find(v) for v in inst.variables}
    variables = tuple(dict.fromkeys(mapping[v] for v in inst.variables))

    new_atoms: list[Atom] = []
    seen: set[Atom] = set()
    bot = False
    for atom in inst.atoms:
        if isinstance(atom, Eq):
            continue
        if isinstance(atom, Bot):
            bot = True
            break
        if isinstance(atom, Rel):
            atom = Rel(atom.symbol, tuple(mapping[a] for a in atom.args))
        elif isinstance(atom, Neq):
            left, right = mapping[atom.left], mapping[atom.right]
            if left == right:
                bot = True
                break
            atom = Neq(left, right)
        if atom not in seen:
            seen.add(atom)
            new_atoms.append(atom)

    if bot:
        return Instance(inst.signature, (BOT,), variables), mapping
    return Instance(inst.signature, tuple(new_atoms), variables), mapping


def canonical_database(inst: Instance) -> Structure:
    """The structure whose elements are the instance's variables and whose
    relations are exactly its relation atoms.

    Rejects instances still containing equalities, disequalities or falsum;
    run contract_equalities first and check for falsum.
    """
    validate(inst)
    for atom in inst.atoms:
        if not isinstance(atom, Rel):
            raise InstanceError(
                "canonical database is defined for relation atoms only; "
                "normalize with contract_equalities and handle falsum first"
            )
    index = {v: i for i, v in enumerate(inst.variables)}
    relations: dict[str, set[tuple[int, ...]]] = {n: set() for n, _ in inst.signature}
    for atom in inst.atoms:
        relations[atom.symbol].add(tuple(index[a] for a in atom.args))
    return Structure(inst.signature, len(inst.variables), relations, inst.variables)
