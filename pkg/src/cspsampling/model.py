"""Finite relational structures over explicit signatures.

Element ids are dense integers 0..domain_size-1; per-element labels are
cosmetic. Relation tuple sets are deduplicated; all printed or exported
output uses sorted lexicographic tuple order so results are deterministic.
All values are immutable after construction and safe to share across
concurrent solver runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence


class SignatureError(ValueError):
    """A signature invariant was violated (duplicate name, bad arity, mismatch)."""


class ShapedPartners(NamedTuple):
    """Both partner maps of a two-group relation projection, plus each
    direction's (partner-set size, value) pairs in ascending size order."""

    forward: dict[int, frozenset[int]]
    backward: dict[int, frozenset[int]]
    forward_by_size: tuple[tuple[int, int], ...]
    backward_by_size: tuple[tuple[int, int], ...]


class ShapedMasks(NamedTuple):
    """Bitmask form of a two-group relation projection, for the solver.

    Element k of the domain corresponds to bit 1 << k. ``forward`` maps a
    first-group value to the bitmask of its second-group partners (and
    ``backward`` the reverse); the key masks have a bit per supported
    value; the by-size tuples order values by how few partners they have.
    """

    forward: dict[int, int]
    backward: dict[int, int]
    forward_keys: int
    backward_keys: int
    forward_by_size: tuple[tuple[int, int], ...]
    backward_by_size: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class Signature:
    """An ordered set of relation symbols with arities."""

    symbols: tuple[tuple[str, int], ...]

    def __init__(self, symbols: Mapping[str, int] | Iterable[tuple[str, int]]):
        if isinstance(symbols, Mapping):
            pairs = tuple(symbols.items())
        else:
            pairs = tuple((str(n), int(a)) for n, a in symbols)
        seen = set()
        for name, arity in pairs:
            if name in seen:
                raise SignatureError(f"duplicate relation symbol {name!r}")
            if arity < 1:
                raise SignatureError(f"arity of {name!r} must be >= 1, got {arity}")
            seen.add(name)
        object.__setattr__(self, "symbols", pairs)
        object.__setattr__(self, "_arities", dict(pairs))

    def arity(self, name: str) -> int:
        try:
            return self._arities[name]
        except KeyError:
            raise SignatureError(f"unknown relation symbol {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._arities

    def __iter__(self) -> Iterator[tuple[str, int]]:
        return iter(self.symbols)

    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.symbols)

    def disjoint_from(self, other: "Signature") -> bool:
        return not (set(self._arities) & set(other._arities))

    def union(self, other: "Signature") -> "Signature":
        if not self.disjoint_from(other):
            overlap = sorted(set(self._arities) & set(other._arities))
            raise SignatureError(f"signatures overlap on {overlap}")
        return Signature(self.symbols + other.symbols)


@dataclass(frozen=True, eq=False)
class Structure:
    """A finite relational structure: dense integer domain plus tuple sets.

    ``relations`` always has an entry (possibly empty) for every signature
    symbol; every tuple has the symbol's arity and entries < domain_size.
    """

    signature: Signature
    domain_size: int
    relations: Mapping[str, frozenset[tuple[int, ...]]]
    labels: tuple[str, ...] | None = field(default=None)

    def __init__(
        self,
        signature: Signature,
        domain_size: int,
        relations: Mapping[str, Iterable[tuple[int, ...]]] | None = None,
        labels: Sequence[str] | None = None,
    ):
        if domain_size < 0:
            raise ValueError("domain_size must be non-negative")
        relations = relations or {}
        for name in relations:
            if name not in signature:
                raise SignatureError(f"relation {name!r} not in signature")
        frozen: dict[str, frozenset[tuple[int, ...]]] = {}
        for name, arity in signature:
            tuples = frozenset(tuple(t) for t in relations.get(name, ()))
            for t in tuples:
                if len(t) != arity:
                    raise ValueError(f"tuple {t} has wrong length for {name}/{arity}")
                for e in t:
                    if not (0 <= e < domain_size):
                        raise ValueError(f"element {e} out of range in {name}{t}")
            frozen[name] = tuples
        if labels is not None:
            labels = tuple(str(x) for x in labels)
            if len(labels) != domain_size:
                raise ValueError("labels must cover the whole domain")
        object.__setattr__(self, "signature", signature)
        object.__setattr__(self, "domain_size", domain_size)
        object.__setattr__(self, "relations", frozen)
        object.__setattr__(self, "labels", labels)
        # lazily filled caches used by the solvers; not part of the value
        object.__setattr__(self, "_indexes", {})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Structure):
            return NotImplemented
        return (
            self.signature == other.signature
            and self.domain_size == other.domain_size
            and self.relations == other.relations
            and self.labels == other.labels
        )

    def __repr__(self) -> str:
        rels = ", ".join(f"{n}:{len(ts)}" for n, ts in self.relations.items())
        return f"Structure(|D|={self.domain_size}, {rels})"

    def sorted_tuples(self, name: str) -> list[tuple[int, ...]]:
        return sorted(self.relations[name])

    def label(self, element: int) -> str:
        if self.labels is not None:
            return self.labels[element]
        return str(element)

    # --- solver-facing caches -------------------------------------------

    def tuples_by_value(self, name: str, position: int) -> dict[int, tuple]:
        """Tuples of a relation grouped by the value at one position."""
        key = ("bucket", name, position)
        cached = self._indexes.get(key)
        if cached is None:
            grouped: dict[int, list] = {}
            for t in self.relations[name]:
                grouped.setdefault(t[position], []).append(t)
            cached = {v: tuple(ts) for v, ts in grouped.items()}
            self._indexes[key] = cached
        return cached

    def partners(self, name: str, position: int) -> dict[int, frozenset[int]]:
        """For a binary relation: values at the other position, per value."""
        if self.signature.arity(name) != 2:
            raise ValueError(f"{name} is not binary")
        key = ("partners", name, position)
        cached = self._indexes.get(key)
        if cached is None:
            grouped: dict[int, set[int]] = {}
            other = 1 - position
            for t in self.relations[name]:
                grouped.setdefault(t[position], set()).add(t[other])
            cached = {v: frozenset(s) for v, s in grouped.items()}
            self._indexes[key] = cached
        return cached

    def projection(self, name: str, position: int) -> frozenset[int]:
        """All values occurring at one position of a relation."""
        key = ("proj", name, position)
        cached = self._indexes.get(key)
        if cached is None:
            cached = frozenset(t[position] for t in self.relations[name])
            self._indexes[key] = cached
        return cached

    def diagonal(self, name: str) -> frozenset[int]:
        """Values v with the constant tuple (v, ..., v) in a relation."""
        key = ("diag", name)
        cached = self._indexes.get(key)
        if cached is None:
            cached = frozenset(t[0] for t in self.relations[name] if len(set(t)) == 1)
            self._indexes[key] = cached
        return cached

    def shaped_partners(
        self,
        name: str,
        first_positions: tuple[int, ...],
        second_positions: tuple[int, ...],
    ) -> "ShapedPartners":
        """Binary projection of a relation onto two position groups.

        Keeps tuples that are constant on each group; returns the partner
        maps in both directions (first-value -> second-values and back),
        plus each direction's values ordered by partner-set size, which
        lets solvers bound support rechecks by a pigeonhole argument.
        Lets atoms with two distinct variables propagate like binary ones.
        """
        key = ("shaped", name, first_positions, second_positions)
        cached = self._indexes.get(key)
        if cached is None:
            fwd: dict[int, set[int]] = {}
            bwd: dict[int, set[int]] = {}
            f0 = first_positions[0]
            s0 = second_positions[0]
            f_rest = first_positions[1:]
            s_rest = second_positions[1:]
            for t in self.relations[name]:
                a = t[f0]
                if any(t[p] != a for p in f_rest):
                    continue
                b = t[s0]
                if any(t[p] != b for p in s_rest):
                    continue
                fwd.setdefault(a, set()).add(b)
                bwd.setdefault(b, set()).add(a)
            forward = {v: frozenset(s) for v, s in fwd.items()}
            backward = {v: frozenset(s) for v, s in bwd.items()}
            cached = ShapedPartners(
                forward,
                backward,
                tuple(sorted((len(s), v) for v, s in forward.items())),
                tuple(sorted((len(s), v) for v, s in backward.items())),
            )
            self._indexes[key] = cached
        return cached

    def shaped_masks(
        self,
        name: str,
        first_positions: tuple[int, ...],
        second_positions: tuple[int, ...],
    ) -> ShapedMasks:
        """Bitmask form of shaped_partners (element k is bit 1 << k)."""
        key = ("shaped-masks", name, first_positions, second_positions)
        cached = self._indexes.get(key)
        if cached is None:
            shaped = self.shaped_partners(name, first_positions, second_positions)
            forward = {v: _mask(s) for v, s in shaped.forward.items()}
            backward = {v: _mask(s) for v, s in shaped.backward.items()}
            cached = ShapedMasks(
                forward,
                backward,
                _mask(shaped.forward),
                _mask(shaped.backward),
                shaped.forward_by_size,
                shaped.backward_by_size,
            )
            self._indexes[key] = cached
        return cached

    def projection_mask(self, name: str, position: int) -> int:
        key = ("proj-mask", name, position)
        cached = self._indexes.get(key)
        if cached is None:
            cached = _mask(self.projection(name, position))
            self._indexes[key] = cached
        return cached

    def diagonal_mask(self, name: str) -> int:
        key = ("diag-mask", name)
        cached = self._indexes.get(key)
        if cached is None:
            cached = _mask(self.diagonal(name))
            self._indexes[key] = cached
        return cached


def _mask(values: Iterable[int]) -> int:
    out = 0
    for v in values:
        out |= 1 << v
    return out


def disjoint_union(structures: Sequence[Structure]) -> Structure:
    """Disjoint union with offset renumbering; tuples never cross summands."""
    structures = list(structures)
    if not structures:
        return Structure(Signature(()), 0)
    signature = structures[0].signature
    for s in structures[1:]:
        if s.signature != signature:
            raise SignatureError("disjoint_union requires a common signature")
    total = sum(s.domain_size for s in structures)
    relations: dict[str, set[tuple[int, ...]]] = {n: set() for n, _ in signature}
    labels: list[str] | None = [] if all(s.labels is not None for s in structures) else None
    offset = 0
    for s in structures:
        for name, tuples in s.relations.items():
            rel = relations[name]
            for t in tuples:
                rel.add(tuple(e + offset for e in t))
        if labels is not None:
            labels.extend(s.labels or ())
        offset += s.domain_size
    return Structure(signature, total, relations, labels)


def is_homomorphism(
    mapping: Mapping[int, int], source: Structure, target: Structure
) -> bool:
    """True iff every relation tuple of ``source`` maps into ``target``."""
    if source.signature != target.signature:
        raise SignatureError("homomorphism requires equal signatures")
    for e in range(source.domain_size):
        if e not in mapping:
            raise ValueError(f"map is not total: element {e} unmapped")
        if not (0 <= mapping[e] < target.domain_size):
            raise ValueError(f"map sends {e} outside the target domain")
    for name, tuples in source.relations.items():
        image = target.relations[name]
        for t in tuples:
            if tuple(mapping[e] for e in t) not in image:
                return False
    return True


def image_structure(
    mapping: Mapping[int, int], source: Structure, target: Structure
) -> Structure:
    """Substructure of ``target`` induced on the image of ``mapping``.

    The input map must be a homomorphism from ``source`` to ``target``.
    """
    if not is_homomorphism(mapping, source, target):
        raise ValueError("map is not a homomorphism")
    image = sorted({mapping[e] for e in range(source.domain_size)})
    renumber = {old: new for new, old in enumerate(image)}
    keep = set(image)
    relations = {
        name: {
            tuple(renumber[e] for e in t)
            for t in tuples
            if all(e in keep for e in t)
        }
        for name, tuples in target.relations.items()
    }
    labels = None
    if target.labels is not None:
        labels = [target.labels[old] for old in image]
    return Structure(target.signature, len(image), relations, labels)
