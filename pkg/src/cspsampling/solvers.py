"""Decision procedures over finite structures and sample families.

``hom_search`` is the exact oracle: backtracking search for a homomorphism
from an instance's canonical database into a target structure, honoring
disequalities natively. The consistency procedures (``arc_consistency``,
``establish_23_consistency``) are sound filters that become decision
procedures on targets with the right polymorphisms; they reject
disequalities loudly rather than approximating them.

Per-sample runs are independent: solver calls own their mutable state and
inputs are shared read-only, so many solves may run concurrently over one
family. Verdicts over a family are disjunctions, independent of order.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Mapping, Optional

from .formulas import Bot, Eq, Instance, Neq, Rel, contract_equalities, validate
from .model import Structure
from .sampling import SampleFamily


class SolverError(ValueError):
    """Raised when an instance violates a solver's contract."""


@dataclass(frozen=True)
class SolveResult:
    satisfiable: bool
    assignment: Optional[dict[str, int]] = None
    sample_index: Optional[int] = None

    @property
    def verdict(self) -> str:
        return "satisfiable" if self.satisfiable else "unsatisfiable"


@dataclass(frozen=True)
class ACState:
    """Per-variable candidate sets at the arc-consistency fixpoint."""

    domains: Mapping[str, frozenset[int]]


def hom_search(inst: Instance, target: Structure) -> SolveResult:
    """Exact satisfiability of an instance in one structure.

    Equalities are contracted away first; disequalities are enforced as
    value disequality on the assignment. Search assigns the variable with
    the smallest candidate set first (ties by name), values in ascending
    order. Candidate sets are integer bitmasks (element k is bit 1 << k),
    seeded from unary atoms and per-position projections, revised across
    atoms with two distinct variables, and pruned by forward checking on
    wider atoms; two-variable atoms are enforced exactly whenever either
    side collapses to a single value.
    """
    validate(inst)
    if inst.has_bot():
        return SolveResult(False)
    contracted, mapping = contract_equalities(inst)
    if contracted.has_bot():
        return SolveResult(False)
    variables = contracted.variables
    if not variables:
        return SolveResult(True, {}, None)

    atoms = [a for a in contracted.atoms if isinstance(a, Rel)]
    neqs = [a for a in contracted.atoms if isinstance(a, Neq)]

    full = (1 << target.domain_size) - 1
    cand: dict[str, int] = {v: full for v in variables}
    for a in atoms:
        distinct = tuple(dict.fromkeys(a.args))
        if len(distinct) == 1:
            cand[distinct[0]] &= target.diagonal_mask(a.symbol)
            continue
        for pos, v in enumerate(a.args):
            cand[v] &= target.projection_mask(a.symbol, pos)
    if any(not c for c in cand.values()):
        return SolveResult(False)

    # Atoms with two distinct variables become arcs (affected, partner
    # masks, watched, key mask, size-ordered values); atoms with one
    # distinct variable are exhausted by the diagonal seeding above; wider
    # atoms are forward-checked through per-position tuple indexes.
    arcs: list[tuple] = []
    arcs_watching: dict[str, list[int]] = {v: [] for v in variables}
    atoms_of: dict[str, list[Rel]] = {v: [] for v in variables}
    for a in atoms:
        args = a.args
        distinct = tuple(dict.fromkeys(args))
        if len(distinct) == 1:
            continue
        if len(distinct) == 2:
            x, y = distinct
            x_pos = tuple(i for i, v in enumerate(args) if v == x)
            y_pos = tuple(i for i, v in enumerate(args) if v == y)
            m = target.shaped_masks(a.symbol, x_pos, y_pos)
            arcs.append((y, m.backward, x, m.forward, m.backward_keys, m.backward_by_size))
            arcs_watching[x].append(len(arcs) - 1)
            arcs.append((x, m.forward, y, m.backward, m.forward_keys, m.forward_by_size))
            arcs_watching[y].append(len(arcs) - 1)
        else:
            for v in distinct:
                atoms_of[v].append(a)
    neq_neighbors: dict[str, list[str]] = {v: [] for v in variables}
    for a in neqs:
        neq_neighbors[a.left].append(a.right)
        neq_neighbors[a.right].append(a.left)

    assignment: dict[str, int] = {}
    unassigned = set(variables)
    relations = target.relations
    domain_size = target.domain_size

    def allowed_per_open(
        atom: Rel, anchor: int, open_vars: list[str]
    ) -> dict[str, int]:
        """Per-variable supported value masks from one anchor-bucket scan.

        A tuple supports the atom when it matches every assigned argument
        and assigns each open variable consistently across its positions;
        the projections to the open variables are collected independently.
        """
        args = atom.args
        bucket = target.tuples_by_value(atom.symbol, anchor).get(
            assignment[args[anchor]], ()
        )
        allowed: dict[str, int] = {u: 0 for u in open_vars}
        open_set = set(open_vars)
        for t in bucket:
            ok = True
            values: dict[str, int] = {}
            for i, x in enumerate(args):
                if x in open_set:
                    known = values.get(x)
                    if known is None:
                        values[x] = t[i]
                    elif known != t[i]:
                        ok = False
                        break
                elif t[i] != assignment[x]:
                    ok = False
                    break
            if ok:
                for u in open_vars:
                    allowed[u] |= 1 << values[u]
        return allowed

    def run_arcs(queue: deque, queued: set, trail: list, wide: bool) -> bool:
        """Arc revision across two-variable atoms; old masks on the trail.

        A singleton watched domain supports exactly the assigned value's
        partner mask, so that case is one AND; this is what makes
        assignments enforce these atoms exactly. A wide watched domain has
        lost at most domain - |dom| values, so by pigeonhole only affected
        values with that few partners can have lost them all; they are the
        only ones checked. Wide revision runs in the initial fixpoint;
        during search the singleton case carries the pruning.
        """
        while queue:
            arc_id = queue.popleft()
            queued.discard(arc_id)
            affected, keyed, watched, from_watched, keys_mask, by_size = arcs[arc_id]
            dom_w = cand[watched]
            dom_a = cand[affected]
            if dom_w & (dom_w - 1) == 0:  # singleton
                new = dom_a & from_watched.get(dom_w.bit_length() - 1, 0)
            elif not wide:
                continue
            else:
                new = dom_a & keys_mask
                threshold = domain_size - dom_w.bit_count()
                if threshold:
                    for size, b in by_size:
                        if size > threshold:
                            break
                        bit = 1 << b
                        if new & bit and not keyed[b] & dom_w:
                            new &= ~bit
            if new != dom_a:
                trail.append((affected, dom_a))
                cand[affected] = new
                if not new:
                    return False
                for next_id in arcs_watching[affected]:
                    if next_id not in queued:
                        queue.append(next_id)
                        queued.add(next_id)
        return True

    def propagate(var: str, value: int, trail: list) -> bool:
        queue: deque[int] = deque()
        queued: set[int] = set()

        def touch(u: str) -> None:
            for arc_id in arcs_watching[u]:
                if arc_id not in queued:
                    queue.append(arc_id)
                    queued.add(arc_id)

        bit = 1 << value
        for other in neq_neighbors[var]:
            if other in assignment:
                if assignment[other] == value:
                    return False
            elif cand[other] & bit:
                trail.append((other, cand[other]))
                cand[other] &= ~bit
                if not cand[other]:
                    return False
                touch(other)
        for atom in atoms_of[var]:
            open_vars = [x for x in dict.fromkeys(atom.args) if x not in assignment]
            if not open_vars:
                if tuple(assignment[x] for x in atom.args) not in relations[atom.symbol]:
                    return False
            else:
                anchor = atom.args.index(var)
                allowed = allowed_per_open(atom, anchor, open_vars)
                for u in open_vars:
                    new = cand[u] & allowed[u]
                    if new == cand[u]:
                        continue
                    trail.append((u, cand[u]))
                    cand[u] = new
                    if not new:
                        return False
                    touch(u)
        touch(var)
        return run_arcs(queue, queued, trail, wide=False)

    def search() -> bool:
        if not unassigned:
            return True
        var = min(unassigned, key=lambda v: (cand[v].bit_count(), v))
        unassigned.discard(var)
        entry_dom = cand[var]
        dom = entry_dom
        while dom:
            low = dom & -dom
            dom ^= low
            value = low.bit_length() - 1
            assignment[var] = value
            cand[var] = low
            trail: list = []
            if propagate(var, value, trail) and search():
                return True
            for u, old in reversed(trail):
                cand[u] = old
            cand[var] = entry_dom
            del assignment[var]
        unassigned.add(var)
        return False

    # initial fixpoint narrows every window before the search starts
    init_trail: list = []
    init_queue = deque(range(len(arcs)))
    if not run_arcs(init_queue, set(init_queue), init_trail, wide=True):
        return SolveResult(False)

    if search():
        witness = {v: assignment[mapping[v]] for v in inst.variables}
        return SolveResult(True, witness, None)
    return SolveResult(False)


def check_witness(
    inst: Instance, target: Structure, assignment: Mapping[str, int]
) -> bool:
    """Verify a claimed satisfying assignment directly against the atoms."""
    for v in inst.variables:
        if v not in assignment:
            return False
    for atom in inst.atoms:
        if isinstance(atom, Bot):
            return False
        if isinstance(atom, Rel):
            t = tuple(assignment[x] for x in atom.args)
            if t not in target.relations[atom.symbol]:
                return False
        elif isinstance(atom, Eq):
            if assignment[atom.left] != assignment[atom.right]:
                return False
        elif isinstance(atom, Neq):
            if assignment[atom.left] == assignment[atom.right]:
                return False
    return True


def arc_consistency(inst: Instance, target: Structure) -> Optional[ACState]:
    """Generalized arc-consistency fixpoint, or None when inconsistent.

    Repeatedly deletes a value from a variable's candidate set when some
    atom containing the variable has no supporting tuple consistent with
    the current sets. FIFO worklist of (atom, variable) pairs; the fixpoint
    is unique, so the result does not depend on processing order. Never
    reports inconsistency on a satisfiable pair. Equalities must be
    contracted away beforehand; disequalities are not supported here.
    """
    validate(inst)
    for atom in inst.atoms:
        if isinstance(atom, Eq):
            raise SolverError("arc consistency requires equality-contracted input")
        if isinstance(atom, Neq):
            raise SolverError("arc consistency does not support disequalities")
    if inst.has_bot():
        return None
    variables = inst.variables
    domains: dict[str, set[int]] = {
        v: set(range(target.domain_size)) for v in variables
    }
    if any(not d for d in domains.values()):
        return None
    atoms = [a for a in inst.atoms if isinstance(a, Rel)]

    queue: deque[tuple[int, str]] = deque(
        (i, v) for i, a in enumerate(atoms) for v in dict.fromkeys(a.args)
    )
    queued = set(queue)
    while queue:
        i, v = queue.popleft()
        queued.discard((i, v))
        atom = atoms[i]
        args = atom.args
        v_positions = [p for p, x in enumerate(args) if x == v]
        bucket_index = target.tuples_by_value(atom.symbol, v_positions[0])
        dom_v = domains[v]
        allowed: set[int] = set()
        for val in dom_v:
            for t in bucket_index.get(val, ()):
                ok = True
                for p, x in enumerate(args):
                    if x == v:
                        if t[p] != val:
                            ok = False
                            break
                    elif t[p] not in domains[x]:
                        ok = False
                        break
                if ok:
                    allowed.add(val)
                    break
        if len(allowed) < len(dom_v):
            domains[v] = allowed
            if not allowed:
                return None
            for j, b in enumerate(atoms):
                if v in b.args:
                    for u in dict.fromkeys(b.args):
                        if u != v and (j, u) not in queued:
                            queue.append((j, u))
                            queued.add((j, u))
    return ACState({v: frozenset(d) for v, d in domains.items()})


def establish_23_consistency(inst: Instance, target: Structure) -> bool:
    """(2,3)-consistency closure; True means no pair set emptied.

    Maintains, for every pair of variables, a set of value pairs; a pair is
    pruned when some third variable admits no value compatible with both
    sides and with every atom living inside the triple, or when an atom
    spanning more than three variables has no supporting tuple extending
    the pair. On targets with a ternary near-unanimity polymorphism a
    consistent outcome implies satisfiability; elsewhere it is a sound
    filter only.
    """
    validate(inst)
    for atom in inst.atoms:
        if isinstance(atom, Eq):
            raise SolverError("(2,3)-consistency requires equality-contracted input")
        if isinstance(atom, Neq):
            raise SolverError("(2,3)-consistency does not support disequalities")
    if inst.has_bot():
        return False
    variables = inst.variables
    atoms = [a for a in inst.atoms if isinstance(a, Rel)]
    domain = range(target.domain_size)
    relations = target.relations

    def scope(atom: Rel) -> tuple[str, ...]:
        return tuple(dict.fromkeys(atom.args))

    def atom_holds(atom: Rel, values: Mapping[str, int]) -> bool:
        return tuple(values[x] for x in atom.args) in relations[atom.symbol]

    if not variables:
        return True
    singles: dict[str, set[int]] = {}
    for v in variables:
        unary = [a for a in atoms if scope(a) == (v,)]
        singles[v] = {
            val for val in domain if all(atom_holds(a, {v: val}) for a in unary)
        }
        if not singles[v]:
            return False
    if len(variables) == 1:
        return True

    order = {v: i for i, v in enumerate(variables)}
    pair_keys = [
        (x, y)
        for i, x in enumerate(variables)
        for y in variables[i + 1 :]
    ]
    allowed: dict[tuple[str, str], set[tuple[int, int]]] = {}
    rows: dict[tuple[str, str], dict[int, set[int]]] = {}
    cols: dict[tuple[str, str], dict[int, set[int]]] = {}

    def insert(key, a, b):
        allowed[key].add((a, b))
        rows[key].setdefault(a, set()).add(b)
        cols[key].setdefault(b, set()).add(a)

    def remove(key, a, b):
        allowed[key].discard((a, b))
        rows[key][a].discard(b)
        cols[key][b].discard(a)

    for x, y in pair_keys:
        key = (x, y)
        allowed[key] = set()
        rows[key] = {}
        cols[key] = {}
        local = [a for a in atoms if set(scope(a)) <= {x, y} and len(scope(a)) == 2]
        for a_val in singles[x]:
            for b_val in singles[y]:
                if all(atom_holds(a, {x: a_val, y: b_val}) for a in local):
                    insert(key, a_val, b_val)
        if not allowed[key]:
            return False

    def compat(u: str, u_val: int, z: str) -> set[int]:
        if order[u] < order[z]:
            return rows[(u, z)].get(u_val, set())
        return cols[(z, u)].get(u_val, set())

    triple_atoms: dict[tuple[str, str, str], list[Rel]] = {}
    wide_atoms: list[Rel] = []
    for a in atoms:
        s = sorted(scope(a), key=order.get)
        if len(s) == 3:
            triple_atoms.setdefault(tuple(s), []).append(a)
        elif len(s) > 3:
            wide_atoms.append(a)

    queue: deque[tuple[str, str]] = deque(pair_keys)
    queued = set(queue)
    while queue:
        x, y = queue.popleft()
        queued.discard((x, y))
        key = (x, y)
        changed = False
        for a_val, b_val in sorted(allowed[key]):
            dead = False
            for z in variables:
                if z == x or z == y:
                    continue
                wa = compat(x, a_val, z)
                wb = compat(y, b_val, z)
                triple = tuple(sorted((x, y, z), key=order.get))
                extra = triple_atoms.get(triple)
                if not extra:
                    if wa.isdisjoint(wb):
                        dead = True
                        break
                else:
                    found = False
                    for w in wa & wb:
                        values = {x: a_val, y: b_val, z: w}
                        if all(atom_holds(a, values) for a in extra):
                            found = True
                            break
                    if not found:
                        dead = True
                        break
            if not dead:
                for a in wide_atoms:
                    s = scope(a)
                    if x not in s and y not in s:
                        continue
                    found = False
                    for t in relations[a.symbol]:
                        values = {}
                        ok = True
                        for p, var in enumerate(a.args):
                            if var in values and values[var] != t[p]:
                                ok = False
                                break
                            values[var] = t[p]
                        if not ok:
                            continue
                        if x in values and values[x] != a_val:
                            continue
                        if y in values and values[y] != b_val:
                            continue
                        good = all(
                            values[z]
                            in (compat(x, a_val, z) & compat(y, b_val, z))
                            for z in values
                            if z not in (x, y)
                        )
                        if good:
                            found = True
                            break
                    if not found:
                        dead = True
                        break
            if dead:
                remove(key, a_val, b_val)
                changed = True
                if not allowed[key]:
                    return False
        if changed:
            for other in pair_keys:
                if other != key and (x in other or y in other) and other not in queued:
                    queue.append(other)
                    queued.add(other)
    return True


def _prepare(family: SampleFamily, inst: Instance) -> tuple[Instance, dict, bool]:
    validate(inst)
    if inst.signature != family.signature:
        raise SolverError("instance signature differs from the family's signature")
    contracted, mapping = contract_equalities(inst)
    has_neq = any(isinstance(a, Neq) for a in contracted.atoms)
    return contracted, mapping, has_neq


def solve_via_sampling(family: SampleFamily, inst: Instance) -> SolveResult:
    """Decide an instance by exact search over the samples at its index.

    The index is the number of distinct variables after contracting
    equalities. Satisfiable iff some sample admits a homomorphism; correct
    and complete whenever the family really is a sampling for its theory.
    Disequalities are permitted only for equality-matching families.
    """
    contracted, mapping, has_neq = _prepare(family, inst)
    if contracted.has_bot():
        return SolveResult(False)
    if has_neq and not family.equality_matching:
        raise SolverError(
            "disequalities require an equality-matching sample family"
        )
    n = len(contracted.variables)
    for index, sample in enumerate(family.generate(n)):
        res = hom_search(contracted, sample)
        if res.satisfiable:
            witness = {v: res.assignment[mapping[v]] for v in inst.variables}
            return SolveResult(True, witness, index)
    return SolveResult(False)


def solve_ac_over_sampling(family: SampleFamily, inst: Instance) -> SolveResult:
    """Arc-consistency over every sample; satisfiable iff some sample passes.

    Sound as a decision procedure only under the caller-asserted hypothesis
    that every sample maps homomorphically into a model whose image has
    totally symmetric polymorphisms of all arities; the verdict carries no
    witness. Disequalities are not supported.
    """
    contracted, _, has_neq = _prepare(family, inst)
    if contracted.has_bot():
        return SolveResult(False)
    if has_neq:
        raise SolverError("arc-consistency solving does not support disequalities")
    n = len(contracted.variables)
    for index, sample in enumerate(family.generate(n)):
        if arc_consistency(contracted, sample) is not None:
            return SolveResult(True, None, index)
    return SolveResult(False)


def solve_nu_over_sampling(family: SampleFamily, inst: Instance) -> SolveResult:
    """(2,3)-consistency over every sample; satisfiable iff some sample passes.

    Sound as a decision procedure only when the samples carry a ternary
    near-unanimity polymorphism; the verdict carries no witness.
    """
    contracted, _, has_neq = _prepare(family, inst)
    if contracted.has_bot():
        return SolveResult(False)
    if has_neq:
        raise SolverError("(2,3)-consistency solving does not support disequalities")
    n = len(contracted.variables)
    for index, sample in enumerate(family.generate(n)):
        if establish_23_consistency(contracted, sample):
            return SolveResult(True, None, index)
    return SolveResult(False)
