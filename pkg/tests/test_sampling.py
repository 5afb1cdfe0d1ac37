
import pytest

import cspsampling as cs
from cspsampling.formulas import Eq, Instance, Neq, Rel
from cspsampling.model import Signature, Structure
from cspsampling.sampling import explicit_sampling, verify_equality_matching


def test_product_size_law_small():
    prod = cs.product_sampling(
        cs.dense_order_sampling(), cs.colored_partition_sampling(2)
    )
    for n in range(1, 9):
        assert cs.family_size(prod, n) == n * 2 * n


def test_product_size_law_other_factor_pairs():
    import conftest as helpers

    pairs = [
        (cs.dense_order_sampling(), cs.colored_partition_sampling(3)),
        (helpers.order_family(), helpers.colors_family()),
        (
            cs.colored_partition_sampling(
                2, [("a", 1, "part(1)(x1)"), ("b", 1, "part(2)(x1)")]
            ),
            cs.colored_partition_sampling(
                3, [("c", 1, "part(1)(x1)"), ("d", 1, "part(2)(x1)")]
            ),
        ),
    ]
    for left, right in pairs:
        prod = cs.product_sampling(left, right)
        for n in range(1, 9):
            assert cs.family_size(prod, n) == cs.family_size(
                left, n
            ) * cs.family_size(right, n)


def test_product_pair_identification_condition():
    prod = cs.product_sampling(
        cs.dense_order_sampling(), cs.colored_partition_sampling(2)
    )
    (m,) = prod.generate(2)
    b2 = 4  # second factor has 2*n elements at n=2
    lt = m.relations["<"]
    # first coordinates differ, second coordinates equal: excluded
    assert (0 * b2 + 1, 1 * b2 + 1) not in lt
    # first coordinates differ and second differ: included when ordered
    assert (0 * b2 + 1, 1 * b2 + 2) in lt
    # unary relation of the second factor ignores the first coordinate
    p1 = m.relations["P1"]
    for a in range(2):
        for b in range(b2):
            assert ((a * b2 + b,) in p1) == (b % 2 == 0)


def test_product_requires_flags_and_disjoint_signatures():
    dense = cs.dense_order_sampling()
    with pytest.raises(cs.SamplingError):
        cs.product_sampling(dense, cs.successor_sampling())  # pp-algebraicity
    not_matching = explicit_sampling(
        Signature([("U", 1)]), [Structure(Signature([("U", 1)]), 1, {})],
        equality_matching=False, no_pp_algebraicity=True,
    )
    with pytest.raises(cs.SamplingError):
        cs.product_sampling(dense, not_matching)
    with pytest.raises(cs.SignatureError):
        cs.product_sampling(dense, cs.dense_order_sampling())


def test_product_samples_project_homomorphically(robot_theory):
    # dropping the second coordinate is a homomorphism on the first factor's
    # relations: tuples satisfying the pattern condition project into it
    import conftest as helpers

    for n in (1, 2, 3):
        (m,) = robot_theory.generate(n)
        (b1,) = helpers.order_family().generate(n)
        b2_size = 2 * n
        for sym in ("lt", "min3"):
            for t in m.relations[sym]:
                assert tuple(e // b2_size for e in t) in b1.relations[sym]
        (b2,) = helpers.colors_family().generate(n)
        for sym in ("p0", "p1"):
            for t in m.relations[sym]:
                assert tuple(e % b2_size for e in t) in b2.relations[sym]


def test_equality_expansion_adds_defined_relations():
    dense = cs.dense_order_sampling()
    fam = cs.equality_expansion(dense, [("neq", 2, "!(x1 = x2)")])
    (s,) = fam.generate(3)
    assert s.relations["neq"] == {
        (a, b) for a in range(3) for b in range(3) if a != b
    }
    full = cs.equality_expansion(dense, [("pairs", 2, "x1 = x1")])
    assert len(full.generate(2)[0].relations["pairs"]) == 4
    distinct3 = cs.equality_expansion(
        dense, [("d3", 3, "!(x1 = x2) & !(x1 = x3) & !(x2 = x3)")]
    )
    assert distinct3.generate(2)[0].relations["d3"] == frozenset()


def test_equality_expansion_rejects_relation_symbols():
    with pytest.raises(cs.SamplingError):
        cs.equality_expansion(cs.dense_order_sampling(), [("bad", 2, "x1 < x2")])
    plain = explicit_sampling(
        Signature([("U", 1)]), [Structure(Signature([("U", 1)]), 1, {})]
    )
    with pytest.raises(cs.SamplingError):
        cs.equality_expansion(plain, [("ok", 2, "x1 = x2")])


def test_equality_expansion_decider_handles_defined_atoms():
    fam = cs.equality_expansion(cs.dense_order_sampling(), [("neq", 2, "!(x1 = x2)")])
    sig = fam.signature
    sat = Instance.of(sig, [Rel("<", ("x", "y")), Rel("neq", ("x", "y"))])
    unsat = Instance.of(sig, [Rel("neq", ("x", "y")), Eq("x", "y")])
    assert fam.decider(sat)
    assert not fam.decider(unsat)
    assert cs.solve_via_sampling(fam, sat).satisfiable
    assert not cs.solve_via_sampling(fam, unsat).satisfiable


def test_explicit_sampling_variants():
    sig = Signature([("U", 1)])
    point = Structure(sig, 1, {"U": {(0,)}})
    constant = explicit_sampling(sig, [point])
    assert constant.generate(5) == (point,)
    table = explicit_sampling(sig, {1: [point], 2: []})
    assert table.generate(2) == ()
    with pytest.raises(cs.SamplingError):
        table.generate(3)
    wrong = explicit_sampling(sig, [Structure(Signature([("V", 1)]), 1, {})])
    with pytest.raises(cs.SamplingError):
        wrong.generate(1)


def test_empty_family_rejects_everything():
    sig = Signature([("U", 1)])
    empty = explicit_sampling(sig, lambda n: [])
    inst = Instance.of(sig, [Rel("U", ("x",))])
    assert not cs.solve_via_sampling(empty, inst).satisfiable
    assert not cs.solve_via_sampling(empty, Instance.of(sig, [])).satisfiable


def test_sampling_from_decider_unary_always_satisfiable():
    sig = Signature([("U", 1)])
    fam = cs.sampling_from_decider(sig, lambda inst: True, max_n=2)
    structures = fam.generate(1)
    assert len(structures) == 2
    sizes = sorted(len(s.relations["U"]) for s in structures)
    assert sizes == [0, 1]


def test_sampling_from_decider_nothing_satisfiable():
    sig = Signature([("U", 1)])
    fam = cs.sampling_from_decider(sig, lambda inst: False, max_n=2)
    assert fam.generate(2) == ()


def test_sampling_from_decider_cost_guard():
    sig = Signature([("U", 1)])
    fam = cs.sampling_from_decider(sig, lambda inst: True, max_n=1)
    with pytest.raises(cs.SamplingError):
        fam.generate(2)


def test_verify_equality_matching_success_and_counterexample():
    dense = cs.dense_order_sampling()
    report = verify_equality_matching(dense, 3, 3, 2)
    assert report.ok and report.checked > 1000

    truncated = explicit_sampling(
        dense.signature,
        lambda n: dense.generate(1),
        equality_matching=True,
        decider=dense.decider,
        name="truncated",
    )
    broken = verify_equality_matching(truncated, 3, 2, 2)
    assert not broken.ok
    cex = broken.counterexample
    assert cex.n == 2
    assert cex.decider_verdict and not cex.sampling_verdict


def test_verify_equality_matching_vacuous_and_missing_decider():
    dense = cs.dense_order_sampling()
    assert verify_equality_matching(dense, 1, 0, 2).ok
    nodecider = explicit_sampling(dense.signature, lambda n: dense.generate(n))
    with pytest.raises(cs.SamplingError):
        verify_equality_matching(nodecider, 1, 1, 1)


def test_product_decider_splits_by_identification_pattern(robot_theory):
    sig = robot_theory.signature
    # two parts forced onto one robot but apart in time: satisfiable
    inst = Instance.of(
        sig,
        [Rel("p0", ("x",)), Rel("p0", ("y",)), Rel("lt", ("x", "y"))],
    )
    assert robot_theory.decider(inst)
    # same part on both robots: unsatisfiable
    clash = Instance.of(sig, [Rel("p0", ("x",)), Rel("p1", ("x",))])
    assert not robot_theory.decider(clash)
    # minimum of two distinct parts must be one of them
    nonconvex = Instance.of(
        sig,
        [Rel("min3", ("x", "y", "z")), Neq("x", "y"), Neq("x", "z")],
    )
    assert not robot_theory.decider(nonconvex)
