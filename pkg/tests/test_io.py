import pytest

import conftest as helpers
import cspsampling as cs
from cspsampling import io
from cspsampling.formulas import BOT, Eq, Instance, Neq, Rel
from cspsampling.model import Signature, Structure


def test_structure_round_trip_is_byte_stable():
    fam = helpers.order_family()
    (s,) = fam.generate(3)
    text = io.print_structure(s, name="chain3")
    name, parsed = io.parse_structure(text)
    assert name == "chain3" and parsed == s
    assert io.print_structure(parsed, name="chain3") == text


def test_structure_round_trip_without_labels():
    s = Structure(Signature([("E", 2)]), 2, {"E": {(0, 1)}})
    text = io.print_structure(s)
    _, parsed = io.parse_structure(text)
    assert parsed == s


def test_multiple_structures_in_one_file(robot_theory):
    blocks = "\n".join(
        io.print_structure(s, name=f"sample{i}")
        for i, s in enumerate(cs.marked_colors_sampling().generate(2))
    )
    parsed = io.parse_structures(blocks)
    assert [n for n, _ in parsed] == ["sample0", "sample1"]


def test_structure_parse_errors():
    with pytest.raises(io.ParseError):
        io.parse_structure("structure s over E/2\nrel E: (0,1)\n")  # no domain
    with pytest.raises(io.ParseError):
        io.parse_structure("structure s over E/x\ndomain 1\nrel E:\n")
    with pytest.raises(io.ParseError):
        io.parse_structure("structure s over E/2\ndomain 1\nrel F: (0,0)\n")
    with pytest.raises(io.ParseError):
        io.parse_structure("structure s over E/2\ndomain 1\nrel E: (0,5)\n")


def test_instance_parse_and_round_trip():
    sig = Signature([("lt", 2), ("p0", 1), ("min3", 3)])
    inst = io.parse_instance("lt(x,y); lt(y,z); p0(x)", sig)
    assert len(inst.atoms) == 3 and inst.variables == ("x", "y", "z")
    mixed = io.parse_instance("min3(a,b,c) & a != b", sig)
    assert mixed.atoms == (Rel("min3", ("a", "b", "c")), Neq("a", "b"))
    text = io.print_instance(mixed)
    assert io.parse_instance(text, sig) == mixed
    assert io.print_instance(io.parse_instance(text, sig)) == text


def test_instance_declared_variables_round_trip():
    sig = Signature([("lt", 2)])
    inst = Instance.of(sig, [Rel("lt", ("a", "b")), Eq("c", "c"), BOT],
                       declared=("d",))
    text = io.print_instance(inst)
    assert "vars d" in text.splitlines()[0]
    assert io.parse_instance(text, sig) == inst


def test_instance_parse_errors():
    sig = Signature([("lt", 2)])
    with pytest.raises(io.ParseError):
        io.parse_instance("lt(x)", sig)  # arity
    with pytest.raises(io.ParseError):
        io.parse_instance("gt(x,y)", sig)  # unknown symbol
    with pytest.raises(io.ParseError):
        io.parse_instance("lt(x,y) ;; what is this", sig)


def test_operation_table_round_trip():
    f = cs.majority_eq_operation(3)
    text = io.print_operation_table(f)
    assert io.parse_operation_table(text) == f
    with pytest.raises(io.ParseError):
        io.parse_operation_table("optable domain 2 arity 2\n0 1\n")


def test_theory_spec_robot_file():
    spec = io.parse_theory_spec(open("theories/robot_scheduling.theory").read())
    assert spec.default == "schedule"
    fam = spec.family()
    assert set(fam.signature.names()) == {"lt", "min3", "p0", "p1"}
    assert cs.family_size(fam, 4) == 32
    order = spec.family("order")
    assert order.generate(2)[0].relations["lt"] == {(0, 1)}


def test_theory_spec_union_disjointness_error():
    text = "theory A = dense_order { rel lt/2 = base; }\ntheory X = union(A, A)"
    with pytest.raises(io.ParseError):
        io.parse_theory_spec(text)


def test_theory_spec_builtins_and_expand():
    text = """
    theory S = successor
    theory A = alternating_cycles
    theory C = succ2col
    theory M = marked_colors
    theory O = dense_order { rel before/2 = base; }
    theory X = expand(O) { rel apart/2 = "!(x1 = x2)"; }
    theory F = from_decider(M, 1)
    """
    spec = io.parse_theory_spec(text)
    assert spec.family("S").signature.names() == ("succ",)
    assert spec.family("A").signature.names() == ("E1", "E2")
    assert spec.family("C").signature.names() == ("succ", "P0", "P1")
    x = spec.family("X")
    assert "apart" in x.signature
    assert len(x.generate(2)[0].relations["apart"]) == 2
    f = spec.family("F")
    assert len(f.generate(1)) == 6


def test_theory_spec_explicit_block():
    text = """
    theory E = explicit {
      sig edge/2;
      equality_matching;
      sample { domain 2; rel edge: (0,1) (1,0); }
      sample { domain 1; rel edge: (0,0); }
    }
    """
    fam = io.parse_theory_spec(text).family()
    samples = fam.generate(7)
    assert len(samples) == 2
    assert samples[0].relations["edge"] == {(0, 1), (1, 0)}
    assert fam.equality_matching


def test_theory_spec_errors_carry_positions():
    with pytest.raises(io.ParseError) as err:
        io.parse_theory_spec("theory A = dense_order { rel lt/2 = part(1); }")
    assert "line" in str(err.value)
    with pytest.raises(io.ParseError):
        io.parse_theory_spec("theory A = unknown_builder")
    with pytest.raises(io.ParseError):
        io.parse_theory_spec("theory T = union(A, B)")  # undefined operands
    with pytest.raises(io.ParseError):
        io.parse_theory_spec("theory S = successor\ntheory F = from_decider(Z, 1)")


def test_parse_print_parse_identity_on_samples(robot_theory):
    for s in robot_theory.generate(2):
        text = io.print_structure(s)
        _, parsed = io.parse_structure(text)
        assert parsed == s
