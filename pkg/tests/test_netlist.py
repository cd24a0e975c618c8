import random

import pytest

from falseprops.netlist import (Circuit, Gate, Latch, NetlistError, ParseError,
                                emit_netlist, eval_gate, parse_netlist, simulate)
from falseprops.randcirc import random_circuit, random_sequential

from util import and1, input_combos, structurally_isomorphic, twogate


def test_parse_smallest_circuit():
    c = parse_netlist("input x1 x2; y1 = AND(x1,x2); output y1;")
    assert len(c.inputs) == 2
    assert len(c.gates) == 1
    assert c.outputs == (c.gates[0].output,)
    assert c.names == ("x1", "x2", "y1")


def test_ids_dense_in_declaration_order():
    c = twogate()
    assert c.inputs == (0, 1, 2)
    assert [g.output for g in c.gates] == [3, 4]
    assert c.num_vars == 5


def test_parse_comments_and_newlines():
    c = parse_netlist("# a comment\ninput a b;  # trailing\n\nc = XOR(a, b);\noutput c;")
    assert c.gates[0].kind == "XOR"


def test_simulate_and_gate():
    c = and1()
    assert simulate(c, {0: 1, 1: 1})[0] == {2: 1}
    assert simulate(c, {0: 0, 1: 1})[0] == {2: 0}


def test_simulate_twogate():
    c = twogate()
    z = c.id_of["z"]
    for x in input_combos(c):
        want = (x[0] and x[1]) or x[2]
        assert simulate(c, x)[0][z] == int(want)


def test_gate_semantics_all_kinds():
    cases = {
        "AND": lambda a, b: a & b, "OR": lambda a, b: a | b,
        "NAND": lambda a, b: 1 - (a & b), "NOR": lambda a, b: 1 - (a | b),
        "XOR": lambda a, b: a ^ b, "XNOR": lambda a, b: 1 - (a ^ b),
    }
    for kind, fn in cases.items():
        for a in (0, 1):
            for b in (0, 1):
                assert eval_gate(kind, (a, b)) == fn(a, b), kind
    assert eval_gate("NOT", (0,)) == 1
    assert eval_gate("BUF", (1,)) == 1
    assert eval_gate("CONST0", ()) == 0
    assert eval_gate("CONST1", ()) == 1
    # parity semantics beyond two fanins
    assert eval_gate("XOR", (1, 1, 1)) == 1
    assert eval_gate("XNOR", (1, 1, 0)) == 1


def test_and1_roundtrips_unchanged():
    c = and1()
    again = parse_netlist(emit_netlist(c))
    assert again == c


def test_emit_simple_single_gate_line():
    lines = [ln for ln in emit_netlist(and1()).splitlines() if "=" in ln]
    assert lines == ["v3 = AND(v1, v2);"]


def test_emit_twogate_topological_order():
    lines = [ln for ln in emit_netlist(twogate()).splitlines() if "=" in ln]
    assert len(lines) == 2
    assert lines[0].startswith("y =") and lines[1].startswith("z =")


def test_simple_roundtrip_isomorphic_random():
    rng = random.Random(11)
    for _ in range(25):
        c = random_circuit(rng, rng.randint(2, 6), rng.randint(1, 20),
                           n_outputs=rng.randint(1, 3))
        c2 = parse_netlist(emit_netlist(c))
        assert structurally_isomorphic(c, c2)
        assert sorted(c2.names) == sorted(c.names)  # ids renumber, names survive


def test_aiger_parse_and_gate():
    text = "aag 3 2 0 1 1\n2\n4\n6\n6 2 4\n"
    c = parse_netlist(text, "aiger")
    assert len(c.inputs) == 2 and len(c.gates) == 1
    assert simulate(c, {c.inputs[0]: 1, c.inputs[1]: 1})[0][c.outputs[0]] == 1
    assert simulate(c, {c.inputs[0]: 1, c.inputs[1]: 0})[0][c.outputs[0]] == 0


def test_aiger_negated_output_materializes_inverter():
    # single output = NOT(input)
    text = "aag 1 1 0 1 0\n2\n3\n"
    c = parse_netlist(text, "aiger")
    assert simulate(c, {c.inputs[0]: 0})[0][c.outputs[0]] == 1
    assert any(g.kind == "NOT" for g in c.gates)


def test_aiger_latch_inits():
    text = "aag 2 1 1 1 0\n2\n4 2 1\n4\n"
    c = parse_netlist(text, "aiger")
    assert c.latches[0].init == 1
    text = "aag 2 1 1 1 0\n2\n4 2 4\n4\n"
    assert parse_netlist(text, "aiger").latches[0].init is None
    text = "aag 2 1 1 1 0\n2\n4 2\n4\n"
    assert parse_netlist(text, "aiger").latches[0].init == 0


def test_aiger_roundtrip_simulation_equivalent():
    rng = random.Random(7)
    for _ in range(25):
        c = random_circuit(rng, rng.randint(2, 6), rng.randint(1, 12),
                           n_outputs=rng.randint(1, 3))
        c2 = parse_netlist(emit_netlist(c, "aiger"), "aiger")
        assert len(c2.inputs) == len(c.inputs)
        for x in input_combos(c):
            x2 = dict(zip(c2.inputs, (x[v] for v in c.inputs)))
            got = [simulate(c2, x2)[0][v] for v in c2.outputs]
            want = [simulate(c, x)[0][v] for v in c.outputs]
            assert got == want


def test_aiger_roundtrip_sequential():
    rng = random.Random(13)
    for _ in range(10):
        c = random_sequential(rng, 2, rng.randint(2, 8), rng.randint(1, 3))
        c2 = parse_netlist(emit_netlist(c, "aiger"), "aiger")
        assert [lt.init for lt in c2.latches] == [lt.init for lt in c.latches]
        state1 = {lt.present: lt.init or 0 for lt in c.latches}
        state2 = {lt.present: lt.init or 0 for lt in c2.latches}
        rs = random.Random(5)
        for _ in range(6):
            bits = [rs.randint(0, 1) for _ in c.inputs]
            z1, n1 = simulate(c, dict(zip(c.inputs, bits)), state1)
            z2, n2 = simulate(c2, dict(zip(c2.inputs, bits)), state2)
            assert [z1[v] for v in c.outputs] == [z2[v] for v in c2.outputs]
            state1, state2 = n1, n2


def test_latch_statement_parses():
    c = parse_netlist("input x; latch q d init 1; d = XOR(x, q); output q;")
    assert c.latches == (Latch(1, 2, 1),)
    z, nxt = simulate(c, {0: 1}, {1: 0})
    assert z == {1: 0} and nxt == {1: 1}


def test_latch_init_default_and_x():
    assert parse_netlist("input x; latch q d; d = BUF(x); output q;").latches[0].init == 0
    assert parse_netlist("input x; latch q d init x; d = BUF(x); output q;").latches[0].init is None


def test_syntax_error_reports_position():
    with pytest.raises(ParseError) as ei:
        parse_netlist("input a;\nb = AND(a a;\noutput b;")
    assert ei.value.line == 2


def test_undefined_reference_rejected():
    with pytest.raises(ParseError, match="undefined name"):
        parse_netlist("input a; b = AND(a, nosuch); output b;")


def test_multiple_drivers_rejected():
    with pytest.raises(ParseError, match="already defined"):
        parse_netlist("input a; a = NOT(a); output a;")


def test_cycle_rejected():
    with pytest.raises(NetlistError, match="cycle"):
        parse_netlist("input a; b = AND(a, c); c = BUF(b); output c;")


def test_bad_arity_rejected():
    with pytest.raises(NetlistError):
        parse_netlist("input a; b = NOT(a, a); output b;")
    with pytest.raises(NetlistError):
        Circuit("t", (0,), (1,), (), (Gate("AND", (0,), 1),), ("a", "b"))


def test_missing_semicolon_rejected():
    with pytest.raises(ParseError, match="';'"):
        parse_netlist("input a; b = BUF(a); output b")


def test_missing_input_value_rejected():
    with pytest.raises(NetlistError, match="missing value"):
        simulate(and1(), {0: 1})


def test_duplicate_fanin_allowed():
    c = parse_netlist("input a; b = XOR(a, a); output b;")
    assert simulate(c, {0: 1})[0][1] == 0
    assert simulate(c, {0: 0})[0][1] == 0


def test_output_may_be_an_input():
    c = parse_netlist("input a; b = NOT(a); output a b;")
    assert simulate(c, {0: 1})[0] == {0: 1, 1: 0}


def test_simulate_deterministic():
    c = twogate()
    runs = [simulate(c, {0: 1, 1: 0, 2: 1}) for _ in range(3)]
    assert all(r == runs[0] for r in runs)
