"""Acceptance suite: one test per shipped guarantee, one verdict line each.

Everything here is checked against enumeration oracles (truth tables,
exhaustive simulation, explicit-state reachability), never against the
engines under test.  The random corpora are seeded and shared through
module-scoped fixtures, so the expensive projections are computed once.
"""

from __future__ import annotations

import random
from types import SimpleNamespace

import pytest

from falseprops.cli import main
from falseprops.cnf import ROLE_INPUT, encode_circuit
from falseprops.mutate import apply_mutation, stuck_at
from falseprops.netlist import parse_netlist, simulate
from falseprops.pqe import (implies, pqe_cegar, problem_from_split,
                            qe_enumerate, solver_for, verify_solution)
from falseprops.randcirc import random_circuit, random_mutation, random_sequential
from falseprops.seq import (false_safety_prop, find_counterexample,
                            reach_oracle, seq_problem, unroll)
from falseprops.verify import (STATUS_FALSE, Specification, atpg_stuck_at,
                               classify_property, compset, joint_test)

from util import detect_set, eval_full, input_combos, twogate

CORPUS_SIZE = 200


def report(num: int, name: str, ok: bool, detail: str = "") -> None:
    tail = f" ({detail})" if detail else ""
    line = f"[criterion {num}] {name}: {'PASS' if ok else 'FAIL'}{tail}"
    print(line)
    assert ok, line


# ---------------------------------------------------------------------------
# shared corpora

@pytest.fixture(scope="module")
def corpus():
    """Random circuits with one random mutation each, solved and projected.

    Per instance: the CEGAR solution, its classification, the row check of
    the defining equivalence, and the enumerated input/output relations of
    the original and mutated formulas.
    """
    rng = random.Random(1605)
    out = []
    for _ in range(CORPUS_SIZE):
        c = random_circuit(rng, n_inputs=rng.randint(1, 8),
                           n_gates=rng.randint(1, 15),
                           n_outputs=rng.randint(1, 2))
        f = encode_circuit(c)
        m = random_mutation(rng, f)
        split = apply_mutation(f, m)
        problem = problem_from_split(split, original=f)
        sol = pqe_cegar(problem)
        ys = tuple(sorted(problem.quantified))
        out.append(SimpleNamespace(
            circuit=c, f=f, m=m, problem=problem, sol=sol,
            sound=verify_solution(problem, sol.clauses),
            prop=classify_property(f, sol.clauses, provenance=m),
            tbl=qe_enumerate(f, ys),
            tbl_star=qe_enumerate(split.formula, ys)))
    return out


@pytest.fixture(scope="module")
def compset_runs():
    """Bug-free complete-set runs: no required properties, no golden model."""
    rng = random.Random(2207)
    circuits = [twogate()]
    circuits += [random_circuit(rng, n_inputs=rng.randint(2, 6),
                                n_gates=rng.randint(2, 12),
                                n_outputs=rng.randint(1, 2))
                 for _ in range(20)]
    return [(c, encode_circuit(c), compset(Specification(), c, policy="stuck-at"))
            for c in circuits]


# ---------------------------------------------------------------------------
# 1. every CEGAR solution satisfies the defining equivalence, row by row

def test_criterion_1_pqe_soundness(corpus):
    bad = [i for i, inst in enumerate(corpus) if not inst.sound]
    report(1, "PQE solutions satisfy the defining equivalence", not bad,
           f"{len(corpus)} instances" if not bad else f"instances {bad[:5]}")


# ---------------------------------------------------------------------------
# 2. the classify verdict equals the enumerated relation comparison

def test_criterion_2_false_property_verdict(corpus):
    bad = []
    for i, inst in enumerate(corpus):
        lost_row = bool(inst.tbl.rows - inst.tbl_star.rows)
        if (inst.prop.status == STATUS_FALSE) != lost_row:
            bad.append(i)
    report(2, "verdict matches enumerated TBL vs TBL* in both directions",
           not bad, f"{len(corpus)} instances" if not bad else f"instances {bad[:5]}")


# ---------------------------------------------------------------------------
# 3. for functional mutations the verdict is exactly table inequality

def test_criterion_3_functional_mutations(corpus):
    functional = [inst for inst in corpus
                  if inst.m.kind in ("gate-subst", "stuck-at-0", "stuck-at-1")]
    kinds = {inst.m.kind for inst in functional}
    bad = [inst for inst in functional
           if (inst.prop.status == STATUS_FALSE) != (inst.tbl.rows != inst.tbl_star.rows)]
    ok = not bad and "gate-subst" in kinds and len(kinds) >= 2
    report(3, "verdict equals table inequality for functional mutations", ok,
           f"{len(functional)} instances, kinds {sorted(kinds)}")


# ---------------------------------------------------------------------------
# 4. emitted solutions carry no noise and stay sound after filtering

def test_criterion_4_noise_removal(corpus):
    bad = []
    for i, inst in enumerate(corpus):
        fprime = inst.problem.fprime_formula
        s = solver_for(fprime)
        if any(implies(fprime, c, solver=s) for c in inst.sol.clauses):
            bad.append(i)
        elif not inst.sound:
            bad.append(i)
    report(4, "no emitted clause is implied by the untouched remainder",
           not bad, f"{len(corpus)} instances" if not bad else f"instances {bad[:5]}")


# ---------------------------------------------------------------------------
# 5. stuck-at test generation agrees with the exhaustive fault simulator

def test_criterion_5_atpg_equivalence():
    rng = random.Random(505)
    faults = tested = 0
    bad = []
    for k in range(50):
        c = random_circuit(rng, n_inputs=rng.randint(3, 8), n_gates=12,
                           n_outputs=rng.randint(1, 2))
        for g in c.gates:
            for value in (0, 1):
                faults += 1
                tv = atpg_stuck_at(c, g.output, value)
                detectable = detect_set(c, g.output, value)
                if (tv is not None) != bool(detectable):
                    bad.append((k, g.output, value))
                    continue
                if tv is not None:
                    tested += 1
                    bits = tuple(tv.inputs[v] for v in c.inputs)
                    if bits not in detectable:
                        bad.append((k, g.output, value))
    report(5, "stuck-at tests exist iff the fault is detectable", not bad,
           f"{faults} faults, {tested} tests" if not bad else f"faults {bad[:5]}")


# ---------------------------------------------------------------------------
# 6. the complete-set run covers every gate; a golden mismatch is a bug

def test_criterion_6_structural_completeness(compset_runs, tmp_path):
    bad = []
    for c, _, rep in compset_runs:
        gate_set = tuple(sorted(g.output for g in c.gates))
        one_each = (tuple(sorted(rep.gates_processed)) == gate_set
                    and len(rep.gate_status) == len(gate_set))
        if rep.bugs or rep.skipped or not one_each:
            bad.append(c.name)
    impl = "input a; input b; q = XOR(a, b); output q;"
    golden = "input a; input b; q = XNOR(a, b); output q;"
    rep = compset(Specification(golden=parse_netlist(golden)),
                  parse_netlist(impl))
    seeded_ok = rep.bug_test is not None and rep.bugs[0].kind == "golden"
    ipath, gpath = tmp_path / "impl.ckt", tmp_path / "gold.ckt"
    ipath.write_text(impl)
    gpath.write_text(golden)
    code = main(["compset", str(ipath), "--golden", str(gpath),
                 "--out", str(tmp_path / "rep.json")])
    report(6, "full gate coverage; golden discrepancy returns a test, exit 1",
           not bad and seeded_ok and code == 1,
           f"{len(compset_runs)} bug-free runs" if not bad else f"circuits {bad[:5]}")


# ---------------------------------------------------------------------------
# 7. no reported property constrains the inputs alone

def test_criterion_7_input_only_filter(corpus, compset_runs):
    bad = 0
    checked = 0
    for inst in corpus:
        xs = set(inst.f.varmap.with_role(ROLE_INPUT))
        checked += 1
        if any(c.vars <= xs for c in inst.prop.clauses):
            bad += 1
    for _, f, rep in compset_runs:
        xs = set(f.varmap.with_role(ROLE_INPUT))
        for p in rep.false_props:
            checked += 1
            if any(c.vars <= xs for c in p.clauses):
                bad += 1
    report(7, "emitted properties never contain input-only clauses",
           bad == 0, f"{checked} properties")


# ---------------------------------------------------------------------------
# 8. sequential unrollings agree with explicit-state reachability

TOGGLE = "circuit toggle; input en; latch s ns init 0; ns = XOR(en, s); output ns;"
MOD3 = """circuit mod3;
latch s0 n0 init 0; latch s1 n1 init 0;
n0 = NOR(s0, s1); n1 = BUF(s0);
output n0;"""


def _final_rows(u):
    tbl = qe_enumerate(u.formula, u.quantified)
    pos = {v: i for i, v in enumerate(tbl.variables)}
    return {tuple(row[pos[v]] for v in u.final_states) for row in tbl.rows}


def _state_breaks(prop, state) -> bool:
    return any(not c.satisfied_by(state) for c in prop.clauses)


def test_criterion_8_sequential_soundness():
    rng = random.Random(808)
    circuits = [parse_netlist(TOGGLE), parse_netlist(MOD3)]
    circuits += [random_sequential(rng, n_inputs=rng.randint(1, 2),
                                   n_gates=rng.randint(2, 6),
                                   n_latches=rng.randint(1, 4))
                 for _ in range(10)]
    bad = []
    traces = 0
    for ci, c in enumerate(circuits):
        r = reach_oracle(c, min_frames=4)
        for n in (1, 2, 3, 4):
            u = unroll(c, n)
            if _final_rows(u) != set(r.frames[n]):
                bad.append(("proj", ci, n))
                continue
            for g in c.gates[:3]:
                m = stuck_at(u.template, g.output, rng.choice((0, 1)))
                if m.identity:
                    continue
                prop, sol = false_safety_prop(u, m)
                if not verify_solution(seq_problem(u, m), sol.clauses):
                    bad.append(("equiv", ci, n, g.output))
                    continue
                cex = find_counterexample(u, prop)
                if cex is None:
                    continue
                traces += 1
                state = dict(cex.states[0])
                for x in cex.inputs:
                    _, state = simulate(c, x, state)
                if not _state_breaks(prop, state):
                    bad.append(("replay", ci, n, g.output))
    report(8, "unrolled projections, traces and properties match reachability",
           not bad, f"{len(circuits)} circuits, {traces} traces replayed"
           if not bad else f"failures {bad[:5]}")


# ---------------------------------------------------------------------------
# 9. a joint test exists exactly when the breaking sets intersect

def _breaking_inputs(c, prop):
    out = set()
    for x in input_combos(c):
        val = eval_full(c, x)
        env = {v: val[v] for v in list(c.inputs) + list(c.outputs)}
        if any(not cl.satisfied_by(env) for cl in prop.clauses):
            out.add(tuple(x[v] for v in c.inputs))
    return out


def _stuck_property(c, f, gate_id, value):
    m = stuck_at(f, gate_id, value)
    if m.identity:
        return None
    sol = pqe_cegar(problem_from_split(apply_mutation(f, m), original=f))
    return classify_property(f, sol.clauses, provenance=m)


def test_criterion_9_joint_tests():
    rng = random.Random(909)
    done = 0
    with_joint = 0
    bad = []
    while done < 20:
        c = random_circuit(rng, n_inputs=rng.randint(4, 8),
                           n_gates=rng.randint(6, 12),
                           n_outputs=rng.randint(1, 2))
        picks = [(g.output, v) for g in c.gates for v in (0, 1)
                 if detect_set(c, g.output, v)]
        if len(picks) < 2:
            continue
        (g1, v1), (g2, v2) = rng.sample(picks, 2)
        p1 = _stuck_property(c, encode_circuit(c), g1, v1)
        p2 = _stuck_property(c, encode_circuit(c), g2, v2)
        if p1 is None or p2 is None:
            continue
        assert p1.status == STATUS_FALSE and p2.status == STATUS_FALSE
        done += 1
        both = _breaking_inputs(c, p1) & _breaking_inputs(c, p2)
        tv = joint_test(encode_circuit(c), p1, p2)
        if (tv is not None) != bool(both):
            bad.append(done)
        elif tv is not None:
            with_joint += 1
            if tuple(tv.inputs[v] for v in c.inputs) not in both:
                bad.append(done)
    report(9, "joint test presence matches breaking-set intersection",
           not bad, f"20 pairs, {with_joint} joint tests"
           if not bad else f"pairs {bad}")


# ---------------------------------------------------------------------------
# 10. reports are byte-identical across repeated runs

def test_criterion_10_determinism(tmp_path):
    outs = []
    for k in (0, 1):
        p = tmp_path / f"self{k}.json"
        assert main(["selftest", "--seed", "7", "--instances", "3",
                     "--out", str(p)]) == 0
        outs.append(p.read_bytes())
    ckt = tmp_path / "twogate.ckt"
    ckt.write_text("input x1 x2 x3; y = AND(x1, x2); z = OR(y, x3); output z;")
    reps = []
    for k in (0, 1):
        p = tmp_path / f"comp{k}.json"
        assert main(["compset", str(ckt), "--policy", "clause-flip",
                     "--out", str(p)]) == 0
        reps.append(p.read_bytes())
    ok = outs[0] == outs[1] and len(outs[0]) > 2 and \
        reps[0] == reps[1] and len(reps[0]) > 2
    report(10, "selftest and compset reports are byte-identical", ok,
           f"{len(outs[0])} and {len(reps[0])} bytes")
