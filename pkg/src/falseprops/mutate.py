"""Clause-group mutations: gate substitution, stuck-at faults, literal flips.

A mutation names a clause group G inside an encoded circuit and supplies a
replacement group G*.  Replacement clauses never introduce variables beyond
those of the mutated gate, so the mutated formula keeps the variable map of
the original.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .cnf import Clause, CnfFormula, GroupSplit, Lit, clause, encode_gate, replace_group
from .netlist import Gate, GATE_KINDS, gate_arity_ok


class MutationError(Exception):
    pass


@dataclass(frozen=True)
class Mutation:
    kind: str                      # gate-subst | stuck-at-0 | stuck-at-1 | clause-flip
    target: Optional[int]          # gate id, None for a raw clause flip
    group: tuple[int, ...]         # clause indices of G in the source formula
    gstar: tuple[Clause, ...]
    identity: bool                 # G* equals G as a clause set
    new_kind: Optional[str] = None
    clause_index: Optional[int] = None
    literal_index: Optional[int] = None

    def describe(self) -> str:
        if self.kind == "gate-subst":
            return f"gate-subst gate={self.target} new={self.new_kind}"
        if self.kind.startswith("stuck-at"):
            return f"{self.kind} gate={self.target}"
        return f"clause-flip clause={self.clause_index} literal={self.literal_index}"

    def to_json(self, names: Optional[Sequence[str]] = None) -> dict:
        target = self.target
        if names is not None and target is not None:
            target = names[target]
        d = {"kind": self.kind, "target": target, "identity": self.identity}
        if self.new_kind is not None:
            d["new_kind"] = self.new_kind
        if self.clause_index is not None:
            d["clause_index"] = self.clause_index
            d["literal_index"] = self.literal_index
        return d


def _group_vars(f: CnfFormula, group: Sequence[int]) -> frozenset[int]:
    vs: set[int] = set()
    for i in group:
        vs |= f.clauses[i].vars
    return frozenset(vs)


def _check_gstar_vars(f: CnfFormula, group: Sequence[int],
                      gstar: Sequence[Clause]) -> None:
    allowed = _group_vars(f, group)
    for cl in gstar:
        if not cl.vars <= allowed:
            raise MutationError(
                f"replacement clause {cl!r} uses variables outside the group")


def _same_clause_set(a: Sequence[Clause], b: Sequence[Clause]) -> bool:
    return set(a) == set(b)


def gate_subst(f: CnfFormula, gate_id: int, new_kind: str) -> Mutation:
    """Replace a gate's group by the encoding of another kind, same pins."""
    if f.gate_table is None or gate_id not in f.gate_table:
        raise MutationError(f"formula has no gate with id {gate_id}")
    g = f.gate_table[gate_id]
    if new_kind not in GATE_KINDS:
        raise MutationError(f"unknown gate kind {new_kind!r}")
    if not gate_arity_ok(new_kind, len(g.fanins)):
        raise MutationError(
            f"{new_kind} cannot take {len(g.fanins)} fanins (gate id {gate_id})")
    group = f.group(gate_id)
    gstar = encode_gate(Gate(new_kind, g.fanins, g.output))
    _check_gstar_vars(f, group, gstar)
    ident = _same_clause_set([f.clauses[i] for i in group], gstar)
    return Mutation("gate-subst", gate_id, group, gstar, ident, new_kind=new_kind)


def stuck_at(f: CnfFormula, gate_id: int, value: int) -> Mutation:
    """Freeze a gate's output to `value` by forcing the output literal's
    polarity in every clause of its group.

    The resulting group is logically equivalent to (output = value): each
    clause of a gate encoding mentions the output, so all clauses gain the
    satisfied polarity for the stuck assignment, while assignments with the
    opposite output value inherit both polarities of the input constraints,
    which are jointly contradictory for a functional gate.
    """
    if value not in (0, 1):
        raise MutationError(f"stuck-at value must be 0 or 1, got {value!r}")
    group = f.group(gate_id)
    forced = Lit(gate_id, neg=(value == 0))
    gstar = []
    for i in group:
        cl = f.clauses[i]
        if gate_id not in cl.vars:
            raise MutationError(
                f"clause {cl!r} in group of gate {gate_id} lacks the output literal")
        gstar.append(clause(*[forced if l.var == gate_id else l for l in cl.lits],
                            origin=gate_id))
    uniq: list[Clause] = []
    for cl in gstar:
        if cl not in uniq:
            uniq.append(cl)
    ident = _same_clause_set([f.clauses[i] for i in group], uniq)
    return Mutation(f"stuck-at-{value}", gate_id, group, tuple(uniq), ident)


def clause_flip(f: CnfFormula, clause_index: int, literal_index: int) -> Mutation:
    """Negate one literal of one clause (self-inverse)."""
    if not 0 <= clause_index < len(f.clauses):
        raise MutationError(f"clause index {clause_index} out of range")
    cl = f.clauses[clause_index]
    if not 0 <= literal_index < len(cl.lits):
        raise MutationError(
            f"literal index {literal_index} out of range for clause {cl!r}")
    lits = list(cl.lits)
    lits[literal_index] = -lits[literal_index]
    flipped = clause(*lits, origin=cl.origin)
    target = cl.origin if isinstance(cl.origin, int) else None
    return Mutation("clause-flip", target, (clause_index,), (flipped,), False,
                    clause_index=clause_index, literal_index=literal_index)


def apply_mutation(f: CnfFormula, m: Mutation) -> GroupSplit:
    return replace_group(f, m.group, m.gstar)


def substitution_kinds(g: Gate) -> tuple[str, ...]:
    """Catalog kinds admitting the gate's arity, original included."""
    return tuple(k for k in GATE_KINDS if gate_arity_ok(k, len(g.fanins)))


POLICIES = ("all-gate-subst", "all-stuck-at", "all-clause-flips", "mixed")


def enumerate_mutations(f: CnfFormula, policy: str = "mixed") -> list[Mutation]:
    """Deterministic, duplicate-free, identity-free mutation sequence.

    Order: gates ascending by id; per gate substitutions in catalog order,
    then stuck-at-0/1, then literal flips of the gate's clauses; raw clause
    flips of unowned clauses last.
    """
    if policy not in POLICIES:
        raise MutationError(f"unknown policy {policy!r}; choose from {POLICIES}")
    want_subst = policy in ("all-gate-subst", "mixed")
    want_stuck = policy in ("all-stuck-at", "mixed")
    want_flips = policy in ("all-clause-flips", "mixed")
    out: list[Mutation] = []
    seen: set = set()

    def push(m: Mutation):
        if m.identity:
            return
        key = (m.group, frozenset(m.gstar))
        if key in seen:
            return
        seen.add(key)
        out.append(m)

    gate_ids = sorted(f.groups)
    for gid in gate_ids:
        if want_subst and f.gate_table and gid in f.gate_table:
            g = f.gate_table[gid]
            for k in substitution_kinds(g):
                if k != g.kind:
                    push(gate_subst(f, gid, k))
        if want_stuck:
            for v in (0, 1):
                push(stuck_at(f, gid, v))
        if want_flips:
            for ci in f.groups[gid]:
                for li in range(len(f.clauses[ci].lits)):
                    push(clause_flip(f, ci, li))
    if want_flips:
        owned = {ci for gid in gate_ids for ci in f.groups[gid]}
        for ci in range(len(f.clauses)):
            if ci not in owned:
                for li in range(len(f.clauses[ci].lits)):
                    push(clause_flip(f, ci, li))
    return out
