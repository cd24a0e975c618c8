"""Partial quantifier elimination over clause-group mutations.

Given F* = G* ∧ F' over variables split into quantified and free sets, a
solution is a set Q of clauses over the free variables with

    ∃quantified (G* ∧ F')  ≡  Q ∧ ∃quantified F'.

Two engines produce solutions: a truth-table oracle (projection by model
enumeration, exponential in the free variables, trusted) and a CEGAR loop
(candidate model search against F', UNSAT-core generalization against F*).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Mapping, Optional, Sequence

from .cnf import (Clause, CnfFormula, GroupSplit, Lit, ROLE_INPUT,
                  ROLE_OUTPUT, clause)
from .sat import Solver, implies, solver_for

ENUM_BOUND_DEFAULT = 20


class PqeError(Exception):
    pass


class EnumerationBoundExceeded(PqeError):
    """Too many free variables for explicit truth-table work."""


@dataclass(frozen=True)
class TruthTable:
    """Ones of a boolean relation over an ordered variable tuple."""
    variables: tuple[int, ...]
    rows: frozenset[tuple[int, ...]]

    def __contains__(self, row: tuple[int, ...]) -> bool:
        return row in self.rows

    def value(self, row: tuple[int, ...]) -> int:
        return int(row in self.rows)

    @property
    def num_rows(self) -> int:
        return len(self.rows)

    def is_functional(self, n_domain: int) -> bool:
        """Exactly one completion per assignment of the first n_domain vars."""
        per: dict[tuple[int, ...], int] = {}
        for r in self.rows:
            k = r[:n_domain]
            per[k] = per.get(k, 0) + 1
        return len(per) == 1 << n_domain and all(c == 1 for c in per.values())


@dataclass(frozen=True)
class PqeProblem:
    formula: CnfFormula            # F* = G* ∧ F'
    gstar: tuple[int, ...]         # clause indices of G*
    fprime: tuple[int, ...]        # clause indices of F'
    quantified: frozenset[int]
    free: tuple[int, ...]          # ascending
    original: Optional[CnfFormula] = None  # unmutated F, needed for early stop

    def __post_init__(self):
        n = self.formula.num_vars
        qs = self.quantified
        fr = set(self.free)
        if qs & fr:
            raise PqeError("quantified and free variable sets overlap")
        if qs | fr != set(range(n)):
            raise PqeError("quantified and free sets must partition the variables")
        if tuple(sorted(self.free)) != self.free:
            raise PqeError("free variables must be in ascending order")
        got = sorted(set(self.gstar) | set(self.fprime))
        if got != list(range(len(self.formula.clauses))):
            raise PqeError("gstar and fprime index sets must partition the clauses")

    @property
    def fstar_formula(self) -> CnfFormula:
        return self.formula

    @property
    def fprime_formula(self) -> CnfFormula:
        return self.formula.restrict(self.fprime)


def problem_from_split(split: GroupSplit,
                       original: Optional[CnfFormula] = None) -> PqeProblem:
    """Combinational problem: internals quantified, inputs and outputs free."""
    vm = split.formula.varmap
    quantified = frozenset(v for v in range(vm.num_vars)
                           if vm.role_of(v) not in (ROLE_INPUT, ROLE_OUTPUT))
    free = tuple(v for v in range(vm.num_vars)
                 if vm.role_of(v) in (ROLE_INPUT, ROLE_OUTPUT))
    return PqeProblem(split.formula, split.gstar, split.fprime, quantified,
                      free, original)


@dataclass(frozen=True)
class PqeSolution:
    clauses: tuple[Clause, ...]
    certificate_checked: bool = False
    partial: bool = False
    trigger: Optional[Clause] = None   # first clause the original F fails to imply
    stats: Mapping[str, int] = field(default_factory=dict, compare=False)


# ---------------------------------------------------------------------------
# enumeration

def _row_assumptions(free: Sequence[int], bits: Sequence[int]) -> list[Lit]:
    return [Lit(v, neg=(b == 0)) for v, b in zip(free, bits)]


def qe_enumerate(f: CnfFormula, quantified: Iterable[int],
                 bound: int = ENUM_BOUND_DEFAULT) -> TruthTable:
    """Truth table of ∃quantified f over the remaining variables."""
    qs = frozenset(quantified)
    for v in qs:
        if not 0 <= v < f.num_vars:
            raise PqeError(f"quantified variable {v} out of range")
    free = tuple(v for v in range((f.num_vars)) if v not in qs)
    if len(free) > bound:
        raise EnumerationBoundExceeded(
            f"{len(free)} free variables exceed the enumeration bound {bound}")
    solver = solver_for(f)
    rows = set()
    for bits in product((0, 1), repeat=len(free)):
        if solver.solve(_row_assumptions(free, bits)).is_sat:
            rows.add(bits)
    return TruthTable(free, frozenset(rows))


def _row_clause(free: Sequence[int], bits: Sequence[int]) -> Clause:
    return clause(*[Lit(v, neg=(b == 1)) for v, b in zip(free, bits)],
                  origin="derived")


def _q_satisfies(clauses: Sequence[Clause], env: Mapping[int, int]) -> bool:
    return all(c.satisfied_by(env) for c in clauses)


def noise_filter(q: Sequence[Clause], fprime: CnfFormula) -> tuple[Clause, ...]:
    """Drop clauses already implied by F' alone: they add nothing over
    ∃quantified F' and would survive into the property as noise."""
    solver = solver_for(fprime)
    return tuple(c for c in q if not implies(fprime, c, solver=solver))


def _subsume(clauses: Sequence[Clause]) -> tuple[Clause, ...]:
    kept: list[Clause] = []
    for c in clauses:
        cs = set(c.lits)
        if any(set(k.lits) <= cs for k in kept):
            continue
        kept = [k for k in kept if not cs <= set(k.lits)] + [c]
    return tuple(kept)


def verify_solution(problem: PqeProblem, clauses: Sequence[Clause],
                    bound: int = ENUM_BOUND_DEFAULT) -> bool:
    """Row-by-row check of the defining equivalence by enumeration."""
    free = problem.free
    tbl_star = qe_enumerate(problem.fstar_formula, problem.quantified, bound)
    tbl_prime = qe_enumerate(problem.fprime_formula, problem.quantified, bound)
    for bits in product((0, 1), repeat=len(free)):
        env = dict(zip(free, bits))
        lhs = bits in tbl_star.rows
        rhs = _q_satisfies(clauses, env) and bits in tbl_prime.rows
        if lhs != rhs:
            return False
    return True


def pqe_oracle(problem: PqeProblem, bound: int = ENUM_BOUND_DEFAULT) -> PqeSolution:
    """Reference engine: project both sides, emit one clause per row where
    the mutated projection lost a row the remainder still allows."""
    free = problem.free
    if len(free) > bound:
        raise EnumerationBoundExceeded(
            f"{len(free)} free variables exceed the enumeration bound {bound}")
    tbl_star = qe_enumerate(problem.fstar_formula, problem.quantified, bound)
    tbl_prime = qe_enumerate(problem.fprime_formula, problem.quantified, bound)
    q = [_row_clause(free, bits) for bits in sorted(tbl_prime.rows)
         if bits not in tbl_star.rows]
    q = list(noise_filter(q, problem.fprime_formula))
    q = list(_subsume(q))
    if not verify_solution(problem, q, bound):
        raise PqeError("oracle certificate check failed")  # pragma: no cover
    return PqeSolution(tuple(q), certificate_checked=True,
                       stats={"rows": 1 << len(free), "clauses": len(q)})


# ---------------------------------------------------------------------------
# CEGAR engine

def pqe_cegar(problem: PqeProblem, early_stop: bool = False,
              clause_budget: Optional[int] = None,
              conflict_limit: Optional[int] = None) -> PqeSolution:
    """Model search over F' refuted or generalized against F*.

    Each candidate model of F' ∧ Q (projected to the free variables) is
    checked against F*.  If F* extends it, the row is correct and gets
    blocked from the search only.  Otherwise the UNSAT core over the row
    assumptions shrinks greedily (ascending variable id) and the negation of
    the surviving assumptions joins Q.  With early_stop, the loop returns as
    soon as an emitted clause is not implied by the original formula.
    """
    nv = problem.formula.num_vars
    search = Solver(nv, (problem.formula.clauses[i] for i in problem.fprime),
                    conflict_limit=conflict_limit)
    check = Solver(nv, problem.formula.clauses, conflict_limit=conflict_limit)
    orig_solver: Optional[Solver] = None
    if early_stop:
        if problem.original is None:
            raise PqeError("early stop needs the original formula on the problem")
        orig_solver = Solver(nv, problem.original.clauses,
                             conflict_limit=conflict_limit)
    free = problem.free
    q: list[Clause] = []
    trigger: Optional[Clause] = None
    iterations = 0
    drops = 0
    partial = False
    while True:
        res = search.solve()
        if not res.is_sat:
            break
        iterations += 1
        model = res.model
        row = [Lit(v, neg=(model[v] == 0)) for v in free]
        ver = check.solve(row)
        if ver.is_sat:
            search.add_clause([-l for l in row])
            continue
        core_vars = {l.var for l in ver.core}
        cur = {l.var: l for l in row if l.var in core_vars}
        for v in sorted(core_vars):
            if v not in cur:
                continue  # an earlier core already discarded it
            rest = [cur[u] for u in sorted(cur) if u != v]
            attempt = check.solve(rest)
            if not attempt.is_sat:
                drops += 1
                keep = {l.var for l in attempt.core}
                cur = {u: l for u, l in cur.items() if u != v and u in keep}
        lits = [cur[u] for u in sorted(cur)]
        emitted = clause(*[-l for l in lits], origin="derived")
        q.append(emitted)
        search.add_clause(emitted)
        if early_stop and not implies(problem.original, emitted, solver=orig_solver):
            trigger = emitted
            partial = True
            break
        if clause_budget is not None and len(q) >= clause_budget:
            if search.solve().is_sat:
                partial = True
            break
    filtered = noise_filter(q, problem.fprime_formula)
    stats = {"iterations": iterations, "generalization_drops": drops,
             "search_solves": search.num_solves, "check_solves": check.num_solves,
             "clauses": len(filtered)}
    return PqeSolution(tuple(filtered), certificate_checked=False,
                       partial=partial, trigger=trigger, stats=stats)


# ---------------------------------------------------------------------------
# totality

def check_totality(fstar: CnfFormula, bound: int = ENUM_BOUND_DEFAULT) -> bool:
    """True iff every input assignment extends to a model of F*.

    A mutation that breaks totality yields properties with input-only
    clauses, which rule out inputs rather than input/output behavior.
    """
    xs = fstar.varmap.with_role(ROLE_INPUT)
    if len(xs) > bound:
        raise EnumerationBoundExceeded(
            f"{len(xs)} inputs exceed the enumeration bound {bound}")
    solver = solver_for(fstar)
    for bits in product((0, 1), repeat=len(xs)):
        if not solver.solve(_row_assumptions(xs, bits)).is_sat:
            return False
    return True
