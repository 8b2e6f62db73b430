"""Runs HeLP over all candidate orders of a group.

Orders are processed bottom-up over the divisor lattice.  The admitted
partial augmentations of every proper power of u are combined into coherent
*profiles*; each profile is one case of the analysis for the top order.
"""
from __future__ import annotations

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .arith import factorize
from .constraints import AugmentationTuple, MuSpec, build_system, divisors
from .solver import (ABORTED, FEASIBLE, INFEASIBLE, IntegerLinearSystem, SolutionSet,
                     UnboundedError, enumerate_solutions, rational_bounds)
from .tables import CharacterTable, classes_dividing, ordinary_table

log = logging.getLogger(__name__)

__all__ = [
    "ELIMINATED",
    "HAS_NONTRIVIAL",
    "NOT_ATTEMPTED",
    "REALIZED_TRIVIALLY",
    "SKIPPED",
    "Case",
    "OrderVerdict",
    "PrimeGraphReport",
    "Profile",
    "candidate_orders",
    "compose_profiles",
    "kimmerle_report",
    "open_orders",
    "run_all",
    "run_divisors",
    "solve_order",
]

ELIMINATED = "eliminated"
REALIZED_TRIVIALLY = "realized-trivially"
HAS_NONTRIVIAL = "has-nontrivial-solutions"
SKIPPED = "skipped-by-divisor"
NOT_ATTEMPTED = "not-attempted"
# ABORTED is shared with the solver


@dataclass(frozen=True)
class Profile:
    """Partial augmentations of u^d for every proper power of a unit of order ``order``.

    ``assignments`` maps the order m of each power (1 < m < order, m | order)
    to its tuple.
    """

    order: int
    assignments: tuple[tuple[int, AugmentationTuple], ...] = ()

    @classmethod
    def make(cls, order: int, assignments: Mapping[int, AugmentationTuple]) -> "Profile":
        for m, t in assignments.items():
            if order % m or m in (1, order) or t.order != m:
                raise ValueError(f"bad profile entry {m} -> {t} for order {order}")
        return cls(order, tuple(sorted(assignments.items())))

    def as_dict(self) -> dict[int, AugmentationTuple]:
        return dict(self.assignments)

    def extend(self, top: AugmentationTuple) -> dict[int, AugmentationTuple]:
        """The profile together with the unit's own tuple, keyed by order."""
        d = self.as_dict()
        d[self.order] = top
        return d

    def is_trivial(self) -> bool:
        return all(t.is_trivial() for _, t in self.assignments)


@dataclass
class Case:
    profile: Profile
    solutions: SolutionSet
    constraint_count: int = 0

    def tuples(self) -> list[AugmentationTuple]:
        return [AugmentationTuple.make(self.profile.order, d, class_order=self.solutions.variables)
                for d in self.solutions.as_dicts()]


@dataclass
class OrderVerdict:
    order: int
    status: str
    variables: list[str] = field(default_factory=list)
    cases: list[Case] = field(default_factory=list)
    note: str = ""

    def merged(self) -> list[tuple[int, ...]]:
        """Distinct solution tuples over all cases, sorted."""
        return sorted({s for c in self.cases for s in c.solutions.solutions})

    def admitted(self) -> list[dict[int, AugmentationTuple]]:
        """Every (profile, solution) pair, as full profiles including this order."""
        out = []
        for c in self.cases:
            for t in c.tuples():
                out.append(c.profile.extend(t))
        return out

    def trivial_solutions(self) -> list[tuple[int, ...]]:
        """Solutions certified rationally conjugate to a group element.

        A solution qualifies when it and every tuple of its profile have
        exactly one nonzero partial augmentation.
        """
        out = set()
        for c in self.cases:
            if not c.profile.is_trivial():
                continue
            for t, raw in zip(c.tuples(), c.solutions.solutions):
                if t.is_trivial():
                    out.add(raw)
        return sorted(out)


@dataclass
class PrimeGraphReport:
    primes: list[int]
    group_edges: set[tuple[int, int]]
    unit_edges: set[tuple[int, int]]

    @property
    def equal(self) -> bool:
        return self.group_edges == self.unit_edges


def candidate_orders(t: CharacterTable) -> list[int]:
    """Possible orders of nontrivial torsion units: divisors of the exponent above 1."""
    return divisors(t.exponent)[1:]


def _maximal_divisors(k: int) -> list[int]:
    return [k // p for p, _ in factorize(k) if k // p > 1]


def compose_profiles(k: int, admitted: Mapping[int, Sequence[Mapping[int, AugmentationTuple]]]
                     ) -> list[Profile]:
    """All coherent profiles for order ``k``.

    ``admitted[m]`` lists, for each admitted solution at order m, the full
    assignment over the divisors of m (including m).  One admitted entry is
    chosen for every maximal proper divisor; the choices must agree wherever
    their divisor sets overlap.
    """
    tops = _maximal_divisors(k)
    if not tops:
        return [Profile(k)]
    pools = []
    for m in tops:
        if m not in admitted:
            raise KeyError(f"no admitted partial augmentations for order {m}")
        pools.append(list(admitted[m]))
    out: dict[tuple, Profile] = {}
    for combo in itertools.product(*pools):
        merged: dict[int, AugmentationTuple] = {}
        ok = True
        for part in combo:
            for m, t in part.items():
                if merged.setdefault(m, t) != t:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            p = Profile.make(k, merged)
            out.setdefault(p.assignments, p)
    return list(out.values())


def open_orders(t: CharacterTable, orders: Iterable[int] | None = None) -> set[int]:
    """Orders that build on another order not realised by group elements.

    Their case lists multiply over whatever the inner open order admits, so
    they are only attempted on request.
    """
    elem = set(t.element_orders())
    orders = list(orders) if orders is not None else candidate_orders(t)
    out = set()
    for k in orders:
        if any(m not in elem for m in divisors(k)[1:-1]):
            out.add(k)
    return out


def _solve_case(tables, k, profile: Profile, max_nodes: int, selection: dict) -> Case:
    system = build_system(tables, k, profile.as_dict(), **selection)
    try:
        bounds = rational_bounds(system)
    except UnboundedError as exc:
        sol = SolutionSet(list(system.variables), [], ABORTED, witness=str(exc))
        return Case(profile, sol, len(system.inequalities))
    sol = enumerate_solutions(system, max_nodes=max_nodes, bounds=bounds)
    return Case(profile, sol, len(system.inequalities))


def solve_order(k: int, tables: Sequence[CharacterTable],
                admitted: Mapping[int, Sequence[Mapping[int, AugmentationTuple]]],
                eliminated: Iterable[int] = (), *,
                max_cases: int = 10_000, max_nodes: int = 2_000_000,
                workers: int = 1,
                characters: Iterable[str] | None = None,
                characteristics: Iterable[int] | None = None,
                specs: Iterable[MuSpec] | None = None,
                profiles: Sequence[Profile] | None = None) -> OrderVerdict:
    """Decide order ``k`` given the admitted tuples of its proper divisors.

    ``profiles`` restricts the analysis to the given cases, each of which
    must be coherent with ``admitted``; the verdict then only speaks for
    those cases and says so in its note.
    """
    ordinary = ordinary_table(tables)
    variables = classes_dividing(ordinary, k)
    dead = set(eliminated) & set(divisors(k)[1:-1])
    if dead:
        return OrderVerdict(k, SKIPPED, variables,
                            note=f"proper divisor {min(dead)} is eliminated")
    partial = profiles is not None
    if partial:
        profiles = list(profiles)
        for p in profiles:
            _check_coherent(p, k, admitted)
    else:
        profiles = compose_profiles(k, admitted)
    if len(profiles) > max_cases:
        return OrderVerdict(k, ABORTED, variables,
                            note=f"{len(profiles)} cases exceed the limit of {max_cases}")
    selection = {"characters": characters, "characteristics": characteristics,
                 "specs": specs}
    if workers > 1 and len(profiles) > 1:
        with ThreadPoolExecutor(workers) as pool:
            cases = list(pool.map(
                lambda p: _solve_case(tables, k, p, max_nodes, selection), profiles))
    else:
        cases = [_solve_case(tables, k, p, max_nodes, selection) for p in profiles]
    cases.sort(key=lambda c: _profile_key(c.profile, ordinary))
    verdict = OrderVerdict(k, "", variables, cases)
    if any(c.solutions.status == ABORTED for c in cases):
        verdict.status = ABORTED
        verdict.note = "search limit reached in some case"
    elif not verdict.merged():
        verdict.status = ELIMINATED
    elif _all_trivial(verdict):
        verdict.status = REALIZED_TRIVIALLY
    else:
        verdict.status = HAS_NONTRIVIAL
    if partial:
        verdict.note = (verdict.note + "; " if verdict.note else "") + \
            f"restricted to {len(cases)} chosen cases"
    log.info("order %d: %s (%d cases, %d tuples)", k, verdict.status, len(cases),
             len(verdict.merged()))
    return verdict


def _check_coherent(p: Profile, k: int, admitted) -> None:
    if p.order != k:
        raise ValueError(f"profile for order {p.order} given for order {k}")
    full = p.as_dict()
    if set(full) != set(divisors(k)[1:-1]):
        raise ValueError(f"profile {p} does not cover the proper divisors of {k}")
    for m in _maximal_divisors(k):
        part = {d: t for d, t in full.items() if m % d == 0}
        if not any(dict(a) == part for a in admitted.get(m, ())):
            raise ValueError(f"profile restricted to order {m} is not admitted")


def _all_trivial(v: OrderVerdict) -> bool:
    for c in v.cases:
        if c.solutions.solutions and not c.profile.is_trivial():
            return False
        if any(not t.is_trivial() for t in c.tuples()):
            return False
    return True


def _profile_key(p: Profile, ordinary: CharacterTable):
    names = [c.name for c in ordinary.classes]
    key = []
    for m, t in p.assignments:
        vals = t.values
        key.append((m, tuple(vals.get(n, 0) for n in names)))
    return tuple(key)


def run_all(tables: Sequence[CharacterTable], *, include_open_orders: bool = False,
            order_cap: int | None = None, max_cases: int = 10_000,
            max_nodes: int = 2_000_000, workers: int = 1) -> dict[int, OrderVerdict]:
    """Verdicts for every candidate order, ascending."""
    ordinary = ordinary_table(tables)
    orders = candidate_orders(ordinary)
    if order_cap is not None:
        orders = [k for k in orders if k <= order_cap]
    deferred = set() if include_open_orders else open_orders(ordinary, orders)
    return _bottom_up(tables, orders, deferred, max_cases=max_cases, max_nodes=max_nodes,
                      workers=workers)


def run_divisors(k: int, tables: Sequence[CharacterTable], *, max_cases: int = 10_000,
                 max_nodes: int = 2_000_000, workers: int = 1,
                 characters: Iterable[str] | None = None,
                 characteristics: Iterable[int] | None = None,
                 specs: Iterable[MuSpec] | None = None) -> dict[int, OrderVerdict]:
    """Verdicts for every divisor of ``k`` above 1.

    The proper divisors are solved with every usable character; the
    character selection only applies to ``k`` itself.
    """
    if k < 2:
        raise ValueError("order must exceed 1")
    top = {"characters": characters, "characteristics": characteristics, "specs": specs}
    return _bottom_up(tables, divisors(k)[1:], set(), max_cases=max_cases,
                      max_nodes=max_nodes, workers=workers, top=(k, top))


def _bottom_up(tables, orders, deferred, *, max_cases, max_nodes, workers, top=None):
    ordinary = ordinary_table(tables)
    verdicts: dict[int, OrderVerdict] = {}
    admitted: dict[int, list] = {}
    blocked: set[int] = set()
    for k in orders:
        proper = divisors(k)[1:-1]
        if any(m in blocked for m in proper):
            dead = min(m for m in proper if m in blocked)
            verdicts[k] = OrderVerdict(k, SKIPPED, classes_dividing(ordinary, k),
                                       note=f"proper divisor {dead} admits no unit")
            blocked.add(k)
            continue
        missing = [m for m in proper if m not in admitted]
        if k in deferred or missing:
            why = ("open order, enable include_open_orders to attempt" if k in deferred
                   else f"divisors {missing} unresolved")
            verdicts[k] = OrderVerdict(k, NOT_ATTEMPTED, classes_dividing(ordinary, k), note=why)
            continue
        selection = top[1] if top is not None and top[0] == k else {}
        v = solve_order(k, tables, admitted, max_cases=max_cases, max_nodes=max_nodes,
                        workers=workers, **selection)
        verdicts[k] = v
        if v.status == ELIMINATED:
            blocked.add(k)
        elif v.status in (REALIZED_TRIVIALLY, HAS_NONTRIVIAL):
            admitted[k] = v.admitted()
    return verdicts


def kimmerle_report(t: CharacterTable, verdicts: Mapping[int, OrderVerdict]) -> PrimeGraphReport:
    """Compare the prime graph of G with the one HeLP allows for V(ZG)."""
    primes = [p for p, _ in factorize(t.group_order)]
    orders = set(t.element_orders())
    group_edges, unit_edges = set(), set()
    for p, q in itertools.combinations(primes, 2):
        if any(o % (p * q) == 0 for o in orders):
            group_edges.add((p, q))
        if t.exponent % (p * q):
            continue
        if p * q not in verdicts:
            raise KeyError(f"no verdict for order {p * q}")
        if verdicts[p * q].status not in (ELIMINATED, SKIPPED):
            unit_edges.add((p, q))
    return PrimeGraphReport(primes, group_edges, unit_edges)
