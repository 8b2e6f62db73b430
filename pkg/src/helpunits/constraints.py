"""HeLP constraint construction.

For a hypothetical torsion unit u of order k with partial augmentations
nu_C, and any ordinary or p-Brauer character chi with p coprime to k, the
multiplicity

    mu_l(u, chi, p) = 1/k * sum_{d | k} Tr_{Q(z^d)/Q}(chi(u^d) * z^(-d*l))

of z^l as an eigenvalue of u must be a non-negative integer.  The d = 1 term
is linear in the unknowns; the other terms are fixed once the partial
augmentations of the proper powers u^d are fixed (a *profile*).
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .arith import Cyclotomic, E
from .solver import IntegerLinearSystem, LinearForm
from .tables import Character, CharacterTable, classes_dividing, ordinary_table, usable_tables

__all__ = [
    "AugmentationTuple",
    "HelpProblem",
    "MuConstraint",
    "MuSpec",
    "build_system",
    "chi_of_tuple",
    "divisors",
    "mu_form",
    "mu_value",
]


def class_key(name: str):
    """Sort key putting class names in GAP order: 2a < 2b < 10a."""
    m = re.match(r"(\d+)(.*)", name)
    return (int(m.group(1)), m.group(2)) if m else (0, name)


def divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


@dataclass(frozen=True)
class AugmentationTuple:
    """Partial augmentations of a unit of the given order.

    Only nonzero entries are stored, sorted by ``class_key``, so equal
    tuples compare equal however they were built.  The identity class never
    appears and the entries sum to one.  ``class_order``, when given, lists
    the allowed class names.
    """

    order: int
    entries: tuple[tuple[str, int], ...]

    @classmethod
    def make(cls, order: int, values: Mapping[str, int],
             class_order: Sequence[str] | None = None) -> "AugmentationTuple":
        if class_order is not None:
            missing = set(values) - set(class_order)
            if missing:
                raise KeyError(f"unknown classes {sorted(missing)}")
        entries = tuple((n, int(values[n])) for n in sorted(values, key=class_key)
                        if values[n])
        t = cls(order, entries)
        if sum(v for _, v in entries) != 1:
            raise ValueError(f"partial augmentations {dict(entries)} do not sum to 1")
        return t

    @property
    def values(self) -> dict[str, int]:
        return dict(self.entries)

    def get(self, name: str) -> int:
        return self.values.get(name, 0)

    def support(self) -> list[str]:
        return [n for n, v in self.entries if v]

    def is_trivial(self) -> bool:
        return len(self.support()) == 1

    def __str__(self):
        return "{" + ", ".join(f"{n}: {v}" for n, v in self.entries if v) + "}"


@dataclass(frozen=True)
class MuConstraint:
    """``scaled_form >= 0`` and ``scaled_form = 0 (mod modulus)``; the form is k * mu_l."""

    character_name: str
    characteristic: int
    index_l: int
    scaled_form: LinearForm
    modulus: int

    @property
    def label(self) -> str:
        p = "*" if self.characteristic == 0 else str(self.characteristic)
        return f"mu_{self.index_l}(u,{self.character_name},{p})"


@dataclass(frozen=True)
class MuSpec:
    """Picks one mu_l: character ``character`` of the table in ``characteristic``."""

    characteristic: int
    character: str
    l: int


def chi_of_tuple(table: CharacterTable, chi: Character, t: AugmentationTuple) -> Cyclotomic:
    """chi(u) = sum over classes of nu_C * chi(C)."""
    total = Cyclotomic(0)
    for name, nu in t.entries:
        if nu:
            if not table.has_class(name):
                raise KeyError(f"class {name} is not in the {table.label} table")
            total = total + nu * table.value(chi, name)
    return total


def _power_value(table: CharacterTable, chi: Character, k: int, d: int,
                 profile: Mapping[int, AugmentationTuple]) -> Cyclotomic:
    # chi(u^d); u^d has order k/d
    m = k // d
    if m == 1:
        return chi.values[0]
    try:
        t = profile[m]
    except KeyError:
        raise KeyError(f"profile has no partial augmentations for u^{d} (order {m})") from None
    if t.order != m:
        raise ValueError(f"profile entry for order {m} has order {t.order}")
    return chi_of_tuple(table, chi, t)


def _check_usable(table: CharacterTable, k: int):
    if table.characteristic and k % table.characteristic == 0:
        raise ValueError(f"{table.label} table is not usable for order {k}: "
                         f"{table.characteristic} divides {k}")


def _trace(table: CharacterTable, chi: Character, name: str, m: int, l: int) -> int:
    # Tr_{Q(z_m)/Q}(chi(C) * z_m^(-l)), memoised on the table
    key = (chi.name, name, m, l % m)
    try:
        return table._traces[key]
    except KeyError:
        pass
    v = (table.value(chi, name) * E(m, -l)).trace(m)
    if v.denominator != 1:
        raise ArithmeticError(f"trace of {chi.name} on {name} is not an integer")
    table._traces[key] = int(v)
    return int(v)


def mu_form(table: CharacterTable, chi: Character, k: int, l: int,
            profile: Mapping[int, AugmentationTuple],
            variables: Sequence[str] | None = None) -> MuConstraint:
    """k * mu_l(u, chi, p) as an integral linear form in the unknowns nu_C.

    The traces are linear in the partial augmentations, so both the
    coefficients and the contributions of the powers u^d are sums of
    per-class traces.
    """
    _check_usable(table, k)
    if variables is None:
        variables = classes_dividing(table, k)
    constant = int(chi.values[0].to_rational())
    for d in divisors(k)[1:-1]:
        m = k // d
        try:
            t = profile[m]
        except KeyError:
            raise KeyError(f"profile has no partial augmentations for u^{d} (order {m})") from None
        if t.order != m:
            raise ValueError(f"profile entry for order {m} has order {t.order}")
        for name, nu in t.entries:
            if nu:
                if not table.has_class(name):
                    raise KeyError(f"class {name} is not in the {table.label} table")
                constant += nu * _trace(table, chi, name, m, l)
    coeffs = {name: _trace(table, chi, name, k, l) for name in variables}
    form = LinearForm.make(constant, coeffs, order=list(variables))
    return MuConstraint(chi.name, table.characteristic, l % k, form, k)


def mu_value(table: CharacterTable, chi: Character, k: int, l: int,
             t: AugmentationTuple, profile: Mapping[int, AugmentationTuple]) -> Fraction:
    """mu_l evaluated directly from the partial augmentations (no linear forms)."""
    _check_usable(table, k)
    total = Fraction(0)
    full = dict(profile)
    full[k] = t
    for d in divisors(k):
        m = k // d
        total += (_power_value(table, chi, k, d, full) * E(m, -l)).trace(m)
    return total / k


@dataclass
class HelpProblem:
    """Everything needed to rebuild one HeLP system (used for re-verification)."""

    tables: list[CharacterTable]
    order: int
    profile: dict[int, AugmentationTuple]
    variables: list[str]
    selection: list[tuple[CharacterTable, Character, list[int]]] = field(default_factory=list)
    sources: dict[LinearForm, list[MuConstraint]] = field(default_factory=dict)

    def direct_violation(self, values: Mapping[str, int]) -> str | None:
        if set(values) - set(self.variables):
            return f"classes {sorted(set(values) - set(self.variables))} not allowed"
        if sum(values.values()) != 1:
            return f"partial augmentations sum to {sum(values.values())}, not 1"
        t = AugmentationTuple.make(self.order, values, class_order=self.variables)
        for table, chi, ls in self.selection:
            for l in ls:
                mu = mu_value(table, chi, self.order, l, t, self.profile)
                if mu.denominator != 1 or mu < 0:
                    p = "*" if table.characteristic == 0 else table.characteristic
                    return f"mu_{l}(u,{chi.name},{p}) = {mu}"
        return None


def _selection(tables: Sequence[CharacterTable], k: int,
               characters: Iterable[str] | None,
               characteristics: Iterable[int] | None,
               specs: Iterable[MuSpec] | None):
    usable = usable_tables(tables, k)
    if specs is not None:
        by_p = {t.characteristic: t for t in usable}
        grouped: dict[tuple[int, str], list[int]] = {}
        for s in specs:
            if s.characteristic not in by_p:
                raise ValueError(f"no usable table in characteristic {s.characteristic} "
                                 f"for order {k}")
            grouped.setdefault((s.characteristic, s.character), []).append(s.l % k)
        return [(by_p[p], by_p[p].character(name), sorted(set(ls)))
                for (p, name), ls in grouped.items()]
    if characteristics is not None:
        wanted = set(characteristics)
        usable = [t for t in usable if t.characteristic in wanted]
    names = set(characters) if characters is not None else None
    out = []
    for t in usable:
        for chi in t.characters:
            if names is None or chi.name in names:
                out.append((t, chi, list(range(k))))
    return out


def build_system(tables: Sequence[CharacterTable], k: int,
                 profile: Mapping[int, AugmentationTuple] | None = None, *,
                 characters: Iterable[str] | None = None,
                 characteristics: Iterable[int] | None = None,
                 specs: Iterable[MuSpec] | None = None) -> IntegerLinearSystem:
    """The HeLP system for order ``k`` given the partial augmentations of powers.

    By default every character of every usable table contributes all k
    indices l.  ``characters``/``characteristics`` filter by name and prime;
    ``specs`` instead names individual mu_l constraints.  Identical scaled
    forms are kept once; ``system.origin.sources`` maps each kept form to
    the constraints that produced it.
    """
    if k < 2:
        raise ValueError("order must exceed 1")
    profile = dict(profile or {})
    ordinary = ordinary_table(tables)
    variables = classes_dividing(ordinary, k)
    selection = _selection(tables, k, characters, characteristics, specs)
    inequalities: list[LinearForm] = []
    sources: dict[LinearForm, list[MuConstraint]] = {}
    for table, chi, ls in selection:
        for l in ls:
            mc = mu_form(table, chi, k, l, profile, variables)
            if mc.scaled_form not in sources:
                sources[mc.scaled_form] = []
                inequalities.append(mc.scaled_form)
            sources[mc.scaled_form].append(mc)
    origin = HelpProblem(list(tables), k, profile, variables, selection, sources)
    total = LinearForm.make(0, {v: 1 for v in variables}, order=variables)
    return IntegerLinearSystem(
        variables=variables,
        equalities=[(total, 1)],
        inequalities=inequalities,
        congruences=[(f, k) for f in inequalities],
        origin=origin,
    )
