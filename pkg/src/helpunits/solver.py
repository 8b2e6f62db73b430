"""Exact integer feasibility for small linear systems.

Bounds come from Fourier-Motzkin elimination over the rationals; the integer
points inside the resulting box are enumerated depth first, with interval
propagation after each assignment.  Congruences are only tested at leaves.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, floor, gcd
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

log = logging.getLogger(__name__)

__all__ = [
    "FEASIBLE",
    "INFEASIBLE",
    "ABORTED",
    "Bounds",
    "IntegerLinearSystem",
    "LinearForm",
    "SolutionSet",
    "UnboundedError",
    "brute_force",
    "check_solution",
    "enumerate_solutions",
    "first_violation",
    "rational_bounds",
]

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
ABORTED = "aborted"


@dataclass(frozen=True)
class LinearForm:
    """``constant + sum(coefficient[name] * x[name])`` with rational data."""

    constant: Fraction = Fraction(0)
    terms: tuple[tuple[str, Fraction], ...] = ()

    @classmethod
    def make(cls, constant=0, coefficients: Mapping[str, Any] | None = None,
             order: Sequence[str] | None = None) -> "LinearForm":
        coefficients = coefficients or {}
        names = order if order is not None else sorted(coefficients)
        extra = set(coefficients) - set(names)
        if extra:
            raise KeyError(f"coefficients for unknown variables {sorted(extra)}")
        terms = tuple((n, Fraction(coefficients[n])) for n in names
                      if n in coefficients and coefficients[n])
        return cls(Fraction(constant), terms)

    @property
    def coefficients(self) -> dict[str, Fraction]:
        return dict(self.terms)

    def coefficient(self, name: str) -> Fraction:
        return self.coefficients.get(name, Fraction(0))

    def evaluate(self, values: Mapping[str, int | Fraction]) -> Fraction:
        return self.constant + sum((c * values.get(n, 0) for n, c in self.terms), Fraction(0))

    def is_integral(self) -> bool:
        return self.constant.denominator == 1 and all(c.denominator == 1 for _, c in self.terms)

    def __add__(self, other: "LinearForm") -> "LinearForm":
        coeffs = self.coefficients
        for n, c in other.terms:
            coeffs[n] = coeffs.get(n, Fraction(0)) + c
        order = list(dict.fromkeys([n for n, _ in self.terms] + [n for n, _ in other.terms]))
        return LinearForm.make(self.constant + other.constant, coeffs, order=order)

    def __str__(self):
        parts = []
        for n, c in self.terms:
            mag = "" if abs(c) == 1 else f"{abs(c)}*"
            parts.append(f"{'-' if c < 0 else '+'} {mag}{n}")
        if self.constant or not parts:
            parts.append(f"{'-' if self.constant < 0 else '+'} {abs(self.constant)}")
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]


@dataclass
class IntegerLinearSystem:
    """Integer unknowns with equalities, inequalities (>= 0) and congruences.

    ``equalities`` holds pairs ``(form, value)`` meaning ``form == value``;
    ``congruences`` holds ``(form, modulus)`` meaning ``form % modulus == 0``.
    ``origin`` is whatever the builder needs to recompute the constraints
    independently (see :func:`check_solution`).
    """

    variables: list[str]
    equalities: list[tuple[LinearForm, int]] = field(default_factory=list)
    inequalities: list[LinearForm] = field(default_factory=list)
    congruences: list[tuple[LinearForm, int]] = field(default_factory=list)
    origin: Any = None

    def __post_init__(self):
        known = set(self.variables)
        forms = ([f for f, _ in self.equalities] + list(self.inequalities)
                 + [f for f, _ in self.congruences])
        for f in forms:
            if not f.is_integral():
                raise ValueError(f"non-integral form {f}")
            unknown = set(f.coefficients) - known
            if unknown:
                raise ValueError(f"form {f} uses unknown variables {sorted(unknown)}")

    def satisfied_by(self, values: Mapping[str, int]) -> bool:
        if any(f.evaluate(values) != v for f, v in self.equalities):
            return False
        if any(f.evaluate(values) < 0 for f in self.inequalities):
            return False
        return all(f.evaluate(values) % m == 0 for f, m in self.congruences)


@dataclass
class SolutionSet:
    variables: list[str]
    solutions: list[tuple[int, ...]]
    status: str
    witness: str | None = None
    nodes: int = 0

    def as_dicts(self) -> list[dict[str, int]]:
        return [dict(zip(self.variables, s)) for s in self.solutions]

    def __len__(self):
        return len(self.solutions)


@dataclass
class Bounds:
    """Integer box implied by the rational relaxation, or a contradiction."""

    lower: dict[str, int] = field(default_factory=dict)
    upper: dict[str, int] = field(default_factory=dict)
    witness: str | None = None

    @property
    def feasible(self) -> bool:
        return self.witness is None

    def box(self, variables: Sequence[str]) -> list[tuple[int, int]]:
        return [(self.lower[v], self.upper[v]) for v in variables]


class UnboundedError(ValueError):
    """Fourier-Motzkin found a variable with no finite bound."""


# --- Fourier-Motzkin --------------------------------------------------------

# internal row: (integer coefficient tuple, integer constant, history)
# meaning sum(a_i x_i) + c >= 0.  Rows are divided by the gcd of their
# coefficients and the constant is rounded down, which keeps every integer
# point (the rounding is the usual Chvatal-Gomory cut).


def _normalize(a: tuple, c: int) -> tuple[tuple, int]:
    g = 0
    for x in a:
        g = gcd(g, x)
    if g <= 1:
        return a, c
    return tuple(x // g for x in a), c // g


class _Contradiction(Exception):
    def __init__(self, row):
        self.row = row


def _prune(rows: Iterable, eliminated: int, chernikov: bool = True) -> list:
    best: dict[tuple, tuple] = {}
    for a, c, hist in rows:
        a, c = _normalize(a, c)
        if not any(a):
            if c < 0:
                raise _Contradiction((a, c, hist))
            continue
        if chernikov and len(hist) > eliminated + 1:
            continue
        old = best.get(a)
        if old is None or c < old[1] or (c == old[1] and len(hist) < len(old[2])):
            best[a] = (a, c, hist)
    return [best[k] for k in sorted(best)]


def _eliminate_with(a, c, ea, ec, j):
    # multiply by |ea[j]| > 0 and subtract a multiple of the equation
    s = 1 if ea[j] > 0 else -1
    f, g = abs(ea[j]), s * a[j]
    return tuple(f * x - g * y for x, y in zip(a, ea)), f * c - g * ec


def _check_equalities(eqs: list, nvars: int) -> list:
    """Drop trivial equations; fail on one without integer solutions."""
    for a, c in eqs:
        g = 0
        for x in a:
            g = gcd(g, x)
        if (g == 0 and c != 0) or (g and c % g):
            raise _Contradiction(((0,) * nvars, -1, frozenset()))
    return [e for e in eqs if any(e[0])]


def _fm_project(rows: list, eqs: list, keep: int, nvars: int):
    """Project onto x_keep; returns rows mentioning only x_keep."""
    rows = _prune(rows, 0)
    eqs = _check_equalities(eqs, nvars)
    active = [i for i in range(nvars) if i != keep]
    eliminated = 0
    while True:
        # equalities first: plain substitution
        sub = None
        for ei, (ea, ec) in enumerate(eqs):
            cand = [j for j in active if ea[j] != 0]
            if cand:
                sub = (ei, cand[0])
                break
        if sub is not None:
            ei, j = sub
            ea, ec = eqs.pop(ei)
            rows = _prune([(*_eliminate_with(a, c, ea, ec, j), h) if a[j] else (a, c, h)
                           for a, c, h in rows], eliminated)
            eqs = _check_equalities(
                [_eliminate_with(a, c, ea, ec, j) if a[j] else (a, c) for a, c in eqs], nvars)
            active.remove(j)
            continue
        live = [j for j in active if any(a[j] != 0 for a, _, _ in rows)]
        active = live
        if not live:
            break

        def cost(j):
            pos = sum(1 for a, _, _ in rows if a[j] > 0)
            neg = sum(1 for a, _, _ in rows if a[j] < 0)
            return pos * neg - pos - neg

        j = min(live, key=cost)
        pos = [r for r in rows if r[0][j] > 0]
        neg = [r for r in rows if r[0][j] < 0]
        new = [r for r in rows if r[0][j] == 0]
        for (pa, pc, ph), (na, nc, nh) in itertools.product(pos, neg):
            fp, fn = -na[j], pa[j]
            g = gcd(fp, fn)
            fp, fn = fp // g, fn // g
            a = tuple(fp * x + fn * y for x, y in zip(pa, na))
            new.append((a, fp * pc + fn * nc, ph | nh))
        eliminated += 1
        active.remove(j)
        rows = _prune(new, eliminated)
    return rows, eqs


def _rows_from_system(s: IntegerLinearSystem):
    idx = {v: i for i, v in enumerate(s.variables)}
    n = len(s.variables)

    def vec(f: LinearForm):
        a = [0] * n
        for name, c in f.terms:
            a[idx[name]] = int(c)
        return tuple(a)

    rows = [(vec(f), int(f.constant), frozenset([i])) for i, f in enumerate(s.inequalities)]
    eqs = [(vec(f), int(f.constant) - v) for f, v in s.equalities]
    return rows, eqs


def _describe(row, variables) -> str:
    a, c, hist = row
    form = LinearForm.make(c, {v: x for v, x in zip(variables, a) if x}, order=variables)
    if not hist:
        return f"{form} >= 0 (the equalities have no integer solution)"
    return f"{form} >= 0 (combining inequalities {sorted(hist)})"


def rational_bounds(s: IntegerLinearSystem) -> Bounds:
    """Integer box [lower, upper] of every variable from Fourier-Motzkin elimination.

    The projection is the rational one, tightened by rounding each derived
    constant down (valid for integer points only).  Returns a :class:`Bounds`
    carrying a contradictory derived inequality as ``witness`` when no
    integer point can exist.  Raises :class:`UnboundedError` if some variable
    has no finite bound.
    """
    rows, eqs = _rows_from_system(s)
    n = len(s.variables)
    out = Bounds()
    for k, name in enumerate(s.variables):
        try:
            proj, rest_eqs = _fm_project(rows, eqs, k, n)
        except _Contradiction as exc:
            return Bounds(witness=_describe(exc.row, s.variables))
        lo = hi = None
        lo_row = hi_row = None
        for a, c, hist in proj:
            # a[k] is +-1 after normalisation
            if a[k] > 0 and (lo is None or -c > lo):
                lo, lo_row = -c, (a, c, hist)
            elif a[k] < 0 and (hi is None or c < hi):
                hi, hi_row = c, (a, c, hist)
        for ea, ec in rest_eqs:
            if ec % ea[k]:
                return Bounds(witness=f"{name} = {Fraction(-ec, ea[k])} is not an integer")
            val = -ec // ea[k]
            lo = val if lo is None else max(lo, val)
            hi = val if hi is None else min(hi, val)
        if lo is not None and hi is not None and lo > hi:
            if lo_row is None or hi_row is None:
                return Bounds(witness=f"no integer value for {name} in [{lo}, {hi}]")
            combo = (tuple(x + y for x, y in zip(lo_row[0], hi_row[0])),
                     lo_row[1] + hi_row[1], lo_row[2] | hi_row[2])
            return Bounds(witness=_describe(combo, s.variables))
        if lo is None or hi is None:
            raise UnboundedError(f"variable {name} is unbounded "
                                 f"{'below' if lo is None else 'above'}")
        out.lower[name], out.upper[name] = lo, hi
    return out


# --- enumeration ------------------------------------------------------------

def _propagate(rows, lo: list, hi: list, rounds: int = 8) -> bool:
    """Tighten integer bounds in place; False if some domain empties."""
    for _ in range(rounds):
        changed = False
        for a, c in rows:
            # max over the box of sum(a_i x_i) + c
            contrib = [(x * hi[i] if x > 0 else x * lo[i]) for i, x in enumerate(a) if x]
            total = c + sum(contrib)
            if total < 0:
                return False
            for i, x in enumerate(a):
                if not x:
                    continue
                others = total - (x * hi[i] if x > 0 else x * lo[i])
                # x * v + others >= 0
                if x > 0:
                    nb = -((others) // x)  # ceil(-others / x)
                    if nb > lo[i]:
                        lo[i], changed = nb, True
                else:
                    nb = others // (-x)  # floor(others / -x)
                    if nb < hi[i]:
                        hi[i], changed = nb, True
                if lo[i] > hi[i]:
                    return False
        if not changed:
            break
    return True


def enumerate_solutions(s: IntegerLinearSystem, max_nodes: int = 2_000_000,
                        bounds: Bounds | None = None) -> SolutionSet:
    """All integer points of the system, sorted lexicographically.

    The box from :func:`rational_bounds` is first tightened by interval
    propagation; the search then fixes one variable per level, deriving its
    range from the partial sums of all rows and the extreme values of the
    unfixed variables.  Stops with status ``aborted`` after ``max_nodes``
    search nodes.
    """
    names = s.variables
    if bounds is None:
        bounds = rational_bounds(s)
    if not bounds.feasible:
        return SolutionSet(list(names), [], INFEASIBLE, witness=bounds.witness)

    n = len(names)
    idx = {v: i for i, v in enumerate(names)}

    def ivec(f: LinearForm):
        a = [0] * n
        for name, c in f.terms:
            a[idx[name]] = int(c)
        return a, int(f.constant)

    rows = [ivec(f) for f in s.inequalities]
    for f, v in s.equalities:
        a, c = ivec(f)
        rows.append((a, c - v))
        rows.append(([-x for x in a], v - c))
    congr = [(*ivec(f), m) for f, m in s.congruences]

    lo = [bounds.lower[v] for v in names]
    hi = [bounds.upper[v] for v in names]
    if not _propagate(rows, lo, hi, rounds=50):
        return SolutionSet(list(names), [], INFEASIBLE,
                           witness="interval propagation empties the box")
    if n == 0:
        return SolutionSet([], [()], FEASIBLE)

    # narrow ranges first; results are mapped back to the given order
    perm = sorted(range(n), key=lambda i: (hi[i] - lo[i], i))
    big = max([abs(c) for _, c in rows] + [abs(c) for _, c, _ in congr] + [1])
    big += max(max(abs(lo[i]), abs(hi[i])) for i in range(n)) * max(
        [abs(x) for a, _ in rows for x in a] + [abs(x) for a, _, _ in congr for x in a] + [1]) * n
    dtype = np.int64 if big < 2 ** 60 else object
    A = np.array([[a[i] for i in perm] for a, _ in rows], dtype=dtype).reshape(len(rows), n)
    c0 = np.array([c for _, c in rows], dtype=dtype)
    M = np.array([[a[i] for i in perm] for a, _, _ in congr], dtype=dtype).reshape(len(congr), n)
    mc = np.array([c for _, c, _ in congr], dtype=dtype)
    mods = np.array([m for _, _, m in congr], dtype=dtype)
    plo = np.array([lo[i] for i in perm], dtype=dtype)
    phi = np.array([hi[i] for i in perm], dtype=dtype)
    ext = np.maximum(A * plo, A * phi)
    suf = np.zeros((n + 1, len(rows)), dtype=dtype)
    for i in range(n - 1, -1, -1):
        suf[i] = suf[i + 1] + ext[:, i]
    cols = [A[:, i] for i in range(n)]
    posmask = [col > 0 for col in cols]
    negmask = [col < 0 for col in cols]
    zeromask = [col == 0 for col in cols]

    found: list[tuple[int, ...]] = []
    nodes = 0
    point = [0] * n

    def dfs(i: int, partial) -> bool:
        nonlocal nodes
        if i == n:
            if len(congr):
                vals = M @ np.array(point, dtype=dtype) + mc
                if np.any(vals % mods):
                    return True
            out = [0] * n
            for j, pj in enumerate(perm):
                out[pj] = point[j]
            found.append(tuple(out))
            return True
        rest = partial + suf[i + 1]
        if np.any(rest[zeromask[i]] < 0):
            return True
        col = cols[i]
        a_lo, a_hi = int(plo[i]), int(phi[i])
        pm, nm = posmask[i], negmask[i]
        if pm.any():
            a_lo = max(a_lo, int((-(rest[pm] // col[pm])).max()))
        if nm.any():
            a_hi = min(a_hi, int((rest[nm] // (-col[nm])).min()))
        for v in range(a_lo, a_hi + 1):
            nodes += 1
            if nodes > max_nodes:
                return False
            point[i] = v
            if not dfs(i + 1, partial + col * v):
                return False
        return True

    complete = dfs(0, c0.copy())
    found = sorted(set(found))
    if not complete:
        return SolutionSet(list(names), found, ABORTED, nodes=nodes)
    status = FEASIBLE if found else INFEASIBLE
    witness = None if found else "no integer point satisfies the congruences and bounds"
    return SolutionSet(list(names), found, status, witness=witness, nodes=nodes)


def brute_force(s: IntegerLinearSystem, box: Sequence[tuple[int, int]]) -> list[tuple[int, ...]]:
    """Scan every integer point of ``box`` (one range per variable)."""
    out = []
    for point in itertools.product(*(range(a, b + 1) for a, b in box)):
        if s.satisfied_by(dict(zip(s.variables, point))):
            out.append(point)
    return out


# --- independent verification ----------------------------------------------

def first_violation(s: IntegerLinearSystem, values: Mapping[str, int]) -> str | None:
    """Recompute every constraint of the originating problem from scratch.

    Uses ``s.origin`` (which must provide ``direct_violation(values)``) so the
    check never reuses the linear forms the solver worked with.  Returns a
    description of the first failed requirement, or ``None``.
    """
    unknown = set(values) - set(s.variables)
    if unknown:
        return f"unknown classes {sorted(unknown)}"
    full = {v: int(values.get(v, 0)) for v in s.variables}
    if s.origin is None:
        if s.satisfied_by(full):
            return None
        return "system constraints not satisfied"
    return s.origin.direct_violation(full)


def check_solution(s: IntegerLinearSystem, values: Mapping[str, int]) -> bool:
    return first_violation(s, values) is None
