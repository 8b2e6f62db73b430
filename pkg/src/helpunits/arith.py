"""Exact rational and cyclotomic arithmetic.

Cyclotomic numbers are stored over the Zumbroich basis of Q(zeta_n), the
basis used by GAP and the ATLAS data, so table values import verbatim and
equality is plain comparison of coefficient maps.  Every value is rewritten
into its smallest cyclotomic field on construction.
"""
from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from math import gcd
from numbers import Rational

__all__ = [
    "Cyclotomic",
    "CyclotomicSyntaxError",
    "E",
    "factorize",
    "nt_moebius",
    "nt_phi",
    "parse_cyclotomic",
    "root_trace",
]


@lru_cache(maxsize=None)
def factorize(n: int) -> tuple[tuple[int, int], ...]:
    """Prime factorization of ``n`` as ``((p, e), ...)`` with p ascending."""
    if n < 1:
        raise ValueError(f"cannot factor {n}")
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def nt_phi(n: int) -> int:
    """Euler's totient."""
    result = n
    for p, _ in factorize(n):
        result = result // p * (p - 1)
    return result


def nt_moebius(n: int) -> int:
    """Moebius function."""
    fac = factorize(n)
    if any(e > 1 for _, e in fac):
        return 0
    return -1 if len(fac) % 2 else 1


def root_trace(n: int, m: int) -> Fraction:
    """Trace of zeta_n**m from Q(zeta_n) down to Q."""
    if n < 1:
        raise ValueError("conductor must be positive")
    g = gcd(m % n, n)
    order = n // g
    return Fraction(nt_moebius(order) * nt_phi(n) // nt_phi(order))


# --- Zumbroich basis -------------------------------------------------------

def _coordinate(n: int, p: int, v: int, e: int) -> int:
    # p-part coordinate of the exponent under Z/n = prod Z/p^v
    q = p**v
    return e * pow(n // q, -1, q) % q


def _balanced_low(x: int, p: int, v: int) -> int:
    # the part of x written with balanced digits in positions p^0 .. p^(v-2)
    m = p ** (v - 1)
    low = x % m
    if low > (m - 1) // 2:
        low -= m
    return low


@lru_cache(maxsize=None)
def zumbroich_exponents(n: int) -> frozenset[int]:
    """Exponents i with zeta_n**i in the Zumbroich basis of Q(zeta_n)/Q."""
    return frozenset(e for e in range(n) if _in_basis(n, e))


def _in_basis(n: int, e: int) -> bool:
    for p, v in factorize(n):
        x = _coordinate(n, p, v, e)
        if p == 2:
            if x >= 2 ** (v - 1):
                return False
        else:
            top = (x - _balanced_low(x, p, v)) // p ** (v - 1) % p
            if top == 0:
                return False
    return True


@lru_cache(maxsize=None)
def _expand(n: int, e: int) -> tuple[tuple[int, int], ...]:
    """Write zeta_n**e as a signed sum of Zumbroich basis elements.

    ``n`` must not be 2 mod 4.  Returns ``((exponent, multiplicity), ...)``.
    """
    terms = {e % n: 1}
    for p, v in factorize(n):
        step = n // p
        nxt: dict[int, int] = {}
        for ex, c in terms.items():
            x = _coordinate(n, p, v, ex)
            if p == 2:
                if x >= 2 ** (v - 1):
                    # zeta^(n/2) = -1
                    k = (ex - step) % n
                    nxt[k] = nxt.get(k, 0) - c
                else:
                    nxt[ex] = nxt.get(ex, 0) + c
            else:
                top = (x - _balanced_low(x, p, v)) // p ** (v - 1) % p
                if top == 0:
                    for t in range(1, p):
                        k = (ex + t * step) % n
                        nxt[k] = nxt.get(k, 0) - c
                else:
                    nxt[ex] = nxt.get(ex, 0) + c
        terms = {k: c for k, c in nxt.items() if c}
    return tuple(sorted(terms.items()))


def _normalize_root(n: int, e: int) -> tuple[int, int, int]:
    # zeta_n**e with n = 2 mod 4 equals (-1)**e * zeta_(n/2)**(e*(n/2+1)/2)
    if n % 4 == 2:
        m = n // 2
        sign = -1 if e % 2 else 1
        return m, e * (m + 1) // 2 % m if m > 1 else 0, sign
    return n, e % n, 1


def _minimize(n: int, coeffs: dict[int, Fraction]) -> tuple[int, dict[int, Fraction]]:
    """Move a basis expansion into the smallest field that contains it."""
    changed = True
    while changed and n > 1:
        changed = False
        if not coeffs:
            return 1, {}
        for p, v in factorize(n):
            if p == 2 or v >= 2:
                div = 4 if (p == 2 and v == 2) else p
                if all(e % div == 0 for e in coeffs):
                    n //= div
                    coeffs = {e // div: c for e, c in coeffs.items()}
                    changed = True
                    break
                continue
            # squarefree odd prime: coefficients must be constant on fibres
            step = n // p
            inv = pow(step, -1, p)
            fibres: dict[int, list[tuple[int, Fraction]]] = {}
            for e, c in coeffs.items():
                x = e * inv % p
                fibres.setdefault((e - x * step) % n, []).append((x, c))
            ok = all(
                len(members) == p - 1 and len({c for _, c in members}) == 1
                for members in fibres.values()
            )
            if ok:
                n //= p
                coeffs = {e0 // p: -members[0][1] for e0, members in fibres.items()}
                changed = True
                break
    return n, {e: c for e, c in coeffs.items() if c}


# --- the number type -------------------------------------------------------

class Cyclotomic:
    """An element of some Q(zeta_n), immutable.

    >>> E(3) + E(3)**2
    Cyclotomic('-1')
    >>> (E(8) * E(8)).conductor
    4
    """

    __slots__ = ("_n", "_coeffs", "_hash")

    def __init__(self, value: int | Fraction | "Cyclotomic" = 0):
        if isinstance(value, Cyclotomic):
            self._n, self._coeffs = value._n, value._coeffs
        else:
            q = Fraction(value)
            self._n = 1
            self._coeffs = ((0, q),) if q else ()
        self._hash = None

    @classmethod
    def _raw(cls, n: int, coeffs: dict[int, Fraction]) -> "Cyclotomic":
        obj = cls.__new__(cls)
        obj._n = n
        obj._coeffs = tuple(sorted((e, c) for e, c in coeffs.items() if c))
        obj._hash = None
        return obj

    @classmethod
    def from_terms(cls, n: int, terms: dict[int, Fraction | int] | list) -> "Cyclotomic":
        """Build sum(c * zeta_n**e) from arbitrary exponents."""
        if n < 1:
            raise ValueError("conductor must be positive")
        items = terms.items() if isinstance(terms, dict) else terms
        n0 = n
        acc: dict[int, Fraction] = {}
        for e, c in items:
            c = Fraction(c)
            if not c:
                continue
            m, ex, sign = _normalize_root(n0, e)
            if m == 1:
                acc[("one",)] = acc.get(("one",), Fraction(0)) + sign * c
                continue
            for k, mult in _expand(m, ex):
                key = (m, k)
                acc[key] = acc.get(key, Fraction(0)) + sign * mult * c
        return cls._collect(acc)

    @classmethod
    def _collect(cls, acc: dict) -> "Cyclotomic":
        # acc keys: ("one",) or (conductor, basis exponent); unify in the lcm
        big = 1
        for key in acc:
            if key != ("one",):
                big = big * key[0] // gcd(big, key[0])
        out: dict[int, Fraction] = {}
        for key, c in acc.items():
            if not c:
                continue
            if key == ("one",):
                pieces = _expand(big, 0) if big > 1 else ((0, 1),)
            elif key[0] == big:
                pieces = ((key[1], 1),)
            else:
                pieces = _expand(big, key[1] * (big // key[0]))
            for k, mult in pieces:
                out[k] = out.get(k, Fraction(0)) + mult * c
        out = {k: c for k, c in out.items() if c}
        n, out = _minimize(big, out)
        return cls._raw(n, out)

    # -- accessors --

    @property
    def conductor(self) -> int:
        return self._n

    @property
    def coefficients(self) -> dict[int, Fraction]:
        """Map from Zumbroich basis exponent to rational coefficient."""
        return dict(self._coeffs)

    def is_rational(self) -> bool:
        return self._n == 1

    def to_rational(self) -> Fraction:
        if self._n != 1:
            raise ValueError(f"{self} is not rational")
        return self._coeffs[0][1] if self._coeffs else Fraction(0)

    def is_integral_rational(self) -> bool:
        return self._n == 1 and self.to_rational().denominator == 1

    # -- arithmetic --

    @staticmethod
    def _coerce(other) -> "Cyclotomic | None":
        if isinstance(other, Cyclotomic):
            return other
        if isinstance(other, (int, Rational)):
            return Cyclotomic(Fraction(other))
        return None

    def _keyed(self) -> dict:
        if self._n == 1:
            return {("one",): c for _, c in self._coeffs}
        return {(self._n, e): c for e, c in self._coeffs}

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        acc = self._keyed()
        for k, c in other._keyed().items():
            acc[k] = acc.get(k, Fraction(0)) + c
        return Cyclotomic._collect(acc)

    __radd__ = __add__

    def __neg__(self):
        return Cyclotomic._raw(self._n, {e: -c for e, c in self._coeffs})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if other._n == 1:
            q = other.to_rational()
            if not q:
                return Cyclotomic(0)
            return Cyclotomic._raw(self._n, {e: c * q for e, c in self._coeffs})
        if self._n == 1:
            return other * self
        n = self._n * other._n // gcd(self._n, other._n)
        sa, sb = n // self._n, n // other._n
        terms: dict[int, Fraction] = {}
        for ea, ca in self._coeffs:
            for eb, cb in other._coeffs:
                k = (ea * sa + eb * sb) % n
                terms[k] = terms.get(k, Fraction(0)) + ca * cb
        return Cyclotomic.from_terms(n, terms)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Rational)):
            q = Fraction(other)
            return Cyclotomic._raw(self._n, {e: c / q for e, c in self._coeffs})
        return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        result = Cyclotomic(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self._n == other._n and self._coeffs == other._coeffs

    def __hash__(self):
        if self._hash is None:
            if self._n == 1:
                self._hash = hash(self.to_rational())
            else:
                self._hash = hash((self._n, self._coeffs))
        return self._hash

    def __bool__(self):
        return bool(self._coeffs)

    # -- Galois theory --

    def galois(self, j: int) -> "Cyclotomic":
        """Apply the field automorphism zeta -> zeta**j."""
        if gcd(j, self._n) != 1:
            raise ValueError(f"exponent {j} is not coprime to conductor {self._n}")
        if self._n == 1:
            return self
        return Cyclotomic.from_terms(self._n, {e * j % self._n: c for e, c in self._coeffs})

    def conjugate(self) -> "Cyclotomic":
        return self.galois(-1)

    def galois_conjugates(self) -> list["Cyclotomic"]:
        """All images under Gal(Q(zeta_n)/Q), one per unit residue mod n."""
        n = self._n
        return [self.galois(j) for j in range(1, n + 1) if gcd(j, n) == 1]

    def trace(self, field: int | None = None) -> Fraction:
        """Trace to Q, taken over Q(zeta_field) (default: the own field)."""
        n = self._n
        own = Fraction(0)
        for e, c in self._coeffs:
            own += c * root_trace(n, e)
        if field is None:
            return own
        big = field // 2 if field % 4 == 2 else field
        if big % n:
            raise ValueError(f"Q(zeta_{n}) is not contained in Q(zeta_{field})")
        return own * (nt_phi(big) // nt_phi(n))

    # -- text --

    def __str__(self):
        if self._n == 1:
            return str(self.to_rational())
        parts = []
        for e, c in self._coeffs:
            atom = "1" if e == 0 else (f"E({self._n})" if e == 1 else f"E({self._n})^{e}")
            if e == 0:
                body = str(abs(c))
            elif abs(c) == 1:
                body = atom
            else:
                body = f"{abs(c)}*{atom}"
            parts.append(("-" if c < 0 else "+", body))
        text = "".join(s + b for s, b in parts)
        return text[1:] if text.startswith("+") else text

    def __repr__(self):
        return f"Cyclotomic({str(self)!r})"


def E(n: int, e: int = 1) -> Cyclotomic:
    """The root of unity exp(2*pi*i*e/n), GAP's ``E(n)^e``."""
    return Cyclotomic.from_terms(n, {e: 1})


# --- parser ----------------------------------------------------------------

class CyclotomicSyntaxError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        super().__init__(f"{message} at position {pos} in {text!r}")
        self.text = text
        self.pos = pos


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<op>[-+*/^()])|(?P<E>E))")


def parse_cyclotomic(text: str) -> Cyclotomic:
    """Parse GAP-style expressions such as ``-1/2+1/2*E(11)+E(11)^3``."""
    tokens: list[tuple[str, str, int]] = []
    pos = 0
    stripped = text.rstrip()
    while pos < len(stripped):
        m = _TOKEN.match(stripped, pos)
        if not m:
            raise CyclotomicSyntaxError("unexpected character", text, pos)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(stripped)))
    i = 0

    def peek():
        return tokens[i]

    def take(kind, value=None):
        nonlocal i
        k, v, p = tokens[i]
        if k != kind or (value is not None and v != value):
            want = value if value is not None else kind
            raise CyclotomicSyntaxError(f"expected {want!r}", text, p)
        i += 1
        return v

    def coef() -> Fraction:
        num = int(take("num"))
        if peek()[:2] == ("op", "/"):
            take("op", "/")
            p = peek()[2]
            den = int(take("num"))
            if den == 0:
                raise CyclotomicSyntaxError("zero denominator", text, p)
            return Fraction(num, den)
        return Fraction(num)

    def atom() -> tuple[int, int]:
        take("E")
        take("op", "(")
        p = peek()[2]
        n = int(take("num"))
        take("op", ")")
        if n < 1:
            raise CyclotomicSyntaxError("conductor must be positive", text, p)
        e = 1
        if peek()[:2] == ("op", "^"):
            take("op", "^")
            p = peek()[2]
            e = int(take("num"))
            if e >= n:
                raise CyclotomicSyntaxError(
                    f"exponent {e} out of range for E({n})", text, p)
        return n, e

    acc = Cyclotomic(0)
    first = True
    while True:
        k, v, p = peek()
        sign = 1
        if k == "op" and v in "+-":
            take("op")
            sign = -1 if v == "-" else 1
        elif not first:
            break
        elif k == "end":
            raise CyclotomicSyntaxError("empty expression", text, p)
        first = False
        if peek()[0] == "E":
            n, e = atom()
            acc = acc + sign * E(n, e)
        else:
            c = coef()
            if peek()[:2] == ("op", "*"):
                take("op", "*")
                n, e = atom()
                acc = acc + sign * c * E(n, e)
            else:
                acc = acc + sign * c
        if peek()[0] == "end":
            break
    k, v, p = peek()
    if k != "end":
        raise CyclotomicSyntaxError(f"unexpected {v!r}", text, p)
    return acc
