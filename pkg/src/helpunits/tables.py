"""Character table data model, JSON reader/writer and validation.

A table file holds either an ordinary table (characteristic 0) or a p-modular
Brauer table restricted to the p-regular classes.  Class and character names
follow GAP's conventions (``2a``, ``X.2``).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import gcd
from pathlib import Path
from typing import Iterable, Sequence

from .arith import Cyclotomic, CyclotomicSyntaxError, factorize, parse_cyclotomic

__all__ = [
    "Character",
    "CharacterTable",
    "ConjugacyClass",
    "TableError",
    "bundled_tables",
    "classes_dividing",
    "dump_table",
    "load_table",
    "load_tables",
    "parse_table",
    "usable_tables",
]

DATA_DIR = Path(__file__).parent / "data"


class TableError(ValueError):
    """A table document is malformed or violates a table invariant."""


@dataclass(frozen=True)
class ConjugacyClass:
    name: str
    element_order: int
    centralizer_order: int


@dataclass(frozen=True)
class Character:
    name: str
    values: tuple[Cyclotomic, ...]

    @property
    def degree(self) -> int:
        return int(self.values[0].to_rational())


@dataclass(frozen=True)
class CharacterTable:
    group_name: str
    group_order: int
    exponent: int
    characteristic: int
    classes: tuple[ConjugacyClass, ...]
    power_maps: dict[int, tuple[int, ...]]
    characters: tuple[Character, ...]
    _index: dict[str, int] = field(default_factory=dict, compare=False, repr=False)
    # memo for integer traces, filled by the constraint builder
    _traces: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        self._index.update({c.name: i for i, c in enumerate(self.classes)})

    @property
    def label(self) -> str:
        if self.characteristic == 0:
            return f"{self.group_name} ordinary"
        return f"{self.group_name} mod {self.characteristic}"

    def class_index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"class {name!r} not in {self.label} table") from None

    def has_class(self, name: str) -> bool:
        return name in self._index

    def character(self, name: str) -> Character:
        for chi in self.characters:
            if chi.name == name:
                return chi
        raise KeyError(f"character {name!r} not in {self.label} table")

    def value(self, chi: Character, class_name: str) -> Cyclotomic:
        return chi.values[self.class_index(class_name)]

    def class_by_name(self, name: str) -> ConjugacyClass:
        return self.classes[self.class_index(name)]

    def element_orders(self) -> list[int]:
        return [c.element_order for c in self.classes]


def _fail(where: str, msg: str):
    raise TableError(f"{where}: {msg}")


def parse_table(document: str | dict, source: str = "<table>") -> CharacterTable:
    """Build and validate a table from a JSON string or decoded mapping."""
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            _fail(source, f"invalid JSON ({exc})")
    if not isinstance(document, dict):
        _fail(source, "top level must be an object")
    for key in ("group", "order", "exponent", "characteristic", "classes",
                "power_maps", "characters"):
        if key not in document:
            _fail(source, f"missing field {key!r}")

    order = document["order"]
    exponent = document["exponent"]
    charac = document["characteristic"]
    for key, val in (("order", order), ("exponent", exponent)):
        if not isinstance(val, int) or val < 1:
            _fail(source, f"{key} must be a positive integer")
    if not isinstance(charac, int) or charac < 0:
        _fail(source, "characteristic must be 0 or a prime")
    if charac and (len(factorize(charac)) != 1 or factorize(charac)[0][1] != 1):
        _fail(source, f"characteristic {charac} is not prime")
    if charac and order % charac:
        _fail(source, f"characteristic {charac} does not divide the group order")
    if order % exponent:
        _fail(source, "exponent does not divide the group order")

    classes = []
    for i, c in enumerate(document["classes"]):
        try:
            cls = ConjugacyClass(str(c["name"]), int(c["element_order"]),
                                 int(c["centralizer_order"]))
        except (KeyError, TypeError, ValueError):
            _fail(source, f"class #{i} is malformed")
        classes.append(cls)
    if not classes:
        _fail(source, "no classes")
    names = [c.name for c in classes]
    if len(set(names)) != len(names):
        _fail(source, "duplicate class names")
    for i, c in enumerate(classes):
        where = f"{source}: class {c.name}"
        if c.element_order < 1 or exponent % c.element_order:
            raise TableError(f"{where}: element order {c.element_order} "
                             f"does not divide the exponent")
        if c.centralizer_order < 1 or order % c.centralizer_order:
            raise TableError(f"{where}: centralizer order does not divide the group order")
        if c.centralizer_order % c.element_order:
            raise TableError(f"{where}: element order does not divide the centralizer order")
        if (c.element_order == 1) != (i == 0):
            raise TableError(f"{where}: the identity class must be first and unique")
        if charac and c.element_order % charac == 0:
            raise TableError(f"{where}: class is not {charac}-regular")
    if charac == 0 and sum(order // c.centralizer_order for c in classes) != order:
        _fail(source, "class sizes do not sum to the group order")

    raw_maps = document["power_maps"]
    if not isinstance(raw_maps, dict):
        _fail(source, "power_maps must be an object")
    power_maps: dict[int, tuple[int, ...]] = {}
    for key, image in raw_maps.items():
        try:
            q = int(key)
        except ValueError:
            _fail(source, f"power map key {key!r} is not an integer")
        if not isinstance(image, list) or len(image) != len(classes):
            _fail(source, f"power map {q} must list one image per class")
        power_maps[q] = tuple(int(x) for x in image)
    for q, _ in factorize(exponent):
        if q not in power_maps:
            _fail(source, f"missing power map for prime {q}")
    for q, image in sorted(power_maps.items()):
        for i, j in enumerate(image):
            if not 0 <= j < len(classes):
                _fail(source, f"power map {q}: class {names[i]} maps outside the table")
            want = classes[i].element_order // gcd(classes[i].element_order, q)
            if classes[j].element_order != want:
                _fail(source, f"power map {q}: class {names[i]} maps to {names[j]} "
                              f"of order {classes[j].element_order}, expected {want}")

    characters = []
    seen = set()
    for i, ch in enumerate(document["characters"]):
        name = str(ch.get("name", f"X.{i + 1}")) if isinstance(ch, dict) else None
        if name is None or "values" not in ch:
            _fail(source, f"character #{i} is malformed")
        where = f"{source}: character {name}"
        if name in seen:
            raise TableError(f"{where}: duplicate character name")
        seen.add(name)
        raw = ch["values"]
        if not isinstance(raw, list) or len(raw) != len(classes):
            got = len(raw) if isinstance(raw, list) else "no"
            raise TableError(f"{where}: has {got} values for {len(classes)} classes")
        values = []
        for cls, text in zip(classes, raw):
            try:
                v = parse_cyclotomic(str(text))
            except CyclotomicSyntaxError as exc:
                raise TableError(f"{where}, class {cls.name}: {exc}") from None
            if cls.element_order % v.conductor:
                raise TableError(f"{where}, class {cls.name}: value {v} has conductor "
                                 f"{v.conductor} not dividing {cls.element_order}")
            values.append(v)
        if not values[0].is_integral_rational() or values[0].to_rational() <= 0:
            raise TableError(f"{where}: degree {values[0]} is not a positive integer")
        characters.append(Character(name, tuple(values)))
    if not characters:
        _fail(source, "no characters")
    if charac == 0 and sum(c.degree ** 2 for c in characters) != order:
        _fail(source, "sum of squared degrees differs from the group order")

    return CharacterTable(
        group_name=str(document["group"]),
        group_order=order,
        exponent=exponent,
        characteristic=charac,
        classes=tuple(classes),
        power_maps=power_maps,
        characters=tuple(characters),
    )


def table_to_document(t: CharacterTable) -> dict:
    return {
        "group": t.group_name,
        "order": t.group_order,
        "exponent": t.exponent,
        "characteristic": t.characteristic,
        "classes": [
            {"name": c.name, "element_order": c.element_order,
             "centralizer_order": c.centralizer_order}
            for c in t.classes
        ],
        "power_maps": {str(q): list(img) for q, img in sorted(t.power_maps.items())},
        "characters": [
            {"name": chi.name, "values": [str(v) for v in chi.values]}
            for chi in t.characters
        ],
    }


def dump_table(t: CharacterTable) -> str:
    return json.dumps(table_to_document(t), indent=1) + "\n"


def load_table(path: str | Path) -> CharacterTable:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise TableError(f"{path}: {exc.strerror}") from None
    return parse_table(text, source=str(path))


def load_tables(directory: str | Path) -> list[CharacterTable]:
    """Load every ``*.json`` table in a directory, ordinary table first."""
    directory = Path(directory)
    if not directory.is_dir():
        raise TableError(f"{directory}: not a directory")
    tables = [load_table(p) for p in sorted(directory.glob("*.json"))]
    if not tables:
        raise TableError(f"{directory}: no table files")
    tables.sort(key=lambda t: t.characteristic)
    if tables[0].characteristic != 0:
        raise TableError(f"{directory}: no ordinary table")
    if sum(1 for t in tables if t.characteristic == 0) > 1:
        raise TableError(f"{directory}: more than one ordinary table")
    groups = {t.group_name for t in tables}
    if len(groups) > 1:
        raise TableError(f"{directory}: tables of different groups {sorted(groups)}")
    return tables


def bundled_tables(group: str = "M12") -> list[CharacterTable]:
    return load_tables(DATA_DIR / group)


def classes_dividing(t: CharacterTable, k: int) -> list[str]:
    """Non-identity classes whose element order divides ``k``.

    These are the only classes that can carry a nonzero partial augmentation
    for a torsion unit of order ``k``: a class containing a prime that does
    not divide ``k``, or a p-part larger than that of ``k``, is excluded.
    """
    return [c.name for c in t.classes if c.element_order > 1 and k % c.element_order == 0]


def usable_tables(tables: Iterable[CharacterTable], k: int) -> list[CharacterTable]:
    """Ordinary table plus every Brauer table whose prime is coprime to ``k``."""
    return [t for t in tables if t.characteristic == 0 or k % t.characteristic]


def ordinary_table(tables: Sequence[CharacterTable]) -> CharacterTable:
    for t in tables:
        if t.characteristic == 0:
            return t
    raise TableError("no ordinary table")
