"""Symbols of the Ostrogradski jet and phase spaces."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field


class Kind(enum.IntEnum):
    # value order is the canonical symbol order
    COORD = 0
    VEL = 1
    ACC = 2
    JET = 3
    P = 4
    PI = 5
    TIME = 6
    ENERGY = 7
    PARAM = 8


MOMENTUM_KINDS = (Kind.P, Kind.PI)
JET_KINDS = (Kind.COORD, Kind.VEL, Kind.ACC, Kind.JET)


@dataclass(frozen=True)
class Symbol:
    """A named symbol.

    ``name`` is the base identifier: for every kind derived from a
    coordinate (velocity, acceleration, jets, momenta) it is the coordinate
    name, and the kind decides how the symbol is displayed.  ``order`` is
    only meaningful for ``Kind.JET`` (time-derivative order >= 3).
    """

    name: str
    kind: Kind
    index: int = 0
    order: int = 0
    _key: tuple = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.kind == Kind.JET and self.order < 3:
            raise ValueError("jet symbols need order >= 3")
        object.__setattr__(self, "_key", (int(self.kind), self.index, self.order, self.name))

    def __lt__(self, other: Symbol) -> bool:
        return self._key < other._key

    @property
    def sort_key(self) -> tuple:
        return self._key

    @property
    def derivative_order(self) -> int:
        """Number of time derivatives on the underlying coordinate (-1 if n/a)."""
        return {Kind.COORD: 0, Kind.VEL: 1, Kind.ACC: 2}.get(
            self.kind, self.order if self.kind == Kind.JET else -1)

    @property
    def is_momentum(self) -> bool:
        return self.kind in MOMENTUM_KINDS

    @property
    def text(self) -> str:
        k = self.kind
        if k == Kind.COORD or k in (Kind.TIME, Kind.ENERGY, Kind.PARAM):
            return self.name
        if k == Kind.VEL:
            return self.name + "'"
        if k == Kind.ACC:
            return self.name + "''"
        if k == Kind.JET:
            return self.name + "'" * self.order
        if k == Kind.P:
            return "p_" + self.name
        return "pi_" + self.name

    @property
    def latex(self) -> str:
        k = self.kind
        base = _latex_name(self.name)
        if k == Kind.COORD or k == Kind.PARAM:
            return base
        if k == Kind.VEL:
            return r"\bar{%s}" % base
        if k == Kind.ACC:
            return r"\dot{\bar{%s}}" % base
        if k == Kind.JET:
            return r"%s^{(%d)}" % (base, self.order)
        if k == Kind.P:
            return r"p_{%s}" % base
        if k == Kind.PI:
            return r"\pi_{%s}" % base
        if k == Kind.TIME:
            return "t"
        return "P_{0}"

    def __str__(self) -> str:
        return self.text

    def __repr__(self) -> str:
        return f"Symbol({self.text!r})"


def _latex_name(name: str) -> str:
    head = name.rstrip("0123456789")
    tail = name[len(head):]
    if tail and head:
        return f"{head}_{{{tail}}}"
    return name


def coordinate(name: str, i: int) -> Symbol:
    return Symbol(name, Kind.COORD, i)


def velocity(name: str, i: int) -> Symbol:
    return Symbol(name, Kind.VEL, i)


def acceleration(name: str, i: int) -> Symbol:
    return Symbol(name, Kind.ACC, i)


def jet(name: str, i: int, order: int) -> Symbol:
    if order <= 2:
        return [coordinate, velocity, acceleration][order](name, i)
    return Symbol(name, Kind.JET, i, order)


def momentum_p(name: str, i: int) -> Symbol:
    return Symbol(name, Kind.P, i)


def momentum_pi(name: str, i: int) -> Symbol:
    return Symbol(name, Kind.PI, i)


def parameter(name: str) -> Symbol:
    return Symbol(name, Kind.PARAM)


TIME = Symbol("t", Kind.TIME)
ENERGY = Symbol("P0", Kind.ENERGY)


def promote(s: Symbol) -> Symbol:
    """Time derivative of a jet symbol (q -> q' -> q'' -> q''' ...)."""
    d = s.derivative_order
    if d < 0:
        raise ValueError(f"{s} has no jet promotion")
    return jet(s.name, s.index, d + 1)


class SymbolTable(dict):
    """Mapping from DSL identifier text to :class:`Symbol`."""

    @classmethod
    def for_coordinates(cls, names, params=(), max_order: int = 2):
        tab = cls()
        for i, name in enumerate(names, start=1):
            for order in range(max_order + 1):
                s = jet(name, i, order)
                tab[s.text] = s
            for s in (momentum_p(name, i), momentum_pi(name, i)):
                tab[s.text] = s
        tab[TIME.text] = TIME
        tab[ENERGY.text] = ENERGY
        for p in params:
            tab[p] = parameter(p)
        return tab

    def add(self, s: Symbol):
        self[s.text] = s
        return s
