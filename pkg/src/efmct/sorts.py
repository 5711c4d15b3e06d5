"""Attribute sorts and typed variables.

Four sort kinds are supported: Boolean, Real, Natural and named enumerations.
Naturals are integers restricted to be non-negative at the variable level
(the restriction is emitted as a side constraint when talking to a solver).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class SortKind(Enum):
    BOOLEAN = "Bool"
    REAL = "Real"
    NATURAL = "Nat"
    ENUMERATION = "Enumeration"


@dataclass(frozen=True)
class Sort:
    kind: SortKind
    enum_name: str = ""
    enum_values: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.kind is SortKind.ENUMERATION:
            if not self.enum_name:
                raise ValueError("enumeration sort needs a name")
            if not self.enum_values:
                raise ValueError(f"enumeration {self.enum_name!r} has no values")
            if len(set(self.enum_values)) != len(self.enum_values):
                raise ValueError(f"enumeration {self.enum_name!r} has duplicate values")
        elif self.enum_name or self.enum_values:
            raise ValueError("only enumeration sorts carry a name and values")

    @property
    def name(self) -> str:
        if self.kind is SortKind.ENUMERATION:
            return self.enum_name
        return self.kind.value

    def is_numeric(self) -> bool:
        return self.kind in (SortKind.REAL, SortKind.NATURAL)

    def __repr__(self) -> str:
        return f"Sort({self.name})"


BOOLEAN = Sort(SortKind.BOOLEAN)
REAL = Sort(SortKind.REAL)
NATURAL = Sort(SortKind.NATURAL)


def enumeration(name: str, values: tuple[str, ...] | list[str]) -> Sort:
    return Sort(SortKind.ENUMERATION, enum_name=name, enum_values=tuple(values))


@dataclass(frozen=True, order=True)
class Variable:
    """A sorted variable; identity is the (id, sort) pair.

    Ids must be unique within one graph or one rule; two variables with the
    same id but different sorts never coexist in a well-formed value.
    """

    id: str
    sort: Sort

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("variable id must be non-empty")
        if "|" in self.id or "\\" in self.id:
            raise ValueError(f"variable id {self.id!r} contains characters unusable in solver scripts")

    def __repr__(self) -> str:
        return f"{self.id}:{self.sort.name}"
