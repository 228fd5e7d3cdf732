"""Oracle specifications and the plain-text spec-file format.

A spec file holds one ``alpha,c`` pair per line.  Fields may be separated by
a comma or by whitespace, ``#`` starts a comment, blank lines are ignored and
duplicate pairs are dropped while the first-seen order is kept.
"""

from __future__ import annotations

import math
import re
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Union, overload


class SpecError(ValueError):
    """Raised for an invalid oracle specification or spec list."""


class SpecParseError(SpecError):
    """Raised when a spec file cannot be parsed; carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class OracleSpec:
    """An extension oracle with approximation ratio ``alpha`` and per-query cost base ``c``.

    A query with budget ``ell`` costs ``c ** ell``.
    """

    alpha: float
    c: float

    def __post_init__(self) -> None:
        for name in ("alpha", "c"):
            raw = getattr(self, name)
            try:
                value = float(raw)
            except (TypeError, ValueError) as exc:
                raise SpecError(f"{name} must be a number, got {raw!r}") from exc
            if not math.isfinite(value):
                raise SpecError(f"{name} must be finite, got {value!r}")
            if value < 1.0:
                raise SpecError(f"{name} must be >= 1, got {value!r}")
            object.__setattr__(self, name, value)

    def as_tuple(self) -> tuple[float, float]:
        return (self.alpha, self.c)


SpecLike = Union[OracleSpec, tuple[float, float], Sequence[float]]


class SpecList(Sequence[OracleSpec]):
    """A non-empty ordered collection of distinct oracle specifications."""

    __slots__ = ("_entries",)

    def __init__(self, entries: Iterable[SpecLike]):
        seen: set[tuple[float, float]] = set()
        kept: list[OracleSpec] = []
        for item in entries:
            spec = item if isinstance(item, OracleSpec) else OracleSpec(*item)
            key = spec.as_tuple()
            if key in seen:
                continue
            seen.add(key)
            kept.append(spec)
        if not kept:
            raise SpecError("a spec list needs at least one entry")
        self._entries: tuple[OracleSpec, ...] = tuple(kept)

    @classmethod
    def of(cls, value: Union["SpecList", SpecLike, Iterable[SpecLike]]) -> "SpecList":
        """Coerce a spec list, a single spec, a single pair or an iterable of pairs."""
        if isinstance(value, SpecList):
            return value
        if isinstance(value, OracleSpec):
            return cls([value])
        if (
            isinstance(value, tuple)
            and len(value) == 2
            and all(isinstance(v, (int, float)) for v in value)
        ):
            return cls([value])
        return cls(value)  # type: ignore[arg-type]

    @property
    def entries(self) -> tuple[OracleSpec, ...]:
        return self._entries

    @overload
    def __getitem__(self, index: int) -> OracleSpec: ...

    @overload
    def __getitem__(self, index: slice) -> tuple[OracleSpec, ...]: ...

    def __getitem__(self, index):
        return self._entries[index]

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[OracleSpec]:
        return iter(self._entries)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, SpecList):
            return self._entries == other._entries
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._entries)

    def __repr__(self) -> str:
        pairs = ", ".join(f"({s.alpha:g}, {s.c:g})" for s in self._entries)
        return f"SpecList([{pairs}])"


_SEPARATOR = re.compile(r"\s*,\s*|\s+")


def parse_spec_text(text: str) -> SpecList:
    """Parse spec-file contents into a :class:`SpecList`."""
    entries: list[OracleSpec] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = [f for f in _SEPARATOR.split(line) if f]
        if len(fields) != 2:
            raise SpecParseError(lineno, f"expected 'alpha,c', got {raw.strip()!r}")
        try:
            alpha, c = (float(f) for f in fields)
        except ValueError as exc:
            raise SpecParseError(lineno, f"not a number in {raw.strip()!r}") from exc
        try:
            entries.append(OracleSpec(alpha, c))
        except SpecError as exc:
            raise SpecParseError(lineno, str(exc)) from exc
    if not entries:
        raise SpecParseError(0, "no oracle specifications found")
    return SpecList(entries)


def load_spec_file(path: Union[str, Path]) -> SpecList:
    return parse_spec_text(Path(path).read_text(encoding="utf-8"))


def format_spec_list(specs: SpecList) -> str:
    """Serialize to the canonical spec-file form (``repr`` floats, one pair per line)."""
    return "".join(f"{s.alpha!r},{s.c!r}\n" for s in specs)
