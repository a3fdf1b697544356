"""Extensional functional-dependency and containment checks."""

from __future__ import annotations

from typing import Iterable, Mapping

from ..errors import SchemaError
from .evaluate import Relation


def _positions(rel: Relation, attrs: Iterable[str]) -> list[int]:
    out = []
    for a in attrs:
        try:
            out.append(rel.attrs.index(a))
        except ValueError:
            raise SchemaError(f"unknown attribute {a!r} (have {rel.attrs})") from None
    return out


def fd_violation(rel: Relation, x: Iterable[str], y: Iterable[str]) -> tuple[tuple, tuple] | None:
    """First pair of rows violating ``x -> y``, or None.

    Rows with a null in ``x`` or ``y`` are ignored.
    """
    xi, yi = _positions(rel, x), _positions(rel, y)
    seen: dict[tuple, tuple] = {}
    for row in rel.sorted_rows():
        kx = tuple(row[i] for i in xi)
        ky = tuple(row[i] for i in yi)
        if None in kx or None in ky:
            continue
        prev = seen.setdefault(kx, row)
        if tuple(prev[i] for i in yi) != ky:
            return prev, row
    return None


def check_fd(rel: Relation, x: Iterable[str], y: Iterable[str]) -> bool:
    """True iff ``x`` functionally determines ``y`` on the non-null rows of ``rel``."""
    return fd_violation(rel, x, y) is None


def containment_witness(a: Relation, b: Relation, col_map: Mapping[str, str]) -> tuple | None:
    """A row of ``a`` that, renamed by ``col_map``, is missing from ``b``."""
    if len(a.attrs) != len(b.attrs) or len(col_map) != len(a.attrs):
        raise SchemaError(f"arity mismatch: {a.attrs} vs {b.attrs}")
    if set(col_map) != set(a.attrs) or set(col_map.values()) != set(b.attrs):
        raise SchemaError(f"column map {dict(col_map)} is not a bijection {a.attrs} -> {b.attrs}")
    order = [a.attrs.index(src) for src in sorted(col_map, key=lambda s: b.attrs.index(col_map[s]))]
    for row in a.sorted_rows():
        renamed = tuple(row[i] for i in order)
        if renamed not in b.rows:
            return row
    return None


def check_containment(a: Relation, b: Relation, col_map: Mapping[str, str] | None = None) -> bool:
    """True iff every tuple of ``a``, renamed by ``col_map``, occurs in ``b``."""
    if col_map is None:
        if len(a.attrs) != len(b.attrs):
            raise SchemaError(f"arity mismatch: {a.attrs} vs {b.attrs}")
        col_map = dict(zip(a.attrs, b.attrs))
    return containment_witness(a, b, col_map) is None
