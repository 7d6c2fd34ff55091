"""Symmetric matrices whose entries are linear in named real parameters.

Indices in this module are 1-based, matching the way Hamiltonians are
written down (``entry(1, 2)`` is the first off-diagonal element).  Only the
upper triangle is stored; the lower triangle is its mirror by construction.

Coefficients are kept as exact :class:`~fractions.Fraction` values so that
model files round-trip losslessly and structural zeros stay exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .arith import as_fraction, get_context, to_number
from .errors import ModelError

CONSTANT = "1"

Index = tuple[int, int]


@dataclass(frozen=True)
class ParamTerm:
    """``coefficient * parameter``; the parameter ``"1"`` is the constant term."""

    coefficient: Fraction
    parameter: str = CONSTANT

    def __post_init__(self):
        try:
            coeff = as_fraction(self.coefficient)
        except (TypeError, ValueError) as exc:
            raise ModelError(f"bad coefficient {self.coefficient!r}: {exc}") from exc
        object.__setattr__(self, "coefficient", coeff)
        if not isinstance(self.parameter, str) or not self.parameter:
            raise ModelError(f"parameter name must be a non-empty string, got {self.parameter!r}")


def _terms(raw: Iterable) -> tuple[ParamTerm, ...]:
    out = []
    for t in raw:
        if isinstance(t, ParamTerm):
            out.append(t)
        elif isinstance(t, tuple) and len(t) == 2:
            out.append(ParamTerm(*t))
        else:
            # bare number: constant term
            out.append(ParamTerm(t))
    return tuple(out)


@dataclass(frozen=True, eq=False)
class ParametricMatrix:
    """An ``n x n`` real symmetric matrix, linear in ``params``.

    Args:
        n: dimension.
        params: declared parameter names (``"1"`` is implicit and reserved).
        entries: map ``(i, j) -> terms``.  Either triangle may be given; if
            both ``(i, j)`` and ``(j, i)`` appear their term lists must agree.
            Terms may be :class:`ParamTerm`, ``(coefficient, name)`` pairs, or
            bare numbers (constants).
        labels: optional state labels, one per row.
    """

    n: int
    params: tuple[str, ...]
    entries: Mapping[Index, tuple[ParamTerm, ...]] = field(default_factory=dict)
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, int) or self.n < 1:
            raise ModelError(f"dimension must be a positive integer, got {self.n!r}")
        params = tuple(self.params)
        if len(set(params)) != len(params):
            raise ModelError(f"duplicate parameter names in {params}")
        for p in params:
            if not isinstance(p, str) or not p:
                raise ModelError(f"parameter names must be non-empty strings, got {p!r}")
            if p == CONSTANT:
                raise ModelError('"1" is reserved for the constant term')
        known = set(params) | {CONSTANT}
        upper: dict[Index, tuple[ParamTerm, ...]] = {}
        for key, raw in dict(self.entries).items():
            i, j = key
            if not (1 <= i <= self.n and 1 <= j <= self.n):
                raise ModelError(f"entry ({i},{j}) outside 1..{self.n}")
            terms = _terms(raw)
            for t in terms:
                if t.parameter not in known:
                    raise ModelError(f"entry ({i},{j}) uses unknown parameter {t.parameter!r}")
            canon = (min(i, j), max(i, j))
            if canon in upper and upper[canon] != terms:
                raise ModelError(f"asymmetric entry ({i},{j}): mirror has different terms")
            upper[canon] = terms
        labels = self.labels
        if labels is not None:
            labels = tuple(str(s) for s in labels)
            if len(labels) != self.n:
                raise ModelError(f"{len(labels)} labels for dimension {self.n}")
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "entries", dict(sorted(upper.items())))
        object.__setattr__(self, "labels", labels)

    def terms(self, i: int, j: int) -> tuple[ParamTerm, ...]:
        """Term list of entry ``(i, j)`` (1-based); empty means exactly zero."""
        return self.entries.get((min(i, j), max(i, j)), ())

    def __eq__(self, other):
        if not isinstance(other, ParametricMatrix):
            return NotImplemented
        return (
            self.n == other.n
            and self.params == other.params
            and self.entries == other.entries
            and self.labels == other.labels
        )

    def __hash__(self):
        return hash((self.n, self.params, tuple(self.entries.items()), self.labels))

    def same_values(self, other: "ParametricMatrix") -> bool:
        """Entrywise equality after merging like terms and dropping zeros."""
        if self.n != other.n:
            return False
        keys = set(self.entries) | set(other.entries)
        return all(_collect(self.entries.get(k, ())) == _collect(other.entries.get(k, ())) for k in keys)

    def bind(self, values: Mapping[str, Any]) -> "ParametricMatrix":
        """Substitute exact values for some parameters, folding them into constants."""
        values = {k: as_fraction(v) for k, v in values.items()}
        for k in values:
            if k not in self.params:
                raise ModelError(f"cannot bind unknown parameter {k!r}")
        entries = {}
        for key, terms in self.entries.items():
            const = Fraction(0)
            keep = []
            for t in terms:
                if t.parameter == CONSTANT:
                    const += t.coefficient
                elif t.parameter in values:
                    const += t.coefficient * values[t.parameter]
                else:
                    keep.append(t)
            if const or not keep:
                keep.insert(0, ParamTerm(const))
            entries[key] = tuple(keep)
        params = tuple(p for p in self.params if p not in values)
        return ParametricMatrix(self.n, params, entries, self.labels)

    def principal(self, indices: Sequence[int]) -> "ParametricMatrix":
        """Principal submatrix on the given 1-based indices, in the given order."""
        pos = {old: new for new, old in enumerate(indices, start=1)}
        if len(pos) != len(indices):
            raise ModelError("repeated index in principal submatrix selection")
        entries = {}
        for (i, j), terms in self.entries.items():
            if i in pos and j in pos:
                entries[(pos[i], pos[j])] = terms
        labels = None
        if self.labels is not None:
            labels = tuple(self.labels[k - 1] for k in indices)
        return ParametricMatrix(len(indices), self.params, entries, labels)


def _collect(terms) -> dict[str, Fraction]:
    acc: dict[str, Fraction] = {}
    for t in terms:
        acc[t.parameter] = acc.get(t.parameter, Fraction(0)) + t.coefficient
    return {k: v for k, v in acc.items() if v}


@dataclass(frozen=True, eq=False)
class NumericMatrix:
    """Dense symmetric matrix evaluated at ``precision`` decimal digits.

    ``rows`` holds floats for double precision and context mpf values above.
    """

    precision: int
    rows: tuple[tuple[Any, ...], ...]

    @property
    def n(self) -> int:
        return len(self.rows)

    def entry(self, i: int, j: int):
        return self.rows[i - 1][j - 1]

    def to_numpy(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.rows])

    def __eq__(self, other):
        if not isinstance(other, NumericMatrix):
            return NotImplemented
        return self.rows == other.rows

    __hash__ = None

    @classmethod
    def from_rows(cls, rows, precision: int = 16) -> "NumericMatrix":
        """Build from nested sequences, rejecting anything not exactly symmetric."""
        ctx = get_context(precision)
        data = tuple(tuple(to_number(ctx, x) for x in row) for row in rows)
        n = len(data)
        if any(len(r) != n for r in data):
            raise ValueError("matrix must be square")
        for i in range(n):
            for j in range(i):
                if data[i][j] != data[j][i]:
                    raise ValueError(f"matrix is not symmetric at ({i + 1},{j + 1})")
        return cls(precision, data)


def evaluate(m: ParametricMatrix, assignment: Mapping[str, Any] | None = None, precision: int = 16) -> NumericMatrix:
    """Evaluate ``m`` for the given parameter values at ``precision`` digits.

    Each upper-triangle entry is summed once and mirrored, so the result is
    exactly symmetric.  Extra names in ``assignment`` are ignored.

    Raises:
        ModelError: a parameter of ``m`` is missing, or a value is not finite.
    """
    ctx = get_context(precision)
    assignment = assignment or {}
    values = {}
    for p in m.params:
        if p not in assignment:
            raise ModelError(f"no value assigned to parameter {p!r}")
        try:
            values[p] = to_number(ctx, assignment[p])
        except (TypeError, ValueError) as exc:
            raise ModelError(f"parameter {p!r}: {exc}") from exc
    one = ctx.one
    rows = [[ctx.zero] * m.n for _ in range(m.n)]
    for (i, j), terms in m.entries.items():
        acc = ctx.zero
        for t in terms:
            coeff = to_number(ctx, t.coefficient)
            acc += coeff * (one if t.parameter == CONSTANT else values[t.parameter])
        rows[i - 1][j - 1] = acc
        rows[j - 1][i - 1] = acc
    return NumericMatrix(precision, tuple(tuple(r) for r in rows))


# -- model file format -------------------------------------------------------


def _reject_constant(name: str):
    raise ModelError(f"non-finite JSON constant {name}")


def parse_model(text: str) -> ParametricMatrix:
    """Parse the JSON model format.

    Entries with ``i <= j`` are mirrored.  A lower-triangle entry is accepted
    only as a restatement of its mirror; with ``"storage": "full"`` every
    off-diagonal entry must have its mirror declared with identical terms.
    """
    try:
        doc = json.loads(text, parse_float=Decimal, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ModelError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ModelError("model file must be a JSON object")
    unknown = set(doc) - {"n", "params", "labels", "entries", "storage"}
    if unknown:
        raise ModelError(f"unknown keys {sorted(unknown)}")
    n = doc.get("n")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ModelError(f'"n" must be a positive integer, got {n!r}')
    params = doc.get("params", [])
    if not isinstance(params, list) or not all(isinstance(p, str) for p in params):
        raise ModelError('"params" must be a list of strings')
    storage = doc.get("storage", "upper")
    if storage not in ("upper", "full"):
        raise ModelError(f'"storage" must be "upper" or "full", got {storage!r}')
    known = set(params) | {CONSTANT}

    declared: dict[Index, tuple[ParamTerm, ...]] = {}
    for k, item in enumerate(doc.get("entries", [])):
        if not isinstance(item, dict) or set(item) - {"i", "j", "terms"}:
            raise ModelError(f"entry #{k} must be an object with keys i, j, terms")
        i, j = item.get("i"), item.get("j")
        if not all(isinstance(x, int) and not isinstance(x, bool) for x in (i, j)):
            raise ModelError(f"entry #{k}: i and j must be integers")
        if not (1 <= i <= n and 1 <= j <= n):
            raise ModelError(f"entry ({i},{j}) outside 1..{n}")
        if (i, j) in declared:
            raise ModelError(f"duplicate entry ({i},{j})")
        terms = []
        for t in item.get("terms", []):
            if not isinstance(t, dict) or set(t) != {"c", "p"}:
                raise ModelError(f"entry ({i},{j}): terms must be objects with keys c, p")
            c, p = t["c"], t["p"]
            if isinstance(c, bool) or not isinstance(c, (int, Decimal, str)):
                raise ModelError(f"entry ({i},{j}): bad coefficient {c!r}")
            if p not in known:
                raise ModelError(f"entry ({i},{j}) uses unknown parameter {p!r}")
            terms.append(ParamTerm(c, p))
        declared[(i, j)] = tuple(terms)

    entries = {}
    for (i, j), terms in declared.items():
        mirror = declared.get((j, i))
        needs_mirror = i != j and (storage == "full" or i > j)
        if needs_mirror and mirror is None:
            raise ModelError(f"asymmetric entry ({i},{j}): mirror ({j},{i}) not declared")
        if mirror is not None and mirror != terms:
            raise ModelError(f"asymmetric entry ({i},{j}): differs from ({j},{i})")
        entries[(min(i, j), max(i, j))] = terms
    labels = doc.get("labels")
    if labels is not None and (not isinstance(labels, list) or not all(isinstance(s, str) for s in labels)):
        raise ModelError('"labels" must be a list of strings')
    return ParametricMatrix(n, tuple(params), entries, tuple(labels) if labels is not None else None)


def _fraction_json(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    den, k2, k5 = c.denominator, 0, 0
    while den % 2 == 0:
        den //= 2
        k2 += 1
    while den % 5 == 0:
        den //= 5
        k5 += 1
    if den != 1:
        return json.dumps(f"{c.numerator}/{c.denominator}")
    k = max(k2, k5)
    digits = c.numerator * 10**k // c.denominator
    text = format(Decimal(digits).scaleb(-k), "f")
    return text


def serialize_model(m: ParametricMatrix) -> str:
    """Canonical JSON text for ``m`` (upper triangle, sorted, exact decimals)."""
    lines = ["{", f'  "n": {m.n},', f'  "params": {json.dumps(list(m.params))},']
    if m.labels is not None:
        lines.append(f'  "labels": {json.dumps(list(m.labels), ensure_ascii=False)},')
    items = []
    for (i, j), terms in m.entries.items():
        ts = ", ".join(f'{{"c": {_fraction_json(t.coefficient)}, "p": {json.dumps(t.parameter)}}}' for t in terms)
        items.append(f'    {{"i": {i}, "j": {j}, "terms": [{ts}]}}')
    if items:
        lines.append('  "entries": [')
        lines.append(",\n".join(items))
        lines.append("  ]")
    else:
        lines.append('  "entries": []')
    lines.append("}")
    return "\n".join(lines) + "\n"


def load_model(path) -> ParametricMatrix:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())


def save_model(m: ParametricMatrix, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_model(m))


# -- built-in model problems -------------------------------------------------


def _couple(entries, pairs, coeff, param="g"):
    for i, j in pairs:
        entries[(i, j)] = (ParamTerm(coeff, param),)


def build_model_hprime(e1=1, e2=2, c=1) -> ParametricMatrix:
    """Two-level model ``[[E1, C g], [C g, E2]]`` in the coupling ``g``."""
    entries = {(1, 1): (ParamTerm(e1),), (2, 2): (ParamTerm(e2),)}
    _couple(entries, [(1, 2)], c)
    return ParametricMatrix(2, ("g",), entries)


def build_model_h0() -> ParametricMatrix:
    """Six-level reducible model with ``E_j = j`` and unit couplings.

    A fully coupled block on states 1-3, an isolated state 4, and a coupled
    pair 5-6; the only free parameter is ``g``.
    """
    entries = {(j, j): (ParamTerm(j),) for j in range(1, 7)}
    _couple(entries, [(1, 2), (1, 3), (2, 3), (5, 6)], 1)
    return ParametricMatrix(6, ("g",), entries)


def build_model_h(c2=Fraction(3, 10)) -> ParametricMatrix:
    """:func:`build_model_h0` plus ``c2 * g`` couplings at (1,4) and (1,6)."""
    base = build_model_h0()
    entries = dict(base.entries)
    _couple(entries, [(1, 4), (1, 6)], c2)
    return ParametricMatrix(6, ("g",), entries)
