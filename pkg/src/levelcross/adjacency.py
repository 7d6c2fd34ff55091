"""Adjacency patterns, walk-count accumulation, and irreducible components.

A matrix is reducible exactly when its adjacency graph is disconnected.  Two
routes are provided and are expected to agree:

* :func:`accumulate` sums ``U + U^2 + ... + U^n`` in exact integers; a zero
  off-diagonal entry proves two states are never coupled.
* :func:`components` computes boolean reachability (Warshall closure), which
  is all a reducibility test needs.

Index sets are 1-based throughout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ModelError
from .parametric import NumericMatrix, ParametricMatrix


@dataclass(frozen=True)
class PatternMatrix:
    """``n x n`` 0/1 matrix of direct couplings (diagonal = self-loops)."""

    bits: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = len(self.bits)
        bits = tuple(tuple(1 if b else 0 for b in row) for row in self.bits)
        if any(len(row) != n for row in bits):
            raise ValueError("pattern matrix must be square")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_rows(cls, rows) -> "PatternMatrix":
        """Accept nested sequences, arrays, or strings such as ``"0110"``."""
        return cls(tuple(tuple(int(ch) for ch in r) if isinstance(r, str) else tuple(r) for r in rows))

    @property
    def n(self) -> int:
        return len(self.bits)

    def __getitem__(self, ij):
        i, j = ij
        return self.bits[i - 1][j - 1]

    def is_symmetric(self) -> bool:
        return all(self.bits[i][j] == self.bits[j][i] for i in range(self.n) for j in range(i))

    def to_numpy(self) -> np.ndarray:
        return np.array(self.bits, dtype=np.int64).reshape(self.n, self.n)

    def restrict(self, indices: Sequence[int]) -> "PatternMatrix":
        """Principal sub-pattern on 1-based ``indices`` (in the given order)."""
        return PatternMatrix(tuple(tuple(self.bits[i - 1][j - 1] for j in indices) for i in indices))

    def edges(self, include_self_loops: bool = False) -> list[tuple[int, int]]:
        """Unordered coupled pairs ``(i, j)`` with ``i < j`` (or ``i == j`` for loops)."""
        out = []
        for i in range(self.n):
            for j in range(i, self.n):
                if self.bits[i][j] and (i != j or include_self_loops):
                    out.append((i + 1, j + 1))
        return out


@dataclass(frozen=True)
class AccumulatedMatrix:
    """Exact walk counts ``sum_{k=1..n} U^k`` (Python integers, unbounded)."""

    counts: tuple[tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return len(self.counts)

    def __getitem__(self, ij):
        i, j = ij
        return self.counts[i - 1][j - 1]

    def zero_pattern(self) -> PatternMatrix:
        return PatternMatrix(tuple(tuple(int(c != 0) for c in row) for row in self.counts))

    def to_json(self) -> str:
        # decimal strings: entries overflow 64 bits already for n = 24
        return json.dumps({"n": self.n, "counts": [[str(c) for c in row] for row in self.counts]})

    @classmethod
    def from_json(cls, text: str) -> "AccumulatedMatrix":
        doc = json.loads(text)
        return cls(tuple(tuple(int(c) for c in row) for row in doc["counts"]))


ComponentPartition = list[list[int]]


def pattern_of(m, zero_tol: float = 0.0) -> PatternMatrix:
    """Replace every nonzero entry by 1.

    For a :class:`ParametricMatrix` the test is structural: an entry counts as
    nonzero if any of its terms has ``|coefficient| > zero_tol``, whatever the
    parameter values.  Numeric input (``NumericMatrix`` or nested sequences)
    is compared entrywise against ``zero_tol``.
    """
    if zero_tol < 0:
        raise ValueError("zero_tol must be nonnegative")
    if isinstance(m, ParametricMatrix):
        bits = [[0] * m.n for _ in range(m.n)]
        for (i, j), terms in m.entries.items():
            if any(abs(t.coefficient) > zero_tol for t in terms):
                bits[i - 1][j - 1] = bits[j - 1][i - 1] = 1
        return PatternMatrix(tuple(map(tuple, bits)))
    rows = m.rows if isinstance(m, NumericMatrix) else m
    return PatternMatrix(tuple(tuple(int(abs(x) > zero_tol) for x in row) for row in rows))


def accumulate(u: PatternMatrix) -> AccumulatedMatrix:
    """Exact ``U + U^2 + ... + U^n`` with arbitrary-size integers."""
    n = u.n
    base = np.array([[int(b) for b in row] for row in u.bits], dtype=object).reshape(n, n)
    power = base.copy()
    total = base.copy()
    for _ in range(2, n + 1):
        power = power.dot(base)
        total = total + power
    return AccumulatedMatrix(tuple(tuple(int(c) for c in row) for row in total))


def reachability(u: PatternMatrix) -> np.ndarray:
    """Boolean closure: ``R[i, j]`` iff ``j`` is reachable from ``i`` (reflexive)."""
    r = u.to_numpy().astype(bool) | np.eye(u.n, dtype=bool)
    for k in range(u.n):
        r |= np.outer(r[:, k], r[k, :])
    return r


def components(u: PatternMatrix) -> ComponentPartition:
    """Connectivity classes of a symmetric pattern, 1-based and sorted.

    Self-loops never merge classes; isolated states form singletons.

    Raises:
        ValueError: the pattern is not symmetric.
    """
    if not u.is_symmetric():
        raise ValueError("components() needs a symmetric pattern; directed reducibility is not supported")
    r = reachability(u)
    seen = set()
    parts = []
    for i in range(u.n):
        if i in seen:
            continue
        members = [int(j) + 1 for j in np.flatnonzero(r[i])]
        seen.update(j - 1 for j in members)
        parts.append(members)
    return parts


def is_reducible(u: PatternMatrix) -> bool:
    return len(components(u)) > 1


def _check_partition(partition: Sequence[Sequence[int]], n: int) -> None:
    flat = [k for part in partition for k in part]
    if any(not part for part in partition):
        raise ModelError("partition contains an empty set")
    if len(flat) != len(set(flat)):
        raise ModelError("partition sets are not disjoint")
    if sorted(flat) != list(range(1, n + 1)):
        raise ModelError(f"partition does not cover exactly 1..{n}")


def permute_to_blocks(m, partition: Sequence[Sequence[int]]):
    """Reorder ``m`` so each partition set becomes one diagonal block.

    Works on :class:`ParametricMatrix` and :class:`PatternMatrix` alike.

    Returns:
        ``(permutation, blocks)``: the concatenated 1-based index order and the
        principal submatrices, one per partition set.
    """
    _check_partition(partition, m.n)
    permutation = [k for part in partition for k in part]
    if isinstance(m, PatternMatrix):
        blocks = [m.restrict(part) for part in partition]
    else:
        blocks = [m.principal(list(part)) for part in partition]
    return permutation, blocks


def assemble_blocks(blocks: Sequence[ParametricMatrix], permutation: Sequence[int]) -> ParametricMatrix:
    """Inverse of :func:`permute_to_blocks` for parametric blocks."""
    n = sum(b.n for b in blocks)
    if sorted(permutation) != list(range(1, n + 1)):
        raise ModelError("permutation does not match block sizes")
    params: list[str] = []
    for b in blocks:
        params.extend(p for p in b.params if p not in params)
    entries = {}
    labels: list[str] | None = [] if all(b.labels is not None for b in blocks) else None
    offset = 0
    for b in blocks:
        for (i, j), terms in b.entries.items():
            entries[(permutation[offset + i - 1], permutation[offset + j - 1])] = terms
        if labels is not None:
            labels.extend(b.labels)
        offset += b.n
    if labels is not None:
        ordered = [""] * n
        for pos, k in enumerate(permutation):
            ordered[k - 1] = labels[pos]
        labels = ordered
    return ParametricMatrix(n, tuple(params), entries, tuple(labels) if labels is not None else None)


def _dot_id(name: str) -> str:
    return '"' + str(name).replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(
    u: PatternMatrix,
    labels: Sequence[str] | None = None,
    include_self_loops: bool = False,
    name: str = "adjacency",
) -> str:
    """Undirected DOT graph with one edge per coupled pair."""
    if labels is not None and len(labels) != u.n:
        raise ValueError(f"{len(labels)} labels for a {u.n}-node pattern")
    names = [str(k + 1) for k in range(u.n)] if labels is None else [str(s) for s in labels]
    lines = [f"graph {_dot_id(name)} {{"]
    lines.extend(f"  {_dot_id(s)};" for s in names)
    for i, j in u.edges(include_self_loops):
        lines.append(f"  {_dot_id(names[i - 1])} -- {_dot_id(names[j - 1])};")
    lines.append("}")
    return "\n".join(lines) + "\n"
