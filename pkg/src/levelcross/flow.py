"""Eigenvalue curves along a one-parameter path, and crossing classification.

The workflow is ``sweep`` -> ``detect_candidates`` -> ``classify``:

* a sweep diagonalises the matrix on a grid and gives every eigenvalue a
  persistent curve ID by matching eigenvectors between neighbouring points
  (optimal assignment on overlap magnitudes);
* candidates are local minima of adjacent-level gaps and places where two
  curves change order;
* classification minimises the pair gap by golden-section search at each
  precision of a ladder.  A gap that keeps shrinking with precision is a
  true crossing; a gap that is stable across the top two precisions is an
  avoided crossing.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .arith import as_fraction, exact_fraction, format_number, from_portable, get_context, portable, to_number
from .errors import ConvergenceError, ModelError
from .parametric import ParametricMatrix, evaluate
from .precision import GUARD_DIGITS, EigenSystem, eig_sym, gap_at, point_assignment

DEFAULT_LADDER = (16, 50, 128)
GOLDEN_MAX_ITER = 200
AVOIDED_RTOL = 0.01

Transform = Callable[[Any, int], Mapping[str, Any]]


@dataclass(frozen=True)
class SweepGrid:
    """Grid on the path variable ``param``; ``spacing`` is "linear" or "log"."""

    param: str
    start: Any
    end: Any
    steps: int
    spacing: str = "linear"

    def __post_init__(self):
        if isinstance(self.steps, bool) or not isinstance(self.steps, int) or self.steps < 2:
            raise ValueError(f"a sweep needs at least 2 steps, got {self.steps!r}")
        if self.spacing not in ("linear", "log"):
            raise ValueError(f"spacing must be 'linear' or 'log', got {self.spacing!r}")
        lo, hi = as_fraction(self.start), as_fraction(self.end)
        if not lo < hi:
            raise ValueError(f"grid start {self.start} must be below end {self.end}")
        if self.spacing == "log" and lo <= 0:
            raise ValueError("logarithmic grids need a positive start")

    def points(self, precision: int = 16) -> list:
        ctx = get_context(precision)
        lo, hi = to_number(ctx, self.start), to_number(ctx, self.end)
        last = self.steps - 1
        if self.spacing == "linear":
            pts = [lo + (hi - lo) * k / last for k in range(self.steps)]
        else:
            a, b = ctx.log(lo), ctx.log(hi)
            pts = [ctx.exp(a + (b - a) * k / last) for k in range(self.steps)]
        pts[0], pts[-1] = lo, hi
        return pts


@dataclass(frozen=True, eq=False)
class SpectralFlow:
    """Eigensystems on a grid plus persistent curve IDs.

    ``slot_curves[k][s - 1]`` is the curve ID (1-based) occupying ascending
    slot ``s`` at grid point ``k``.  IDs are assigned in ascending order of
    the eigenvalues at the first grid point.
    """

    grid: SweepGrid
    points: tuple
    systems: tuple[EigenSystem, ...]
    slot_curves: tuple[tuple[int, ...], ...]
    precision: int

    @property
    def n(self) -> int:
        return self.systems[0].n

    def __len__(self) -> int:
        return len(self.points)

    def slot_of(self, k: int, curve: int) -> int:
        return self.slot_curves[k].index(curve) + 1

    def value(self, k: int, curve: int):
        return self.systems[k].eigenvalues[self.slot_of(k, curve) - 1]

    def curve(self, curve: int) -> list:
        return [self.value(k, curve) for k in range(len(self.points))]

    def curves_at(self, k: int) -> list:
        """Values at point ``k`` ordered by curve ID."""
        out = [None] * self.n
        for slot, cid in enumerate(self.slot_curves[k]):
            out[cid - 1] = self.systems[k].eigenvalues[slot]
        return out

    def to_csv(self, digits: int | None = None) -> str:
        digits = digits or self.precision
        header = ",".join([self.grid.param] + [f"curve_{c}" for c in range(1, self.n + 1)])
        lines = [header]
        for k, x in enumerate(self.points):
            row = [format_number(x, digits)] + [format_number(v, digits) for v in self.curves_at(k)]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"

    def to_json(self, digits: int | None = None) -> str:
        """Points, curves (by ID) and slot maps; numbers as decimal strings."""
        digits = digits or self.precision
        doc = {
            "param": self.grid.param,
            "precision": self.precision,
            "points": [format_number(x, digits) for x in self.points],
            "curves": [[format_number(v, digits) for v in self.curve(c)] for c in range(1, self.n + 1)],
            "slot_curves": [list(s) for s in self.slot_curves],
        }
        return json.dumps(doc, indent=1) + "\n"


def _solve_point(args):
    m, param, raw_x, precision, fixed, transform = args
    ctx = get_context(precision)
    x = from_portable(ctx, raw_x)
    try:
        es = eig_sym(evaluate(m, point_assignment(param, x, precision, fixed, transform), precision))
    except ConvergenceError as exc:
        raise ConvergenceError(f"at {param}={format_number(x, 12)}: {exc}", exc.off_norm) from exc
    except ValueError as exc:
        raise type(exc)(f"at {param}={format_number(x, 12)}: {exc}") from exc
    return (
        [portable(v) for v in es.eigenvalues],
        [[portable(c) for c in col] for col in es.eigenvectors],
        es.sweeps,
    )


def _portable_fixed(fixed):
    # exact and picklable, whatever number type the caller used
    return {k: exact_fraction(v) if hasattr(v, "_mpf_") else v for k, v in (fixed or {}).items()}


def _continue_curves(systems: Sequence[EigenSystem]) -> list[tuple[int, ...]]:
    n = systems[0].n
    maps = [tuple(range(1, n + 1))]
    prev = systems[0].vectors_array()
    for es in systems[1:]:
        cur = es.vectors_array()
        overlap = np.abs(prev.T @ cur)
        rows, cols = linear_sum_assignment(overlap, maximize=True)
        new = [0] * n
        for s, t in zip(rows, cols):
            new[t] = maps[-1][s]
        maps.append(tuple(new))
        prev = cur
    return maps


def sweep(
    m: ParametricMatrix,
    grid: SweepGrid,
    fixed: Mapping[str, Any] | None = None,
    precision: int = 16,
    transform: Transform | None = None,
    workers: int = 1,
) -> SpectralFlow:
    """Diagonalise ``m`` at every grid point and continue the curves.

    ``fixed`` supplies every parameter other than the path variable.  With a
    ``transform`` the path variable need not be a parameter of ``m`` (see
    :func:`~levelcross.precision.point_assignment`).  ``workers > 1`` spreads
    the independent diagonalisations over processes; results are identical
    to the serial run.
    """
    ctx = get_context(precision)
    if transform is None and grid.param not in m.params:
        raise ModelError(f"sweep parameter {grid.param!r} is not a parameter of the matrix")
    pts = grid.points(precision)
    fixed = _portable_fixed(fixed)
    jobs = [(m, grid.param, portable(x), precision, fixed, transform) for x in pts]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            raw = list(pool.map(_solve_point, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        raw = [_solve_point(job) for job in jobs]
    systems = tuple(
        EigenSystem(
            precision,
            tuple(from_portable(ctx, v) for v in vals),
            tuple(tuple(from_portable(ctx, c) for c in col) for col in vecs),
            sweeps,
        )
        for vals, vecs, sweeps in raw
    )
    return SpectralFlow(grid, tuple(pts), systems, tuple(_continue_curves(systems)), precision)


@dataclass(frozen=True)
class CrossingCandidate:
    """A suspected crossing of curves ``curves`` inside ``interval``.

    ``slots`` are the ascending eigenvalue positions whose difference is the
    pair gap; ``gap`` is the smallest sampled pair gap inside the interval.
    """

    param: str
    curves: tuple[int, int]
    slots: tuple[int, int]
    interval: tuple[Any, Any]
    gap: Any
    kind: str


def detect_candidates(
    flow: SpectralFlow,
    gap_threshold,
    curves: Sequence[int] | None = None,
) -> list[CrossingCandidate]:
    """Gap minima below ``gap_threshold`` and curve-order swaps, merged per pair.

    Args:
        flow: a sweep.
        gap_threshold: only interior gap minima below this value are kept.
        curves: optional subset of curve IDs to consider.
    """
    if len(flow) < 2:
        raise ValueError("flow has fewer than two grid points")
    ids = set(curves) if curves is not None else set(range(1, flow.n + 1))
    pts, sc = flow.points, flow.slot_curves
    last = len(pts) - 1
    found: list[CrossingCandidate] = []

    for s in range(1, flow.n):
        gaps = [es.eigenvalues[s] - es.eigenvalues[s - 1] for es in flow.systems]
        for k in range(1, last):
            ca, cb = sc[k][s - 1], sc[k][s]
            if ca not in ids or cb not in ids:
                continue
            if gaps[k] < gap_threshold and gaps[k] < gaps[k - 1] and gaps[k] <= gaps[k + 1]:
                pair = (min(ca, cb), max(ca, cb))
                found.append(
                    CrossingCandidate(flow.grid.param, pair, (s, s + 1), (pts[k - 1], pts[k + 1]), gaps[k], "gap-minimum")
                )

    for k in range(last):
        here, there = sc[k], sc[k + 1]
        for a in sorted(ids):
            for b in sorted(ids):
                if b <= a:
                    continue
                before = here.index(a) - here.index(b)
                after = there.index(a) - there.index(b)
                if before * after >= 0:
                    continue
                s_lo = min(here.index(a), here.index(b)) + 1
                s_hi = max(here.index(a), here.index(b)) + 1
                gap = min(abs(flow.value(k, a) - flow.value(k, b)), abs(flow.value(k + 1, a) - flow.value(k + 1, b)))
                interval = (pts[max(k - 1, 0)], pts[min(k + 2, last)])
                found.append(CrossingCandidate(flow.grid.param, (a, b), (s_lo, s_hi), interval, gap, "order-swap"))

    return _merge(found)


def _merge(found: list[CrossingCandidate]) -> list[CrossingCandidate]:
    found = sorted(found, key=lambda c: (c.curves, c.interval[0], c.kind != "order-swap"))
    merged: list[CrossingCandidate] = []
    for c in found:
        prev = merged[-1] if merged else None
        if prev is not None and prev.curves == c.curves and c.interval[0] <= prev.interval[1]:
            keep = prev if prev.kind == "order-swap" or c.kind != "order-swap" else c
            merged[-1] = CrossingCandidate(
                c.param,
                c.curves,
                keep.slots,
                (min(prev.interval[0], c.interval[0]), max(prev.interval[1], c.interval[1])),
                min(prev.gap, c.gap),
                keep.kind,
            )
        else:
            merged.append(c)
    return sorted(merged, key=lambda c: (c.interval[0], c.curves))


# -- classification ----------------------------------------------------------


def golden_section(f, lo, hi, tol, max_iter: int, ctx):
    """Minimise a unimodal ``f`` on ``[lo, hi]``.

    Returns ``(x, f(x), a, b, iterations)`` where ``[a, b]`` is the final
    bracket.  Stops when ``b - a <= tol`` or after ``max_iter`` shrinks.
    """
    invphi = (ctx.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    it = 0
    while b - a > tol and it < max_iter:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
        it += 1
    x, fx = (c, fc) if fc <= fd else (d, fd)
    return x, fx, a, b, it


@dataclass(frozen=True, eq=False)
class CrossingReport:
    """Outcome of :func:`classify`.

    ``gaps`` holds ``(digits, minimal gap)`` per ladder level; ``verdict`` is
    ``"crossing"``, ``"avoided"`` or ``"unresolved"``.
    """

    candidate: CrossingCandidate
    location: Any
    energy: Any
    gaps: tuple[tuple[int, Any], ...]
    verdict: str
    diagnostics: str = ""
    iterations: tuple[int, ...] = field(default=())

    @property
    def top_precision(self) -> int:
        return self.gaps[-1][0] if self.gaps else 16

    def to_dict(self) -> dict:
        c = self.candidate
        p = self.top_precision
        return {
            "param": c.param,
            "curves": list(c.curves),
            "slots": list(c.slots),
            "interval": [format_number(c.interval[0], 16), format_number(c.interval[1], 16)],
            "kind": c.kind,
            "sampled_gap": format_number(c.gap, 16),
            "location": format_number(self.location, p) if self.location is not None else None,
            "energy": format_number(self.energy, p) if self.energy is not None else None,
            "gaps": [{"digits": d, "gap": format_number(g, d)} for d, g in self.gaps],
            "verdict": self.verdict,
            "diagnostics": self.diagnostics,
            "iterations": list(self.iterations),
        }


def reports_to_json(reports: Sequence[CrossingReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2) + "\n"


def _golden_budget(width, tol) -> int:
    if tol <= 0 or width <= tol:
        return 1
    ratio = float(width / tol) if not isinstance(width, float) else width / tol
    return math.ceil(math.log(ratio) / math.log((1 + math.sqrt(5)) / 2)) + 5


def classify(
    m: ParametricMatrix,
    fixed: Mapping[str, Any] | None,
    candidate: CrossingCandidate,
    ladder: Sequence[int] = DEFAULT_LADDER,
    *,
    transform: Transform | None = None,
    max_iter: int | None = None,
) -> CrossingReport:
    """Decide whether a candidate is a true or an avoided crossing.

    At each ladder precision the pair gap is minimised by golden-section
    search until the bracket is ``10**-(P-10)`` wide relative to the
    location; the next level searches a bracket ten times that width around
    the previous minimiser.  ``max_iter`` caps shrinks per level; by default
    the cap is the larger of 200 and what the tolerance requires.

    Verdicts: ``crossing`` if the top-level gap is below
    ``10**-(P_max-10) * max(1, |E*|)``;
    ``avoided`` if the top two minimal gaps agree within 1 %; otherwise
    ``unresolved`` (also when the first level finds no interior minimum).
    """
    ladder = list(ladder)
    if not ladder or any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise ValueError(f"precision ladder must be strictly ascending, got {ladder}")
    lo0, hi0 = candidate.interval
    if not lo0 < hi0:
        raise ValueError("candidate interval is empty")
    pair = candidate.slots
    fixed = dict(fixed or {})
    gaps: list[tuple[int, Any]] = []
    iterations: list[int] = []
    x = None
    lo, hi = lo0, hi0

    for level, digits in enumerate(ladder):
        ctx = get_context(digits)
        a, b = to_number(ctx, lo), to_number(ctx, hi)

        def f(t, digits=digits):
            return gap_at(m, candidate.param, t, pair, digits, fixed=fixed, transform=transform)

        mid = (a + b) / 2
        tol = ctx.ldexp10(-(digits - GUARD_DIGITS)) * max(ctx.fabs(mid), ctx.ldexp10(-(digits - GUARD_DIGITS)))
        budget = max_iter if max_iter is not None else max(GOLDEN_MAX_ITER, _golden_budget(b - a, tol))
        x, fx, a_end, b_end, it = golden_section(f, a, b, tol, budget, ctx)
        iterations.append(it)
        if level == 0:
            f_lo, f_hi = f(a), f(b)
            if not (fx < f_lo and fx < f_hi):
                return CrossingReport(
                    candidate,
                    x,
                    None,
                    ((digits, fx),),
                    "unresolved",
                    f"no interior minimum in bracket: gap {float(fx):.3e} vs endpoints {float(f_lo):.3e}, {float(f_hi):.3e}",
                    tuple(iterations),
                )
        gaps.append((digits, fx))
        width = max(b_end - a_end, tol) * 10
        lo = max(x - width, to_number(ctx, lo0))
        hi = min(x + width, to_number(ctx, hi0))

    top_digits, top = gaps[-1]
    top_ctx = get_context(top_digits)
    es = eig_sym(evaluate(m, point_assignment(candidate.param, x, top_digits, fixed, transform), top_digits))
    energy = (es.eigenvalues[pair[0] - 1] + es.eigenvalues[pair[1] - 1]) / 2

    diagnostics = ""
    # scaled by the crossing energy so the verdict does not depend on units
    scale = max(top_ctx.one, top_ctx.fabs(energy))
    if top < top_ctx.ldexp10(-(top_digits - GUARD_DIGITS)) * scale:
        verdict = "crossing"
    elif len(gaps) >= 2 and top > 0 and abs(top - gaps[-2][1]) <= AVOIDED_RTOL * top:
        verdict = "avoided"
    else:
        verdict = "unresolved"
        diagnostics = "minimal gap neither vanishes nor is stable across the top two precisions"
    return CrossingReport(candidate, x, energy, tuple(gaps), verdict, diagnostics, tuple(iterations))


def classify_all(
    m: ParametricMatrix,
    fixed: Mapping[str, Any] | None,
    candidates: Sequence[CrossingCandidate],
    ladder: Sequence[int] = DEFAULT_LADDER,
    *,
    transform: Transform | None = None,
    workers: int = 1,
) -> list[CrossingReport]:
    """Classify several candidates, optionally in parallel (order preserved)."""
    if workers > 1 and len(candidates) > 1:
        fixed = _portable_fixed(fixed)
        jobs = [(m, fixed, _portable_candidate(c), tuple(ladder), transform) for c in candidates]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return [_unpack_report(c, r) for c, r in zip(candidates, pool.map(_classify_job, jobs))]
    return [classify(m, fixed, c, ladder, transform=transform) for c in candidates]


def _portable_candidate(c: CrossingCandidate) -> CrossingCandidate:
    lo, hi = c.interval
    return CrossingCandidate(c.param, c.curves, c.slots, (exact_fraction(lo), exact_fraction(hi)), exact_fraction(c.gap), c.kind)


def _classify_job(args):
    m, fixed, cand, ladder, transform = args
    r = classify(m, fixed, cand, ladder, transform=transform)
    return (
        None if r.location is None else portable(r.location),
        None if r.energy is None else portable(r.energy),
        tuple((d, portable(g)) for d, g in r.gaps),
        r.verdict,
        r.diagnostics,
        r.iterations,
    )


def _unpack_report(candidate: CrossingCandidate, packed) -> CrossingReport:
    loc, energy, gaps, verdict, diag, its = packed
    ctx = get_context(gaps[-1][0])
    return CrossingReport(
        candidate,
        None if loc is None else from_portable(ctx, loc),
        None if energy is None else from_portable(ctx, energy),
        tuple((d, from_portable(get_context(d), g)) for d, g in gaps),
        verdict,
        diag,
        its,
    )


# -- perturbation theory -----------------------------------------------------


def second_order_shifts(
    m: ParametricMatrix,
    fixed: Mapping[str, Any] | None,
    split: tuple[Sequence[int], Sequence[int]],
    at: Mapping[str, Any] | None = None,
    precision: int = 16,
    tol=None,
) -> list:
    """Second-order energy shifts of the ``block`` states from the ``complement``.

    For a non-degenerate block state ``i`` the shift is
    ``sum_j H_ij**2 / (H_ii - H_jj)`` over complement states ``j``.  Block
    states sharing an unperturbed energy form a degenerate group; their
    shifts are the ascending eigenvalues of the effective matrix
    ``W_ik = sum_j H_ij H_jk / (E - H_jj)``, assigned to the group members
    in block order.

    Raises:
        ModelError: the block has internal off-diagonal couplings, or an
            energy denominator vanishes for a coupled pair.
    """
    block, comp = (list(s) for s in split)
    if set(block) & set(comp):
        raise ModelError("block and complement overlap")
    ctx = get_context(precision)
    h = evaluate(m, {**(fixed or {}), **(at or {})}, precision)
    scale = max((ctx.fabs(x) for row in h.rows for x in row), default=ctx.zero)
    tol = ctx.ldexp10(-(precision - GUARD_DIGITS)) * max(scale, ctx.one) if tol is None else to_number(ctx, tol)

    for x, i in enumerate(block):
        for k in block[x + 1 :]:
            if ctx.fabs(h.entry(i, k)) > tol:
                raise ModelError(f"block states {i} and {k} are coupled directly; second-order shifts need a diagonal block")

    groups: list[list[int]] = []
    for i in block:
        for g in groups:
            if ctx.fabs(h.entry(i, i) - h.entry(g[0], g[0])) <= tol:
                g.append(i)
                break
        else:
            groups.append([i])

    def denominator(i, j):
        d = h.entry(i, i) - h.entry(j, j)
        if ctx.fabs(d) <= tol:
            raise ModelError(f"vanishing energy denominator between states {i} and {j}")
        return d

    shifts = {}
    for g in groups:
        w = [[ctx.zero] * len(g) for _ in g]
        for j in comp:
            if all(h.entry(i, j) == 0 for i in g):
                continue
            d = denominator(g[0], j)
            for x, i in enumerate(g):
                for y, k in enumerate(g):
                    w[x][y] += h.entry(i, j) * h.entry(j, k) / d
        if len(g) == 1:
            shifts[g[0]] = w[0][0]
        else:
            for x in range(len(g)):
                for y in range(x):
                    w[x][y] = w[y][x]
            vals = eig_sym(w, precision).eigenvalues
            for i, val in zip(g, vals):
                shifts[i] = val
    return [shifts[i] for i in block]
