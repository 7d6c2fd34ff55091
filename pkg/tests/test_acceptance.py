"""Acceptance gate: one test group per criterion, summarised at the end of the run.

Each ``test_criterion_<k>_*`` contributes to the PASS/FAIL line printed for
criterion ``k`` (see ``conftest.py``).
"""

from __future__ import annotations

import math
import random
from collections import deque
from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from levelcross import (
    PatternMatrix,
    accumulate,
    build_model_h,
    build_model_h0,
    components,
    eig_sym,
    evaluate,
    pattern_of,
)
from levelcross import hydrogen as hy
from levelcross.arith import get_context, to_number

SQRT2 = math.sqrt(2)

U0 = PatternMatrix.from_rows(["111000", "111000", "111000", "000100", "000011", "000011"])
U_H = PatternMatrix.from_rows(["111101", "111000", "111000", "100100", "000011", "100011"])

A0 = [
    [364, 364, 364, 0, 0, 0],
    [364, 364, 364, 0, 0, 0],
    [364, 364, 364, 0, 0, 0],
    [0, 0, 0, 6, 0, 0],
    [0, 0, 0, 0, 63, 63],
    [0, 0, 0, 0, 63, 63],
]
A_H = [
    [836, 604, 604, 354, 178, 426],
    [604, 453, 453, 250, 106, 284],
    [604, 453, 453, 250, 106, 284],
    [354, 250, 250, 158, 72, 178],
    [178, 106, 106, 72, 90, 142],
    [426, 284, 284, 178, 142, 268],
]

# nonzero columns of each row of the printed 24-state F_z = 0 adjacency matrix
UFZ0_ROWS = {
    1: {1, 18, 22, 24},
    2: {2, 18, 21, 24},
    3: {3, 17, 20, 23},
    4: {4, 17, 19, 23},
    5: {5, 15, 16, 18, 21, 22},
    6: {6, 13, 14, 17, 19, 20},
    7: {7, 16, 18, 24},
    8: {8, 15, 18, 24},
    9: {9, 14, 17, 23},
    10: {10, 13, 17, 23},
    11: {11, 15, 16, 21, 22, 24},
    12: {12, 13, 14, 19, 20, 23},
    13: {6, 10, 12, 13},
    14: {6, 9, 12, 14},
    15: {5, 8, 11, 15},
    16: {5, 7, 11, 16},
    17: {3, 4, 6, 9, 10, 17},
    18: {1, 2, 5, 7, 8, 18},
    19: {4, 6, 12, 19},
    20: {3, 6, 12, 20},
    21: {2, 5, 11, 21},
    22: {1, 5, 11, 22},
    23: {3, 4, 9, 10, 12, 23},
    24: {1, 2, 7, 8, 11, 24},
}
SET_I = [1, 2, 5, 7, 8, 11, 15, 16, 18, 21, 22, 24]
SET_II = [3, 4, 6, 9, 10, 12, 13, 14, 17, 19, 20, 23]


# -- 1 ---------------------------------------------------------------------------


def test_criterion_1_accumulated_adjacency_exact():
    assert pattern_of(build_model_h0()) == U0
    assert pattern_of(build_model_h(Fraction(3, 10))) == U_H
    assert [list(r) for r in accumulate(U0).counts] == A0
    assert [list(r) for r in accumulate(U_H).counts] == A_H


# -- 2 ---------------------------------------------------------------------------


def test_criterion_2_component_partitions():
    assert components(U0) == [[1, 2, 3], [4], [5, 6]]
    assert components(U_H) == [[1, 2, 3, 4, 5, 6]]
    assert components(hy.build_adjacency_fz0()) == [SET_I, SET_II]


# -- 3 ---------------------------------------------------------------------------


def test_criterion_3_model_crossings(h0_reports):
    expected = [
        (0.879385, 1e-5, 4.0, 1e-4),
        (1.061840, 1e-5, 4.326328, 1e-5),
        (SQRT2, 1e-8, 4.0, 1e-8),
    ]
    assert len(h0_reports) == 3
    for r, (g, dg, e, de) in zip(h0_reports, expected):
        assert r.verdict == "crossing"
        assert abs(float(r.location) - g) <= dg
        assert abs(float(r.energy) - e) <= de


# -- 4 ---------------------------------------------------------------------------


def test_criterion_4_anticrossing_conversion(h_reports):
    assert [r.verdict for r in h_reports] == ["avoided", "avoided", "crossing"]
    for r in h_reports[:2]:
        gaps = dict(r.gaps)
        assert gaps[128] > 0
        assert abs(gaps[128] - gaps[50]) <= 0.01 * gaps[128]
    last = h_reports[2]
    ctx = get_context(128)
    assert abs(last.location - ctx.sqrt(2)) < ctx.mpf("1e-10")
    assert dict(last.gaps)[128] < ctx.mpf("1e-100")
    assert abs(last.energy - 4) < ctx.mpf("1e-100")


# -- 5 ---------------------------------------------------------------------------


def _analytic_vectors(ctx, c2):
    s = ctx.sqrt(2)
    a = -c2 / (1 + s)
    b = -s * c2 / (1 + s)
    zero, one = ctx.zero, ctx.one
    return [zero, a, b, zero, -s, one], [zero, a, b, one, zero, zero]


@pytest.mark.parametrize("precision", [16, 50])
@pytest.mark.parametrize("c2", ["0.1", "0.3", "1.0"])
def test_criterion_5_analytic_eigenvectors(c2, precision):
    ctx = get_context(precision)
    m = evaluate(build_model_h(Fraction(c2)), {"g": ctx.sqrt(2)}, precision)
    for v in _analytic_vectors(ctx, to_number(ctx, c2)):
        hv = [sum((m.rows[i][j] * v[j] for j in range(6)), ctx.zero) for i in range(6)]
        residual = max(abs(hv[i] - 4 * v[i]) for i in range(6))
        # one ulp of the largest component of 4 v
        ulp = ctx.eps * 4 * max(abs(x) for x in v)
        assert residual <= 10 * ulp


# -- 6 ---------------------------------------------------------------------------


def test_criterion_6_hydrogen_adjacency_bits():
    u = hy.build_adjacency_fz0()
    assert u.n == 24 and u.is_symmetric()
    for i in range(1, 25):
        assert {j for j in range(1, 25) if u[i, j]} == UFZ0_ROWS[i]


def test_criterion_6_subspace_pattern_matches_restriction():
    u = hy.build_adjacency_fz0()
    p = pattern_of(hy.build_subspace_I())
    for a, i in enumerate(SET_I, start=1):
        for b, j in enumerate(SET_I, start=1):
            assert p[a, b] == u[i, j]


def test_criterion_6_unperturbed_spectrum():
    sym = hy.subspace_I_symbolic()
    expected = [
        (2, Fraction(-9, 2)),
        (2, Fraction(-3, 2)),
        (2, Fraction(3, 2)),
        (2, Fraction(-3, 2)),
        (2, Fraction(3, 2)),
        (2, Fraction(3, 2)),
        (0, Fraction(-3, 2)),
        (0, Fraction(-1, 2)),
        (0, Fraction(1, 2)),
        (0, Fraction(-1, 2)),
        (0, Fraction(1, 2)),
        (0, Fraction(1, 2)),
    ]
    for k, (cl, ch) in enumerate(expected, start=1):
        coeffs = {t.parameter: t.coefficient for t in sym.terms(k, k)}
        assert coeffs.get("L", 0) == cl and coeffs["H"] == ch
    # V = 0 eigenvalues equal that diagonal exactly
    c = hy.DEFAULT_CONSTANTS
    m = hy.build_subspace_I()
    es = eig_sym(evaluate(m, {"V": 0}, 50))
    exact = sorted(cl * c.lamb + ch * c.hyperfine for cl, ch in expected)
    ctx = get_context(50)
    assert list(es.eigenvalues) == [ctx.mpf(x.numerator) / x.denominator for x in exact]


# -- 7 ---------------------------------------------------------------------------


def _upper_shifts(rho, precision=30):
    m = hy.build_subspace_I()
    es = eig_sym(evaluate(m, hy.vdw_assignment(rho, precision), precision))
    ctx = get_context(precision)
    base = sorted(hy.unperturbed_energies())[6:]
    return [es.eigenvalues[6 + k] - ctx.mpf(base[k].numerator) / base[k].denominator for k in range(6)]


def test_criterion_7_hydrogen_asymptotics():
    rhos = [1000, 2000, 5000, 10000]
    shifts = {r: _upper_shifts(r) for r in rhos}
    L = float(hy.DEFAULT_CONSTANTS.lamb)
    for k in range(6):
        y = [math.log(abs(float(shifts[r][k]))) for r in rhos]
        x = [math.log(r) for r in rhos]
        slope = np.polyfit(x, y, 1)[0]
        assert abs(slope + 6) <= 0.1, (k, slope)
        ratio = [float(shifts[r][k]) * L / float(hy.vdw_strength(r)) ** 2 for r in rhos]
        spread = (max(ratio) - min(ratio)) / abs(np.mean(ratio))
        assert spread <= 0.01, (k, ratio)


# -- 8 ---------------------------------------------------------------------------


def test_criterion_8_hydrogen_crossing_persists(hydrogen_reports, capsys):
    crossings = [r for r in hydrogen_reports if r.verdict == "crossing"]
    assert crossings
    assert all(len(r.gaps) == 3 for r in crossings)
    with capsys.disabled():
        for r in crossings:
            print(f"\n  hydrogen crossing: curves {r.candidate.curves} at rho = {float(r.location):.6f}")


# -- 9 ---------------------------------------------------------------------------


def _random_symmetric(rng, n, density):
    bits = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            if rng.random() < density:
                bits[i][j] = bits[j][i] = 1
    return PatternMatrix(tuple(map(tuple, bits)))


def _walks(u, i, j, length):
    # exhaustive enumeration of all walks of the given length
    n = u.n
    count = 0
    for mid in product(range(1, n + 1), repeat=length - 1):
        path = (i, *mid, j)
        if all(u[a, b] for a, b in zip(path, path[1:])):
            count += 1
    return count


def test_criterion_9_walk_count_oracle():
    rng = random.Random(20261014)
    for _ in range(200):
        n = rng.randint(1, 5) if rng.random() < 0.8 else 6
        u = _random_symmetric(rng, n, rng.random())
        acc = accumulate(u)
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                if n == 6 and (i, j) not in ((1, 1), (1, n), (n, 2)):
                    continue  # n = 6 enumerates 6**5 paths per length: spot-check
                assert acc[i, j] == sum(_walks(u, i, j, k) for k in range(1, n + 1))


def _bfs_components(u):
    seen, parts = set(), []
    for s in range(1, u.n + 1):
        if s in seen:
            continue
        q, part = deque([s]), {s}
        while q:
            a = q.popleft()
            for b in range(1, u.n + 1):
                if u[a, b] and b not in part:
                    part.add(b)
                    q.append(b)
        seen |= part
        parts.append(sorted(part))
    return parts


def test_criterion_9_closure_vs_bfs():
    rng = random.Random(7)
    for _ in range(100):
        n = rng.randint(1, 24)
        u = _random_symmetric(rng, n, rng.random() * 4 / n)
        parts = components(u)
        assert parts == _bfs_components(u)
        acc = accumulate(u)
        where = {k: idx for idx, p in enumerate(parts) for k in p}
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                if i != j:
                    assert (acc[i, j] > 0) == (where[i] == where[j])


def _exact_entry(m, i, j, g):
    return sum((t.coefficient * (g if t.parameter == "g" else 1) for t in m.terms(i, j)), Fraction(0))


def _fraction_det(rows):
    a = [list(r) for r in rows]
    n, det = len(a), Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if a[r][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return det


def test_criterion_9_trace_determinant_and_precision_agreement():
    models = [build_model_h0(), build_model_h(Fraction(3, 10)), hy.build_subspace_I()]
    values = [{"g": Fraction(7, 5)}, {"g": Fraction(7, 5)}, {"V": hy.vdw_strength(Fraction(480), 50)}]
    for m, at in zip(models, values):
        lo = eig_sym(evaluate(m, at, 128))
        hi = eig_sym(evaluate(m, at, 256))
        ctx = get_context(256)
        for a, b in zip(lo.eigenvalues, hi.eigenvalues):
            assert abs(ctx.mpf(a) - b) <= ctx.mpf("1e-118") * max(1, abs(b))
        num = evaluate(m, at, 128)
        trace = sum(num.rows[i][i] for i in range(m.n))
        norm = max(sum(abs(x) for x in row) for row in num.rows)
        assert abs(sum(lo.eigenvalues) - trace) <= get_context(128).mpf("1e-118") * m.n * norm
    # product of eigenvalues against an exact rational determinant
    m = build_model_h(Fraction(3, 10))
    rows = [[_exact_entry(m, i, j, Fraction(7, 5)) for j in range(1, 7)] for i in range(1, 7)]
    det = _fraction_det(rows)
    es = eig_sym(evaluate(m, {"g": Fraction(7, 5)}, 50))
    ctx = get_context(50)
    prod = ctx.fprod(es.eigenvalues)
    assert abs(prod - ctx.mpf(det.numerator) / det.denominator) < ctx.mpf("1e-40")


def test_criterion_9_continuation_multiset(h0_flow, h_flow, hydrogen_flow):
    for flow in (h0_flow, h_flow, hydrogen_flow):
        for k in range(len(flow)):
            assert sorted(flow.slot_curves[k]) == list(range(1, flow.n + 1))
            assert sorted(flow.curves_at(k)) == list(flow.systems[k].eigenvalues)
