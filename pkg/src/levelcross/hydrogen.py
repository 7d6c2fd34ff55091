"""Two hydrogen atoms in the n=2, J=1/2 manifold: the F_z = 0 sector.

Energies are in units of h*MHz, distances in Bohr radii.  The origin of
energy is the hyperfine centroid of 2P_1/2; each atom in 2S is lifted by
the Lamb shift ``L``.

The 24 two-atom states split into two decoupled 12-dimensional subspaces
(S-S/P-P and S-P/P-S).  Only the S-S/P-P Hamiltonian is tabulated here.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

from .adjacency import PatternMatrix
from .arith import get_context, to_number
from .flow import (
    DEFAULT_LADDER,
    CrossingReport,
    SpectralFlow,
    SweepGrid,
    classify_all,
    detect_candidates,
    sweep,
)
from .parametric import ParamTerm, ParametricMatrix


@dataclass(frozen=True)
class PhysicalConstants:
    """Energy scales in h*MHz.

    ``hartree`` is the CODATA 2018 Hartree energy over h.
    """

    lamb: Fraction = Fraction("1057.845")
    hyperfine: Fraction = Fraction("59.1856114")
    hartree: Fraction = Fraction("6579683920.502")
    bohr_radius: Fraction = Fraction(1)


DEFAULT_CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class TwoAtomState:
    """``|(l_A, F_A, Fz_A)_A (l_B, F_B, Fz_B)_B>`` with its 1-based index."""

    index: int
    a: tuple[int, int, int]
    b: tuple[int, int, int]

    @property
    def fz(self) -> int:
        return self.a[2] + self.b[2]

    @property
    def label(self) -> str:
        return f"|({self.a[0]},{self.a[1]},{self.a[2]})_A ({self.b[0]},{self.b[1]},{self.b[2]})_B>"


_STATES = (
    ((0, 0, 0), (0, 0, 0)),
    ((0, 0, 0), (0, 1, 0)),
    ((0, 0, 0), (1, 0, 0)),
    ((0, 0, 0), (1, 1, 0)),
    ((0, 1, -1), (0, 1, 1)),
    ((0, 1, -1), (1, 1, 1)),
    ((0, 1, 0), (0, 0, 0)),
    ((0, 1, 0), (0, 1, 0)),
    ((0, 1, 0), (1, 0, 0)),
    ((0, 1, 0), (1, 1, 0)),
    ((0, 1, 1), (0, 1, -1)),
    ((0, 1, 1), (1, 1, -1)),
    ((1, 0, 0), (0, 0, 0)),
    ((1, 0, 0), (0, 1, 0)),
    ((1, 0, 0), (1, 0, 0)),
    ((1, 0, 0), (1, 1, 0)),
    ((1, 1, -1), (0, 1, 1)),
    ((1, 1, -1), (1, 1, 1)),
    ((1, 1, 0), (0, 0, 0)),
    ((1, 1, 0), (0, 1, 0)),
    ((1, 1, 0), (1, 0, 0)),
    ((1, 1, 0), (1, 1, 0)),
    ((1, 1, 1), (0, 1, -1)),
    ((1, 1, 1), (1, 1, -1)),
)

# direct couplings among the 24 F_z = 0 states (diagonal included)
_ADJACENCY_FZ0 = (
    "100000000000000001000101",
    "010000000000000001001001",
    "001000000000000010010010",
    "000100000000000010100010",
    "000010000000001101001100",
    "000001000000110010110000",
    "000000100000000101000001",
    "000000010000001001000001",
    "000000001000010010000010",
    "000000000100100010000010",
    "000000000010001100001101",
    "000000000001110000110010",
    "000001000101100000000000",
    "000001001001010000000000",
    "000010010010001000000000",
    "000010100010000100000000",
    "001101001100000010000000",
    "110010110000000001000000",
    "000101000001000000100000",
    "001001000001000000010000",
    "010010000010000000001000",
    "100010000010000000000100",
    "001100001101000000000010",
    "110000110010000000000001",
)

SUBSPACE_I = (1, 2, 5, 7, 8, 11, 15, 16, 18, 21, 22, 24)
SUBSPACE_II = (3, 4, 6, 9, 10, 12, 13, 14, 17, 19, 20, 23)

# diagonal of the S-S/P-P block as (coefficient of L, coefficient of H)
_DIAGONAL_I = (
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
)

# van der Waals couplings of the S-S/P-P block, in units of V, both triangles
_COUPLINGS_I = (
    (0, 0, 0, 0, 0, 0, 0, 0, -1, 0, -2, -1),
    (0, 0, 0, 0, 0, 0, 0, 0, 1, -2, 0, -1),
    (0, 0, 0, 0, 0, 0, -1, 1, 2, -1, 1, 0),
    (0, 0, 0, 0, 0, 0, 0, -2, -1, 0, 0, 1),
    (0, 0, 0, 0, 0, 0, -2, 0, 1, 0, 0, 1),
    (0, 0, 0, 0, 0, 0, -1, -1, 0, 1, 1, 2),
    (0, 0, -1, 0, -2, -1, 0, 0, 0, 0, 0, 0),
    (0, 0, 1, -2, 0, -1, 0, 0, 0, 0, 0, 0),
    (-1, 1, 2, -1, 1, 0, 0, 0, 0, 0, 0, 0),
    (0, -2, -1, 0, 0, 1, 0, 0, 0, 0, 0, 0),
    (-2, 0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0),
    (-1, -1, 0, 1, 1, 2, 0, 0, 0, 0, 0, 0),
)

# the six S-S states (upper manifold) within the 12-state block
UPPER_BLOCK = (1, 2, 3, 4, 5, 6)
LOWER_BLOCK = (7, 8, 9, 10, 11, 12)


def build_states() -> list[TwoAtomState]:
    return [TwoAtomState(k, a, b) for k, (a, b) in enumerate(_STATES, start=1)]


def build_adjacency_fz0() -> PatternMatrix:
    return PatternMatrix.from_rows(_ADJACENCY_FZ0)


def subspace_I_symbolic() -> ParametricMatrix:
    """The S-S/P-P block as a matrix linear in ``L``, ``H`` and ``V``."""
    entries = {}
    for i, (cl, ch) in enumerate(_DIAGONAL_I, start=1):
        terms = [ParamTerm(ch, "H")]
        if cl:
            terms.insert(0, ParamTerm(cl, "L"))
        entries[(i, i)] = tuple(terms)
    for i, row in enumerate(_COUPLINGS_I, start=1):
        for j, c in enumerate(row, start=1):
            if c:
                entries[(i, j)] = (ParamTerm(c, "V"),)
    states = build_states()
    labels = tuple(states[k - 1].label for k in SUBSPACE_I)
    return ParametricMatrix(12, ("L", "H", "V"), entries, labels)


def build_subspace_I(constants: PhysicalConstants | None = None) -> ParametricMatrix:
    """The S-S/P-P block with ``L`` and ``H`` bound; the only parameter is ``V``."""
    c = constants or DEFAULT_CONSTANTS
    return subspace_I_symbolic().bind({"L": c.lamb, "H": c.hyperfine})


def unperturbed_energies(constants: PhysicalConstants | None = None) -> list[Fraction]:
    """Exact diagonal of the S-S/P-P block (the ``V = 0`` spectrum)."""
    c = constants or DEFAULT_CONSTANTS
    return [cl * c.lamb + ch * c.hyperfine for cl, ch in _DIAGONAL_I]


def vdw_strength(rho, precision: int = 16, constants: PhysicalConstants | None = None):
    """Van der Waals coupling scale ``3 E_h (a0/R)**3`` in h*MHz.

    ``3 alpha hbar c a0**2 / R**3`` reduces to this because
    ``alpha hbar c = E_h a0``.

    Raises:
        ValueError: ``rho <= 0``.
    """
    c = constants or DEFAULT_CONSTANTS
    ctx = get_context(precision)
    r = to_number(ctx, rho)
    if r <= 0:
        raise ValueError(f"interatomic distance must be positive, got {rho}")
    ratio = to_number(ctx, c.bohr_radius) / r
    return 3 * to_number(ctx, c.hartree) * ratio * ratio * ratio


def vdw_assignment(rho, precision: int, constants: PhysicalConstants | None = None) -> dict[str, Any]:
    """Path transform ``rho -> {"V": V(rho)}`` for sweeps over distance."""
    return {"V": vdw_strength(rho, precision, constants)}


def asymptotic_coefficients(precision: int = 16):
    """``(alpha_plus, alpha_minus, beta_plus, beta_minus)`` of the large-R states."""
    ctx = get_context(precision)
    s33 = ctx.sqrt(33)
    alpha_plus = 2 * ctx.sqrt(2 / (33 + s33))
    alpha_minus = 2 * ctx.sqrt(2 / (33 - s33))
    beta_plus = -(s33 + 1) / ctx.sqrt(2 * (33 + s33))
    beta_minus = (s33 - 1) / ctx.sqrt(2 * (33 - s33))
    return alpha_plus, alpha_minus, beta_plus, beta_minus


RHO_MIN, RHO_MAX = 50, 10**5
DEFAULT_GRID = SweepGrid("rho", 100, 10**4, 200, "log")


def _transform(constants):
    if constants is None or constants == DEFAULT_CONSTANTS:
        return vdw_assignment
    return functools.partial(vdw_assignment, constants=constants)


def potential_curves(
    grid: SweepGrid | None = None,
    precision: int = 16,
    constants: PhysicalConstants | None = None,
    workers: int = 1,
) -> SpectralFlow:
    """Born-Oppenheimer curves of the S-S/P-P block over a grid in ``rho``."""
    grid = grid or DEFAULT_GRID
    lo, hi = grid.start, grid.end
    if lo < RHO_MIN or hi > RHO_MAX:
        raise ValueError(f"rho grid must lie within [{RHO_MIN}, {RHO_MAX}], got [{lo}, {hi}]")
    return sweep(build_subspace_I(constants), grid, {}, precision, _transform(constants), workers)


def upper_curves(flow: SpectralFlow) -> list[int]:
    """IDs of the six curves that end highest, i.e. tend to the S-S states."""
    last = len(flow) - 1
    return sorted(flow.slot_curves[last][-len(UPPER_BLOCK) :])


def hydrogen_crossings(
    flow: SpectralFlow,
    ladder: Sequence[int] = DEFAULT_LADDER,
    gap_threshold=None,
    constants: PhysicalConstants | None = None,
    workers: int = 1,
) -> list[CrossingReport]:
    """Detect and classify crossings among the six upper curves.

    The default gap threshold is the hyperfine scale ``H``.
    """
    c = constants or DEFAULT_CONSTANTS
    threshold = float(c.hyperfine) if gap_threshold is None else gap_threshold
    cands = detect_candidates(flow, threshold, curves=upper_curves(flow))
    return classify_all(build_subspace_I(c), {}, cands, ladder, transform=_transform(constants), workers=workers)
