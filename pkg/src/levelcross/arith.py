"""Arithmetic contexts: hardware doubles or mpmath at a fixed decimal precision.

Every numeric routine in the package takes a ``precision`` in decimal digits
and asks :func:`get_context` for the matching context.  Precisions up to
:data:`DOUBLE_DIGITS` run on Python floats; anything above runs on a private
:class:`mpmath.MPContext`, so concurrent callers never fight over mpmath's
global precision.
"""

from __future__ import annotations

import math
import sys
import threading
from decimal import Decimal
from fractions import Fraction
from numbers import Real
from typing import Any

import mpmath

DOUBLE_DIGITS = 16
MIN_DIGITS = 15
MAX_DIGITS = 512


class FloatContext:
    """Minimal mpmath-like facade over Python floats."""

    dps = DOUBLE_DIGITS
    eps = sys.float_info.epsilon
    zero = 0.0
    one = 1.0
    is_float = True

    @staticmethod
    def mpf(x: Any) -> float:
        return float(x)

    sqrt = staticmethod(math.sqrt)
    fabs = staticmethod(abs)
    exp = staticmethod(math.exp)
    log = staticmethod(math.log)
    isfinite = staticmethod(math.isfinite)

    @staticmethod
    def ldexp10(k: int) -> float:
        return 10.0**k

    def __repr__(self) -> str:
        return "FloatContext()"


FLOAT = FloatContext()
_local = threading.local()


def check_precision(precision: int) -> int:
    if isinstance(precision, bool) or not isinstance(precision, int):
        raise TypeError(f"precision must be an integer number of digits, got {precision!r}")
    if not MIN_DIGITS <= precision <= MAX_DIGITS:
        raise ValueError(f"precision must lie in [{MIN_DIGITS}, {MAX_DIGITS}] digits, got {precision}")
    return precision


def get_context(precision: int):
    """Return the arithmetic context for ``precision`` decimal digits.

    mpmath contexts are cached per thread; the float context is shared.
    """
    check_precision(precision)
    if precision <= DOUBLE_DIGITS:
        return FLOAT
    cache = getattr(_local, "contexts", None)
    if cache is None:
        cache = _local.contexts = {}
    ctx = cache.get(precision)
    if ctx is None:
        ctx = mpmath.MPContext()
        ctx.dps = precision
        ctx.is_float = False
        ctx.ldexp10 = lambda k, _ctx=ctx: _ctx.mpf(10) ** k
        cache[precision] = ctx
    return ctx


def as_fraction(x: Any) -> Fraction:
    """Convert a real to an exact :class:`Fraction`.

    Floats go through their shortest repr, so ``0.3`` becomes ``3/10``.
    Strings may be decimals or ``"p/q"``.
    """
    if isinstance(x, bool):
        raise TypeError("booleans are not real coefficients")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {x!r}")
        return Fraction(repr(x))
    if isinstance(x, Decimal):
        if not x.is_finite():
            raise ValueError(f"non-finite value {x!r}")
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a real number: {x!r}") from exc
    if hasattr(x, "_mpf_"):
        sign, man, exp, _ = x._mpf_
        if not man and exp:
            raise ValueError(f"non-finite value {x!r}")
        value = Fraction(int(man)) * (Fraction(2) ** exp)
        return -value if sign else value
    if isinstance(x, Real):
        return as_fraction(float(x))
    raise TypeError(f"cannot interpret {x!r} as a real number")


def to_number(ctx, x: Any):
    """Convert ``x`` into a number of context ``ctx`` (rounded once)."""
    if isinstance(x, bool):
        raise TypeError("booleans are not real numbers")
    if ctx.is_float:
        if isinstance(x, (str, Decimal)):
            x = as_fraction(x)
        value = float(x)
    elif isinstance(x, Fraction):
        value = ctx.mpf(x.numerator) / x.denominator
    elif isinstance(x, (str, Decimal)):
        value = to_number(ctx, as_fraction(x))
    elif hasattr(x, "_mpf_"):
        value = ctx.make_mpf(x._mpf_) if _same_or_coarser(ctx, x) else +ctx.mpf(x)
    elif isinstance(x, (int, float)):
        value = ctx.mpf(x)
    elif isinstance(x, Real):
        value = ctx.mpf(float(x))
    else:
        raise TypeError(f"cannot interpret {x!r} as a real number")
    if not ctx.isfinite(value):
        raise ValueError(f"non-finite value {x!r}")
    return value


def _same_or_coarser(ctx, x) -> bool:
    # a raw mpf can be adopted unchanged when its mantissa fits the context
    man, bc = x._mpf_[1], x._mpf_[3]
    return not man or bc <= ctx.prec


def exact_fraction(x) -> Fraction:
    """Exact rational value of a float or mpf (no decimal rounding)."""
    if isinstance(x, float):
        return Fraction(x)
    return as_fraction(x)


def portable(x):
    """Picklable exact form of a context number (for process pools)."""
    return x._mpf_ if hasattr(x, "_mpf_") else float(x)


def from_portable(ctx, raw):
    return float(raw) if ctx.is_float else ctx.make_mpf(raw)


def format_number(x, digits: int) -> str:
    """Deterministic decimal rendering with ``digits`` significant digits."""
    raw = mpmath.mpf(x)._mpf_ if isinstance(x, (int, float)) else x._mpf_
    return mpmath.libmp.to_str(raw, digits, min_fixed=-6, max_fixed=digits + 1)
