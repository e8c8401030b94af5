"""Working-precision context and conversions between number representations.

All extended-precision linear algebra goes through one private mpmath
context so the global ``mpmath.mp`` settings of the host program are never
touched.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Callable, Iterable, TypeVar

import mpmath
import numpy as np

from ._exact import ExactMatrix, QQi
from .errors import MomentRangeError

DEFAULT_DPS = 100
THREADS_ENV = "MOMENTINDEX_THREADS"

ctx = mpmath.MPContext()
ctx.dps = DEFAULT_DPS

T = TypeVar("T")
R = TypeVar("R")


def set_precision(dps: int) -> None:
    """Set the working precision in decimal digits (process-wide).

    Call before any computation; sections already materialized at another
    precision are recomputed on the next request.
    """
    if dps < 20:
        raise ValueError("working precision below 20 digits is not supported")
    ctx.dps = int(dps)


def precision() -> int:
    return ctx.dps


def mp_scalar(x):
    """Round an exact or Python scalar once into the working context."""
    if isinstance(x, QQi):
        re = ctx.fdiv(x.re.numerator, x.re.denominator)
        if not x.im:
            return re
        return ctx.mpc(re, ctx.fdiv(x.im.numerator, x.im.denominator))
    if isinstance(x, Fraction):
        return ctx.fdiv(x.numerator, x.denominator)
    if isinstance(x, (np.longdouble, np.clongdouble)):
        return mp_from_longdouble(x)
    if isinstance(x, (complex, np.complexfloating)):
        if x.imag == 0:
            return ctx.mpf(float(x.real))
        return ctx.mpc(float(x.real), float(x.imag))
    if isinstance(x, (float, np.floating)):
        return ctx.mpf(float(x))
    if isinstance(x, (int, np.integer)):
        return ctx.mpf(int(x))
    return ctx.convert(x)


def mp_from_longdouble(x):
    if isinstance(x, np.clongdouble):
        re = ctx.fdiv(*np.longdouble(x.real).as_integer_ratio())
        im = np.longdouble(x.imag)
        if im == 0:
            return re
        return ctx.mpc(re, ctx.fdiv(*im.as_integer_ratio()))
    return ctx.fdiv(*np.longdouble(x).as_integer_ratio())


def to_mp_matrix(a):
    """Coerce nested lists, numpy arrays, ExactMatrix or mpmath matrices."""
    if isinstance(a, ctx.matrix):
        return a
    if isinstance(a, ExactMatrix):
        n, m = a.shape
        out = ctx.matrix(n, m)
        for i in range(n):
            for j in range(m):
                out[i, j] = mp_scalar(a.rows[i][j])
        return out
    if isinstance(a, mpmath.matrix):
        out = ctx.matrix(a.rows, a.cols)
        for i in range(a.rows):
            for j in range(a.cols):
                out[i, j] = ctx.convert(a[i, j])
        return out
    if isinstance(a, np.ndarray):
        # tolist() would round extended-precision scalars to double
        rows = list(a) if a.dtype in (np.longdouble, np.clongdouble) else a.tolist()
    else:
        rows = [list(r) for r in a]
    n = len(rows)
    m = len(rows[0]) if n else 0
    out = ctx.matrix(n, m)
    for i in range(n):
        if len(rows[i]) != m:
            raise ValueError("ragged rows")
        for j in range(m):
            out[i, j] = mp_scalar(rows[i][j])
    return out


def to_float(x) -> float:
    """Round a real scalar to a Python float; refuse to overflow."""
    if isinstance(x, QQi):
        x = x.re
    if isinstance(x, Fraction):
        try:
            v = x.numerator / x.denominator
        except OverflowError as exc:
            raise MomentRangeError(f"value {x} exceeds double range") from exc
    else:
        v = float(ctx.re(x)) if not isinstance(x, (int, float)) else float(x)
    if not math.isfinite(v):
        raise MomentRangeError(f"value {x} exceeds double range")
    return v


def to_numpy(a) -> np.ndarray:
    """Round a matrix to ``complex128``; refuse to overflow."""
    if isinstance(a, np.ndarray):
        out = a.astype(np.complex128)
    elif isinstance(a, ExactMatrix):
        out = np.array([[complex(v) for v in r] for r in a.rows], dtype=np.complex128)
    else:
        out = np.array(
            [[complex(a[i, j]) for j in range(a.cols)] for i in range(a.rows)],
            dtype=np.complex128,
        ).reshape(a.rows, a.cols)
    if not np.all(np.isfinite(out)):
        raise MomentRangeError("matrix entries exceed double range")
    return out


def is_real_matrix(a) -> bool:
    return all(
        not isinstance(a[i, j], ctx.mpc) or a[i, j].imag == 0
        for i in range(a.rows)
        for j in range(a.cols)
    )


def leading(a, n: int):
    """Leading ``n x n`` block of an mpmath matrix."""
    return a[0:n, 0:n]


def thread_count() -> int:
    """Worker threads for independent solves, from ``MOMENTINDEX_THREADS``."""
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def ordered_map(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """Map preserving input order; threads only change scheduling."""
    items = list(items)
    workers = thread_count()
    if workers == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
