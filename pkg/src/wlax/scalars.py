"""Exact rational scalars.

Every coefficient in this package is an exact rational number; there is no
floating point anywhere.  gmpy2.mpq is used when available (it is roughly an
order of magnitude faster than fractions.Fraction on the rewriting-heavy
paths), with fractions.Fraction as a drop-in fallback.  Both types reduce
fractions automatically and keep the denominator positive.
"""

from __future__ import annotations

try:
    from gmpy2 import mpq as QQ
except ImportError:  # pragma: no cover - exercised only without gmpy2
    from fractions import Fraction as QQ

ZERO = QQ(0)
ONE = QQ(1)
HALF = QQ(1, 2)


def qq(value) -> QQ:
    """Coerce ints, rational strings like '-3/4', and rationals to QQ."""
    if isinstance(value, str):
        return QQ(value)
    return QQ(value)


def as_str(value) -> str:
    """Canonical 'p' or 'p/q' rendering."""
    return str(value)


def binomial(n, k: int):
    """Generalized binomial C(n, k) for integer n (possibly negative), k >= 0."""
    if k < 0:
        return ZERO
    num = ONE
    for i in range(k):
        num *= n - i
    den = 1
    for i in range(2, k + 1):
        den *= i
    return num / den
