"""Truncated Laurent-series matrices and generalized quasideterminants.

A SeriesMatrix is a rectangular matrix whose entries are truncated series
sum_{k <= top} c_k zeta^k in a formal variable commuting with the
coefficients, which live in an arbitrary (possibly noncommutative) ring
presented through a small Ring adapter.  One implementation serves exact
rationals, enveloping-algebra coefficients and differential polynomials.

Truncation bookkeeping: floor=None means the matrix is exact; otherwise all
powers >= floor are correct and anything below is unknown.  Products combine
floors conservatively, so every computed coefficient is trustworthy.
"""

from __future__ import annotations

from .errors import InversionError
from . import linalg
from .scalars import ONE, ZERO, qq
from .uea import PBWContext, PBWPoly


class ScalarRing:
    """Exact rational coefficients."""

    def zero(self):
        return ZERO

    def one(self):
        return ONE

    def is_zero(self, x) -> bool:
        return x == 0

    def scalar(self, c):
        return qq(c)

    def scale(self, x, c):
        return x * c

    def as_scalar(self, x):
        return x


class PBWRing:
    """Enveloping-algebra coefficients bound to a PBW context."""

    def __init__(self, ctx: PBWContext):
        self.ctx = ctx

    def zero(self):
        return self.ctx.zero()

    def one(self):
        return self.ctx.one()

    def is_zero(self, x) -> bool:
        return x.is_zero()

    def scalar(self, c):
        return self.ctx.scalar(c)

    def scale(self, x, c):
        return x.scale(c)

    def as_scalar(self, x):
        if not x.terms:
            return ZERO
        if set(x.terms) == {()}:
            return x.terms[()]
        return None


def _combine_top(entries, floor):
    top = None
    for series in entries.values():
        for k in series:
            if top is None or k > top:
                top = k
    if top is None and floor is not None:
        return floor - 1
    return top


class SeriesMatrix:
    """Matrix of truncated Laurent series over a coefficient ring."""

    def __init__(self, ring, rows: int, cols: int, entries=None, floor=None):
        self.ring = ring
        self.rows = rows
        self.cols = cols
        self.entries = entries if entries is not None else {}
        self.floor = floor

    @classmethod
    def identity(cls, ring, n: int, power: int = 0) -> "SeriesMatrix":
        return cls(ring, n, n, {(i, i): {power: ring.one()} for i in range(n)})

    @classmethod
    def from_coefficient_matrices(cls, ring, rows, cols, by_power, floor=None):
        """Build from {power: matrix-of-ring-elements}."""
        entries = {}
        for k, mat in by_power.items():
            for i in range(rows):
                for j in range(cols):
                    x = mat[i][j]
                    if not ring.is_zero(x):
                        entries.setdefault((i, j), {})[k] = x
        return cls(ring, rows, cols, entries, floor)

    def copy(self) -> "SeriesMatrix":
        return SeriesMatrix(self.ring, self.rows, self.cols,
                            {ij: dict(s) for ij, s in self.entries.items()},
                            self.floor)

    def top_order(self):
        return _combine_top(self.entries, self.floor)

    def coefficient_matrix(self, power: int):
        out = [[self.ring.zero() for _ in range(self.cols)] for _ in range(self.rows)]
        for (i, j), series in self.entries.items():
            if power in series:
                out[i][j] = series[power]
        return out

    def powers(self):
        ks = set()
        for series in self.entries.values():
            ks.update(series)
        return sorted(ks)

    def entry(self, i: int, j: int) -> dict:
        return self.entries.get((i, j), {})

    def _store(self, i, j, k, val):
        if self.ring.is_zero(val):
            series = self.entries.get((i, j))
            if series is not None:
                series.pop(k, None)
                if not series:
                    del self.entries[(i, j)]
        else:
            self.entries.setdefault((i, j), {})[k] = val

    def _accumulate(self, i, j, k, val):
        series = self.entries.setdefault((i, j), {})
        new = series.get(k)
        new = val if new is None else new + val
        if self.ring.is_zero(new):
            series.pop(k, None)
            if not series:
                del self.entries[(i, j)]
        else:
            series[k] = new

    def __add__(self, other: "SeriesMatrix") -> "SeriesMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise InversionError("shape mismatch in series-matrix sum")
        floor = _max_floor(self.floor, other.floor)
        out = self.copy()
        out.floor = floor
        for (i, j), series in other.entries.items():
            for k, v in series.items():
                out._accumulate(i, j, k, v)
        return out.truncate(floor)

    def __neg__(self) -> "SeriesMatrix":
        return SeriesMatrix(
            self.ring, self.rows, self.cols,
            {ij: {k: -v for k, v in s.items()} for ij, s in self.entries.items()},
            self.floor,
        )

    def __sub__(self, other: "SeriesMatrix") -> "SeriesMatrix":
        return self + (-other)

    def __mul__(self, other: "SeriesMatrix") -> "SeriesMatrix":
        if self.cols != other.rows:
            raise InversionError("shape mismatch in series-matrix product")
        floor = None
        if self.floor is not None:
            ot = other.top_order()
            floor = None if ot is None else self.floor + ot
        if other.floor is not None:
            st = self.top_order()
            f2 = None if st is None else other.floor + st
            floor = _max_floor(floor, f2)
        out = SeriesMatrix(self.ring, self.rows, other.cols, {}, floor)
        for (i, k1), s1 in self.entries.items():
            for j in range(other.cols):
                s2 = other.entries.get((k1, j))
                if not s2:
                    continue
                for p1, c1 in s1.items():
                    for p2, c2 in s2.items():
                        p = p1 + p2
                        if floor is not None and p < floor:
                            continue
                        out._accumulate(i, j, p, c1 * c2)
        return out

    def scale(self, c) -> "SeriesMatrix":
        elt = self.ring.scalar(c)
        out = SeriesMatrix(self.ring, self.rows, self.cols, {}, self.floor)
        for (i, j), series in self.entries.items():
            for k, v in series.items():
                out._store(i, j, k, v * elt)
        return out

    def shift(self, power: int) -> "SeriesMatrix":
        """Multiply by zeta^power."""
        floor = None if self.floor is None else self.floor + power
        return SeriesMatrix(
            self.ring, self.rows, self.cols,
            {ij: {k + power: v for k, v in s.items()} for ij, s in self.entries.items()},
            floor,
        )

    def truncate(self, floor) -> "SeriesMatrix":
        if floor is None:
            return self
        out = SeriesMatrix(self.ring, self.rows, self.cols, {}, _max_floor(self.floor, floor))
        for (i, j), series in self.entries.items():
            kept = {k: v for k, v in series.items() if k >= floor}
            if kept:
                out.entries[(i, j)] = kept
        if out.floor is None or out.floor < floor:
            out.floor = floor
        return out

    def block(self, row_idx, col_idx) -> "SeriesMatrix":
        """Submatrix on the given ambient row/column indices."""
        out = SeriesMatrix(self.ring, len(row_idx), len(col_idx), {}, self.floor)
        for bi, i in enumerate(row_idx):
            for bj, j in enumerate(col_idx):
                series = self.entries.get((i, j))
                if series:
                    out.entries[(bi, bj)] = dict(series)
        return out

    def embed(self, row_idx, col_idx, rows: int, cols: int) -> "SeriesMatrix":
        """Place this block into a rows x cols ambient matrix."""
        out = SeriesMatrix(self.ring, rows, cols, {}, self.floor)
        for (bi, bj), series in self.entries.items():
            out.entries[(row_idx[bi], col_idx[bj])] = dict(series)
        return out

    def is_zero(self) -> bool:
        return not self.entries

    def eq_to_floor(self, other: "SeriesMatrix") -> bool:
        diff = self - other
        return diff.is_zero()

    def to_json(self) -> dict:
        ents = {}
        for (i, j), series in sorted(self.entries.items()):
            ents[f"{i},{j}"] = [[k, _coeff_text(v)] for k, v in sorted(series.items(), reverse=True)]
        return {
            "rows": self.rows,
            "cols": self.cols,
            "truncation": self.floor,
            "entries": ents,
        }


def _coeff_text(v):
    if hasattr(v, "text"):
        return v.text()
    return str(v)


def _max_floor(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return max(a, b)


def _ring_matmul(ring, a, b):
    n, m, p = len(a), len(b), len(b[0])
    out = [[ring.zero() for _ in range(p)] for _ in range(n)]
    for i in range(n):
        ai = a[i]
        oi = out[i]
        for k in range(m):
            x = ai[k]
            if ring.is_zero(x):
                continue
            bk = b[k]
            for j in range(p):
                if not ring.is_zero(bk[j]):
                    oi[j] = oi[j] + x * bk[j]
    return out


def invert_series_matrix(M: SeriesMatrix, floor=None) -> SeriesMatrix:
    """Two-sided inverse up to truncation.

    The leading coefficient matrix must consist of scalars and be invertible
    over the rationals; lower coefficients of the inverse are then solved by
    descending recursion on the convolution equations M * B = id.
    """
    if M.rows != M.cols:
        raise InversionError("only square series matrices can be inverted")
    top = M.top_order()
    if top is None:
        raise InversionError("cannot invert the zero matrix")
    ring = M.ring
    n = M.rows
    lead = M.coefficient_matrix(top)
    scalars = []
    for row in lead:
        out_row = []
        for x in row:
            s = ring.as_scalar(x)
            if s is None:
                raise InversionError("leading coefficient is not a scalar matrix")
            out_row.append(s)
        scalars.append(out_row)
    try:
        lead_inv = linalg.invert(scalars)
    except ValueError:
        raise InversionError("leading form is not invertible") from None
    lower_powers = [k for k in M.powers() if k < top]
    if not lower_powers and M.floor is None:
        return SeriesMatrix.from_coefficient_matrices(
            ring, n, n, {-top: [[ring.scalar(x) for x in row] for row in lead_inv]},
        )
    if floor is None:
        if M.floor is None:
            raise InversionError(
                "a truncation order is required to invert a genuine series"
            )
        floor = M.floor - top
    m_coeffs = {k: M.coefficient_matrix(k) for k in lower_powers}
    b_coeffs = {-top: [[ring.scalar(x) for x in row] for row in lead_inv]}
    for q in range(-top - 1, floor - 1, -1):
        r = q + top
        rhs = None
        for k in lower_powers:
            prev = b_coeffs.get(r - k)
            if prev is None:
                continue
            contrib = _ring_matmul(ring, m_coeffs[k], prev)
            rhs = contrib if rhs is None else [
                [x + y for x, y in zip(ra, rb)] for ra, rb in zip(rhs, contrib)
            ]
        if rhs is None:
            continue
        bq = [[ring.zero() for _ in range(n)] for _ in range(n)]
        for i in range(n):
            for k in range(n):
                c = lead_inv[i][k]
                if c == 0:
                    continue
                for j in range(n):
                    if not ring.is_zero(rhs[k][j]):
                        bq[i][j] = bq[i][j] - ring.scale(rhs[k][j], c)
        if any(not ring.is_zero(x) for row in bq for x in row):
            b_coeffs[q] = bq
    valid = floor if M.floor is None else max(floor, M.floor - 2 * top)
    out = SeriesMatrix.from_coefficient_matrices(ring, n, n, b_coeffs, floor=valid)
    return out.truncate(valid)


def _invert_to(M: SeriesMatrix, floor: int) -> SeriesMatrix:
    """Invert and insist the result is valid down to floor."""
    out = invert_series_matrix(M, floor)
    if out.floor is not None and out.floor > floor:
        raise InversionError(
            f"input truncation {M.floor} is too shallow to invert down to {floor}"
        )
    return out.truncate(floor)


def quasideterminant(M: SeriesMatrix, u_idx, w_idx, floor=None) -> SeriesMatrix:
    """|M|_{U,W} = (id_W M^-1 id_U)^-1 for coordinate subspaces U, W.

    u_idx and w_idx list ambient indices; the result is shaped
    Hom(span W, span U), i.e. len(u) rows by len(w) columns.
    """
    if len(u_idx) != len(w_idx):
        raise InversionError("quasideterminant needs dim U = dim W")
    if floor is None:
        inv = invert_series_matrix(M)
        inner = inv.block(list(w_idx), list(u_idx))
        return invert_series_matrix(inner)
    # Probe the leading order t of the inner block; inverting it loses 2t of
    # depth, so the outer inverse must be computed down to floor + 2t.
    mtop = M.top_order() or 0
    probe_depth = min(floor, 0) - max(mtop, 0) - M.rows - 1
    inv = _invert_to(M, probe_depth)
    t = inv.block(list(w_idx), list(u_idx)).top_order()
    if t is None:
        raise InversionError("inner block of the inverse vanishes to probe depth")
    need = floor + 2 * t
    if need < probe_depth:
        inv = _invert_to(M, need)
    inner = inv.block(list(w_idx), list(u_idx))
    return _invert_to(inner, floor)


def quasidet_explicit(M: SeriesMatrix, u_idx, w_idx, floor=None) -> SeriesMatrix:
    """Schur-complement form id_U M id_W - id_U M id_W' (id_U' M id_W')^-1 id_U' M id_W."""
    u_idx = list(u_idx)
    w_idx = list(w_idx)
    uc = [i for i in range(M.rows) if i not in u_idx]
    wc = [j for j in range(M.cols) if j not in w_idx]
    a = M.block(u_idx, w_idx)
    b = M.block(u_idx, wc)
    d = M.block(uc, wc)
    c = M.block(uc, w_idx)
    if b.is_zero() or c.is_zero():
        return a if floor is None else a.truncate(floor)
    d_inv = invert_series_matrix(d, floor=None if floor is None else None) \
        if floor is None else _invert_to_product(d, b, c, floor)
    if floor is None:
        return a - b * d_inv * c
    return (a - b * d_inv * c).truncate(floor)


def _invert_to_product(d, b, c, floor):
    """Invert d deep enough that b * d^-1 * c is valid down to floor."""
    bt = b.top_order() or 0
    ct = c.top_order() or 0
    need = floor - max(bt, 0) - max(ct, 0)
    return _invert_to(d, need)
