"""Dense exact linear algebra over the rationals.

Matrices are lists of lists (or tuples of tuples) of QQ scalars.  Everything
here is plain Gaussian elimination; sizes in this package never exceed a few
dozen rows, so clarity wins over cleverness.
"""

from __future__ import annotations

from .scalars import ONE, ZERO, QQ, qq


def zeros(rows: int, cols: int):
    return [[ZERO] * cols for _ in range(rows)]


def identity(n: int):
    m = zeros(n, n)
    for i in range(n):
        m[i][i] = ONE
    return m


def copy(m):
    return [list(row) for row in m]


def freeze(m):
    return tuple(tuple(row) for row in m)


def add(a, b):
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def sub(a, b):
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def scale(a, c):
    c = qq(c)
    return [[c * x for x in row] for row in a]


def matmul(a, b):
    rows, inner, cols = len(a), len(b), len(b[0])
    out = zeros(rows, cols)
    for i in range(rows):
        ai = a[i]
        oi = out[i]
        for k in range(inner):
            aik = ai[k]
            if aik == 0:
                continue
            bk = b[k]
            for j in range(cols):
                if bk[j] != 0:
                    oi[j] += aik * bk[j]
    return out


def matvec(a, v):
    return [sum((x * y for x, y in zip(row, v)), ZERO) for row in a]


def transpose(a):
    return [list(col) for col in zip(*a)]


def commutator(a, b):
    return sub(matmul(a, b), matmul(b, a))


def trace(a):
    return sum((a[i][i] for i in range(len(a))), ZERO)


def is_zero(a) -> bool:
    return all(x == 0 for row in a for x in row)


def eq(a, b) -> bool:
    return all(x == y for ra, rb in zip(a, b) for x, y in zip(ra, rb))


def kron(a, b):
    """Kronecker product; index (i1*nb+i2, j1*mb+j2) = a[i1][j1]*b[i2][j2]."""
    na, ma = len(a), len(a[0])
    nb, mb = len(b), len(b[0])
    out = zeros(na * nb, ma * mb)
    for i1 in range(na):
        for j1 in range(ma):
            if a[i1][j1] == 0:
                continue
            for i2 in range(nb):
                for j2 in range(mb):
                    out[i1 * nb + i2][j1 * mb + j2] = a[i1][j1] * b[i2][j2]
    return out


def invert(a):
    """Exact inverse; raises ValueError on a singular matrix."""
    n = len(a)
    work = copy(a)
    inv = identity(n)
    for col in range(n):
        pivot = None
        for r in range(col, n):
            if work[r][col] != 0:
                pivot = r
                break
        if pivot is None:
            raise ValueError("matrix is singular")
        work[col], work[pivot] = work[pivot], work[col]
        inv[col], inv[pivot] = inv[pivot], inv[col]
        p = work[col][col]
        work[col] = [x / p for x in work[col]]
        inv[col] = [x / p for x in inv[col]]
        for r in range(n):
            if r != col and work[r][col] != 0:
                f = work[r][col]
                work[r] = [x - f * y for x, y in zip(work[r], work[col])]
                inv[r] = [x - f * y for x, y in zip(inv[r], inv[col])]
    return inv


def rref(a):
    """Reduced row echelon form; returns (matrix, pivot column list)."""
    m = copy(a)
    rows = len(m)
    cols = len(m[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(cols):
        pivot = None
        for rr in range(r, rows):
            if m[rr][c] != 0:
                pivot = rr
                break
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        p = m[r][c]
        m[r] = [x / p for x in m[r]]
        for rr in range(rows):
            if rr != r and m[rr][c] != 0:
                f = m[rr][c]
                m[rr] = [x - f * y for x, y in zip(m[rr], m[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return m, pivots


def null_space(a):
    """Basis of the right null space as a list of vectors."""
    rows = len(a)
    cols = len(a[0]) if rows else 0
    red, pivots = rref(a)
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for fc in free:
        v = [ZERO] * cols
        v[fc] = ONE
        for r, pc in enumerate(pivots):
            v[pc] = -red[r][fc]
        basis.append(v)
    return basis


def solve(a, b):
    """Solve a x = b for a single rhs vector; returns None if inconsistent."""
    rows = len(a)
    cols = len(a[0]) if rows else 0
    aug = [list(a[r]) + [b[r]] for r in range(rows)]
    red, pivots = rref(aug)
    for r in range(len(pivots), rows):
        if red[r][cols] != 0:
            return None
    if cols in pivots:
        return None
    x = [ZERO] * cols
    for r, pc in enumerate(pivots):
        x[pc] = red[r][cols]
    return x


def rank(a) -> int:
    return len(rref(a)[1])


def vec(m):
    """Flatten a matrix row-major into a vector."""
    return [x for row in m for x in row]
