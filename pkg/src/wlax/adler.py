"""Five-term Adler-type identity for pseudodifferential Lax symbols.

The identity compares {L(z)_lambda L(w)}, computed entrywise through a
declared lambda-bracket, with

    alpha (1 x L(w+l+d)) (z-w-l-d)^-1 (L*(l-z) x 1) W
  - alpha W (L(z) x (z-w-l-d)^-1 L(w))
  - beta  (1 x L(w+l+d)) W+ (z+w+d)^-1 (L(z) x 1)
  + beta  (L*(l-z) x 1) W+ (z+w+d)^-1 (1 x L(w))
  + gamma (1 x (L(w+l+d) - L(w))) (l+d)^-1 ((L*(l-z) - L(z)) x 1)

where W is the permutation on the tensor square, W+ its form twist, L* the
formal adjoint, and every inverse is expanded in decreasing powers of z:
(z-w-l-d)^-1 = sum_j (w+l+d)^j z^(-1-j) and (z+w+d)^-1 with (-w-d)^j; a
power of d acts on everything to its right.  The gamma term divides by
(l+d) exactly; a nonzero remainder is an error, never an approximation.

Both sides live in series in z, w with polynomial lambda and matrix
coefficients on the tensor square.  Truncation windows are tracked through
every operation so the report only quotes fully determined coefficients.
"""

from __future__ import annotations

from .errors import ExactDivisionError, WlaxError
from . import linalg
from .psdo import PsiDOMatrix, adjoint_entrywise, _dmat_mul
from .pva import DiffPoly, PVAContext, lambda_bracket
from .reports import CheckReport
from .scalars import ONE, ZERO, QQ, binomial, qq


def _mzero(size):
    return [[DiffPoly.zero() for _ in range(size)] for _ in range(size)]


def _m_is_zero(mat) -> bool:
    return all(p.is_zero() for row in mat for p in row)


def _m_add(a, b, sign=1):
    if sign > 0:
        return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def _m_scale(a, c):
    return [[x.scale(c) for x in row] for row in a]


def _m_derivative(a):
    return [[x.total_derivative() for x in row] for row in a]


def _m_scalar_left(scal, mat):
    size = len(mat)
    out = _mzero(size)
    for i in range(size):
        for k in range(size):
            c = scal[i][k]
            if c == 0:
                continue
            for j in range(size):
                if not mat[k][j].is_zero():
                    out[i][j] = out[i][j] + mat[k][j].scale(c)
    return out


def _m_scalar_right(mat, scal):
    size = len(mat)
    out = _mzero(size)
    for i in range(size):
        for k in range(size):
            if mat[i][k].is_zero():
                continue
            for j in range(size):
                if scal[k][j] != 0:
                    out[i][j] = out[i][j] + mat[i][k].scale(scal[k][j])
    return out


def _later(a, b):
    """max of two validity floors, None meaning exact."""
    if a is None:
        return b
    if b is None:
        return a
    return max(a, b)


class TSeries:
    """Series in z, w (Laurent, windowed) and lambda (polynomial) whose
    coefficients are matrices on the tensor square."""

    def __init__(self, size: int, keep_z: int, keep_w: int):
        self.size = size
        self.keep_z = keep_z
        self.keep_w = keep_w
        self.coeffs: dict = {}
        self.valid_z = None
        self.valid_w = None

    def clone_empty(self) -> "TSeries":
        out = TSeries(self.size, self.keep_z, self.keep_w)
        out.valid_z = self.valid_z
        out.valid_w = self.valid_w
        return out

    def accumulate(self, key, mat, sign=1):
        zp, wp, _ = key
        if zp < self.keep_z:
            self.valid_z = _later(self.valid_z, self.keep_z)
            return
        if wp < self.keep_w:
            self.valid_w = _later(self.valid_w, self.keep_w)
            return
        cur = self.coeffs.get(key)
        if cur is None:
            self.coeffs[key] = _m_add(_mzero(self.size), mat, sign)
        else:
            self.coeffs[key] = _m_add(cur, mat, sign)
        if _m_is_zero(self.coeffs[key]):
            del self.coeffs[key]

    def top_z(self):
        tops = [k[0] for k in self.coeffs]
        if tops:
            return max(tops)
        return None if self.valid_z is None else self.valid_z - 1

    def top_w(self):
        tops = [k[1] for k in self.coeffs]
        if tops:
            return max(tops)
        return None if self.valid_w is None else self.valid_w - 1

    def add(self, other: "TSeries", sign=1) -> "TSeries":
        out = self.clone_empty()
        out.valid_z = _later(self.valid_z, other.valid_z)
        out.valid_w = _later(self.valid_w, other.valid_w)
        out.coeffs = {k: [row[:] for row in m] for k, m in self.coeffs.items()}
        for k, m in other.coeffs.items():
            out.accumulate(k, m, sign)
        return out

    def scale(self, c) -> "TSeries":
        c = qq(c)
        out = self.clone_empty()
        if c != 0:
            out.coeffs = {k: _m_scale(m, c) for k, m in self.coeffs.items()}
        return out

    def mul(self, other: "TSeries") -> "TSeries":
        out = TSeries(self.size, self.keep_z, self.keep_w)
        vz = None
        if self.valid_z is not None and other.top_z() is not None:
            vz = self.valid_z + other.top_z()
        if other.valid_z is not None and self.top_z() is not None:
            vz = _later(vz, other.valid_z + self.top_z())
        vw = None
        if self.valid_w is not None and other.top_w() is not None:
            vw = self.valid_w + other.top_w()
        if other.valid_w is not None and self.top_w() is not None:
            vw = _later(vw, other.valid_w + self.top_w())
        out.valid_z = vz
        out.valid_w = vw
        for (z1, w1, l1), m1 in self.coeffs.items():
            for (z2, w2, l2), m2 in other.coeffs.items():
                zp, wp = z1 + z2, w1 + w2
                if zp < self.keep_z or wp < self.keep_w:
                    out.valid_z = _later(out.valid_z, self.keep_z)
                    out.valid_w = _later(out.valid_w, self.keep_w)
                    continue
                prod = _dmat_mul(m1, m2)
                if not _m_is_zero(prod):
                    out.accumulate((zp, wp, l1 + l2), prod)
        return out

    def shift_w_lambda_partial(self) -> "TSeries":
        """Apply (w + lambda + d)."""
        out = self.clone_empty()
        if out.valid_w is not None:
            out.valid_w += 1
        for (zp, wp, lp), m in self.coeffs.items():
            if wp + 1 >= self.keep_w:
                out.accumulate((zp, wp + 1, lp), m)
            der = _m_derivative(m)
            out.accumulate((zp, wp, lp + 1), m)
            if not _m_is_zero(der):
                out.accumulate((zp, wp, lp), der)
        return out

    def shift_neg_w_partial(self) -> "TSeries":
        """Apply (-w - d)."""
        out = self.clone_empty()
        if out.valid_w is not None:
            out.valid_w += 1
        for (zp, wp, lp), m in self.coeffs.items():
            if wp + 1 >= self.keep_w:
                out.accumulate((zp, wp + 1, lp), m, -1)
            der = _m_derivative(m)
            if not _m_is_zero(der):
                out.accumulate((zp, wp, lp), der, -1)
        return out

    def shift_lambda_partial(self, times: int = 1) -> "TSeries":
        """Apply (lambda + d)^times."""
        out = self
        for _ in range(times):
            nxt = out.clone_empty()
            for (zp, wp, lp), m in out.coeffs.items():
                nxt.accumulate((zp, wp, lp + 1), m)
                der = _m_derivative(m)
                if not _m_is_zero(der):
                    nxt.accumulate((zp, wp, lp), der)
            out = nxt
        return out

    def shift_z(self, k: int) -> "TSeries":
        out = self.clone_empty()
        if out.valid_z is not None:
            out.valid_z += k
        for (zp, wp, lp), m in self.coeffs.items():
            if zp + k >= self.keep_z:
                out.accumulate((zp + k, wp, lp), m)
            else:
                out.valid_z = _later(out.valid_z, self.keep_z)
        return out

    def shift_w(self, k: int) -> "TSeries":
        out = self.clone_empty()
        if out.valid_w is not None:
            out.valid_w += k
        for (zp, wp, lp), m in self.coeffs.items():
            if wp + k >= self.keep_w:
                out.accumulate((zp, wp + k, lp), m)
            else:
                out.valid_w = _later(out.valid_w, self.keep_w)
        return out

    def matrix_left(self, mat) -> "TSeries":
        """Multiply every coefficient by a DiffPoly matrix on the left."""
        out = self.clone_empty()
        for key, m in self.coeffs.items():
            prod = _dmat_mul(mat, m)
            if not _m_is_zero(prod):
                out.accumulate(key, prod)
        return out

    def scalar_left(self, scal) -> "TSeries":
        out = self.clone_empty()
        for key, m in self.coeffs.items():
            prod = _m_scalar_left(scal, m)
            if not _m_is_zero(prod):
                out.accumulate(key, prod)
        return out

    def scalar_right(self, scal) -> "TSeries":
        out = self.clone_empty()
        for key, m in self.coeffs.items():
            prod = _m_scalar_right(m, scal)
            if not _m_is_zero(prod):
                out.accumulate(key, prod)
        return out


def _kron_left(mat, n):
    """M x 1 on the tensor square."""
    size = n * n
    out = _mzero(size)
    for i1 in range(n):
        for j1 in range(n):
            p = mat[i1][j1]
            if p.is_zero():
                continue
            for i2 in range(n):
                out[i1 * n + i2][j1 * n + i2] = p
    return out


def _kron_right(mat, n):
    size = n * n
    out = _mzero(size)
    for i2 in range(n):
        for j2 in range(n):
            p = mat[i2][j2]
            if p.is_zero():
                continue
            for i1 in range(n):
                out[i1 * n + i2][i1 * n + j2] = p
    return out


def _lax_leg_series(L: PsiDOMatrix, leg: int, keep_z: int, keep_w: int) -> TSeries:
    """(L(z) x 1) for leg 1 or (1 x L(w)) for leg 2 as a TSeries."""
    n = L.rows
    out = TSeries(n * n, keep_z, keep_w)
    if L.floor is not None:
        if leg == 1:
            out.valid_z = L.floor
        else:
            out.valid_w = L.floor
    for k in L.orders():
        mat = L.coefficient_matrix(k)
        big = _kron_left(mat, n) if leg == 1 else _kron_right(mat, n)
        key = (k, 0, 0) if leg == 1 else (0, k, 0)
        out.accumulate(key, big)
    return out


def _adjoint_at_lambda_minus_z(L: PsiDOMatrix, keep_z: int, keep_w: int) -> TSeries:
    """(L*(lambda - z) x 1), expanded in decreasing powers of z."""
    n = L.rows
    star = adjoint_entrywise(L, floor=L.floor)
    out = TSeries(n * n, keep_z, keep_w)
    if star.floor is not None:
        out.valid_z = star.floor
    for k in star.orders():
        big = _kron_left(star.coefficient_matrix(k), n)
        i = 0
        while True:
            zp = k - i
            if k >= 0 and i > k:
                break
            if zp < keep_z:
                out.valid_z = _later(out.valid_z, keep_z)
                break
            c = binomial(k, i) * (ONE if (k - i) % 2 == 0 else -ONE)
            if c != 0:
                out.accumulate((zp, 0, i), _m_scale(big, c))
            i += 1
    return out


def _apply_inverse_z(x: TSeries, plus_w: bool) -> TSeries:
    """(z-w-lambda-d)^-1 x or (z+w+d)^-1 x, expanded in z^-1."""
    out = TSeries(x.size, x.keep_z, x.keep_w)
    top = x.top_z()
    if top is None and x.valid_z is None:
        return out
    y = x
    j = 0
    jmax = 0
    while True:
        shift = -1 - j
        if top is not None and top + shift < x.keep_z:
            break
        term = y.shift_z(shift)
        for key, m in term.coeffs.items():
            out.accumulate(key, m)
        y = y.shift_neg_w_partial() if plus_w else y.shift_w_lambda_partial()
        jmax = j
        j += 1
        if j > 4 * (-min(x.keep_z, -1)) + 8:
            raise WlaxError("geometric expansion failed to terminate")
    out.valid_z = _later(x.keep_z, None if x.valid_z is None else x.valid_z - 1)
    out.valid_w = None if x.valid_w is None else x.valid_w + jmax
    return out


def _substitute_w_shift(L: PsiDOMatrix, x: TSeries, minus_plain: bool = False) -> TSeries:
    """(1 x L(w+lambda+d)) x, optionally minus (1 x L(w)) x."""
    n = L.rows
    orders = L.orders()
    out = TSeries(x.size, x.keep_z, x.keep_w)
    kmax = max(orders) if orders else 0
    kmin = min(orders) if orders else 0
    powers = {0: x}
    cur = x
    for k in range(1, max(kmax, 0) + 1):
        cur = cur.shift_w_lambda_partial()
        powers[k] = cur
    cur = x
    for k in range(-1, min(kmin, 0) - 1, -1):
        cur = _w_geometric_inverse(cur)
        powers[k] = cur
    for k in orders:
        big = _kron_right(L.coefficient_matrix(k), n)
        term = powers[k].matrix_left(big)
        for key, m in term.coeffs.items():
            out.accumulate(key, m)
        if minus_plain:
            plain = x.matrix_left(big).shift_w(k)
            for key, m in plain.coeffs.items():
                out.accumulate(key, m, -1)
        out.valid_z = _later(out.valid_z, term.valid_z)
        out.valid_w = _later(out.valid_w, term.valid_w)
    if L.floor is not None:
        out.valid_w = _later(out.valid_w, L.floor)
    if x.valid_w is not None:
        out.valid_w = _later(out.valid_w, x.valid_w + max(kmax, 0))
    if x.valid_z is not None:
        out.valid_z = _later(out.valid_z, x.valid_z)
    return out


def _w_geometric_inverse(y: TSeries) -> TSeries:
    """(w + lambda + d)^-1 y = sum_i (-1)^i w^(-1-i) (lambda+d)^i y."""
    out = TSeries(y.size, y.keep_z, y.keep_w)
    top = y.top_w()
    cur = y
    i = 0
    while True:
        shift = -1 - i
        if top is None or top + shift < y.keep_w:
            break
        sign = 1 if i % 2 == 0 else -1
        for (zp, wp, lp), m in cur.coeffs.items():
            if wp + shift >= y.keep_w:
                out.accumulate((zp, wp + shift, lp), m, sign)
        cur = cur.shift_lambda_partial()
        i += 1
    out.valid_w = _later(y.keep_w, y.valid_w)
    out.valid_z = y.valid_z
    return out


def _lambda_exact_divide(x: TSeries) -> TSeries:
    """Solve (lambda + d) Y = X exactly; raise if the remainder is nonzero."""
    out = TSeries(x.size, x.keep_z, x.keep_w)
    out.valid_z = x.valid_z
    out.valid_w = x.valid_w
    groups: dict = {}
    for (zp, wp, lp), m in x.coeffs.items():
        groups.setdefault((zp, wp), {})[lp] = m
    for (zp, wp), lam in groups.items():
        top = max(lam)
        ys = {}
        prev = None
        for k in range(top, 0, -1):
            xk = lam.get(k, _mzero(x.size))
            yk = xk if prev is None else _m_add(xk, _m_derivative(prev), -1)
            ys[k - 1] = yk
            prev = yk
        rem = lam.get(0, _mzero(x.size))
        if prev is not None:
            rem = _m_add(rem, _m_derivative(prev), -1)
        if not _m_is_zero(rem):
            raise ExactDivisionError(
                f"gamma-term division by (lambda+d) is not exact at z^{zp} w^{wp}"
            )
        for k, m in ys.items():
            if not _m_is_zero(m):
                out.accumulate((zp, wp, k), m)
    return out


def adler_window(report_keep: int) -> int:
    """Storage floor that certifies coefficients down to report_keep."""
    return report_keep - 6


def check_adler(L: PsiDOMatrix, alpha, beta, gamma, ctx: PVAContext,
                keep: int = -6, form=None, bracket=None) -> CheckReport:
    """Verify the five-term identity for the symbol of L on a window.

    ctx supplies the lambda-bracket between symbol coefficients (for a Lax
    operator of a reduction, pass its reduced context).  keep is the lowest
    z/w exponent the report certifies; internal expansions go deeper.
    """
    alpha, beta, gamma = qq(alpha), qq(beta), qq(gamma)
    if L.rows != L.cols:
        raise WlaxError("the identity needs a square operator")
    n = L.rows
    size = n * n
    keep_z = keep_w = adler_window(keep)
    if beta != 0 and form is None:
        raise WlaxError("beta != 0 requires a bilinear form")
    if bracket is None:
        bracket = lambda a, b: lambda_bracket(ctx, a, b)
    omega = linalg.zeros(size, size)
    for i in range(n):
        for j in range(n):
            omega[i * n + j][j * n + i] = ONE
    lz1 = _lax_leg_series(L, 1, keep_z, keep_w)
    lw2 = _lax_leg_series(L, 2, keep_z, keep_w)
    ls1 = _adjoint_at_lambda_minus_z(L, keep_z, keep_w)
    rhs = TSeries(size, keep_z, keep_w)

    if alpha != 0:
        t1 = _substitute_w_shift(L, _apply_inverse_z(ls1.scalar_right(omega), False))
        rhs = rhs.add(t1.scale(alpha))
        t2 = lz1.mul(_apply_inverse_z(lw2, False)).scalar_left(omega)
        rhs = rhs.add(t2.scale(alpha), -1)
    if beta != 0:
        dag = _dagger_tensor(n, form)
        t3 = _substitute_w_shift(L, _apply_inverse_z(lz1, True).scalar_left(dag))
        rhs = rhs.add(t3.scale(beta), -1)
        t4 = ls1.mul(_apply_inverse_z(lw2, True).scalar_left(dag))
        rhs = rhs.add(t4.scale(beta))
    if gamma != 0:
        divided = _lambda_exact_divide(ls1.add(lz1, -1))
        t5 = _substitute_w_shift(L, divided, minus_plain=True)
        rhs = rhs.add(t5.scale(gamma))

    lhs = TSeries(size, keep_z, keep_w)
    if L.floor is not None:
        lhs.valid_z = L.floor
        lhs.valid_w = L.floor
    orders = L.orders()
    mats = {k: L.coefficient_matrix(k) for k in orders}
    for m in orders:
        for k in orders:
            placed: dict = {}
            for i1 in range(n):
                for j1 in range(n):
                    a = mats[m][i1][j1]
                    if a.is_zero():
                        continue
                    for i2 in range(n):
                        for j2 in range(n):
                            b = mats[k][i2][j2]
                            if b.is_zero():
                                continue
                            br = bracket(a, b)
                            for lp, p in br.coeffs.items():
                                mat = placed.get(lp)
                                if mat is None:
                                    mat = _mzero(size)
                                    placed[lp] = mat
                                mat[i1 * n + i2][j1 * n + j2] = \
                                    mat[i1 * n + i2][j1 * n + j2] + p
            for lp, mat in placed.items():
                lhs.accumulate((m, k, lp), mat)

    diff = lhs.add(rhs, -1)
    vz = diff.valid_z if diff.valid_z is not None else keep_z
    vw = diff.valid_w if diff.valid_w is not None else keep_w
    window_lo = max(vz, vw, keep)
    tops = [k[0] for k in diff.coeffs] + [k[1] for k in diff.coeffs]
    window_hi = max(tops, default=0) + 1
    holds = True
    failure = None
    for key in sorted(diff.coeffs, reverse=True):
        zp, wp, lp = key
        if zp < window_lo or wp < window_lo:
            continue
        mat = diff.coeffs[key]
        for i in range(size):
            for j in range(size):
                if not mat[i][j].is_zero():
                    holds = False
                    if failure is None:
                        failure = (
                            f"z^{zp} w^{wp} lambda^{lp} entry ({i},{j}): "
                            f"{mat[i][j].text(ctx.labels)}"
                        )
    window = {"z": (window_lo, window_hi), "w": (window_lo, window_hi)}
    return CheckReport(holds=holds, window=window, first_failure=failure)


def _dagger_tensor(n, form):
    g = [list(r) for r in form]
    g_inv = linalg.invert(g)
    out = linalg.zeros(n * n, n * n)
    for i in range(n):
        for j in range(n):
            eji = linalg.zeros(n, n)
            eji[j][i] = ONE
            adj = linalg.matmul(g_inv, linalg.matmul(eji, g))
            out = linalg.add(out, linalg.kron(adj, eji))
    return out
