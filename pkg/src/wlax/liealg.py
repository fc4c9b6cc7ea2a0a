"""Classical Lie algebras with their standard representations.

Builds gl_N, sl_N, so_N and sp_N as matrix Lie algebras over the rationals,
sl2-triples from partitions (Jordan type) for gl/sl, ad-x gradings, dual
bases for the trace form, the shift endomorphism used by the finite Lax
construction, and the permutation/adjoint tensors on V (x) V.

Conventions:
  * trace form (a|b) = tr_V(AB) for the standard representation,
  * so_N carries the identity bilinear form (epsilon = +1),
  * sp_N carries the block form J = [[0, I],[-I, 0]] (epsilon = -1),
  * any non-degenerate form of the right symmetry may be passed instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import linalg
from .errors import GradingError, UnsupportedAlgebraError, WlaxError
from .scalars import ONE, ZERO, QQ, qq

KINDS = ("gl", "sl", "so", "sp")


def _matrix_unit(n: int, i: int, j: int):
    m = linalg.zeros(n, n)
    m[i][j] = ONE
    return m


class LieAlgebra:
    """Basis, representation, trace form and bracket table of a matrix Lie algebra.

    Instances are immutable after construction and safe to share.
    """

    def __init__(self, kind: str, n: int, labels, rep, epsilon=None, form=None):
        self.kind = kind
        self.n = n
        self.labels = tuple(labels)
        self.rep = tuple(linalg.freeze(m) for m in rep)
        self.dim = len(self.rep)
        self.epsilon = epsilon
        self.form = linalg.freeze(form) if form is not None else None
        gram = [[linalg.trace(linalg.matmul(a, b)) for b in self.rep] for a in self.rep]
        try:
            gram_inv = linalg.invert(gram)
        except ValueError:
            raise UnsupportedAlgebraError(
                "trace form is degenerate on the chosen basis"
            ) from None
        self.gram = linalg.freeze(gram)
        # dual basis u^j = sum_k (G^-1)_{jk} u_k, so (u_i | u^j) = delta_ij
        self.dual_vectors = linalg.freeze(gram_inv)
        self._flat = [[self.rep[k][i][j] for k in range(self.dim)]
                      for i in range(n) for j in range(n)]
        self._bracket_table = {}
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                coords = self.coordinates(linalg.commutator(self.rep[i], self.rep[j]))
                if coords is None:
                    raise UnsupportedAlgebraError("basis does not close under brackets")
                entry = {k: c for k, c in enumerate(coords) if c != 0}
                self._bracket_table[(i, j)] = entry
                self._bracket_table[(j, i)] = {k: -c for k, c in entry.items()}

    def coordinates(self, matrix):
        """Coefficient vector of an NxN matrix over the basis, or None."""
        return linalg.solve(self._flat, linalg.vec(matrix))

    def matrix_of(self, coeffs):
        """Representation matrix of a coefficient vector."""
        out = linalg.zeros(self.n, self.n)
        for k, c in enumerate(coeffs):
            if c != 0:
                out = linalg.add(out, linalg.scale(self.rep[k], c))
        return out

    def dual_matrix(self, i: int):
        """phi(u^i), the representation matrix of the i-th dual basis vector."""
        return self.matrix_of(self.dual_vectors[i])

    def bracket_coords(self, i: int, j: int) -> dict:
        """Structure constants of [u_i, u_j] as a sparse {k: c} map."""
        if i == j:
            return {}
        return self._bracket_table[(i, j)]

    def index_of(self, label: str) -> int:
        return self.labels.index(label)

    def __repr__(self):
        return f"LieAlgebra({self.kind}{self.n}, dim={self.dim})"


def trace_form(alg: LieAlgebra, a, b):
    """(a|b) = tr_V(AB) for coefficient vectors a, b."""
    total = ZERO
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        row = alg.gram[i]
        for j, bj in enumerate(b):
            if bj != 0:
                total += ai * row[j] * bj
    return total


def _gl_basis(n):
    labels, rep = [], []
    for i in range(n):
        for j in range(n):
            labels.append(f"e{i + 1}{j + 1}")
            rep.append(_matrix_unit(n, i, j))
    return labels, rep


def _sl_basis(n):
    labels, rep = [], []
    for i in range(n):
        for j in range(n):
            if i != j:
                labels.append(f"e{i + 1}{j + 1}")
                rep.append(_matrix_unit(n, i, j))
    for i in range(n - 1):
        labels.append(f"h{i + 1}")
        m = linalg.zeros(n, n)
        m[i][i] = ONE
        m[i + 1][i + 1] = -ONE
        rep.append(m)
    return labels, rep


def _form_preserving_basis(n, form, prefix):
    """Echelon basis of {A : A^T G + G A = 0} labelled by leading entry."""
    constraint = []
    for p in range(n):
        for q in range(n):
            # coefficient of A[r][s] in (A^T G + G A)[p][q]
            row = [ZERO] * (n * n)
            for r in range(n):
                row[r * n + p] += form[r][q]
                row[r * n + q] += form[p][r]
            constraint.append(row)
    vectors = linalg.null_space(constraint)
    labels, rep = [], []
    for v in vectors:
        m = [[v[r * n + s] for s in range(n)] for r in range(n)]
        lead = next((r, s) for r in range(n) for s in range(n) if m[r][s] != 0)
        labels.append(f"{prefix}{lead[0] + 1}{lead[1] + 1}")
        rep.append(m)
    return labels, rep


def _default_form(kind, n):
    if kind == "so":
        return linalg.identity(n)
    half = n // 2
    j = linalg.zeros(n, n)
    for i in range(half):
        j[i][half + i] = ONE
        j[half + i][i] = -ONE
    return j


def build_algebra(kind: str, n: int, form=None) -> LieAlgebra:
    """Construct gl/sl/so/sp of size N with the standard representation."""
    if kind not in KINDS:
        raise UnsupportedAlgebraError(f"unsupported algebra kind {kind!r}")
    if n < 1:
        raise UnsupportedAlgebraError("N must be at least 1")
    if kind in ("gl", "sl"):
        if form is not None:
            raise UnsupportedAlgebraError(f"{kind}_N carries no bilinear form on V")
        labels, rep = _gl_basis(n) if kind == "gl" else _sl_basis(n)
        return LieAlgebra(kind, n, labels, rep)
    if kind == "sp" and n % 2 != 0:
        raise UnsupportedAlgebraError("sp_N requires even N")
    epsilon = 1 if kind == "so" else -1
    if form is None:
        form = _default_form(kind, n)
    else:
        form = [[qq(x) for x in row] for row in form]
        sym = linalg.transpose(form)
        expected = form if epsilon == 1 else linalg.scale(form, -1)
        if not linalg.eq(sym, expected):
            raise UnsupportedAlgebraError(
                "form has the wrong symmetry for " + kind
            )
        try:
            linalg.invert(form)
        except ValueError:
            raise UnsupportedAlgebraError("form is degenerate") from None
    prefix = "a" if kind == "so" else "s"
    labels, rep = _form_preserving_basis(n, form, prefix)
    if kind == "so" and n == 1:
        raise UnsupportedAlgebraError("so_1 is zero-dimensional")
    return LieAlgebra(kind, n, labels, rep, epsilon=epsilon, form=form)


@dataclass(frozen=True)
class Sl2Triple:
    """Coefficient vectors of e, x, f with [x,e]=e, [x,f]=-f, [e,f]=2x."""

    e: tuple
    x: tuple
    f: tuple

    def matrices(self, alg: LieAlgebra):
        return (alg.matrix_of(self.e), alg.matrix_of(self.x), alg.matrix_of(self.f))


def _validate_triple(alg: LieAlgebra, e, x, f) -> Sl2Triple:
    E, X, F = alg.matrix_of(e), alg.matrix_of(x), alg.matrix_of(f)
    if not linalg.eq(linalg.commutator(X, E), E):
        raise GradingError("[x,e] != e")
    if not linalg.eq(linalg.commutator(X, F), linalg.scale(F, -1)):
        raise GradingError("[x,f] != -f")
    if not linalg.eq(linalg.commutator(E, F), linalg.scale(X, 2)):
        raise GradingError("[e,f] != 2x")
    power = F
    for _ in range(alg.n):
        power = linalg.matmul(power, F)
    if not linalg.is_zero(power):
        raise GradingError("f is not nilpotent in the representation")
    return Sl2Triple(tuple(e), tuple(x), tuple(f))


def triple_from_matrices(alg: LieAlgebra, e_mat, x_mat, f_mat) -> Sl2Triple:
    """Validate a user-supplied (e, x, f) given as matrices in End(V)."""
    coords = []
    for name, m in (("e", e_mat), ("x", x_mat), ("f", f_mat)):
        mm = [[qq(v) for v in row] for row in m]
        c = alg.coordinates(mm)
        if c is None:
            raise GradingError(f"{name} does not lie in the algebra")
        coords.append(c)
    return _validate_triple(alg, *coords)


def sl2_from_partition(alg: LieAlgebra, partition) -> Sl2Triple:
    """Jordan-block sl2-triple of the given Jordan type, for gl/sl only.

    Each part p contributes a lower-shift block to f, diag((p-1)/2, ...,
    -(p-1)/2) to x and the weighted upper shift with entries r(p-r) to e.
    """
    if alg.kind not in ("gl", "sl"):
        raise UnsupportedAlgebraError(
            "partition triples are built for gl/sl only; "
            "supply (e, x, f) matrices for so/sp"
        )
    parts = sorted((int(p) for p in partition), reverse=True)
    if any(p < 1 for p in parts) or sum(parts) != alg.n:
        raise WlaxError(f"partition {tuple(partition)} does not sum to {alg.n}")
    n = alg.n
    E, X, F = linalg.zeros(n, n), linalg.zeros(n, n), linalg.zeros(n, n)
    offset = 0
    for p in parts:
        for r in range(p):
            X[offset + r][offset + r] = QQ(p - 1 - 2 * r, 2)
        for r in range(1, p):
            F[offset + r][offset + r - 1] = ONE
            E[offset + r - 1][offset + r] = qq(r * (p - r))
        offset += p
    return triple_from_matrices(alg, E, X, F)


@dataclass(frozen=True)
class Grading:
    """ad-x grading of the basis together with the data the Lax operators need.

    degrees[i] is the ad-x eigenvalue of basis element i.  v_degrees[c] is
    the X-eigenvalue of the c-th coordinate of V (X must act diagonally).
    centralizer is a full basis of g^f as coefficient vectors; I_f lists the
    basis indices that happen to lie in g^f (the construction basis of gl/sl
    need not contain a complete g^f basis).
    """

    degrees: tuple
    v_degrees: tuple
    d: int
    shift: tuple
    i_f: tuple
    centralizer: tuple
    f_pair: tuple
    pbw_rank: tuple

    def indices(self, predicate):
        return tuple(i for i, k in enumerate(self.degrees) if predicate(k))

    @property
    def geq1(self):
        return self.indices(lambda k: k >= 1)

    @property
    def positive(self):
        return self.indices(lambda k: k > 0)

    @property
    def leq_half(self):
        return self.indices(lambda k: 2 * k <= 1)

    @property
    def gt_half(self):
        return self.indices(lambda k: 2 * k > 1)

    def by_degree(self):
        out = {}
        for i, k in enumerate(self.degrees):
            out.setdefault(k, []).append(i)
        return out

    def v_block(self, eigenvalue):
        k = qq(eigenvalue)
        return tuple(c for c, kv in enumerate(self.v_degrees) if kv == k)


def _ad_x_degree(alg, X, i):
    br = linalg.commutator(X, alg.rep[i])
    base = alg.rep[i]
    k = None
    for r in range(alg.n):
        for c in range(alg.n):
            if base[r][c] != 0:
                k = br[r][c] / base[r][c]
                break
        if k is not None:
            break
    if not linalg.eq(br, linalg.scale(base, k)):
        return None
    return k


def grading_data(alg: LieAlgebra, triple: Sl2Triple) -> Grading:
    """Grading, dual-basis pairing with f, shift matrix and PBW ranks.

    Requires every basis element to be an ad-x eigenvector and X = phi(x) to
    be diagonal; adapt_to_grading produces an equivalent algebra satisfying
    both when a user-supplied so/sp triple does not.
    """
    E, X, F = triple.matrices(alg)
    for c in range(alg.n):
        for r in range(alg.n):
            if r != c and X[r][c] != 0:
                raise GradingError(
                    "phi(x) is not diagonal; call adapt_to_grading first"
                )
    degrees = []
    for i in range(alg.dim):
        k = _ad_x_degree(alg, X, i)
        if k is None:
            raise GradingError(
                "basis is not ad-x homogeneous; call adapt_to_grading first"
            )
        if (2 * k) != int(2 * k):
            raise GradingError("ad-x eigenvalues must be half-integers")
        degrees.append(k)
    v_degrees = tuple(X[c][c] for c in range(alg.n))
    d2 = max(v_degrees)
    d = int(2 * d2)
    # shift matrix: -sum over deg >= 1 of phi(u^i) phi(u_i)
    shift = linalg.zeros(alg.n, alg.n)
    for i, k in enumerate(degrees):
        if k >= 1:
            shift = linalg.sub(shift, linalg.matmul(alg.dual_matrix(i), alg.rep[i]))
    i_f = tuple(
        i for i in range(alg.dim)
        if linalg.is_zero(linalg.commutator(alg.rep[i], F))
    )
    ad_f = [alg.coordinates(linalg.commutator(alg.rep[i], F)) for i in range(alg.dim)]
    centralizer = tuple(tuple(v) for v in linalg.null_space(linalg.transpose(ad_f)))
    f_pair = tuple(linalg.matvec(alg.gram, list(triple.f)))
    order = sorted(range(alg.dim), key=lambda i: (degrees[i], i))
    rank = [0] * alg.dim
    for pos, i in enumerate(order):
        rank[i] = pos
    return Grading(
        degrees=tuple(degrees),
        v_degrees=v_degrees,
        d=d,
        shift=linalg.freeze(shift),
        i_f=i_f,
        centralizer=centralizer,
        f_pair=f_pair,
        pbw_rank=tuple(rank),
    )


def _half_integer_eigensplit(mat, bound):
    """Eigenvectors of an exact matrix whose spectrum is half-integral."""
    dim = len(mat)
    blocks = []
    total = 0
    for twice in range(-2 * bound, 2 * bound + 1):
        k = QQ(twice, 2)
        shifted = [[mat[r][c] - (k if r == c else ZERO) for c in range(dim)]
                   for r in range(dim)]
        vs = linalg.null_space(shifted)
        if vs:
            blocks.append((k, vs))
            total += len(vs)
    if total != dim:
        raise GradingError("matrix is not semisimple with half-integer spectrum")
    return blocks


def adapt_to_grading(alg: LieAlgebra, triple: Sl2Triple):
    """Equivalent algebra whose basis is graded and whose X is diagonal.

    Conjugates the representation into an X-eigenbasis of V and rebuilds the
    Lie algebra basis from ad-x eigenvectors, listing g^f vectors first
    inside each eigenspace.  Returns (algebra, triple); results of the Lax
    constructions transform covariantly, so identity verdicts are unchanged.
    """
    E, X, F = triple.matrices(alg)
    v_blocks = _half_integer_eigensplit(X, alg.n)
    p_cols = []
    for _, vs in sorted(v_blocks, key=lambda kv: -kv[0]):
        p_cols.extend(vs)
    p = linalg.transpose(p_cols)
    p_inv = linalg.invert(p)
    rep_v = [linalg.matmul(p_inv, linalg.matmul(m, p)) for m in alg.rep]
    # ad-x eigenbasis of g, g^f-first inside each eigenspace
    adx = linalg.transpose(
        [alg.coordinates(linalg.commutator(X, m)) for m in alg.rep]
    )
    adf = linalg.transpose(
        [alg.coordinates(linalg.commutator(m, F)) for m in alg.rep]
    )
    new_vectors = []
    for k, vs in sorted(_half_integer_eigensplit(adx, 2 * alg.n), key=lambda kv: kv[0]):
        images = linalg.transpose([linalg.matvec(adf, v) for v in vs])
        kernel_combos = linalg.null_space(images)
        chosen = [
            [sum((c * v[j] for c, v in zip(combo, vs)), ZERO) for j in range(alg.dim)]
            for combo in kernel_combos
        ]
        stack = [list(v) for v in chosen]
        for v in vs:
            if linalg.rank(stack + [list(v)]) > len(stack):
                stack.append(list(v))
        new_vectors.extend(stack)
    new_rep = []
    old_matrix_of = alg.matrix_of
    for v in new_vectors:
        m = old_matrix_of(v)
        new_rep.append(linalg.matmul(p_inv, linalg.matmul(m, p)))
    labels = [f"w{i + 1}" for i in range(len(new_rep))]
    form = None
    if alg.form is not None:
        # <Pv1 | Pv2> in the new coordinates
        form = linalg.matmul(linalg.transpose(p), linalg.matmul(alg.form, p))
    adapted = LieAlgebra(alg.kind, alg.n, labels, new_rep,
                         epsilon=alg.epsilon, form=form)
    new_triple = triple_from_matrices(
        adapted,
        linalg.matmul(p_inv, linalg.matmul(E, p)),
        linalg.matmul(p_inv, linalg.matmul(X, p)),
        linalg.matmul(p_inv, linalg.matmul(F, p)),
    )
    return adapted, new_triple


@dataclass(frozen=True)
class OmegaTensor:
    """Element of End(V) (x) End(V) stored as an N^2 x N^2 matrix."""

    matrix: tuple
    variant: str


def omega_maps(alg: LieAlgebra):
    """Permutation tensor on V (x) V and its form-adjoint-on-first-leg twin.

    The dagger variant requires the algebra to carry a bilinear form; it is
    None for gl/sl.
    """
    n = alg.n
    plain = linalg.zeros(n * n, n * n)
    for i in range(n):
        for j in range(n):
            plain[i * n + j][j * n + i] = ONE
    if alg.form is None:
        return OmegaTensor(linalg.freeze(plain), "plain"), None
    g = [list(r) for r in alg.form]
    g_inv = linalg.invert(g)
    dagger = linalg.zeros(n * n, n * n)
    for i in range(n):
        for j in range(n):
            # Omega = sum E_ij (x) E_ji ; first leg E_ij -> G^-1 E_ji G
            adj = linalg.matmul(g_inv, linalg.matmul(_matrix_unit(n, j, i), g))
            contrib = linalg.kron(adj, _matrix_unit(n, j, i))
            dagger = linalg.add(dagger, contrib)
    return OmegaTensor(linalg.freeze(plain), "plain"), OmegaTensor(linalg.freeze(dagger), "dagger")


def algebra_to_json(alg: LieAlgebra) -> dict:
    """JSON-serializable descriptor: labels, sparse structure constants, rep."""
    triples = []
    for i in range(alg.dim):
        for j in range(alg.dim):
            for k, c in sorted(alg.bracket_coords(i, j).items()):
                triples.append([i, j, k, str(c)])
    doc = {
        "kind": alg.kind,
        "n": alg.n,
        "dim": alg.dim,
        "basis": list(alg.labels),
        "structure": triples,
        "rep": {
            alg.labels[i]: [[str(x) for x in row] for row in alg.rep[i]]
            for i in range(alg.dim)
        },
    }
    if alg.epsilon is not None:
        doc["epsilon"] = alg.epsilon
        doc["form"] = [[str(x) for x in row] for row in alg.form]
    return doc
