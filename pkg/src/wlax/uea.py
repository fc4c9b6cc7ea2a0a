"""Universal enveloping algebra with PBW normal forms.

Elements are sparse maps from PBW monomials (index tuples, weakly increasing
in a fixed total order) to rational coefficients.  Straightening rewrites
u_i u_j -> u_j u_i + [u_i, u_j] whenever the pair is out of order; each swap
strictly lowers (degree, inversion count), so the rewriting terminates, and
confluence follows from the Jacobi identity.

The total order is part of the context.  With a grading attached, indices
are ranked by ad-x degree ascending (ties by construction index), which puts
the degree >= 1 letters last; the quotient by the left ideal generated by
{m - (f|m), m in g_{>=1}} then becomes a right-to-left substitution of
trailing letters, yielding canonical representatives supported on monomials
without degree >= 1 factors.
"""

from __future__ import annotations

from .errors import DegreeCapError
from .liealg import Grading, LieAlgebra, Sl2Triple
from .scalars import ONE, ZERO, QQ, qq

DEFAULT_DEGREE_CAP = 24


class PBWContext:
    """A Lie algebra plus a total order on its basis and product caches."""

    def __init__(self, alg: LieAlgebra, rank=None, degree_cap: int = DEFAULT_DEGREE_CAP):
        self.alg = alg
        self.rank = tuple(rank) if rank is not None else tuple(range(alg.dim))
        self.degree_cap = degree_cap
        self._append_cache = {}

    @classmethod
    def for_grading(cls, alg: LieAlgebra, grading: Grading,
                    degree_cap: int = DEFAULT_DEGREE_CAP) -> "PBWContext":
        return cls(alg, rank=grading.pbw_rank, degree_cap=degree_cap)

    def zero(self) -> "PBWPoly":
        return PBWPoly(self, {})

    def one(self) -> "PBWPoly":
        return PBWPoly(self, {(): ONE})

    def scalar(self, c) -> "PBWPoly":
        c = qq(c)
        return PBWPoly(self, {(): c} if c != 0 else {})

    def generator(self, i) -> "PBWPoly":
        if isinstance(i, str):
            i = self.alg.index_of(i)
        return PBWPoly(self, {(i,): ONE})

    def append_letter(self, mono: tuple, letter: int) -> dict:
        """Normal form of (sorted monomial) * u_letter as a {monomial: coeff} map.

        The letter bubbles in from the right; each swap trades a pair for its
        bracket, which recurses on a strictly shorter word.  Results are
        memoized per (monomial, letter), the granularity at which repeated
        work actually shows up in matrix-series products.
        """
        key = (mono, letter)
        cached = self._append_cache.get(key)
        if cached is not None:
            return cached
        rank = self.rank
        if not mono or rank[mono[-1]] <= rank[letter]:
            out = {mono + (letter,): ONE}
        else:
            last = mono[-1]
            head = mono[:-1]
            out = {}

            def _acc(w, c):
                val = out.get(w, ZERO) + c
                if val == 0:
                    out.pop(w, None)
                else:
                    out[w] = val

            # m u_x = (head u_x) u_last + head [u_last, u_x]
            for w, c in self.append_letter(head, letter).items():
                if not w or rank[w[-1]] <= rank[last]:
                    _acc(w + (last,), c)
                else:
                    # w carries a bracket letter, hence is strictly shorter
                    for w2, c2 in self.append_letter(w, last).items():
                        _acc(w2, c * c2)
            for k, ck in self.alg.bracket_coords(last, letter).items():
                for w, c in self.append_letter(head, k).items():
                    _acc(w, c * ck)
        self._append_cache[key] = out
        return out

    def straighten_word(self, word: tuple) -> dict:
        """Normal form of a product of generators as a {monomial: coeff} map."""
        if len(word) > self.degree_cap:
            raise DegreeCapError(
                f"monomial degree {len(word)} exceeds the cap {self.degree_cap}"
            )
        state = {(): ONE}
        for letter in word:
            nxt: dict = {}
            for mono, c in state.items():
                for w, k in self.append_letter(mono, letter).items():
                    val = nxt.get(w, ZERO) + c * k
                    if val == 0:
                        nxt.pop(w, None)
                    else:
                        nxt[w] = val
            state = nxt
        return state


class PBWPoly:
    """Normally ordered noncommutative polynomial with rational coefficients."""

    __slots__ = ("ctx", "terms")

    def __init__(self, ctx: PBWContext, terms: dict):
        self.ctx = ctx
        self.terms = terms

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((len(m) for m in self.terms), default=0)

    def __add__(self, other: "PBWPoly") -> "PBWPoly":
        out = dict(self.terms)
        for m, c in other.terms.items():
            val = out.get(m, ZERO) + c
            if val == 0:
                out.pop(m, None)
            else:
                out[m] = val
        return PBWPoly(self.ctx, out)

    def __neg__(self) -> "PBWPoly":
        return PBWPoly(self.ctx, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "PBWPoly") -> "PBWPoly":
        return self + (-other)

    def scale(self, c) -> "PBWPoly":
        c = qq(c)
        if c == 0:
            return PBWPoly(self.ctx, {})
        return PBWPoly(self.ctx, {m: c * x for m, x in self.terms.items()})

    def __mul__(self, other: "PBWPoly") -> "PBWPoly":
        ctx = self.ctx
        cap = ctx.degree_cap
        rank = ctx.rank
        append = ctx.append_letter
        if self.terms and other.terms:
            top = max(len(m) for m in self.terms) + max(len(m) for m in other.terms)
            if top > cap:
                raise DegreeCapError(
                    f"monomial degree {top} exceeds the cap {cap}"
                )
        out: dict = {}
        for m2, c2 in other.terms.items():
            parts = self.terms
            for letter in m2:
                rl = rank[letter]
                nxt: dict = {}
                nxt_get = nxt.get
                for mono, c in parts.items():
                    if not mono or rank[mono[-1]] <= rl:
                        w = mono + (letter,)
                        val = nxt_get(w)
                        if val is None:
                            nxt[w] = c
                        else:
                            val = val + c
                            if val == 0:
                                del nxt[w]
                            else:
                                nxt[w] = val
                        continue
                    for w, k in append(mono, letter).items():
                        val = nxt_get(w)
                        val = c * k if val is None else val + c * k
                        if val == 0:
                            nxt.pop(w, None)
                        else:
                            nxt[w] = val
                parts = nxt
            for m, c in parts.items():
                val = out.get(m)
                val = c * c2 if val is None else val + c * c2
                if val == 0:
                    out.pop(m, None)
                else:
                    out[m] = val
        return PBWPoly(ctx, out)

    def commutator(self, other: "PBWPoly") -> "PBWPoly":
        return self * other - other * self

    def __eq__(self, other) -> bool:
        return isinstance(other, PBWPoly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def sorted_terms(self):
        rank = self.ctx.rank
        return sorted(
            self.terms.items(),
            key=lambda mc: (len(mc[0]), tuple(rank[i] for i in mc[0])),
        )

    def text(self) -> str:
        """Canonical rendering; identical elements serialize identically."""
        if not self.terms:
            return "0"
        labels = self.ctx.alg.labels
        pieces = []
        for mono, coeff in self.sorted_terms():
            factors = []
            run_start = 0
            for k in range(1, len(mono) + 1):
                if k == len(mono) or mono[k] != mono[run_start]:
                    exp = k - run_start
                    lab = labels[mono[run_start]]
                    factors.append(lab if exp == 1 else f"{lab}^{exp}")
                    run_start = k
            mag = coeff if coeff > 0 else -coeff
            body = "*".join(factors)
            if not factors:
                term = str(mag)
            elif mag == 1:
                term = body
            else:
                term = f"{mag}*{body}"
            if not pieces:
                pieces.append(term if coeff > 0 else f"-{term}")
            else:
                pieces.append(("+ " if coeff > 0 else "- ") + term)
        return " ".join(pieces)

    def __repr__(self):
        return f"PBWPoly({self.text()})"


def normal_form(ctx: PBWContext, word, coefficient=1) -> PBWPoly:
    """PBW normal form of coefficient * u_{word[0]} ... u_{word[-1]}."""
    idx = tuple(w if isinstance(w, int) else ctx.alg.index_of(w) for w in word)
    c = qq(coefficient)
    return PBWPoly(ctx, {m: c * k for m, k in ctx.straighten_word(idx).items() if c != 0})


def multiply(a: PBWPoly, b: PBWPoly) -> PBWPoly:
    return a * b


def reduce_mod_ideal(a: PBWPoly, grading: Grading) -> PBWPoly:
    """Canonical representative modulo the left ideal U(g){m - (f|m)}.

    Trailing degree >= 1 letters of each monomial are replaced right-to-left
    by the scalar (f|m); the PBW order guarantees those letters sit at the
    end, so the result stays normally ordered.  Idempotent and linear.
    """
    geq1 = set(grading.geq1)
    pair = grading.f_pair
    out: dict = {}
    stack = list(a.terms.items())
    while stack:
        mono, coeff = stack.pop()
        while mono and mono[-1] in geq1:
            coeff = coeff * pair[mono[-1]]
            mono = mono[:-1]
            if coeff == 0:
                break
        if coeff == 0:
            continue
        val = out.get(mono, ZERO) + coeff
        if val == 0:
            out.pop(mono, None)
        else:
            out[mono] = val
    return PBWPoly(a.ctx, out)


def ad_invariance_check(a: PBWPoly, grading: Grading) -> bool:
    """True iff [b, a] reduces to zero for every basis letter b of positive degree.

    This is the membership test for the adjoint-invariant part of the
    quotient; it does not depend on the chosen lift of a.
    """
    ctx = a.ctx
    for b in grading.positive:
        gen = ctx.generator(b)
        if not reduce_mod_ideal(gen * a - a * gen, grading).is_zero():
            return False
    return True
