"""Pseudo-lattices over the rationals and real quadratic fields.

A pseudo-lattice is a module I_1 x_1 + ... + I_n x_n (fractional coefficient
ideals, independent basis vectors) carrying the gram matrix of a totally
positive semidefinite bilinear form and a scaling ideal.  This module
provides the even-integrality test, invariant factors with explicit
witnesses, enumeration of the lattices between P*L and P^-1*L, residue
quadratic spaces modulo an odd prime, and canonical keys under all the
re-presentation moves (unimodular basis change, coefficient-ideal re-choice,
scaling moves by totally positive elements and squared ideals).
"""

import itertools
import os
from fractions import Fraction
from math import gcd, isqrt

from .errors import BudgetError
from .exactmath import (IntMatrix, _factorize, _row_hnf, mat_det, mat_inv,
                        mat_mul, snf)
from .numberfield import (FieldSpec, FracIdeal, element_from_json,
                          element_to_json, ideal_from_json, ideal_to_json,
                          pick_with_orders, primes_above, principal_generator,
                          support)
from .finitequad import QuadSpaceFq, enumerate_subspaces, residue_field


# ---------------------------------------------------------------------------
# Z-linear algebra on flattened K-vectors
# ---------------------------------------------------------------------------

def _flatten(K, vec):
    out = []
    for x in vec:
        out.append(x.a)
        if K.deg == 2:
            out.append(x.b)
    return tuple(out)


def _unflatten(K, coords):
    deg = K.deg
    n = len(coords) // deg
    if deg == 1:
        return tuple(K.element(coords[i]) for i in range(n))
    return tuple(K.element(coords[2 * i], coords[2 * i + 1])
                 for i in range(n))


def _lcm_den(rows):
    L = 1
    for r in rows:
        for e in r:
            d = Fraction(e).denominator
            L = L * d // gcd(L, d)
    return L


def _zsolve(rows, target):
    """Integer coefficients x with sum x_i * rows_i = target, or None."""
    if not rows:
        return [] if not any(target) else None
    L = _lcm_den(list(rows) + [target])
    mat = [[int(Fraction(e) * L) for e in r] for r in rows]
    tgt = [int(Fraction(e) * L) for e in target]
    H, W = _row_hnf(mat)
    m = len(mat)
    y = [0] * m
    for k in range(m):
        piv = next((j for j, e in enumerate(H[k]) if e), None)
        if piv is None:
            continue
        if tgt[piv] % H[k][piv]:
            return None
        c = tgt[piv] // H[k][piv]
        y[k] = c
        if c:
            for j in range(len(tgt)):
                tgt[j] -= c * H[k][j]
    if any(tgt):
        return None
    x = [0] * m
    for k in range(m):
        if y[k]:
            for i in range(m):
                x[i] += y[k] * W[k][i]
    return x


def _zkernel(rows):
    """Basis of the integer left kernel {x : sum x_i * rows_i = 0}."""
    if not rows:
        return []
    L = _lcm_den(rows)
    mat = [[int(Fraction(e) * L) for e in r] for r in rows]
    H, W = _row_hnf(mat)
    return [list(W[k]) for k in range(len(mat)) if not any(H[k])]


def _vadd(u, v):
    return tuple(a + b for a, b in zip(u, v))


def _vsub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def _vscale(c, v):
    return tuple(c * x for x in v)


def _qsolve(cols, target):
    """The unique rational solution of sum x_j cols_j = target."""
    m = len(target)
    k = len(cols)
    aug = [[Fraction(cols[j][i]) for j in range(k)] + [Fraction(target[i])]
           for i in range(m)]
    piv_rows = []
    row = 0
    for col in range(k):
        sel = next((r for r in range(row, m) if aug[r][col]), None)
        if sel is None:
            raise ValueError("dependent columns")
        aug[row], aug[sel] = aug[sel], aug[row]
        pr = aug[row]
        inv = 1 / pr[col]
        aug[row] = [e * inv for e in pr]
        for r in range(m):
            if r != row and aug[r][col]:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[row])]
        piv_rows.append(row)
        row += 1
    for r in range(row, m):
        if aug[r][k]:
            raise ValueError("inconsistent system")
    return [aug[r][k] for r in piv_rows]


class ZMod:
    """Finitely generated Z-module in K^n as (1/den) * HNF integer rows."""

    __slots__ = ("K", "n", "den", "rows")

    def __init__(self, K, n, den, rows):
        self.K = K
        self.n = n
        self.den = den
        self.rows = rows

    @classmethod
    def from_flat(cls, K, n, vecs):
        vecs = [v for v in vecs if any(v)]
        if not vecs:
            return cls(K, n, 1, ())
        L = _lcm_den(vecs)
        mat = [[int(Fraction(e) * L) for e in v] for v in vecs]
        H, _ = _row_hnf(mat)
        rows = [tuple(r) for r in H if any(r)]
        g = L
        for r in rows:
            for e in r:
                g = gcd(g, e)
        if g > 1:
            L //= g
            rows = [tuple(e // g for e in r) for r in rows]
        return cls(K, n, L, tuple(rows))

    @classmethod
    def from_pseudo_gens(cls, K, n, pairs):
        vecs = []
        for ideal, vec in pairs:
            for e in ideal.elements():
                vecs.append(_flatten(K, [e * x for x in vec]))
        return cls.from_flat(K, n, vecs)

    def rank(self):
        return len(self.rows)

    def zbasis(self):
        den = Fraction(1, self.den)
        return [_unflatten(self.K, [e * den for e in r]) for r in self.rows]

    def contains(self, vec):
        flat = _flatten(self.K, vec)
        target = tuple(Fraction(e) * self.den for e in flat)
        rows = [tuple(Fraction(e) for e in r) for r in self.rows]
        return _zsolve(rows, target) is not None

    def contains_module(self, other):
        return all(self.contains(v) for v in other.zbasis())

    def __eq__(self, other):
        return (isinstance(other, ZMod) and self.K == other.K
                and self.n == other.n and self.den == other.den
                and self.rows == other.rows)

    def __hash__(self):
        return hash((self.K.d, self.n, self.den, self.rows))


def _pseudo_basis(zm):
    """[(ideal, vector)] with the module the direct sum of ideal * vector."""
    K = zm.K
    deg = K.deg
    basis = zm.zbasis()
    if not basis:
        return []
    if len(basis) % deg:
        raise ValueError("not a module over the ring of integers")
    rank = len(basis) // deg
    idx = next(i for i in range(zm.n)
               if any(not v[i].is_zero() for v in basis))
    values = [v[idx] for v in basis]
    C = FracIdeal._from_module(K, [x for x in values if not x.is_zero()])
    if rank == 1:
        v0 = next(v for v in basis if not v[idx].is_zero())
        D = C * FracIdeal.principal(v0[idx]).inverse()
        pairs = [(D, v0)]
        assert ZMod.from_pseudo_gens(K, zm.n, pairs) == zm
        return pairs
    # section w with coordinate 1, taken inside C^-1 * M
    scaled = []
    for c in C.inverse().elements():
        for v in basis:
            scaled.append(tuple(c * x for x in v))
    rows = [_flatten(K, [v[idx]]) for v in scaled]
    sol = _zsolve(rows, _flatten(K, [K.one()]))
    assert sol is not None, "section solve failed"
    w = tuple([K.zero()] * zm.n)
    for c, v in zip(sol, scaled):
        if c:
            w = _vadd(w, _vscale(K.element(c), v))
    # kernel of the coordinate inside M
    krows = [_flatten(K, [x]) for x in values]
    kvecs = []
    for comb in _zkernel(krows):
        vec = tuple([K.zero()] * zm.n)
        for c, v in zip(comb, basis):
            if c:
                vec = _vadd(vec, _vscale(K.element(c), v))
        kvecs.append(_flatten(K, vec))
    sub = ZMod.from_flat(K, zm.n, kvecs)
    pairs = [(C, w)] + _pseudo_basis(sub)
    assert ZMod.from_pseudo_gens(K, zm.n, pairs) == zm
    return pairs


# ---------------------------------------------------------------------------
# Pseudo-lattices
# ---------------------------------------------------------------------------

def _coerce(K, x):
    if hasattr(x, "K"):
        if x.K != K:
            raise ValueError("element of the wrong field")
        return x
    return K.element(Fraction(x))


class PseudoLattice:
    """I_1 x_1 + ... + I_n x_n with a gram matrix and a scaling ideal."""

    __slots__ = ("K", "n", "coeff_ideals", "gram", "scaling", "orientation",
                 "basis", "_zmod")

    def __init__(self, K, coeff_ideals, gram, scaling=None, basis=None,
                 orientation=1):
        self.K = K
        n = len(gram)
        if n < 1:
            raise ValueError("empty lattice")
        if len(coeff_ideals) != n:
            raise ValueError("need one coefficient ideal per basis vector")
        for I in coeff_ideals:
            if not isinstance(I, FracIdeal) or I.K != K:
                raise ValueError("coefficient ideals must belong to the field")
        g = [[_coerce(K, e) for e in row] for row in gram]
        if any(len(row) != n for row in g):
            raise ValueError("gram matrix must be square")
        for i in range(n):
            for j in range(n):
                if g[i][j] != g[j][i]:
                    raise ValueError("gram matrix must be symmetric")
        if scaling is None:
            scaling = FracIdeal.ring_of_integers(K)
        if not isinstance(scaling, FracIdeal) or scaling.K != K:
            raise ValueError("scaling must be a fractional ideal of the field")
        if orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        if basis is None:
            b = [[K.one() if i == j else K.zero() for j in range(n)]
                 for i in range(n)]
        else:
            b = [[_coerce(K, e) for e in row] for row in basis]
            if len(b) != n or any(len(row) != n for row in b):
                raise ValueError("basis must be a square matrix")
            if mat_det(b).is_zero():
                raise ValueError("basis must be invertible")
        _check_psd(K, g)
        self.n = n
        self.coeff_ideals = tuple(coeff_ideals)
        self.gram = tuple(tuple(row) for row in g)
        self.scaling = scaling
        self.orientation = orientation
        self.basis = tuple(tuple(row) for row in b)
        self._zmod = None

    @classmethod
    def free(cls, K, gram, scaling=None, orientation=1):
        O = FracIdeal.ring_of_integers(K)
        return cls(K, [O] * len(gram), gram, scaling=scaling,
                   orientation=orientation)

    @property
    def module(self):
        if self._zmod is None:
            pairs = [(self.coeff_ideals[j], self.basis_column(j))
                     for j in range(self.n)]
            self._zmod = ZMod.from_pseudo_gens(self.K, self.n, pairs)
        return self._zmod

    def basis_column(self, j):
        return tuple(self.basis[i][j] for i in range(self.n))

    def ambient_gram(self):
        """Gram matrix of the form on ambient coordinates."""
        E = [list(row) for row in self.basis]
        if all(E[i][j] == (self.K.one() if i == j else self.K.zero())
               for i in range(self.n) for j in range(self.n)):
            return [list(row) for row in self.gram]
        Einv = mat_inv(E)
        EinvT = [[Einv[j][i] for j in range(self.n)] for i in range(self.n)]
        return mat_mul(EinvT, mat_mul([list(r) for r in self.gram], Einv))

    def same_module(self, other):
        return (self.K == other.K and self.n == other.n
                and self.module == other.module)

    def contains_module(self, other):
        return self.module.contains_module(other.module)

    def rescale_module(self, A):
        return PseudoLattice(self.K, [A * I for I in self.coeff_ideals],
                             self.gram, scaling=self.scaling,
                             basis=self.basis, orientation=self.orientation)

    def with_scaling(self, J):
        return PseudoLattice(self.K, self.coeff_ideals, self.gram,
                             scaling=J, basis=self.basis,
                             orientation=self.orientation)

    def __eq__(self, other):
        return (isinstance(other, PseudoLattice) and self.K == other.K
                and self.coeff_ideals == other.coeff_ideals
                and self.gram == other.gram and self.scaling == other.scaling
                and self.orientation == other.orientation
                and self.basis == other.basis)

    def __hash__(self):
        return hash((self.K.d, self.coeff_ideals, self.gram, self.scaling,
                     self.orientation, self.basis))

    def __repr__(self):
        return "PseudoLattice(d=%s, n=%d)" % (self.K.d, self.n)


def _check_psd(K, g):
    n = len(g)
    signs = [1] if K.deg == 1 else [1, -1]
    for size in range(1, n + 1):
        for sub in itertools.combinations(range(n), size):
            minor = mat_det([[g[i][j] for j in sub] for i in sub])
            if minor.is_zero():
                continue
            for s in signs:
                if minor._sign_at(s) < 0:
                    raise ValueError("form is not totally positive "
                                     "semidefinite")


def is_even_integral(L):
    """Whether the gram matrix is even integral for the coefficient data."""
    J = L.scaling
    two = L.K.element(2)
    for i in range(L.n):
        for j in range(i, L.n):
            box = (L.coeff_ideals[i] * L.coeff_ideals[j] * J).inverse()
            if i == j:
                if not box.contains(L.gram[i][i] / two):
                    return False
            elif not box.contains(L.gram[i][j]):
                return False
    return True


# ---------------------------------------------------------------------------
# Invariant factors
# ---------------------------------------------------------------------------

class InvariantFactors:
    """Divisor chain A_1 | ... | A_n with a common pseudo-basis witness."""

    __slots__ = ("ideals", "basis_ideals", "basis")

    def __init__(self, ideals, basis_ideals, basis):
        self.ideals = tuple(ideals)
        self.basis_ideals = tuple(basis_ideals)
        self.basis = tuple(basis)

    def regenerates(self, lam, om):
        K = lam.K
        lam_pairs = list(zip(self.basis_ideals, self.basis))
        om_pairs = [(B * A, y) for B, A, y in
                    zip(self.basis_ideals, self.ideals, self.basis)]
        return (ZMod.from_pseudo_gens(K, lam.n, lam_pairs) == lam.module
                and ZMod.from_pseudo_gens(K, om.n, om_pairs) == om.module)


def invariant_factors(lam, om):
    """Invariant factors of om relative to lam, with witnesses.

    Returns InvariantFactors whose chain A_1 | A_2 | ... satisfies
    lam = sum B_i y_i and om = sum B_i A_i y_i for the witness data.
    """
    if lam.K != om.K or lam.n != om.n:
        raise ValueError("lattices must share the ambient space")
    K = lam.K
    n = lam.n
    O = FracIdeal.ring_of_integers(K)
    X = mat_mul(mat_inv([list(r) for r in lam.basis]),
                [list(r) for r in om.basis])
    chain = [O]
    for k in range(1, n + 1):
        D = None
        for S in itertools.combinations(range(n), k):
            for T in itertools.combinations(range(n), k):
                d = mat_det([[X[i][j] for j in T] for i in S])
                if d.is_zero():
                    continue
                term = FracIdeal.principal(d)
                for j in T:
                    term = term * om.coeff_ideals[j]
                for i in S:
                    term = term * lam.coeff_ideals[i].inverse()
                D = term if D is None else D + term
        if D is None:
            raise ValueError("second module does not have full rank")
        chain.append(D)
    factors = [chain[k] * chain[k - 1].inverse() for k in range(1, n + 1)]
    lam_pairs = [(lam.coeff_ideals[j], lam.basis_column(j)) for j in range(n)]
    om_pairs = [(om.coeff_ideals[j], om.basis_column(j)) for j in range(n)]
    triples = _split_witness(K, n, lam_pairs, om_pairs)
    assert [t[1] for t in triples] == factors, "witness chain mismatch"
    fac = InvariantFactors(factors, [t[0] for t in triples],
                           [t[2] for t in triples])
    assert fac.regenerates(lam, om), "witness failed to regenerate"
    return fac


def _content(K, pairs_values):
    """Sum of principal(v) * C over the (C, v) pairs, skipping zeros."""
    A = None
    for C, v in pairs_values:
        if v.is_zero():
            continue
        term = FracIdeal.principal(v) * C
        A = term if A is None else A + term
    return A


def _split_witness(K, n, lam_pairs, om_pairs):
    """Triples (B_i, A_i, y_i) splitting lam_pairs against om_pairs."""
    if not lam_pairs:
        return []
    r = len(lam_pairs)
    ybasis = [p[1] for p in lam_pairs]
    ycols = [_flatten(K, y) for y in ybasis]
    kcols = []
    for y in ybasis:
        kcols.append(_flatten(K, y))
        if K.deg == 2:
            kcols.append(_flatten(K, _vscale(K.omega(), y)))
    X = []
    for _, z in om_pairs:
        coords = _qsolve(kcols, _flatten(K, z))
        if K.deg == 1:
            X.append([K.element(coords[i]) for i in range(r)])
        else:
            X.append([K.element(coords[2 * i], coords[2 * i + 1])
                      for i in range(r)])
    A1 = _content(K, [(om_pairs[j][0] * lam_pairs[i][0].inverse(), X[j][i])
                      for j in range(len(om_pairs)) for i in range(r)])
    if A1 is None:
        raise ValueError("second module does not have full rank")
    if r == 1:
        B0, y0 = lam_pairs[0]
        return [(B0, A1, y0)]
    t = _find_functional(K, lam_pairs, om_pairs, X, A1)
    fz = [sum((t[i] * X[j][i] for i in range(r)), K.zero())
          for j in range(len(om_pairs))]
    rows = []
    mults = []
    for j, (Cj, zj) in enumerate(om_pairs):
        if fz[j].is_zero():
            continue
        for e in (Cj * A1.inverse()).elements():
            rows.append(_flatten(K, [e * fz[j]]))
            mults.append((e, j))
    sol = _zsolve(rows, _flatten(K, [K.one()]))
    assert sol is not None, "splitting element not found"
    u = tuple([K.zero()] * n)
    for c, (e, j) in zip(sol, mults):
        if c:
            u = _vadd(u, _vscale(K.element(c) * e, om_pairs[j][1]))
    new_lam = []
    for (Bi, yi), ti in zip(lam_pairs, t):
        v = _vsub(yi, _vscale(ti, u))
        if any(not x.is_zero() for x in v):
            new_lam.append((Bi, v))
    lam_sub = _pseudo_basis(ZMod.from_pseudo_gens(K, n, new_lam))
    new_om = []
    for (Cj, zj), f in zip(om_pairs, fz):
        v = _vsub(zj, _vscale(f, u))
        if any(not x.is_zero() for x in v):
            new_om.append((Cj, v))
    O = FracIdeal.ring_of_integers(K)
    return [(O, A1, u)] + _split_witness(K, n, lam_sub, new_om)


def _find_functional(K, lam_pairs, om_pairs, X, A1):
    """Coefficients t_i in B_i^-1 with f(lam) = O and f(om) = A1."""
    O = FracIdeal.ring_of_integers(K)
    deg = K.deg
    r = len(lam_pairs)
    boxes = [Bi.inverse().elements() for Bi, _ in lam_pairs]
    for R in range(1, 7):
        rng = range(-R, R + 1)
        for coeffs in itertools.product(rng, repeat=r * deg):
            if max(abs(c) for c in coeffs) != R:
                continue
            t = []
            for i in range(r):
                x = K.zero()
                for k in range(deg):
                    c = coeffs[i * deg + k]
                    if c:
                        x = x + boxes[i][k] * K.element(c)
                t.append(x)
            if _content(K, list(zip([B for B, _ in lam_pairs], t))) != O:
                continue
            fz = [sum((t[i] * X[j][i] for i in range(r)), K.zero())
                  for j in range(len(om_pairs))]
            vals = list(zip([C for C, _ in om_pairs], fz))
            if _content(K, vals) == A1:
                return t
    raise RuntimeError("functional search exhausted")


# ---------------------------------------------------------------------------
# Intermediate lattices P*L <= Omega <= P^-1*L
# ---------------------------------------------------------------------------

class IntermediateLattice:
    """An intermediate lattice with its local multiplicity tags.

    r0 counts slots where omega is locally P * lam, m1 slots where the two
    agree, r2 slots where omega is locally P^-1 * lam.
    """

    __slots__ = ("omega", "r0", "m1", "r2")

    def __init__(self, omega, r0, m1, r2):
        self.omega = omega
        self.r0 = r0
        self.m1 = m1
        self.r2 = r2

    def __repr__(self):
        return "IntermediateLattice(r0=%d, m1=%d, r2=%d)" % (
            self.r0, self.m1, self.r2)


def _validate_odd_prime(K, P):
    if not isinstance(P, FracIdeal) or P.K != K:
        raise ValueError("prime must be an ideal of the field")
    if not P.is_integral():
        raise ValueError("prime must be integral")
    N = abs(int(P.norm()))
    fac = _factorize(N)
    if len(fac) != 1:
        raise ValueError("not a prime ideal")
    p, e = next(iter(fac.items()))
    if e == 2 and K.deg == 2:
        lst = primes_above(K, p)
        if not (len(lst) == 1 and lst[0][1] == 1 and P == lst[0][0]):
            raise ValueError("not a prime ideal")
    elif e != 1:
        raise ValueError("not a prime ideal")
    if p == 2:
        raise ValueError("residue characteristic two is not supported")
    return p


def enumerate_intermediate(lam, P):
    """All lattices between P*lam and P^-1*lam, with multiplicity tags.

    The enumeration runs over pairs of subspaces V <= W of the residue space
    lam/P*lam together with a map V -> (lam/P*lam)/W; the budget guard can be
    raised through the HECKE_LATTICE_BUDGET environment variable.
    """
    K = lam.K
    n = lam.n
    _validate_odd_prime(K, P)
    if mat_det([list(r) for r in lam.gram]).is_zero():
        raise ValueError("lattice must be nondegenerate")
    rf = residue_field(P)
    fq = rf.fq
    q = fq.q
    budget = int(os.environ.get("HECKE_LATTICE_BUDGET", "500000"))
    if q ** (n * n) > budget:
        raise BudgetError("enumeration budget exceeded; raise "
                         "HECKE_LATTICE_BUDGET to allow %d" % q ** (n * n))
    # local generators h_i of P^-1 * I_i and a uniformizer
    hs = []
    for i in range(n):
        I = lam.coeff_ideals[i]
        constraints = [(P, P.ord_ideal(I) - 1)]
        for Qp, v in support(I):
            if Qp != P:
                constraints.append((Qp, v))
        hs.append(pick_with_orders(K, constraints))
    pi = pick_with_orders(K, [(P, 1)])
    T_amb = lam.ambient_gram()
    O = FracIdeal.ring_of_integers(K)
    PIpairs = [(P * lam.coeff_ideals[j], lam.basis_column(j))
               for j in range(n)]

    def ambient_lift(row):
        vec = tuple([K.zero()] * n)
        for k in range(n):
            if row[k]:
                vec = _vadd(vec, _vscale(rf.lift(row[k]) * hs[k],
                                         lam.basis_column(k)))
        return vec

    items = []
    for dim_w in range(n + 1):
        for wrows in enumerate_subspaces(fq, n, dim_w):
            pivots = [next(j for j, e in enumerate(r) if e) for r in wrows]
            free_cols = [j for j in range(n) if j not in pivots]
            for dim_v in range(dim_w + 1):
                for vsel in enumerate_subspaces(fq, dim_w, dim_v):
                    vrows = []
                    for sel in vsel:
                        acc = [0] * n
                        for c, wr in zip(sel, wrows):
                            if c:
                                for k in range(n):
                                    acc[k] = fq.add(acc[k],
                                                    fq.mul(c, wr[k]))
                        vrows.append(tuple(acc))
                    nfree = len(free_cols)
                    for phi in itertools.product(range(q),
                                                 repeat=dim_v * nfree):
                        gens = list(PIpairs)
                        for a, vr in enumerate(vrows):
                            lift = ambient_lift(vr)
                            tail = tuple([K.zero()] * n)
                            for b, col in enumerate(free_cols):
                                c = phi[a * nfree + b]
                                if c:
                                    tail = _vadd(tail, _vscale(
                                        rf.lift(c) * hs[col],
                                        lam.basis_column(col)))
                            gens.append((O, _vadd(lift, _vscale(pi, tail))))
                        for wr in wrows:
                            gens.append((P, ambient_lift(wr)))
                        pb = _pseudo_basis(ZMod.from_pseudo_gens(K, n, gens))
                        ideals = [c for c, _ in pb]
                        Y = [[pb[j][1][i] for j in range(n)]
                             for i in range(n)]
                        gram = [[_bilinear(T_amb, pb[i][1], pb[j][1])
                                 for j in range(n)] for i in range(n)]
                        omega = PseudoLattice(K, ideals, gram,
                                              scaling=lam.scaling, basis=Y,
                                              orientation=lam.orientation)
                        items.append(((n - dim_w, dim_w - dim_v, wrows,
                                       tuple(vrows), phi),
                                      IntermediateLattice(
                                          omega, n - dim_w, dim_w - dim_v,
                                          dim_v)))
    items.sort(key=lambda kv: kv[0])
    return [it for _, it in items]


def _bilinear(T_amb, u, v):
    n = len(T_amb)
    acc = None
    for i in range(n):
        if u[i].is_zero():
            continue
        for j in range(n):
            if v[j].is_zero():
                continue
            term = u[i] * T_amb[i][j] * v[j]
            acc = term if acc is None else acc + term
    if acc is None:
        return T_amb[0][0].K.zero() if hasattr(T_amb[0][0], "K") else 0
    return acc


# ---------------------------------------------------------------------------
# Residue quadratic space
# ---------------------------------------------------------------------------

def residue_space(lam, om, P, alpha=None):
    """The quadratic space (lam meet om) / P(lam + om) over O/P.

    The form is x -> (1/2) * alpha * Q(x) for alpha of the same order at P
    as the scaling ideal; different admissible alpha give isometric spaces.
    """
    K = lam.K
    _validate_odd_prime(K, P)
    fac = invariant_factors(lam, om)
    O = FracIdeal.ring_of_integers(K)
    Pinv = P.inverse()
    for A in fac.ideals:
        if A not in (Pinv, O, P):
            raise ValueError("second lattice is not intermediate at the "
                             "prime")
    rf = residue_field(P)
    vj = P.ord_ideal(lam.scaling)
    if alpha is None:
        alpha = K.one() if vj == 0 else pick_with_orders(K, [(P, vj)])
    elif P.ord(alpha) != vj:
        raise ValueError("alpha must have the order of the scaling ideal")
    mids = [(B, y) for B, A, y in
            zip(fac.basis_ideals, fac.ideals, fac.basis) if A == O]
    T_amb = lam.ambient_gram()
    half = K.element(Fraction(1, 2))
    gs = [pick_with_orders(K, [(P, P.ord_ideal(B))]) for B, _ in mids]
    gram = []
    for c, (_, yc) in enumerate(mids):
        row = []
        for d, (_, yd) in enumerate(mids):
            val = half * alpha * gs[c] * gs[d] * _bilinear(T_amb, yc, yd)
            row.append(rf.reduce(val))
        gram.append(tuple(row))
    return QuadSpaceFq(rf.fq, tuple(gram))


# ---------------------------------------------------------------------------
# Canonical keys
# ---------------------------------------------------------------------------

class LatticeKey:
    """Hashable canonical key; equal keys mean identified lattices."""

    __slots__ = ("data",)

    def __init__(self, data):
        self.data = data

    def __eq__(self, other):
        return isinstance(other, LatticeKey) and self.data == other.data

    def __hash__(self):
        return hash(self.data)

    def __repr__(self):
        return "LatticeKey%r" % (self.data,)


def canonical_key(L, oriented=False):
    """Canonical key, constant across all re-presentations of a lattice.

    Ideals are absorbed through principal generators, the scaling through a
    totally positive generator, and the remaining form is canonicalised as a
    Z-quadratic form (together with the multiplication-by-omega matrix over a
    quadratic field, which also absorbs scaling by totally positive units).
    """
    K = L.K
    gens = []
    for I in L.coeff_ideals:
        g = principal_generator(I)
        if g is None:
            raise ValueError("coefficient ideal is not principal")
        gens.append(g)
    s = principal_generator(L.scaling)
    if s is None:
        raise ValueError("scaling ideal is not principal")
    if K.deg == 1:
        if s.a < 0:
            s = -s
    else:
        s = _tp_adjust(K, s)
    n = L.n
    T = [[s * gens[i] * gens[j] * L.gram[i][j] for j in range(n)]
         for i in range(n)]
    if K.deg == 1:
        return _key_rationals(L, T, oriented)
    if oriented:
        raise ValueError("oriented keys are only supported over the "
                         "rationals")
    return _key_quadratic(L, T)


def _tp_adjust(K, s):
    if s.is_totally_positive():
        return s
    from .numberfield import fundamental_unit
    eps = fundamental_unit(K)
    for u in (-K.one(), eps, -eps):
        if (u * s).is_totally_positive():
            return u * s
    raise ValueError("scaling ideal has no totally positive generator")


def _key_rationals(L, T, oriented):
    n = L.n
    rows = [tuple(T[i][j].a for j in range(n)) for i in range(n)]
    kernel = _zkernel(rows)
    r = n - len(kernel)
    if oriented and kernel:
        raise ValueError("oriented keys need a nondegenerate form")
    if kernel:
        D, _, V = snf(IntMatrix([list(k) for k in kernel]))
        for i in range(len(kernel)):
            assert D[i, i] == 1, "kernel basis must be saturated"
        Vinv = _int_inv_unimodular([list(r) for r in V.data])
        comp = [Vinv[i] for i in range(len(kernel), n)]
    else:
        comp = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    Tq = [[sum(Fraction(comp[a][i]) * rows[i][j] * comp[b][j]
               for i in range(n) for j in range(n))
           for b in range(r)] for a in range(r)]
    if r == 0:
        return LatticeKey(("Q", 1, n, 0, 1, (), (), bool(oriented)))
    den = _lcm_den(Tq)
    G = [[int(e * den) for e in row] for row in Tq]
    if oriented and L.orientation == -1:
        for i in range(r):
            if i != r - 1:
                G[i][r - 1] = -G[i][r - 1]
                G[r - 1][i] = -G[r - 1][i]
    flat, _ = _reduce_pair(G, None, plus_only=oriented)
    return LatticeKey(("Q", 1, n, r, den, flat, (), bool(oriented)))


def _key_quadratic(L, T):
    K = L.K
    n = L.n
    if n > 2:
        raise ValueError("quadratic canonical forms are limited to rank 2")
    if mat_det([list(r) for r in T]).is_zero():
        raise ValueError("quadratic canonical forms need a definite form")
    m = 2 * n
    w = [K.one(), K.omega()]

    def tr(x):
        t = x.trace()
        return t if isinstance(t, Fraction) else Fraction(t)

    G = [[tr(w[s] * w[t] * T[i][j])
          for j in range(n) for t in range(2)]
         for i in range(n) for s in range(2)]
    den = _lcm_den(G)
    Gint = [[int(e * den) for e in row] for row in G]
    M = [[0] * m for _ in range(m)]
    for j in range(n):
        for t in range(2):
            x = K.omega() * w[t]
            M[2 * j][2 * j + t] = int(x.a)
            M[2 * j + 1][2 * j + t] = int(x.b)
    flatG, flatM = _reduce_pair(Gint, M, plus_only=False)
    return LatticeKey(("K", K.d, n, n, den, flatG, flatM, False))


def key_reduced_form(key):
    """Unpack a canonical key into (tag, d, n, rank, rows).

    rows is the reduced matrix stored in the key with the denominator divided
    back out (entries are Fractions): the rank x rank positive definite part
    for rational keys, the 2n x 2n trace form for quadratic-field keys.
    """
    tag, d, n, r, den, flat, _, _ = key.data
    m = 2 * r if tag == "K" else r
    rows = [[Fraction(0)] * m for _ in range(m)]
    it = iter(flat)
    for j in range(m):
        for i in range(j + 1):
            e = Fraction(next(it), den)
            rows[i][j] = e
            rows[j][i] = e
    return tag, d, n, r, rows


def _int_det(U):
    m = len(U)
    if m == 1:
        return U[0][0]
    tot = 0
    for i in range(m):
        if not U[i][0]:
            continue
        minor = [row[1:] for k, row in enumerate(U) if k != i]
        tot += (-1) ** i * U[i][0] * _int_det(minor)
    return tot


def _int_inv_unimodular(U):
    m = len(U)
    det = _int_det(U)
    assert det in (1, -1), "matrix must be unimodular"
    out = [[0] * m for _ in range(m)]
    for i in range(m):
        for j in range(m):
            minor = [[U[a][b] for b in range(m) if b != i]
                     for a in range(m) if a != j]
            c = _int_det(minor) if minor else 1
            out[i][j] = (-1) ** (i + j) * c * det
    return out


def _short_vectors(G, B):
    """All nonzero integer vectors with v^T G v <= B, with their norms."""
    m = len(G)
    Ginv = mat_inv([[Fraction(e) for e in row] for row in G])
    bounds = []
    box = 1
    for i in range(m):
        b = isqrt(int(B * Ginv[i][i]))
        bounds.append(b)
        box *= 2 * b + 1
    if box > 300000:
        raise BudgetError("key reduction budget exceeded")
    out = []
    for v in itertools.product(*[range(-b, b + 1) for b in bounds]):
        if not any(v):
            continue
        norm = sum(v[i] * G[i][j] * v[j] for i in range(m) for j in range(m))
        if norm <= B:
            out.append((norm, v))
    return out


def _reduce_pair(G, M, plus_only=False):
    """Canonical congruence representative of (G, M) under GL_m(Z).

    Lex-minimises the expanding principal blocks of U^T G U over unimodular
    U with columns among the short vectors, breaking ties by U^-1 M U.
    """
    m = len(G)
    B = max(1, min(G[i][i] for i in range(m)))
    for _ in range(24):
        vecs = _short_vectors(G, B)
        vecs.sort()
        picked = []
        rref = []
        cutoff = None
        for norm, v in vecs:
            if _rref_add(rref, v):
                picked.append(norm)
                if len(picked) == m:
                    cutoff = norm
                    break
        if cutoff is None:
            B *= 2
            continue
        S = [(norm, v) for norm, v in vecs if norm <= cutoff]
        result = _lex_min_tuple(G, M, S, plus_only)
        if result is not None:
            return result
        B = max(B, cutoff) * 2
    raise BudgetError("key reduction budget exceeded")


def _rref_add(rref, v):
    row = [Fraction(e) for e in v]
    for piv, prow in rref:
        if row[piv]:
            f = row[piv]
            row = [a - f * b for a, b in zip(row, prow)]
    piv = next((i for i, e in enumerate(row) if e), None)
    if piv is None:
        return False
    inv = 1 / row[piv]
    rref.append((piv, [e * inv for e in row]))
    return True


def _lex_min_tuple(G, M, S, plus_only):
    m = len(G)
    best = [None]
    Mrows = M if M is not None else None

    def flat_with_m(U):
        Uinv = _int_inv_unimodular([list(r) for r in U])
        prod = [[sum(Uinv[i][a] * Mrows[a][b] * U[b][j]
                     for a in range(m) for b in range(m))
                 for j in range(m)] for i in range(m)]
        return tuple(e for row in prod for e in row)

    def rec(cols, flat, rref):
        k = len(cols)
        if k == m:
            U = [[cols[j][i] for j in range(m)] for i in range(m)]
            det = _int_det(U)
            if det == 1 or (det == -1 and not plus_only):
                full = flat + (flat_with_m(U) if Mrows is not None else ())
                if best[0] is None or full < best[0]:
                    best[0] = full
            return
        for norm, v in S:
            block = tuple(sum(c[i] * G[i][j] * v[j]
                              for i in range(m) for j in range(m))
                          for c in cols) + (norm,)
            new_flat = flat + block
            if best[0] is not None and new_flat > best[0][:len(new_flat)]:
                continue
            rref2 = list(rref)
            if not _rref_add(rref2, v):
                continue
            rec(cols + [v], new_flat, rref2)

    rec([], (), [])
    if best[0] is None:
        return None
    full = best[0]
    ng = m * (m + 1) // 2
    return full[:ng], full[ng:]


# ---------------------------------------------------------------------------
# JSON forms
# ---------------------------------------------------------------------------

def lattice_to_json(L):
    return {
        "field": L.K.d,
        "n": L.n,
        "coeff_ideals": [ideal_to_json(I) for I in L.coeff_ideals],
        "gram": [[element_to_json(x) for x in row] for row in L.gram],
        "scaling": ideal_to_json(L.scaling),
        "orientation": L.orientation,
    }


def lattice_from_json(data):
    d = int(data["field"])
    K = FieldSpec.rationals() if d == 1 else FieldSpec.quadratic(d)
    ideals = [ideal_from_json(K, obj) for obj in data["coeff_ideals"]]
    gram = [[element_from_json(K, obj) for obj in row]
            for row in data["gram"]]
    scaling = ideal_from_json(K, data["scaling"])
    return PseudoLattice(K, ideals, gram, scaling=scaling,
                         orientation=int(data.get("orientation", 1)))
