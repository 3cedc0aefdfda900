"""Quadratic spaces over small finite fields of odd characteristic.

Provides F_q arithmetic for q = p^f with f <= 2 (all axioms brute-checked on
construction), Witt decomposition with an explicit verified witness basis,
closed-form and brute-force counts of totally isotropic subspaces, residue
systems and residue fields of prime ideals, complete symmetric character
sums modulo P^m, and the rank stratification of symmetric matrices used to
reorganise character sums.

Elements of F_(p^2) are encoded as integers a + b*p, standing for a + b*t
with t^2 equal to the smallest quadratic nonresidue mod p.
"""

import itertools
from fractions import Fraction

from .exactmath import Cyclotomic, cyclo_root_of_unity, e_half
from .numberfield import FracIdeal, residue_root


class Fq:
    """The finite field with p^f elements, p odd, f <= 2."""

    __slots__ = ("p", "f", "q", "nonresidue")

    _cache = {}

    def __new__(cls, p, f=1):
        key = (p, f)
        if key in cls._cache:
            return cls._cache[key]
        self = object.__new__(cls)
        self._init(p, f)
        cls._cache[key] = self
        return self

    def _init(self, p, f):
        p, f = int(p), int(f)
        if p < 3 or any(p % k == 0 for k in range(2, p)):
            raise ValueError("p must be an odd prime")
        if f not in (1, 2):
            raise ValueError("only degree 1 and 2 extensions supported")
        self.p = p
        self.f = f
        self.q = p ** f
        if f == 2:
            self.nonresidue = next(
                n for n in range(2, p) if pow(n, (p - 1) // 2, p) == p - 1)
        else:
            self.nonresidue = None
        self._verify()

    def elements(self):
        return range(self.q)

    def coords(self, x):
        return (x % self.p, x // self.p)

    def make(self, a, b=0):
        return a % self.p + (b % self.p) * self.p

    def add(self, x, y):
        p = self.p
        if self.f == 1:
            return (x + y) % p
        return (x % p + y % p) % p + ((x // p + y // p) % p) * p

    def neg(self, x):
        p = self.p
        if self.f == 1:
            return (-x) % p
        return (-x % p) % p + ((-(x // p)) % p) * p

    def sub(self, x, y):
        return self.add(x, self.neg(y))

    def mul(self, x, y):
        p = self.p
        if self.f == 1:
            return (x * y) % p
        a1, b1 = x % p, x // p
        a2, b2 = y % p, y // p
        r = self.nonresidue
        return (a1 * a2 + b1 * b2 * r) % p + ((a1 * b2 + a2 * b1) % p) * p

    def inv(self, x):
        p = self.p
        if x == 0:
            raise ZeroDivisionError("inverse of zero in F_q")
        if self.f == 1:
            return pow(x, p - 2, p)
        a, b = x % p, x // p
        n = (a * a - b * b * self.nonresidue) % p
        ninv = pow(n, p - 2, p)
        return (a * ninv) % p + ((-b * ninv) % p) * p

    def pow(self, x, k):
        k = int(k)
        if k < 0:
            return self.pow(self.inv(x), -k)
        out, base = 1, x
        while k:
            if k & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            k >>= 1
        return out

    def trace_to_prime(self, x):
        """Trace from F_q down to F_p, as an integer in [0, p)."""
        if self.f == 1:
            return x
        return (2 * (x % self.p)) % self.p

    def _verify(self):
        els = list(self.elements())
        for x in els:
            assert self.add(x, 0) == x and self.mul(x, 1) == x
            assert self.add(x, self.neg(x)) == 0
            if x:
                assert self.mul(x, self.inv(x)) == 1
        for x in els:
            for y in els:
                if self.add(x, y) != self.add(y, x) or \
                        self.mul(x, y) != self.mul(y, x):
                    raise AssertionError("commutativity fails")
                for z in els:
                    if self.mul(self.mul(x, y), z) != \
                            self.mul(x, self.mul(y, z)):
                        raise AssertionError("associativity fails")
                    if self.mul(x, self.add(y, z)) != \
                            self.add(self.mul(x, y), self.mul(x, z)):
                        raise AssertionError("distributivity fails")

    def __repr__(self):
        return "Fq(%d, %d)" % (self.p, self.f)


def additive_character(fq, x):
    """zeta_p ** Tr(x), the standard additive character of F_q."""
    return cyclo_root_of_unity(fq.p, fq.trace_to_prime(x))


# ---------------------------------------------------------------------------
# Linear algebra over F_q
# ---------------------------------------------------------------------------

def fq_rref(fq, rows):
    """Reduced row echelon form over F_q.  Returns (R, pivot_columns)."""
    R = [list(r) for r in rows]
    if not R:
        return [], []
    ncols = len(R[0])
    pivots = []
    row = 0
    for col in range(ncols):
        pr = next((i for i in range(row, len(R)) if R[i][col]), None)
        if pr is None:
            continue
        R[row], R[pr] = R[pr], R[row]
        inv = fq.inv(R[row][col])
        R[row] = [fq.mul(inv, e) for e in R[row]]
        for i in range(len(R)):
            if i != row and R[i][col]:
                c = R[i][col]
                R[i] = [fq.sub(e, fq.mul(c, f)) for e, f in zip(R[i], R[row])]
        pivots.append(col)
        row += 1
        if row == len(R):
            break
    return R, pivots


def fq_kernel(fq, rows):
    """Basis of the right kernel of the matrix."""
    if not rows:
        return []
    ncols = len(rows[0])
    R, pivots = fq_rref(fq, rows)
    free = [j for j in range(ncols) if j not in pivots]
    basis = []
    for j in free:
        v = [0] * ncols
        v[j] = 1
        for i, pc in enumerate(pivots):
            v[pc] = fq.neg(R[i][j])
        basis.append(tuple(v))
    return basis


def enumerate_subspaces(fq, n, m):
    """All m-dimensional subspaces of F_q^n as RREF basis row tuples."""
    if m < 0 or m > n:
        return
    if m == 0:
        yield ()
        return
    q = fq.q
    for pivots in itertools.combinations(range(n), m):
        free = [(i, j) for i in range(m) for j in range(n)
                if j > pivots[i] and j not in pivots]
        for fill in itertools.product(range(q), repeat=len(free)):
            rows = [[0] * n for _ in range(m)]
            for i, pc in enumerate(pivots):
                rows[i][pc] = 1
            for (i, j), v in zip(free, fill):
                rows[i][j] = v
            yield tuple(tuple(r) for r in rows)


def symmetric_matrices(fq, n):
    """All symmetric n x n matrices over F_q."""
    idx = [(i, j) for i in range(n) for j in range(i, n)]
    for choice in itertools.product(range(fq.q), repeat=len(idx)):
        W = [[0] * n for _ in range(n)]
        for (i, j), v in zip(idx, choice):
            W[i][j] = W[j][i] = v
        yield W


def invertible_symmetric(fq, m):
    """All invertible symmetric m x m matrices over F_q."""
    if m == 0:
        return [()]
    out = []
    for W in symmetric_matrices(fq, m):
        if len(fq_rref(fq, W)[1]) == m:
            out.append(tuple(tuple(r) for r in W))
    return out


# ---------------------------------------------------------------------------
# Quadratic spaces and Witt decomposition
# ---------------------------------------------------------------------------

class QuadSpaceFq:
    """F_q^n with a symmetric gram matrix (odd characteristic)."""

    __slots__ = ("fq", "gram", "n")

    def __init__(self, fq, gram):
        self.fq = fq
        n = len(gram)
        g = tuple(tuple(int(e) % fq.q if isinstance(e, int) else e
                        for e in row) for row in gram)
        if any(len(r) != n for r in g):
            raise ValueError("gram matrix must be square")
        for i in range(n):
            for j in range(n):
                if g[i][j] != g[j][i]:
                    raise ValueError("gram matrix must be symmetric")
                if not 0 <= g[i][j] < fq.q:
                    raise ValueError("gram entries must be field elements")
        self.gram = g
        self.n = n

    def bilinear(self, x, y):
        fq = self.fq
        s = 0
        for i in range(self.n):
            if not x[i]:
                continue
            for j in range(self.n):
                if y[j]:
                    s = fq.add(s, fq.mul(fq.mul(x[i], self.gram[i][j]), y[j]))
        return s

    def qvalue(self, x):
        return self.bilinear(x, x)


class WittData:
    """Witness data for a Witt decomposition: radical dimension r, Witt
    index t, anisotropic dimension w, and the corresponding basis vectors."""

    __slots__ = ("r", "t", "w", "hyperbolic", "aniso", "radical")

    def __init__(self, hyperbolic, aniso, radical):
        self.hyperbolic = hyperbolic
        self.aniso = aniso
        self.radical = radical
        self.t = len(hyperbolic)
        self.w = len(aniso)
        self.r = len(radical)

    def verify(self, space):
        fq = space.fq
        assert self.r + 2 * self.t + self.w == space.n
        assert self.w <= 2
        for v in self.radical:
            for j in range(space.n):
                e = [0] * space.n
                e[j] = 1
                assert space.bilinear(v, e) == 0
        flat = [u for pair in self.hyperbolic for u in pair] + \
            list(self.aniso)
        for i, (e, f) in enumerate(self.hyperbolic):
            assert space.qvalue(e) == 0 and space.qvalue(f) == 0
            assert space.bilinear(e, f) == 1
        def block(i):
            return i // 2 if i < 2 * self.t else self.t
        for i in range(len(flat)):
            for j in range(len(flat)):
                if block(i) != block(j):
                    assert space.bilinear(flat[i], flat[j]) == 0
        # the anisotropic part really has no nonzero isotropic vector
        for coeffs in itertools.product(range(fq.q), repeat=self.w):
            if not any(coeffs):
                continue
            v = _combine(fq, coeffs, self.aniso, space.n)
            assert space.qvalue(v) != 0
        # all listed vectors are independent
        assert len(fq_rref(fq, [list(v) for v in flat + list(self.radical)]
                           )[1]) == space.n


def _combine(fq, coeffs, vecs, n):
    v = [0] * n
    for c, vec in zip(coeffs, vecs):
        if c:
            for i in range(n):
                v[i] = fq.add(v[i], fq.mul(c, vec[i]))
    return tuple(v)


def _find_isotropic(space, basis):
    fq = space.fq
    for coeffs in itertools.product(range(fq.q), repeat=len(basis)):
        if not any(coeffs):
            continue
        v = _combine(fq, coeffs, basis, space.n)
        if space.qvalue(v) == 0:
            return v
    return None


def witt_decompose(space):
    """Split the space into radical + hyperbolic planes + anisotropic part."""
    fq, n = space.fq, space.n
    radical = fq_kernel(fq, [list(r) for r in space.gram])
    if radical:
        _, pivots = fq_rref(fq, [list(v) for v in radical])
        comp_cols = [j for j in range(n) if j not in pivots]
    else:
        comp_cols = list(range(n))
    comp = []
    for j in comp_cols:
        e = [0] * n
        e[j] = 1
        comp.append(tuple(e))
    inv2 = fq.inv(2 % fq.q if fq.f == 1 else 2)
    hyperbolic = []
    while comp:
        v = _find_isotropic(space, comp)
        if v is None:
            break
        u = next(b for b in comp if space.bilinear(v, b) != 0)
        u = tuple(fq.mul(fq.inv(space.bilinear(v, u)), x) for x in u)
        lam = fq.mul(space.qvalue(u), inv2)
        f = tuple(fq.sub(x, fq.mul(lam, y)) for x, y in zip(u, v))
        hyperbolic.append((v, f))
        rows = [[space.bilinear(b, v) for b in comp],
                [space.bilinear(b, f) for b in comp]]
        comp = [_combine(fq, k, comp, n) for k in fq_kernel(fq, rows)]
    if len(comp) > 2:
        raise AssertionError("anisotropic part of dimension > 2")
    wd = WittData(hyperbolic, comp, radical)
    wd.verify(space)
    return wd


# ---------------------------------------------------------------------------
# Counting totally isotropic subspaces
# ---------------------------------------------------------------------------

def beta(m, s, q):
    """Number of s-dimensional subspaces of F_q^m (Gaussian binomial)."""
    if s < 0 or s > m:
        return 0
    out = Fraction(1)
    for i in range(s):
        out *= Fraction(q ** (m - i) - 1, q ** (s - i) - 1)
    assert out.denominator == 1
    return int(out)


def delta(m, s, q):
    """prod_{i<s} (q^(m-i) + 1)."""
    out = Fraction(1)
    for i in range(s):
        out *= Fraction(q) ** (m - i) + 1
    return int(out) if out.denominator == 1 else out


def count_isotropic(space, ell):
    """Number of totally isotropic ell-dimensional subspaces (closed form).

    With radical dimension r, Witt index t and anisotropic dimension w, the
    count is sum_a q^(a(r-ell+a)) * beta(r, ell-a) * beta(t, a)
    * delta(t+w-1, a), splitting a subspace by its intersection with the
    radical.
    """
    if ell == 0:
        return 1
    if ell < 0 or ell > space.n:
        return 0
    wd = witt_decompose(space)
    q = space.fq.q
    r, t, w = wd.r, wd.t, wd.w
    total = 0
    for a in range(ell + 1):
        b1 = beta(r, ell - a, q)
        b2 = beta(t, a, q)
        if b1 == 0 or b2 == 0:
            continue
        total += q ** (a * (r - ell + a)) * b1 * b2 * delta(t + w - 1, a, q)
    return total


def count_isotropic_brute(space, ell):
    """Same count by direct enumeration of all ell-dimensional subspaces."""
    if ell == 0:
        return 1
    if ell < 0 or ell > space.n:
        return 0
    count = 0
    for basis in enumerate_subspaces(space.fq, space.n, ell):
        if all(space.bilinear(basis[i], basis[j]) == 0
               for i in range(ell) for j in range(i, ell)):
            count += 1
    return count


def alpha_j(space, r1):
    """Count of totally isotropic r1-dimensional subspaces."""
    return count_isotropic(space, r1)


# ---------------------------------------------------------------------------
# Residue systems and residue fields
# ---------------------------------------------------------------------------

def _prime_data(P):
    """(p, e, f) for a prime ideal."""
    K = P.K
    N = int(P.norm())
    p = next(d for d in range(2, N + 1) if N % d == 0)
    f = 1 if N == p else 2
    if K.deg == 2 and f == 1:
        e = P.ord_ideal(FracIdeal.principal(K.element(p, 0)))
    else:
        e = 1
    return p, e, f


def residue_system(P, m):
    """A complete set of representatives of O mod P^m (m <= 2)."""
    K = P.K
    p, e, f = _prime_data(P)
    if K.deg == 1:
        return [K.element(i, 0) for i in range(p ** m)]
    if f == 2:
        return [K.element(a, b) for a in range(p ** m)
                for b in range(p ** m)]
    if e == 1:
        return [K.element(i, 0) for i in range(p ** m)]
    # ramified
    if m == 1:
        return [K.element(i, 0) for i in range(p)]
    if m == 2:
        return [K.element(a, b) for a in range(p) for b in range(p)]
    raise ValueError("residue systems only implemented for m <= 2")


def _frac_mod(x, p):
    if x.denominator % p == 0:
        raise ValueError("denominator not invertible mod p")
    return (x.numerator * pow(x.denominator % p, p - 2, p)) % p


class ResidueField:
    """The residue field O/P together with reduction and lifting maps."""

    __slots__ = ("P", "K", "p", "e", "f", "fq", "omega_code")

    def __init__(self, P):
        self.P = P
        self.K = P.K
        self.p, self.e, self.f = _prime_data(P)
        self.fq = Fq(self.p, self.f)
        if self.K.deg == 1:
            self.omega_code = 0
        elif self.f == 1:
            self.omega_code = residue_root(P, self.p)
        else:
            K = self.K
            tr = K.tr_omega % self.p
            nm = K.norm_omega % self.p
            fq = self.fq
            self.omega_code = next(
                c for c in fq.elements()
                if fq.add(fq.sub(fq.mul(c, c), fq.mul(tr, c)), nm) == 0)

    def reduce(self, x):
        """Image of a P-integral field element in F_q."""
        K, p, fq = self.K, self.p, self.fq
        if K.deg == 1:
            return _frac_mod(x.a, p)
        if x.a.denominator % p and x.b.denominator % p:
            a = _frac_mod(x.a, p)
            b = _frac_mod(x.b, p)
            return fq.add(a, fq.mul(b, self.omega_code))
        # p divides a coordinate denominator; x can still be integral at P
        # (with a pole at another prime over p), so match residues by
        # valuation rather than by membership in the integral ideal P
        for r in residue_system(self.P, 1):
            diff = x - r
            if diff.is_zero() or self.P.ord(diff) >= 1:
                return self.reduce(r)
        raise ValueError("element is not integral at P")

    def lift(self, code):
        """A canonical preimage in O of a residue field element."""
        K, p = self.K, self.p
        if self.f == 1:
            return K.element(code, 0)
        a, b = self.fq.coords(code)
        a0, b0 = self.fq.coords(self.omega_code)
        y = (b * pow(b0, p - 2, p)) % p
        x = (a - y * a0) % p
        return K.element(x, y)


def residue_field(P):
    return ResidueField(P)


# ---------------------------------------------------------------------------
# Complete symmetric character sums
# ---------------------------------------------------------------------------

def complete_symmetric_charsum(T, P, m, mu):
    """sum over symmetric W mod P^m of e(mu * tr(T W)).

    T must be symmetric with entries in O and even diagonal (t_ii in 2O);
    the value is then a product over the independent entries of W of
    one-dimensional character sums, each computed exactly.
    """
    K = P.K
    n = len(T)
    two = K.element(2, 0)
    for i in range(n):
        for j in range(n):
            if T[i][j] != T[j][i]:
                raise ValueError("T must be symmetric")
            if not T[i][j].is_integral():
                raise ValueError("T must have integral entries")
        if not (T[i][i] / two).is_integral():
            raise ValueError("T must have even diagonal")
    R = residue_system(P, m)
    total = Cyclotomic.one()
    for i in range(n):
        for j in range(i, n):
            c = T[i][j] if i == j else two * T[i][j]
            s = Cyclotomic.zero()
            for w in R:
                s = s + e_half((mu * c * w).trace())
            total = total * s
            if total.is_zero():
                return total
    return total


# ---------------------------------------------------------------------------
# Rank stratification of symmetric matrices
# ---------------------------------------------------------------------------

def rank_stratify(fq, r1):
    """Stratify symmetric r1 x r1 matrices over F_q by rank.

    Returns [(m, pairs)] for m = 0..r1 where pairs lists all (G, U) with G
    an m-dimensional RREF subspace basis (m x r1) and U an invertible
    symmetric m x m matrix; (G, U) -> G^t U G is a bijection onto the
    symmetric matrices of rank m.
    """
    out = []
    for m in range(r1 + 1):
        pairs = [(G, U)
                 for G in enumerate_subspaces(fq, r1, m)
                 for U in invertible_symmetric(fq, m)]
        out.append((m, pairs))
    return out


def stratum_matrix(fq, G, U, r1):
    """G^t U G as an r1 x r1 symmetric matrix."""
    m = len(G)
    W = [[0] * r1 for _ in range(r1)]
    for a in range(r1):
        for b in range(r1):
            s = 0
            for i in range(m):
                if not G[i][a]:
                    continue
                for j in range(m):
                    s = fq.add(s, fq.mul(fq.mul(G[i][a], U[i][j]), G[j][b]))
            W[a][b] = s
    return W
