"""Exact arithmetic substrate.

Everything downstream (ideals, lattices, character sums, coset actions) is
built on the things in this module: arbitrary-precision integer matrices with
Hermite/Smith normal forms, cyclotomic numbers with decidable equality for
character sums, a tiny quadratic-surd scalar for half-integer prime powers,
and ring-generic dense matrix helpers.  No floating point anywhere.
"""

from fractions import Fraction
from math import gcd, lcm, isqrt


def xgcd(a, b):
    """Return (g, x, y) with g = gcd(a, b) >= 0 and g = a*x + b*y."""
    x, next_x = 1, 0
    y, next_y = 0, 1
    g, next_g = a, b
    while next_g:
        q = g // next_g
        x, next_x = next_x, x - q * next_x
        y, next_y = next_y, y - q * next_y
        g, next_g = next_g, g - q * next_g
    if g < 0:
        g, x, y = -g, -x, -y
    return g, x, y


# ---------------------------------------------------------------------------
# Integer matrices and normal forms
# ---------------------------------------------------------------------------

class IntMatrix:
    """Immutable rectangular integer matrix."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows_of_entries):
        data = tuple(tuple(int(x) for x in row) for row in rows_of_entries)
        if not data or not data[0]:
            raise ValueError("matrix must be nonempty")
        if any(len(r) != len(data[0]) for r in data):
            raise ValueError("ragged rows")
        self.data = data
        self.rows = len(data)
        self.cols = len(data[0])

    @classmethod
    def identity(cls, n):
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, r, c):
        return cls([[0] * c for _ in range(r)])

    def __getitem__(self, ij):
        i, j = ij
        return self.data[i][j]

    def __eq__(self, other):
        return isinstance(other, IntMatrix) and self.data == other.data

    def __hash__(self):
        return hash(self.data)

    def __mul__(self, other):
        if not isinstance(other, IntMatrix):
            return NotImplemented
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        ot = list(zip(*other.data))
        return IntMatrix([[sum(a * b for a, b in zip(row, col)) for col in ot]
                          for row in self.data])

    def transpose(self):
        return IntMatrix(list(zip(*self.data)))

    def det(self):
        if self.rows != self.cols:
            raise ValueError("det of non-square matrix")
        return mat_det([list(r) for r in self.data])

    def tolist(self):
        return [list(r) for r in self.data]

    def __repr__(self):
        return "IntMatrix(%r)" % (self.tolist(),)


def _row_hnf(mat):
    """Row-style HNF (upper echelon, positive pivots, entries above a pivot
    reduced into [0, pivot)).  Returns (H, W) with H = W * mat, W unimodular,
    as plain lists."""
    m = [row[:] for row in mat]
    nrows = len(m)
    ncols = len(m[0])
    W = [[1 if i == j else 0 for j in range(nrows)] for i in range(nrows)]

    def row_op(i, j, a, b, c, d):
        # rows i, j <- a*ri + b*rj, c*ri + d*rj
        for M in (m, W):
            ri, rj = M[i], M[j]
            M[i] = [a * x + b * y for x, y in zip(ri, rj)]
            M[j] = [c * x + d * y for x, y in zip(ri, rj)]

    pivot_row = 0
    for col in range(ncols):
        # clear below using gcd combinations
        nz = [i for i in range(pivot_row, nrows) if m[i][col] != 0]
        if not nz:
            continue
        i0 = nz[0]
        if i0 != pivot_row:
            m[pivot_row], m[i0] = m[i0], m[pivot_row]
            W[pivot_row], W[i0] = W[i0], W[pivot_row]
        for i in range(pivot_row + 1, nrows):
            if m[i][col] == 0:
                continue
            a, b = m[pivot_row][col], m[i][col]
            if b % a == 0:
                q = b // a
                row_op(pivot_row, i, 1, 0, -q, 1)
            else:
                g, x, y = xgcd(a, b)
                row_op(pivot_row, i, x, y, -(b // g), a // g)
        if m[pivot_row][col] < 0:
            m[pivot_row] = [-x for x in m[pivot_row]]
            W[pivot_row] = [-x for x in W[pivot_row]]
        piv = m[pivot_row][col]
        # reduce the entries above the pivot into [0, piv)
        for i in range(pivot_row):
            q = m[i][col] // piv
            if q:
                m[i] = [x - q * y for x, y in zip(m[i], m[pivot_row])]
                W[i] = [x - q * y for x, y in zip(W[i], W[pivot_row])]
        pivot_row += 1
        if pivot_row == nrows:
            break
    return m, W


def hnf(M):
    """Column-style Hermite normal form.

    Returns (H, U) with H = M * U, U unimodular; H is in lower-left column
    echelon form with positive pivots and the entries left of each pivot
    reduced into [0, pivot).  The zero matrix returns (M, I).
    """
    Ht, W = _row_hnf([list(r) for r in M.transpose().data])
    return IntMatrix(Ht).transpose(), IntMatrix(W).transpose()


def snf(M):
    """Smith normal form.  Returns (D, U, V) with D = U*M*V diagonal,
    nonnegative, d1 | d2 | ..., and U, V unimodular."""
    m = M.tolist()
    nrows, ncols = M.rows, M.cols
    U = IntMatrix.identity(nrows).tolist()
    V = IntMatrix.identity(ncols).tolist()

    def row_op(i, j, a, b, c, d):
        for X in (m, U):
            ri, rj = X[i], X[j]
            X[i] = [a * x + b * y for x, y in zip(ri, rj)]
            X[j] = [c * x + d * y for x, y in zip(ri, rj)]

    def col_op(i, j, a, b, c, d):
        for X in (m, V):
            for row in X:
                e, f = row[i], row[j]
                row[i] = a * e + b * f
                row[j] = c * e + d * f

    def clear(t):
        while True:
            # move a nonzero entry into the (t, t) pivot slot
            nz = [(i, j) for i in range(t, nrows) for j in range(t, ncols)
                  if m[i][j] != 0]
            if not nz:
                return False
            i0, j0 = min(nz, key=lambda ij: abs(m[ij[0]][ij[1]]))
            if i0 != t:
                row_op(t, i0, 0, 1, 1, 0)
            if j0 != t:
                col_op(t, j0, 0, 1, 1, 0)
            dirty = False
            for i in range(t + 1, nrows):
                if m[i][t]:
                    a, b = m[t][t], m[i][t]
                    if b % a == 0:
                        row_op(t, i, 1, 0, -(b // a), 1)
                    else:
                        g, x, y = xgcd(a, b)
                        row_op(t, i, x, y, -(b // g), a // g)
                        dirty = True
            for j in range(t + 1, ncols):
                if m[t][j]:
                    a, b = m[t][t], m[t][j]
                    if b % a == 0:
                        col_op(t, j, 1, 0, -(b // a), 1)
                    else:
                        g, x, y = xgcd(a, b)
                        col_op(t, j, x, y, -(b // g), a // g)
                        dirty = True
            if not dirty:
                return True

    def fix_sign(t):
        if m[t][t] < 0:
            m[t] = [-x for x in m[t]]
            U[t] = [-x for x in U[t]]

    r = min(nrows, ncols)
    for t in range(r):
        if not clear(t):
            break
        fix_sign(t)
        # make the pivot divide every entry of the trailing submatrix before
        # moving on; then the divisibility chain holds automatically
        while True:
            piv = m[t][t]
            bad = None
            for i in range(t + 1, nrows):
                for j in range(t + 1, ncols):
                    if m[i][j] % piv != 0:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            row_op(t, bad, 1, 1, 0, 1)    # pull the offending row into row t
            clear(t)                      # pivot shrinks to a proper divisor
            fix_sign(t)
    return IntMatrix(m), IntMatrix(U), IntMatrix(V)


# ---------------------------------------------------------------------------
# Ring-generic dense matrix helpers (used with Fraction and FieldElement)
# ---------------------------------------------------------------------------

def mat_mul(A, B):
    bt = list(zip(*B))
    return [[_dot(row, col) for col in bt] for row in A]


def _dot(xs, ys):
    it = iter(zip(xs, ys))
    x, y = next(it)
    acc = x * y
    for x, y in it:
        acc = acc + x * y
    return acc


def mat_transpose(A):
    return [list(col) for col in zip(*A)]


def mat_identity(n, one, zero):
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def mat_scale(A, s):
    return [[s * x for x in row] for row in A]


def mat_add(A, B):
    return [[x + y for x, y in zip(r, s)] for r, s in zip(A, B)]


def mat_sub(A, B):
    return [[x - y for x, y in zip(r, s)] for r, s in zip(A, B)]


def mat_det(A):
    """Determinant over any commutative ring (+, -, *), by memoized Laplace
    expansion along columns.  Fine for the n <= 8 sizes used here."""
    n = len(A)
    if n == 1:
        return A[0][0]
    memo = {}

    def minor(rows, col_mask):
        key = (rows, col_mask)
        if key in memo:
            return memo[key]
        cols = [j for j in range(n) if col_mask & (1 << j)]
        r0 = rows[0]
        if len(rows) == 1:
            res = A[r0][cols[0]]
        else:
            res = None
            sign = 1
            for idx, j in enumerate(cols):
                a = A[r0][j]
                sub = minor(rows[1:], col_mask & ~(1 << j))
                term = a * sub
                if sign < 0:
                    term = -term
                res = term if res is None else res + term
                sign = -sign
        memo[key] = res
        return res

    return minor(tuple(range(n)), (1 << n) - 1)


def mat_inv(A):
    """Inverse over a field (elements need +, -, *, /), Gauss-Jordan."""
    n = len(A)
    a = [list(row) for row in A]
    one = _ring_one(a[0][0])
    zero = a[0][0] - a[0][0]
    inv = mat_identity(n, one, zero)
    for col in range(n):
        piv = None
        for i in range(col, n):
            if a[i][col] != zero:
                piv = i
                break
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        a[col], a[piv] = a[piv], a[col]
        inv[col], inv[piv] = inv[piv], inv[col]
        d = a[col][col]
        a[col] = [x / d for x in a[col]]
        inv[col] = [x / d for x in inv[col]]
        for i in range(n):
            if i != col and a[i][col] != zero:
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[col])]
                inv[i] = [x - f * y for x, y in zip(inv[i], inv[col])]
    return inv


def _ring_one(sample):
    z = sample - sample
    try:
        return z + 1
    except TypeError:
        return type(sample).one()


# ---------------------------------------------------------------------------
# Cyclotomic numbers
# ---------------------------------------------------------------------------

def _factorize(m):
    out = {}
    d = 2
    while d * d <= m:
        while m % d == 0:
            out[d] = out.get(d, 0) + 1
            m //= d
        d += 1
    if m > 1:
        out[m] = out.get(m, 0) + 1
    return out


class Cyclotomic:
    """Element of Q(zeta_m), stored sparsely on the canonical tensor basis.

    The basis consists of the exponents e in [0, m) whose residue modulo each
    prime power q = p^a dividing m has top p-adic digit at most p - 2; any
    other exponent is rewritten through zeta_q^{(p-1)p^(a-1)} =
    -(1 + zeta_q^{p^(a-1)} + ... ).  Normal forms are unique, so equality is
    dictionary equality after lifting to a common modulus.
    """

    __slots__ = ("m", "coeffs")

    def __init__(self, m, coeffs, _normalized=False):
        if m < 1:
            raise ValueError("modulus must be >= 1")
        self.m = m
        if _normalized:
            self.coeffs = coeffs
        else:
            self.coeffs = _cyclo_normalize(m, coeffs)

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls):
        return cls(1, {}, _normalized=True)

    @classmethod
    def one(cls):
        return cls.from_rational(1)

    @classmethod
    def from_rational(cls, x):
        x = Fraction(x)
        if x == 0:
            return cls.zero()
        return cls(1, {0: x}, _normalized=True)

    # -- helpers -----------------------------------------------------------

    def _lift(self, L):
        if L == self.m:
            return self
        k = L // self.m
        return Cyclotomic(L, {e * k: c for e, c in self.coeffs.items()})

    def is_zero(self):
        return not self.coeffs

    def is_rational(self):
        return all(e == 0 for e in self.coeffs)

    def to_rational(self):
        if not self.is_rational():
            raise ValueError("not rational: %r" % (self,))
        return self.coeffs.get(0, Fraction(0))

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        other = _as_cyclo(other)
        if other is NotImplemented:
            return NotImplemented
        L = lcm(self.m, other.m)
        a, b = self._lift(L), other._lift(L)
        out = dict(a.coeffs)
        for e, c in b.coeffs.items():
            v = out.get(e, Fraction(0)) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return Cyclotomic(L, out, _normalized=True)

    __radd__ = __add__

    def __neg__(self):
        return Cyclotomic(self.m, {e: -c for e, c in self.coeffs.items()},
                          _normalized=True)

    def __sub__(self, other):
        other = _as_cyclo(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return _as_cyclo(other) - self

    def __mul__(self, other):
        other = _as_cyclo(other)
        if other is NotImplemented:
            return NotImplemented
        L = lcm(self.m, other.m)
        a, b = self._lift(L), other._lift(L)
        out = {}
        for e1, c1 in a.coeffs.items():
            for e2, c2 in b.coeffs.items():
                e = (e1 + e2) % L
                out[e] = out.get(e, Fraction(0)) + c1 * c2
        return Cyclotomic(L, out)

    __rmul__ = __mul__

    def scale(self, s):
        s = Fraction(s)
        if s == 0:
            return Cyclotomic.zero()
        return Cyclotomic(self.m, {e: c * s for e, c in self.coeffs.items()},
                          _normalized=True)

    def __pow__(self, k):
        if k < 0:
            raise ValueError("negative powers not supported")
        acc = Cyclotomic.one()
        base = self
        while k:
            if k & 1:
                acc = acc * base
            base = base * base
            k >>= 1
        return acc

    def __eq__(self, other):
        other = _as_cyclo(other)
        if other is NotImplemented:
            return NotImplemented
        L = lcm(self.m, other.m)
        return self._lift(L).coeffs == other._lift(L).coeffs

    def __hash__(self):
        # hash through a modulus-independent signature: nonzero support lifted
        # to exponent fractions e/m
        return hash(frozenset((Fraction(e, self.m), c)
                              for e, c in self.coeffs.items()))

    def __repr__(self):
        if self.is_zero():
            return "Cyclotomic(0)"
        parts = []
        for e in sorted(self.coeffs):
            c = self.coeffs[e]
            if e == 0:
                parts.append(str(c))
            else:
                parts.append("%s*z%d^%d" % (c, self.m, e))
        return "Cyclotomic(" + " + ".join(parts) + ")"


def _as_cyclo(x):
    if isinstance(x, Cyclotomic):
        return x
    if isinstance(x, (int, Fraction)):
        return Cyclotomic.from_rational(x)
    return NotImplemented


def _cyclo_normalize(m, coeffs):
    if m == 1:
        out = {}
        for e, c in coeffs.items():
            c = Fraction(c)
            if c:
                out[0] = out.get(0, Fraction(0)) + c
        if out.get(0) == 0:
            out.pop(0, None)
        return out
    fac = _factorize(m)
    # CRT unit vectors: t_q = 1 mod q, 0 mod m/q
    units = {}
    for p, a in fac.items():
        q = p ** a
        rest = m // q
        g, x, _ = xgcd(rest, q)
        units[p] = (rest * x) % m
    work = [(e % m, Fraction(c)) for e, c in coeffs.items() if c]
    out = {}
    while work:
        e, c = work.pop()
        if c == 0:
            continue
        bad = None
        for p, a in fac.items():
            q = p ** a
            r = e % q
            if r // (p ** (a - 1)) == p - 1:
                bad = (p, a, q, r)
                break
        if bad is None:
            v = out.get(e, Fraction(0)) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
            continue
        p, a, q, r = bad
        s = r % (p ** (a - 1))
        t = units[p]
        for i in range(p - 1):
            r_new = s + i * p ** (a - 1)
            e_new = (e + (r_new - r) * t) % m
            work.append((e_new, -c))
    return out


def cyclo_root_of_unity(m, e):
    """zeta_m^e as a Cyclotomic value."""
    if m < 1:
        raise ValueError("modulus must be >= 1")
    return Cyclotomic(m, {e % m: Fraction(1)})


def e_half(x):
    """exp(pi*i*x) for rational x, i.e. zeta_{2q}^p for x = p/q."""
    x = Fraction(x)
    num = x.numerator % (2 * x.denominator)
    return cyclo_root_of_unity(2 * x.denominator, num)


# ---------------------------------------------------------------------------
# Quadratic surds a + b*sqrt(N)
# ---------------------------------------------------------------------------

class SqrtExt:
    """a + b*sqrt(N) with rational a, b and a fixed positive integer N.
    Used for half-integer powers of prime norms; collapses automatically when
    N is a perfect square."""

    __slots__ = ("a", "b", "N")

    def __init__(self, a, b, N):
        a, b = Fraction(a), Fraction(b)
        if N <= 0:
            raise ValueError("radicand must be positive")
        r = isqrt(N)
        if r * r == N:
            a, b, N = a + b * r, Fraction(0), 1
        self.a, self.b, self.N = a, b, N

    @classmethod
    def sqrt(cls, N):
        return cls(0, 1, N)

    def _coerce(self, other):
        if isinstance(other, SqrtExt):
            if other.b != 0 and self.b != 0 and other.N != self.N:
                raise ValueError("mixed radicands")
            return other if other.b != 0 or self.b == 0 else \
                SqrtExt(other.a, 0, self.N)
        if isinstance(other, (int, Fraction)):
            return SqrtExt(other, 0, self.N if self.b != 0 else 1)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        N = self.N if self.b != 0 else o.N
        return SqrtExt(self.a + o.a, self.b + o.b, N)

    __radd__ = __add__

    def __neg__(self):
        return SqrtExt(-self.a, -self.b, self.N)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self + (-o)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        N = self.N if self.b != 0 else o.N
        return SqrtExt(self.a * o.a + self.b * o.b * N,
                       self.a * o.b + self.b * o.a, N)

    __rmul__ = __mul__

    def inverse(self):
        d = self.a * self.a - self.b * self.b * self.N
        if d == 0:
            raise ZeroDivisionError
        return SqrtExt(self.a / d, -self.b / d, self.N)

    def __pow__(self, k):
        if k < 0:
            return self.inverse() ** (-k)
        acc = SqrtExt(1, 0, 1)
        base = self
        while k:
            if k & 1:
                acc = acc * base
            base = base * base
            k >>= 1
        return acc

    def is_rational(self):
        return self.b == 0

    def to_rational(self):
        if self.b != 0:
            raise ValueError("irrational surd")
        return self.a

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        return hash((self.a, self.b, self.N if self.b else 1))

    def __repr__(self):
        if self.b == 0:
            return "SqrtExt(%s)" % self.a
        return "SqrtExt(%s + %s*sqrt(%d))" % (self.a, self.b, self.N)
