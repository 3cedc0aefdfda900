"""Real quadratic fields (and Q) with exact ideal arithmetic.

A field is either Q or Q(sqrt(d)) for squarefree d > 1, with ring of integers
Z[omega] where omega = (1+sqrt(d))/2 if d = 1 mod 4 and omega = sqrt(d)
otherwise.  Elements are pairs of Fractions in the (1, omega) basis, so every
computation (norms, traces, embedding signs, ideal normal forms) is exact.

Fractional ideals are stored as a canonical pair (denominator, row-HNF basis
of the numerator Z-module), which makes equality and hashing structural.
Prime factorisation of rational primes, class groups with certified
principality tests (via the fundamental unit), class characters and an
"element with prescribed valuations" search round out the module.
"""

from fractions import Fraction
from math import gcd, isqrt

from .exactmath import Cyclotomic, _factorize, _row_hnf


def _is_squarefree(d):
    i = 2
    while i * i <= d:
        if d % (i * i) == 0:
            return False
        i += 1
    return True


class FieldSpec:
    """Q (d = 1) or a real quadratic field Q(sqrt(d))."""

    __slots__ = ("d", "deg", "disc", "tr_omega", "norm_omega")

    _cache = {}

    def __init__(self, d):
        d = int(d)
        if d < 1 or not _is_squarefree(d):
            raise ValueError("d must be 1 or a squarefree integer > 1")
        self.d = d
        if d == 1:
            self.deg = 1
            self.disc = 1
            self.tr_omega = 0
            self.norm_omega = 0
        else:
            self.deg = 2
            if d % 4 == 1:
                # omega = (1 + sqrt(d)) / 2
                self.disc = d
                self.tr_omega = 1
                self.norm_omega = (1 - d) // 4
            else:
                # omega = sqrt(d)
                self.disc = 4 * d
                self.tr_omega = 0
                self.norm_omega = -d

    @classmethod
    def rationals(cls):
        return cls._get(1)

    @classmethod
    def quadratic(cls, d):
        if d == 1:
            raise ValueError("use rationals() for d = 1")
        return cls._get(d)

    @classmethod
    def _get(cls, d):
        if d not in cls._cache:
            cls._cache[d] = cls(d)
        return cls._cache[d]

    def element(self, a, b=0):
        return FieldElement(self, a, b)

    def zero(self):
        return FieldElement(self, 0, 0)

    def one(self):
        return FieldElement(self, 1, 0)

    def omega(self):
        if self.deg == 1:
            raise ValueError("omega only defined for quadratic fields")
        return FieldElement(self, 0, 1)

    def sqrt_d(self):
        """sqrt(d) as a field element."""
        if self.deg == 1:
            raise ValueError("sqrt_d only defined for quadratic fields")
        if self.d % 4 == 1:
            return FieldElement(self, -1, 2)    # 2*omega - 1
        return FieldElement(self, 0, 1)

    def __eq__(self, other):
        return isinstance(other, FieldSpec) and self.d == other.d

    def __hash__(self):
        return hash(("FieldSpec", self.d))

    def __repr__(self):
        return "Q" if self.deg == 1 else "Q(sqrt(%d))" % self.d


class FieldElement:
    """a + b*omega with exact rational coordinates."""

    __slots__ = ("K", "a", "b")

    def __init__(self, K, a, b=0):
        self.K = K
        self.a = Fraction(a)
        self.b = Fraction(b)
        if K.deg == 1 and self.b != 0:
            raise ValueError("rational field element with omega part")

    def _coerce(self, other):
        if isinstance(other, FieldElement):
            if other.K != self.K:
                raise ValueError("mixed fields")
            return other
        if isinstance(other, (int, Fraction)):
            return FieldElement(self.K, other, 0)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return FieldElement(self.K, self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.K, -self.a, -self.b)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return FieldElement(self.K, self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        return -(self - other)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        K = self.K
        # omega^2 = tr_omega * omega - norm_omega
        a, b, c, e = self.a, self.b, o.a, o.b
        return FieldElement(K, a * c - b * e * K.norm_omega,
                            a * e + b * c + b * e * K.tr_omega)

    __rmul__ = __mul__

    def conj(self):
        return FieldElement(self.K, self.a + self.b * self.K.tr_omega, -self.b)

    def norm(self):
        K = self.K
        if K.deg == 1:
            return self.a
        return self.a * self.a + self.a * self.b * K.tr_omega \
            + self.b * self.b * K.norm_omega

    def trace(self):
        if self.K.deg == 1:
            return self.a
        return 2 * self.a + self.b * self.K.tr_omega

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("field element inverse of zero")
        if self.K.deg == 1:
            return FieldElement(self.K, 1 / self.a, 0)
        n = self.norm()
        c = self.conj()
        return FieldElement(self.K, c.a / n, c.b / n)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __pow__(self, k):
        k = int(k)
        if k < 0:
            return self.inverse() ** (-k)
        out = self.K.one()
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def is_zero(self):
        return self.a == 0 and self.b == 0

    def is_integral(self):
        return self.a.denominator == 1 and self.b.denominator == 1

    def _sign_at(self, s):
        """Exact sign of the image under the embedding sqrt(d) -> s*sqrt(d)."""
        K = self.K
        if K.deg == 1:
            return (self.a > 0) - (self.a < 0)
        # write self = u + v * sqrt(d)
        if K.d % 4 == 1:
            u = self.a + self.b / 2
            v = self.b / 2
        else:
            u, v = self.a, self.b
        v = v * s
        if v == 0:
            return (u > 0) - (u < 0)
        if u == 0:
            return (v > 0) - (v < 0)
        if (u > 0) == (v > 0):
            return 1 if u > 0 else -1
        # opposite signs; compare |u| with |v|*sqrt(d) exactly
        if u * u > v * v * K.d:
            return 1 if u > 0 else -1
        return 1 if v > 0 else -1

    def is_totally_positive(self):
        if self.K.deg == 1:
            return self.a > 0
        return self._sign_at(1) > 0 and self._sign_at(-1) > 0

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = FieldElement(self.K, other, 0)
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self.K == other.K and self.a == other.a and self.b == other.b

    def __hash__(self):
        return hash((self.K.d, self.a, self.b))

    def __repr__(self):
        if self.K.deg == 1:
            return str(self.a)
        return "(%s + %s*w)" % (self.a, self.b)


# ---------------------------------------------------------------------------
# Fractional ideals
# ---------------------------------------------------------------------------

class FracIdeal:
    """Nonzero fractional ideal, canonically (1/den) * row-HNF Z-basis."""

    __slots__ = ("K", "den", "rows")

    def __init__(self, K, den, rows):
        # callers are expected to pass canonical data; use the constructors
        self.K = K
        self.den = den
        self.rows = rows

    @classmethod
    def from_generators(cls, K, gens):
        """Ideal generated over the ring of integers by the given elements."""
        gens = [g for g in gens if not g.is_zero()]
        if not gens:
            raise ValueError("zero ideal")
        module = []
        for g in gens:
            module.append(g)
            if K.deg == 2:
                module.append(g * K.omega())
        return cls._from_module(K, module)

    @classmethod
    def _from_module(cls, K, elems):
        """Z-module spanned by the given elements (assumed O-stable)."""
        elems = [x for x in elems if not x.is_zero()]
        if not elems:
            raise ValueError("zero ideal")
        L = 1
        for x in elems:
            L = L * (x.a.denominator * x.b.denominator) // \
                gcd(L, x.a.denominator * x.b.denominator)
        coords = []
        for x in elems:
            if K.deg == 1:
                coords.append([int(x.a * L)])
            else:
                coords.append([int(x.a * L), int(x.b * L)])
        H, _ = _row_hnf(coords)
        rows = [r for r in H if any(r)]
        if len(rows) != K.deg:
            raise ValueError("module does not have full rank")
        if K.deg == 2 and (rows[0][0] <= 0 or rows[1][0] != 0
                           or rows[1][1] <= 0):
            raise ValueError("unexpected echelon shape")
        return cls._canonical(K, L, rows)

    @classmethod
    def _canonical(cls, K, den, rows):
        g = den
        for r in rows:
            for e in r:
                g = gcd(g, e)
        den //= g
        rows = tuple(tuple(e // g for e in r) for r in rows)
        return cls(K, den, rows)

    @classmethod
    def principal(cls, x):
        return cls.from_generators(x.K, [x])

    @classmethod
    def ring_of_integers(cls, K):
        return cls.principal(K.one())

    def elements(self):
        """The canonical Z-basis as field elements."""
        K = self.K
        if K.deg == 1:
            return [K.element(Fraction(self.rows[0][0], self.den), 0)]
        return [K.element(Fraction(r[0], self.den), Fraction(r[1], self.den))
                for r in self.rows]

    def is_zero(self):
        return False

    def __mul__(self, other):
        if not isinstance(other, FracIdeal):
            return NotImplemented
        if other.K != self.K:
            raise ValueError("mixed fields")
        prods = [x * y for x in self.elements() for y in other.elements()]
        return FracIdeal._from_module(self.K, prods)

    def __add__(self, other):
        if not isinstance(other, FracIdeal):
            return NotImplemented
        return FracIdeal._from_module(self.K,
                                      self.elements() + other.elements())

    def scale(self, x):
        """The ideal x * self for a nonzero field element x."""
        return FracIdeal._from_module(self.K,
                                      [x * e for e in self.elements()])

    def norm(self):
        if self.K.deg == 1:
            return Fraction(self.rows[0][0], self.den)
        return Fraction(self.rows[0][0] * self.rows[1][1],
                        self.den * self.den)

    def conjugate(self):
        return FracIdeal._from_module(self.K,
                                      [e.conj() for e in self.elements()])

    def inverse(self):
        if self.K.deg == 1:
            return FracIdeal.principal(self.elements()[0].inverse())
        return self.conjugate().scale(self.K.element(1 / self.norm(), 0))

    def __pow__(self, k):
        k = int(k)
        if k < 0:
            return self.inverse() ** (-k)
        out = FracIdeal.ring_of_integers(self.K)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def contains(self, x):
        if not isinstance(x, FieldElement) or x.K != self.K:
            raise ValueError("element of the wrong field")
        if x.is_zero():
            return True
        if self.K.deg == 1:
            t = x.a * self.den
            return t.denominator == 1 and int(t) % self.rows[0][0] == 0
        X = x.a * self.den
        Y = x.b * self.den
        a, b = self.rows[0]
        c = self.rows[1][1]
        m = X / a
        if m.denominator != 1:
            return False
        k = (Y - m * b) / c
        return k.denominator == 1

    def contains_ideal(self, other):
        return all(self.contains(e) for e in other.elements())

    def is_integral(self):
        return self.den == 1

    def ord_ideal(self, A):
        """Exact exponent of this prime in the factorisation of ideal A."""
        num = FracIdeal._canonical(self.K, 1, A.rows)
        v = self._ord_integral(num)
        if A.den != 1:
            v -= self._ord_integral(
                FracIdeal.principal(self.K.element(A.den, 0)))
        return v

    def _ord_integral(self, B):
        v = 0
        Pinv = self.inverse()
        while self.contains_ideal(B):
            B = B * Pinv
            v += 1
        return v

    def ord(self, x):
        """Valuation of a nonzero field element at this prime."""
        return self.ord_ideal(FracIdeal.principal(x))

    def __eq__(self, other):
        return isinstance(other, FracIdeal) and self.K == other.K \
            and self.den == other.den and self.rows == other.rows

    def __hash__(self):
        return hash((self.K.d, self.den, self.rows))

    def __repr__(self):
        return "FracIdeal(%r, 1/%d * %r)" % (self.K, self.den,
                                             [list(r) for r in self.rows])


# ---------------------------------------------------------------------------
# Splitting of rational primes
# ---------------------------------------------------------------------------

def primes_above(K, p):
    """[(P, e, f)] for the primes of K over the rational prime p."""
    p = int(p)
    if p < 2:
        raise ValueError("p must be a prime")
    if K.deg == 1:
        return [(FracIdeal.principal(K.element(p, 0)), 1, 1)]
    # factor x^2 - tr_omega*x + norm_omega mod p
    roots = [r for r in range(p)
             if (r * r - K.tr_omega * r + K.norm_omega) % p == 0]
    if not roots:
        return [(FracIdeal.principal(K.element(p, 0)), 1, 2)]
    pK = K.element(p, 0)
    if len(roots) == 2:
        return [(FracIdeal.from_generators(K, [pK, K.omega() - K.element(r, 0)]),
                 1, 1) for r in roots]
    r = roots[0]
    P = FracIdeal.from_generators(K, [pK, K.omega() - K.element(r, 0)])
    return [(P, 2, 1)]


def residue_root(P, p):
    """The residue of omega mod P as an integer in [0, p) (degree-one P)."""
    K = P.K
    for r in range(p):
        if P.contains(K.omega() - K.element(r, 0)):
            return r
    raise ValueError("prime has no degree-one residue root")


# ---------------------------------------------------------------------------
# Units and class groups
# ---------------------------------------------------------------------------

def fundamental_unit(K):
    """The fundamental unit > 1 of a real quadratic field."""
    if K.deg != 2:
        raise ValueError("fundamental unit needs a quadratic field")
    T, disc = K.tr_omega, K.disc
    for y in range(1, 10 ** 6):
        found = []
        for t in (1, -1):
            s2 = y * y * disc + 4 * t
            if s2 < 0:
                continue
            s = isqrt(s2)
            if s * s != s2:
                continue
            for sg in (s, -s):
                num = -y * T + sg
                if num % 2 == 0:
                    found.append(K.element(num // 2, y))
        # keep units > 1; at the minimal coordinate y both eps and eps^2 can
        # appear (e.g. the golden ratio), so take the smallest of them
        best = None
        for u in found:
            if (u - K.one())._sign_at(1) > 0:
                if best is None or (best - u)._sign_at(1) > 0:
                    best = u
        if best is not None:
            return best
    raise RuntimeError("fundamental unit search exhausted")


def _omega_upper(K):
    """Integer upper bound for the larger embedding of omega."""
    r = isqrt(K.d) + 1
    if K.d % 4 == 1:
        return (1 + r + 1) // 2
    return r


def principal_generator(I):
    """A generator if the fractional ideal I is principal, else None."""
    K = I.K
    if K.deg == 1:
        return I.elements()[0]
    num = FracIdeal._canonical(K, 1, I.rows)
    g = _principal_generator_integral(num)
    if g is None:
        return None
    return g / K.element(I.den, 0)


def _principal_generator_integral(B):
    K = B.K
    N = int(B.norm())
    eps = fundamental_unit(K)
    eps_up = int(eps.a + eps.b * _omega_upper(K)) + 1
    M = (isqrt(N) + 1) * eps_up
    Y = M + 1
    T, disc = K.tr_omega, K.disc
    for y in range(0, Y + 1):
        for t in (N, -N):
            s2 = y * y * disc + 4 * t
            if s2 < 0:
                continue
            s = isqrt(s2)
            if s * s != s2:
                continue
            for sg in (s, -s):
                num = -y * T + sg
                if num % 2:
                    continue
                cand = K.element(num // 2, y)
                if not cand.is_zero() and B.contains(cand):
                    return cand
    return None


def is_principal(I):
    return principal_generator(I) is not None


class IdealClassGroup:
    """Ideal class group with explicit representatives and product table."""

    __slots__ = ("K", "h", "reps", "table")

    def __init__(self, K, reps, table):
        self.K = K
        self.reps = reps
        self.table = table
        self.h = len(reps)

    def class_of(self, A):
        for i, R in enumerate(self.reps):
            if is_principal(A * R.inverse()):
                return i
        raise ValueError("ideal not classified; class group incomplete")

    def inverse_index(self, i):
        for j in range(self.h):
            if self.table[i][j] == 0:
                return j
        raise ValueError("no inverse found")


def class_group(K):
    """Compute the ideal class group from primes under the Minkowski bound."""
    O = FracIdeal.ring_of_integers(K)
    if K.deg == 1:
        return IdealClassGroup(K, [O], [[0]])
    # real quadratic Minkowski bound: sqrt(disc)/2
    mb = isqrt(K.disc) // 2 + 1
    gens = []
    p = 2
    while p <= mb:
        if all(p % q for q in range(2, p)):
            for P, _, f in primes_above(K, p):
                if p ** f <= mb:
                    gens.append(P)
        p += 1
    reps = [O]
    frontier = [O]
    while frontier:
        A = frontier.pop()
        for P in gens:
            B = A * P
            if not any(is_principal(B * R.inverse()) for R in reps):
                reps.append(B)
                frontier.append(B)
    G = IdealClassGroup(K, reps, [])
    table = [[G.class_of(Ri * Rj) for Rj in reps] for Ri in reps]
    return IdealClassGroup(K, reps, table)


class ClassCharacter:
    """Character of an ideal class group with exact cyclotomic values."""

    __slots__ = ("group", "values")

    def __init__(self, group, values):
        values = tuple(values)
        if len(values) != group.h:
            raise ValueError("need one value per ideal class")
        for i in range(group.h):
            for j in range(group.h):
                if values[group.table[i][j]] != values[i] * values[j]:
                    raise ValueError("values are not multiplicative")
        self.group = group
        self.values = values

    @classmethod
    def trivial(cls, group):
        return cls(group, [Cyclotomic.one()] * group.h)

    @classmethod
    def quadratic(cls, group):
        """The order-2 character of a class group of order 2."""
        if group.h != 2:
            raise ValueError("quadratic character needs h = 2")
        return cls(group, [Cyclotomic.one(), Cyclotomic.from_rational(-1)])

    def __call__(self, A):
        return self.values[self.group.class_of(A)]


# ---------------------------------------------------------------------------
# Elements with prescribed valuations
# ---------------------------------------------------------------------------

def pick_with_orders(K, constraints, totally_positive=False):
    """A field element x with ord_P(x) = v for every (P, v) constraint.

    Optionally totally positive.  The search runs over expanding boxes in
    the Z-basis of prod P^v, so membership gives ord >= v for free and each
    exact order is verified before returning.
    """
    if not constraints:
        return K.one()
    A = FracIdeal.ring_of_integers(K)
    for P, v in constraints:
        A = A * P ** v
    basis = A.elements()
    primes = [P for P, _ in constraints]
    targets = [v for _, v in constraints]

    def ok(x):
        if x.is_zero():
            return False
        if totally_positive and not x.is_totally_positive():
            return False
        return all(P.ord(x) == v for P, v in zip(primes, targets))

    for R in range(1, 4097):
        box = range(-R, R + 1)
        for m in box:
            for k in (box if K.deg == 2 else [0]):
                if max(abs(m), abs(k)) != R:
                    continue
                x = basis[0] * m
                if K.deg == 2:
                    x = x + basis[1] * k
                if ok(x):
                    return x
    raise RuntimeError("pick_with_orders search exhausted")


def different(K):
    """The different ideal."""
    if K.deg == 1:
        return FracIdeal.ring_of_integers(K)
    # Z[omega] is monogenic, so the different is (f'(omega)) = (2*omega - tr)
    return FracIdeal.principal(K.element(-K.tr_omega, 2))


def support(I):
    """[(P, ord_P(I))] over the prime ideals where I has nonzero order.

    Candidate rational primes are those dividing the denominator or the
    numerator norm; the norm alone can hide cancelling split factors.
    """
    K = I.K
    num = FracIdeal._canonical(K, 1, I.rows)
    cands = set(_factorize(I.den)) | set(_factorize(abs(int(num.norm()))))
    out = []
    for p in sorted(cands):
        for P, _, _ in primes_above(K, p):
            v = P.ord_ideal(I)
            if v:
                out.append((P, v))
    return out


# ---------------------------------------------------------------------------
# JSON forms
# ---------------------------------------------------------------------------

def element_to_json(x):
    return {"a": str(x.a), "b": str(x.b)}


def element_from_json(K, obj):
    return K.element(Fraction(obj["a"]), Fraction(obj.get("b", "0")))


def ideal_to_json(A):
    return {"basis": [[str(Fraction(e, A.den)) for e in row]
                      for row in A.rows]}


def ideal_from_json(K, obj):
    gens = []
    for row in obj["basis"]:
        coords = [Fraction(e) for e in row]
        gens.append(K.element(coords[0], coords[1] if len(coords) > 1 else 0))
    return FracIdeal._from_module(K, gens)
