"""Congruence symplectic similitude groups and their prime operators.

This module supplies the group-theoretic layer of the operator calculus:

* membership tests for the congruence similitude groups cut out by a tuple
  of coefficient ideals and a scaling ideal (:class:`GroupData`,
  :func:`is_member`, :func:`random_member`);
* the elementary rescaling/swap operator matrices moving forms between
  those groups (:func:`operator_matrix`);
* explicit left coset representatives for the two kinds of operators at an
  odd prime (:func:`gen_reps_tp`, :func:`gen_reps_tj`), together with the
  closed-form coset counts (:func:`coset_count`) and an equivalence test
  (:func:`reps_equivalent`);
* completion of a symmetric coprime bottom-row pair to a full group
  element (:func:`complete_coprime_pair`);
* the direct action of the operators on truncated Fourier expansions
  (:class:`FourierSeries`, :func:`direct_apply`).

Matrices are stored block-wise as M = (A B; C D) with n x n blocks.  The
symplectic form is J = (0 I; -I 0) and the similitude factor u of M is
defined by M J M^T = u J.
"""

import itertools
from fractions import Fraction

from .errors import TruncationError
from .exactmath import (
    Cyclotomic,
    IntMatrix,
    _factorize,
    e_half,
    mat_det,
    mat_inv,
    mat_mul,
    mat_transpose,
    snf,
    xgcd,
)
from .finitequad import Fq, beta, enumerate_subspaces, invertible_symmetric
from .lattice import PseudoLattice, canonical_key, key_reduced_form
from .numberfield import (
    FieldElement,
    FracIdeal,
    different,
    principal_generator,
)


def _coerce_elt(K, x):
    if isinstance(x, FieldElement):
        if x.K != K:
            raise ValueError("element belongs to a different field")
        return x
    return K.element(Fraction(x))


# ---------------------------------------------------------------------------
# group data
# ---------------------------------------------------------------------------

class GroupData:
    """Ideal data cutting out a congruence group of symplectic similitudes.

    The group attached to coefficient ideals I_1, ..., I_n and a scaling
    ideal J consists of the 2n x 2n matrices M = (A B; C D) over the field
    whose similitude factor is a totally positive unit and whose entries
    satisfy::

        a_ij in I_i I_j^-1          b_ij in I_i I_j J dd^-1
        c_ij in (I_i I_j J)^-1 dd   d_ij in I_i^-1 I_j

    where dd is the different of the field.
    """

    __slots__ = ("K", "n", "coeff_ideals", "scaling", "_boxes", "_diff")

    def __init__(self, K, coeff_ideals, scaling=None):
        self.K = K
        self.coeff_ideals = tuple(coeff_ideals)
        self.n = len(self.coeff_ideals)
        if self.n == 0:
            raise ValueError("need at least one coefficient ideal")
        if scaling is None:
            scaling = FracIdeal.ring_of_integers(K)
        self.scaling = scaling
        self._boxes = {}
        self._diff = different(K)

    @classmethod
    def trivial(cls, K, n):
        """The group with all coefficient ideals and the scaling equal to O."""
        return cls(K, [FracIdeal.ring_of_integers(K)] * n)

    def box(self, kind, i, j):
        """The ideal containing the (i, j) entry of the given block."""
        key = (kind, i, j)
        cached = self._boxes.get(key)
        if cached is not None:
            return cached
        I = self.coeff_ideals
        if kind == "a":
            out = I[i] * I[j].inverse()
        elif kind == "b":
            out = I[i] * I[j] * self.scaling * self._diff.inverse()
        elif kind == "c":
            out = (I[i] * I[j] * self.scaling).inverse() * self._diff
        elif kind == "d":
            out = I[i].inverse() * I[j]
        else:
            raise ValueError("unknown block kind %r" % (kind,))
        self._boxes[key] = out
        return out

    def with_coeff(self, ell, ideal):
        ideals = list(self.coeff_ideals)
        ideals[ell] = ideal
        return GroupData(self.K, ideals, self.scaling)

    def with_scaling(self, scaling):
        return GroupData(self.K, self.coeff_ideals, scaling)

    def __eq__(self, other):
        return (isinstance(other, GroupData) and self.K == other.K
                and self.coeff_ideals == other.coeff_ideals
                and self.scaling == other.scaling)

    def __repr__(self):
        return "GroupData(n=%d, %r, scaling=%r)" % (
            self.n, list(self.coeff_ideals), self.scaling)


# ---------------------------------------------------------------------------
# symplectic similitude matrices
# ---------------------------------------------------------------------------

class SympMatrix:
    """A 2n x 2n matrix over the field, stored as exact field elements."""

    __slots__ = ("K", "n", "rows")

    def __init__(self, K, rows):
        rows = [tuple(_coerce_elt(K, x) for x in row) for row in rows]
        m = len(rows)
        if m == 0 or m % 2 or any(len(r) != m for r in rows):
            raise ValueError("need a square matrix of even size")
        self.K = K
        self.n = m // 2
        self.rows = tuple(rows)

    @classmethod
    def from_blocks(cls, K, A, B, C, D):
        n = len(A)
        rows = [list(A[i]) + list(B[i]) for i in range(n)]
        rows += [list(C[i]) + list(D[i]) for i in range(n)]
        return cls(K, rows)

    @classmethod
    def identity(cls, K, n):
        one, zero = K.one(), K.zero()
        return cls(K, [[one if i == j else zero for j in range(2 * n)]
                       for i in range(2 * n)])

    def blocks(self):
        n = self.n
        A = [row[:n] for row in self.rows[:n]]
        B = [row[n:] for row in self.rows[:n]]
        C = [row[:n] for row in self.rows[n:]]
        D = [row[n:] for row in self.rows[n:]]
        return A, B, C, D

    def __mul__(self, other):
        if not isinstance(other, SympMatrix):
            return NotImplemented
        if self.K != other.K:
            raise ValueError("mixed fields")
        return SympMatrix(self.K, mat_mul(self.rows, other.rows))

    def inverse(self):
        return SympMatrix(self.K, mat_inv(self.rows))

    def transpose(self):
        return SympMatrix(self.K, mat_transpose(self.rows))

    def similitude(self):
        """The factor u with M J M^T = u J, or None if there is none."""
        n = self.n
        K = self.K
        zero = K.zero()
        # (M J M^T)_{ik} = sum_j m_{i,j} m_{k,n+j} - m_{i,n+j} m_{k,j}
        def pairing(i, k):
            s = zero
            for j in range(n):
                s = s + self.rows[i][j] * self.rows[k][n + j] \
                    - self.rows[i][n + j] * self.rows[k][j]
            return s

        u = pairing(0, n)
        for i in range(2 * n):
            for k in range(2 * n):
                want = zero
                if k == n + i:
                    want = u
                elif i == n + k:
                    want = -u
                if pairing(i, k) != want:
                    return None
        return u

    def to_fraction_rows(self):
        if self.K.deg != 1:
            raise ValueError("fraction rows only exist over the rationals")
        return [[x.a for x in row] for row in self.rows]

    def __eq__(self, other):
        return (isinstance(other, SympMatrix) and self.K == other.K
                and self.rows == other.rows)

    def __repr__(self):
        return "SympMatrix(%r)" % (self.rows,)


def is_member(M, G):
    """Whether M lies in the congruence similitude group described by G."""
    if M.K != G.K or M.n != G.n:
        return False
    u = M.similitude()
    if u is None or u.is_zero():
        return False
    if not (u.is_integral() and u.inverse().is_integral()
            and u.is_totally_positive()):
        return False
    A, B, C, D = M.blocks()
    n = G.n
    for i in range(n):
        for j in range(n):
            if not G.box("a", i, j).contains(A[i][j]):
                return False
            if not G.box("b", i, j).contains(B[i][j]):
                return False
            if not G.box("c", i, j).contains(C[i][j]):
                return False
            if not G.box("d", i, j).contains(D[i][j]):
                return False
    return True


def _units(K):
    """A few units of the ring of integers, for random group elements."""
    out = [K.one(), -K.one()]
    if K.deg == 2:
        from .numberfield import fundamental_unit
        eps = fundamental_unit(K)
        out += [eps, eps.inverse(), -eps, -eps.inverse()]
    return out


def _random_box_element(box, rng, radius=2):
    basis = box.elements()
    return sum((b * rng.randrange(-radius, radius + 1) for b in basis),
               basis[0].K.zero())


def random_member(G, rng, length=8):
    """A pseudo-random member of the group, as a product of basic moves."""
    K, n = G.K, G.n
    one, zero = K.one(), K.zero()
    M = SympMatrix.identity(K, n)
    kinds = ["upper", "lower", "unit"] + (["gl"] if n > 1 else [])
    for _ in range(length):
        kind = rng.choice(kinds)
        A = [[one if i == j else zero for j in range(n)] for i in range(n)]
        B = [[zero] * n for _ in range(n)]
        C = [[zero] * n for _ in range(n)]
        D = [[one if i == j else zero for j in range(n)] for i in range(n)]
        if kind == "upper":
            for i in range(n):
                for j in range(i, n):
                    y = _random_box_element(G.box("b", i, j), rng)
                    B[i][j] = y
                    B[j][i] = y
        elif kind == "lower":
            for i in range(n):
                for j in range(i, n):
                    y = _random_box_element(G.box("c", i, j), rng)
                    C[i][j] = y
                    C[j][i] = y
        elif kind == "gl":
            i = rng.randrange(n)
            j = rng.randrange(n)
            if i == j:
                continue
            x = _random_box_element(G.box("a", i, j), rng, radius=1)
            A[i][j] = x
            D[j][i] = -x
        else:
            s = rng.randrange(n)
            u = rng.choice(_units(K))
            A[s][s] = u
            D[s][s] = u.inverse()
        M = M * SympMatrix.from_blocks(K, A, B, C, D)
    return M


# ---------------------------------------------------------------------------
# operator matrices between groups
# ---------------------------------------------------------------------------

def _ideal_elements_by_height(I, radius=2):
    """Small nonzero elements of a fractional ideal, deterministically
    ordered by coefficient height on the canonical Z-basis."""
    basis = I.elements()
    deg = len(basis)
    combos = [cs for cs in itertools.product(range(-radius, radius + 1),
                                             repeat=deg)
              if any(cs)]
    combos.sort(key=lambda cs: (sum(abs(c) for c in cs),
                                tuple(-c for c in cs)))
    out = []
    for cs in combos:
        x = basis[0].K.zero()
        for c, b in zip(cs, basis):
            x = x + b * c
        out.append(x)
    return out


def _det1_in_boxes(K, box_a, box_b, box_c, box_d, radius=2):
    """A 2 x 2 determinant-one matrix with entries in the given ideals."""
    cands_a = _ideal_elements_by_height(box_a, radius)
    cands_d = _ideal_elements_by_height(box_d, radius)
    one = K.one()
    # first look for a diagonal solution a*d = 1
    for a in cands_a:
        for d in cands_d:
            if (a * d - one).is_zero():
                return a, K.zero(), K.zero(), d
    cands_b = _ideal_elements_by_height(box_b, radius)
    for a in cands_a:
        for d in cands_d:
            t = a * d - one
            if t.is_zero():
                return a, K.zero(), K.zero(), d
            for b in cands_b:
                c = t / b
                if box_c.contains(c):
                    return a, b, c, d
    raise RuntimeError("no determinant-one matrix found in the ideal boxes; "
                       "increase the search radius")


def operator_matrix(kind, G, ell=None, alpha=None, Q=None):
    """The matrix of one of the elementary operators, plus the target group.

    Kinds:

    * ``"U"`` -- rescale coefficient ideal ``ell`` by the element ``alpha``;
    * ``"W"`` -- rescale the scaling ideal by the totally positive ``alpha``;
    * ``"V"`` -- move the ideal ``Q`` from slot ``ell + 1`` to slot ``ell``;
    * ``"S"`` -- rescale coefficient ideal ``ell`` by ``Q^-1``.

    Returns (M, G2) where a form on G yields a form on G2 under M, i.e.
    M g M^-1 lies in G for every g in G2.
    """
    K, n = G.K, G.n
    one, zero = K.one(), K.zero()

    def ident():
        return [[one if i == j else zero for j in range(n)] for i in range(n)]

    zeros = [[zero] * n for _ in range(n)]
    if kind == "U":
        alpha = _coerce_elt(K, alpha)
        if alpha.is_zero():
            raise ValueError("rescaling element must be nonzero")
        A, D = ident(), ident()
        A[ell][ell] = alpha.inverse()
        D[ell][ell] = alpha
        M = SympMatrix.from_blocks(K, A, zeros, zeros, D)
        return M, G.with_coeff(ell, G.coeff_ideals[ell].scale(alpha))
    if kind == "W":
        alpha = _coerce_elt(K, alpha)
        if not alpha.is_totally_positive():
            raise ValueError("scaling element must be totally positive")
        A, D = ident(), ident()
        ainv = alpha.inverse()
        for i in range(n):
            A[i][i] = ainv
        M = SympMatrix.from_blocks(K, A, zeros, zeros, D)
        return M, G.with_scaling(G.scaling.scale(alpha))
    if kind == "V":
        if not 0 <= ell < n - 1:
            raise ValueError("swap slot out of range")
        I_l = G.coeff_ideals[ell]
        I_m = G.coeff_ideals[ell + 1]
        a, b, c, d = _det1_in_boxes(
            K,
            Q.inverse(),
            Q * I_l * I_m.inverse(),
            Q.inverse() * I_l.inverse() * I_m,
            Q)
        A, D = ident(), ident()
        A[ell][ell] = a
        A[ell][ell + 1] = b
        A[ell + 1][ell] = c
        A[ell + 1][ell + 1] = d
        D[ell][ell] = d
        D[ell][ell + 1] = -c
        D[ell + 1][ell] = -b
        D[ell + 1][ell + 1] = a
        M = SympMatrix.from_blocks(K, A, zeros, zeros, D)
        G2 = G.with_coeff(ell, I_l * Q).with_coeff(ell + 1, I_m * Q.inverse())
        return M, G2
    if kind == "S":
        I_l = G.coeff_ideals[ell]
        a, b, c, d = _det1_in_boxes(
            K,
            Q,
            Q.inverse() * I_l * I_l * G.scaling * G._diff.inverse(),
            Q * (I_l * I_l * G.scaling).inverse() * G._diff,
            Q.inverse())
        A, B, C, D = ident(), [r[:] for r in zeros], [r[:] for r in zeros], \
            ident()
        A[ell][ell] = a
        B[ell][ell] = b
        C[ell][ell] = c
        D[ell][ell] = d
        M = SympMatrix.from_blocks(K, A, B, C, D)
        return M, G.with_coeff(ell, I_l * Q.inverse())
    raise ValueError("unknown operator kind %r" % (kind,))


def delta_matrix(G, P, op, j=None):
    """The diagonal seed matrix of the double coset for an operator at P."""
    K, n = G.K, G.n
    pi = principal_generator(P)
    if pi is None:
        raise ValueError("the prime ideal must be principal")
    if K.deg == 1 and pi.a < 0:
        pi = -pi
    one, zero = K.one(), K.zero()
    diag = []
    if op == "tp":
        diag = [pi] * n + [one] * n
    elif op == "tj":
        if j is None:
            raise ValueError("the second-kind operator needs j")
        diag = [pi] * j + [one] * (n - j) + [pi.inverse()] * j \
            + [one] * (n - j)
    else:
        raise ValueError("unknown operator %r" % (op,))
    return SympMatrix(K, [[diag[i] if i == k else zero
                           for k in range(2 * n)] for i in range(2 * n)])


def reps_equivalent(M1, M2, G, delta):
    """Whether M1 and M2 represent the same left coset of the conjugated
    group delta G delta^-1."""
    X = delta.inverse() * (M1 * M2.inverse()) * delta
    return is_member(X, G)


# ---------------------------------------------------------------------------
# integer matrix utilities
# ---------------------------------------------------------------------------

def _int_identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def _int_inverse(M):
    """Exact inverse of an integer matrix with determinant +-1."""
    inv = mat_inv([[Fraction(x) for x in row] for row in M])
    out = []
    for row in inv:
        assert all(x.denominator == 1 for x in row)
        out.append([int(x) for x in row])
    return out


def _int_adjugate(M):
    """Adjugate of an integer matrix: adj(M) * M = det(M) * I."""
    n = len(M)
    if n == 1:
        return [[1]]
    adj = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [[M[r][c] for c in range(n) if c != j]
                     for r in range(n) if r != i]
            adj[j][i] = (-1) ** (i + j) * mat_det(minor)
    return adj


def _sl_lift(rows, m):
    """An integer matrix with determinant exactly 1 that is congruent to
    `rows` modulo m.  Requires det(rows) = 1 mod m."""
    n = len(rows)
    if m == 1:
        return _int_identity(n)
    a = [[x % m for x in row] for row in rows]
    ops = []

    def shear(i, j, t):
        t %= m
        if t == 0:
            return
        a[i] = [(x + t * y) % m for x, y in zip(a[i], a[j])]
        ops.append((i, j, t))

    primes = sorted(_factorize(m))
    # diagonalise by shears: clear each column around a unit pivot
    for k in range(n):
        bad = [q for q in primes if a[k][k] % q == 0]
        if bad and k < n - 1:
            # CRT a correction from lower rows: at each bad prime some lower
            # row has a nonzero entry in column k (the trailing block stays
            # invertible), and the corrections must not disturb good primes
            pick = {}
            for q in bad:
                src = None
                for i in range(k + 1, n):
                    if a[i][k] % q:
                        src = i
                        break
                assert src is not None, "lost invertibility during lifting"
                pick.setdefault(src, []).append(q)
            for src, qs in pick.items():
                mq = 1
                for q in qs:
                    e = _factorize(m).get(q, 0)
                    mq *= q ** e
                rest = m // mq
                coeff = (rest * pow(rest, -1, mq)) % m
                shear(k, src, coeff)
        assert all(a[k][k] % q for q in primes), \
            "pivot is not a unit modulo m"
        uinv = pow(a[k][k], -1, m)
        for i in range(n):
            if i != k and a[i][k]:
                shear(i, k, (-a[i][k] * uinv) % m)
    # the matrix is now diagonal with unit entries multiplying to 1 mod m;
    # sweep the diagonal to the identity two slots at a time
    for k in range(n - 1):
        u = a[k][k]
        if u == 1:
            continue
        uinv = pow(u, -1, m)
        shear(k + 1, k, 1)                      # row k+1 = (u, v)
        shear(k, k + 1, (uinv - 1) % m)         # row k   = (1, (u^-1 - 1) v)
        shear(k + 1, k, (-u) % m)               # row k+1 = (0, u v)
        top = a[k][k + 1]
        if top:
            uv = a[k + 1][k + 1]
            shear(k, k + 1, (-top * pow(uv, -1, m)) % m)
    assert all(a[i][j] % m == (1 if i == j else 0)
               for i in range(n) for j in range(n)), "reduction failed"
    # rows = (L_r ... L_1)^-1 mod m, so the lift is L_1^-1 ... L_r^-1
    E = _int_identity(n)
    for (i, j, t) in ops:
        for r in range(n):
            E[r][j] -= t * E[r][i]
    det = mat_det(E)
    assert det == 1, "lift lost the determinant"
    for i in range(n):
        for j in range(n):
            assert (E[i][j] - rows[i][j]) % m == 0, "lift lost the congruence"
    return E


def _column_reduce(C, q):
    """(E, r) with det E = +-1 and the columns of C*E beyond the first r
    congruent to zero mod q, the first r independent mod q."""
    n = len(C)
    work = [[x % q for x in row] for row in C]
    E = _int_identity(n)

    def col_shear(dst, src, t):
        t %= q
        if t == 0:
            return
        for i in range(n):
            work[i][dst] = (work[i][dst] + t * work[i][src]) % q
            E[i][dst] += t * E[i][src]

    def col_swapneg(i, j):
        for r in range(n):
            work[r][i], work[r][j] = work[r][j], (-work[r][i]) % q
            E[r][i], E[r][j] = E[r][j], -E[r][i]

    r = 0
    for row in range(n):
        piv = None
        for col in range(r, n):
            if work[row][col]:
                piv = col
                break
        if piv is None:
            continue
        if piv != r:
            col_swapneg(r, piv)
        inv = pow(work[row][r], -1, q)
        for col in range(n):
            if col != r and work[row][col]:
                col_shear(col, r, (-work[row][col] * inv) % q)
        r += 1
        if r == n:
            break
    return E, r


# ---------------------------------------------------------------------------
# completion of a symmetric coprime pair
# ---------------------------------------------------------------------------

class CompletionResult:
    """A completion of a bottom-row pair to a full group element.

    * ``matrix`` completes the original pair (its bottom rows are (C | D));
    * ``transform`` is the group element used to normalise the pair;
    * ``transformed`` = ``matrix * transform`` completes the transformed
      pair used internally.
    """

    __slots__ = ("matrix", "transformed", "transform")

    def __init__(self, matrix, transformed, transform):
        self.matrix = matrix
        self.transformed = transformed
        self.transform = transform


def _solve_mod(A, Bneg, r, q):
    """Y (r x r) with A[:, :r] * Y = -Bneg[:, :r] mod q; A's first r columns
    must be independent mod q."""
    n = len(A)
    aug = [[A[i][j] % q for j in range(r)]
           + [(-Bneg[i][j]) % q for j in range(r)] for i in range(n)]
    pivots = []
    lead = 0
    for col in range(r):
        piv = None
        for i in range(lead, n):
            if aug[i][col] % q:
                piv = i
                break
        assert piv is not None, "columns lost independence"
        aug[lead], aug[piv] = aug[piv], aug[lead]
        inv = pow(aug[lead][col], -1, q)
        aug[lead] = [(x * inv) % q for x in aug[lead]]
        for i in range(n):
            if i != lead and aug[i][col]:
                f = aug[i][col]
                aug[i] = [(x - f * y) % q for x, y in zip(aug[i], aug[lead])]
        pivots.append(col)
        lead += 1
    for i in range(lead, n):
        assert all(x % q == 0 for x in aug[i]), "inconsistent linear system"
    return [[aug[i][r + j] % q for j in range(r)] for i in range(r)]


def _symmetric_lift(Y, q):
    out = [[x % q for x in row] for row in Y]
    for i in range(len(out)):
        for j in range(len(out)):
            assert (out[i][j] - out[j][i]) % q == 0, \
                "solution is not symmetric"
            out[j][i] = out[i][j]
    return out


def _complete_int_pair(C, D):
    """Complete an integer pair (C | D) with C D^T symmetric and trivial
    invariant factors to a matrix in Sp_2n(Z).

    Returns (full, acc, accinv): ``full`` is a symplectic integer matrix
    whose bottom is the transformed pair (C | D) * acc, and acc, accinv are
    inverse symplectic integer matrices recording the transformation.
    """
    n = len(C)
    Cc = [row[:] for row in C]
    Dc = [row[:] for row in D]
    acc = _int_identity(2 * n)
    accinv = _int_identity(2 * n)

    def embed(A, B, Cb, Db):
        rows = [list(A[i]) + list(B[i]) for i in range(n)]
        rows += [list(Cb[i]) + list(Db[i]) for i in range(n)]
        return rows

    def post(M, Minv):
        nonlocal acc, accinv, Cc, Dc
        acc = mat_mul(acc, M)
        accinv = mat_mul(Minv, accinv)
        bottom = mat_mul([Cc[i] + Dc[i] for i in range(n)], M)
        Cc = [row[:n] for row in bottom]
        Dc = [row[n:] for row in bottom]

    zero = [[0] * n for _ in range(n)]

    # step 1: if D is singular, a shear built from a column reduction of C
    # modulo 2 makes det D odd (in particular nonzero)
    if mat_det(Dc) == 0:
        q = 2
        E, r = _column_reduce(Cc, q)
        assert r > 0, "pair is not primitive"
        Et_inv = mat_transpose(_int_inverse(E))
        post(embed(E, zero, zero, Et_inv),
             embed(_int_inverse(E), zero, zero, mat_transpose(E)))
        Y0 = _symmetric_lift(_solve_mod(Cc, Dc, r, q), q)
        Y = [[(Y0[i][j] if i < r and j < r else 0) + (1 if i == j else 0)
              for j in range(n)] for i in range(n)]
        post(embed(_int_identity(n), Y, zero, _int_identity(n)),
             embed(_int_identity(n), [[-x for x in row] for row in Y],
                   zero, _int_identity(n)))
        assert mat_det(Dc) % 2 == 1

    # step 2: make det C and det D coprime by a CRT-combined column
    # reduction and lower shear over the primes dividing det D
    detD = mat_det(Dc)
    if abs(detD) != 1:
        primes = sorted(_factorize(abs(detD)))
        m = 1
        for q in primes:
            m *= q
        Ebar = [[0] * n for _ in range(n)]
        Wbar = [[0] * n for _ in range(n)]
        for q in primes:
            if mat_det(Cc) % q:
                Eq, rq = _int_identity(n), n
            else:
                Eq, rq = _column_reduce(Cc, q)
            crt = (m // q) * pow(m // q, -1, q) % m
            for i in range(n):
                for j in range(n):
                    Ebar[i][j] = (Ebar[i][j] + crt * (Eq[i][j] % q)) % m
                if i >= rq:
                    Wbar[i][i] = (Wbar[i][i] + crt) % m
        E = _sl_lift(Ebar, m)
        Et_inv = mat_transpose(_int_inverse(E))
        post(embed(E, zero, zero, Et_inv),
             embed(_int_inverse(E), zero, zero, mat_transpose(E)))
        post(embed(_int_identity(n), zero, Wbar, _int_identity(n)),
             embed(_int_identity(n), zero,
                   [[-x for x in row] for row in Wbar], _int_identity(n)))
        for q in primes:
            assert mat_det(Cc) % q, "column reduction failed at %d" % q

    # step 3: close with the adjugate formulas
    detD = mat_det(Dc)
    if abs(detD) == 1:
        A = mat_transpose(_int_inverse(Dc))
        B = [[0] * n for _ in range(n)]
    else:
        detC = mat_det(Cc)
        g, _, _ = xgcd(detC, detD)
        assert g == 1, "determinants failed to become coprime"
        lam = abs(detC)
        eta = pow(detD % lam, -1, lam) if lam > 1 else 0
        num = eta * detD - 1
        assert num % detC == 0
        t = num // detC
        adjC = _int_adjugate(Cc)
        adjD = _int_adjugate(Dc)
        B = [[t * adjC[j][i] for j in range(n)] for i in range(n)]
        A = [[eta * adjD[j][i] for j in range(n)] for i in range(n)]
    full = embed(A, B, Cc, Dc)
    return full, acc, accinv


def _validate_rational_pair(Ci, Di):
    n = len(Ci)
    S = mat_mul(Ci, mat_transpose(Di))
    for i in range(n):
        for j in range(n):
            if S[i][j] != S[j][i]:
                raise ValueError("the pair is not symmetric: C D^T must be "
                                 "a symmetric matrix")
    stacked = IntMatrix([Ci[i] + Di[i] for i in range(n)])
    Dg, _, _ = snf(stacked)
    for i in range(n):
        if Dg[i, i] != 1:
            raise ValueError("the pair is not coprime: the invariant "
                             "factors of (C | D) must all be 1")


def _complete_rationals(Ce, De, G):
    K, n = G.K, G.n
    # transport the box constraints to the integer case by the diagonal
    # congruence X = diag(L^-1, a L)
    ls = []
    for I in G.coeff_ideals:
        g = principal_generator(I)
        ls.append(abs(g.a))
    a = abs(principal_generator(G.scaling).a)
    Ci = []
    Di = []
    for i in range(n):
        crow = []
        drow = []
        for j in range(n):
            cv = Ce[i][j].a * a * ls[i] * ls[j]
            dv = De[i][j].a * ls[i] / ls[j]
            if cv.denominator != 1 or dv.denominator != 1:
                raise ValueError("the pair does not satisfy the group's "
                                 "ideal constraints")
            crow.append(int(cv))
            drow.append(int(dv))
        Ci.append(crow)
        Di.append(drow)
    _validate_rational_pair(Ci, Di)
    full, acc, accinv = _complete_int_pair(Ci, Di)
    orig = mat_mul(full, accinv)

    def back(rows):
        out = [[Fraction(rows[i][j]) for j in range(2 * n)]
               for i in range(2 * n)]
        scale_left = [Fraction(1, 1)] * 0
        diag = [Fraction(1, li) for li in ls] + [a * Fraction(li)
                                                 for li in ls]
        inv = [Fraction(li) for li in ls] + [Fraction(1, a * li)
                                             for li in ls]
        for i in range(2 * n):
            for j in range(2 * n):
                out[i][j] = inv[i] * out[i][j] * diag[j]
        return SympMatrix(K, out)

    matrix = back(orig)
    transform = back(acc)
    transformed = matrix * transform
    assert is_member(matrix, G), "completion left the group"
    return CompletionResult(matrix, transformed, transform)


def _complete_quadratic(Ce, De, G):
    K, n = G.K, G.n
    S = mat_mul(Ce, mat_transpose(De))
    for i in range(n):
        for j in range(n):
            if S[i][j] != S[j][i]:
                raise ValueError("the pair is not symmetric: C D^T must be "
                                 "a symmetric matrix")
    detC = mat_det(Ce)
    detD = mat_det(De)
    if detC.is_zero() or detD.is_zero():
        raise NotImplementedError(
            "completion over a quadratic field needs both blocks "
            "invertible with coprime norms")
    if not all(x.is_integral() for row in Ce for x in row) or \
            not all(x.is_integral() for row in De for x in row):
        raise NotImplementedError(
            "completion over a quadratic field is implemented for "
            "integral pairs only")
    nu = abs(int(detC.norm()))
    nk = int(detD.norm())
    from math import gcd
    if gcd(nu, abs(nk)) != 1:
        raise NotImplementedError(
            "completion over a quadratic field needs coprime norms")
    t = pow(nk % nu, -1, nu) if nu > 1 else 0
    eta = detD.conj() * t
    # B = ((eta * detD - 1) / detC) * adj(C)^T with an exact scalar division
    num = eta * detD - K.one()
    scalar = num / detC

    def adjugate(M):
        m = len(M)
        if m == 1:
            return [[K.one()]]
        adj = [[K.zero()] * m for _ in range(m)]
        for i in range(m):
            for j in range(m):
                minor = [[M[r][c] for c in range(m) if c != j]
                         for r in range(m) if r != i]
                val = mat_det(minor) if minor else K.one()
                adj[j][i] = val if (i + j) % 2 == 0 else -val
        return adj

    adjC = adjugate(Ce)
    adjD = adjugate(De)
    B = [[scalar * adjC[j][i] for j in range(n)] for i in range(n)]
    A = [[eta * adjD[j][i] for j in range(n)] for i in range(n)]
    M = SympMatrix.from_blocks(K, A, B, Ce, De)
    if not is_member(M, G):
        raise NotImplementedError(
            "the completed matrix violates the group's ideal constraints")
    ident = SympMatrix.identity(K, n)
    return CompletionResult(M, M, ident)


def complete_coprime_pair(C, D, G):
    """Complete a symmetric coprime pair (C, D) to a group element whose
    bottom block row is exactly (C | D)."""
    K, n = G.K, G.n
    Ce = [[_coerce_elt(K, x) for x in row] for row in C]
    De = [[_coerce_elt(K, x) for x in row] for row in D]
    if len(Ce) != n or len(De) != n or any(len(r) != n for r in Ce + De):
        raise ValueError("blocks must be n x n")
    if K.deg == 1:
        return _complete_rationals(Ce, De, G)
    return _complete_quadratic(Ce, De, G)


# ---------------------------------------------------------------------------
# coset representatives
# ---------------------------------------------------------------------------

class CosetRep:
    """One left coset representative.

    ``matrix`` is the explicit representative over the rationals, or None
    for the symbolic representatives over a quadratic field; ``stratum`` is
    the rank datum (an integer r for the first kind, a triple (r0, r1, r2)
    for the second kind); ``data`` carries the symbolic selector indices.
    """

    __slots__ = ("matrix", "stratum", "data")

    def __init__(self, matrix, stratum, data=None):
        self.matrix = matrix
        self.stratum = stratum
        self.data = data

    def __repr__(self):
        return "CosetRep(stratum=%r)" % (self.stratum,)


def _rational_prime(P):
    """The rational prime p with P = pZ, for an ideal over the rationals."""
    g = principal_generator(P)
    p = abs(g.a)
    if p.denominator != 1 or int(p) < 2:
        raise ValueError("expected an integral prime ideal")
    return int(p)


def _require_trivial_boxes(G):
    O = FracIdeal.ring_of_integers(G.K)
    if any(I != O for I in G.coeff_ideals) or G.scaling != O:
        raise NotImplementedError("explicit representatives are implemented "
                                  "for the trivial ideal data")


def _unimodular_with_columns(fq, cols, flexible):
    """An integer matrix with determinant 1 congruent mod q to the given
    column set, after rescaling the flexible column to fix the determinant.
    Every non-flexible column keeps its direction mod q."""
    q = fq.q
    n = len(cols)
    X = [[cols[t][a] % q for t in range(n)] for a in range(n)]
    d = mat_det(X) % q
    assert d != 0, "columns are not a basis mod q"
    if d != 1:
        s = pow(d, -1, q)
        for a in range(n):
            X[a][flexible] = (X[a][flexible] * s) % q
    return _sl_lift(X, q)


def _symmetric_int_tuples(size, modulus):
    """All symmetric size x size integer matrices with entries in
    [0, modulus)."""
    idx = [(i, j) for i in range(size) for j in range(i, size)]
    for choice in itertools.product(range(modulus), repeat=len(idx)):
        W = [[0] * size for _ in range(size)]
        for (i, j), v in zip(idx, choice):
            W[i][j] = W[j][i] = v
        yield W


def gen_reps_tp(G, P):
    """Left coset representatives for the first-kind operator at P.

    Over the rationals the representatives are explicit block upper
    triangular matrices with similitude 1/p, grouped by the corank r of the
    unscaled directions; over a quadratic field the enumeration is symbolic
    (matrix is None) with the same stratification.
    """
    K, n = G.K, G.n
    if K.deg != 1:
        return _symbolic_tp(G, P)
    _require_trivial_boxes(G)
    p = _rational_prime(P)
    if p == 2:
        raise NotImplementedError("representatives need an odd prime")
    fq = Fq(p)
    reps = []
    for r in range(n + 1):
        dim = n - r
        for basis in enumerate_subspaces(fq, n, dim):
            pivots = set()
            for row in basis:
                for idx, x in enumerate(row):
                    if x:
                        pivots.add(idx)
                        break
            comp = [i for i in range(n) if i not in pivots]
            assert len(comp) == r
            cols = []
            for i in comp:
                cols.append([1 if a == i else 0 for a in range(n)])
            for row in basis:
                cols.append(list(row))
            Cint = _unimodular_with_columns(fq, cols, 0)
            Cf = [[Fraction(x) for x in row] for row in Cint]
            Cinv = mat_inv(Cf)
            Ct = mat_transpose(Cf)
            ts = [Fraction(1, p)] * r + [Fraction(1)] * (n - r)
            bs = [Fraction(1)] * r + [Fraction(1, p)] * (n - r)
            A = [[ts[i] * Cinv[i][j] for j in range(n)] for i in range(n)]
            D = [[bs[i] * Ct[i][j] for j in range(n)] for i in range(n)]
            for Y0 in _symmetric_int_tuples(r, p):
                Y = [[Fraction(Y0[i][j]) if i < r and j < r else Fraction(0)
                      for j in range(n)] for i in range(n)]
                YC = mat_mul(Y, Ct)
                B = [[ts[i] * YC[i][j] for j in range(n)] for i in range(n)]
                M = SympMatrix.from_blocks(
                    K, A, B, [[Fraction(0)] * n for _ in range(n)], D)
                reps.append(CosetRep(M, r))
    assert len(reps) == coset_count("tp", n, p)
    return reps


def _intermediate_bases(n, p):
    """Row bases of the lattices L with p^2 Z^n <= L <= Z^n, in upper
    triangular Hermite form."""
    ds = (1, p, p * p)
    p2 = p * p
    if n == 1:
        for d in ds:
            yield [[d]]
        return
    if n == 2:
        for d1 in ds:
            for d2 in ds:
                for x in range(d2):
                    if ((p2 // d1) * x) % d2 == 0:
                        yield [[d1, x], [0, d2]]
        return
    raise NotImplementedError("explicit representatives are implemented "
                              "for degrees 1 and 2")


def gen_reps_tj(G, P, j):
    """Left coset representatives for the second-kind operator at P with
    j scaled hyperbolic slots.

    Over the rationals the representatives are explicit with similitude 1;
    over a quadratic field the enumeration is symbolic (matrix is None).
    ``j = 0`` yields the single identity representative.
    """
    K, n = G.K, G.n
    if not 0 <= j <= n:
        raise ValueError("j out of range")
    if j == 0:
        if K.deg != 1:
            return [CosetRep(None, (0, 0, 0), data={})]
        return [CosetRep(SympMatrix.identity(K, n), (0, 0, 0))]
    if K.deg != 1:
        return _symbolic_tj(G, P, j)
    _require_trivial_boxes(G)
    p = _rational_prime(P)
    if p == 2:
        raise NotImplementedError("representatives need an odd prime")
    fq = Fq(p)
    p2 = p * p
    reps = []
    for Lrows in _intermediate_bases(n, p):
        Dg, _, V = snf(IntMatrix([row[:] for row in Lrows]))
        exps = []
        for i in range(n):
            d = Dg[i, i]
            v = 0
            while d % p == 0:
                d //= p
                v += 1
            assert d == 1
            exps.append(v - 1)
        idx_plus = [i for i in range(n) if exps[i] == 1]
        idx_zero = [i for i in range(n) if exps[i] == 0]
        idx_minus = [i for i in range(n) if exps[i] == -1]
        r0, m1, r2 = len(idx_plus), len(idx_zero), len(idx_minus)
        r1 = m1 - n + j
        if r1 < 0:
            continue
        Vinv = _int_inverse([list(row) for row in V.data])
        base_cols = [[Vinv[i][a] for a in range(n)] for i in range(n)]
        for lam_basis in enumerate_subspaces(fq, m1, r1):
            if m1:
                pivots = set()
                for row in lam_basis:
                    for idx, x in enumerate(row):
                        if x:
                            pivots.add(idx)
                            break
                comp = [i for i in range(m1) if i not in pivots]
                mcols = [list(row) for row in lam_basis]
                mcols += [[1 if a == i else 0 for a in range(m1)]
                          for i in comp]
                M1 = _unimodular_with_columns(
                    fq, mcols, m1 - 1)
                mixed = []
                for t in range(m1):
                    vec = [0] * n
                    for s in range(m1):
                        coeff = M1[s][t]
                        src = base_cols[idx_zero[s]]
                        for a in range(n):
                            vec[a] += coeff * src[a]
                    mixed.append(vec)
            else:
                mixed = []
            cols = [base_cols[i] for i in idx_plus]
            cols += mixed[:r1]
            cols += [base_cols[i] for i in idx_minus]
            cols += mixed[r1:]
            Cint = [[cols[t][a] for t in range(n)] for a in range(n)]
            assert mat_det(Cint) in (1, -1)
            Cf = [[Fraction(x) for x in row] for row in Cint]
            Cinv = mat_inv(Cf)
            Ct = mat_transpose(Cf)
            ts = [Fraction(1, p)] * r0 + [Fraction(1)] * r1 \
                + [Fraction(p)] * r2 + [Fraction(1)] * (n - j)
            A = [[ts[i] * Cinv[i][j2] for j2 in range(n)] for i in range(n)]
            D = [[Ct[i][j2] / ts[i] for j2 in range(n)] for i in range(n)]
            nj = n - j
            for W0 in _symmetric_int_tuples(r0, p2):
                for W2flat in itertools.product(range(p), repeat=r0 * r1):
                    for W3flat in itertools.product(range(p),
                                                    repeat=r0 * nj):
                        for W1 in invertible_symmetric(fq, r1):
                            Y = [[Fraction(0)] * n for _ in range(n)]
                            for a in range(r0):
                                for b in range(r0):
                                    Y[a][b] = Fraction(W0[a][b])
                                for b in range(r1):
                                    v = Fraction(W2flat[a * r1 + b])
                                    Y[a][r0 + b] = v
                                    Y[r0 + b][a] = v
                                for b in range(nj):
                                    v = Fraction(W3flat[a * nj + b])
                                    Y[a][r0 + r1 + r2 + b] = v
                                    Y[r0 + r1 + r2 + b][a] = v
                            for a in range(r1):
                                for b in range(r1):
                                    Y[r0 + a][r0 + b] = Fraction(
                                        W1[a][b], p)
                            YC = mat_mul(Y, Ct)
                            B = [[ts[i] * YC[i][j2] for j2 in range(n)]
                                 for i in range(n)]
                            M = SympMatrix.from_blocks(
                                K, A, B,
                                [[Fraction(0)] * n for _ in range(n)], D)
                            reps.append(CosetRep(M, (r0, r1, r2)))
    assert len(reps) == coset_count("tj", n, p, j=j)
    return reps


def _tj_strata(n, j):
    for r0 in range(n + 1):
        for r2 in range(n + 1 - r0):
            m1 = n - r0 - r2
            r1 = m1 - n + j
            if r1 < 0:
                continue
            if r0 + r1 + r2 != j:
                continue
            yield r0, r1, r2, m1


def _symbolic_tp(G, P):
    q = int(P.norm())
    n = G.n
    reps = []
    for r in range(n + 1):
        count = beta(n, r, q) * q ** (r * (r + 1) // 2)
        for idx in range(count):
            reps.append(CosetRep(None, r, data={"index": idx,
                                                "prime_norm": q}))
    return reps


def _symbolic_tj(G, P, j):
    q = int(P.norm())
    n = G.n
    reps = []
    for r0, r1, r2, m1 in _tj_strata(n, j):
        omega_count = (q ** (r2 * (n - r2 - m1))
                       * beta(n, r2, q) * beta(n - r2, m1, q))
        lam_count = beta(m1, r1, q)
        shear_count = (_invertible_symmetric_count(r1, q)
                       * q ** (r0 * (r0 + 1))
                       * q ** (r0 * r1) * q ** (r0 * (n - j)))
        for a in range(omega_count):
            for b in range(lam_count):
                for c in range(shear_count):
                    reps.append(CosetRep(
                        None, (r0, r1, r2),
                        data={"sublattice": a, "subspace": b, "shear": c,
                              "prime_norm": q}))
    return reps


def _invertible_symmetric_count(m, q):
    """The number of invertible symmetric m x m matrices over F_q."""
    val = Fraction(q ** (m * (m + 1) // 2))
    for i in range(1, m + 1, 2):
        val *= 1 - Fraction(1, q ** i)
    assert val.denominator == 1
    return int(val)


def coset_count(op, n, q, j=None):
    """Closed-form left coset counts.

    * ``op = "tp"``: the first-kind operator in degree n at residue size q;
    * ``op = "tj"``: the second-kind operator with parameter j;
    * ``op = "invsym"``: invertible symmetric n x n matrices over F_q.
    """
    if op == "tp":
        return sum(beta(n, r, q) * q ** (r * (r + 1) // 2)
                   for r in range(n + 1))
    if op == "invsym":
        return _invertible_symmetric_count(n, q)
    if op == "tj":
        if j is None:
            raise ValueError("the second-kind count needs j")
        total = 0
        for r0, r1, r2, m1 in _tj_strata(n, j):
            total += (q ** (r2 * (n - r2 - m1))
                      * beta(n, r2, q) * beta(n - r2, m1, q)
                      * beta(m1, r1, q)
                      * _invertible_symmetric_count(r1, q)
                      * q ** (r0 * (r0 + 1))
                      * q ** (r0 * r1) * q ** (r0 * (n - j)))
        return total
    raise ValueError("unknown operator %r" % (op,))


# ---------------------------------------------------------------------------
# truncated Fourier expansions and the direct action
# ---------------------------------------------------------------------------

def _is_psd(rows):
    """Positive semidefiniteness of a symmetric matrix of Fractions, by
    checking all principal minors."""
    n = len(rows)
    for size in range(1, n + 1):
        for sub in itertools.combinations(range(n), size):
            minor = [[rows[i][j] for j in sub] for i in sub]
            if mat_det(minor) < 0:
                return False
    return True


class FourierSeries:
    """A truncated Fourier expansion of a degree-n form over the rationals.

    Coefficients are indexed by even symmetric positive semidefinite
    integer matrices, canonicalised through lattice keys.  Indices that are
    not integral, not even on the diagonal, or not positive semidefinite
    return 0; indices whose reduced diagonal exceeds the stored bound raise
    :class:`TruncationError`.
    """

    __slots__ = ("K", "degree", "bound", "_table", "_func")

    def __init__(self, K, degree, bound, table=None, func=None):
        self.K = K
        self.degree = degree
        self.bound = bound
        self._table = table
        self._func = func

    @classmethod
    def from_table(cls, K, degree, bound, entries):
        table = {}
        for rows, value in entries.items():
            mat = [list(row) for row in rows]
            key = canonical_key(PseudoLattice.free(K, mat))
            table[key] = Fraction(value)
        return cls(K, degree, bound, table=table)

    @classmethod
    def from_function(cls, K, degree, bound, func):
        return cls(K, degree, bound, func=func)

    def _normalise(self, rows):
        """None when the coefficient is zero by support; otherwise the
        integer matrix."""
        mat = [[Fraction(x) for x in row] for row in rows]
        n = len(mat)
        if n != self.degree or any(len(r) != n for r in mat):
            raise ValueError("index has the wrong size")
        for i in range(n):
            for j in range(n):
                if mat[i][j] != mat[j][i]:
                    raise ValueError("index must be symmetric")
                if mat[i][j].denominator != 1:
                    return None
        if any(int(mat[i][i]) % 2 for i in range(n)):
            return None
        if not _is_psd(mat):
            return None
        return [[int(x) for x in row] for row in mat]

    def coefficient(self, rows):
        """The coefficient at the given even matrix index."""
        mat = self._normalise(rows)
        if mat is None:
            return Fraction(0)
        key = canonical_key(PseudoLattice.free(self.K, mat))
        _, _, _, rank, red = key_reduced_form(key)
        maxdiag = max((red[i][i] for i in range(rank)), default=Fraction(0))
        if maxdiag > self.bound:
            raise TruncationError(
                "index outside the stored window (reduced diagonal %s > %s)"
                % (maxdiag, self.bound))
        if self._func is not None:
            return self._func(mat)
        return self._table.get(key, Fraction(0))


class DirectImage:
    """The image of a truncated expansion under an operator.

    ``coefficients`` maps canonical keys to exact values on the part of the
    window where every term of the operator sum stayed inside the input
    truncation; ``dropped`` lists the window keys that needed coefficients
    beyond the input bound.
    """

    __slots__ = ("K", "degree", "op", "p", "k", "j", "input_bound",
                 "coefficients", "dropped")

    def __init__(self, K, degree, op, p, k, j, input_bound, coefficients,
                 dropped):
        self.K = K
        self.degree = degree
        self.op = op
        self.p = p
        self.k = k
        self.j = j
        self.input_bound = input_bound
        self.coefficients = coefficients
        self.dropped = dropped

    def coefficient(self, rows):
        mat = [[Fraction(x) for x in row] for row in rows]
        for i in range(len(mat)):
            for j in range(len(mat)):
                if mat[i][j].denominator != 1:
                    return Fraction(0)
        if any(int(mat[i][i]) % 2 for i in range(len(mat))):
            return Fraction(0)
        if not _is_psd(mat):
            return Fraction(0)
        key = canonical_key(PseudoLattice.free(
            self.K, [[int(x) for x in row] for row in mat]))
        if key in self.coefficients:
            return self.coefficients[key]
        raise TruncationError("coefficient outside the computed window")


def _window_forms(K, degree, bound):
    """Representatives (key, rows) of the canonical classes of even PSD
    matrices whose reduced diagonal is at most the bound."""
    cands = []
    if degree == 1:
        for m in range(0, bound // 2 + 1):
            cands.append([[2 * m]])
    elif degree == 2:
        cands.append([[0, 0], [0, 0]])
        for a in range(2, bound + 1, 2):
            cands.append([[a, 0], [0, 0]])
        for a in range(2, bound + 1, 2):
            for c in range(a, bound + 1, 2):
                for b in range(0, a // 2 + 1):
                    cands.append([[a, b], [b, c]])
    else:
        raise NotImplementedError("the direct action is implemented for "
                                  "degrees 1 and 2")
    out = []
    seen = set()
    for rows in cands:
        key = canonical_key(PseudoLattice.free(K, rows))
        if key in seen:
            continue
        seen.add(key)
        out.append((key, rows))
    return out


def _lagrange_reduce(rows):
    """Reduce a symmetric PSD 2 x 2 matrix of Fractions by a unimodular
    change of basis; coefficient lookups are class functions, so reducing
    first keeps the canonicalisation cheap.  Other sizes pass through."""
    if len(rows) != 2:
        return rows
    a, b, c = rows[0][0], rows[0][1], rows[1][1]
    while True:
        if a > c:
            a, b, c = c, -b, a
        if a == 0:
            break
        if 2 * abs(b) > a:
            m = (2 * b + a) // (2 * a)
            b, c = b - m * a, c - 2 * m * b + m * m * a
            continue
        break
    return [[a, b], [b, c]]


def _pure_power_exponent(x, p):
    """(sign, e) for a nonzero Fraction x = sign * p^e."""
    x = Fraction(x)
    sign = 1 if x > 0 else -1
    num, den = abs(x.numerator), x.denominator
    e = 0
    while num % p == 0:
        num //= p
        e += 1
    while den % p == 0:
        den //= p
        e -= 1
    assert num == 1 and den == 1, "value is not a power of the prime"
    return sign, e


def direct_apply(series, op, p, k, j=None, window=None):
    """Apply an operator directly to a truncated Fourier expansion.

    ``op`` is one of ``"tp"`` (first kind), ``"tj"`` (the raw second-kind
    coset sum), or ``"tj_tilde"`` (the normalised second-kind operator,
    which also sweeps in the lower strata).  Every coset representative
    acts by the weight-k slash, and the results are summed with exact
    root-of-unity arithmetic.  ``window`` bounds the diagonal of the
    output classes computed (default: the input truncation bound); window
    entries whose sum requires data beyond the input truncation are
    reported in ``dropped``.
    """
    K = series.K
    if K.deg != 1:
        raise NotImplementedError("the direct action is implemented over "
                                  "the rationals")
    n = series.degree
    p = int(p)
    k = int(k)
    G = GroupData.trivial(K, n)
    P = FracIdeal.principal(K.element(p))
    if op == "tp":
        batches = [(1, gen_reps_tp(G, P))]
        norm2 = n * (k - n - 1)
    elif op == "tj":
        if j is None:
            raise ValueError("the second-kind operator needs j")
        batches = [(1, gen_reps_tj(G, P, j))]
        norm2 = 0
    elif op == "tj_tilde":
        if j is None:
            raise ValueError("the second-kind operator needs j")
        batches = [(beta(n - l, j - l, p), gen_reps_tj(G, P, l))
                   for l in range(j + 1)]
        norm2 = 2 * j * (k - n - 1)
    else:
        raise ValueError("unknown operator %r" % (op,))

    prepared = []
    for weight, reps in batches:
        if weight == 0:
            continue
        for rep in reps:
            rows = rep.matrix.to_fraction_rows()
            A = [row[:n] for row in rows[:n]]
            B = [row[n:] for row in rows[:n]]
            D = [row[n:] for row in rows[n:]]
            u = rep.matrix.similitude().a
            Ainv = mat_inv(A)
            BDinv = mat_mul(B, mat_inv(D))
            detD = mat_det(D)
            _, s_ord = _pure_power_exponent(u, p)
            sgn, t_ord = _pure_power_exponent(detD, p)
            # the slash contributes u^{nk/2} det(D)^{-k}; track doubled
            # exponents so everything stays integral
            e2 = norm2 + s_ord * n * k - 2 * k * t_ord
            assert e2 % 2 == 0, "half-integral power of p in the action"
            scale = Fraction(p) ** (e2 // 2) * weight
            if sgn < 0 and k % 2:
                scale = -scale
            prepared.append((Ainv, BDinv, u, scale))

    coefficients = {}
    dropped = []
    if window is None:
        window = series.bound
    for key, rows in _window_forms(K, n, window):
        Tfr = [[Fraction(x) for x in row] for row in rows]
        acc = Cyclotomic.zero()
        try:
            for Ainv, BDinv, u, scale in prepared:
                TA = mat_mul(Tfr, Ainv)
                Tpre = mat_mul(mat_transpose(Ainv), TA)
                Tpre = [[u * x for x in row] for row in Tpre]
                val = series.coefficient(_lagrange_reduce(Tpre))
                if val == 0:
                    continue
                x = sum(Tpre[a][b] * BDinv[b][a]
                        for a in range(n) for b in range(n))
                acc = acc + e_half(x).scale(val * scale)
            if acc.is_rational():
                coefficients[key] = acc.to_rational()
            else:
                coefficients[key] = acc
        except TruncationError:
            dropped.append(key)
    return DirectImage(K, n, op, p, k, j, series.bound, coefficients,
                       dropped)
