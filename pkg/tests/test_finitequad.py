import itertools
import random
from fractions import Fraction

import pytest

from heckeops.exactmath import Cyclotomic, cyclo_root_of_unity, e_half
from heckeops.finitequad import (
    Fq,
    QuadSpaceFq,
    WittData,
    additive_character,
    alpha_j,
    beta,
    complete_symmetric_charsum,
    count_isotropic,
    count_isotropic_brute,
    delta,
    enumerate_subspaces,
    fq_kernel,
    fq_rref,
    invertible_symmetric,
    rank_stratify,
    residue_field,
    residue_system,
    stratum_matrix,
    symmetric_matrices,
    witt_decompose,
)
from heckeops.numberfield import FieldSpec, FracIdeal, different, \
    pick_with_orders, primes_above

Q = FieldSpec.rationals()
K5 = FieldSpec.quadratic(5)
K10 = FieldSpec.quadratic(10)


class TestFq:
    def test_frobenius(self):
        for (p, f) in ((3, 1), (3, 2), (5, 2)):
            fq = Fq(p, f)
            for x in fq.elements():
                assert fq.pow(x, fq.q) == x

    def test_inverses(self):
        fq = Fq(7, 2)
        for x in fq.elements():
            if x != 0:
                assert fq.mul(x, fq.inv(x)) == 1

    def test_trace_counts(self):
        fq = Fq(5, 2)
        counts = {}
        for x in fq.elements():
            t = fq.trace_to_prime(x)
            counts[t] = counts.get(t, 0) + 1
        assert counts == {t: 5 for t in range(5)}

    def test_char_two_rejected(self):
        with pytest.raises(ValueError):
            Fq(2, 1)

    def test_prime_subfield(self):
        fq = Fq(3, 2)
        for a in range(3):
            for b in range(3):
                assert fq.add(a, b) == (a + b) % 3
                assert fq.mul(a, b) == (a * b) % 3


class TestLinearAlgebra:
    def test_rref_kernel(self):
        rng = random.Random(11)
        fq = Fq(3, 2)
        for _ in range(40):
            n = rng.randint(1, 4)
            m = rng.randint(1, 4)
            A = [[rng.randrange(fq.q) for _ in range(n)] for _ in range(m)]
            R, pivots = fq_rref(fq, A)
            ker = fq_kernel(fq, A)
            assert len(pivots) + len(ker) == n
            for v in ker:
                for row in A:
                    s = 0
                    for c, x in zip(row, v):
                        s = fq.add(s, fq.mul(c, x))
                    assert s == 0

    def test_subspace_enumeration_count(self):
        fq = Fq(3, 1)
        assert sum(1 for _ in enumerate_subspaces(fq, 4, 2)) == beta(4, 2, 3)
        assert sum(1 for _ in enumerate_subspaces(fq, 3, 1)) == beta(3, 1, 3)


def diag_space(fq, entries):
    n = len(entries)
    gram = [[entries[i] if i == j else 0 for j in range(n)] for i in range(n)]
    return QuadSpaceFq(fq, gram)


class TestWitt:
    def test_hyperbolic_plane(self):
        fq = Fq(3, 1)
        sp = QuadSpaceFq(fq, [[0, 1], [1, 0]])
        wd = witt_decompose(sp)
        assert (wd.r, wd.t, wd.w) == (0, 1, 0)

    def test_zero_form(self):
        fq = Fq(3, 1)
        wd = witt_decompose(QuadSpaceFq(fq, [[0, 0], [0, 0]]))
        assert (wd.r, wd.t, wd.w) == (2, 0, 0)

    def test_anisotropic_plane_q3(self):
        # x^2 + y^2 is anisotropic mod 3 (-1 is not a square)
        fq = Fq(3, 1)
        wd = witt_decompose(diag_space(fq, [1, 1]))
        assert (wd.r, wd.t, wd.w) == (0, 0, 2)

    def test_split_plane_q5(self):
        # x^2 + y^2 is hyperbolic mod 5
        fq = Fq(5, 1)
        wd = witt_decompose(diag_space(fq, [1, 1]))
        assert (wd.r, wd.t, wd.w) == (0, 1, 0)

    def test_dim3_identity_q3(self):
        fq = Fq(3, 1)
        wd = witt_decompose(diag_space(fq, [1, 1, 1]))
        assert (wd.r, wd.t, wd.w) == (0, 1, 1)

    def test_random_grams(self):
        rng = random.Random(13)
        for q, f in ((3, 1), (5, 1), (3, 2)):
            fq = Fq(q, f)
            for _ in range(25):
                n = rng.randint(1, 4)
                gram = [[0] * n for _ in range(n)]
                for i in range(n):
                    for j in range(i, n):
                        gram[i][j] = gram[j][i] = rng.randrange(fq.q)
                sp = QuadSpaceFq(fq, gram)
                wd = witt_decompose(sp)
                assert wd.r + 2 * wd.t + wd.w == n
                assert wd.w <= 2
                wd.verify(sp)
                for ell in (1, 2):
                    if ell <= n:
                        assert count_isotropic(sp, ell) == \
                            count_isotropic_brute(sp, ell)


class TestCounts:
    def test_beta_delta(self):
        assert beta(2, 1, 3) == 4
        assert beta(4, 2, 3) == 130
        assert beta(3, 0, 3) == 1
        assert beta(0, 1, 3) == 0
        assert delta(2, 2, 3) == 40
        assert delta(1, 1, 5) == 6
        assert delta(3, 0, 7) == 1

    def test_frozen_isotropic_counts(self):
        fq = Fq(3, 1)
        H = QuadSpaceFq(fq, [[0, 1], [1, 0]])
        assert count_isotropic(H, 1) == 2
        HH = QuadSpaceFq(fq, [[0, 1, 0, 0], [1, 0, 0, 0],
                              [0, 0, 0, 1], [0, 0, 1, 0]])
        assert count_isotropic(HH, 1) == 16
        assert count_isotropic(HH, 2) == 8
        assert count_isotropic(diag_space(fq, [1, 1, 1]), 1) == 4
        assert count_isotropic(diag_space(fq, [0, 0]), 1) == 4
        deg = QuadSpaceFq(fq, [[0, 0, 0], [0, 0, 1], [0, 1, 0]])
        assert count_isotropic(deg, 1) == 7      # 2q + 1
        assert count_isotropic(H, 0) == 1
        assert alpha_j(H, 1) == 2

    def test_brute_matches(self):
        fq = Fq(3, 1)
        for entries in ((1,), (1, 2), (1, 1, 2), (0, 1, 2)):
            sp = diag_space(fq, list(entries))
            for ell in range(0, len(entries) + 1):
                assert count_isotropic(sp, ell) == \
                    count_isotropic_brute(sp, ell)


class TestResidues:
    def test_residue_system_sizes(self):
        P3 = primes_above(Q, 3)[0][0]
        P11 = primes_above(K5, 11)[0][0]
        P3i = primes_above(K5, 3)[0][0]      # inert
        P2r = primes_above(K10, 2)[0][0]     # ramified
        for P, m, size in ((P3, 1, 3), (P3, 2, 9), (P11, 1, 11),
                           (P11, 2, 121), (P3i, 1, 9), (P2r, 1, 2),
                           (P2r, 2, 4)):
            R = residue_system(P, m)
            assert len(R) == size
            Pm = P ** m
            for i in range(len(R)):
                for j in range(i + 1, len(R)):
                    assert not Pm.contains(R[i] - R[j])

    def test_residue_field_split(self):
        P11 = primes_above(K5, 11)[0][0]
        rf = residue_field(P11)
        assert rf.fq.q == 11
        r = rf.reduce(K5.omega())
        assert (r * r - r - 1) % 11 == 0
        # fraction fast path: 1/2 mod 11
        assert rf.reduce(K5.element(Fraction(1, 2), 0)) == 6

    def test_residue_field_inert(self):
        P7 = primes_above(K10, 7)[0][0]
        assert P7.norm() == 49
        rf = residue_field(P7)
        fq = rf.fq
        wbar = rf.reduce(K10.omega())
        assert fq.mul(wbar, wbar) == 3           # 10 mod 7
        rng = random.Random(17)
        for _ in range(30):
            x = K10.element(rng.randint(-9, 9), rng.randint(-9, 9))
            y = K10.element(rng.randint(-9, 9), rng.randint(-9, 9))
            assert rf.reduce(x * y) == fq.mul(rf.reduce(x), rf.reduce(y))
            assert rf.reduce(x + y) == fq.add(rf.reduce(x), rf.reduce(y))
        for c in fq.elements():
            assert rf.reduce(rf.lift(c)) == c

    def test_residue_field_fallback_denominator(self):
        # (omega-8)^2/11 is integral at the prime where omega = 8 and lies
        # in it, even though 11 divides the coordinate denominators
        out = primes_above(K5, 11)
        w = K5.omega()
        for P, _, _ in out:
            rf = residue_field(P)
            r = rf.reduce(w)
            x = (w - K5.element(r, 0)) ** 2 / K5.element(11, 0)
            assert rf.reduce(x) == 0

    def test_rationals(self):
        P3 = primes_above(Q, 3)[0][0]
        rf = residue_field(P3)
        assert rf.reduce(Q.element(7, 0)) == 1
        assert rf.reduce(Q.element(Fraction(1, 2), 0)) == 2
        assert rf.lift(2) == Q.element(2, 0)


def brute_charsum(T, P, m, mu):
    K = P.K
    R = residue_system(P, m)
    n = len(T)
    idx = [(i, j) for i in range(n) for j in range(i, n)]
    total = Cyclotomic.zero()
    for choice in itertools.product(R, repeat=len(idx)):
        W = [[None] * n for _ in range(n)]
        for (i, j), w in zip(idx, choice):
            W[i][j] = W[j][i] = w
        tr = K.zero()
        for i in range(n):
            for j in range(n):
                tr = tr + T[i][j] * W[j][i]
        total = total + e_half((mu * tr).trace())
    return total


class TestCharsum:
    def test_rational_vanishing(self):
        P3 = primes_above(Q, 3)[0][0]
        mu = Q.element(Fraction(1, 3), 0)
        T = [[Q.element(2), Q.element(1)], [Q.element(1), Q.element(2)]]
        val = complete_symmetric_charsum(T, P3, 1, mu)
        assert val == brute_charsum(T, P3, 1, mu)
        assert val == Cyclotomic.zero()

    def test_rational_full(self):
        P3 = primes_above(Q, 3)[0][0]
        mu = Q.element(Fraction(1, 3), 0)
        T = [[Q.element(6), Q.element(3)], [Q.element(3), Q.element(6)]]
        val = complete_symmetric_charsum(T, P3, 1, mu)
        assert val == Cyclotomic.from_rational(27)
        assert val == brute_charsum(T, P3, 1, mu)

    def test_rational_mod_p2(self):
        P3 = primes_above(Q, 3)[0][0]
        mu = Q.element(Fraction(1, 9), 0)
        T1 = [[Q.element(2)]]
        assert complete_symmetric_charsum(T1, P3, 2, mu) == Cyclotomic.zero()
        T2 = [[Q.element(18)]]
        assert complete_symmetric_charsum(T2, P3, 2, mu) == \
            Cyclotomic.from_rational(9)
        T3 = [[Q.element(18), Q.element(9)], [Q.element(9), Q.element(18)]]
        val = complete_symmetric_charsum(T3, P3, 2, mu)
        assert val == Cyclotomic.from_rational(729)
        assert val == brute_charsum(T3, P3, 2, mu)

    def test_inert_quadratic(self):
        P3 = primes_above(K5, 3)[0][0]
        Pd = primes_above(K5, 5)[0][0]        # the different is (sqrt 5)
        mu = pick_with_orders(K5, [(P3, -1), (Pd, -1)])
        w = K5.omega()
        T0 = [[K5.element(2, 0) * w]]
        val0 = complete_symmetric_charsum(T0, P3, 1, mu)
        assert val0 == brute_charsum(T0, P3, 1, mu)
        assert val0 == Cyclotomic.zero()
        T1 = [[K5.element(6, 0)]]
        val1 = complete_symmetric_charsum(T1, P3, 1, mu)
        assert val1 == brute_charsum(T1, P3, 1, mu)
        assert val1 == Cyclotomic.from_rational(9)

    def test_ramified_quadratic(self):
        P5 = primes_above(K10, 5)[0][0]
        P2 = primes_above(K10, 2)[0][0]
        assert different(K10) == P2 ** 3 * P5
        mu = pick_with_orders(K10, [(P5, -2), (P2, -3)])
        w = K10.omega()
        T = [[K10.element(2, 0) * w]]        # 2*omega, omega in P5
        val = complete_symmetric_charsum(T, P5, 1, mu)
        assert val == brute_charsum(T, P5, 1, mu)
        assert val == Cyclotomic.from_rational(5)

    def test_odd_diagonal_rejected(self):
        P3 = primes_above(Q, 3)[0][0]
        with pytest.raises(ValueError):
            complete_symmetric_charsum([[Q.element(1)]], P3, 1,
                                       Q.element(Fraction(1, 3), 0))


class TestStratify:
    def test_bijection(self):
        for q in (3, 5):
            fq = Fq(q, 1)
            r1 = 2
            seen = {}
            for m, pairs in rank_stratify(fq, r1):
                for G, U in pairs:
                    W = stratum_matrix(fq, G, U, r1)
                    key = tuple(map(tuple, W))
                    assert key not in seen
                    seen[key] = m
            allsym = list(symmetric_matrices(fq, r1))
            assert len(seen) == len(allsym)
            for W in allsym:
                key = tuple(map(tuple, W))
                R, pivots = fq_rref(fq, [list(r) for r in W])
                assert seen[key] == len(pivots)

    def test_charsum_identity(self):
        rng = random.Random(19)
        for q in (3, 5):
            fq = Fq(q, 1)
            r1 = 2
            for _ in range(3):
                T1 = [[0] * r1 for _ in range(r1)]
                for i in range(r1):
                    for j in range(i, r1):
                        T1[i][j] = T1[j][i] = rng.randrange(q)
                lhs = Cyclotomic.zero()
                for W in symmetric_matrices(fq, r1):
                    tr = 0
                    for i in range(r1):
                        for j in range(r1):
                            tr = fq.add(tr, fq.mul(T1[i][j], W[j][i]))
                    lhs = lhs + additive_character(fq, tr)
                rhs = Cyclotomic.zero()
                for m, pairs in rank_stratify(fq, r1):
                    for G, U in pairs:
                        # T_Delta = G T1 G^t, paired against U
                        tr = 0
                        for i in range(m):
                            for j in range(m):
                                s = 0
                                for a in range(r1):
                                    for b in range(r1):
                                        s = fq.add(s, fq.mul(
                                            fq.mul(G[i][a], T1[a][b]),
                                            G[j][b]))
                                tr = fq.add(tr, fq.mul(s, U[j][i]))
                        rhs = rhs + additive_character(fq, tr)
                assert lhs == rhs

    def test_invertible_symmetric_counts(self):
        fq = Fq(3, 1)
        us = invertible_symmetric(fq, 2)
        assert all(len(fq_rref(fq, [list(r) for r in U])[1]) == 2 for U in us)
        total = sum(1 for _ in symmetric_matrices(fq, 2))
        assert total == 27
        # rank-2 symmetric 2x2 over F3: 27 - 1 - (rank one count)
        rank1 = sum(1 for W in symmetric_matrices(fq, 2)
                    if len(fq_rref(fq, [list(r) for r in W])[1]) == 1)
        assert len(us) == 27 - 1 - rank1
