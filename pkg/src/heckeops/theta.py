"""Representation-number oracles for theta series of even integral lattices.

A degree-``n`` theta series of a positive definite even lattice ``(L, G)``
has one Fourier coefficient per even symmetric matrix ``T``: the number of
``n``-tuples of lattice vectors whose Gram matrix equals ``T``.  The oracles
here compute those counts by exhaustive vector enumeration, with no recourse
to orbit shortcuts, which makes them slow but trustworthy reference inputs
for operator calculations.

Counts are exact despite the floating point under the hood: candidate
vectors are collected from interval bounds padded outward (a superset), then
kept only if their exact integer norm matches, and the blocked float32
inner-product tables stay below 2**24 in absolute value, where float32
arithmetic on integers is still exact.  Enumeration is lazy and memoised, so
a high ``max_norm`` only costs time for the shells actually requested.
"""

from fractions import Fraction
from math import isqrt

import numpy as np

from .errors import TruncationError
from .exactmath import mat_det
from .lattice import key_reduced_form

__all__ = ["E8_GRAM", "ThetaOracle"]


# Gram matrix of the E8 root lattice in a root basis (diag 2, -1 on the
# edges of the Dynkin diagram).  Even, unimodular, positive definite.
_E8_EDGES = ((0, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (1, 3))

E8_GRAM = tuple(
    tuple(2 if i == j else (-1 if (i, j) in _E8_EDGES or (j, i) in _E8_EDGES
                            else 0)
          for j in range(8))
    for i in range(8)
)

# keep blocked product sizes near 2**26 entries (~256 MiB of float32)
_CHUNK_ENTRIES = 1 << 26

# absolute slack added to interval bounds before rounding; float64 error on
# the modest magnitudes seen here is orders of magnitude smaller, so padded
# intervals always contain every exact solution
_PAD = 1e-6


class ThetaOracle:
    """Exact Fourier coefficients of one theta series, up to a norm cap.

    Parameters
    ----------
    gram:
        Gram matrix of a positive definite even integral lattice over Z
        (integer entries, even diagonal).
    degree:
        Degree of the series; coefficients are indexed by canonical keys
        of that degree (rank up to the degree; at most 2 is supported).
    max_norm:
        Largest reduced diagonal entry the oracle will resolve.  Keys in
        the even-integral support beyond the cap raise
        :class:`TruncationError`; keys outside the support return 0
        regardless of the cap, since support membership is decided before
        the window is consulted.
    """

    def __init__(self, gram, degree, max_norm):
        m = len(gram)
        rows = [[Fraction(e) for e in row] for row in gram]
        for i in range(m):
            if len(rows[i]) != m:
                raise ValueError("gram matrix must be square")
            if rows[i][i].denominator != 1 or rows[i][i] % 2 != 0:
                raise ValueError("gram diagonal must be even integers")
            for j in range(m):
                if rows[i][j] != rows[j][i]:
                    raise ValueError("gram matrix must be symmetric")
                if rows[i][j].denominator != 1:
                    raise ValueError("gram entries must be integers")
        for k in range(1, m + 1):
            if mat_det([row[:k] for row in rows[:k]]) <= 0:
                raise ValueError("gram matrix must be positive definite")
        if degree < 1:
            raise ValueError("degree must be at least 1")
        if max_norm < 0:
            raise ValueError("max_norm must be nonnegative")
        self.gram = tuple(tuple(int(e) for e in row) for row in rows)
        self.rank = m
        self.degree = int(degree)
        self.max_norm = int(max_norm)
        self._covered = -1       # largest bound swept so far
        self._shells = {}        # even norm <= covered -> integer array
        self._hists = {}         # (a, c) with a <= c -> int64 histogram
        self._gram_f32 = np.array(self.gram, dtype=np.float32)

    # -- enumeration --------------------------------------------------------

    def shell(self, norm):
        """All lattice vectors of the given even norm, as an integer array."""
        if norm < 0 or norm % 2 != 0:
            return np.empty((0, self.rank), dtype=np.int16)
        if norm > self.max_norm:
            raise TruncationError(
                f"norm {norm} beyond oracle cap {self.max_norm}")
        if norm > self._covered:
            self._shells = self._sweep(norm)
            self._covered = norm
        return self._shells.get(
            norm, np.empty((0, self.rank), dtype=np.int16))

    def _sweep(self, bound):
        """All vectors with norm <= bound, bucketed by exact even norm.

        Coordinates are fixed one at a time; with the pivoted decomposition
        x^t G x = sum_i d_i (x_i + sum_{j<i} l_ij x_j)^2 each new coordinate
        ranges over an interval known from the ones already fixed.  Interval
        ends are padded outward so float64 rounding can only add candidates,
        never lose solutions; the exact integer filter at the end removes
        the excess.
        """
        d, lmat = _ldlt_float(self.gram)
        m = self.rank
        X = np.zeros((1, 0), dtype=np.int32)
        S = np.zeros(1, dtype=np.float64)
        for i in range(m):
            if i:
                s = X.astype(np.float64) @ lmat[i][:i]
            else:
                s = np.zeros(len(X))
            rem = np.maximum(bound + _PAD - S, 0.0)
            radius = np.sqrt(rem / d[i]) + _PAD
            lo = np.ceil(-s - radius).astype(np.int64)
            hi = np.floor(-s + radius).astype(np.int64)
            counts = np.maximum(hi - lo + 1, 0)
            total = int(counts.sum())
            idx = np.repeat(np.arange(len(X)), counts)
            starts = np.concatenate(([0], np.cumsum(counts)))[:-1]
            xi = lo[idx] + (np.arange(total) - starts[idx])
            X = np.column_stack([X[idx], xi.astype(np.int32)])
            S = S[idx] + d[i] * (xi + s[idx]) ** 2
            keep = S <= bound + _PAD
            X = X[keep]
            S = S[keep]
        G = np.array(self.gram, dtype=np.int64)
        norms = np.einsum("ij,jk,ik->i", X.astype(np.int64), G,
                          X.astype(np.int64))
        shells = {}
        for q in range(0, bound + 1, 2):
            sel = X[norms == q]
            if sel.size and max(abs(int(sel.min())),
                                abs(int(sel.max()))) < 2 ** 15:
                sel = sel.astype(np.int16)
            shells[q] = sel
        return shells

    # -- pair tables --------------------------------------------------------

    def _pair_hist(self, a, c):
        """Histogram of inner products over shell(a) x shell(c).

        Entry ``off + b`` counts ordered pairs with x^t G y == b, where
        ``off = isqrt(a c)`` bounds |b| by Cauchy-Schwarz.
        """
        if a > c:
            return self._pair_hist(c, a)
        if (a, c) not in self._hists:
            X = self.shell(a)
            Y = self.shell(c)
            off = isqrt(a * c)
            hist = np.zeros(2 * off + 1, dtype=np.int64)
            if len(X) and len(Y):
                XG = X.astype(np.float32) @ self._gram_f32
                Yf = Y.astype(np.float32)
                step = max(1, _CHUNK_ENTRIES // len(Y))
                for lo in range(0, len(X), step):
                    block = XG[lo:lo + step] @ Yf.T
                    vals = np.rint(block).astype(np.int64).ravel() + off
                    hist += np.bincount(vals, minlength=2 * off + 1)
            self._hists[(a, c)] = hist
        return self._hists[(a, c)]

    # -- coefficients -------------------------------------------------------

    def coefficient(self, key):
        """Exact coefficient at a canonical key, as a Python int.

        Keys outside the even-integral support return 0.  Keys inside the
        support whose reduced diagonal exceeds ``max_norm`` raise
        :class:`TruncationError`.
        """
        tag, _, n, r, rows = key_reduced_form(key)
        if tag != "Q":
            raise ValueError("theta oracles index coefficients over Q only")
        if n != self.degree:
            raise ValueError(
                f"key has degree {n}, oracle has degree {self.degree}")
        if r == 0:
            return 1
        for i in range(r):
            e = rows[i][i]
            if e.denominator != 1 or e % 2 != 0:
                return 0
            for j in range(r):
                if rows[i][j].denominator != 1:
                    return 0
        diag = [int(rows[i][i]) for i in range(r)]
        if max(diag) > self.max_norm:
            raise TruncationError(
                f"reduced diagonal {max(diag)} beyond cap {self.max_norm}")
        if r == 1:
            return int(len(self.shell(diag[0])))
        if r == 2:
            a, c = diag
            b = int(rows[0][1])
            if a > c:
                a, c = c, a
            off = isqrt(a * c)
            if abs(b) > off:
                return 0
            return int(self._pair_hist(a, c)[off + b])
        raise ValueError("only degrees 1 and 2 are supported")

    def coefficient_at(self, rows):
        """Coefficient at an explicit symmetric matrix over Q."""
        from .lattice import PseudoLattice, canonical_key
        from .numberfield import FieldSpec
        Q = FieldSpec.rationals()
        grid = [[Fraction(e) for e in row] for row in rows]
        return self.coefficient(canonical_key(PseudoLattice.free(Q, grid)))


def _ldlt_float(gram):
    """Pivots d and multiplier rows l with x^t G x = sum d_i (x_i + s_i)^2,
    where s_i = sum_{j<i} l[i][j] x_j, in float64."""
    m = len(gram)
    a = np.array(gram, dtype=np.float64)
    d = np.zeros(m)
    l = [np.zeros(i) for i in range(m)]
    for i in range(m - 1, -1, -1):
        d[i] = a[i, i]
        if d[i] <= 0:
            raise ValueError("matrix is not positive definite")
        l[i] = a[i, :i] / d[i]
        a[:i, :i] -= d[i] * np.outer(l[i], l[i])
    return d, l
