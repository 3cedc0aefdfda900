"""Coefficient-side evaluation of the prime operators.

The image of a form under the operators attached to an odd prime ideal P has
Fourier coefficients given by finite weighted sums over lattices commensurable
with the input lattice.  For the first-kind operator the sum runs over the
sublattices Omega with P*Lambda <= Omega <= Lambda, each read off at the class
of Omega with its scaling deepened by P; for the normalised second-kind
operators it runs over all Omega between P*Lambda and P^-1*Lambda, weighted by
the number of totally isotropic subspaces of a residue quadratic space.  The
weights are powers of the residue norm N(P) and of the class-character value
at P, determined purely by the elementary-divisor stratum of Omega relative
to Lambda, so the whole computation happens on canonical lattice keys and
never touches coset representatives.  ``tp_terms`` and ``tj_tilde_terms``
expose the per-lattice breakdown that ``apply_tp`` and ``apply_tj_tilde``
sum up.

Coefficients come from a :class:`CoefficientOracle`, which either wraps a
closed-form rule or a finite table with a declared window; a table refuses
(with :class:`~heckeops.errors.TruncationError`) any key it cannot prove to
be zero, so operator values are either exact or an explicit failure, never
silently wrong.
"""

from fractions import Fraction

from .errors import TruncationError
from .exactmath import Cyclotomic
from .finitequad import alpha_j
from .lattice import (
    _validate_odd_prime,
    canonical_key,
    enumerate_intermediate,
    key_reduced_form,
    residue_space,
)
from .numberfield import ClassCharacter, class_group

__all__ = [
    "CoefficientOracle",
    "ExponentData",
    "HeckeContext",
    "OperatorTerm",
    "apply_tj_tilde",
    "apply_tp",
    "chi_power",
    "exponent_tp",
    "exponents_tj",
    "tj_tilde_terms",
    "tp_terms",
]


class HeckeContext:
    """Base field, degree, weight, odd prime and class character.

    The character defaults to the trivial one on the ideal class group of the
    field.  The degree is the size of the gram matrices involved and the
    weight is the (parallel) weight of the forms whose coefficients are being
    transformed.
    """

    __slots__ = ("K", "n", "k", "P", "chi", "q")

    def __init__(self, K, degree, weight, P, chi=None):
        if degree < 1:
            raise ValueError("degree must be a positive integer")
        if weight < 1:
            raise ValueError("weight must be a positive integer")
        _validate_odd_prime(K, P)
        if chi is None:
            chi = ClassCharacter.trivial(class_group(K))
        if chi.group.K != K:
            raise ValueError("character belongs to a different field")
        self.K = K
        self.n = int(degree)
        self.k = int(weight)
        self.P = P
        self.chi = chi
        self.q = abs(int(P.norm()))

    def __repr__(self):
        return "HeckeContext(n=%d, k=%d, N(P)=%d)" % (self.n, self.k, self.q)


class ExponentData:
    """Stratum invariants and exponents for one lattice term.

    ``r0``, ``m1``, ``r2`` count the elementary-divisor slots where the term
    lattice is locally P times, equal to, and P^-1 times the base lattice;
    ``r1`` is the isotropic-subspace dimension the weight counts (first-kind
    terms leave it as None).  ``E`` is the exponent of N(P) and ``chi_exp``
    the exponent of the character value.  ``vanishes`` marks strata whose
    contribution is empty because the required subspace dimension is
    negative.
    """

    __slots__ = ("r0", "m1", "r1", "r2", "E", "chi_exp", "vanishes")

    def __init__(self, r0, m1, r1, r2, E, chi_exp, vanishes=False):
        self.r0 = r0
        self.m1 = m1
        self.r1 = r1
        self.r2 = r2
        self.E = E
        self.chi_exp = chi_exp
        self.vanishes = vanishes

    def __repr__(self):
        if self.vanishes:
            return ("ExponentData(r0=%d, m1=%d, r2=%d, vanishes)"
                    % (self.r0, self.m1, self.r2))
        return ("ExponentData(r0=%d, m1=%d, r1=%s, r2=%d, E=%d, chi_exp=%d)"
                % (self.r0, self.m1, self.r1, self.r2, self.E, self.chi_exp))


def exponents_tj(ctx, interm, j):
    """Exponents for one term of the j-th normalised second-kind operator.

    ``interm`` only needs the stratum counts (r0, m1, r2); the lattice itself
    is not consulted.  Terms whose stratum forces a negative isotropic
    dimension r1 = m1 - n + j are flagged as vanishing.
    """
    n, k = ctx.n, ctx.k
    if not 1 <= j <= n:
        raise ValueError("j must lie between 1 and the degree")
    r0, m1, r2 = interm.r0, interm.m1, interm.r2
    if r0 + m1 + r2 != n:
        raise ValueError("stratum counts must sum to the degree")
    r1 = m1 - n + j
    if r1 < 0:
        return ExponentData(r0, m1, r1, r2, 0, 0, vanishes=True)
    E = (k * (r2 - r0 + j) + r0 * (r0 + m1 + 1)
         + r1 * (r1 + 1) // 2 - j * (n + 1))
    e = r2 - r0 + j
    assert e == 2 * r2 + r1, "character exponent identity failed"
    return ExponentData(r0, m1, r1, r2, E, e)


def exponent_tp(ctx, interm):
    """Exponents for one sublattice term of the first-kind operator.

    Only lattices inside the base lattice contribute, so strata with r2 > 0
    are rejected.  With r = r0 the multiplicity of P in the index, the norm
    exponent is k(n-r) + r(r+1)/2 - n(n+1)/2 and the character exponent is
    n - r.
    """
    n, k = ctx.n, ctx.k
    r0, m1, r2 = interm.r0, interm.m1, interm.r2
    if r2 != 0:
        raise ValueError("first-kind terms must lie inside the base lattice")
    if r0 + m1 != n:
        raise ValueError("stratum counts must sum to the degree")
    r = r0
    E = k * (n - r) + r * (r + 1) // 2 - n * (n + 1) // 2
    return ExponentData(r0, m1, None, 0, E, n - r)


def chi_power(chi, P, e):
    """chi(P)^e as an exact cyclotomic number (e a nonnegative integer)."""
    if e < 0:
        raise ValueError("character exponents are nonnegative")
    out = Cyclotomic.one()
    if e == 0:
        return out
    v = chi(P)
    for _ in range(e):
        out = out * v
    return out


class CoefficientOracle:
    """Fourier coefficients of a fixed form, addressed by canonical keys.

    ``from_function`` wraps a rule valid on every key.  ``from_table`` wraps
    a finite dictionary together with a diagonal bound: keys absent from the
    table whose reduced diagonal stays within the bound are zero, keys beyond
    it raise :class:`TruncationError` since the table cannot decide them.
    """

    __slots__ = ("_table", "_bound", "_func")

    def __init__(self, table=None, bound=None, func=None):
        self._table = table
        self._bound = bound
        self._func = func

    @classmethod
    def from_table(cls, entries, bound):
        return cls(table=dict(entries), bound=Fraction(bound))

    @classmethod
    def from_function(cls, func):
        return cls(func=func)

    def value(self, key):
        if self._func is not None:
            return self._func(key)
        if key in self._table:
            return self._table[key]
        _, _, _, _, rows = key_reduced_form(key)
        top = max((rows[i][i] for i in range(len(rows))),
                  default=Fraction(0))
        if top > self._bound:
            raise TruncationError("coefficient key lies beyond the declared "
                                  "window")
        return Fraction(0)


class OperatorTerm:
    """One lattice term of an operator sum.

    ``exponents`` is the :class:`ExponentData` of the stratum, ``alpha`` the
    isotropic-subspace count (1 for first-kind terms), ``key`` the canonical
    key the oracle was read at, ``value`` the oracle value, and ``term`` the
    fully weighted contribution N(P)^E * chi(P)^e * alpha * value.
    """

    __slots__ = ("exponents", "alpha", "key", "value", "term")

    def __init__(self, exponents, alpha, key, value, term):
        self.exponents = exponents
        self.alpha = alpha
        self.key = key
        self.value = value
        self.term = term

    def __repr__(self):
        return "OperatorTerm(%r, alpha=%d, term=%r)" % (
            self.exponents, self.alpha, self.term)


def _check_lattice(ctx, lam):
    if lam.K != ctx.K:
        raise ValueError("lattice belongs to a different field")
    if lam.n != ctx.n:
        raise ValueError("lattice rank differs from the context degree")


def _weighted(ctx, data, alpha, value):
    chi_val = chi_power(ctx.chi, ctx.P, data.chi_exp)
    npow = Fraction(ctx.q) ** data.E * alpha
    if isinstance(value, Cyclotomic):
        return (chi_val * value).scale(npow)
    return chi_val.scale(Fraction(value) * npow)


def _total(terms):
    total = Cyclotomic.zero()
    for t in terms:
        total = total + t.term
    if total.is_rational():
        return total.to_rational()
    return total


def tp_terms(ctx, oracle, lam):
    """Per-sublattice terms of the first-kind operator at the class of lam.

    Each sublattice Omega with P*lam <= Omega <= lam contributes the oracle
    value at the class of Omega with scaling deepened by P, weighted by
    N(P)^E and the character power of its stratum.
    """
    _check_lattice(ctx, lam)
    Pinv = ctx.P.inverse()
    out = []
    for it in enumerate_intermediate(lam, ctx.P):
        if it.r2 != 0:
            continue
        data = exponent_tp(ctx, it)
        om = it.omega
        key = canonical_key(om.with_scaling(om.scaling * Pinv))
        value = oracle.value(key)
        out.append(OperatorTerm(data, 1, key, value,
                                _weighted(ctx, data, 1, value)))
    return out


def apply_tp(ctx, oracle, lam):
    """Coefficient of the first-kind operator image at the class of lam."""
    return _total(tp_terms(ctx, oracle, lam))


def tj_tilde_terms(ctx, oracle, lam, j):
    """Per-lattice terms of the j-th normalised second-kind operator.

    Lattices Omega between P*lam and P^-1*lam contribute the oracle value at
    the class of Omega (same scaling as lam), weighted by N(P)^E, the
    character power, and the number of totally isotropic r1-subspaces of the
    residue space (lam meet Omega) / P(lam + Omega).  Strata with r1 < 0 are
    skipped since they carry no subspaces.
    """
    _check_lattice(ctx, lam)
    if not 1 <= j <= ctx.n:
        raise ValueError("j must lie between 1 and the degree")
    out = []
    for it in enumerate_intermediate(lam, ctx.P):
        data = exponents_tj(ctx, it, j)
        if data.vanishes:
            continue
        space = residue_space(lam, it.omega, ctx.P)
        alpha = alpha_j(space, data.r1)
        key = canonical_key(it.omega)
        value = oracle.value(key)
        out.append(OperatorTerm(data, alpha, key, value,
                                _weighted(ctx, data, alpha, value)))
    return out


def apply_tj_tilde(ctx, oracle, lam, j):
    """Coefficient of the j-th normalised second-kind operator image."""
    return _total(tj_tilde_terms(ctx, oracle, lam, j))
