"""Command-line entry point: JSON-emitting subcommands and verify suites.

Exit codes: 0 success, 1 a verification suite reported failures, 2 invalid
input (bad arguments, malformed JSON, domain validation errors), 3 an
enumeration exceeded its budget cap (raise it via --budget or the
HECKE_LATTICE_BUDGET environment variable).

All exact values are serialized as strings ("22/7", "2 + 1*z3^1") and object
keys are emitted sorted, so outputs are stable golden files.  File formats:
a lattice is {"field": d, "n": n, "coeff_ideals": [ideal...], "gram":
[[{"a": .., "b": ..}...]], "scaling": ideal, "orientation": 1} with ideals
as {"basis": [[rational strings]]}; a character file is {"values":
[rational strings]} listing one value per ideal class; an oracle file is
{"bound": rational string, "entries": [{"lattice": {...}, "value": "..."}]}.
"""

import argparse
import itertools
import json
import os
import random
import sys
from fractions import Fraction

from .coset import (
    FourierSeries,
    GroupData,
    complete_coprime_pair,
    coset_count,
    delta_matrix,
    direct_apply,
    gen_reps_tj,
    gen_reps_tp,
    is_member,
    random_member,
    reps_equivalent,
)
from .errors import BudgetError, TruncationError
from .exactmath import Cyclotomic
from .finitequad import (
    Fq,
    QuadSpaceFq,
    additive_character,
    count_isotropic,
    count_isotropic_brute,
    fq_rref,
    rank_stratify,
    stratum_matrix,
    symmetric_matrices,
)
from .hecke import CoefficientOracle, HeckeContext, tj_tilde_terms, tp_terms
from .lattice import (
    PseudoLattice,
    canonical_key,
    enumerate_intermediate,
    key_reduced_form,
    lattice_from_json,
    lattice_to_json,
)
from .numberfield import (
    ClassCharacter,
    FieldSpec,
    FracIdeal,
    class_group,
    different,
    ideal_to_json,
    primes_above,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_VALIDATION = 2
EXIT_BUDGET = 3


class JobConfig:
    """Validated run configuration shared by the subcommand handlers."""

    __slots__ = ("command", "d", "p", "degree", "weight", "j", "chi_file",
                 "lattice_file", "oracle_file", "budget", "out")

    def __init__(self, command, d=1, p=None, degree=None, weight=None,
                 j=None, chi_file=None, lattice_file=None, oracle_file=None,
                 budget=None, out=None):
        if budget is not None:
            if budget <= 0:
                raise ValueError("budget caps must be positive")
            os.environ["HECKE_LATTICE_BUDGET"] = str(budget)
        if p is not None:
            if p < 3 or p % 2 == 0 or any(p % f == 0
                                          for f in range(3, p, 2)
                                          if f * f <= p):
                raise ValueError("p must be an odd rational prime")
        for path in (chi_file, lattice_file, oracle_file):
            if path is not None and not os.path.exists(path):
                raise ValueError("referenced file does not exist: %s" % path)
        self.command = command
        self.d = d
        self.p = p
        self.degree = degree
        self.weight = weight
        self.j = j
        self.chi_file = chi_file
        self.lattice_file = lattice_file
        self.oracle_file = oracle_file
        self.budget = budget
        self.out = out


def _field(d):
    d = int(d)
    return FieldSpec.rationals() if d == 1 else FieldSpec.quadratic(d)


def _load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValueError("%s:%d:%d: %s"
                         % (path, exc.lineno, exc.colno, exc.msg))


def _exact_str(x):
    if isinstance(x, Cyclotomic):
        if x.is_rational():
            return str(x.to_rational())
        parts = []
        for e in sorted(x.coeffs):
            c = x.coeffs[e]
            if e == 0:
                parts.append(str(c))
            else:
                parts.append("%s*z%d^%d" % (c, x.m, e))
        return " + ".join(parts)
    return str(x)


def _emit(payload, out):
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _prime_ideal(K, p, index=0):
    facs = primes_above(K, p)
    if not 0 <= index < len(facs):
        raise ValueError("prime index %d out of range (%d primes above %d)"
                         % (index, len(facs), p))
    return facs[index][0]


# ---------------------------------------------------------------------------
# plain subcommands
# ---------------------------------------------------------------------------

def _cmd_field(args):
    cfg = JobConfig("field", d=args.d, p=args.p, out=args.out)
    K = _field(cfg.d)
    payload = {
        "d": K.d,
        "degree": K.deg,
        "disc": K.disc,
        "different": ideal_to_json(different(K)),
    }
    if cfg.p is not None:
        facs = primes_above(K, cfg.p)
        payload["factorization"] = [
            {"ideal": ideal_to_json(P), "e": e, "f": f,
             "norm": str(P.norm())}
            for P, e, f in facs]
        prod = FracIdeal.ring_of_integers(K)
        for P, e, _ in facs:
            for _ in range(e):
                prod = prod * P
        pO = FracIdeal.principal(K.element(cfg.p))
        payload["product_is_pO"] = prod == pO
    return payload


def _cmd_classgroup(args):
    cfg = JobConfig("classgroup", d=args.d, out=args.out)
    K = _field(cfg.d)
    return {"h": class_group(K).h}


def _cmd_quadspace_count(args):
    JobConfig("quadspace", out=args.out)
    gram = json.loads(args.gram)
    fq = Fq(int(args.q))
    space = QuadSpaceFq(fq, gram)
    ell = int(args.l)
    return {
        "l": ell,
        "closed_form": count_isotropic(space, ell),
        "brute_force": count_isotropic_brute(space, ell),
    }


def _cmd_lattice_key(args):
    cfg = JobConfig("lattice", lattice_file=args.lattice, out=args.out)
    lat = lattice_from_json(_load_json(cfg.lattice_file))
    key = canonical_key(lat, oriented=bool(args.oriented))
    return {"key": repr(key), "oriented": bool(args.oriented)}


def _cmd_lattice_roundtrip(args):
    cfg = JobConfig("lattice", lattice_file=args.lattice, out=args.out)
    return lattice_to_json(lattice_from_json(_load_json(cfg.lattice_file)))


def _load_character(K, path):
    if path is None:
        return None
    data = _load_json(path)
    values = [Cyclotomic.from_rational(Fraction(s)) for s in data["values"]]
    return ClassCharacter(class_group(K), values)


def _load_oracle(K, path):
    data = _load_json(path)
    table = {}
    for entry in data["entries"]:
        lat = lattice_from_json(entry["lattice"])
        if lat.K != K:
            raise ValueError("oracle entry over the wrong field")
        table[canonical_key(lat)] = Fraction(entry["value"])
    return CoefficientOracle.from_table(table, Fraction(data["bound"]))


def _cmd_hecke_apply(args):
    cfg = JobConfig("hecke", p=args.p, weight=args.k, j=args.j,
                    chi_file=args.chi, lattice_file=args.lattice,
                    oracle_file=args.oracle, budget=args.budget,
                    out=args.out)
    lat = lattice_from_json(_load_json(cfg.lattice_file))
    K = lat.K
    P = _prime_ideal(K, cfg.p, args.prime_index)
    chi = _load_character(K, cfg.chi_file)
    oracle = _load_oracle(K, cfg.oracle_file)
    ctx = HeckeContext(K, lat.n, cfg.weight, P, chi=chi)
    if args.op == "tp":
        terms = tp_terms(ctx, oracle, lat)
    else:
        if cfg.j is None:
            raise ValueError("--j is required for the second-kind operator")
        terms = tj_tilde_terms(ctx, oracle, lat, cfg.j)
    total = Cyclotomic.zero()
    for t in terms:
        total = total + t.term
    if total.is_rational():
        total = total.to_rational()
    return {
        "coefficient": _exact_str(total),
        "terms": [
            {"r0": t.exponents.r0, "m1": t.exponents.m1,
             "r1": t.exponents.r1, "r2": t.exponents.r2,
             "E": t.exponents.E, "chi_exp": t.exponents.chi_exp,
             "alpha": t.alpha, "key": repr(t.key),
             "value": _exact_str(t.value), "term": _exact_str(t.term)}
            for t in terms],
    }


def _cmd_coset_gen(args):
    cfg = JobConfig("coset", d=args.d, p=args.p, degree=args.n, j=args.j,
                    out=args.out)
    K = _field(cfg.d)
    G = GroupData.trivial(K, cfg.degree)
    P = _prime_ideal(K, cfg.p, args.prime_index)
    if args.op == "tp":
        reps = gen_reps_tp(G, P)
    else:
        if cfg.j is None:
            raise ValueError("--j is required for the second-kind operator")
        reps = gen_reps_tj(G, P, cfg.j)
    out = []
    for rep in reps:
        entry = {"stratum": rep.stratum if isinstance(rep.stratum, int)
                 else list(rep.stratum)}
        if rep.matrix is not None:
            rows = rep.matrix.to_fraction_rows()
            entry["matrix"] = [[str(x) for x in row] for row in rows]
        if rep.data is not None:
            entry["data"] = rep.data
        out.append(entry)
    return {"count": len(out), "n": cfg.degree, "op": args.op,
            "p": cfg.p, "reps": out}


def _cmd_coset_verify(args):
    cfg = JobConfig("coset", d=1, p=args.p, degree=args.n, j=args.j,
                    out=args.out)
    K = _field(1)
    n, p = cfg.degree, cfg.p
    G = GroupData.trivial(K, n)
    P = _prime_ideal(K, p)
    checks = []

    reps = gen_reps_tp(G, P)
    expected = coset_count("tp", n, p)
    checks.append({"name": "tp-cardinality", "ok": len(reps) == expected,
                   "detail": "%d reps, formula %d" % (len(reps), expected)})
    delta = delta_matrix(G, P, "tp")
    distinct = True
    for a, b in itertools.combinations(reps, 2):
        if reps_equivalent(a.matrix, b.matrix, G, delta):
            distinct = False
            break
    checks.append({"name": "tp-inequivalence", "ok": distinct,
                   "detail": "%d pairs" % (len(reps) * (len(reps) - 1) // 2)})

    js = [cfg.j] if cfg.j else list(range(1, n + 1))
    for j in js:
        reps = gen_reps_tj(G, P, j)
        expected = coset_count("tj", n, p, j=j)
        checks.append({"name": "tj%d-cardinality" % j,
                       "ok": len(reps) == expected,
                       "detail": "%d reps, formula %d"
                                 % (len(reps), expected)})
        delta = delta_matrix(G, P, "tj", j=j)
        distinct = True
        for a, b in itertools.combinations(reps, 2):
            if reps_equivalent(a.matrix, b.matrix, G, delta):
                distinct = False
                break
        checks.append({"name": "tj%d-inequivalence" % j, "ok": distinct,
                       "detail": "%d pairs"
                                 % (len(reps) * (len(reps) - 1) // 2)})
    return {"checks": checks, "ok": all(c["ok"] for c in checks)}


# ---------------------------------------------------------------------------
# the bundled verification suites
# ---------------------------------------------------------------------------

def _check_counting_grid(quick):
    """Closed-form isotropic counts against exhaustive enumeration."""
    grids = [(3, 1), (3, 2), (5, 1), (5, 2)]
    grids += [(3, 3)] if quick else [(3, 3), (5, 3)]
    total = 0
    for q, dim in grids:
        fq = Fq(q)
        for gram in symmetric_matrices(fq, dim):
            space = QuadSpaceFq(fq, gram)
            for ell in range(dim + 1):
                if count_isotropic(space, ell) != \
                        count_isotropic_brute(space, ell):
                    return False, "mismatch at q=%d %r l=%d" % (q, gram, ell)
                total += 1
    return True, "%d grid points" % total


def _check_stratification(quick):
    """Rank stratification is bijective and preserves character sums."""
    sizes = [(3, 1), (3, 2), (5, 1)] if quick else [
        (3, 1), (3, 2), (3, 3), (5, 1), (5, 2)]
    for q, r1 in sizes:
        fq = Fq(q)
        seen = {}
        for m, pairs in rank_stratify(fq, r1):
            for G, U in pairs:
                W = tuple(map(tuple, stratum_matrix(fq, G, U, r1)))
                if W in seen:
                    return False, "collision at q=%d r1=%d" % (q, r1)
                seen[W] = m
        allsym = list(symmetric_matrices(fq, r1))
        if len(seen) != len(allsym):
            return False, "not surjective at q=%d r1=%d" % (q, r1)
        for W in allsym:
            _, pivots = fq_rref(fq, [list(r) for r in W])
            if seen[tuple(map(tuple, W))] != len(pivots):
                return False, "rank mismatch at q=%d r1=%d" % (q, r1)
        # both character sums, swept over every T1
        for T1 in symmetric_matrices(fq, r1):
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
                    tr = 0
                    for i in range(m):
                        for j in range(m):
                            s = 0
                            for a in range(r1):
                                for b in range(r1):
                                    s = fq.add(s, fq.mul(
                                        fq.mul(G[i][a], T1[a][b]), G[j][b]))
                            tr = fq.add(tr, fq.mul(s, U[j][i]))
                    rhs = rhs + additive_character(fq, tr)
            if lhs != rhs:
                return False, "character sums differ at q=%d r1=%d" % (q, r1)
    return True, "%d strata grids" % len(sizes)


def _check_coset_inequivalence(quick):
    """Coset counts match the closed formula and reps are inequivalent."""
    K = FieldSpec.rationals()
    shapes = [(1, 3), (1, 5)] if quick else [(1, 3), (1, 5), (2, 3)]
    for n, p in shapes:
        G = GroupData.trivial(K, n)
        P = _prime_ideal(K, p)
        reps = gen_reps_tp(G, P)
        if len(reps) != coset_count("tp", n, p):
            return False, "count mismatch at (%d,%d)" % (n, p)
        delta = delta_matrix(G, P, "tp")
        for a, b in itertools.combinations(reps, 2):
            if reps_equivalent(a.matrix, b.matrix, G, delta):
                return False, "equivalent pair at (%d,%d)" % (n, p)
    return True, "%d shapes" % len(shapes)


def _check_completion(quick):
    """Random symmetric coprime pairs complete to group members."""
    K = FieldSpec.rationals()
    rng = random.Random(17)
    rounds = 25 if quick else 150
    done = 0
    for n in (1, 2):
        G = GroupData.trivial(K, n)
        for _ in range(rounds):
            M = random_member(G, rng, length=6)
            rows = M.to_fraction_rows()
            C = [row[:n] for row in rows[n:]]
            D = [row[n:] for row in rows[n:]]
            res = complete_coprime_pair(C, D, G)
            if not is_member(res.matrix, G):
                return False, "completion failed at n=%d" % n
            done += 1
    return True, "%d pairs" % done


def _sigma3(m):
    return sum(d ** 3 for d in range(1, m + 1) if m % d == 0)


def _sigma3_key_value(key):
    _, _, n, r, rows = key_reduced_form(key)
    if r == 0:
        return Fraction(1, 240)
    x = rows[0][0]
    if x.denominator != 1 or int(x) % 2:
        return Fraction(0)
    return Fraction(_sigma3(int(x) // 2))


def _check_operator_agreement(quick):
    """Lattice-sum operator values against the coset-sum route."""
    K = FieldSpec.rationals()
    primes = (3,) if quick else (3, 5)
    bound = 8
    oracle = CoefficientOracle.from_function(_sigma3_key_value)
    for p in primes:
        P = _prime_ideal(K, p)
        ctx = HeckeContext(K, 1, 4, P)
        series = FourierSeries.from_function(
            K, 1, 2 * bound * p * p,
            lambda rows: _sigma3_key_value(
                canonical_key(PseudoLattice.free(K, rows)))
            if any(rows[0]) else Fraction(1, 240))
        img_tp = direct_apply(series, "tp", p, 4, window=2 * bound)
        img_tj = direct_apply(series, "tj_tilde", p, 4, j=1,
                              window=2 * bound)
        for m in range(1, bound + 1):
            lam = PseudoLattice.free(K, [[2 * m]])
            want = (1 + p ** 3) * _sigma3(m)
            got_sum = sum((t.term for t in tp_terms(ctx, oracle, lam)),
                          Cyclotomic.zero()).to_rational()
            got_direct = img_tp.coefficient([[2 * m]])
            if not got_sum == got_direct == want:
                return False, "first-kind mismatch at p=%d m=%d" % (p, m)
            tj_sum = sum((t.term
                          for t in tj_tilde_terms(ctx, oracle, lam, 1)),
                         Cyclotomic.zero()).to_rational()
            tj_direct = img_tj.coefficient([[2 * m]])
            if tj_sum != tj_direct:
                return False, "second-kind mismatch at p=%d m=%d" % (p, m)
    return True, "%d primes, %d coefficients" % (len(primes), bound)


def _random_unimodular(n, rng, steps=6):
    rows = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    for _ in range(steps):
        i, j = rng.randrange(n), rng.randrange(n)
        if i == j:
            continue
        kind = rng.randrange(3)
        if kind == 0:
            c = rng.choice([-2, -1, 1, 2])
            for t in range(n):
                rows[i][t] += c * rows[j][t]
        elif kind == 1:
            rows[i], rows[j] = rows[j], rows[i]
        else:
            rows[i] = [-x for x in rows[i]]
    return rows


def _unimodular_change(L, U):
    K = L.K
    n = L.n
    Ue = [[K.element(U[i][j]) for j in range(n)] for i in range(n)]
    gram = [[sum((Ue[a][i] * L.gram[a][b] * Ue[b][j]
                  for a in range(n) for b in range(n)), K.zero())
             for j in range(n)] for i in range(n)]
    basis = [[sum((L.basis[i][a] * Ue[a][j] for a in range(n)), K.zero())
              for j in range(n)] for i in range(n)]
    return PseudoLattice(K, L.coeff_ideals, gram, scaling=L.scaling,
                         basis=basis, orientation=L.orientation)


def _check_presentation_coherence(quick):
    """Canonical keys and operator values survive re-presentation."""
    rng = random.Random(11)
    K = FieldSpec.rationals()
    P3 = _prime_ideal(K, 3)
    ctx = HeckeContext(K, 2, 4, P3)
    oracle = CoefficientOracle.from_function(
        lambda key: Fraction(1 + sum(e * e for e in key.data[5]) % 97))
    base = PseudoLattice.free(K, [[2, 1], [1, 4]])
    other = PseudoLattice.free(K, [[2, 0], [0, 4]])
    key0 = canonical_key(base)
    if canonical_key(other) == key0:
        return False, "distinct classes collided"
    val0 = sum((t.term for t in tp_terms(ctx, oracle, base)),
               Cyclotomic.zero())
    rounds = 10 if quick else 30
    for _ in range(rounds):
        U = _random_unimodular(2, rng)
        moved = _unimodular_change(base, U)
        if canonical_key(moved) != key0:
            return False, "key changed under basis change"
        val = sum((t.term for t in tp_terms(ctx, oracle, moved)),
                  Cyclotomic.zero())
        if val != val0:
            return False, "operator value changed under basis change"
    return True, "%d presentations" % rounds


def _check_numberfield_identities(quick):
    """Inverse ideals, norm multiplicativity, prime factorizations, h."""
    top = 20 if quick else 50
    for d in (5, 10):
        K = FieldSpec.quadratic(d)
        O = FracIdeal.ring_of_integers(K)
        for p in range(2, top + 1):
            if any(p % f == 0 for f in range(2, p)):
                continue
            prod = O
            nprod = Fraction(1)
            for P, e, _ in primes_above(K, p):
                if P * P.inverse() != O:
                    return False, "inverse failed at %d in Q(sqrt %d)" \
                        % (p, d)
                for _ in range(e):
                    prod = prod * P
                    nprod *= P.norm()
            if prod != FracIdeal.principal(K.element(p)):
                return False, "factorization failed at %d in Q(sqrt %d)" \
                    % (p, d)
            if nprod != Fraction(p) ** K.deg:
                return False, "norms failed at %d in Q(sqrt %d)" % (p, d)
    if class_group(FieldSpec.quadratic(5)).h != 1:
        return False, "h(Q(sqrt 5)) != 1"
    if class_group(FieldSpec.quadratic(10)).h != 2:
        return False, "h(Q(sqrt 10)) != 2"
    return True, "primes up to %d over 2 fields" % top


def _check_exponent_coherence(quick):
    """Stratum counts partition the degree; character exponents agree."""
    from .hecke import exponents_tj
    K = FieldSpec.rationals()
    checked = 0
    for n, gram in ((1, [[2]]), (2, [[2, 0], [0, 2]])):
        P = _prime_ideal(K, 3)
        ctx = HeckeContext(K, n, 4, P)
        lam = PseudoLattice.free(K, gram)
        for it in enumerate_intermediate(lam, P):
            if it.r0 + it.m1 + it.r2 != n:
                return False, "stratum does not partition the degree"
            for j in range(1, n + 1):
                data = exponents_tj(ctx, it, j)
                if data.vanishes:
                    continue
                if data.chi_exp != 2 * data.r2 + data.r1:
                    return False, "character exponent mismatch"
                if data.chi_exp != data.r2 - data.r0 + j:
                    return False, "character exponent identity failed"
                checked += 1
    return True, "%d exponent tuples" % checked


_VERIFY_CHECKS = [
    ("counting-grid", _check_counting_grid),
    ("stratification-charsum", _check_stratification),
    ("coset-inequivalence", _check_coset_inequivalence),
    ("pair-completion", _check_completion),
    ("operator-agreement", _check_operator_agreement),
    ("presentation-coherence", _check_presentation_coherence),
    ("numberfield-identities", _check_numberfield_identities),
    ("exponent-coherence", _check_exponent_coherence),
]


def _cmd_verify(args):
    JobConfig("verify", budget=args.budget, out=args.out)
    quick = bool(args.quick)
    checks = []
    for name, fn in _VERIFY_CHECKS:
        ok, detail = fn(quick)
        checks.append({"name": name, "ok": ok, "detail": detail})
    return {"checks": checks, "mode": "quick" if quick else "full",
            "ok": all(c["ok"] for c in checks)}


# ---------------------------------------------------------------------------
# parser and dispatch
# ---------------------------------------------------------------------------

def _build_parser():
    parser = argparse.ArgumentParser(
        prog="heckeops",
        description="Exact operator sums on coefficients of forms indexed "
                    "by even integral lattices")
    sub = parser.add_subparsers(dest="command", required=True)

    p_field = sub.add_parser("field", help="field invariants and prime "
                                           "factorizations")
    p_field.add_argument("--d", type=int, default=1)
    p_field.add_argument("--p", type=int, default=None)
    p_field.add_argument("--out", default=None)
    p_field.set_defaults(handler=_cmd_field)

    p_cg = sub.add_parser("classgroup", help="ideal class number")
    p_cg.add_argument("--d", type=int, required=True)
    p_cg.add_argument("--out", default=None)
    p_cg.set_defaults(handler=_cmd_classgroup)

    p_qs = sub.add_parser("quadspace", help="finite quadratic space counts")
    qs_sub = p_qs.add_subparsers(dest="subcommand", required=True)
    p_qsc = qs_sub.add_parser("count", help="isotropic subspace counts, "
                                            "closed form and brute force")
    p_qsc.add_argument("--q", type=int, required=True)
    p_qsc.add_argument("--gram", required=True,
                       help="JSON matrix, e.g. [[0,1],[1,0]]")
    p_qsc.add_argument("--l", type=int, required=True)
    p_qsc.add_argument("--out", default=None)
    p_qsc.set_defaults(handler=_cmd_quadspace_count)

    p_lat = sub.add_parser("lattice", help="lattice keys and JSON round "
                                           "trips")
    lat_sub = p_lat.add_subparsers(dest="subcommand", required=True)
    p_lk = lat_sub.add_parser("key", help="canonical presentation-invariant "
                                          "key")
    p_lk.add_argument("--lattice", required=True)
    p_lk.add_argument("--oriented", action="store_true")
    p_lk.add_argument("--out", default=None)
    p_lk.set_defaults(handler=_cmd_lattice_key)
    p_lr = lat_sub.add_parser("roundtrip", help="parse and re-emit a "
                                                "lattice file")
    p_lr.add_argument("--lattice", required=True)
    p_lr.add_argument("--out", default=None)
    p_lr.set_defaults(handler=_cmd_lattice_roundtrip)

    p_hk = sub.add_parser("hecke", help="operator action on coefficients")
    hk_sub = p_hk.add_subparsers(dest="subcommand", required=True)
    p_ha = hk_sub.add_parser("apply", help="evaluate one coefficient of an "
                                           "operator image")
    p_ha.add_argument("--op", choices=("tp", "tj"), required=True)
    p_ha.add_argument("--j", type=int, default=None)
    p_ha.add_argument("--p", type=int, required=True)
    p_ha.add_argument("--k", type=int, required=True)
    p_ha.add_argument("--chi", default=None,
                      help="character file {\"values\": [...]}")
    p_ha.add_argument("--lattice", required=True)
    p_ha.add_argument("--oracle", required=True)
    p_ha.add_argument("--prime-index", type=int, default=0)
    p_ha.add_argument("--budget", type=int, default=None)
    p_ha.add_argument("--out", default=None)
    p_ha.set_defaults(handler=_cmd_hecke_apply)

    p_cs = sub.add_parser("coset", help="coset representatives")
    cs_sub = p_cs.add_subparsers(dest="subcommand", required=True)
    p_cg2 = cs_sub.add_parser("gen", help="generate representatives")
    p_cg2.add_argument("--op", choices=("tp", "tj"), required=True)
    p_cg2.add_argument("--n", type=int, required=True)
    p_cg2.add_argument("--p", type=int, required=True)
    p_cg2.add_argument("--j", type=int, default=None)
    p_cg2.add_argument("--d", type=int, default=1)
    p_cg2.add_argument("--prime-index", type=int, default=0)
    p_cg2.add_argument("--out", default=None)
    p_cg2.set_defaults(handler=_cmd_coset_gen)
    p_cv = cs_sub.add_parser("verify", help="cardinality and pairwise "
                                            "inequivalence suite")
    p_cv.add_argument("--n", type=int, default=1)
    p_cv.add_argument("--p", type=int, default=3)
    p_cv.add_argument("--j", type=int, default=None)
    p_cv.add_argument("--out", default=None)
    p_cv.set_defaults(handler=_cmd_coset_verify)

    p_vf = sub.add_parser("verify", help="bundled verification suites")
    vf_sub = p_vf.add_subparsers(dest="subcommand", required=True)
    p_va = vf_sub.add_parser("all", help="run every suite")
    p_va.add_argument("--quick", action="store_true")
    p_va.add_argument("--budget", type=int, default=None)
    p_va.add_argument("--out", default=None)
    p_va.set_defaults(handler=_cmd_verify)

    return parser


def run(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code else EXIT_OK
    try:
        payload = args.handler(args)
    except BudgetError as exc:
        print("budget error: %s" % exc, file=sys.stderr)
        return EXIT_BUDGET
    except (ValueError, KeyError, TypeError, OSError, NotImplementedError,
            TruncationError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_VALIDATION
    _emit(payload, getattr(args, "out", None))
    if isinstance(payload, dict) and payload.get("ok") is False:
        return EXIT_CHECK_FAILED
    return EXIT_OK


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
