"""Tests for the command-line interface: JSON golden outputs, exit codes."""

import json
import os
from fractions import Fraction

from heckeops.cli import run
from heckeops.lattice import PseudoLattice, lattice_to_json
from heckeops.numberfield import FieldSpec

Q = FieldSpec.rationals()


def _run(capsys, *argv):
    code = run(list(argv))
    captured = capsys.readouterr()
    payload = json.loads(captured.out) if captured.out.strip() else None
    return code, payload, captured.err


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


class TestPlainCommands:
    def test_classgroup_golden(self, capsys):
        code, payload, _ = _run(capsys, "classgroup", "--d", "10")
        assert code == 0
        assert payload == {"h": 2}
        code, payload, _ = _run(capsys, "classgroup", "--d", "5")
        assert code == 0
        assert payload == {"h": 1}

    def test_quadspace_count_golden(self, capsys):
        code, payload, _ = _run(capsys, "quadspace", "count", "--q", "3",
                                "--gram", "[[0,1],[1,0]]", "--l", "1")
        assert code == 0
        assert payload == {"brute_force": 2, "closed_form": 2, "l": 1}

    def test_field_factorizations(self, capsys):
        code, payload, _ = _run(capsys, "field", "--d", "5", "--p", "5")
        assert code == 0
        assert payload["product_is_pO"] is True
        assert [f["e"] for f in payload["factorization"]] == [2]
        code, payload, _ = _run(capsys, "field", "--d", "10", "--p", "3")
        assert code == 0
        assert payload["product_is_pO"] is True

    def test_field_rationals(self, capsys):
        code, payload, _ = _run(capsys, "field", "--d", "1", "--p", "7")
        assert code == 0
        assert payload["degree"] == 1
        assert payload["product_is_pO"] is True


class TestLatticeCommands:
    def test_key_is_presentation_invariant(self, capsys, tmp_path):
        a = PseudoLattice.free(Q, [[2, 0], [0, 4]])
        b = PseudoLattice.free(Q, [[4, 0], [0, 2]])
        fa = _write(tmp_path / "a.json", lattice_to_json(a))
        fb = _write(tmp_path / "b.json", lattice_to_json(b))
        _, pa, _ = _run(capsys, "lattice", "key", "--lattice", fa)
        _, pb, _ = _run(capsys, "lattice", "key", "--lattice", fb)
        assert pa["key"] == pb["key"]

    def test_roundtrip_is_bit_exact(self, capsys, tmp_path):
        data = lattice_to_json(PseudoLattice.free(Q, [[2, 1], [1, 2]]))
        f = _write(tmp_path / "l.json", data)
        code, payload, _ = _run(capsys, "lattice", "roundtrip",
                                "--lattice", f)
        assert code == 0
        assert payload == data


class TestHeckeApply:
    def _files(self, tmp_path, gram, entries, bound):
        lam = _write(tmp_path / "lam.json",
                     lattice_to_json(PseudoLattice.free(Q, gram)))
        oracle = _write(tmp_path / "oracle.json", {
            "bound": str(bound),
            "entries": [
                {"lattice": lattice_to_json(PseudoLattice.free(Q, g)),
                 "value": v} for g, v in entries]})
        return lam, oracle

    def test_first_kind_classical(self, capsys, tmp_path):
        lam, oracle = self._files(tmp_path, [[18]],
                                  [([[6]], "28"), ([[54]], "20440")], 54)
        code, payload, _ = _run(capsys, "hecke", "apply", "--op", "tp",
                                "--p", "3", "--k", "4", "--lattice", lam,
                                "--oracle", oracle)
        assert code == 0
        assert payload["coefficient"] == "21196"
        assert len(payload["terms"]) == 2
        assert sorted(t["term"] for t in payload["terms"]) == \
            ["20440", "756"]

    def test_first_kind_with_character_file(self, capsys, tmp_path):
        lam, oracle = self._files(tmp_path, [[18]],
                                  [([[6]], "28"), ([[54]], "20440")], 54)
        chi = _write(tmp_path / "chi.json", {"values": ["1"]})
        code, payload, _ = _run(capsys, "hecke", "apply", "--op", "tp",
                                "--p", "3", "--k", "4", "--chi", chi,
                                "--lattice", lam, "--oracle", oracle)
        assert code == 0
        assert payload["coefficient"] == "21196"

    def test_second_kind_classical(self, capsys, tmp_path):
        lam, oracle = self._files(
            tmp_path, [[18]],
            [([[2]], "1"), ([[18]], "757"), ([[162]], "551881")], 162)
        code, payload, _ = _run(capsys, "hecke", "apply", "--op", "tj",
                                "--j", "1", "--p", "3", "--k", "4",
                                "--lattice", lam, "--oracle", oracle)
        assert code == 0
        assert payload["coefficient"] == "573049"
        assert len(payload["terms"]) == 3

    def test_second_kind_requires_j(self, capsys, tmp_path):
        lam, oracle = self._files(tmp_path, [[2]], [([[2]], "1")], 18)
        code, _, err = _run(capsys, "hecke", "apply", "--op", "tj",
                            "--p", "3", "--k", "4", "--lattice", lam,
                            "--oracle", oracle)
        assert code == 2
        assert "--j" in err


class TestCosetCommands:
    def test_gen_counts_rational(self, capsys):
        code, payload, _ = _run(capsys, "coset", "gen", "--op", "tp",
                                "--n", "1", "--p", "3")
        assert code == 0
        assert payload["count"] == 4
        assert all("matrix" in rep for rep in payload["reps"])

    def test_gen_symbolic_quadratic(self, capsys):
        # 3 is inert in Q(sqrt 5), so the residue norm is 9
        code, payload, _ = _run(capsys, "coset", "gen", "--op", "tp",
                                "--n", "1", "--p", "3", "--d", "5")
        assert code == 0
        assert payload["count"] == 10
        assert all("matrix" not in rep for rep in payload["reps"])
        assert all(rep["data"]["prime_norm"] == 9
                   for rep in payload["reps"])

    def test_coset_verify(self, capsys):
        code, payload, _ = _run(capsys, "coset", "verify", "--n", "1",
                                "--p", "3")
        assert code == 0
        assert payload["ok"] is True
        names = {c["name"] for c in payload["checks"]}
        assert "tp-cardinality" in names
        assert "tj1-inequivalence" in names


class TestVerifySuite:
    def test_verify_all_quick(self, capsys):
        code, payload, _ = _run(capsys, "verify", "all", "--quick")
        assert code == 0
        assert payload["ok"] is True
        names = [c["name"] for c in payload["checks"]]
        assert "counting-grid" in names
        assert "coset-inequivalence" in names
        assert "operator-agreement" in names
        assert "presentation-coherence" in names
        assert "numberfield-identities" in names
        assert all(c["ok"] for c in payload["checks"])


class TestExitCodes:
    def test_dyadic_prime_rejected(self, capsys, tmp_path):
        lam = _write(tmp_path / "lam.json",
                     lattice_to_json(PseudoLattice.free(Q, [[2]])))
        oracle = _write(tmp_path / "oracle.json",
                        {"bound": "2", "entries": []})
        code, _, err = _run(capsys, "hecke", "apply", "--op", "tp",
                            "--p", "2", "--k", "4", "--lattice", lam,
                            "--oracle", oracle)
        assert code == 2
        assert "odd" in err

    def test_malformed_json_is_pointered(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"bound": nope}')
        lam = _write(tmp_path / "lam.json",
                     lattice_to_json(PseudoLattice.free(Q, [[2]])))
        code, _, err = _run(capsys, "hecke", "apply", "--op", "tp",
                            "--p", "3", "--k", "4", "--lattice", lam,
                            "--oracle", str(bad))
        assert code == 2
        assert "bad.json:1:" in err

    def test_missing_file(self, capsys, tmp_path):
        code, _, err = _run(capsys, "lattice", "key", "--lattice",
                            str(tmp_path / "absent.json"))
        assert code == 2
        assert "does not exist" in err

    def test_budget_exhaustion(self, capsys, tmp_path):
        lam = _write(tmp_path / "lam.json",
                     lattice_to_json(PseudoLattice.free(Q,
                                                        [[2, 0], [0, 2]])))
        oracle = _write(tmp_path / "oracle.json",
                        {"bound": "100", "entries": []})
        try:
            code, _, err = _run(capsys, "hecke", "apply", "--op", "tp",
                                "--p", "3", "--k", "4", "--lattice", lam,
                                "--oracle", oracle, "--budget", "2")
            assert code == 3
            assert "budget" in err
        finally:
            os.environ.pop("HECKE_LATTICE_BUDGET", None)

    def test_nonpositive_budget(self, capsys, tmp_path):
        lam = _write(tmp_path / "lam.json",
                     lattice_to_json(PseudoLattice.free(Q, [[2]])))
        oracle = _write(tmp_path / "oracle.json",
                        {"bound": "100", "entries": []})
        code, _, err = _run(capsys, "hecke", "apply", "--op", "tp",
                            "--p", "3", "--k", "4", "--lattice", lam,
                            "--oracle", oracle, "--budget", "0")
        assert code == 2
        assert "positive" in err

    def test_usage_error(self, capsys):
        code, _, _ = _run(capsys, "no-such-command")
        assert code == 2

    def test_out_flag_writes_file(self, capsys, tmp_path):
        out = tmp_path / "out.json"
        code, payload, _ = _run(capsys, "classgroup", "--d", "5",
                                "--out", str(out))
        assert code == 0
        assert payload is None
        assert json.loads(out.read_text()) == {"h": 1}
