import csv
import io
import json
import math
import subprocess
import sys

import pytest

from quasisep import cli, model

SQ2 = math.sqrt(2)


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def write_state(tmp_path, state, name="state.json"):
    path = tmp_path / name
    path.write_text(state.dumps())
    return str(path)


class TestBands:
    def test_endpoints(self, capsys):
        code, out, _ = run(["bands", "--steps", "4"], capsys)
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert list(rows[0]) == ["kappa_over_delta", "E_plus_over_hbar_delta",
                                 "E_minus_over_hbar_delta"]
        gap = lambda r: float(r["E_plus_over_hbar_delta"]) - float(r["E_minus_over_hbar_delta"])
        assert math.isclose(gap(rows[0]), 1.0, rel_tol=1e-15)
        assert math.isclose(gap(rows[-1]), math.sqrt(10), rel_tol=1e-14)

    def test_monotone_gap(self, capsys):
        _, out, _ = run(["bands"], capsys)
        rows = list(csv.DictReader(io.StringIO(out)))
        assert len(rows) == 61
        gaps = [float(r["E_plus_over_hbar_delta"]) - float(r["E_minus_over_hbar_delta"])
                for r in rows]
        assert all(b > a for a, b in zip(gaps, gaps[1:]))

    def test_resonance_rejected(self, capsys):
        code, _, err = run(["bands", "--omega-f", "1", "--omega-b", "1"], capsys)
        assert code == 3 and "detuning" in err

    def test_json_format(self, capsys):
        _, out, _ = run(["bands", "--steps", "2", "--format", "json"], capsys)
        data = json.loads(out)
        assert data[1]["kappa_over_delta"] == 3.0


class TestNoonCircle:
    def rows(self, capsys, *extra):
        code, out, _ = run(["noon-circle", "--kappa-re", "1", *extra], capsys)
        assert code == 0
        return list(csv.DictReader(io.StringIO(out)))

    def test_exact_points(self, capsys):
        rows = self.rows(capsys, "--n", "5", "--samples", "0")
        assert len(rows) == 6
        assert [(int(r["m"]), int(r["n"])) for r in rows] == [(m, 5 - m) for m in range(5, -1, -1)]
        assert all(r["status"] == "separable" for r in rows)

    def test_generic_sample_entangled(self, capsys):
        rows = self.rows(capsys, "--n", "5", "--samples", "7")
        assert rows[1]["status"] == "entangled" and rows[1]["m"] == ""

    def test_single_particle(self, capsys):
        rows = self.rows(capsys, "--n", "1", "--samples", "8")
        sampled = [r for r in rows if r["kind"] == "sample"]
        # only the two product rays and their reflections lie on the sampled grid
        assert sum(r["status"] == "separable" for r in sampled) == 4
        assert all(r["status"] == "separable" for r in rows if r["kind"] == "exact")

    def test_bad_n(self, capsys):
        assert run(["noon-circle", "--n", "0"], capsys)[0] == 3


class TestExpand:
    def table(self, capsys, *argv):
        code, out, _ = run(["expand", *argv], capsys)
        assert code == 0
        return {r["ket"]: float(r["re"]) for r in csv.DictReader(io.StringIO(out))}

    def test_fb_two_zero(self, capsys):
        t = self.table(capsys, "FB_quasi", "--m", "2", "--n", "0")
        assert t.keys() == {"|1,1>_FB_quasi", "|0,2>_FB_quasi"}
        assert math.isclose(t["|1,1>_FB_quasi"], math.sqrt(2 / 3), rel_tol=1e-14)
        assert math.isclose(t["|0,2>_FB_quasi"], 1 / math.sqrt(3), rel_tol=1e-14)

    def test_bb_one_one(self, capsys):
        t = self.table(capsys, "BB", "--m", "1", "--n", "1")
        assert sorted(t.values()) == pytest.approx([-1 / SQ2, 1 / SQ2], abs=1e-15)

    def test_ff_one_one(self, capsys):
        assert self.table(capsys, "FF", "--m", "1", "--n", "1") == {"|1,1>_FF": 1.0}

    def test_ff_violation(self, capsys):
        assert run(["expand", "FF", "--m", "2", "--n", "0"], capsys)[0] == 3

    def test_unknown_picture(self, capsys):
        assert run(["expand", "XY", "--m", "1", "--n", "0"], capsys)[0] == 3


class TestSeparable:
    def test_product_fixed_n(self, tmp_path, capsys, resonant):
        path = write_state(tmp_path, model.product_state_pm(3, 2, resonant))
        code, out, _ = run(["separable", path], capsys)
        data = json.loads(out)
        assert code == 0
        assert data["witness"] == {"m": 3, "n": 2} and data["method"] == "closed_form_fixed_N"

    def test_eigenstate_condition(self, tmp_path, capsys, resonant):
        path = write_state(tmp_path, model.eigenstate(3, "+", resonant))
        code, out, _ = run(["separable", path, "--method", "condition"], capsys)
        assert code == 1
        assert json.loads(out)["method"] == "condition_eq25"

    def test_condition_needs_eigenstate(self, tmp_path, capsys, resonant):
        path = write_state(tmp_path, model.fb_state(1, 2))
        assert run(["separable", path, "--method", "condition"], capsys)[0] == 3

    def test_bilinear_product(self, tmp_path, capsys, resonant):
        path = write_state(tmp_path, model.product_state_pm(2, 1, resonant))
        code, out, _ = run(["separable", path, "--method", "bilinear", "--left-degree", "3",
                            "--right-degree", "3", "--restarts", "8"], capsys)
        assert code == 0 and json.loads(out)["residual"] <= 1e-9

    def test_bilinear_inconclusive(self, tmp_path, capsys, resonant):
        path = write_state(tmp_path, model.eigenstate(2, "+", resonant))
        code, out, _ = run(["separable", path, "--method", "bilinear", "--restarts", "8"], capsys)
        assert code == 2 and json.loads(out)["status"] == "inconclusive"

    def test_corrupt_json(self, tmp_path, capsys, resonant):
        text = model.product_state_pm(1, 1, resonant).dumps()
        path = tmp_path / "bad.json"
        path.write_text(text[: len(text) // 2])
        code, _, err = run(["separable", str(path)], capsys)
        assert code > 2 and "cannot read" in err

    def test_missing_file(self, tmp_path, capsys):
        assert run(["separable", str(tmp_path / "nope.json")], capsys)[0] > 2

    def test_sector_mismatch(self, tmp_path, capsys):
        state = (model.fb_state(0, 1, 4) + model.fb_state(0, 2, 4)).normalize()
        assert run(["separable", write_state(tmp_path, state)], capsys)[0] > 2

    def test_bad_flag(self, capsys):
        assert cli.main(["separable"]) == 3
        assert cli.main(["separable", "x.json", "--method", "svd"]) == 3


class TestEigencheck:
    def test_resonant_squares(self, capsys):
        _, out, _ = run(["eigencheck", "--n-max", "20"], capsys)
        rows = list(csv.DictReader(io.StringIO(out)))
        hits = sorted({int(r["N"]) for r in rows if r["separable"] == "true"})
        assert hits == [1, 4, 9, 16]

    def test_detuned_generic(self, capsys):
        _, out, _ = run(["eigencheck", "--omega-f", "1.7", "--n-max", "12"], capsys)
        rows = list(csv.DictReader(io.StringIO(out)))
        assert {int(r["N"]) for r in rows if r["separable"] == "true"} == {1}

    def test_bad_range(self, capsys):
        assert run(["eigencheck", "--n-min", "3", "--n-max", "2"], capsys)[0] == 3


class TestStateCommand:
    def test_roundtrip(self, tmp_path, capsys):
        out = tmp_path / "s.json"
        assert run(["state", "product", "--m", "2", "--n", "3", "--out", str(out)], capsys)[0] == 0
        code, text, _ = run(["separable", str(out)], capsys)
        assert code == 0 and json.loads(text)["witness"] == {"m": 2, "n": 3}


class TestDeterminism:
    def test_byte_identical_files(self, tmp_path, capsys):
        paths = [tmp_path / f"o{k}.csv" for k in range(2)]
        for p in paths:
            run(["noon-circle", "--samples", "50", "--out", str(p)], capsys)
        assert paths[0].read_bytes() == paths[1].read_bytes()
        assert b"\r" not in paths[0].read_bytes()

    def test_bilinear_seeded(self, tmp_path, capsys, resonant):
        path = write_state(tmp_path, model.eigenstate(2, "-", resonant))
        args = ["separable", path, "--method", "bilinear", "--restarts", "4", "--seed", "11"]
        assert run(args, capsys)[1] == run(args, capsys)[1]

    def test_env_seed_fallback(self, tmp_path, capsys, monkeypatch, resonant):
        path = write_state(tmp_path, model.eigenstate(2, "-", resonant))
        base = ["separable", path, "--method", "bilinear", "--restarts", "3"]
        explicit = run(base + ["--seed", "9"], capsys)[1]
        monkeypatch.setenv("QUASISEP_SEED", "9")
        assert run(base, capsys)[1] == explicit
        monkeypatch.setenv("QUASISEP_SEED", "nine")
        assert run(base, capsys)[0] == 3

    def test_full_precision(self, capsys):
        _, out, _ = run(["bands", "--steps", "3", "--format", "json"], capsys)
        want = json.loads(out)
        _, out, _ = run(["bands", "--steps", "3"], capsys)
        rows = list(csv.DictReader(io.StringIO(out)))
        for row, ref in zip(rows, want):
            for key, value in ref.items():
                assert float(row[key]) == value


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "quasisep", "eigencheck", "--n-max", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "N,branch,separable,m,n"
