import json
import math

import pytest

from composite_gates import sequence_from_pi
from composite_gates.cli import main
from composite_gates.seqfile import SequenceFileError, dumps, load, save

PI = math.pi


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def profile_rows(text):
    lines = text.splitlines()
    assert lines[0] == "eps,frobenius_fidelity,trace_fidelity"
    return [tuple(map(float, l.split(","))) for l in lines[1:]]


def test_verify_x5(capsys):
    code, out, _ = run(capsys, "verify", "X5")
    assert code == 0
    assert out.startswith("PASS X5")
    assert "slope=3.000" in out
    lo, hi = out.split("range=ok([")[1].split("]pi")[0].split(",")
    assert float(lo) == pytest.approx(0.964, abs=1e-3) and float(hi) == pytest.approx(1.036, abs=1e-3)


def test_verify_bb1(capsys):
    code, out, _ = run(capsys, "verify", "BB1", "--strict")
    assert code == 0
    assert "order=2" in out and "4.5000pi" in out


def test_verify_unknown_name_is_usage_error(capsys):
    code, _, err = run(capsys, "verify", "X99")
    assert code == 2 and "X99" in err


def test_verify_malformed_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"theta_pi": 1, "pulses": [{"area_pi": -1, "phase_pi": 0}]}')
    assert run(capsys, "verify", str(bad))[0] == 2
    bad.write_text("not json")
    assert run(capsys, "verify", str(bad))[0] == 2


def test_verify_two_pulse_file_fails(tmp_path, capsys):
    path = tmp_path / "two.json"
    path.write_text(json.dumps({
        "name": "two", "theta_pi": 1, "claimed_order": 1,
        "pulses": [{"area_pi": 1, "phase_pi": 0}, {"area_pi": 1, "phase_pi": 0.3}],
    }))
    code, out, _ = run(capsys, "verify", str(path))
    assert code == 1 and out.startswith("FAIL two")


def test_verify_file_of_published_sequence_passes(tmp_path, capsys):
    path = tmp_path / "x3.json"
    save(path, sequence_from_pi([1] * 3, [1 / 6, 5 / 6, 1 / 6], 1, "symmetric-x"), "x3", 1)
    assert run(capsys, "verify", str(path))[0] == 0


def test_bad_flag_exits_with_usage_code(capsys):
    with pytest.raises(SystemExit) as info:
        main(["profile"])
    assert info.value.code == 2


def test_profile_x3(capsys):
    code, out, _ = run(capsys, "profile", "X3", "--eps-min", "-0.3", "--eps-max", "0.3", "--points", "601")
    assert code == 0
    rows = profile_rows(out)
    assert len(rows) == 601
    eps, frob, trace = min(rows, key=lambda r: abs(r[0] - 0.1))
    assert eps == pytest.approx(0.1, abs=1e-12)
    # 1 - I1(0.1) from the closed form, evaluated independently in mpmath
    assert frob == pytest.approx(1 - 0.0150476693881823717, abs=1e-9)
    assert frob == pytest.approx(0.984953, abs=1e-6)
    assert "\r" not in out


def test_profile_two_points(capsys):
    _, out, _ = run(capsys, "profile", "X3", "--points", "2")
    assert len(profile_rows(out)) == 2


def test_profile_twelve_decimals(tmp_path, capsys):
    out_path = tmp_path / "p.csv"
    assert run(capsys, "profile", "single", "--points", "3", "--out", str(out_path))[0] == 0
    row = out_path.read_text().splitlines()[1]
    assert all(len(field.split(".")[1]) == 12 for field in row.split(","))


def test_profile_h7s_beats_h5s(capsys):
    def at(name, eps):
        _, out, _ = run(capsys, "profile", name, "--eps-min", str(-eps), "--eps-max", str(eps), "--points", "2")
        return profile_rows(out)

    for a, b in zip(at("H7s", 0.08), at("H5s", 0.08)):
        assert a[1] >= b[1]


@pytest.mark.parametrize("name,lo,hi", [("X9", 0.883, 1.117), ("X13", 0.807, 1.193)])
def test_range(capsys, name, lo, hi):
    code, out, _ = run(capsys, "range", name)
    assert code == 0
    assert f"[{lo:.3f}pi, {hi:.3f}pi]" in out


def test_range_sanity_threshold(capsys):
    code, out, _ = run(capsys, "range", "single-pi", "--threshold", "0.5")
    assert code == 0
    lo = float(out.split("[")[1].split("pi")[0])
    # edge from 1 - sqrt(2)|sin(pi eps / 4)| = 1/2
    assert 1 - lo == pytest.approx(4 / PI * math.asin(0.5 / math.sqrt(2)), abs=1e-3)


def test_solve_x3_branches(capsys):
    code, out, _ = run(capsys, "solve", "--family", "symmetric-x", "--order", "1")
    assert code == 0
    assert "classes=2" in out
    found = sorted(
        tuple(float(v) for v in l.split(":")[1].split()) for l in out.splitlines() if "phases_pi:" in l
    )
    assert found[0] == pytest.approx((1 / 6, 5 / 6, 1 / 6), abs=1e-9)
    assert found[1] == pytest.approx((5 / 6, 1 / 6, 5 / 6), abs=1e-9)


def test_solve_h5s_branch(capsys):
    code, out, _ = run(capsys, "solve", "--family", "symmetric-rot", "--order", "2", "--theta-pi", "0.5")
    assert code == 0
    alphas = [float(l.split()[1]) for l in out.splitlines() if "areas_pi:" in l]
    # H5s opens and closes with alpha = 0.4500 pi
    assert any(abs(a - 0.45) < 1e-3 for a in alphas)


def test_solve_h4a_area(capsys):
    code, out, _ = run(capsys, "solve", "--family", "asym-alpha-beta", "--order", "2", "--theta-pi", "0.5")
    assert code == 0
    areas = [float(l.split("area=")[1].split("pi")[0]) for l in out.splitlines() if " area=" in l]
    assert min(areas) <= 4.2


def test_solve_writes_loadable_files(tmp_path, capsys):
    out_path = tmp_path / "sols.json"
    run(capsys, "solve", "--family", "symmetric-x", "--order", "1", "--seeds", "8", "--out", str(out_path))
    records = json.loads(out_path.read_text())
    assert records and all(r["claimed_order"] >= 1 for r in records)


def test_solve_rejects_bad_problem(capsys):
    code, _, err = run(capsys, "solve", "--family", "symmetric-x", "--order", "2", "--pulses", "3")
    assert code == 2 and err


def test_solve_is_byte_identical(capsys):
    args = ("solve", "--family", "symmetric-rot", "--order", "1", "--theta-pi", "0.25", "--seeds", "16", "--rng-seed", "5")
    assert run(capsys, *args) == run(capsys, *args)


def test_catalog_list_counts(capsys):
    _, out, _ = run(capsys, "catalog", "list", "--family", "symmetric-x")
    assert len(out.splitlines()) == 9
    _, out, _ = run(capsys, "catalog", "list", "--theta-pi", "0.25")
    assert [l.split()[0] for l in out.splitlines()] == ["ROT-1/4-3", "ROT-1/4-5", "ROT-1/4-7", "ROT-1/4-9"]


def test_catalog_export(tmp_path, capsys):
    path = tmp_path / "cat.csv"
    assert run(capsys, "catalog", "export", "--format", "csv", "--out", str(path))[0] == 0
    _, listing, _ = run(capsys, "catalog", "list")
    assert len(path.read_text().splitlines()) == len(listing.splitlines()) + 1
    code, out, _ = run(capsys, "catalog", "export")
    assert code == 0 and json.loads(out)["units"] == "pi"


def test_sequence_file_round_trip(tmp_path):
    seq = sequence_from_pi([0.45, 1, 1, 1, 0.45], [1.9494, 0.0741, 1.7793, 0.0741, 1.9494], 0.5, "symmetric-rot")
    path = tmp_path / "s.json"
    save(path, seq, "h5")
    back = load(path).sequence
    assert back.areas == seq.areas and back.phases == seq.phases
    assert json.loads(dumps(seq))["family"] == "symmetric-rot"


def test_sequence_file_errors(tmp_path):
    path = tmp_path / "s.json"
    for text in ("[]", '{"theta_pi": 1}', '{"theta_pi": 1, "pulses": []}'):
        path.write_text(text)
        with pytest.raises(SequenceFileError):
            load(path)
    with pytest.raises(SequenceFileError):
        load(tmp_path / "missing.json")
