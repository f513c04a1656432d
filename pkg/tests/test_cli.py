import json

import pytest

from torsolve.cli import main, parse_system
from torsolve.errors import SystemFileError

LAC_A1 = [(0, 0), (0, 4), (3, 3), (6, 6), (12, 0)]
LAC_A2 = [(0, 0), (3, 7), (6, 2), (9, 1), (9, 5)]
LAC_B1 = [(0, 0), (0, 1), (1, 1), (2, 2), (4, 1)]
LAC_B2 = [(0, 0), (1, 2), (2, 1), (3, 1), (3, 2)]

TRI_A = [(0, 0, 0), (1, 0, 1), (1, 1, 2), (1, 2, 3), (2, 0, 2), (2, 1, 3), (2, 2, 4), (3, 1, 4)]
TRI_C1 = [1, 2, 3, 4, 5, 6, 7, 8]
TRI_C2 = [2, 3, 5, 7, 11, 13, 17, 19]
TRI_A3 = [(0, 0, 0), (0, 0, 2), (0, 0, 4), (0, 1, 5), (1, 0, 3), (1, 1, 4)]
TRI_C3 = [1, 3, 9, 27, 81, 243]

START_A = [(0, 0), (0, 2), (1, 0), (1, 1), (2, 3), (3, 0), (3, 1), (3, 4), (4, 2), (5, 3), (5, 4), (6, 4)]


def support_file(tmp_path, name, supports):
    data = {
        "n": len(supports),
        "polynomials": [{"support": [list(p) for p in pts]} for pts in supports],
    }
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def system_file(tmp_path, name, supports, coeffs):
    data = {
        "n": len(supports),
        "polynomials": [
            {
                "support": [list(p) for p in pts],
                "coefficients": [[float(c), 0.0] for c in row],
            }
            for pts, row in zip(supports, coeffs)
        ],
    }
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def tri_file(tmp_path):
    return system_file(tmp_path, "tri.json", [TRI_A, TRI_A, TRI_A3], [TRI_C1, TRI_C2, TRI_C3])


def test_parse_rejects_duplicates_and_zeros():
    with pytest.raises(SystemFileError, match=r"support"):
        parse_system({"n": 1, "polynomials": [{"support": [[0], [0]]}]})
    with pytest.raises(SystemFileError, match=r"coefficients\[1\]"):
        parse_system({"n": 1, "polynomials": [
            {"support": [[0], [1]], "coefficients": [[1, 0], [0, 0]]}
        ]})
    with pytest.raises(SystemFileError, match=r"polynomials"):
        parse_system({"n": 2, "polynomials": [{"support": [[0, 0]]}]})


def test_parse_roundtrip_is_canonical():
    from torsolve.cli import system_to_obj

    data = {"n": 1, "polynomials": [
        {"support": [[2], [0]], "coefficients": [[3, 1], [1, 0]]}
    ]}
    _, F = parse_system(data)
    obj = system_to_obj(F)
    assert obj["polynomials"][0]["support"] == [[0], [2]]  # sorted
    _, F2 = parse_system(obj)
    assert F2 == F


def test_cmd_mv(tmp_path, capsys):
    path = support_file(tmp_path, "b.json", [LAC_B1, LAC_B2])
    assert main(["mv", path]) == 0
    assert capsys.readouterr().out.strip() == "10"


def test_cmd_mv_collinear(tmp_path, capsys):
    path = support_file(tmp_path, "z.json", [[(0, 0), (1, 0)], [(0, 0), (2, 0)]])
    assert main(["mv", path]) == 0
    assert capsys.readouterr().out.strip() == "0"


def test_cmd_analyze_lacunary(tmp_path, capsys):
    path = support_file(tmp_path, "lac.json", [LAC_A1, LAC_A2])
    assert main(["analyze", path]) == 0
    out = capsys.readouterr().out
    assert "lacunary, index 12; child MV 10; total 120" in out
    assert "total MV: 120" in out


def test_cmd_analyze_indecomposable(tmp_path, capsys):
    path = support_file(tmp_path, "b.json", [LAC_B1, LAC_B2])
    assert main(["analyze", path]) == 0
    out = capsys.readouterr().out
    assert "indecomposable, MV 10" in out
    assert "total MV: 10" in out


def test_cmd_analyze_mv_zero(tmp_path, capsys):
    path = support_file(tmp_path, "z.json", [[(0, 0), (1, 0)], [(0, 0), (2, 0)]])
    assert main(["analyze", path]) == 0
    assert "mixed volume 0, witness" in capsys.readouterr().out


def test_cmd_solve_triangular_example(tmp_path, capsys):
    path = tri_file(tmp_path)
    code = main(["solve", path, "--seed", "3", "--json"])
    out = json.loads(capsys.readouterr().out)
    assert code == 0
    assert out["mixed_volume"] == 32 and out["count"] == 32
    assert len(out["solutions"]) == 32
    assert max(out["residuals"]) <= 1e-8


def test_cmd_solve_requires_coefficients(tmp_path, capsys):
    path = support_file(tmp_path, "s.json", [LAC_B1, LAC_B2])
    assert main(["solve", path]) == 1
    assert "coefficients required" in capsys.readouterr().err


def test_cmd_solve_deterministic(tmp_path, capsys):
    path = tri_file(tmp_path)
    assert main(["solve", path, "--seed", "11", "--json"]) == 0
    first = json.loads(capsys.readouterr().out)
    assert main(["solve", path, "--seed", "11", "--json"]) == 0
    second = json.loads(capsys.readouterr().out)
    assert first["count"] == second["count"]
    for a, b in zip(first["solutions"], second["solutions"]):
        for (re1, im1), (re2, im2) in zip(a, b):
            assert abs(re1 - re2) <= 1e-8 and abs(im1 - im2) <= 1e-8


def test_cmd_start(tmp_path, capsys):
    path = support_file(tmp_path, "start.json", [START_A, START_A])
    assert main(["start", path, "--seed", "2"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert len(out["solutions"]) == 30
    assert [len(p["support"]) for p in out["polynomials"]] == [5, 5]


def test_cmd_start_mv_zero(tmp_path, capsys):
    path = support_file(tmp_path, "z.json", [[(0, 0), (1, 0)], [(0, 0), (2, 0)]])
    assert main(["start", path]) == 1
    assert "mixed volume 0" in capsys.readouterr().err


def test_cmd_bench_empty(capsys):
    assert main(["bench", "e-basis", "--count", "0"]) == 0
    out = capsys.readouterr().out.strip().splitlines()
    assert out == ["instance_id,mv,paths_dec,paths_bb,time_dec_ms,time_bb_ms,status"]


def test_cmd_bench_one_instance(capsys):
    assert main(["bench", "e-basis", "--count", "1", "--seed", "5"]) == 0
    captured = capsys.readouterr()
    rows = captured.out.strip().splitlines()
    assert len(rows) == 2
    fields = rows[1].split(",")
    assert fields[1] == "50"       # mixed volume
    assert fields[2] == "64"       # decomposable path ledger
    assert int(fields[3]) > 50     # direct total-degree paths
    assert fields[6] == "ok"
    assert "quartiles" in captured.err


def test_bad_file_reports_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["mv", str(bad)]) == 1
    assert "line 1" in capsys.readouterr().err


def test_missing_file(capsys):
    assert main(["mv", "/nonexistent/x.json"]) == 1
    assert "error" in capsys.readouterr().err
