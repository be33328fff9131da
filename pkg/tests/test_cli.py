import json

import numpy as np
import pytest

from partrot.cli import main
from partrot.models import save_hamiltonian
from partrot.pauli import Hamiltonian

FAST = ["--mcts-iterations", "8"]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_compile_and_verify(tmp_path, capsys):
    q, r = tmp_path / "c.qasm", tmp_path / "r.json"
    code, _, _ = run(capsys, "compile", "--model", "ising", "--rows", "1", "--cols", "4", "--time", "0.3",
                     "--steps", "2", "--out", str(q), "--report", str(r), *FAST)
    assert code == 0
    rep = json.loads(r.read_text())
    assert rep["schema"] == 1 and rep["method"] == "kernpiler" and rep["num_qubits"] == 4
    for key in ("cnot_count", "u3_count", "depth", "steps", "order", "t", "spectral_error", "frobenius_error",
                "predicted_bounds", "seed", "wall_time_ms", "global_phase_offset"):
        assert key in rep
    code, out, _ = run(capsys, "verify", str(q), "--model", "ising", "--rows", "1", "--cols", "4", "--time", "0.3")
    assert code == 0
    ver = json.loads(out)
    assert ver["declared_counts_match"]
    assert ver["cnot_count"] == rep["cnot_count"] and ver["depth"] == rep["depth"]
    assert ver["spectral_error"] == pytest.approx(rep["spectral_error"], abs=1e-12)


def test_verify_single_term_exact(tmp_path, capsys):
    h = tmp_path / "h.json"
    save_hamiltonian(Hamiltonian.from_labels([(0.7, "XYZ")]), h)
    q = tmp_path / "c.qasm"
    assert run(capsys, "compile", "--hamiltonian", str(h), "--time", "0.4", "--out", str(q), "--report", str(tmp_path / "r.json"))[0] == 0
    code, out, _ = run(capsys, "verify", str(q), "--hamiltonian", str(h), "--time", "0.4", "--target-error", "1e-10")
    assert code == 0 and json.loads(out)["spectral_error"] < 1e-10


def test_verify_detects_tampered_counts(tmp_path, capsys):
    h = tmp_path / "h.json"
    save_hamiltonian(Hamiltonian.from_labels([(0.7, "XX")]), h)
    q = tmp_path / "c.qasm"
    run(capsys, "compile", "--hamiltonian", str(h), "--out", str(q), "--report", str(tmp_path / "r.json"))
    q.write_text(q.read_text().replace("cnot_count=2", "cnot_count=1"))
    code, out, err = run(capsys, "verify", str(q), "--hamiltonian", str(h))
    assert code == 1 and "disagree" in err
    assert not json.loads(out)["declared_counts_match"]


def test_verify_target_exceeded(tmp_path, capsys):
    q = tmp_path / "c.qasm"
    run(capsys, "compile", "--model", "heisenberg", "--cols", "3", "--method", "naive1", "--out", str(q), "--report", str(tmp_path / "r.json"))
    code, out, _ = run(capsys, "verify", str(q), "--model", "heisenberg", "--cols", "3", "--target-error", "1e-6")
    assert code == 1 and json.loads(out)["within_target"] is False


def test_verify_qubit_mismatch(tmp_path, capsys):
    q = tmp_path / "c.qasm"
    q.write_text("OPENQASM 2.0;\nqreg q[3];\n")
    code, _, err = run(capsys, "verify", str(q), "--model", "ising", "--cols", "2")
    assert code == 2 and "qubits" in err


def test_naive_error_decreases(tmp_path, capsys):
    errs = []
    for n in (1, 2, 4, 8):
        r = tmp_path / f"r{n}.json"
        run(capsys, "compile", "--model", "heisenberg", "--cols", "4", "--method", "naive1", "--steps", str(n), "--report", str(r))
        errs.append(json.loads(r.read_text())["spectral_error"])
    assert all(b <= a * 1.1 for a, b in zip(errs, errs[1:]))


def test_empty_hamiltonian(tmp_path, capsys):
    h = tmp_path / "h.json"
    h.write_text(json.dumps({"num_qubits": 2, "terms": []}))
    code, out, _ = run(capsys, "compile", "--hamiltonian", str(h), "--out", str(tmp_path / "c.qasm"))
    rep = json.loads(out)
    assert code == 0
    assert (rep["cnot_count"], rep["u3_count"], rep["depth"]) == (0, 0, 0)
    assert rep["spectral_error"] < 1e-12


def test_deterministic_runs_identical(tmp_path, capsys):
    outs = []
    for i in range(2):
        q, r = tmp_path / f"c{i}.qasm", tmp_path / f"r{i}.json"
        run(capsys, "compile", "--model", "heisenberg", "--cols", "3", "--seed", "7", "--deterministic",
            "--steps", "2", "--out", str(q), "--report", str(r), *FAST)
        outs.append((q.read_bytes(), r.read_bytes()))
    assert outs[0] == outs[1]
    assert json.loads(outs[0][1])["wall_time_ms"] == 0


def test_target_error_search(tmp_path, capsys):
    code, out, _ = run(capsys, "compile", "--model", "ising", "--cols", "3", "--method", "naive1", "--time", "1",
                       "--target-error", "0.05")
    rep = json.loads(out)
    assert code == 0 and rep["spectral_error"] <= 0.05 and rep["target_error"] == 0.05


def test_analyze_table_partitions(tmp_path, capsys):
    h = tmp_path / "h.json"
    save_hamiltonian(Hamiltonian.from_labels([(1, "IIXI"), (1, "XXII"), (1, "IIXX"), (1, "XIII")]), h)
    code, out, _ = run(capsys, "analyze", "--hamiltonian", str(h))
    rep = json.loads(out)
    assert code == 0
    assert [p["terms"] for p in rep["partitions"]] == [["XIII", "XXII", "IIXI"], ["IIXX"]]


def test_analyze_explicit_pairing(tmp_path, capsys):
    h = tmp_path / "h.json"
    save_hamiltonian(Hamiltonian.from_labels([(1, "XYZ"), (1, "YZX"), (1, "ZXY"), (1, "XZX")]), h)
    code, out, _ = run(capsys, "analyze", "--hamiltonian", str(h), "--partitions", "0,1;2,3")
    b = json.loads(out)["bounds"]
    assert code == 0 and b["reduction"] == pytest.approx(2.0)
    assert b["full"] - b["partitioned"] == pytest.approx(b["reduction"])


def test_analyze_commuting_zero(capsys):
    code, out, _ = run(capsys, "analyze", "--model", "ising", "--cols", "4", "--h", "0")
    b = json.loads(out)["bounds"]
    assert code == 0 and b["full"] == 0 and b["partitioned"] == 0


@pytest.mark.parametrize(
    "argv,msg",
    [
        (["compile"], "source is required"),
        (["compile", "--model", "ising", "--method", "naive1", "--order", "2"], "naive2"),
        (["compile", "--model", "ising", "--rows", "2", "--cols", "2", "--topology", "line"], "line"),
        (["compile", "--hamiltonian", "/nonexistent/h.json"], "cannot read"),
        (["analyze", "--model", "ising", "--partitions", "0;0"], "repeated"),
    ],
)
def test_errors_exit_2(argv, msg, capsys):
    code, _, err = run(capsys, *argv)
    assert code == 2 and msg in err


def test_bad_json_reports_line(tmp_path, capsys):
    h = tmp_path / "h.json"
    h.write_text('{"num_qubits": 2,\n "terms": [{"coeff": 1, "pauli": "XQ"}]}')
    code, _, err = run(capsys, "compile", "--hamiltonian", str(h))
    assert code == 2 and "term 0" in err


def test_bench_large_csv(capsys, monkeypatch):
    from partrot import bench
    from partrot.models import GridSpec

    monkeypatch.setattr(bench, "LARGE_MODELS", [("ising", GridSpec(20, 1, "line"))])
    code, out, _ = run(capsys, "bench", "--suite", "large", "--format", "csv", "--deterministic", *FAST)
    lines = out.strip().splitlines()
    assert code == 0 and lines[0].startswith("model,method")
    assert len(lines) == 3 and ",,," in lines[1]
