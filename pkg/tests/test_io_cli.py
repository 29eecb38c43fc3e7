import csv
import gzip
import json

import numpy as np
import pytest

from symcap import io
from symcap.cli import main
from symcap.errors import ValidationError
from symcap.lagrangian import LagrangianFrame, random_frame
from symcap.states import hermite_state
from symcap.grids import centered_axis
from symcap.wigner import cross_wigner, wigner_transform


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, (json.loads(out) if code == 0 else None)


def write_matrix(path, M, kind="sym", hbar=None):
    io.write_json(path, io.matrix_doc(M, kind, hbar))
    return path


# -- file formats --------------------------------------------------------------


def test_matrix_roundtrip_is_exact(tmp_path, rng):
    M = rng.normal(size=(4, 4))
    M = M + M.T
    p = write_matrix(tmp_path / "m.json", M)
    assert np.array_equal(io.load_matrix(p), M)
    pz = write_matrix(tmp_path / "m.json.gz", M)
    assert np.array_equal(io.load_matrix(pz), M)
    with gzip.open(pz, "rt") as fh:
        assert json.load(fh)["kind"] == "sym"


def test_matrix_validation(tmp_path):
    doc = io.matrix_doc(np.eye(2))
    for bad in ({"kind": "other"}, {"n": 3}, {"n": 0}, {"data": [1, 0, 0, "x"]},
                {"data": [1, 0, 0, float("nan")]}, {"schema_version": "2.0"}):
        with pytest.raises(ValidationError):
            io.parse_matrix({**doc, **bad})
    with pytest.raises(ValidationError):
        io.parse_matrix(io.matrix_doc([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(ValidationError):
        io.parse_matrix(io.matrix_doc(np.diag([1.0, -1.0]), "covariance"))
    with pytest.raises(ValidationError):
        io.parse_matrix(io.matrix_doc(2 * np.eye(2), "symplectic"))
    with pytest.raises(ValidationError):
        io.parse_matrix(doc, expect=("covariance",))


def test_malformed_files(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ValidationError):
        io.read_json(p)
    p.write_text("[1, 2]")
    with pytest.raises(ValidationError):
        io.read_json(p)
    with pytest.raises(ValidationError):
        io.read_json(tmp_path / "missing.json")


def test_state_roundtrip(tmp_path):
    psi = hermite_state(3, (centered_axis(64, 8.0),), 0.5)
    p = tmp_path / "s.json"
    io.write_json(p, io.state_doc(psi))
    back = io.load_state(p)
    assert back.axes == psi.axes and back.hbar == 0.5
    assert np.array_equal(back.values, psi.values)


def test_state_validation():
    doc = io.state_doc(hermite_state(0, (centered_axis(32, 8.0),)))
    with pytest.raises(ValidationError):
        io.parse_state({**doc, "n": 2})
    with pytest.raises(ValidationError):
        io.parse_state({**doc, "values": doc["values"][:-2]})
    with pytest.raises(ValidationError):
        io.parse_state({**doc, "axes": [{"min": -1.0}]})


def test_wigner_roundtrip(tmp_path):
    ax = centered_axis(64, 8.0)
    psi, phi = hermite_state(1, (ax,)), hermite_state(2, (ax,))
    for W in (wigner_transform(psi), cross_wigner(psi, phi)):
        p = tmp_path / "w.json.gz"
        io.write_json(p, io.wigner_doc(W))
        back = io.load_wigner(p)
        assert np.array_equal(back.values, W.values)
        assert back.p_axes == W.p_axes


def test_frame_roundtrip(tmp_path, rng):
    f = random_frame(2, rng)
    p = tmp_path / "f.json"
    io.write_json(p, io.frame_doc(f))
    g = io.load_frame(p)
    assert np.allclose(g.ell.basis @ g.ell.basis.T, f.ell.basis @ f.ell.basis.T, atol=1e-14)


def test_write_is_deterministic(tmp_path, rng):
    M = np.diag([1.0, 2.0])
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    write_matrix(a, M)
    write_matrix(b, M)
    assert io.file_digest(a) == io.file_digest(b)


# -- CLI -----------------------------------------------------------------------


def test_cli_spectrum(tmp_path, capsys):
    p = write_matrix(tmp_path / "m.json", np.diag([4.0, 9.0]))
    code, rep = run(capsys, "spectrum", p)
    assert code == 0
    assert rep["outputs"]["spectrum"] == pytest.approx([6.0])
    assert rep["outputs"]["capacity"] == pytest.approx(np.pi / 6)
    assert set(rep) == {"command", "hbar", "inputs_digest", "outputs", "residuals",
                        "warnings", "timing"}


def test_cli_capacity_identity_and_hbar(tmp_path, capsys):
    p = write_matrix(tmp_path / "m.json", np.eye(4))
    assert run(capsys, "capacity", p)[1]["outputs"]["capacity"] == pytest.approx(np.pi)
    rep = run(capsys, "capacity", p, "--hbar", "0.5")[1]
    assert rep["hbar"] == 0.5 and rep["outputs"]["capacity"] == pytest.approx(np.pi / 2)
    assert rep["outputs"]["satisfies_quantum_bound"]
    p2 = write_matrix(tmp_path / "m2.json", np.eye(2), hbar=0.25)
    assert run(capsys, "capacity", p2)[1]["hbar"] == 0.25


def test_cli_digest_is_deterministic(tmp_path, capsys):
    p = write_matrix(tmp_path / "m.json", np.eye(2))
    d1 = run(capsys, "spectrum", p)[1]["inputs_digest"]
    d2 = run(capsys, "spectrum", p)[1]["inputs_digest"]
    assert d1 == d2
    write_matrix(p, 2 * np.eye(2))
    assert run(capsys, "spectrum", p)[1]["inputs_digest"] != d1


@pytest.mark.parametrize("method", ["eigh", "schur"])
def test_cli_williamson_writes_symplectic(tmp_path, capsys, method):
    M = np.array([[2, 1, 0, 0.5], [1, 3, 0.25, 0], [0, 0.25, 1, 0], [0.5, 0, 0, 2]])
    p = write_matrix(tmp_path / "m.json", M)
    out = tmp_path / "S.json"
    code, rep = run(capsys, "williamson", p, "--method", method, "--out", out)
    assert code == 0 and rep["residuals"]["williamson"] < 1e-12
    S = io.load_matrix(out, expect=("symplectic",))
    lam = np.array(rep["outputs"]["spectrum"])
    assert np.allclose(S.T @ M @ S, np.diag(np.concatenate([lam, lam])), atol=1e-12)


def test_cli_pairdiag_and_hardy(tmp_path, capsys):
    A = write_matrix(tmp_path / "a.json", [[2.0]])
    B = write_matrix(tmp_path / "b.json", [[0.5]])
    rep = run(capsys, "pairdiag", A, B)[1]
    assert rep["outputs"]["lambda_diag"] == pytest.approx([1.0])
    assert run(capsys, "hardy", A, B)[1]["outputs"]["classification"] == "gaussian_only"
    B2 = write_matrix(tmp_path / "b2.json", [[1.0]])
    assert run(capsys, "hardy", A, B2)[1]["outputs"]["classification"] == "infeasible"


def test_cli_rs_check(tmp_path, capsys):
    p = write_matrix(tmp_path / "s.json", 0.5 * np.eye(2), "covariance")
    rep = run(capsys, "rs-check", p)[1]
    assert rep["outputs"]["passes"]
    p = write_matrix(tmp_path / "s2.json", 0.1 * np.eye(2), "covariance")
    assert not run(capsys, "rs-check", p)[1]["outputs"]["passes"]


def test_cli_hermite_wigner_pipeline(tmp_path, capsys):
    s = tmp_path / "h1.json"
    assert run(capsys, "hermite", "1", "--out", s)[0] == 0
    w, c = tmp_path / "w.json.gz", tmp_path / "w.csv"
    code, rep = run(capsys, "wigner", s, "--out", w, "--dump-csv", c)
    assert code == 0
    assert rep["outputs"]["min"] == pytest.approx(-1 / np.pi, rel=1e-9)
    assert rep["residuals"]["marginal_p"] < 1e-7
    assert io.load_wigner(w).values.shape == (1024, 1024)
    with open(c) as fh:
        rows = csv.reader(fh)
        assert next(rows) == ["x1", "p1", "value"]
        assert sum(1 for _ in rows) == 1024 * 1024


def test_cli_cross_wigner_and_translate(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "hermite", "0", "--points", "256", "--out", a)
    run(capsys, "hermite", "1", "--points", "256", "--out", b)
    rep = run(capsys, "cross-wigner", a, b)[1]
    assert abs(rep["outputs"]["total_re"]) < 1e-10
    t = tmp_path / "t.json"
    rep = run(capsys, "translate", a, "--z0", "0.5", "0.25", "--out", t)[1]
    assert rep["residuals"]["norm"] < 1e-8
    assert io.load_state(t).norm() == pytest.approx(1.0, abs=1e-8)


def test_cli_equiv(tmp_path, capsys):
    s = tmp_path / "g.json"
    run(capsys, "hermite", "0", "--out", s)
    A = write_matrix(tmp_path / "a.json", [[1.0]])
    rep = run(capsys, "equiv", s, A, A)[1]
    assert rep["outputs"]["consistent"] and rep["outputs"]["cond2_bounded"]


def test_cli_frame_map(tmp_path, capsys, rng):
    rep = run(capsys, "frame-map", "standard", "swapped", "--n", "2")[1]
    S = np.array(rep["outputs"]["S"])
    assert rep["residuals"]["span_ell"] < 1e-14 and S.shape == (4, 4)
    f = tmp_path / "f.json"
    io.write_json(f, io.frame_doc(random_frame(2, rng)))
    rep = run(capsys, "frame-map", "standard", f)[1]
    assert rep["residuals"]["symplectic"] < 1e-9 and rep["residuals"]["span_ell"] < 1e-9


def test_cli_convex(tmp_path, capsys):
    p = write_matrix(tmp_path / "m.json", np.eye(2))
    rep = run(capsys, "convex", "--family", "quadratic", "--matrix", p)[1]
    assert rep["outputs"]["john_capacity"] == pytest.approx(np.pi, rel=1e-6)
    rep = run(capsys, "convex", "--family", "quartic-radial")[1]
    assert not rep["outputs"]["passes_capacity_bound"]
    assert main(["convex", "--family", "quadratic"]) == 2


def test_cli_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    assert main(["spectrum", str(bad)]) == 2
    assert "symcap spectrum" in capsys.readouterr().err
    assert main(["spectrum", str(tmp_path / "missing.json")]) == 2
    odd = write_matrix(tmp_path / "odd.json", np.eye(3))
    assert main(["spectrum", str(odd)]) == 2
    neg = write_matrix(tmp_path / "neg.json", np.diag([1.0, -1.0]))
    assert main(["spectrum", str(neg)]) == 2
    ok = write_matrix(tmp_path / "ok.json", np.eye(2))
    assert main(["spectrum", str(ok), "--hbar", "-1"]) == 2
    s = tmp_path / "s.json"
    run(capsys, "hermite", "0", "--out", s)
    assert main(["wigner", str(s), "--hbar", "2"]) == 2
    assert main(["translate", str(s), "--z0", "30", "0"]) == 2
    with pytest.raises(SystemExit):
        main(["nonsense"])


def test_cli_numerical_failure_exit_code(tmp_path, capsys, monkeypatch):
    from symcap import cli
    from symcap.errors import DiagonalizationError

    def fail(M, method="eigh"):
        raise DiagonalizationError("no convergence")

    monkeypatch.setattr(cli, "williamson", fail)
    p = write_matrix(tmp_path / "m.json", np.eye(2))
    assert main(["spectrum", str(p)]) == 3
    assert "no convergence" in capsys.readouterr().err


def test_cli_spec_examples(tmp_path, capsys):
    I2 = write_matrix(tmp_path / "i.json", np.eye(2))
    rep = run(capsys, "spectrum", I2, "--hbar", "0.5")[1]
    assert rep["outputs"]["spectrum"] == pytest.approx([1.0])
    assert rep["outputs"]["capacity"] == pytest.approx(0.5 * np.pi)
    A = write_matrix(tmp_path / "a.json", np.diag([1.0, 0.25]))
    B = write_matrix(tmp_path / "b.json", np.eye(2))
    rep = run(capsys, "hardy", A, B)[1]
    assert rep["outputs"]["classification"] == "polynomial_gaussian"
    assert rep["outputs"]["eigenvalues"] == pytest.approx([1.0, 0.25])
    assert run(capsys, "hardy", I2, I2)[1]["outputs"]["classification"] == "gaussian_only"
    hbar = 0.8
    quarter = write_matrix(tmp_path / "q.json", hbar / 4 * np.eye(2), "covariance")
    assert not run(capsys, "rs-check", quarter, "--hbar", hbar)[1]["outputs"]["passes"]
    above = write_matrix(tmp_path / "p.json", hbar / 2 * np.eye(4) + np.diag([0.1, 0.2, 0.3, 0.4]),
                         "covariance")
    rep = run(capsys, "rs-check", above, "--hbar", hbar)[1]
    assert rep["outputs"]["passes"]
    assert rep["residuals"]["psd_margin"] > 0 and rep["residuals"]["spectrum_margin"] > 0
    rep = run(capsys, "convex", "--family", "quadratic", "--matrix", I2, "--hbar", hbar)[1]
    assert rep["outputs"]["lambda_Q"] == pytest.approx(2.0, rel=1e-8)
    assert rep["outputs"]["john_capacity"] == pytest.approx(np.pi * hbar, rel=1e-6)


def test_cli_truncated_state_file(tmp_path, capsys):
    s = tmp_path / "s.json"
    run(capsys, "hermite", "0", "--points", "256", "--out", s)
    text = s.read_text()
    s.write_text(text[: len(text) // 2])
    assert main(["wigner", str(s)]) == 2
    doc = json.loads(text)
    doc["values"] = doc["values"][:-10]
    s.write_text(json.dumps(doc))
    assert main(["wigner", str(s)]) == 2


def test_cli_report_is_deterministic_except_timing(tmp_path, capsys):
    p = write_matrix(tmp_path / "m.json", np.diag([2.0, 1.0, 0.5, 3.0]))
    r1 = run(capsys, "williamson", p, "--method", "schur")[1]
    r2 = run(capsys, "williamson", p, "--method", "schur")[1]
    r1.pop("timing"), r2.pop("timing")
    assert io.dumps(r1) == io.dumps(r2)


def test_cli_written_files_roundtrip_bit_identical(tmp_path, capsys):
    s = tmp_path / "s.json"
    run(capsys, "hermite", "2", "--points", "256", "--out", s)
    s2 = tmp_path / "s2.json"
    io.write_json(s2, io.state_doc(io.load_state(s)))
    assert s.read_bytes() == s2.read_bytes()
    w = tmp_path / "w.json"
    run(capsys, "wigner", s, "--out", w)
    w2 = tmp_path / "w2.json"
    io.write_json(w2, io.wigner_doc(io.load_wigner(w)))
    assert w.read_bytes() == w2.read_bytes()
    S = tmp_path / "S.json"
    run(capsys, "frame-map", "standard", "swapped", "--n", "2", "--out", S)
    assert io.load_matrix(S, expect=("symplectic",)).shape == (4, 4)


def test_cli_batch(tmp_path, capsys):
    p = write_matrix(tmp_path / "m.json", np.diag([4.0, 9.0]))
    jobs = tmp_path / "jobs.json"
    jobs.write_text(json.dumps({"jobs": [["spectrum", str(p)], ["capacity", str(p), "--hbar", "2"],
                                         ["spectrum", str(tmp_path / "missing.json")]]}))
    code = main(["batch", str(jobs)])
    doc = json.loads(capsys.readouterr().out)
    assert code == 2
    assert [j["exit_code"] for j in doc["jobs"]] == [0, 0, 2]
    assert doc["jobs"][0]["report"]["outputs"]["spectrum"] == pytest.approx([6.0])
    assert doc["jobs"][1]["report"]["hbar"] == 2.0
    jobs.write_text(json.dumps({"jobs": [["spectrum", str(p)]]}))
    assert main(["batch", str(jobs)]) == 0
    capsys.readouterr()
    jobs.write_text(json.dumps({"jobs": "spectrum"}))
    assert main(["batch", str(jobs)]) == 2
