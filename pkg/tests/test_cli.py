import csv

import numpy as np
import pytest

from invroot.cli import main
from invroot.matgen import load_matrix, save_matrix
from invroot.solver import read_trace_csv
from invroot.sweep import SUMMARY_HEADER, read_summary


@pytest.fixture
def m64(tmp_path):
    path = tmp_path / "m64.mtx"
    assert main(["gen", "--n", "64", "--seed", "3", "--out", str(path)]) == 0
    return path


def plateau_from(out):
    line = next(ln for ln in out.splitlines() if ln.startswith("plateau="))
    return float(line.split()[0].split("=")[1])


def test_gen_is_reproducible(tmp_path, capsys):
    a, b = tmp_path / "a.mtx", tmp_path / "b.mtx"
    assert main(["gen", "--n", "128", "--density", "0.25", "--seed", "7", "--out", str(a)]) == 0
    assert main(["gen", "--n", "128", "--density", "0.25", "--seed", "7", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert load_matrix(a).shape == (128, 128)
    assert "density=" in capsys.readouterr().out


@pytest.mark.parametrize("density", ["0", "1.5", "0.001"])
def test_gen_bad_density(tmp_path, capsys, density):
    assert main(["gen", "--n", "16", "--density", density, "--out", str(tmp_path / "x.mtx")]) == 2
    assert "error" in capsys.readouterr().err


def test_solve_identity(tmp_path, capsys):
    save_matrix(np.eye(4), tmp_path / "i.mtx")
    trace = tmp_path / "t.csv"
    assert main(["solve", "--matrix", str(tmp_path / "i.mtx"), "--p", "2", "--trace", str(trace)]) == 0
    out = capsys.readouterr().out
    assert "outcome=converged iterations=1" in out
    recs = read_trace_csv(trace)
    assert [r.k for r in recs] == [0, 1]
    assert (tmp_path / "t.json").exists()


def test_solve_half_vs_exact(m64, capsys):
    assert main(["solve", "--matrix", str(m64), "--max-iters", "20"]) == 0
    exact = plateau_from(capsys.readouterr().out)
    assert main(["solve", "--matrix", str(m64), "--arith", "float:e11m10", "--max-iters", "20"]) == 0
    out = capsys.readouterr().out
    assert "outcome=diverged" not in out and "outcome=non_finite" not in out
    assert plateau_from(out) > exact


def test_solve_coarse_fixed_point(m64, capsys):
    code = main(["solve", "--matrix", str(m64), "--arith", "fixed:i13f2", "--max-iters", "15"])
    out = capsys.readouterr().out
    assert code == 1 or plateau_from(out) > 0.1


def test_solve_reference_and_escalation(m64, tmp_path, capsys):
    trace = tmp_path / "e.csv"
    argv = ["solve", "--matrix", str(m64), "--arith", "half", "--escalate", "exact", "--reference", "oracle", "--trace", str(trace)]
    assert main(argv) == 0
    out = capsys.readouterr().out
    assert "outcome=converged" in out
    assert "escalated_at=" in out
    assert all(r.error_fro is not None for r in read_trace_csv(trace))


def test_solve_diverged_exit_code(tmp_path, capsys):
    from invroot.matgen import OverlapSpec, gen_overlap

    save_matrix(gen_overlap(OverlapSpec(n=32, seed=1, cond=50.0)), tmp_path / "bad.mtx")
    assert main(["solve", "--matrix", str(tmp_path / "bad.mtx"), "--p", "1", "--max-iters", "400"]) == 1
    assert "outcome=diverged" in capsys.readouterr().out


@pytest.mark.parametrize(
    "extra",
    [["--arith", "quad"], ["--p", "0"], ["--escalate", "half"], ["--max-iters", "0"]],
)
def test_solve_usage_errors(m64, extra):
    assert main(["solve", "--matrix", str(m64)] + extra) == 2


def test_solve_missing_and_malformed_file(tmp_path):
    assert main(["solve", "--matrix", str(tmp_path / "nope.mtx")]) == 2
    (tmp_path / "bad.mtx").write_text("hello\n")
    assert main(["solve", "--matrix", str(tmp_path / "bad.mtx")]) == 2


def test_solve_asymmetric_is_usage_error(tmp_path):
    save_matrix(np.array([[1.0, 0.2], [0.1, 1.0]]), tmp_path / "a.mtx")
    assert main(["solve", "--matrix", str(tmp_path / "a.mtx")]) == 2


def test_sweep_counts_and_monotone(m64, tmp_path, capsys):
    out = tmp_path / "sw"
    argv = ["sweep", "--matrix", str(m64), "--mode", "storage-only", "--formats", "float:e11m6,float:e11m10,float:e11m14", "--max-iters", "15", "--out", str(out)]
    assert main(argv) == 0
    rows = read_summary(out / "summary.csv")
    assert len(rows) == 3
    assert len(list(out.glob("trace_*.csv"))) == 3
    assert len(list(out.glob("trace_*.json"))) == 3
    with open(out / "summary.csv") as fh:
        assert next(csv.reader(fh)) == SUMMARY_HEADER
    plateaus = [r["plateau"] for r in rows]
    assert plateaus == sorted(plateaus, reverse=True)
    for path in out.glob("trace_*.csv"):
        recs = read_trace_csv(path)
        assert all(r.residual_fro >= 0 for r in recs)
        assert [r.k for r in recs] == list(range(len(recs)))


def test_sweep_generated_with_jobs_is_byte_identical(tmp_path):
    base = ["sweep", "--n", "24", "--p", "1,2", "--mode", "all-arithmetic,storage-only", "--formats", "half,fixed:i13f10", "--max-iters", "8"]
    assert main(base + ["--out", str(tmp_path / "a")]) == 0
    assert main(base + ["--jobs", "2", "--out", str(tmp_path / "b")]) == 0
    for f in sorted((tmp_path / "a").iterdir()):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()
    assert len(read_summary(tmp_path / "a" / "summary.csv")) == 8


def test_sweep_reference_column(m64, tmp_path):
    out = tmp_path / "r"
    assert main(["sweep", "--matrix", str(m64), "--formats", "half", "--max-iters", "4", "--reference", "oracle", "--out", str(out)]) == 0
    (trace,) = out.glob("trace_*.csv")
    assert all(r.error_fro is not None for r in read_trace_csv(trace))


@pytest.mark.parametrize(
    "extra",
    [
        ["--formats", ""],
        ["--formats", "half", "--mode", ""],
        ["--formats", "half", "--p", ""],
        ["--formats", "half", "--mode", "sideways"],
        ["--formats", "nonsense"],
        ["--formats", "half", "--jobs", "0"],
    ],
)
def test_sweep_usage_errors(m64, tmp_path, extra):
    assert main(["sweep", "--matrix", str(m64), "--out", str(tmp_path / "x")] + extra) == 2


def test_sweep_needs_matrix_source(tmp_path):
    assert main(["sweep", "--formats", "half", "--out", str(tmp_path / "x")]) == 2


def test_validate(tmp_path, m64, capsys):
    save_matrix(np.eye(3), tmp_path / "i.mtx")
    assert main(["validate", "--matrix", str(tmp_path / "i.mtx")]) == 0
    assert "frobenius_gap=0.000000e+00" in capsys.readouterr().out

    save_matrix(np.diag([4.0, 16.0]), tmp_path / "d.mtx")
    assert main(["validate", "--matrix", str(tmp_path / "d.mtx"), "--p", "2", "--gap-tol", "1e-12"]) == 0
    capsys.readouterr()

    assert main(["validate", "--matrix", str(m64), "--gap-tol", "1e-8"]) == 0
    out = capsys.readouterr().out
    assert "residual_oracle=" in out and "residual_iterative=" in out


def test_validate_not_spd(tmp_path, capsys):
    save_matrix(np.diag([1.0, -1.0]), tmp_path / "n.mtx")
    assert main(["validate", "--matrix", str(tmp_path / "n.mtx")]) == 1


def test_validate_gap_too_large(tmp_path):
    save_matrix(np.diag([4.0, 16.0]), tmp_path / "d.mtx")
    assert main(["validate", "--matrix", str(tmp_path / "d.mtx"), "--max-iters", "1"]) == 1


def test_argparse_usage_exit():
    with pytest.raises(SystemExit) as exc:
        main(["solve"])
    assert exc.value.code == 2
