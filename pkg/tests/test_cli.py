import io
import shutil
import subprocess
import sys

import pytest

from latspec.catalog import default_catalog_dir
from latspec.cli import main


def run(*argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], out=out)
    return code, out.getvalue()


def test_closure_l92(runs_dir):
    code, out = run("closure", "--run", runs_dir / "l92.run")
    assert code == 0 and out == "n=92 atoms=6 coatoms=3\n"


def test_closure_dumps(runs_dir):
    code, out = run("closure", "--run", runs_dir / "l92.run", "--dump", "tuples")
    lines = out.splitlines()
    assert len(lines) == 93 and lines[1] == "000" and lines[-1] == "111"
    code, out = run("closure", "--run", runs_dir / "l92.run", "--dump", "dot")
    assert code == 0 and out.count("->") > 92 and out.rstrip().endswith("}")


def test_dot_limit(runs_dir, capsys):
    code, _ = run("closure", "--run", runs_dir / "ds_mn5.run", "--dump", "dot")
    assert code == 2 and "limited to 200" in capsys.readouterr().err


def test_catalog_directory_flag(runs_dir):
    code, out = run("closure", "--catalog", default_catalog_dir(), "--run", runs_dir / "l92.run")
    assert code == 0 and out.startswith("n=92 ")


def test_spectrum_expect(runs_dir, capsys):
    assert run("spectrum", "--mode", "atoms", "--run", runs_dir / "as_mn5.run", "--expect", "{1,2,3}")[0] == 0
    code, out = run("spectrum", "--mode", "atoms", "--run", runs_dir / "as_mn5.run", "--expect", "{1,2}")
    assert code == 1 and "AS={1,2,3}" in out
    assert "expected {1,2}" in capsys.readouterr().err


def test_spectrum_machine_output_is_job_independent(runs_dir):
    args = ["spectrum", "--mode", "double", "--run", runs_dir / "ds_mn5.run", "--format", "machine", "--log-subsets"]
    one = run(*args, "--jobs", "1")
    eight = run(*args, "--jobs", "8")
    assert one == eight
    assert one[1].splitlines()[-1].startswith("DS={")
    assert one[1].splitlines()[0].startswith("mask=1 n=")


def test_free_expect(runs_dir):
    assert run("free", "--run", runs_dir / "free_modular.run", "--expect", "28") == (0, "n=28 atoms=3 coatoms=3\n")
    assert run("free", "--run", runs_dir / "free_modular.run", "--expect", "27")[0] == 1
    assert run("free", "--run", runs_dir / "ds_ml4.run", "--drop", "M3", "--expect", "821")[0] == 0


def test_budget_exceeded_exits_one(runs_dir, capsys):
    code, _ = run("closure", "--run", runs_dir / "l92.run", "--budget", "50")
    assert code == 1 and "budget 50" in capsys.readouterr().err


def test_usage_errors_exit_two(runs_dir, tmp_path, capsys):
    assert run("closure", "--run", tmp_path / "nope.run")[0] == 2
    bad = tmp_path / "bad.run"
    bad.write_text("\\lattice=N5 \\with x=a y=b\n")
    assert run("closure", "--run", bad)[0] == 2
    assert f"{bad}:1: column" in capsys.readouterr().err
    with pytest.raises(SystemExit) as e:
        run("spectrum", "--run", runs_dir / "as_mn5.run", "--jobs", "0")
    assert e.value.code == 2
    with pytest.raises(SystemExit):
        run()


def test_unknown_lattice_in_run_file_exits_one(tmp_path, capsys):
    bad = tmp_path / "bad.run"
    bad.write_text("\\lattice=Q9 \\with x=a y=b z=c\n")
    assert run("closure", "--run", bad)[0] == 1
    assert "Q9" in capsys.readouterr().err


def test_validate(runs_dir, tmp_path):
    code, out = run("validate", "--run", runs_dir / "as_mh6.run")
    assert code == 0 and "17 assignments, 20 constraints" in out
    weak = tmp_path / "weak.run"
    weak.write_text("\\lattice=N5 \\with x=a y=b z=1\n")
    code, out = run("validate", "--run", weak)
    assert code == 1 and "does not generate N5" in out


def test_catalog_verify_clean_and_broken(tmp_path):
    code, out = run("catalog-verify", default_catalog_dir())
    assert code == 0 and out.rstrip().endswith("27 entries, 0 mismatches")
    d = tmp_path / "cat"
    shutil.copytree(default_catalog_dir(), d)
    f = d / "basic.lat"
    text = f.read_text()
    assert "covers 0<a 0<c a<b b<1 c<1" in text
    f.write_text(text.replace("covers 0<a 0<c a<b b<1 c<1", "covers 0<a 0<c a<b c<1"))
    code, out = run("catalog-verify", d)
    assert code == 1
    bad = [l for l in out.splitlines() if l.startswith("MISMATCH")]
    assert len(bad) == 1 and bad[0].startswith("MISMATCH N5:")


def test_genrunfile(tmp_path, runs_dir):
    dst = tmp_path / "g.run"
    assert run("genrunfile", "--lattices", "C2,M3,N5", "--mode", "atoms", "-o", dst)[0] == 0
    assert dst.read_text() == (runs_dir / "as_mn5.run").read_text()
    code, out = run("genrunfile", "--lattices", "C2", "--no-constraints")
    assert code == 0 and len(out.splitlines()) == 6
    assert run("genrunfile", "--lattices", "C2,Q1")[0] == 2


def test_dual(runs_dir):
    code, out = run("dual", "L4")
    assert code == 0 and out.startswith("lattice L4^d\n") and out.rstrip().endswith("end")
    code, out = run("dual", "N5", "--dot")
    assert code == 0 and out.startswith('digraph "N5^d"')


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "latspec.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("latspec ")
    exe = shutil.which("latspec")
    if exe:
        assert subprocess.run([exe, "--help"], capture_output=True).returncode == 0
