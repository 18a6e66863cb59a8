import pytest

from _cases import CALC_CASES, case
from threadloop.cli import main
from threadloop.engine import get_op, run_op
from threadloop.literal import format_array

GOLDEN = __import__("pathlib").Path(__file__).parent / "golden"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_run_linscale(capsys):
    code, out, _ = run(capsys, "run", "--op", "linscale", "--arg", "a=double[3]{1 2 3}",
                       "--arg", "b=double[]{2}", "--arg", "c=double[3]{4 5 6}")
    assert code == 0
    assert out == "double[3]{6 9 12}\n"


def test_run_increments_empty(capsys):
    code, out, _ = run(capsys, "run", "--op", "increments", "--arg", "in=double[1]{9}")
    assert (code, out) == (0, "double[0]{}\n")


def test_run_countbad(capsys):
    code, out, _ = run(capsys, "run", "--op", "countbad", "--arg", "in=short[4]{1 BAD 3 BAD}")
    assert (code, out) == (0, "short[]{2}\n")


def test_run_multiple_outputs(capsys):
    code, out, _ = run(capsys, "run", "--op", "multisum", "--arg", "im=double[2,2]{1 2 3 4}")
    assert out.splitlines() == ["double[]{2.5}", "double[2]{1.5 3.5}", "double[2]{2 3}"]


def test_run_otherpars(capsys):
    code, out, _ = run(capsys, "run", "--op", "pp_mandel", "--arg", "c=double[2]{0 0}",
                       "--other", "max_it=1000")
    assert (code, out) == (0, "double[]{0}\n")


def test_run_dataflow(capsys):
    code, out, _ = run(capsys, "run", "--op", "FtoC", "--arg", "PARENT=double[1]{212}")
    assert (code, out) == (0, "double[1]{100}\n")


def test_run_engine_error_exit_1(capsys):
    code, _, err = run(capsys, "run", "--op", "index", "--arg", "src=double[3]{1 2 3}",
                       "--arg", "dex=indx[]{5}", "--check-bounds")
    assert code == 1 and "IndexOutOfBounds" in err


def test_usage_errors(capsys):
    assert run(capsys, "run")[0] == 2
    assert run(capsys, "run", "--op", "linscale", "--arg", "nonsense")[0] == 2
    assert run(capsys, "run", "--op", "pp_mandel", "--arg", "c=double[2]{0 0}",
               "--other", "nope=1")[0] == 2
    assert run(capsys, "bogus")[0] == 2


def test_unknown_op(capsys):
    code, _, err = run(capsys, "run", "--op", "nope")
    assert code == 1 and "UnknownOp" in err


def test_expand_golden(capsys):
    code, out, _ = run(capsys, "expand", "--op", "linscale", "--type", "double")
    assert code == 0
    assert out == (GOLDEN / "linscale_good_double.txt").read_text()
    code, out, _ = run(capsys, "expand", "--op", "recip", "--type", "float", "--bad")
    assert out == (GOLDEN / "recip_bad_float.txt").read_text()


def test_expand_errors(capsys):
    code, _, err = run(capsys, "expand", "--op", "cartND", "--type", "byte")
    assert code == 1 and "TypeNotInGenericList" in err
    code, _, err = run(capsys, "expand", "--op", "linscale", "--type", "double", "--bad")
    assert code == 1 and "NoBadVariant" in err


def test_plan_index1d(capsys):
    code, out, _ = run(capsys, "plan", "--op", "index1d", "--shapes", "src=[10,20];dex=indx[]")
    assert code == 0
    assert "output=[1,20]" in out.splitlines()
    assert "thread_dims=[20]" in out


def test_plan_rule3(capsys):
    code, _, err = run(capsys, "plan", "--op", "add", "--shapes", "a=[2];b=[3]")
    assert code == 1
    assert "rule 3" in err and "ThreadDimMismatch" in err


def test_plan_scalars(capsys):
    code, out, _ = run(capsys, "plan", "--op", "add", "--shapes", "a=[];b=[]")
    assert code == 0 and "thread_dims=[]" in out


def test_plan_bad_shapes(capsys):
    assert run(capsys, "plan", "--op", "add", "--shapes", "a=2,3")[0] == 2
    assert run(capsys, "plan", "--op", "add", "--shapes", "zz=[1]")[0] == 2


def test_ops_file(tmp_path, capsys):
    f = tmp_path / "mine.ops"
    f.write_text("op twice\npars: a(); [o]b()\ncode {\n    $b() = 2 * $a();\n}\nend\n")
    code, out, _ = run(capsys, "run", "--ops", str(f), "--op", "twice", "--arg", "a=int[2]{3 4}")
    assert (code, out) == (0, "int[2]{6 8}\n")
    assert run(capsys, "run", "--ops", str(tmp_path / "missing.ops"), "--op", "x")[0] == 1


def _other_flags(others):
    flags = []
    for k, v in (others or {}).items():
        flags += ["--other", f"{k}={v}"]
    return flags


@pytest.mark.parametrize("name", sorted(CALC_CASES))
def test_cli_matches_library(name, capsys):
    args, others = case(name)
    argv = ["run", "--op", name]
    for k, a in args.items():
        argv += ["--arg", f"{k}={format_array(a)}"]
    argv += _other_flags(others)
    args, others = case(name)
    res = run_op(get_op(name), args, others)
    res = res if isinstance(res, tuple) else (res,)
    code, out, _ = run(capsys, *argv)
    assert code == 0
    assert out.splitlines() == [format_array(r) for r in res]
