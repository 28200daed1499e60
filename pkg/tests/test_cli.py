import csv
import io
import json
import math
import os
import subprocess
import sys

import jsonschema
import pytest

from abelint import cli
from abelint.chebyshev import MaxZeroReport

FAST = {
    "classify": "classify --lambda 0.5 --mu 0.25",
    "curves": "curves --n 4",
    "integrate": "integrate --lambda 0.5 --mu 0.25 --annulus O1 --h hc+ --offset 1e-8 --k 0",
    "continue": "continue --lambda-re -1 --lambda-im 0.5 --n 2",
    "zeros": "zeros --lambda 0.5 --mu 0.25 --annulus O1 --a0 -0.75 --a1 1 --grid-size 200",
    "maxzeros": "maxzeros --lambda 0.5 --mu 0.25 --grid-size 200 --directions 36",
    "asymptote": "asymptote --lambda 0.5 --mu 0.25",
    "delta": "delta --lambda 0.5 --mu 0.25 --n 4",
    "winding": "winding --lambda 0.5 --mu 0.25 --r 1e-3",
    "cyclicity": "cyclicity",
    "nocheb": "nocheb --genus 2",
    "scan": "scan --region gamma_left --samples 1 --grid-size 150",
}


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(argv.split() if isinstance(argv, str) else argv, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture(scope="module")
def outputs():
    return {name: run(cmd) for name, cmd in FAST.items()}


@pytest.mark.parametrize("name", sorted(FAST))
def test_output_validates_against_schema(outputs, name):
    code, out, err = outputs[name]
    assert code == 0, err
    doc = json.loads(out)
    assert doc["command"] == name
    jsonschema.validate(doc, cli.load_schema(name))


@pytest.mark.parametrize("name", ["classify", "integrate", "zeros", "scan", "cyclicity"])
def test_byte_identical_reruns(outputs, name):
    assert run(FAST[name])[1] == outputs[name][1]


def test_alternative_shapes_validate():
    for cmd in ("delta --lambda 0.5 --mu 0.25 --critical",
                "asymptote --lambda 0.5 --mu 0.25 --end inf --n 16",
                "classify --lambda-re 2 --lambda-im 0.3",
                "integrate --cf 0.1,0.05,-0.2 --h 0.001 --k 2"):
        code, out, err = run(cmd)
        assert code == 0, err
        doc = json.loads(out)
        jsonschema.validate(doc, cli.load_schema(doc["command"]))


def test_classify_example(outputs):
    res = json.loads(outputs["classify"][1])["result"]
    assert res["region"] == "RealAboveGamma" and len(res["annuli"]) == 3


def test_integrate_example(outputs):
    (sample,) = json.loads(outputs["integrate"][1])["result"]["samples"]
    assert sample["val_re"] == pytest.approx(2 * math.pi / math.sqrt(0.5 * 0.75), rel=1e-6)


def test_zeros_example(outputs):
    assert json.loads(outputs["zeros"][1])["result"]["count"] <= 1


@pytest.mark.parametrize(
    "argv",
    [
        "classify --lambda-re 1 --lambda-im 0.5 --mu 0.3",
        "classify --lambda 0.5",
        "classify --lambda 0.2 --mu 0.5",
        "classify --lambda nan --mu 0.1",
        "classify --lambda 0.5 --mu 0.25 --bogus",
        "integrate --lambda 0.5 --mu 0.25 --h sideways",
        "integrate --lambda 0.5 --mu 0.25 --h 1.0",
        "integrate --lambda 0.5 --mu 0.25 --h 0.1 --tol 0.5",
        "integrate --lambda-re -1 --lambda-im 0.5 --annulus OE --h 0.1",
        "zeros --lambda 0.5 --mu 0.25 --a0 0 --a1 0",
        "scan --region nowhere",
        "frobnicate",
    ],
)
def test_input_errors_exit_1(argv):
    code, out, err = run(argv)
    assert code == 1 and out == "" and err.startswith("abelint: ")


def test_numerical_failure_exit_2(monkeypatch):
    def boom(*a, **k):
        from abelint.quadrature import QuadratureError

        raise QuadratureError("no convergence")

    monkeypatch.setattr(cli, "max_zero_count", boom)
    assert run("maxzeros --lambda 0.5 --mu 0.25 --grid-size 50")[0] == 2


def test_bound_violation_exit_3(monkeypatch):
    monkeypatch.setattr(cli, "max_zero_count", lambda *a, **k: MaxZeroReport(2, [(0.0, 1.0)], []))
    code, out, err = run("maxzeros --lambda 0.5 --mu 0.25 --grid-size 50")
    assert code == 3 and "bound violated" in err
    # the same count on a non-exceptional annulus is fine
    assert run("maxzeros --lambda 0.5 --mu 0.25 --annulus OMu --grid-size 50")[0] == 0


def test_csv_formats():
    _, out, _ = run("curves --n 3 --format csv")
    assert out.splitlines()[0] == "curve,re_lambda,im_lambda,mu"
    _, out, _ = run("integrate --lambda 0.5 --mu 0.25 --grid 3 --k 0 --k 1 --format csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == ["h_re", "h_im", "k", "val_re", "val_im", "err", "method"] and len(rows) == 6
    _, out, _ = run(FAST["scan"] + " --format csv")
    assert out.splitlines()[0] == "re_lambda,im_lambda,mu,annulus,max_zeros,status"


def test_output_file_written_atomically(tmp_path):
    target = tmp_path / "c.json"
    code, out, _ = run(["classify", "--lambda", "0.5", "--mu", "0.25", "--output", str(target)])
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["command"] == "classify"
    assert sorted(os.listdir(tmp_path)) == ["c.json"]


def test_nan_and_complex_serialization():
    text = cli.render_json("x", {}, {"a": float("nan"), "z": 1 + 2j, "r": 3 + 0j})
    assert json.loads(text)["result"] == {"a": None, "z": {"re": 1.0, "im": 2.0}, "r": 3.0}


def test_plot_flag(tmp_path):
    pytest.importorskip("matplotlib")
    fig = tmp_path / "curves.png"
    code, _, err = run(["curves", "--n", "5", "--plot", str(fig)])
    assert code == 0, err
    assert fig.stat().st_size > 1000


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "abelint", "classify", "--lambda", "0.5", "--mu", "0.25"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and json.loads(res.stdout)["version"]
