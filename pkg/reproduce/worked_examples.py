"""Recompute the worked examples through the command-line interface.

    python reproduce/worked_examples.py [torsion|rank1|cartan|ell37a ...]

Each height goes through ``neronheights height``; regulators go through
``neronheights regulator`` with an input file built from those heights.
"""
import json
import sys
import tempfile
from pathlib import Path

from neronheights.cli import run

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"


def height(name, D, E):
    d = FIXTURES / name
    args = ["height", "--assert-nonspecial", "--curve", str(d / "curve.json"),
            "--divisors", str(d / "divisors.json"), "--period", str(d / "period.json"), "--pair", D, E]
    for model in sorted(d.glob("model_*.json")):
        args += ["--model", f"{model.stem.split('_')[1]}={model}"]
    code, out = run(args)
    if code:
        raise SystemExit(f"{name} {D} {E}: exit {code}: {out.get('error')}")
    finite = {p: v["local_pairing"]["exact_rational"] for p, v in out["places"].items() if p != "inf"}
    print(f"{name:8} h({D}, {E}) = {float(out['height']['value']):.14g}  m_p = {finite}  "
          f"<,>_inf = {float(out['places']['inf']['local_pairing']['value']):.10g}")
    return out["height"]["value"]


def regulator(pairs):
    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
        json.dump({"schema": 1, **pairs}, fh)
    code, out = run(["regulator", "--input", fh.name])
    Path(fh.name).unlink()
    if code:
        raise SystemExit(f"regulator: exit {code}: {out.get('error')}")
    return out


def torsion():
    height("torsion", "D", "E")


def rank1():
    de, fg = height("rank1", "D", "E"), height("rank1", "F", "G")
    # D = 17 g, E = 255 g, F = -69 g, G = 18 g
    out = regulator({"rank": 1, "labels": ["g"], "observations": [
        {"a": [17], "b": [255], "value": de}, {"a": [-69], "b": [18], "value": fg}]})
    print(f"rank1    regulator = {float(out['determinant']['value']):.10g}")


def cartan():
    labels = ["D1", "D2", "D3"]
    pairs = [{"a": labels[i], "b": labels[j], "value": height("cartan", labels[i], f"E{i + 1}{j + 1}")}
             for i in range(3) for j in range(3)]
    out = regulator({"labels": labels, "pairs": pairs})
    print("cartan   gram =", out["gram"])
    print(f"cartan   regulator = {float(out['determinant']['value']):.10g}")
    code, bsd = run(["bsd-check", "--L-star", "0.76825", "--regulator", out["determinant"]["value"],
                     "--real-period", "79.444", "--tamagawa", "1", "--torsion", "1"])
    print(f"cartan   analytic Sha = {bsd['sha_estimate']['value']}")


def ell37a():
    for n in range(1, 5):
        height("ell37a", f"D{n}", f"E{n}")


EXAMPLES = {"torsion": torsion, "rank1": rank1, "cartan": cartan, "ell37a": ell37a}

if __name__ == "__main__":
    for name in sys.argv[1:] or EXAMPLES:
        EXAMPLES[name]()
