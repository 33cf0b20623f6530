import sys
import json
from pathlib import Path

from neronheights.intersect import divisors_from_json
from neronheights.model import curve_from_json, model_from_json
from neronheights.theta import period_from_json

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def load(example: str, name: str) -> dict:
    return json.loads((FIXTURES / example / name).read_text())


class Example:
    """All committed fixtures of one worked example."""

    def __init__(self, name: str):
        self.name = name
        self.dir = FIXTURES / name
        self.curve = curve_from_json(load(name, "curve.json"))
        raw = load(name, "divisors.json")
        self.divisors = divisors_from_json(raw)
        self.points = {k: tuple(v["point"]) for k, v in raw["pieces"].items() if "point" in v}
        self.models = {}
        for path in sorted(self.dir.glob("model_*.json")):
            model = model_from_json(json.loads(path.read_text()), self.curve)
            self.models[model.p] = model
        period = self.dir / "period.json"
        self.period = period_from_json(json.loads(period.read_text())) if period.exists() else None


_cache = {}


def example(name: str) -> Example:
    if name not in _cache:
        _cache[name] = Example(name)
    return _cache[name]


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        status, title, notes, seconds = results[number]
        terminalreporter.write_line(f"criterion {number}: {status}  {title} ({seconds:.1f}s)")
        for note in notes:
            terminalreporter.write_line(f"    {note}")
