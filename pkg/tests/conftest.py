from __future__ import annotations

from pathlib import Path

import pytest

from fluxriver.core import WEIGHTING_FLAGS, WeightingScheme
from fluxriver.ingest import bundle_from_json
from fluxriver.synth import generate, random_spec

HERE = Path(__file__).resolve().parent
FIXTURES = HERE / "fixtures"
GOLDEN = HERE / "golden"
APPASSIONATA = FIXTURES / "appassionata"

N_RANDOM = 500


def all_schemes() -> list[WeightingScheme]:
    out = []
    for flag in WEIGHTING_FLAGS:
        bases = ("precision", "recall") if flag.startswith("alpha") else ("precision",)
        for basis in bases:
            for normalized in (False, True):
                out.append(WeightingScheme.from_flag(flag, normalized=normalized, basis=basis))
    return out


@pytest.fixture(scope="session")
def random_bundles():
    return [generate(random_spec(seed)) for seed in range(N_RANDOM)]


@pytest.fixture(scope="session")
def appassionata():
    return bundle_from_json((APPASSIONATA / "bundle.json").read_text(encoding="utf-8"))


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py" in nodeid and getattr(rep, "when", "call") == "call":
                name = nodeid.split("::")[-1]
                lines.append((name, "PASS" if outcome == "passed" else "FAIL"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for name, status in sorted(lines):
            terminalreporter.write_line(f"{status}  {name}")
