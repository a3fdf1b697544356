import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

ROOT = Path(__file__).resolve().parents[1]
WELLBORE = ROOT / "projects" / "wellbore"

# criterion number -> (passed, detail), filled by the acceptance tests
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")


@pytest.fixture
def record():
    def _record(n: int, ok: bool, detail: str):
        ACCEPTANCE[n] = (ok, detail)
        print(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
        assert ok, detail
    return _record


@pytest.fixture(scope="session")
def wellbore():
    from obdac.mapping.model import ConstrainedSpec
    from obdac.mapping.parse import load_constraints, load_spec
    from obdac.relalg.schema import load_instance
    from obdac.sparql.parser import load_query

    spec = load_spec(WELLBORE / "schema.txt", WELLBORE / "ontology.ttl", WELLBORE / "mappings.txt")
    cspec = ConstrainedSpec(spec, load_constraints(WELLBORE / "constraints.txt", spec.prefixes))
    inst = load_instance(spec.schema, WELLBORE / "data")
    queries = {p.stem: load_query(p, spec.prefixes) for p in sorted((WELLBORE / "queries").glob("*.rq"))}
    return cspec, inst, queries
