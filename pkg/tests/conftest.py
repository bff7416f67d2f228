import json

import pytest

from usescreen import Worksheet, bundled_path, parse_worksheet

#: Matrix row order of the office-conversion worked example.
OFFICE_ROWS = ("urban-coworking", "light-mixed-use", "multifamily-btr", "microliving")


def load_fixture(name: str) -> Worksheet:
    return parse_worksheet(bundled_path(name).read_text(encoding="utf-8"))


@pytest.fixture
def office_worksheet() -> Worksheet:
    return load_fixture("office_conversion.json")


@pytest.fixture
def office_set(office_worksheet):
    return office_worksheet.evaluation_set()


@pytest.fixture
def office_doc() -> dict:
    return json.loads(bundled_path("office_conversion.json").read_text(encoding="utf-8"))


def pytest_runtest_logreport(report):
    # One visible verdict line per acceptance criterion.
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    print(f"\nACCEPTANCE {name}: {'PASS' if report.passed else 'FAIL'}", flush=True)
