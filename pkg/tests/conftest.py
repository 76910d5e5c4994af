import pytest

from heavytail.synthetic import DatasetSpec, make_records, records_to_csv

SMALL = DatasetSpec(n_suppliers=20_000, n_authorities=20_000, n_levels=5_000)


@pytest.fixture(scope="session")
def small_register(tmp_path_factory):
    """A synthetic register with known laws, written once per session."""
    path = tmp_path_factory.mktemp("register") / "tenders.csv"
    path.write_text(records_to_csv(make_records(SMALL, seed=1)))
    return path


@pytest.fixture(scope="session")
def full_register(tmp_path_factory):
    path = tmp_path_factory.mktemp("register") / "tenders_full.csv"
    path.write_text(records_to_csv(make_records(DatasetSpec(), seed=2024)))
    return path


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
