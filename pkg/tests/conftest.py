import pathlib

import pytest

DATA = pathlib.Path(__file__).resolve().parents[1] / "src" / "contextfield" / "data"

CARS_CSV = DATA / "cars_synthetic.csv"
UNIVERSITIES_CSV = DATA / "universities_synthetic.csv"


@pytest.fixture(scope="session")
def cars_dataset():
    from contextfield import load_csv

    return load_csv(str(CARS_CSV))


@pytest.fixture(scope="session")
def universities_dataset():
    from contextfield import load_csv

    return load_csv(str(UNIVERSITIES_CSV))
