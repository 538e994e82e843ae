import pytest

from stretchlab import groups, spectra


@pytest.fixture(scope="session")
def baseline_spec():
    return groups.schottky_fuchsian(2, 4.0, seed=0)


@pytest.fixture(scope="session")
def baseline_cert(baseline_spec):
    return groups.verify_ping_pong(baseline_spec)


@pytest.fixture(scope="session")
def baseline_ps12(baseline_spec):
    return spectra.build_paired_spectrum(baseline_spec, 12)


@pytest.fixture(scope="session")
def baseline_ps8(baseline_ps12):
    return spectra.restrict(baseline_ps12, 8)
