"""Shared fixtures: small synthetic records and corpora."""

import numpy as np
import pytest

from ecoride import synthgen, telemetry


def make_record(n=1024, driver_id="d0", seed=0, speed=90.0):
    """Minimal uniform 32 Hz record with all channels present."""
    rng = np.random.default_rng(seed)
    channels = {
        "SWA": 10.0 * rng.standard_normal(n),
        "VS": np.full(n, speed),
        "ERPM": 2500.0 + 100.0 * rng.standard_normal(n),
        "PGP": np.clip(50.0 + 10.0 * rng.standard_normal(n), 0, 100),
        "GP": np.clip(150.0 + 30.0 * rng.standard_normal(n), 0, 300),
        "BP": np.zeros(n),
        "XACC": 0.5 * rng.standard_normal(n),
        "YACC": 0.5 * rng.standard_normal(n),
        "ZACC": 0.3 * rng.standard_normal(n),
        "FUEL": 3.0 + 0.2 * rng.standard_normal(n),
    }
    return telemetry.DriveRecord(driver_id=driver_id, channels=channels)


@pytest.fixture
def record():
    return make_record()


@pytest.fixture
def windows(record):
    return telemetry.split_windows(record)


@pytest.fixture(scope="session")
def small_corpus():
    """Fast 9-style grid (120 s records) reused across tests."""
    return [synthgen.generate(spec, driver_id=label)
            for label, spec in synthgen.style_grid(base_seed=42, duration=120.0)]
