"""Shared fixtures: repo paths, the shipped catalog, and a baseline sim config."""

from pathlib import Path

import pytest

from placesim.catalog import load_catalog, load_networks
from placesim.kinematics import mph_to_mps
from placesim.sim import DetectionModel, SimConfig

REPO_ROOT = Path(__file__).resolve().parent.parent
CONFIGS = REPO_ROOT / "configs"


@pytest.fixture(scope="session")
def configs_dir() -> Path:
    return CONFIGS


@pytest.fixture(scope="session")
def catalog_path() -> Path:
    return CONFIGS / "yolo11_catalog.toml"


@pytest.fixture(scope="session")
def catalog(catalog_path):
    return load_catalog(catalog_path)


@pytest.fixture(scope="session")
def networks(catalog_path):
    return load_networks(catalog_path)


@pytest.fixture(scope="session")
def profile_by_key(catalog):
    profiles, _, _ = catalog
    return {(p.model_id, p.platform_id): p for p in profiles}


@pytest.fixture(scope="session")
def platform_by_id(catalog):
    _, platforms, _ = catalog
    return {p.platform_id: p for p in platforms}


@pytest.fixture()
def baseline_config(catalog, profile_by_key, platform_by_id, networks):
    """The deterministic 40 mph / 300 m cloud run with a unique closed-form trace."""
    _, _, sensing = catalog
    return SimConfig(
        gap=300.0,
        initial_speed=mph_to_mps(40.0),
        deceleration=6.0,
        profile=profile_by_key[("yolo11x", "cloud")],
        platform=platform_by_id["cloud"],
        sensing=sensing,
        detection=DetectionModel(
            detection_range=120.0, visibility_range=140.0, per_frame_probability=1.0
        ),
        network=networks["lan_median"],
        confirm_frames=1,
        service_distribution="deterministic",
        background_arrival_rate=0.0,
        seed=0,
    )
