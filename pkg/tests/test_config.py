import logging

from gaussrate.config import (
    DEFAULT_TOLERANCES,
    SimulationSettings,
    load_simulation_settings,
    load_tolerances,
    with_general_tolerance,
)


def test_defaults_without_environment():
    assert load_tolerances({}) == DEFAULT_TOLERANCES
    assert load_simulation_settings({}) == SimulationSettings()


def test_general_tolerance_override():
    tol = load_tolerances({"GAUSSRATE_TOL": "1e-6"})
    assert tol.symp == tol.cpt == tol.tau == tol.eta == tol.recomp == 1e-6
    assert tol.rank == DEFAULT_TOLERANCES.rank
    assert tol.completion == DEFAULT_TOLERANCES.completion


def test_rank_tolerance_override():
    tol = load_tolerances({"GAUSSRATE_RANK_TOL": "1e-5"})
    assert tol.rank == 1e-5
    assert tol.symp == DEFAULT_TOLERANCES.symp


def test_with_general_tolerance_keeps_structural_values():
    tol = with_general_tolerance(DEFAULT_TOLERANCES, 1e-3)
    assert tol.eta == 1e-3
    assert tol.rank == DEFAULT_TOLERANCES.rank


def test_invalid_values_warn_and_fall_back(caplog):
    with caplog.at_level(logging.WARNING, logger="gaussrate.config"):
        tol = load_tolerances({"GAUSSRATE_TOL": "abc", "GAUSSRATE_RANK_TOL": "-1"})
        settings = load_simulation_settings(
            {"GAUSSRATE_WORKERS": "0", "GAUSSRATE_CHUNK_SIZE": "many"}
        )
    assert tol == DEFAULT_TOLERANCES
    assert settings == SimulationSettings()
    assert caplog.text.count("Invalid") == 4


def test_simulation_settings_from_environment():
    settings = load_simulation_settings(
        {"GAUSSRATE_WORKERS": "4", "GAUSSRATE_CHUNK_SIZE": "5000", "GAUSSRATE_SAMPLE_CAP": "10"}
    )
    assert settings == SimulationSettings(chunk_size=5000, workers=4, sample_cap=10)
