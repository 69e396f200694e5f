import numpy as np
import pytest

from config import Architecture, SimParams
from models import METRICS, EvaluationReport, Gnb, GnbKind, Scenario, ScenarioError, Usage, User, even_grid


def test_even_grid_square_and_ragged():
    np.testing.assert_allclose(even_grid(4, 1000, 1000), [[250, 250], [750, 250], [250, 750], [750, 750]])
    ragged = even_grid(5, 900, 900)
    assert ragged.shape == (5, 2)
    np.testing.assert_allclose(ragged[:3, 0], [150, 450, 750])
    assert even_grid(0, 1000, 1000).shape == (0, 2)


def _bs(params: SimParams) -> Gnb:
    return Gnb(0, GnbKind.BASE_STATION, (500.0, 500.0, params.h_bs), 10)


def test_scenario_needs_bs_first():
    params = SimParams()
    tuav = Gnb(0, GnbKind.TUAV, (0.0, 0.0, 80.0), 6)
    with pytest.raises(ScenarioError):
        Scenario(params, (), (tuav,), np.zeros((1, 3)), Architecture.GREEN_TUAV, 0)


def test_scenario_needs_ground_stations_for_tuavs():
    params = SimParams()
    gnbs = (_bs(params), Gnb(1, GnbKind.TUAV, (0.0, 0.0, 80.0), 6), Gnb(2, GnbKind.TUAV, (0.0, 0.0, 80.0), 6))
    with pytest.raises(ScenarioError, match="ground stations"):
        Scenario(params, (), gnbs, np.zeros((1, 3)), Architecture.GREEN_TUAV, 0)


def test_scenario_checks_sar_reference():
    params = SimParams()
    voice_with_data_sar = User(0, (1.0, 1.0, 0.0), Usage.VOICE, True, 5e6, 5e6, params.sar_data)
    with pytest.raises(ScenarioError, match="SAR"):
        Scenario(params, (voice_with_data_sar,), (_bs(params),), np.zeros((0, 3)), Architecture.BS_ONLY, 0)


def test_negative_values_rejected():
    with pytest.raises(ScenarioError):
        User(0, (0.0, 0.0, 0.0), Usage.DATA, True, -1.0, 0.0, 0.0037)
    with pytest.raises(ScenarioError):
        Gnb(1, GnbKind.TUAV, (0.0, 0.0, 80.0), -1)


def test_active_view_keeps_resident_order(make_scenario):
    scenario = make_scenario([(1.0, 2.0), (3.0, 4.0)], bystanders_xy=[(5.0, 6.0)])
    assert scenario.active.ids.tolist() == [0, 1]
    assert scenario.active_indices.tolist() == [0, 1]
    assert scenario.resident_positions.shape == (3, 3)
    assert scenario.active.subset([1]).positions.tolist() == [[3.0, 4.0, 0.0]]


def test_report_metrics():
    report = EvaluationReport(
        ei_ul=1e-4,
        ei_dl=2e-4,
        per_user_power=np.array([0.01, 0.02]),
        per_user_rate=np.array([4e6, 6e6]),
        per_user_exposure=np.array([3.7e-5, 9.4e-5]),
        satisfied_ratio=0.5,
        sum_rate_ul=1e7,
    )
    metrics = report.metrics()
    assert tuple(metrics) == METRICS
    assert metrics["ei_total"] == pytest.approx(3e-4)
    assert metrics["mean_rate_ul"] == 5e6
    assert metrics["max_user_exposure"] == 9.4e-5
    assert metrics["n_active"] == 2.0
