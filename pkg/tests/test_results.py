import os

import pandas as pd
import pytest

from config import AppConfig, SimParams
from harness import RESULT_COLUMNS
from results import ResultsIOError, emit_results, read_metadata, read_results


def _table() -> pd.DataFrame:
    return pd.DataFrame(
        [
            ["bs-only", "K", 6.0, "ei_ul", 1.0 / 3.0, 0.01, 0.2, 0.5, 10],
            ["green-tuav", "K", 6.0, "ei_ul", 2.0e-7, 0.0, 2.0e-7, 2.0e-7, 10],
        ],
        columns=list(RESULT_COLUMNS),
    )


def test_empty_table_has_header_only(tmp_path):
    csv_path, _ = emit_results(pd.DataFrame(columns=list(RESULT_COLUMNS)), tmp_path, "empty")
    assert csv_path.read_text() == ",".join(RESULT_COLUMNS) + "\n"


def test_csv_format(tmp_path):
    csv_path, _ = emit_results(_table(), tmp_path, "t")
    lines = csv_path.read_text().splitlines()
    assert lines[0] == ",".join(RESULT_COLUMNS)
    assert lines[1] == "bs-only,K,6,ei_ul,0.333333333,0.01,0.2,0.5,10"
    assert "\r" not in csv_path.read_text()


def test_rewrite_is_byte_identical(tmp_path):
    first, _ = emit_results(_table(), tmp_path / "a", "t")
    second, _ = emit_results(read_results(first), tmp_path / "b", "t")
    assert first.read_bytes() == second.read_bytes()


def test_sidecar_echoes_config(tmp_path):
    config = AppConfig(sim=SimParams(p_max=0.2))
    _, meta_path = emit_results(_table(), tmp_path, "t", config=config, master_seed=4, extra={"figure": "fig6"})
    meta = read_metadata(meta_path.with_suffix(".csv"))
    assert meta["config"] == config.to_dict()
    assert meta["master_seed"] == 4
    assert meta["figure"] == "fig6"
    assert meta["rows"] == 2
    assert meta["sar_dl_placeholder"] is True
    assert AppConfig.from_dict(meta["config"]) == config


def test_sidecars_of_identical_runs_match(tmp_path):
    _, a = emit_results(_table(), tmp_path / "a", "t", config=AppConfig(), master_seed=1)
    _, b = emit_results(_table(), tmp_path / "b", "t", config=AppConfig(), master_seed=1)
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.skipif(os.name == "nt" or os.geteuid() == 0, reason="needs POSIX permissions without root")
def test_unwritable_directory(tmp_path):
    locked = tmp_path / "locked"
    locked.mkdir()
    locked.chmod(0o500)
    try:
        with pytest.raises(ResultsIOError):
            emit_results(_table(), locked, "t")
    finally:
        locked.chmod(0o700)


def test_output_path_is_a_file(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    with pytest.raises(ResultsIOError):
        emit_results(_table(), blocker, "t")


def test_missing_files(tmp_path):
    with pytest.raises(ResultsIOError) as exc:
        read_results(tmp_path / "absent.csv")
    assert exc.value.path.endswith("absent.csv")
    with pytest.raises(ResultsIOError):
        read_metadata(tmp_path / "absent.csv")
