from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import pytest

from nolgat import constants
from nolgat.logger import JsonFormatter, run_log_path, write_run_log, write_system_log


def test_run_logs_are_json() -> None:
    write_run_log("k3-f0.1-r0-nolgat", "epoch", extra={"epoch": 0, "loss": 0.69})
    path = run_log_path("k3-f0.1-r0-nolgat")
    assert path.parent == constants.LOG_DIR
    data = [json.loads(line) for line in path.read_text().splitlines() if line]
    assert data[0]["run_id"] == "k3-f0.1-r0-nolgat"
    assert data[0]["loss"] == 0.69
    assert data[0]["timestamp"].endswith("Z")


def test_system_log_rotation(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setattr("nolgat.logger.MAX_LOG_BYTES", 200)
    for idx in range(50):
        write_system_log(f"entry {idx}")
    log_path = constants.SYSTEM_LOG_FILE
    assert log_path.exists()
    rotated = Path(f"{log_path}.1")
    assert rotated.exists()
    assert not Path(f"{log_path}.6").exists()
    with log_path.open("r", encoding="utf-8") as fh:
        json.loads(fh.readline())


def test_json_formatter_includes_exceptions() -> None:
    try:
        raise RuntimeError("boom")
    except RuntimeError:
        exc_info = sys.exc_info()
    record = logging.LogRecord("nolgat", logging.ERROR, __file__, 1, "stage %s failed", ("train",), exc_info)
    payload = json.loads(JsonFormatter().format(record))
    assert payload["level"] == "ERROR"
    assert payload["message"] == "stage train failed"
    assert "RuntimeError: boom" in payload["exception"]
