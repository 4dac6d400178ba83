"""Tests for settings and the structured logging run context."""

import pytest
import structlog

from borderflux.config.logging import (
    bind_run_context,
    get_logger,
    run_context,
    setup_logging,
)
from borderflux.exceptions import ValidationError


@pytest.fixture(autouse=True)
def clean_context():
    structlog.contextvars.clear_contextvars()
    yield
    structlog.contextvars.clear_contextvars()
    structlog.reset_defaults()


class TestRunContext:
    """Tests for binding command and seed into every log line."""

    def test_binds_command_and_seed(self):
        bind_run_context("model", seed=4, model="gravity")
        assert run_context() == {"command": "model", "seed": 4, "model": "gravity"}

    def test_replaces_previous_run(self):
        bind_run_context("communities", seed=1, scheme="tribe")
        bind_run_context("stats")
        assert run_context() == {"command": "stats"}

    def test_json_lines_carry_context(self, capsys):
        setup_logging("INFO", "json")
        bind_run_context("borders", seed=9)
        get_logger("borderflux.test").info("sampled", samples=3)
        line = capsys.readouterr().err.strip().splitlines()[-1]
        assert '"command": "borders"' in line
        assert '"seed": 9' in line
        assert '"event": "sampled"' in line


class TestSetupLogging:
    """Tests for log level and format validation."""

    def test_unknown_level(self):
        with pytest.raises(ValidationError, match="log level"):
            setup_logging("CHATTY")

    def test_unknown_format(self):
        with pytest.raises(ValidationError, match="log format"):
            setup_logging("INFO", "xml")

    def test_level_is_case_insensitive(self):
        setup_logging("debug", "console")
