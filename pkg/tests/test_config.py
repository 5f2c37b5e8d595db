import pytest

from src import config
from src.errors import ConfigError


def test_integer_variables(monkeypatch):
    monkeypatch.setenv("MODAL_TEST_INT", " 12 ")
    assert config.get_int_env("MODAL_TEST_INT", 3) == 12
    monkeypatch.setenv("MODAL_TEST_INT", "")
    assert config.get_int_env("MODAL_TEST_INT", 3) == 3
    monkeypatch.setenv("MODAL_TEST_INT", "many")
    with pytest.raises(ConfigError):
        config.get_int_env("MODAL_TEST_INT", 3)


def test_boolean_variables(monkeypatch):
    monkeypatch.setenv("MODAL_TEST_BOOL", "Yes")
    assert config.get_bool_env("MODAL_TEST_BOOL", False) is True
    monkeypatch.setenv("MODAL_TEST_BOOL", "0")
    assert config.get_bool_env("MODAL_TEST_BOOL", True) is False
    monkeypatch.delenv("MODAL_TEST_BOOL")
    assert config.get_bool_env("MODAL_TEST_BOOL", True) is True


def test_initialize_reads_the_environment(monkeypatch):
    for name in ("ENUMERATION_BUDGET", "CACHE_ENABLED", "LOG_LEVEL"):
        monkeypatch.setattr(config, name, getattr(config, name))
    monkeypatch.setenv("MODAL_ENUMERATION_BUDGET", "500")
    monkeypatch.setenv("MODAL_CACHE_ENABLED", "true")
    monkeypatch.setenv("MODAL_LOG_LEVEL", "debug")
    config.initialize_config()
    assert config.ENUMERATION_BUDGET == 500
    assert config.CACHE_ENABLED is True
    assert config.LOG_LEVEL == "DEBUG"


def test_validate_rejects_non_positive_limits(monkeypatch):
    config.validate_config()
    monkeypatch.setattr(config, "SUITE_SHARD_SIZE", 0)
    with pytest.raises(ConfigError, match="SUITE_SHARD_SIZE"):
        config.validate_config()
