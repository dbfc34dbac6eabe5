import pytest

from idbg import Debug, MonitorAssertionError, Registry, make_buffer_channel, make_default_semantics, new_context


@pytest.fixture
def debug():
    reg = Registry(new_context(make_default_semantics(), "buffer"), enabled=True)
    reg.add_channel(make_buffer_channel("buffer"))
    return Debug(registry=reg)


def test_log_with_named_level(debug):
    assert debug.log("Dispatcher", "NETWORK", "ERROR", "GET failed")
    (e,) = debug.registry.channel("buffer").events
    assert (e.level, e.call_site.class_id) == (5, "Dispatcher")


def test_uses_calling_thread_binding(debug):
    import threading

    quiet = new_context(make_default_semantics(), "buffer")
    quiet.set_threshold(9)
    debug.registry.bind_thread(threading.current_thread().name, quiet)
    assert not debug.enabled_for("Dispatcher", "NETWORK", "ERROR")
    assert debug.context() is quiet


def test_check_default_policy_raises(debug):
    with pytest.raises(MonitorAssertionError, match="Parameters must be non-null"):
        debug.check("Dispatcher", False, "Parameters must be non-null")


def test_stack_dump_names_caller(debug):
    assert "test_stack_dump_names_caller" in debug.stack_dump().split("\n")[0]


def test_default_construction_uses_env(monkeypatch):
    monkeypatch.setenv("IDBG_ENABLE", "0")
    assert not Debug().registry.global_enabled
