from idbg.plotting import plot_statistics
from idbg.statistics import StatisticDescriptor, StatisticsRegistry

PNG = b"\x89PNG\r\n\x1a\n"


def test_plot_statistics(tmp_path):
    reg = StatisticsRegistry()
    reg.define(StatisticDescriptor("MsgPerSecond", unit="messages per second", scale=1000,
                                   default_increment=0.001))
    reg.define(StatisticDescriptor("Drops", unit="messages"))
    reg.increment("MsgPerSecond")
    reg.decrement("Drops")
    out = plot_statistics(reg.states(), tmp_path / "s.png")
    assert out.read_bytes()[:8] == PNG


def test_plot_empty(tmp_path):
    assert plot_statistics([], tmp_path / "e.png").read_bytes()[:8] == PNG
