import pytest

from stabpovm.golden import FIXTURES, format_table, run_fixtures


@pytest.mark.parametrize("fx", FIXTURES, ids=lambda f: f.name)
def test_fixture(fx):
    rows = fx.run()
    assert rows
    bad = [r for r in rows if not r.ok]
    assert not bad, format_table(bad)


def test_filters():
    assert {r.fixture for r in run_fixtures("zfree_counts")} == {"zfree_counts"}
    assert {r.fixture for r in run_fixtures("frame_checks")} == {"frame", "universal_2n"}
    assert run_fixtures("no-such-fixture") == []


def test_zfree_count_checks_values():
    got = {r.label: r.computed for r in run_fixtures("zfree_counts")}
    assert sorted(got.values()) == [16, 36, 42, 45, 81]
