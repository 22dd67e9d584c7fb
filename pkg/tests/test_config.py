from config import EXIT_CODES, SEARCH_CONFIG, load_fixtures


def test_load_fixtures(capsys):
    fixtures = load_fixtures(["shared_point", "divisibility"], verbose=True)
    assert sorted(fixtures) == ["divisibility", "shared_point"]
    assert fixtures["shared_point"]["sets"] == [["a", "d"], ["b", "d"], ["c", "d"]]
    assert "[OK] Loaded shared_point" in capsys.readouterr().out


def test_every_fixture_is_versioned():
    fixtures = load_fixtures()
    assert "tight_triangle" in fixtures
    assert all(doc["version"] == 1 for doc in fixtures.values())


def test_defaults():
    assert SEARCH_CONFIG["engine"] in ("exhaustive", "sat")
    assert EXIT_CODES == {"ok": 0, "candidate": 2, "usage": 64, "domain": 65, "error": 70}
