import json

import fluxring.basis as basis_mod
from fluxring import io
from fluxring.analysis import _cached_basis, _cached_template
from fluxring.suite import CRITERIA, criterion_01, run_full_suite


def test_thirteen_criteria():
    assert sorted(CRITERIA) == list(range(1, 14))


def test_same_seed_gives_identical_report(tmp_path):
    texts = []
    for k in range(2):
        res = run_full_suite(seed=0, selected=[4, 12])
        meta = io.Metadata("suite", {"criteria": [4, 12]}, 0, {}, timestamp="fixed")
        p = tmp_path / f"r{k}.json"
        io.write_report(p, res, meta)
        texts.append(p.read_text())
    assert texts[0] == texts[1]
    assert json.loads(texts[0])["pass"]


def test_sign_bug_is_caught(monkeypatch):
    """Dropping the fermionic sign of a hop must break the optimal-flux check."""
    real = basis_mod.apply_hop

    def unsigned(*args, **kwargs):
        res = real(*args, **kwargs)
        return None if res is None else (res[0], 1)

    monkeypatch.setattr(basis_mod, "apply_hop", unsigned)
    _cached_basis.cache_clear()
    _cached_template.cache_clear()
    try:
        assert not criterion_01(seed=0).passed
    finally:
        _cached_template.cache_clear()


def test_failures_are_aggregated(monkeypatch):
    import fluxring.suite as suite

    def boom(seed=0):
        raise RuntimeError("broken")

    monkeypatch.setitem(suite.CRITERIA, 4, boom)
    res = run_full_suite(selected=[4, 12])
    assert [r.passed for r in res] == [False, True]
    assert "broken" in res[0].measured
